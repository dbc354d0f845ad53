#include "sgc/bitcode.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sgc/errors.hpp"

namespace sgc {

namespace {

using u64 = std::uint64_t;

// Precision (bits) of the scaled remainder used while guessing a run of
// unrank decisions between exact resyncs.
constexpr std::size_t kGuessPrecision = 4096;

void range_product(mpz_class& out, u64 lo, u64 hi) {
  if (hi < lo) {
    out = 1;
    return;
  }
  if (hi - lo < 24) {
    out = static_cast<unsigned long>(lo);
    for (u64 t = lo + 1; t <= hi; ++t) out *= static_cast<unsigned long>(t);
    return;
  }
  const u64 mid = lo + (hi - lo) / 2;
  mpz_class right;
  range_product(out, lo, mid);
  range_product(right, mid + 1, hi);
  out *= right;
}

// Ratio C(e, k) / C(top_e, k + 1) for top_e > e >= k, as p / q with the
// common factors of the two factorial quotients cancelled.
struct Move {
  u64 top_e;
  u64 e;
  u64 k;
};

void move_ratio(const Move& mv, mpz_class& p, mpz_class& q) {
  const u64 E = mv.top_e;
  const u64 e = mv.e;
  const u64 j = mv.k;
  range_product(p, e - j + 1, std::min(e, E - j - 1));
  p *= static_cast<unsigned long>(j + 1);
  range_product(q, std::max(e + 1, E - j), E);
}

double move_bits(const Move& mv) {
  const u64 d = mv.top_e - mv.e;
  const double factors = static_cast<double>(std::min<u64>(d, mv.k + 1)) + 1.0;
  return factors * std::log2(static_cast<double>(mv.top_e) + 2.0);
}

struct Split {
  mpz_class t;
  mpz_class p;
  mpz_class q;
};

// Binary splitting over a run of moves r_1..r_B:
//   t / q = sum_j prod_{l <= j} r_l,   p / q = prod_l r_l.
void split_moves(std::span<const Move> moves, Split& out) {
  if (moves.size() == 1) {
    move_ratio(moves[0], out.p, out.q);
    out.t = out.p;
    return;
  }
  const std::size_t mid = moves.size() / 2;
  Split right;
  split_moves(moves.first(mid), out);
  split_moves(moves.subspan(mid), right);
  out.t *= right.q;
  right.t *= out.p;
  out.t += right.t;
  out.p *= right.p;
  out.q *= right.q;
}

// Walks the chain of moves starting from base = C(top_e, k + 1) of the first
// move. Returns the sum of the binomials reached after each move; base ends as
// the last one. Runs are flushed once their factor size reaches the size of
// base so each exact division stays balanced.
mpz_class apply_moves(mpz_class& base, std::span<const Move> moves) {
  mpz_class sum = 0;
  std::size_t start = 0;
  while (start < moves.size()) {
    const double limit =
        std::max(65536.0, static_cast<double>(mpz_sizeinbase(base.get_mpz_t(), 2)));
    double acc = 0.0;
    std::size_t end = start;
    while (end < moves.size() && (end == start || acc < limit)) {
      acc += move_bits(moves[end]);
      ++end;
    }
    Split s;
    split_moves(moves.subspan(start, end - start), s);
    mpz_class term = base * s.t;
    mpz_divexact(term.get_mpz_t(), term.get_mpz_t(), s.q.get_mpz_t());
    sum += term;
    base *= s.p;
    mpz_divexact(base.get_mpz_t(), base.get_mpz_t(), s.q.get_mpz_t());
    start = end;
  }
  return sum;
}

double log_binom_approx(u64 n, u64 k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double log_positive(const mpz_class& v) {
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, v.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp) * std::numbers::ln2;
}

// Remainder seen at scale 2^-s. The true scaled remainder lies in
// [x - ex, x + ex + u) where u = 1 if s > 0 (floor truncation). A scaled
// binomial c with error ec stands for a true value in [c - ec, c + ec].
// At s == 0 every quantity is exact and all errors are zero.
struct Scaled {
  mpz_class x;
  u64 ex = 0;
  unsigned u = 0;
  double log_scale = 0.0;
};

bool surely_le(const mpz_class& c, u64 ec, const Scaled& r) {
  const mpz_class lhs = c + static_cast<unsigned long>(ec + r.ex);
  return lhs <= r.x;
}

bool surely_gt(const mpz_class& c, u64 ec, const Scaled& r) {
  const mpz_class rhs = r.x + static_cast<unsigned long>(r.ex + r.u + ec);
  return c >= rhs;
}

enum class Decision { accept, ambiguous, zero };

struct Found {
  Decision decision = Decision::ambiguous;
  u64 e = 0;
  mpz_class c;
  u64 ec = 0;
};

// Scaled C(g, k) reached from cb ~ C(top_e, k + 1); ratio <= 1, so the error
// grows by at most one truncation.
void jump(const mpz_class& cb, u64 eb, u64 top_e, u64 g, u64 k, const Scaled& r,
          mpz_class& c, u64& ec) {
  mpz_class p;
  mpz_class q;
  move_ratio({top_e, g, k}, p, q);
  c = cb * p;
  mpz_fdiv_q(c.get_mpz_t(), c.get_mpz_t(), q.get_mpz_t());
  ec = eb + r.u;
}

// Largest e in [k - 1, top_e - 1] with C(e, k) <= remainder, given
// cb ~ C(top_e, k + 1). Requires top_e > k.
Found find_element(u64 k, u64 top_e, const mpz_class& cb, u64 eb, const Scaled& r) {
  if (r.u == 0 && r.x == 0) return {Decision::zero, 0, {}, 0};
  if (r.x <= static_cast<unsigned long>(r.ex)) return {Decision::ambiguous, 0, {}, 0};

  // Estimate with log-gamma: galloping down from the top, then bisection.
  const double lr = log_positive(r.x) + r.log_scale + 1e-9;
  const u64 hi_e = top_e - 1;
  u64 est = k - 1;
  if (log_binom_approx(hi_e, k) <= lr) {
    est = hi_e;
  } else {
    u64 above = hi_e;  // log C(above, k) > lr
    u64 step = 1;
    u64 below = k - 1;  // log C(below, k) <= lr, or the floor k - 1
    while (true) {
      if (above < k + step) break;
      const u64 probe = above - step;
      if (log_binom_approx(probe, k) <= lr) {
        below = probe;
        break;
      }
      above = probe;
      step *= 2;
    }
    while (above - below > 1) {
      const u64 mid = below + (above - below) / 2;
      if (mid >= k && log_binom_approx(mid, k) <= lr) {
        below = mid;
      } else {
        above = mid;
      }
    }
    est = below;
  }

  u64 g = std::min(hi_e, est + 3);
  Found f;
  while (true) {
    jump(cb, eb, top_e, g, k, r, f.c, f.ec);
    if (g == hi_e || surely_gt(f.c, f.ec, r)) break;
    g = std::min(hi_e, g + std::max<u64>(4, (g - k + 1) / 8));
  }
  while (true) {
    if (g + 1 == k) {
      // C(k, k) = 1 exceeds the remainder, so it is zero.
      f.decision = Decision::zero;
      return f;
    }
    if (surely_le(f.c, f.ec, r)) {
      f.decision = Decision::accept;
      f.e = g;
      return f;
    }
    if (!surely_gt(f.c, f.ec, r)) {
      f.decision = Decision::ambiguous;
      return f;
    }
    // C(g - 1, k) = C(g, k) (g - k) / g
    f.c *= static_cast<unsigned long>(g - k);
    mpz_fdiv_q_ui(f.c.get_mpz_t(), f.c.get_mpz_t(), static_cast<unsigned long>(g));
    f.ec += r.u;
    --g;
  }
}

Scaled scale_remainder(const mpz_class& rem, std::size_t s) {
  Scaled r;
  mpz_fdiv_q_2exp(r.x.get_mpz_t(), rem.get_mpz_t(), s);
  r.u = s > 0 ? 1 : 0;
  r.log_scale = static_cast<double>(s) * std::numbers::ln2;
  return r;
}

void check_subset(std::span<const u64> elements, u64 universe) {
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (elements[i] >= universe) {
      throw std::invalid_argument("subset element out of range");
    }
    if (i > 0 && elements[i] <= elements[i - 1]) {
      throw std::invalid_argument("subset elements must be strictly increasing");
    }
  }
}

BigInt checked_binomial(u64 universe, u64 m) {
  if (m > universe) throw std::invalid_argument("subset larger than universe");
  const double est_bits = log_binom_approx(universe, m) / std::numbers::ln2;
  if (est_bits > static_cast<double>(kMaxSubsetBits) + 64.0) {
    throw CapacityError("subset block C(" + std::to_string(universe) + ", " +
                        std::to_string(m) + ") exceeds the size cap");
  }
  BigInt c = binomial(universe, m);
  if (bit_width(BigInt(c - 1)) > kMaxSubsetBits) {
    throw CapacityError("subset block exceeds the size cap");
  }
  return c;
}

// C(universe, m + 1) from C(universe, m); requires m < universe.
BigInt next_binomial(const BigInt& c, u64 universe, u64 m) {
  BigInt out = c * static_cast<unsigned long>(universe - m);
  mpz_divexact_ui(out.get_mpz_t(), out.get_mpz_t(), static_cast<unsigned long>(m + 1));
  return out;
}

// Direct sums of per-element binomials; cheaper than the move chain while
// the subset is small.
constexpr u64 kDirectLimit = 2048;

BigInt rank_direct(std::span<const u64> elements) {
  BigInt sum = 0;
  BigInt c;
  for (u64 i = 0; i < elements.size(); ++i) {
    if (elements[i] <= i) continue;
    mpz_bin_uiui(c.get_mpz_t(), static_cast<unsigned long>(elements[i]), static_cast<unsigned long>(i + 1));
    sum += c;
  }
  return sum;
}

std::vector<u64> unrank_direct(BigInt rem, u64 universe, u64 m) {
  std::vector<u64> out(m);
  u64 top = universe;  // elements below this bound remain
  BigInt c;
  for (u64 k = m; k > 0; --k) {
    if (rem == 0) {
      for (u64 j = k; j >= 1; --j) out[j - 1] = j - 1;
      break;
    }
    // Largest e < top with C(e, k) <= rem; e >= k since rem >= 1 = C(k, k).
    const double lr = log_positive(rem) + 1e-9;
    u64 lo = k, hi = top - 1;
    if (log_binom_approx(hi, k) > lr) {
      while (hi - lo > 1) {
        const u64 mid = lo + (hi - lo) / 2;
        if (log_binom_approx(mid, k) <= lr) lo = mid; else hi = mid;
      }
    } else {
      lo = hi;
    }
    u64 e = lo;
    mpz_bin_uiui(c.get_mpz_t(), static_cast<unsigned long>(e), static_cast<unsigned long>(k));
    while (c > rem) {
      // C(e - 1, k) = C(e, k) (e - k) / e
      c *= static_cast<unsigned long>(e - k);
      mpz_divexact_ui(c.get_mpz_t(), c.get_mpz_t(), static_cast<unsigned long>(e));
      --e;
    }
    while (e + 1 < top) {
      BigInt next = c * static_cast<unsigned long>(e + 1);
      mpz_divexact_ui(next.get_mpz_t(), next.get_mpz_t(), static_cast<unsigned long>(e + 1 - k));
      if (next > rem) break;
      c = std::move(next);
      ++e;
    }
    out[k - 1] = e;
    rem -= c;
    top = e;
  }
  if (rem != 0) throw std::logic_error("unrank: inconsistent remainder");
  return out;
}

BigInt rank_with_base(std::span<const u64> elements, u64 universe, BigInt base) {
  const u64 m = elements.size();
  if (m == 0 || m == universe) return 0;
  // Leading elements equal to their index contribute C(i-1, i) = 0.
  u64 zeros = 0;
  while (zeros < m && elements[zeros] == zeros) ++zeros;
  std::vector<Move> moves;
  moves.reserve(m - zeros);
  u64 top = universe;
  for (u64 k = m; k > zeros; --k) {
    const u64 e = elements[k - 1];
    moves.push_back({top, e, k});
    top = e;
  }
  return apply_moves(base, moves);
}

std::vector<u64> unrank_with_base(BigInt rem, u64 universe, u64 m, BigInt base) {
  std::vector<u64> out(m);
  if (m == 0) return out;
  if (m == universe) {
    for (u64 i = 0; i < m; ++i) out[i] = i;
    return out;
  }
  u64 k = m;
  u64 top = universe;  // bound for element k; base = C(top, k + 1)
  auto fill_zeros = [&] {
    for (u64 j = k; j >= 1; --j) out[j - 1] = j - 1;
    k = 0;
  };
  while (k > 0) {
    if (rem == 0 || top == k) {
      if (rem != 0) throw std::logic_error("unrank: inconsistent remainder");
      fill_zeros();
      break;
    }
    const std::size_t bits = mpz_sizeinbase(rem.get_mpz_t(), 2);
    const std::size_t s = bits > kGuessPrecision ? bits - kGuessPrecision : 0;
    Scaled r = scale_remainder(rem, s);
    mpz_class cb;
    mpz_fdiv_q_2exp(cb.get_mpz_t(), base.get_mpz_t(), s);
    u64 eb = r.u;

    std::vector<Move> moves;
    bool zero = false;
    u64 walk_k = k;
    u64 walk_top = top;
    while (walk_k > 0 && walk_top > walk_k) {
      Found f = find_element(walk_k, walk_top, cb, eb, r);
      if (f.decision == Decision::zero) {
        zero = true;
        break;
      }
      if (f.decision == Decision::ambiguous) break;
      moves.push_back({walk_top, f.e, walk_k});
      r.x -= f.c;
      r.ex += f.ec;
      cb = std::move(f.c);
      eb = f.ec;
      walk_top = f.e;
      --walk_k;
    }

    if (moves.empty() && !zero && walk_top > walk_k) {
      // The guess stalled on a near tie: decide one element exactly.
      Scaled exact = scale_remainder(rem, 0);
      Found f = find_element(k, top, base, 0, exact);
      if (f.decision == Decision::zero) {
        zero = true;
      } else if (f.decision == Decision::accept) {
        moves.push_back({top, f.e, k});
      } else {
        throw std::logic_error("unrank: exact step undecided");
      }
    }
    if (!moves.empty()) {
      rem -= apply_moves(base, moves);
      if (rem < 0) throw std::logic_error("unrank: negative remainder");
      for (const Move& mv : moves) out[mv.k - 1] = mv.e;
      top = moves.back().e;
      k = moves.back().k - 1;
    }
    if (zero || (k > 0 && top == k)) {
      if (rem != 0) throw std::logic_error("unrank: inconsistent remainder");
      fill_zeros();
    }
  }
  return out;
}

}  // namespace

std::size_t bit_width(std::uint64_t max) { return static_cast<std::size_t>(std::bit_width(max)); }

std::size_t bit_width(const BigInt& max) {
  if (sgn(max) <= 0) return 0;
  return mpz_sizeinbase(max.get_mpz_t(), 2);
}

BigInt binomial(std::uint64_t n, std::uint64_t k) {
  BigInt out;
  if (k > n) return 0;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return out;
}

double log_big(const BigInt& v) {
  if (sgn(v) <= 0) throw std::invalid_argument("log_big requires a positive value");
  return log_positive(v);
}

double log_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) throw std::invalid_argument("log_binomial: k > n");
  return log_positive(binomial(n, k));
}

std::size_t subset_width(std::uint64_t universe, std::uint64_t m) {
  return bit_width(BigInt(checked_binomial(universe, m) - 1));
}

BigInt rank_subset(std::span<const std::uint64_t> elements, std::uint64_t universe) {
  check_subset(elements, universe);
  const u64 m = elements.size();
  if (m == 0 || m == universe) return 0;
  if (m <= kDirectLimit) return rank_direct(elements);
  return rank_with_base(elements, universe, binomial(universe, m + 1));
}

std::vector<std::uint64_t> unrank_subset(const BigInt& rank, std::uint64_t universe,
                                         std::uint64_t m) {
  if (m > universe) throw std::invalid_argument("unrank_subset: m > universe");
  const BigInt total = binomial(universe, m);
  if (sgn(rank) < 0 || rank >= total) {
    throw std::invalid_argument("unrank_subset: rank out of range");
  }
  if (m <= kDirectLimit) return unrank_direct(rank, universe, m);
  const BigInt base = m < universe ? next_binomial(total, universe, m) : BigInt(0);
  return unrank_with_base(rank, universe, m, base);
}

// ---------------------------------------------------------------- CodeStream

CodeStream::Section& CodeStream::current() {
  if (!resume_.empty()) {
    sections_.push_back({std::move(resume_), 0});
    resume_.clear();
  }
  if (sections_.empty()) sections_.push_back({"unlabeled", 0});
  return sections_.back();
}

void CodeStream::begin_section(std::string label) {
  resume_.clear();
  sections_.push_back({std::move(label), 0});
}

void CodeStream::push_bit(bool bit) {
  if (bit_size_ % 8 == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bit_size_ % 8));
  ++bit_size_;
}

void CodeStream::write_bits(std::uint64_t value, unsigned width) {
  if (width > 64) throw std::invalid_argument("write_bits: width > 64");
  if (width < 64 && (value >> width) != 0) {
    throw std::invalid_argument("write_bits: value does not fit in width");
  }
  Section& sec = current();
  for (unsigned b = width; b-- > 0;) push_bit((value >> b) & 1u);
  sec.bits += width;
}

void CodeStream::write_uint(std::uint64_t value, std::uint64_t max) {
  if (value > max) throw std::invalid_argument("write_uint: value exceeds max");
  write_bits(value, static_cast<unsigned>(bit_width(max)));
}

void CodeStream::write_big(const BigInt& value, std::size_t width) {
  if (sgn(value) < 0 || bit_width(value) > width) {
    throw std::invalid_argument("write_big: value does not fit in width");
  }
  Section& sec = current();
  const std::size_t nbytes = (width + 7) / 8;
  std::vector<std::uint8_t> buf(nbytes, 0);
  if (sgn(value) > 0) {
    std::size_t count = 0;
    const std::size_t vbytes = (mpz_sizeinbase(value.get_mpz_t(), 2) + 7) / 8;
    mpz_export(buf.data() + (nbytes - vbytes), &count, 1, 1, 1, 0, value.get_mpz_t());
  }
  const std::size_t skip = nbytes * 8 - width;
  for (std::size_t b = skip; b < nbytes * 8; ++b) {
    push_bit((buf[b / 8] >> (7 - b % 8)) & 1u);
  }
  sec.bits += width;
}

void CodeStream::write_big_uint(const BigInt& value, const BigInt& max) {
  if (value > max) throw std::invalid_argument("write_big_uint: value exceeds max");
  write_big(value, bit_width(max));
}

void CodeStream::write_subset(std::span<const std::uint64_t> elements, std::uint64_t universe) {
  check_subset(elements, universe);
  const u64 m = elements.size();
  const BigInt total = checked_binomial(universe, m);
  const std::size_t width = bit_width(BigInt(total - 1));
  BigInt rank = 0;
  if (m > 0 && m < universe) {
    rank = rank_with_base(elements, universe, next_binomial(total, universe, m));
  }
  write_big(rank, width);
}

void CodeStream::pad_to_byte() {
  if (bit_size_ % 8 == 0) return;
  std::string resume = current().label;
  sections_.push_back({"padding", 0});
  while (bit_size_ % 8 != 0) {
    push_bit(false);
    ++sections_.back().bits;
  }
  resume_ = std::move(resume);
}

void CodeStream::append(const CodeStream& other) {
  resume_.clear();
  for (const Section& sec : other.sections_) sections_.push_back({sec.label, 0});
  std::size_t pos = 0;
  std::size_t sec_index = sections_.size() - other.sections_.size();
  for (const Section& sec : other.sections_) {
    for (std::size_t b = 0; b < sec.bits; ++b, ++pos) {
      push_bit((other.bytes_[pos / 8] >> (7 - pos % 8)) & 1u);
    }
    sections_[sec_index++].bits = sec.bits;
  }
}

double CodeStream::nats() const noexcept {
  return static_cast<double>(bit_size_) * std::numbers::ln2;
}

std::size_t CodeStream::section_bits(std::string_view label) const {
  std::size_t total = 0;
  for (const Section& sec : sections_) {
    if (sec.label == label) total += sec.bits;
  }
  return total;
}

// ----------------------------------------------------------------- BitReader

BitReader::BitReader(std::span<const std::uint8_t> bytes, std::size_t bit_limit)
    : bytes_(bytes), limit_(std::min(bit_limit, bytes.size() * 8)) {}

void BitReader::require(std::size_t bits, const char* what) const {
  if (bits > limit_ - pos_) {
    throw MalformedStream(std::string("truncated stream while reading ") + what, pos_);
  }
}

std::uint64_t BitReader::read_bits(unsigned width) {
  if (width > 64) throw std::invalid_argument("read_bits: width > 64");
  require(width, "fixed-width field");
  std::uint64_t v = 0;
  for (unsigned b = 0; b < width; ++b, ++pos_) {
    v = (v << 1) | ((bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u);
  }
  return v;
}

std::uint64_t BitReader::read_uint(std::uint64_t max) {
  const std::size_t at = pos_;
  const std::uint64_t v = read_bits(static_cast<unsigned>(bit_width(max)));
  if (v > max) throw MalformedStream("field value exceeds its range", at);
  return v;
}

BigInt BitReader::read_big(std::size_t width) {
  require(width, "big integer field");
  const std::size_t nbytes = (width + 7) / 8;
  std::vector<std::uint8_t> buf(nbytes, 0);
  const std::size_t skip = nbytes * 8 - width;
  for (std::size_t b = skip; b < nbytes * 8; ++b, ++pos_) {
    if ((bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u) {
      buf[b / 8] |= static_cast<std::uint8_t>(0x80u >> (b % 8));
    }
  }
  BigInt v = 0;
  if (nbytes > 0) mpz_import(v.get_mpz_t(), nbytes, 1, 1, 1, 0, buf.data());
  return v;
}

BigInt BitReader::read_big_uint(const BigInt& max) {
  const std::size_t at = pos_;
  BigInt v = read_big(bit_width(max));
  if (v > max) throw MalformedStream("field value exceeds its range", at);
  return v;
}

std::vector<std::uint64_t> BitReader::read_subset(std::uint64_t universe, std::uint64_t m) {
  const std::size_t at = pos_;
  if (m > universe) throw MalformedStream("subset size exceeds universe", at);
  BigInt total;
  try {
    total = checked_binomial(universe, m);
  } catch (const CapacityError&) {
    throw MalformedStream("subset block exceeds the size cap", at);
  }
  const BigInt rank = read_big(bit_width(BigInt(total - 1)));
  if (rank >= total) throw MalformedStream("subset rank out of range", at);
  if (m == 0 || m == universe) return unrank_with_base(rank, universe, m, 0);
  return unrank_with_base(rank, universe, m, next_binomial(total, universe, m));
}

void BitReader::align_to_byte() {
  const std::size_t target = (pos_ + 7) / 8 * 8;
  require(target - pos_, "padding");
  pos_ = target;
}

}  // namespace sgc
