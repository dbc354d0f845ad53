#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "sgc/bitcode.hpp"
#include "sgc/errors.hpp"

using namespace sgc;

namespace {

// All m-subsets of [0, N) in colex order: sort by the reversed element list.
std::vector<std::vector<std::uint64_t>> colex_listing(std::uint64_t N, std::uint64_t m) {
  std::vector<std::vector<std::uint64_t>> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << N); ++mask) {
    if (static_cast<std::uint64_t>(__builtin_popcountll(mask)) != m) continue;
    std::vector<std::uint64_t> s;
    for (std::uint64_t e = 0; e < N; ++e)
      if (mask >> e & 1u) s.push_back(e);
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::lexicographical_compare(a.rbegin(), a.rend(), b.rbegin(), b.rend());
  });
  return out;
}

BigInt gmp_binomial(std::uint64_t n, std::uint64_t k) {
  BigInt r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

// sum_i C(e_i, i + 1), each binomial by a running product.
BigInt rank_by_formula(const std::vector<std::uint64_t>& s) {
  BigInt r = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::uint64_t k = i + 1;
    if (s[i] < k) continue;
    BigInt c = 1;
    for (std::uint64_t j = 0; j < k; ++j) {
      c *= static_cast<unsigned long>(s[i] - j);
      mpz_divexact_ui(c.get_mpz_t(), c.get_mpz_t(), static_cast<unsigned long>(j + 1));
    }
    r += c;
  }
  return r;
}

std::size_t ceil_log2(const BigInt& v) {
  if (v <= 1) return 0;
  BigInt w = v - 1;
  return mpz_sizeinbase(w.get_mpz_t(), 2);
}

std::vector<std::uint64_t> random_subset(std::uint64_t N, std::uint64_t m, std::mt19937_64& rng) {
  std::set<std::uint64_t> s;
  while (s.size() < m) s.insert(rng() % N);
  return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("write_uint examples") {
  CodeStream s;
  s.write_uint(5, 7);
  CHECK(s.bit_size() == 3);
  CHECK(s.bytes()[0] == 0b10100000);
  s.write_uint(0, 0);
  CHECK(s.bit_size() == 3);
  s.write_uint(9, 100);
  CHECK(s.bit_size() == 10);
  CHECK_THROWS_AS(s.write_uint(8, 7), std::invalid_argument);
}

TEST_CASE("bit widths") {
  CHECK(bit_width(std::uint64_t{0}) == 0);
  CHECK(bit_width(std::uint64_t{1}) == 1);
  CHECK(bit_width(std::uint64_t{7}) == 3);
  CHECK(bit_width(std::uint64_t{8}) == 4);
  CHECK(bit_width(~std::uint64_t{0}) == 64);
  CHECK(bit_width(BigInt(100)) == 7);
}

TEST_CASE("binomials match GMP") {
  for (std::uint64_t n = 0; n < 60; ++n)
    for (std::uint64_t k = 0; k <= n + 2; ++k) CHECK(binomial(n, k) == gmp_binomial(n, k));
  CHECK(binomial(1'000'000, 3) == gmp_binomial(1'000'000, 3));
  CHECK(log_binomial(10, 3) == doctest::Approx(std::log(120.0)));
}

TEST_CASE("colex rank examples") {
  const std::vector<std::uint64_t> a{0, 1}, b{1, 3}, c{2, 3};
  CHECK(rank_subset(a, 4) == 0);
  CHECK(rank_subset(b, 4) == 4);
  CHECK(rank_subset(c, 4) == 5);
  CHECK(unrank_subset(0, 4, 2) == a);
  CHECK(unrank_subset(5, 4, 2) == c);
  CHECK(unrank_subset(4, 4, 2) == b);
  CHECK_THROWS_AS(unrank_subset(6, 4, 2), std::invalid_argument);
  CHECK_THROWS_AS(unrank_subset(-1, 4, 2), std::invalid_argument);
  const std::vector<std::uint64_t> dup{1, 1}, unsorted{3, 1}, out{1, 4};
  CHECK_THROWS_AS(rank_subset(dup, 4), std::invalid_argument);
  CHECK_THROWS_AS(rank_subset(unsorted, 4), std::invalid_argument);
  CHECK_THROWS_AS(rank_subset(out, 4), std::invalid_argument);
}

TEST_CASE("rank agrees with a full colex listing") {
  for (std::uint64_t N = 0; N <= 10; ++N) {
    for (std::uint64_t m = 0; m <= N; ++m) {
      const auto listing = colex_listing(N, m);
      CHECK(BigInt(listing.size()) == binomial(N, m));
      for (std::size_t r = 0; r < listing.size(); ++r) {
        CHECK(rank_subset(listing[r], N) == r);
        CHECK(unrank_subset(r, N, m) == listing[r]);
      }
    }
  }
}

TEST_CASE("rank/unrank roundtrip on large universes") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 400; ++t) {
    const std::uint64_t N = 1 + rng() % 1'000'000;
    const std::uint64_t m = rng() % std::min<std::uint64_t>(N + 1, 1000);
    const auto s = random_subset(N, m, rng);
    const BigInt r = rank_subset(s, N);
    CHECK(r == rank_by_formula(s));
    CHECK(r < binomial(N, m));
    CHECK(unrank_subset(r, N, m) == s);
  }
  // Past the direct-sum size the move-chain path takes over.
  for (int t = 0; t < 6; ++t) {
    const std::uint64_t N = 100'000 + rng() % 900'000;
    const auto s = random_subset(N, 2040 + rng() % 20, rng);
    const BigInt r = rank_subset(s, N);
    CHECK(r == rank_by_formula(s));
    CHECK(unrank_subset(r, N, s.size()) == s);
  }
}

TEST_CASE("write_subset width law") {
  CodeStream s;
  const std::vector<std::uint64_t> none, all{0, 1, 2, 3, 4};
  s.write_subset(none, 9);
  CHECK(s.bit_size() == 0);
  s.write_subset(all, 5);
  CHECK(s.bit_size() == 0);
  const std::vector<std::uint64_t> ex{1, 3};
  s.write_subset(ex, 6);
  CHECK(s.bit_size() == 4);
  CHECK((s.bytes()[0] >> 4) == 4);

  std::mt19937_64 rng(3);
  for (int t = 0; t < 300; ++t) {
    const std::uint64_t N = 1 + rng() % 5000;
    const std::uint64_t m = rng() % std::min<std::uint64_t>(N + 1, 200);
    CodeStream w;
    w.write_subset(random_subset(N, m, rng), N);
    CHECK(w.bit_size() == ceil_log2(binomial(N, m)));
    CHECK(subset_width(N, m) == w.bit_size());
    CHECK(w.nats() <= 1.0 + log_binomial(N, m) + 1e-9);
  }
}

TEST_CASE("subset width cap") {
  CHECK_THROWS_AS(subset_width(std::uint64_t{1} << 40, std::uint64_t{1} << 20), CapacityError);
}

TEST_CASE("section accounting") {
  CodeStream s;
  s.begin_section("a");
  s.write_bits(0x5, 3);
  s.begin_section("b");
  s.write_uint(9, 100);
  s.pad_to_byte();
  s.write_bits(1, 1);
  std::size_t total = 0;
  for (const auto& sec : s.sections()) total += sec.bits;
  CHECK(total == s.bit_size());
  CHECK(s.section_bits("b") == 8);
  CHECK(s.section_bits("padding") == 6);
  CHECK(s.nats() == doctest::Approx(static_cast<double>(s.bit_size()) * std::log(2.0)));

  CodeStream t;
  t.begin_section("c");
  t.write_bits(3, 2);
  t.append(s);
  CHECK(t.bit_size() == 2 + s.bit_size());
  CHECK(t.section_bits("b") == 8);
}

TEST_CASE("scripted roundtrip of mixed fields") {
  std::mt19937_64 rng(77);
  struct Field {
    int kind;
    std::uint64_t a, b;
    std::vector<std::uint64_t> subset;
    BigInt big;
  };
  for (int trial = 0; trial < 50; ++trial) {
    CodeStream out;
    std::vector<Field> script;
    for (int i = 0; i < 40; ++i) {
      Field f{static_cast<int>(rng() % 4), 0, 0, {}, 0};
      if (f.kind == 0) {
        f.b = rng() >> (rng() % 64);
        f.a = f.b == 0 ? 0 : rng() % (f.b + 1);
        if (f.b == ~std::uint64_t{0}) f.a = rng();
        out.write_uint(f.a, f.b);
      } else if (f.kind == 1) {
        f.b = 1 + rng() % 300;
        f.subset = random_subset(f.b, rng() % (f.b + 1), rng);
        f.a = f.subset.size();
        out.write_subset(f.subset, f.b);
      } else if (f.kind == 2) {
        f.big = binomial(200, 1 + rng() % 100) - 1;
        out.write_big(f.big, bit_width(f.big));
      } else {
        out.pad_to_byte();
      }
      script.push_back(f);
    }
    BitReader in(out.bytes(), out.bit_size());
    for (const Field& f : script) {
      if (f.kind == 0) {
        CHECK(in.read_uint(f.b) == f.a);
      } else if (f.kind == 1) {
        CHECK(in.read_subset(f.b, f.a) == f.subset);
      } else if (f.kind == 2) {
        CHECK(in.read_big(bit_width(f.big)) == f.big);
      } else {
        in.align_to_byte();
      }
    }
    CHECK(in.remaining() == 0);
  }
}

TEST_CASE("reader rejects overruns and out-of-range values") {
  CodeStream s;
  s.write_bits(7, 3);
  BitReader in(s.bytes(), s.bit_size());
  CHECK_THROWS_AS(in.read_uint(4), MalformedStream);
  BitReader again(s.bytes(), s.bit_size());
  again.read_bits(2);
  CHECK_THROWS_AS(again.read_bits(2), MalformedStream);
}
