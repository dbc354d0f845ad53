#include "sgc/graphon_codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sgc/errors.hpp"

namespace sgc {

namespace {

constexpr const char* kPart1[] = {"heavy.r_count", "heavy.r_rank", "heavy.m_star", "heavy.labels"};
constexpr const char* kPart2[] = {"heavy.block_counts", "heavy.block_ranks"};

std::uint64_t choose2(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

// Cell index of (a, b) inside a block: row-major upper triangle for diagonal
// blocks, row-major rectangle otherwise.
std::uint64_t diagonal_cell(std::uint64_t a, std::uint64_t b, std::uint64_t size) {
  return a * size - a * (a + 1) / 2 + (b - a - 1);
}

std::pair<std::uint64_t, std::uint64_t> diagonal_pair(std::uint64_t cell, std::uint64_t size) {
  auto row_start = [&](std::uint64_t a) { return a * size - a * (a + 1) / 2; };
  std::uint64_t lo = 0;
  std::uint64_t hi = size - 1;
  while (lo + 1 < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (row_start(mid) <= cell ? lo : hi) = mid;
  }
  return {lo, lo + 1 + (cell - row_start(lo))};
}

}  // namespace

double phi(double x) {
  if (x < 0.0) throw std::invalid_argument("phi: x must be nonnegative");
  return x > std::exp(2.0) ? std::sqrt(x) / std::log(x) : 1.0;
}

Schedule schedule(std::size_t m_star, std::size_t n) {
  if (m_star == 0 || n == 0) throw std::invalid_argument("schedule: m_star and n must be positive");
  Schedule s;
  s.alpha = std::exp(std::floor(std::log(static_cast<double>(m_star) / static_cast<double>(n))));
  s.beta = phi(s.alpha);
  s.beta_floor = static_cast<std::size_t>(std::floor(s.beta));
  return s;
}

double HeavyEncoding::nats_part1() const {
  std::size_t bits = 0;
  for (const char* label : kPart1) bits += stream.section_bits(label);
  return static_cast<double>(bits) * std::log(2.0);
}

double HeavyEncoding::nats_part2() const {
  std::size_t bits = 0;
  for (const char* label : kPart2) bits += stream.section_bits(label);
  return static_cast<double>(bits) * std::log(2.0);
}

HeavyEncoding heavy_encode(const Graph& g_full, const SplitResult& sr, const LsFit& fit) {
  HeavyEncoding enc;
  const std::size_t n = g_full.num_vertices();
  enc.n = n;
  enc.r_size = sr.heavy_set.size();
  enc.m_star = sr.heavy.num_edges();
  CodeStream& out = enc.stream;
  out.begin_section("heavy.r_count");
  out.write_uint(enc.r_size, n);
  if (enc.r_size == 0) return enc;

  enc.sched = schedule(enc.m_star, n);
  if (fit.assignment.size() != n || fit.classes != enc.sched.beta_floor) {
    throw std::invalid_argument("heavy_encode: fit does not match the schedule's beta");
  }
  std::vector<std::uint64_t> r(sr.heavy_set.begin(), sr.heavy_set.end());
  out.begin_section("heavy.r_rank");
  out.write_subset(r, n);
  out.begin_section("heavy.m_star");
  out.write_uint(enc.m_star, choose2(n));

  // Relabel by first occurrence inside R; record local positions per class.
  const std::size_t k = fit.classes;
  std::vector<std::uint32_t> remap(k, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::uint32_t> cls(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::uint64_t> local(n, 0);
  out.begin_section("heavy.labels");
  for (auto v : sr.heavy_set) {
    auto& label = remap[fit.assignment[v]];
    if (label == std::numeric_limits<std::uint32_t>::max()) {
      label = static_cast<std::uint32_t>(enc.block_sizes.size());
      enc.block_sizes.push_back(0);
    }
    cls[v] = label;
    local[v] = enc.block_sizes[label]++;
    out.write_uint(label, k - 1);
  }
  const std::size_t active = enc.block_sizes.size();
  std::vector<std::vector<std::vector<std::uint64_t>>> cells(active, std::vector<std::vector<std::uint64_t>>(active));
  enc.block_counts.assign(active, std::vector<std::size_t>(active, 0));
  for (auto [u, v] : sr.heavy.edges()) {
    if (cls[u] == std::numeric_limits<std::uint32_t>::max() || cls[v] == std::numeric_limits<std::uint32_t>::max()) {
      throw std::invalid_argument("heavy_encode: heavy edge leaves R");
    }
    auto a = cls[u];
    auto b = cls[v];
    std::uint64_t la = local[u];
    std::uint64_t lb = local[v];
    if (a > b || (a == b && la > lb)) {
      std::swap(a, b);
      std::swap(la, lb);
    }
    cells[a][b].push_back(a == b ? diagonal_cell(la, lb, enc.block_sizes[a]) : la * enc.block_sizes[b] + lb);
    ++enc.block_counts[a][b];
    if (a != b) ++enc.block_counts[b][a];
  }
  const std::uint64_t count_max = static_cast<std::uint64_t>(enc.r_size) * enc.r_size;
  for (std::size_t i = 0; i < active; ++i) {
    for (std::size_t j = i; j < active; ++j) {
      auto& block = cells[i][j];
      std::sort(block.begin(), block.end());
      const std::uint64_t universe = i == j ? choose2(enc.block_sizes[i])
                                            : static_cast<std::uint64_t>(enc.block_sizes[i]) * enc.block_sizes[j];
      out.begin_section("heavy.block_counts");
      out.write_uint(block.size(), count_max);
      out.begin_section("heavy.block_ranks");
      out.write_subset(block, universe);
    }
  }
  return enc;
}

HeavyEncoding heavy_encode(const Graph& g_full, const SplitResult& sr, std::uint64_t seed) {
  if (sr.heavy_set.empty()) return heavy_encode(g_full, sr, LsFit{});
  const Schedule s = schedule(sr.heavy.num_edges(), g_full.num_vertices());
  return heavy_encode(g_full, sr, ls_fit(g_full, s.beta, seed));
}

Graph heavy_decode(BitReader& in, std::size_t n) {
  const std::size_t start = in.position();
  const std::size_t r_size = in.read_uint(n);
  if (r_size == 0) return Graph(n);
  const auto r = in.read_subset(n, r_size);
  const std::size_t m_star = in.read_uint(choose2(n));
  if (m_star == 0) throw MalformedStream("heavy part with vertices but no edges", start);
  const Schedule s = schedule(m_star, n);
  const std::size_t k = s.beta_floor;
  std::vector<std::vector<Vertex>> members;
  for (std::size_t idx = 0; idx < r_size; ++idx) {
    const std::size_t at = in.position();
    const auto label = static_cast<std::uint32_t>(in.read_uint(k - 1));
    if (label > members.size()) throw MalformedStream("class labels out of first-occurrence order", at);
    if (label == members.size()) members.emplace_back();
    members[label].push_back(static_cast<Vertex>(r[idx]));
  }
  const std::uint64_t count_max = static_cast<std::uint64_t>(r_size) * r_size;
  std::vector<Edge> edges;
  std::size_t total = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i; j < members.size(); ++j) {
      const std::uint64_t si = members[i].size();
      const std::uint64_t sj = members[j].size();
      const std::uint64_t universe = i == j ? choose2(si) : si * sj;
      const std::size_t at = in.position();
      const std::size_t count = in.read_uint(count_max);
      if (count > universe) throw MalformedStream("block edge count exceeds its cells", at);
      total += count;
      for (auto cell : in.read_subset(universe, count)) {
        if (i == j) {
          const auto [a, b] = diagonal_pair(cell, si);
          edges.emplace_back(members[i][a], members[i][b]);
        } else {
          edges.emplace_back(members[i][cell / sj], members[j][cell % sj]);
        }
      }
    }
  }
  if (total != m_star) throw MalformedStream("block edge counts do not add up to m_star", in.position());
  return Graph::from_edges(n, edges);
}

Graph heavy_decode(const HeavyEncoding& enc) {
  BitReader in(enc.stream.bytes(), enc.stream.bit_size());
  return heavy_decode(in, enc.n);
}

HeavyBudget lemma51_budget(std::size_t n, std::size_t r_size, std::size_t m_star, double beta,
                           const std::vector<std::size_t>& block_sizes,
                           const std::vector<std::vector<std::size_t>>& block_counts) {
  (void)m_star;
  HeavyBudget b;
  const double log_n = n > 0 ? std::log(static_cast<double>(n)) : 0.0;
  if (r_size == 0) {
    b.part1 = 1.0 + log_n;
    return b;
  }
  const double r = static_cast<double>(r_size);
  b.part1 = 3.0 + r + 3.0 * log_n + log_binomial(n, r_size) + r * std::log(beta);
  const double active = static_cast<double>(block_sizes.size());
  b.part2 = 2.0 * active * active;
  for (std::size_t i = 0; i < block_sizes.size(); ++i) {
    for (std::size_t j = i; j < block_sizes.size(); ++j) {
      const std::uint64_t cells = i == j ? choose2(block_sizes[i])
                                         : static_cast<std::uint64_t>(block_sizes[i]) * block_sizes[j];
      b.part2 += 2.0 * std::log(r) + log_binomial(cells, block_counts[i][j]);
    }
  }
  return b;
}

HeavyBudget lemma51_budget(const HeavyEncoding& enc) {
  return lemma51_budget(enc.n, enc.r_size, enc.m_star, enc.sched.beta, enc.block_sizes, enc.block_counts);
}

}  // namespace sgc
