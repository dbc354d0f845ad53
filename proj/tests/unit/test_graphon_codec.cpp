#include <cmath>

#include "doctest.h"
#include "sgc/errors.hpp"
#include "sgc/graphon_codec.hpp"
#include "test_support.hpp"

using namespace sgc;

namespace {

double log_binom(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Budget recomputed from the encoder's reported block structure.
double budget_by_hand(std::size_t n, std::size_t r, double beta, const HeavyEncoding& enc) {
  const double part1 = 3.0 + r + 3.0 * std::log(n) + log_binom(n, r) + r * std::log(beta);
  const std::size_t k = enc.block_sizes.size();
  double part2 = 2.0 * k * k;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      const std::uint64_t si = enc.block_sizes[i], sj = enc.block_sizes[j];
      const std::uint64_t cells = i == j ? si * (si - 1) / 2 : si * sj;
      part2 += 2.0 * std::log(static_cast<double>(r)) + log_binom(cells, enc.block_counts[i][j]);
    }
  return part1 + part2;
}

HeavyEncoding encode_split(const Graph& g, double delta, std::uint64_t seed = 0) {
  return heavy_encode(g, split(g, delta), seed);
}

}  // namespace

TEST_CASE("phi examples and monotonicity") {
  CHECK(phi(std::exp(2.0)) == 1.0);
  CHECK(phi(std::exp(4.0)) == doctest::Approx(1.84726).epsilon(1e-5));
  CHECK(phi(100.0) == doctest::Approx(2.17147).epsilon(1e-5));
  CHECK(phi(0.0) == 1.0);
  CHECK_THROWS_AS(phi(-1.0), std::invalid_argument);
  double prev = phi(0.0);
  for (double x = 0.01; x < 1e6; x *= 1.07) {
    const double y = phi(x);
    CHECK(y >= prev);
    if (x > std::exp(2.0) * 1.07) CHECK(y > prev);
    prev = y;
  }
}

TEST_CASE("schedule examples") {
  const Schedule a = schedule(50, 10);
  CHECK(a.alpha == doctest::Approx(std::exp(1.0)));
  CHECK(a.beta == 1.0);
  CHECK(a.beta_floor == 1);
  const Schedule b = schedule(5, 10);
  CHECK(b.alpha == doctest::Approx(std::exp(-1.0)));
  CHECK(b.beta == 1.0);
  // m/n = e^9 rounded up to an integer ratio keeps floor(log) = 9.
  const Schedule c = schedule(8104, 1);
  CHECK(c.alpha == doctest::Approx(std::exp(9.0)));
  CHECK(c.beta == doctest::Approx(std::exp(4.5) / 9.0));
  CHECK(c.beta == doctest::Approx(10.0019).epsilon(1e-5));
  CHECK(c.beta_floor == 10);
  CHECK_THROWS_AS(schedule(0, 10), std::invalid_argument);
}

TEST_CASE("empty heavy set writes only the size field") {
  const Graph g = sgc_test::path_graph(6);
  const HeavyEncoding enc = encode_split(g, 2.0);
  CHECK(enc.r_size == 0);
  CHECK(enc.stream.bit_size() == bit_width(std::uint64_t{6}));
  CHECK(heavy_decode(enc) == Graph(6));
  const HeavyBudget b = lemma51_budget(enc);
  CHECK(b.total() == doctest::Approx(1.0 + std::log(6.0)));
}

TEST_CASE("star split at three") {
  const Graph g = sgc_test::star_graph(5);
  const SplitResult sr = split(g, 3.0);
  const HeavyEncoding enc = heavy_encode(g, sr, ls_fit(g, 1.0));
  CHECK(enc.sched.beta_floor == 1);
  CHECK(enc.block_sizes == std::vector<std::size_t>{6});
  CHECK(enc.block_counts[0][0] == 5);
  CHECK(enc.stream.section_bits("heavy.block_ranks") == 12);
  CHECK(enc.stream.section_bits("heavy.labels") == 0);
  CHECK(heavy_decode(enc) == sr.heavy);
  const HeavyBudget b = lemma51_budget(enc);
  CHECK(b.part2 == doctest::Approx(2.0 + 2.0 * std::log(6.0) + std::log(3003.0)));
  CHECK(std::log(3003.0) == doctest::Approx(8.007).epsilon(1e-4));
}

TEST_CASE("figure one graph split at two") {
  const Graph g = sgc_test::figure_one_graph();
  const SplitResult sr = split(g, 2.0);
  const HeavyEncoding enc = encode_split(g, 2.0);
  CHECK(enc.r_size == 6);
  CHECK(enc.m_star == 5);
  CHECK(enc.block_sizes == std::vector<std::size_t>{6});
  // Heavy edges relabeled within R = {1..6}: (0,2) (1,2) (2,3) (3,4) (3,5),
  // at row-major upper-triangle cells 1, 5, 9, 12, 13 of a 6-vertex block.
  const BigInt want = 1 + 10 + 84 + 495 + 1287;
  const std::size_t rank_bits = enc.stream.section_bits("heavy.block_ranks");
  CHECK(rank_bits == 12);
  BitReader in(enc.stream.bytes(), enc.stream.bit_size());
  in.read_bits(static_cast<unsigned>(enc.stream.bit_size() - rank_bits));
  CHECK(in.read_big(rank_bits) == want);
  CHECK(heavy_decode(enc) == sr.heavy);
}

TEST_CASE("fit and schedule must agree") {
  const Graph g = sgc_test::star_graph(5);
  const SplitResult sr = split(g, 3.0);
  LsFit wrong = ls_fit(g, 1.0);
  wrong.classes = 2;
  CHECK_THROWS_AS(heavy_encode(g, sr, wrong), std::invalid_argument);
}

TEST_CASE("random heavy parts roundtrip within the budget") {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 3 + rng() % 120;
    const double p = static_cast<double>(1 + rng() % 30) / 100.0;
    const Graph g = sgc_test::random_graph(n, p, rng);
    const double delta = static_cast<double>(rng() % 8);
    const SplitResult sr = split(g, delta);
    const HeavyEncoding enc = heavy_encode(g, sr, rng());
    CHECK(heavy_decode(enc) == sr.heavy);
    if (enc.r_size == 0) continue;
    std::size_t sum = 0;
    for (std::size_t i = 0; i < enc.block_sizes.size(); ++i)
      for (std::size_t j = i; j < enc.block_sizes.size(); ++j) sum += enc.block_counts[i][j];
    CHECK(sum == enc.m_star);
    const HeavyBudget b = lemma51_budget(enc);
    CHECK(enc.nats() <= b.total());
    CHECK(b.total() == doctest::Approx(budget_by_hand(n, enc.r_size, enc.sched.beta, enc)).epsilon(1e-9));
  }
}

TEST_CASE("multi-class fits roundtrip") {
  // m_star / n above e^5 lets the schedule allow two classes.
  std::mt19937_64 rng(8);
  for (int t = 0; t < 2; ++t) {
    const Graph g = sgc_test::random_graph(400, 0.9, rng);
    const SplitResult sr = split(g, 3.0);
    const HeavyEncoding enc = heavy_encode(g, sr, std::uint64_t{1});
    CHECK(enc.sched.beta_floor >= 2);
    CHECK(heavy_decode(enc) == sr.heavy);
    CHECK(enc.nats() <= lemma51_budget(enc).total());
  }
}

TEST_CASE("corrupted heavy streams are rejected") {
  std::mt19937_64 rng(4);
  const Graph g = sgc_test::random_graph(30, 0.3, rng);
  const HeavyEncoding enc = encode_split(g, 2.0);
  for (std::size_t cut = 0; cut < enc.stream.bit_size(); cut += 5) {
    BitReader in(enc.stream.bytes(), cut);
    CHECK_THROWS_AS(heavy_decode(in, 30), MalformedStream);
  }
}
