#include <cmath>
#include <set>

#include "doctest.h"
#include "sgc/errors.hpp"
#include "sgc/lwc_codec.hpp"
#include "test_support.hpp"

using namespace sgc;

namespace {

std::uint64_t pairs_of(std::size_t n) { return n * (n - 1) / 2; }

// Every graph on [n] with degrees <= cap and the same type table, listed in
// increasing edge bitmask order (the bitmask order is colex on pair indices).
std::vector<Graph> brute_force_members(std::size_t n, const TypeTable& table, const LwcParams& params) {
  std::vector<Graph> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs_of(n)); ++mask) {
    const Graph g = sgc_test::graph_of_mask(n, mask);
    if (g.max_degree() > params.degree_cap()) continue;
    if (type_table(g, params) == table) out.push_back(g);
  }
  return out;
}

std::size_t ceil_log2(const BigInt& v) {
  if (v <= 1) return 0;
  BigInt w = v - 1;
  return mpz_sizeinbase(w.get_mpz_t(), 2);
}

}  // namespace

TEST_CASE("parameter schedule") {
  const LwcParams p16 = lwc_params(16);
  CHECK(p16.D == doctest::Approx(std::log(std::log(16.0))));
  CHECK(p16.D == doctest::Approx(1.0197).epsilon(1e-4));
  CHECK(p16.h == 1);
  CHECK(p16.degree_cap() == 1);
  for (std::size_t n = 1; n <= 15; ++n) {
    CHECK(lwc_params(n).degree_cap() == 0);
    CHECK(lwc_params(n).h == 1);
  }
  CHECK(lwc_params(2).D == 0.0);
  // h reaches 2 once log log n >= 4, far past any representable n; the
  // largest size_t keeps h = 1.
  CHECK(lwc_params(~std::size_t{0}).h == 1);
}

TEST_CASE("Lemma 2.10 budget examples") {
  CHECK(lemma210_budget(3, 1) == doctest::Approx(std::log(3.0)));
  CHECK(lemma210_budget(3, 0) == 0.0);
  CHECK(lemma210_budget(5, 4) == doctest::Approx(5.3471).epsilon(1e-4));
}

TEST_CASE("pair index inverse") {
  for (std::uint64_t v = 1; v < 300; ++v)
    for (std::uint64_t u = 0; u < v; u += 7) {
      const auto [a, b] = pair_of_index(pair_index(u, v));
      CHECK(a == u);
      CHECK(b == v);
    }
  const std::uint64_t big = 3'000'000'000ULL;
  CHECK(pair_of_index(pair_index(big - 5, big)) == Edge{static_cast<Vertex>(big - 5), static_cast<Vertex>(big)});
}

TEST_CASE("typical set examples") {
  const LwcParams p{1, 1.0};
  SUBCASE("one edge on three vertices") {
    const Graph g = sgc_test::graph_of(3, {{0, 1}});
    const TypeTable t = type_table(g, p);
    CHECK(t.entries.size() == 2);
    const TypicalSet w(3, t);
    CHECK(w.count() == 3);
    const LwcEncoding enc = lwc_encode(g, LwcMode::exact, p);
    CHECK(enc.exact);
    CHECK(enc.stream.section_bits("lwc.index") == 2);
    CHECK(lwc_decode(enc) == g);
  }
  SUBCASE("empty table") {
    const TypicalSet w(6, type_table(Graph(6), p));
    CHECK(w.count() == 1);
  }
  SUBCASE("perfect matchings of K4") {
    const Graph g = sgc_test::graph_of(4, {{0, 1}, {2, 3}});
    const TypicalSet w(4, type_table(g, p));
    CHECK(w.count() == 3);
  }
}

TEST_CASE("empty graph encodes with a zero-width index") {
  const Graph g(4);
  const LwcEncoding enc = lwc_encode(g, LwcMode::exact);
  CHECK(enc.y_size == 0);
  CHECK(enc.stream.section_bits("lwc.index") == 0);
  CHECK(lwc_decode(enc) == g);
}

TEST_CASE("star on six vertices is carried entirely by Z") {
  const Graph g = sgc_test::star_graph(5);
  const LwcEncoding enc = lwc_encode(g, LwcMode::automatic);
  CHECK(enc.m_tilde == 0);
  CHECK(enc.y_size == 6);
  CHECK(enc.z_size == 5);
  CHECK(enc.stream.section_bits("lwc.z_rank") == ceil_log2(BigInt(3003)));
  CHECK(lwc_decode(enc) == g);
}

TEST_CASE("typical-set count, rank and unrank match brute force") {
  for (const LwcParams p : {LwcParams{1, 1.0}, LwcParams{1, 2.0}, LwcParams{2, 2.0}, LwcParams{1, 4.0}}) {
    for (std::size_t n = 1; n <= 5; ++n) {
      std::set<std::vector<std::pair<RootedClass, std::size_t>>> seen;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs_of(n)); ++mask) {
        const Graph g = sgc_test::graph_of_mask(n, mask);
        if (g.max_degree() > p.degree_cap()) continue;
        const TypeTable t = type_table(g, p);
        if (!seen.insert(t.entries).second) continue;
        const auto members = brute_force_members(n, t, p);
        const TypicalSet w(n, t);
        REQUIRE(w.count() == members.size());
        CHECK(w.count() >= typical_lower_bound(n, t));
        for (std::size_t r = 0; r < members.size(); ++r) {
          CHECK(w.rank_of(members[r]) == r);
          CHECK(w.graph_of(r) == members[r]);
        }
        std::size_t visited = 0;
        w.for_each([&](const Graph& h) {
          CHECK(h == members[visited]);
          ++visited;
          return true;
        });
        CHECK(visited == members.size());
        CHECK_THROWS_AS(w.graph_of(BigInt(members.size())), std::invalid_argument);
      }
    }
  }
}

TEST_CASE("rank_of rejects non-members") {
  const LwcParams p{1, 2.0};
  const TypicalSet w(4, type_table(sgc_test::path_graph(4), p));
  CHECK_THROWS_AS(w.rank_of(sgc_test::cycle_graph(4)), std::invalid_argument);
}

TEST_CASE("exhaustive roundtrip on small graphs in both modes") {
  for (std::size_t n = 0; n <= 5; ++n) {
    const std::uint64_t total = std::uint64_t{1} << pairs_of(n);
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      const Graph g = sgc_test::graph_of_mask(n, mask);
      for (const LwcParams p : {lwc_params(n), LwcParams{1, 2.0}, LwcParams{2, 3.0}}) {
        for (LwcMode mode : {LwcMode::exact, LwcMode::surrogate}) {
          const LwcEncoding enc = lwc_encode(g, mode, p);
          CHECK(enc.exact == (mode == LwcMode::exact));
          CHECK(lwc_decode(enc) == g);
        }
      }
    }
  }
}

TEST_CASE("exact index never wider than the edge-set rank") {
  for (std::size_t n = 2; n <= 6; ++n) {
    const std::uint64_t total = std::uint64_t{1} << pairs_of(n);
    for (std::uint64_t mask = 0; mask < total; mask += (n == 6 ? 7 : 1)) {
      const Graph g = sgc_test::graph_of_mask(n, mask);
      const LwcParams p{1, 3.0};
      const LwcEncoding exact = lwc_encode(g, LwcMode::exact, p);
      const LwcEncoding surrogate = lwc_encode(g, LwcMode::surrogate, p);
      CHECK(exact.stream.section_bits("lwc.index") <= surrogate.stream.section_bits("lwc.index"));
      CHECK(surrogate.stream.section_bits("lwc.index") == ceil_log2(binomial(pairs_of(n), exact.m_tilde)));
    }
  }
}

TEST_CASE("degree-bounded input leaves Y and Z empty") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng() % 30;
    const Graph g = sgc_test::random_graph(n, 1.5 / static_cast<double>(n), rng);
    const LwcParams p{1, static_cast<double>(g.max_degree())};
    const LwcEncoding enc = lwc_encode(g, n <= 8 ? LwcMode::exact : LwcMode::surrogate, p);
    CHECK(enc.y_size == 0);
    CHECK(enc.stream.section_bits("lwc.y_rank") == 0);
    CHECK(enc.stream.section_bits("lwc.z_count") == 0);
    CHECK(enc.stream.section_bits("lwc.z_rank") == 0);
    CHECK(lwc_decode(enc) == g);
  }
}

TEST_CASE("random graph roundtrip at larger sizes") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 20 + rng() % 400;
    const double d = 0.5 + static_cast<double>(rng() % 40) / 10.0;
    const Graph g = sgc_test::random_graph(n, d / static_cast<double>(n), rng);
    const LwcEncoding enc = lwc_encode(g, LwcMode::automatic);
    CHECK(lwc_decode(enc) == g);
  }
}

TEST_CASE("forced exact mode past the budget raises a capacity error") {
  const Graph g = sgc_test::cycle_graph(60);
  CHECK_THROWS_AS(lwc_encode(g, LwcMode::exact, LwcParams{1, 2.0}), CapacityError);
  const LwcEncoding enc = lwc_encode(g, LwcMode::automatic, LwcParams{1, 2.0});
  CHECK_FALSE(enc.exact);
  CHECK(lwc_decode(enc) == g);
}

TEST_CASE("truncated streams are rejected") {
  std::mt19937_64 rng(3);
  const Graph g = sgc_test::random_graph(40, 0.08, rng);
  const LwcEncoding enc = lwc_encode(g, LwcMode::surrogate);
  for (std::size_t cut = 0; cut < enc.stream.bit_size(); cut += 3) {
    BitReader in(enc.stream.bytes(), cut);
    CHECK_THROWS_AS(lwc_decode(in, 40, enc.params, false), MalformedStream);
  }
}

TEST_CASE("table modes") {
  CHECK(table_mode_for(LwcParams{1, 2.0}) == TableMode::all_classes);
  CHECK(table_mode_for(LwcParams{3, 2.0}) == TableMode::sparse);
  const auto& classes = bounded_classes(1, 2);
  CHECK(classes.size() == 4);  // root degree 0, 1, 2 without and with the neighbor edge
}
