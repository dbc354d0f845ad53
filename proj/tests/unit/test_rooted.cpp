#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "sgc/rooted.hpp"
#include "test_support.hpp"

using namespace sgc;

namespace {

// Brute-force rooted isomorphism: try every relabeling that fixes vertex 0.
bool rooted_isomorphic(const RootedGraph& a, const RootedGraph& b) {
  const std::size_t n = a.size();
  if (n != b.size() || a.num_edges() != b.num_edges()) return false;
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (std::uint32_t v = 0; v < n && ok; ++v) {
      for (std::uint32_t w : a.adj[v]) {
        const auto& nb = b.adj[perm[v]];
        if (std::find(nb.begin(), nb.end(), perm[w]) == nb.end()) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return true;
  } while (std::next_permutation(perm.begin() + 1, perm.end()));
  return false;
}

RootedGraph rooted(const Graph& g, Vertex root) { return ball(g, root, g.num_vertices()); }

// M(t) by the min-cut formula over all subsets of the left support:
// min_S (a(not S) + b(N(S))).
double coupling_mass_by_cuts(const LocalDist& d1, const LocalDist& d2, double t) {
  const std::size_t k = d1.atoms.size();
  double best = 1e9;
  for (std::uint32_t s = 0; s < (1u << k); ++s) {
    double cut = 0.0;
    std::vector<bool> hit(d2.atoms.size(), false);
    for (std::size_t i = 0; i < k; ++i) {
      if (s >> i & 1u) {
        for (std::size_t j = 0; j < d2.atoms.size(); ++j)
          if (rooted_distance(d1.atoms[i].rep, d2.atoms[j].rep) <= t) hit[j] = true;
      } else {
        cut += d1.atoms[i].weight.get_d();
      }
    }
    for (std::size_t j = 0; j < d2.atoms.size(); ++j)
      if (hit[j]) cut += d2.atoms[j].weight.get_d();
    best = std::min(best, cut);
  }
  return best;
}

double lp_by_cuts(const LocalDist& d1, const LocalDist& d2) {
  std::set<double> thresholds{0.0};
  for (const auto& a : d1.atoms)
    for (const auto& b : d2.atoms) thresholds.insert(rooted_distance(a.rep, b.rep));
  double best = 1.0;
  for (double t : thresholds) best = std::min(best, std::max(t, 1.0 - coupling_mass_by_cuts(d1, d2, t)));
  return best;
}

}  // namespace

TEST_CASE("depth zero gives the isolated-root class") {
  const Graph g = sgc_test::figure_one_graph();
  const RootedClass c0 = neighborhood_class(g, 3, 0);
  CHECK(c0.vertex_count() == 1);
  CHECK(c0 == neighborhood_class(Graph(1), 0, 0));
  CHECK_THROWS_AS(neighborhood_class(g, 8, 1), std::invalid_argument);
}

TEST_CASE("cycle depth-two ball is a centered five-vertex path") {
  const Graph c10 = sgc_test::cycle_graph(10);
  const Graph p5 = sgc_test::path_graph(5);
  const RootedClass want = neighborhood_class(p5, 2, 2);
  for (Vertex r = 0; r < 10; ++r) CHECK(neighborhood_class(c10, r, 2) == want);
}

TEST_CASE("triangle and four-cycle differ at depth one") {
  const Graph tri = sgc_test::complete_graph(3);
  const Graph c4 = sgc_test::cycle_graph(4);
  CHECK(neighborhood_class(tri, 0, 1) != neighborhood_class(c4, 0, 1));
  CHECK(rooted_distance(rooted(tri, 0), rooted(c4, 0)) == 1.0);
}

TEST_CASE("rooted distance examples") {
  const RootedGraph c5 = rooted(sgc_test::cycle_graph(5), 0);
  const RootedGraph c6 = rooted(sgc_test::cycle_graph(6), 0);
  CHECK(rooted_distance(c5, c5) == 0.0);
  CHECK(rooted_distance(c5, c6) == doctest::Approx(0.5));
}

TEST_CASE("canonical keys agree with brute-force isomorphism") {
  std::mt19937_64 rng(21);
  std::vector<RootedGraph> pool;
  for (int t = 0; t < 120; ++t) {
    const Graph g = sgc_test::random_graph(6, 0.45, rng);
    pool.push_back(ball(g, static_cast<Vertex>(rng() % 6), 2));
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i; j < pool.size(); j += 3) {
      const bool same_key = canonical_class(pool[i], 2) == canonical_class(pool[j], 2);
      CHECK(same_key == rooted_isomorphic(pool[i], pool[j]));
    }
  }
}

TEST_CASE("graph_of_class rebuilds an isomorphic representative") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const Graph g = sgc_test::random_graph(7, 0.35, rng);
    const RootedGraph b = ball(g, 0, 3);
    const RootedClass cls = canonical_class(b, 3);
    const RootedGraph rep = graph_of_class(cls);
    CHECK(rooted_isomorphic(b, rep));
    CHECK(canonical_class(rep, 3) == cls);
  }
}

TEST_CASE("canonical key is invariant under relabeling") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 3 + rng() % 12;
    const Graph g = sgc_test::random_graph(n, 0.25, rng);
    const auto perm = sgc_test::random_permutation(n, rng);
    const Vertex root = static_cast<Vertex>(rng() % n);
    const std::size_t h = 1 + rng() % 3;
    CHECK(neighborhood_class(g, root, h) == neighborhood_class(g.permuted(perm), perm[root], h));
  }
}

TEST_CASE("figure one graph has three depth-two classes") {
  const LocalDist u = empirical_local_dist(sgc_test::figure_one_graph(), 2);
  REQUIRE(u.atoms.size() == 3);
  std::multiset<mpq_class> weights;
  for (const auto& a : u.atoms) weights.insert(a.weight);
  CHECK(weights == std::multiset<mpq_class>{mpq_class(1, 4), mpq_class(1, 2), mpq_class(1, 4)});
}

TEST_CASE("point masses from symmetric graphs") {
  const LocalDist c10 = empirical_local_dist(sgc_test::cycle_graph(10), 2);
  REQUIRE(c10.atoms.size() == 1);
  CHECK(c10.atoms[0].weight == 1);
  const LocalDist tri = empirical_local_dist(sgc_test::complete_graph(3), 1);
  REQUIRE(tri.atoms.size() == 1);
  CHECK(tri.atoms[0].cls.vertex_count() == 3);
  CHECK_THROWS_AS(empirical_local_dist(Graph(0), 1), std::invalid_argument);
}

TEST_CASE("mean root degree") {
  CHECK(dist_degree(empirical_local_dist(sgc_test::complete_graph(3), 1)) == 2);
  CHECK(dist_degree(empirical_local_dist(sgc_test::star_graph(5), 1)) == mpq_class(5, 3));
  CHECK(dist_degree(empirical_local_dist(Graph(4), 1)) == 0);
  CHECK_THROWS_AS(dist_degree(empirical_local_dist(Graph(4), 0)), std::invalid_argument);

  std::mt19937_64 rng(13);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng() % 20;
    const Graph g = sgc_test::random_graph(n, 0.2, rng);
    mpq_class want(2 * g.num_edges(), n);
    want.canonicalize();
    CHECK(dist_degree(empirical_local_dist(g, 1 + rng() % 2)) == want);
  }
}

TEST_CASE("local distribution is isomorphism invariant") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 2 + rng() % 14;
    const Graph g = sgc_test::random_graph(n, 0.25, rng);
    const auto perm = sgc_test::random_permutation(n, rng);
    const LocalDist a = empirical_local_dist(g, 2);
    const LocalDist b = empirical_local_dist(g.permuted(perm), 2);
    REQUIRE(a.atoms.size() == b.atoms.size());
    for (std::size_t i = 0; i < a.atoms.size(); ++i) {
      CHECK(a.atoms[i].cls == b.atoms[i].cls);
      CHECK(a.atoms[i].weight == b.atoms[i].weight);
    }
  }
}

TEST_CASE("Levy-Prokhorov examples") {
  const RootedGraph tri = rooted(sgc_test::complete_graph(3), 0);
  const RootedGraph path = rooted(sgc_test::path_graph(3), 1);
  const LocalDist dx = make_local_dist(1, {{tri, 1}});
  const LocalDist dy = make_local_dist(1, {{path, 1}});
  CHECK(lp_distance(dx, dx) == 0.0);
  CHECK(lp_distance(dx, dy) == doctest::Approx(rooted_distance(tri, path)));
  const LocalDist mix = make_local_dist(1, {{tri, mpq_class(7, 10)}, {path, mpq_class(3, 10)}});
  CHECK(lp_distance(dx, mix) == doctest::Approx(0.3));

  const RootedGraph c5 = rooted(sgc_test::cycle_graph(5), 0);
  const RootedGraph c6 = rooted(sgc_test::cycle_graph(6), 0);
  CHECK(lp_distance(make_local_dist(3, {{c5, 1}}), make_local_dist(3, {{c6, 1}})) == doctest::Approx(0.5));
}

TEST_CASE("Levy-Prokhorov matches a min-cut oracle and is a bounded symmetric distance") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 60; ++t) {
    const LocalDist a = empirical_local_dist(sgc_test::random_graph(4 + rng() % 4, 0.35, rng), 2);
    const LocalDist b = empirical_local_dist(sgc_test::random_graph(4 + rng() % 4, 0.35, rng), 2);
    if (a.atoms.size() > 10) continue;
    const double d = lp_distance(a, b);
    CHECK(d == doctest::Approx(lp_by_cuts(a, b)).epsilon(1e-12));
    CHECK(d == doctest::Approx(lp_distance(b, a)).epsilon(1e-12));
    CHECK(d <= 1.0);
    CHECK(lp_distance(a, a) == 0.0);
  }
}

TEST_CASE("rooted distance satisfies the metric axioms") {
  std::mt19937_64 rng(17);
  std::vector<RootedGraph> pool;
  for (int t = 0; t < 40; ++t) pool.push_back(rooted(sgc_test::random_graph(3 + rng() % 6, 0.4, rng), 0));
  for (int t = 0; t < 200; ++t) {
    const auto& x = pool[rng() % pool.size()];
    const auto& y = pool[rng() % pool.size()];
    const auto& z = pool[rng() % pool.size()];
    CHECK(rooted_distance(x, y) == rooted_distance(y, x));
    CHECK(rooted_distance(x, z) <= rooted_distance(x, y) + rooted_distance(y, z) + 1e-15);
  }
}

TEST_CASE("validate rejects bad measures") {
  LocalDist d = empirical_local_dist(sgc_test::path_graph(3), 1);
  d.atoms[0].weight += 1;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}
