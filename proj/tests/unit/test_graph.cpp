#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "sgc/graph.hpp"
#include "test_support.hpp"

using namespace sgc;
using sgc_test::graph_of;

namespace {

// Dense adjacency sum, independent of the CSR layout.
double dense_lp(const Graph& g, double p) {
  const std::size_t n = g.num_vertices();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (Vertex i = 0; i < n; ++i)
    for (Vertex j = 0; j < n; ++j) sum += g.has_edge(i, j) ? 1.0 : 0.0;
  return std::pow(sum / static_cast<double>(n * n), 1.0 / p);
}

std::set<Edge> edge_set(const Graph& g) {
  auto e = g.edges();
  return {e.begin(), e.end()};
}

}  // namespace

TEST_CASE("construction rejects loops, duplicates and out-of-range ids") {
  std::vector<Edge> loop{{1, 1}};
  std::vector<Edge> dup{{0, 1}, {1, 0}};
  std::vector<Edge> out{{0, 3}};
  CHECK_THROWS_AS(Graph::from_edges(3, loop), std::invalid_argument);
  CHECK_THROWS_AS(Graph::from_edges(3, dup), std::invalid_argument);
  CHECK_THROWS_AS(Graph::from_edges(3, out), std::invalid_argument);
}

TEST_CASE("neighbor lists are sorted and symmetric") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const Graph g = sgc_test::random_graph(30, 0.2, rng);
    std::size_t deg_sum = 0;
    for (Vertex v = 0; v < g.num_vertices(); ++v) {
      auto nb = g.neighbors(v);
      CHECK(std::is_sorted(nb.begin(), nb.end()));
      CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
      for (Vertex w : nb) {
        CHECK(w != v);
        CHECK(g.has_edge(w, v));
      }
      deg_sum += nb.size();
    }
    CHECK(deg_sum == 2 * g.num_edges());
  }
}

TEST_CASE("density examples") {
  CHECK(density(sgc_test::complete_graph(3)) == doctest::Approx(2.0 / 3.0));
  CHECK(density(Graph(5)) == 0.0);
  CHECK(density(sgc_test::complete_graph(4)) == doctest::Approx(0.75));
  CHECK(density(Graph(0)) == 0.0);
  CHECK(density(Graph(1)) == 0.0);
}

TEST_CASE("matrix_lp_norm examples and domain") {
  const Graph tri = sgc_test::complete_graph(3);
  CHECK(matrix_lp_norm(tri, 1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(matrix_lp_norm(tri, 2.0) == doctest::Approx(0.81650).epsilon(1e-5));
  CHECK(matrix_lp_norm(Graph(4), 3.0) == 0.0);
  CHECK(matrix_lp_norm(Graph(0), 2.0) == 0.0);
  CHECK_THROWS_AS(matrix_lp_norm(tri, 0.5), std::invalid_argument);
}

TEST_CASE("l1 norm equals density on random graphs") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    const Graph g = sgc_test::random_graph(1 + rng() % 25, 0.3, rng);
    CHECK(matrix_lp_norm(g, 1.0) == doctest::Approx(density(g)).epsilon(1e-12));
    CHECK(matrix_lp_norm(g, 2.5) == doctest::Approx(dense_lp(g, 2.5)).epsilon(1e-12));
  }
}

TEST_CASE("degree histogram examples") {
  CHECK(degree_histogram(sgc_test::complete_graph(3)) == std::map<std::size_t, std::size_t>{{2, 3}});
  CHECK(degree_histogram(sgc_test::star_graph(5)) == std::map<std::size_t, std::size_t>{{1, 5}, {5, 1}});
  CHECK(degree_histogram(Graph(3)) == std::map<std::size_t, std::size_t>{{0, 3}});
}

TEST_CASE("split examples") {
  SUBCASE("star") {
    const SplitResult s = split(sgc_test::star_graph(5), 3.0);
    CHECK(s.light.num_edges() == 0);
    CHECK(s.heavy.num_edges() == 5);
    CHECK(s.heavy_set.size() == 6);
  }
  SUBCASE("path") {
    const Graph p = sgc_test::path_graph(4);
    const SplitResult s = split(p, 2.0);
    CHECK(s.light == p);
    CHECK(s.heavy.num_edges() == 0);
    CHECK(s.heavy_set.empty());
    CHECK(s.eta == 0.0);
  }
  SUBCASE("figure one graph") {
    const SplitResult s = split(sgc_test::figure_one_graph(), 2.0);
    CHECK(s.light.num_edges() == 4);
    CHECK(s.heavy.num_edges() == 5);
    CHECK(edge_set(s.light) == std::set<Edge>{{0, 1}, {0, 2}, {5, 7}, {6, 7}});
    CHECK(s.heavy_set == std::vector<Vertex>{1, 2, 3, 4, 5, 6});
    CHECK(s.eta == doctest::Approx(0.75));
  }
  SUBCASE("fractional threshold is not rounded") {
    // degrees 1,2,2,1: with delta 1.5 the middle vertices are high.
    const SplitResult s = split(sgc_test::path_graph(4), 1.5);
    CHECK(s.light.num_edges() == 0);
    CHECK(s.heavy_set.size() == 4);
  }
}

TEST_CASE("split partitions edges, is monotone and keeps heavy edges inside R") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 60; ++t) {
    const Graph g = sgc_test::random_graph(5 + rng() % 40, 0.12, rng);
    const double d1 = static_cast<double>(rng() % 60) / 10.0;
    const double d2 = d1 + static_cast<double>(rng() % 30) / 10.0;
    const SplitResult a = split(g, d1);
    const SplitResult b = split(g, d2);
    CHECK(a.light.num_edges() + a.heavy.num_edges() == g.num_edges());
    CHECK(edge_union(a.light, a.heavy) == g);
    const auto la = edge_set(a.light), lb = edge_set(b.light);
    CHECK(std::includes(lb.begin(), lb.end(), la.begin(), la.end()));
    const std::set<Vertex> r(a.heavy_set.begin(), a.heavy_set.end());
    for (auto [u, v] : a.heavy.edges()) {
      CHECK(r.count(u) == 1);
      CHECK(r.count(v) == 1);
    }
    for (auto [u, v] : a.light.edges()) {
      CHECK(static_cast<double>(g.degree(u)) <= d1);
      CHECK(static_cast<double>(g.degree(v)) <= d1);
    }
    CHECK(a.eta == doctest::Approx(static_cast<double>(r.size()) / static_cast<double>(g.num_vertices())));
  }
}

TEST_CASE("edge_union rejects shared edges and size mismatch") {
  const Graph a = graph_of(3, {{0, 1}});
  CHECK_THROWS_AS(edge_union(a, a), std::invalid_argument);
  CHECK_THROWS_AS(edge_union(a, Graph(4)), std::invalid_argument);
}

TEST_CASE("permuted relabels edges") {
  const Graph g = graph_of(4, {{0, 1}, {1, 2}});
  std::vector<Vertex> perm{3, 2, 1, 0};
  const Graph h = g.permuted(perm);
  CHECK(h.has_edge(3, 2));
  CHECK(h.has_edge(2, 1));
  CHECK(h.num_edges() == 2);
}

TEST_CASE("edge-list text roundtrip and malformed input") {
  const Graph g = sgc_test::figure_one_graph();
  std::stringstream buf;
  write_edge_list(buf, g);
  CHECK(buf.str().rfind("8 9\n0 1\n", 0) == 0);
  CHECK(read_edge_list(buf) == g);

  std::istringstream short_list("3 2\n0 1\n");
  CHECK_THROWS(read_edge_list(short_list));
  std::istringstream loop("3 1\n1 1\n");
  CHECK_THROWS(read_edge_list(loop));
  std::istringstream empty("0 0\n");
  CHECK(read_edge_list(empty).num_vertices() == 0);
}
