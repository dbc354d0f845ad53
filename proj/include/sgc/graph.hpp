#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace sgc {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

/// Immutable simple undirected graph on vertices 0..n-1, stored as CSR with
/// sorted neighbor lists.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n) : offsets_(n + 1, 0) {}

  /// Builds a graph from an edge list in any order and orientation.
  /// Throws std::invalid_argument on self loops, duplicates or out-of-range ids.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges);

  std::size_t num_vertices() const noexcept {
    return offsets_.empty() ? 0 : offsets_.size() - 1;
  }
  std::size_t num_edges() const noexcept { return targets_.size() / 2; }

  std::span<const Vertex> neighbors(Vertex v) const noexcept {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }
  std::size_t degree(Vertex v) const noexcept { return offsets_[v + 1] - offsets_[v]; }
  std::size_t max_degree() const noexcept;
  bool has_edge(Vertex u, Vertex v) const noexcept;

  /// Edges as (u, v) with u < v in lexicographic order.
  std::vector<Edge> edges() const;

  /// Image under the vertex relabeling v -> perm[v].
  Graph permuted(std::span<const Vertex> perm) const;

  bool operator==(const Graph& other) const = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> targets_;
};

/// 2m / n^2; zero for the empty vertex set.
double density(const Graph& g);

/// ((1/n^2) sum_ij |A_ij|^p)^(1/p). Throws std::invalid_argument for p < 1.
double matrix_lp_norm(const Graph& g, double p);

std::map<std::size_t, std::size_t> degree_histogram(const Graph& g);

struct SplitResult {
  Graph light;                     // edges whose endpoints both have degree <= delta
  Graph heavy;                     // all remaining edges
  std::vector<Vertex> heavy_set;   // vertices of degree > delta or adjacent to one
  double delta = 0.0;
  double eta = 0.0;                // |heavy_set| / n
};

/// Degree-threshold split. Degrees are those of g; a vertex is "high" when
/// deg > delta (strict, no rounding of delta).
SplitResult split(const Graph& g, double delta);

/// Union of two graphs on the same vertex set with disjoint edge sets.
/// Throws std::invalid_argument if the sizes differ or an edge is shared.
Graph edge_union(const Graph& a, const Graph& b);

// Edge-list text format: "n m" followed by m lines "u v" with u < v.
Graph read_edge_list(std::istream& in);
void write_edge_list(std::ostream& out, const Graph& g);

}  // namespace sgc
