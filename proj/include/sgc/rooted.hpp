#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sgc/graph.hpp"

namespace sgc {

/// Small connected graph with a distinguished root at vertex 0.
struct RootedGraph {
  std::vector<std::vector<std::uint32_t>> adj;

  std::size_t size() const noexcept { return adj.size(); }
  std::size_t num_edges() const noexcept;
  /// Largest BFS distance from the root.
  std::size_t eccentricity() const;
  bool operator==(const RootedGraph&) const = default;
};

/// Isomorphism class of a depth-limited rooted graph. `canon` holds the
/// vertex count (u32 big-endian) followed by the upper-triangle adjacency
/// bits of the canonical labeling, row-major, root first.
struct RootedClass {
  std::uint32_t depth = 0;
  std::string canon;

  auto operator<=>(const RootedClass&) const = default;
  bool operator==(const RootedClass&) const = default;

  std::size_t vertex_count() const;
  std::size_t root_degree() const;
};

struct RootedClassHash {
  std::size_t operator()(const RootedClass& c) const noexcept;
};

/// Induced subgraph on the vertices within distance h of root, BFS-ordered
/// with the root first. Throws std::invalid_argument if root >= n.
RootedGraph ball(const Graph& g, Vertex root, std::size_t h);

/// The depth-h ball of a rooted graph around its own root.
RootedGraph truncate(const RootedGraph& rg, std::size_t h);

/// Canonical class of a rooted graph that is already a depth-`depth` ball.
RootedClass canonical_class(const RootedGraph& rg, std::uint32_t depth);

/// Canonical relabeling (old vertex -> new label) with the root mapped to 0.
std::vector<std::uint32_t> canonical_labeling(const RootedGraph& rg);

/// Rebuilds the canonically labeled representative from a class key.
RootedGraph graph_of_class(const RootedClass& cls);

RootedClass neighborhood_class(const Graph& g, Vertex root, std::size_t h);

/// 1 / (1 + h*) where h* is the deepest depth at which the truncations agree,
/// or 0 when they agree at every depth up to the larger eccentricity.
double rooted_distance(const RootedGraph& a, const RootedGraph& b);

/// Finite-support probability measure on rooted classes of a single depth.
/// Each atom keeps a representative so distances between atoms are available.
struct LocalDist {
  struct Atom {
    RootedClass cls;
    RootedGraph rep;
    mpq_class weight;
  };

  std::uint32_t depth = 0;
  std::vector<Atom> atoms;  // sorted by cls, distinct keys, positive weights

  /// Throws std::invalid_argument when the invariants above fail or the
  /// weights do not sum to exactly one.
  void validate() const;
};

/// U_h(G): fraction of roots whose depth-h ball falls in each class.
/// Throws std::invalid_argument for the empty graph.
LocalDist empirical_local_dist(const Graph& g, std::size_t h);

/// Builds a measure from (representative, weight) pairs; representatives are
/// truncated to `depth` and merged by class.
LocalDist make_local_dist(std::uint32_t depth,
                          const std::vector<std::pair<RootedGraph, mpq_class>>& atoms);

/// Expected root degree. Throws std::invalid_argument at depth 0.
mpq_class dist_degree(const LocalDist& d);

/// Levy-Prokhorov distance between finite-support measures under d*:
/// min over thresholds t in {0} U {pairwise distances} of max(t, 1 - M(t)),
/// with M(t) the largest coupling mass carried by pairs at distance <= t.
double lp_distance(const LocalDist& d1, const LocalDist& d2);

}  // namespace sgc
