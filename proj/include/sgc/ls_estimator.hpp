#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sgc/graph.hpp"
#include "sgc/graphon.hpp"

namespace sgc {

/// Block counts of a vertex partition. edges(i, j) counts edges between
/// classes i and j (each edge once, symmetric storage).
struct BlockCounts {
  std::vector<std::size_t> sizes;
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> edges;
  Eigen::MatrixXd average;  // 2 m_ii / n_i^2 on the diagonal, m_ij / (n_i n_j) off it
};

/// Throws std::invalid_argument if some label is >= classes or the
/// assignment does not cover every vertex.
BlockCounts block_average(const Graph& g, const std::vector<std::uint32_t>& assignment,
                          std::size_t classes);

struct LsFit {
  double beta = 1.0;
  std::size_t classes = 1;                 // floor(beta)
  std::vector<std::uint32_t> assignment;   // labels in first-occurrence order
  BlockCounts blocks;
  double objective = 0.0;                  // normalized L2 distance ||A - B^pi||_2
};

/// Smallest admissible nonempty class size, ceil(n / beta).
std::size_t min_class_size(std::size_t n, double beta);

/// ||A - B^pi||_2 for the block averages of `assignment`.
double ls_objective(const Graph& g, const BlockCounts& blocks);

/// Exhaustive minimizer for n <= 12 and floor(beta) <= 3; ties go to the
/// lexicographically smallest assignment. Throws CapacityError otherwise.
LsFit ls_exact(const Graph& g, double beta);

/// Spectral embedding on the top floor(beta) eigenvectors, seeded k-means,
/// size repair, then single-vertex relocations while the objective drops.
LsFit ls_heuristic(const Graph& g, double beta, std::uint64_t seed = 0);

/// ls_exact where its budget allows, ls_heuristic otherwise.
LsFit ls_fit(const Graph& g, double beta, std::uint64_t seed = 0);

/// Block graphons of the fit: weights n_i / n with the full-graph block
/// averages, and the same weights with the heavy-part counts of `split`.
struct FittedGraphons {
  BlockGraphon full;
  BlockGraphon heavy;
  /// Edge counts of the heavy part per class pair.
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> heavy_edges;
};

FittedGraphons fitted_graphons(const LsFit& fit, const SplitResult& split);

}  // namespace sgc
