#pragma once

#include <cstddef>
#include <vector>

#include "sgc/bitcode.hpp"
#include "sgc/graph.hpp"
#include "sgc/ls_estimator.hpp"

namespace sgc {

/// sqrt(x) / log(x) for x > e^2, else 1.
double phi(double x);

struct Schedule {
  double alpha = 1.0;
  double beta = 1.0;
  std::size_t beta_floor = 1;
};

/// alpha = exp(floor(log(m_star / n))), beta = phi(alpha).
/// Throws std::invalid_argument when m_star or n is zero.
Schedule schedule(std::size_t m_star, std::size_t n);

struct HeavyEncoding {
  CodeStream stream;
  std::size_t n = 0;
  std::size_t r_size = 0;
  std::size_t m_star = 0;
  Schedule sched;
  /// Vertex counts per class inside R, labels in first-occurrence order.
  std::vector<std::size_t> block_sizes;
  /// Heavy edges per class pair inside R; block_counts[i][j] == block_counts[j][i].
  std::vector<std::vector<std::size_t>> block_counts;

  /// Nats of |R|, the R rank, m_star and the class labels.
  double nats_part1() const;
  /// Nats of the per-block counts and ranks.
  double nats_part2() const;
  double nats() const { return stream.nats(); }
};

/// Field order: |R|, rank of R, m_star, one label per vertex of R, then for
/// each class pair i <= j the edge count and the rank of the edge cells.
/// Throws std::invalid_argument when the fit does not match the schedule.
HeavyEncoding heavy_encode(const Graph& g_full, const SplitResult& sr, const LsFit& fit);

/// Fit with the schedule's beta on the full graph, then heavy_encode.
HeavyEncoding heavy_encode(const Graph& g_full, const SplitResult& sr, std::uint64_t seed = 0);

Graph heavy_decode(BitReader& in, std::size_t n);
Graph heavy_decode(const HeavyEncoding& enc);

struct HeavyBudget {
  double part1 = 0.0;
  double part2 = 0.0;
  double total() const { return part1 + part2; }
};

/// Per-field allowance in nats for the heavy part. With R empty the whole
/// budget is 1 + log n, reported as part1.
HeavyBudget lemma51_budget(std::size_t n, std::size_t r_size, std::size_t m_star, double beta,
                           const std::vector<std::size_t>& block_sizes,
                           const std::vector<std::vector<std::size_t>>& block_counts);
HeavyBudget lemma51_budget(const HeavyEncoding& enc);

}  // namespace sgc
