#pragma once

#include <Eigen/Dense>
#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sgc/graph.hpp"

namespace sgc {

/// Step graphon: block a has mass p[a]; W = B(a, b) on block a x block b.
struct BlockGraphon {
  std::vector<double> p;
  Eigen::MatrixXd B;

  std::size_t blocks() const noexcept { return p.size(); }
  /// Throws std::invalid_argument unless p >= 0 sums to 1 (1e-9), B is square,
  /// symmetric and nonnegative.
  void validate() const;
  BlockGraphon scaled(double factor) const;
};

/// Function on [0,1]^2 sampled on an r x r grid; cell (i, j) covers
/// [i/r, (i+1)/r) x [j/r, (j+1)/r).
struct GridGraphon {
  Eigen::MatrixXd values;

  std::size_t resolution() const noexcept { return static_cast<std::size_t>(values.rows()); }
  void validate() const;
};

/// W_a(x, y) = (1 - a)^2 (x y)^(-a) for a in (0, 1/2); unbounded, ||W||_1 = 1.
struct PowerLawGraphon {
  double a = 0.25;
};

/// Latents are uniform on [0,1] for every kind; block graphons map a latent to
/// the block whose cumulative mass interval contains it.
class Graphon {
 public:
  using Kind = std::variant<BlockGraphon, GridGraphon, PowerLawGraphon>;

  Graphon(BlockGraphon w);
  Graphon(GridGraphon w);
  Graphon(PowerLawGraphon w);

  const Kind& kind() const noexcept { return kind_; }
  double value(double x, double y) const;
  /// ||W||_p; exact for block and power-law, cell quadrature for grids.
  double norm(double p) const;
  /// Grid sample of W with midpoint evaluation (block, grid) or exact cell
  /// averages (power law).
  GridGraphon to_grid(std::size_t resolution) const;
  /// Step form used by delta2 bounds; grids become equal-weight blocks.
  BlockGraphon to_block(std::size_t resolution = 64) const;
  std::string describe() const;

 private:
  Kind kind_;
  std::vector<double> cumulative_;  // block kind only
};

/// Parses {"kind": "block", "p": [...], "B": [[...]]},
/// {"kind": "grid", "values": [[...]]} or {"kind": "powerlaw", "a": 0.25}.
/// Throws std::invalid_argument on malformed specs.
Graphon parse_graphon(const nlohmann::json& spec);
nlohmann::json graphon_to_json(const Graphon& w);

double graphon_norm(const BlockGraphon& w, double p);
double graphon_norm(const GridGraphon& w, double p);

/// E[W log W] - E[W] log E[W], with 0 log 0 = 0.
double ent(const BlockGraphon& w);
double ent(const GridGraphon& w);
double ent(const PowerLawGraphon& w);
double ent(const Graphon& w);

/// Cell-average grid of the power-law graphon.
GridGraphon powerlaw_grid(double a, std::size_t resolution);

/// Counter-based i.i.d. uniform latents: X_i depends only on (seed, i), so the
/// same stream serves every n of an experiment.
class LatentStream {
 public:
  explicit LatentStream(std::uint64_t seed) : seed_(seed) {}
  std::uint64_t seed() const noexcept { return seed_; }
  /// X_i in (0, 1).
  double operator()(std::size_t i) const noexcept;
  std::vector<double> first(std::size_t n) const;

 private:
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
/// Uniform in (0, 1) from a 64-bit hash.
double unit_interval(std::uint64_t bits) noexcept;

/// Edge {i, j} is present iff coin(i, j) < min(1, rho W(X_i, X_j)); coins are
/// keyed by (seed, i, j) so graphs for different n share their prefixes.
/// Warns on stderr when ||W||_1 is not 1 within 1e-9.
Graph sample_w_random(const Graphon& w, std::size_t n, double rho, const LatentStream& xs);

/// sum_{i<j} min(1, rho W(X_i, X_j)) over the realized latents.
double conditional_expected_edges(const Graphon& w, double rho, const LatentStream& xs,
                                  std::size_t n);

struct Delta2Bound {
  double value = 0.0;      // best upper bound found
  double product = 0.0;    // independent coupling
  double permutation = -1; // best block permutation, -1 when not applicable
  double descent = -1;     // conditional-gradient result, -1 when skipped
};

/// Upper bound on the L2 coupling distance. `effort` scales the number of
/// conditional-gradient starts and iterations; 0 skips the descent.
Delta2Bound delta2_upper(const BlockGraphon& w1, const BlockGraphon& w2, int effort = 1);

/// Distance under the diagonal coupling; both graphons must share p.
double delta2_identity(const BlockGraphon& w1, const BlockGraphon& w2);

/// Squared distance sum_{ab,cd} G_ab G_cd (B1_ac - B2_bd)^2 for a coupling G.
double coupling_cost(const BlockGraphon& w1, const BlockGraphon& w2, const Eigen::MatrixXd& G);

}  // namespace sgc
