#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sgc/bitcode.hpp"
#include "sgc/graphon.hpp"
#include "sgc/rooted.hpp"

namespace sgc {

/// d/2 - (d/2) log d, with s(0) = 0. Throws std::invalid_argument for d < 0.
double s_of_d(double d);

/// Natural-base binary entropy. Throws std::invalid_argument outside [0, 1].
double binary_entropy(double x);

/// (log C(C(n,2), m) - m log n) / n.
double edge_set_rate(std::size_t n, std::size_t m);

/// Number of m-edge graphs on [n] whose full local distribution lies within
/// Levy-Prokhorov distance < eps of the target. Throws CapacityError for
/// n > 8 or when C(C(n,2), m) exceeds `budget`.
BigInt count_typical(std::size_t n, std::size_t m, const LocalDist& target, double eps,
                     std::size_t budget = 2'000'000);

/// Entropy of the W-random graph on n <= 5 vertices from a block graphon with
/// at most 3 blocks, by marginalizing the block labels.
double h_exact_tiny(const BlockGraphon& w, double rho, std::size_t n);

/// H_b(rho) / rho - log(1 / rho).
double er_entropy_gap(double rho);

/// Worker cap: SGC_THREADS when set and positive, else hardware concurrency.
std::size_t worker_limit();

/// SHA-1 of "blob <size>\0<content>", hex encoded.
std::string git_blob_hash(std::string_view content);

struct TrendSeries {
  std::string experiment;
  std::vector<std::string> columns;         // first column "n", "value" always present
  std::vector<std::vector<double>> rows;    // one per grid point
  nlohmann::json config;

  std::vector<double> column(std::string_view name) const;
  std::vector<double> values() const { return column("value"); }
};

/// Experiments: density-convergence, ls-consistency, codec-rate-graphon,
/// codec-rate-lwc, fitted-gap. Config keys: "grid" (strictly increasing n),
/// exactly one of "rho" or "rho_exponent" (rho_n = n^e), optional "graphon"
/// (default W = 1), "seed" (0), "policy" ("an:log"), "mode" ("auto"),
/// "effort" (1). Throws std::invalid_argument on invalid configs.
TrendSeries run_trend(const std::string& experiment, const nlohmann::json& config);

void write_trend_csv(std::ostream& out, const TrendSeries& series);
/// Metadata sidecar: experiment, full config, column names and the blob hash
/// of the serialized config.
nlohmann::json trend_sidecar(const TrendSeries& series);

/// Count of adjacent steps that move against the expected direction.
std::size_t count_inversions(const std::vector<double>& series, bool expect_decreasing);

}  // namespace sgc
