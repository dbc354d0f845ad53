#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgc/bitcode.hpp"
#include "sgc/graph.hpp"
#include "sgc/lwc_codec.hpp"

namespace sgc {

inline constexpr char kMagic[4] = {'S', 'G', 'C', '1'};
inline constexpr std::uint8_t kContainerVersion = 1;
inline constexpr std::size_t kHeaderBytes = 22;  // magic, version, flags, n (u64), delta (f64)

/// Degree threshold policy: a fixed value, or min(log a_n, log log n) for a
/// preset sequence a_n = log n ("log") or n^gamma ("pow").
struct DeltaPolicy {
  enum class Kind { fixed, an_log, an_pow };
  Kind kind = Kind::an_log;
  double value = 0.0;  // delta for fixed, gamma for an_pow

  static DeltaPolicy fixed(double delta);
  static DeltaPolicy an_log();
  static DeltaPolicy an_pow(double gamma);
  /// "fixed:<delta>", "an:log" or "an:pow:<gamma>".
  /// Throws std::invalid_argument on anything else.
  static DeltaPolicy parse(const std::string& text);
  std::string to_string() const;
};

/// Throws std::invalid_argument for n < 3 under a sequence policy.
double choose_delta(const DeltaPolicy& policy, std::size_t n);

struct EncodeReport {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t m_light = 0;
  std::size_t m_heavy = 0;
  std::size_t r_size = 0;
  double eta = 0.0;
  double delta = 0.0;
  double beta = 1.0;
  std::size_t beta_floor = 1;
  bool lwc_exact = false;
  double nats_light = 0.0;
  double nats_heavy1 = 0.0;
  double nats_heavy2 = 0.0;
  double nats_overhead = 0.0;  // header and byte padding
  double nats_total = 0.0;
  double budget_heavy1 = 0.0;
  double budget_heavy2 = 0.0;
  std::size_t total_bits = 0;
  std::vector<CodeStream::Section> sections;

  double nats_heavy() const { return nats_heavy1 + nats_heavy2; }
  nlohmann::json to_json() const;
};

struct Encoded {
  std::vector<std::uint8_t> bytes;
  EncodeReport report;
};

/// Splits at choose_delta(policy, n), codes the light part with the lwc coder
/// and the heavy part with the block coder (fit seed 0).
Encoded encode(const Graph& g, const DeltaPolicy& policy, LwcMode mode = LwcMode::automatic);

/// Throws VersionError on a bad magic or version, MalformedStream otherwise.
Graph decode(std::span<const std::uint8_t> bytes);

/// (nats_total - m log n) / n.
double normalized_rate_lwc(const EncodeReport& r);
/// (nats_total - mbar log(1/rho)) / mbar with mbar = C(n,2) rho; rho in (0,1).
double normalized_rate_graphon(const EncodeReport& r, double rho);

}  // namespace sgc
