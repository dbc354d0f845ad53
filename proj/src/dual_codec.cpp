#include "sgc/dual_codec.hpp"

#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sgc/errors.hpp"
#include "sgc/graphon_codec.hpp"

namespace sgc {

namespace {

constexpr std::uint8_t kFlagExact = 0x1;
constexpr std::uint8_t kFlagHeavy = 0x2;
constexpr std::uint64_t kMaxVertices = std::uint64_t{1} << 26;

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw std::invalid_argument("bad " + what + " \"" + text + "\"");
  }
  return v;
}

}  // namespace

DeltaPolicy DeltaPolicy::fixed(double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("fixed delta must be finite and >= 0");
  return DeltaPolicy{Kind::fixed, delta};
}

DeltaPolicy DeltaPolicy::an_log() { return DeltaPolicy{Kind::an_log, 0.0}; }

DeltaPolicy DeltaPolicy::an_pow(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("an:pow needs gamma > 0 so that a_n grows");
  return DeltaPolicy{Kind::an_pow, gamma};
}

DeltaPolicy DeltaPolicy::parse(const std::string& text) {
  if (text.rfind("fixed:", 0) == 0) return fixed(parse_number(text.substr(6), "delta"));
  if (text == "an:log") return an_log();
  if (text.rfind("an:pow:", 0) == 0) return an_pow(parse_number(text.substr(7), "gamma"));
  throw std::invalid_argument("unknown policy \"" + text + "\" (expected fixed:<delta>, an:log or an:pow:<gamma>)");
}

std::string DeltaPolicy::to_string() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::fixed: out << "fixed:" << value; break;
    case Kind::an_log: out << "an:log"; break;
    case Kind::an_pow: out << "an:pow:" << value; break;
  }
  return out.str();
}

double choose_delta(const DeltaPolicy& policy, std::size_t n) {
  if (policy.kind == DeltaPolicy::Kind::fixed) return policy.value;
  if (n < 3) throw std::invalid_argument("sequence policies need n >= 3");
  const double log_n = std::log(static_cast<double>(n));
  const double log_a = policy.kind == DeltaPolicy::Kind::an_log ? std::log(log_n) : policy.value * log_n;
  return std::min(log_a, std::log(log_n));
}

nlohmann::json EncodeReport::to_json() const {
  nlohmann::json sec = nlohmann::json::array();
  for (const auto& s : sections) sec.push_back({{"label", s.label}, {"bits", s.bits}});
  return {
      {"n", n},
      {"m", m},
      {"m_light", m_light},
      {"m_heavy", m_heavy},
      {"r_size", r_size},
      {"eta", eta},
      {"delta", delta},
      {"beta", beta},
      {"beta_floor", beta_floor},
      {"lwc_exact", lwc_exact},
      {"nats_light", nats_light},
      {"nats_heavy1", nats_heavy1},
      {"nats_heavy2", nats_heavy2},
      {"nats_overhead", nats_overhead},
      {"nats_total", nats_total},
      {"budget_heavy1", budget_heavy1},
      {"budget_heavy2", budget_heavy2},
      {"total_bits", total_bits},
      {"sections", sec},
  };
}

Encoded encode(const Graph& g, const DeltaPolicy& policy, LwcMode mode) {
  const std::size_t n = g.num_vertices();
  EncodeReport report;
  report.n = n;
  report.m = g.num_edges();
  report.delta = choose_delta(policy, n);

  CodeStream out;
  out.begin_section("header");
  for (char c : kMagic) out.write_bits(static_cast<std::uint8_t>(c), 8);
  out.write_bits(kContainerVersion, 8);
  std::uint8_t flags = 0;
  std::size_t flag_offset = out.bit_size();
  out.write_bits(0, 8);
  out.write_bits(n, 64);
  out.write_bits(std::bit_cast<std::uint64_t>(report.delta), 64);

  if (n > 0) {
    const SplitResult sr = split(g, report.delta);
    report.m_light = sr.light.num_edges();
    report.m_heavy = sr.heavy.num_edges();
    report.r_size = sr.heavy_set.size();
    report.eta = sr.eta;

    const LwcEncoding light = lwc_encode(sr.light, mode, lwc_params(n));
    report.lwc_exact = light.exact;
    if (light.exact) flags |= kFlagExact;
    out.append(light.stream);
    out.pad_to_byte();

    const HeavyEncoding heavy = heavy_encode(g, sr, std::uint64_t{0});
    if (heavy.r_size > 0) {
      flags |= kFlagHeavy;
      report.beta = heavy.sched.beta;
      report.beta_floor = heavy.sched.beta_floor;
    }
    out.append(heavy.stream);
    out.pad_to_byte();

    const double ln2 = std::log(2.0);
    report.nats_light = static_cast<double>(light.stream.bit_size()) * ln2;
    report.nats_heavy1 = heavy.nats_part1();
    report.nats_heavy2 = heavy.nats_part2();
    const HeavyBudget budget = lemma51_budget(heavy);
    report.budget_heavy1 = budget.part1;
    report.budget_heavy2 = budget.part2;
  }

  Encoded result;
  result.bytes = out.bytes();
  result.bytes[flag_offset / 8] = flags;
  report.total_bits = out.bit_size();
  report.nats_total = out.nats();
  report.nats_overhead = report.nats_total - report.nats_light - report.nats_heavy();
  report.sections = out.sections();
  result.report = std::move(report);
  return result;
}

Graph decode(std::span<const std::uint8_t> bytes) {
  BitReader in(bytes);
  if (bytes.size() < kHeaderBytes) {
    if (bytes.size() < 4 || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
      throw VersionError("missing container magic", 0);
    }
    throw MalformedStream("container header is truncated", bytes.size() * 8);
  }
  for (char c : kMagic) {
    if (in.read_bits(8) != static_cast<std::uint8_t>(c)) throw VersionError("bad container magic", 0);
  }
  const auto version = in.read_bits(8);
  if (version != kContainerVersion) {
    throw VersionError("unsupported container version " + std::to_string(version), 32);
  }
  const auto flags = static_cast<std::uint8_t>(in.read_bits(8));
  if (flags & ~(kFlagExact | kFlagHeavy)) throw MalformedStream("unknown container flags", 40);
  const std::uint64_t n = in.read_bits(64);
  if (n > kMaxVertices) throw MalformedStream("vertex count out of range", 48);
  const double delta = std::bit_cast<double>(in.read_bits(64));
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw MalformedStream("bad delta field", 112);
  if (n == 0) {
    if (in.remaining() != 0 || flags != 0) throw MalformedStream("trailing data after empty graph", in.position());
    return Graph(0);
  }
  const Graph light = lwc_decode(in, n, lwc_params(n), (flags & kFlagExact) != 0);
  in.align_to_byte();
  const std::size_t heavy_at = in.position();
  const Graph heavy = heavy_decode(in, n);
  if ((heavy.num_edges() > 0) != ((flags & kFlagHeavy) != 0)) {
    throw MalformedStream("heavy-part flag disagrees with the heavy section", heavy_at);
  }
  in.align_to_byte();
  if (in.remaining() != 0) throw MalformedStream("trailing bytes after the heavy section", in.position());
  try {
    return edge_union(light, heavy);
  } catch (const std::invalid_argument& e) {
    throw MalformedStream(std::string("light and heavy parts overlap: ") + e.what(), heavy_at);
  }
}

double normalized_rate_lwc(const EncodeReport& r) {
  if (r.n == 0) throw std::invalid_argument("normalized_rate_lwc: n must be positive");
  const double n = static_cast<double>(r.n);
  return (r.nats_total - static_cast<double>(r.m) * std::log(n)) / n;
}

double normalized_rate_graphon(const EncodeReport& r, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("normalized_rate_graphon: rho must lie in (0, 1)");
  const double n = static_cast<double>(r.n);
  const double mbar = n * (n - 1.0) / 2.0 * rho;
  if (mbar <= 0.0) throw std::invalid_argument("normalized_rate_graphon: n must be at least 2");
  return (r.nats_total - mbar * std::log(1.0 / rho)) / mbar;
}

}  // namespace sgc
