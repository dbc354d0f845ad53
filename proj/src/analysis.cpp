#include "sgc/analysis.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sgc/dual_codec.hpp"
#include "sgc/errors.hpp"
#include "sgc/graphon_codec.hpp"
#include "sgc/ls_estimator.hpp"

namespace sgc {

double s_of_d(double d) {
  if (d < 0.0) throw std::invalid_argument("s_of_d: d must be nonnegative");
  if (d == 0.0) return 0.0;
  return d / 2.0 - d / 2.0 * std::log(d);
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("binary_entropy: x must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log(x) - (1.0 - x) * std::log1p(-x);
}

double edge_set_rate(std::size_t n, std::size_t m) {
  if (n == 0) throw std::invalid_argument("edge_set_rate: n must be positive");
  const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const double nd = static_cast<double>(n);
  return (log_binomial(pairs, m) - static_cast<double>(m) * std::log(nd)) / nd;
}

BigInt count_typical(std::size_t n, std::size_t m, const LocalDist& target, double eps,
                     std::size_t budget) {
  if (n > 8) throw CapacityError("count_typical is limited to n <= 8");
  const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n > 0 ? n - 1 : 0) / 2;
  if (m > pairs) return 0;
  const BigInt total = binomial(pairs, m);
  if (total > static_cast<unsigned long>(budget)) {
    throw CapacityError("count_typical: " + total.get_str() + " graphs exceed the budget");
  }
  if (n == 0) return 0;
  std::vector<Edge> all;
  for (Vertex v = 1; v < n; ++v) {
    for (Vertex u = 0; u < v; ++u) all.emplace_back(u, v);
  }
  const std::size_t depth = std::max<std::size_t>(n, target.depth);
  std::vector<std::size_t> pick(m);
  for (std::size_t i = 0; i < m; ++i) pick[i] = i;
  BigInt count = 0;
  std::vector<Edge> edges(m);
  while (true) {
    for (std::size_t i = 0; i < m; ++i) edges[i] = all[pick[i]];
    const Graph g = Graph::from_edges(n, edges);
    if (lp_distance(empirical_local_dist(g, depth), target) < eps) ++count;
    // Next m-combination in lexicographic order.
    std::size_t i = m;
    while (i > 0 && pick[i - 1] == pairs - m + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < m; ++j) pick[j] = pick[j - 1] + 1;
  }
  return count;
}

double h_exact_tiny(const BlockGraphon& w, double rho, std::size_t n) {
  w.validate();
  const std::size_t k = w.blocks();
  if (n > 5 || k > 3) throw CapacityError("h_exact_tiny is limited to n <= 5 and at most 3 blocks");
  if (rho < 0.0) throw std::invalid_argument("h_exact_tiny: rho must be nonnegative");
  const std::size_t pairs = n * (n > 0 ? n - 1 : 0) / 2;
  std::vector<long double> prob(std::size_t{1} << pairs, 0.0L);
  std::vector<std::size_t> label(n, 0);
  std::vector<long double> dist;
  std::size_t assignments = 1;
  for (std::size_t i = 0; i < n; ++i) assignments *= k;
  for (std::size_t code = 0; code < assignments; ++code) {
    std::size_t rest = code;
    long double weight = 1.0L;
    for (std::size_t v = 0; v < n; ++v) {
      label[v] = rest % k;
      rest /= k;
      weight *= w.p[label[v]];
    }
    if (weight == 0.0L) continue;
    // Bit e of the mask is the pair e in (u < v) row order.
    dist.assign(1, weight);
    for (std::size_t v = 1; v < n; ++v) {
      for (std::size_t u = 0; u < v; ++u) {
        const long double q = std::min<long double>(
            1.0L, rho * w.B(static_cast<Eigen::Index>(label[u]), static_cast<Eigen::Index>(label[v])));
        const std::size_t half = dist.size();
        dist.resize(2 * half);
        for (std::size_t s = 0; s < half; ++s) {
          dist[half + s] = dist[s] * q;
          dist[s] *= 1.0L - q;
        }
      }
    }
    for (std::size_t s = 0; s < dist.size(); ++s) prob[s] += dist[s];
  }
  long double h = 0.0L;
  for (long double p : prob) {
    if (p > 0.0L) h -= p * std::log(p);
  }
  return static_cast<double>(h);
}

double er_entropy_gap(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("er_entropy_gap: rho must lie in (0, 1)");
  return binary_entropy(rho) / rho - std::log(1.0 / rho);
}

std::size_t worker_limit() {
  if (const char* env = std::getenv("SGC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string git_blob_hash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  const std::string blob = header + std::string(content);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &length, EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

std::vector<double> TrendSeries::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::invalid_argument("no column named " + std::string(name));
  const auto idx = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[idx]);
  return out;
}

namespace {

struct TrendSetup {
  std::vector<std::size_t> grid;
  double rho = -1.0;
  double rho_exponent = 0.0;
  Graphon graphon = Graphon(BlockGraphon{{1.0}, Eigen::MatrixXd::Constant(1, 1, 1.0)});
  std::uint64_t seed = 0;
  DeltaPolicy policy = DeltaPolicy::an_log();
  LwcMode mode = LwcMode::automatic;
  int effort = 1;

  double rho_at(std::size_t n) const {
    return rho >= 0.0 ? rho : std::pow(static_cast<double>(n), rho_exponent);
  }
};

TrendSetup parse_setup(const nlohmann::json& config) {
  if (!config.is_object()) throw std::invalid_argument("trend config must be a JSON object");
  TrendSetup s;
  try {
    if (!config.contains("grid")) throw std::invalid_argument("trend config needs a \"grid\" of vertex counts");
    s.grid = config.at("grid").get<std::vector<std::size_t>>();
    if (s.grid.empty()) throw std::invalid_argument("trend grid must not be empty");
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
      if (s.grid[i] < 3) throw std::invalid_argument("trend grid values must be >= 3");
      if (i > 0 && s.grid[i] <= s.grid[i - 1]) throw std::invalid_argument("trend grid must be strictly increasing");
    }
    const bool has_rho = config.contains("rho");
    const bool has_exp = config.contains("rho_exponent");
    if (has_rho == has_exp) throw std::invalid_argument("trend config needs exactly one of \"rho\" and \"rho_exponent\"");
    if (has_rho) {
      s.rho = config.at("rho").get<double>();
      if (!(s.rho > 0.0 && s.rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
    } else {
      s.rho_exponent = config.at("rho_exponent").get<double>();
      if (!(s.rho_exponent < 0.0 && s.rho_exponent > -1.0)) {
        throw std::invalid_argument("rho_exponent must lie in (-1, 0)");
      }
    }
    if (config.contains("graphon")) s.graphon = parse_graphon(config.at("graphon"));
    if (config.contains("seed")) s.seed = config.at("seed").get<std::uint64_t>();
    if (config.contains("policy")) s.policy = DeltaPolicy::parse(config.at("policy").get<std::string>());
    if (config.contains("mode")) {
      const auto mode = config.at("mode").get<std::string>();
      if (mode == "auto") s.mode = LwcMode::automatic;
      else if (mode == "exact") s.mode = LwcMode::exact;
      else if (mode == "surrogate") s.mode = LwcMode::surrogate;
      else throw std::invalid_argument("unknown mode \"" + mode + "\"");
    }
    if (config.contains("effort")) s.effort = config.at("effort").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad trend config: ") + e.what());
  }
  return s;
}

std::vector<std::string> columns_for(const std::string& experiment) {
  if (experiment == "density-convergence") return {"n", "rho", "value", "m", "m_bar", "m_cond"};
  if (experiment == "ls-consistency") return {"n", "rho", "value", "beta", "classes", "objective", "product_bound"};
  if (experiment == "codec-rate-graphon" || experiment == "codec-rate-lwc") {
    return {"n", "rho", "value", "m", "nats_total", "eta", "delta"};
  }
  if (experiment == "fitted-gap") return {"n", "rho", "value", "optimized", "m", "m_heavy", "beta"};
  throw std::invalid_argument("unknown experiment \"" + experiment + "\"");
}

std::vector<double> trend_point(const std::string& experiment, const TrendSetup& s, std::size_t n) {
  const double rho = s.rho_at(n);
  const LatentStream xs(s.seed);
  const double nd = static_cast<double>(n);
  const double m_bar = nd * (nd - 1.0) / 2.0 * rho;
  const Graph g = sample_w_random(s.graphon, n, rho, xs);
  const double m = static_cast<double>(g.num_edges());
  if (experiment == "density-convergence") {
    return {nd, rho, std::abs(m / m_bar - 1.0), m, m_bar, conditional_expected_edges(s.graphon, rho, xs, n)};
  }
  if (experiment == "ls-consistency") {
    const Schedule sched = schedule(std::max<std::size_t>(g.num_edges(), 1), n);
    const LsFit fit = ls_fit(g, sched.beta, 0);
    const FittedGraphons fitted = fitted_graphons(fit, split(g, static_cast<double>(n)));
    const Delta2Bound bound = delta2_upper(fitted.full.scaled(1.0 / rho), s.graphon.to_block(), s.effort);
    return {nd, rho, bound.value, sched.beta, static_cast<double>(fit.classes), fit.objective, bound.product};
  }
  if (experiment == "codec-rate-graphon" || experiment == "codec-rate-lwc") {
    const Encoded enc = encode(g, s.policy, s.mode);
    const double value = experiment == "codec-rate-lwc" ? normalized_rate_lwc(enc.report)
                                                        : normalized_rate_graphon(enc.report, rho);
    return {nd, rho, value, m, enc.report.nats_total, enc.report.eta, enc.report.delta};
  }
  // fitted-gap: the codec's own fit, compared on the full and heavy parts.
  const SplitResult sr = split(g, choose_delta(s.policy, n));
  const std::size_t m_fit = sr.heavy.num_edges() > 0 ? sr.heavy.num_edges() : std::max<std::size_t>(g.num_edges(), 1);
  const Schedule sched = schedule(m_fit, n);
  const LsFit fit = ls_fit(g, sched.beta, 0);
  const FittedGraphons fitted = fitted_graphons(fit, sr);
  const BlockGraphon full = fitted.full.scaled(1.0 / rho);
  const BlockGraphon heavy = fitted.heavy.scaled(1.0 / rho);
  return {nd, rho, delta2_identity(full, heavy), delta2_upper(full, heavy, s.effort).value, m,
          static_cast<double>(sr.heavy.num_edges()), sched.beta};
}

}  // namespace

TrendSeries run_trend(const std::string& experiment, const nlohmann::json& config) {
  TrendSeries series;
  series.experiment = experiment;
  series.columns = columns_for(experiment);
  const TrendSetup setup = parse_setup(config);
  series.config = config;
  series.rows.resize(setup.grid.size());

  const std::size_t workers = std::min(worker_limit(), setup.grid.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&]() {
    for (std::size_t i = next++; i < setup.grid.size(); i = next++) {
      try {
        series.rows[i] = trend_point(experiment, setup, setup.grid[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return series;
}

void write_trend_csv(std::ostream& out, const TrendSeries& series) {
  for (std::size_t c = 0; c < series.columns.size(); ++c) out << (c ? "," : "") << series.columns[c];
  out << "\n";
  out << std::setprecision(17);
  for (const auto& row : series.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << "\n";
  }
}

nlohmann::json trend_sidecar(const TrendSeries& series) {
  const std::string canonical = series.config.dump();
  return {
      {"experiment", series.experiment},
      {"config", series.config},
      {"columns", series.columns},
      {"rows", series.rows.size()},
      {"input_hash", git_blob_hash(canonical)},
  };
}

std::size_t count_inversions(const std::vector<double>& series, bool expect_decreasing) {
  std::size_t count = 0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (expect_decreasing ? series[i] > series[i - 1] : series[i] < series[i - 1]) ++count;
  }
  return count;
}

}  // namespace sgc
