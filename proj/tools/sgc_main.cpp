// sgc: command-line front end for the sparse graph codec.
//
// Exit codes: 0 success, 1 internal or capacity failure, 2 usage or
// configuration error, 3 corrupted container.

#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sgc/analysis.hpp"
#include "sgc/dual_codec.hpp"
#include "sgc/errors.hpp"
#include "sgc/graphon.hpp"
#include "sgc/graphon_codec.hpp"
#include "sgc/ls_estimator.hpp"
#include "sgc/rooted.hpp"

namespace {

using nlohmann::json;

constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCorrupt = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << data;
  if (!out) throw UsageError("failed writing " + path);
}

sgc::Graph load_graph(const std::string& path) {
  std::istringstream in(read_file(path));
  try {
    return sgc::read_edge_list(in);
  } catch (const std::runtime_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

std::string edge_list_text(const sgc::Graph& g) {
  std::ostringstream out;
  sgc::write_edge_list(out, g);
  return out.str();
}

json load_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

sgc::LwcMode parse_mode(const std::string& mode) {
  if (mode == "auto") return sgc::LwcMode::automatic;
  if (mode == "exact") return sgc::LwcMode::exact;
  if (mode == "surrogate") return sgc::LwcMode::surrogate;
  throw UsageError("unknown mode " + mode);
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lossless codec and analysis tools for sparse simple graphs"};
  app.require_subcommand(1);

  std::string in_path;
  std::string out_path;
  std::string policy_text = "an:log";
  std::string mode_text = "auto";
  std::string graphon_path;
  std::uint64_t seed = 0;

  auto* generate = app.add_subcommand("generate", "Sample a W-random graph into an edge-list file");
  std::size_t gen_n = 0;
  double gen_rho = 0.0;
  generate->add_option("--graphon", graphon_path, "Graphon spec (JSON)")->required();
  generate->add_option("--n", gen_n, "Vertex count")->required();
  generate->add_option("--rho", gen_rho, "Target density")->required()->check(CLI::NonNegativeNumber);
  generate->add_option("--seed", seed, "Latent and coin seed");
  generate->add_option("--out", out_path, "Edge-list output")->required();

  auto* encode = app.add_subcommand("encode", "Compress an edge list; prints the encode report");
  encode->add_option("--in", in_path, "Edge-list input")->required();
  encode->add_option("--out", out_path, "Container output")->required();
  encode->add_option("--policy", policy_text, "fixed:<delta> | an:log | an:pow:<gamma>");
  encode->add_option("--mode", mode_text, "exact | surrogate | auto");

  auto* decode = app.add_subcommand("decode", "Restore an edge list from a container");
  decode->add_option("--in", in_path, "Container input")->required();
  decode->add_option("--out", out_path, "Edge-list output")->required();

  auto* roundtrip = app.add_subcommand("roundtrip-check", "Encode, decode and compare in memory");
  roundtrip->add_option("--in", in_path, "Edge-list input")->required();
  roundtrip->add_option("--policy", policy_text, "fixed:<delta> | an:log | an:pow:<gamma>");
  roundtrip->add_option("--mode", mode_text, "exact | surrogate | auto");

  auto* estimate = app.add_subcommand("estimate", "Least-squares block fit");
  double est_beta = 0.0;
  bool est_exact = false;
  estimate->add_option("--in", in_path, "Edge-list input")->required();
  estimate->add_option("--beta", est_beta, "Class budget (default: schedule from m and n)");
  estimate->add_option("--seed", seed, "Heuristic seed");
  estimate->add_flag("--exact", est_exact, "Exhaustive search (n <= 12, floor(beta) <= 3)");

  auto* analyze = app.add_subcommand("analyze", "Density, degrees and local statistics");
  std::size_t depth = 2;
  analyze->add_option("--in", in_path, "Edge-list input")->required();
  analyze->add_option("--depth", depth, "Neighborhood depth");
  analyze->add_option("--graphon", graphon_path, "Also report norms and Ent of this graphon");

  auto* trend = app.add_subcommand("trend", "Run a trend experiment into CSV plus a JSON sidecar");
  std::string experiment;
  std::string config_path;
  trend->add_option("--experiment", experiment, "Experiment id")->required();
  trend->add_option("--config", config_path, "Experiment config (JSON)")->required();
  trend->add_option("--out", out_path, "CSV output; the sidecar goes to <out>.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (generate->parsed()) {
      const sgc::Graphon w = sgc::parse_graphon(load_json(graphon_path));
      const sgc::LatentStream xs(seed);
      const sgc::Graph g = sgc::sample_w_random(w, gen_n, gen_rho, xs);
      write_file(out_path, edge_list_text(g));
      const double n = static_cast<double>(gen_n);
      const double m_bar = n * (n - 1.0) / 2.0 * gen_rho;
      const double m = static_cast<double>(g.num_edges());
      std::cerr << json{{"m", g.num_edges()}, {"m_bar", m_bar}, {"ratio", m_bar > 0 ? m / m_bar : 0.0}}.dump()
                << "\n";
      emit({{"n", gen_n}, {"m", g.num_edges()}, {"out", out_path}});
    } else if (encode->parsed()) {
      const sgc::Graph g = load_graph(in_path);
      const auto result = sgc::encode(g, sgc::DeltaPolicy::parse(policy_text), parse_mode(mode_text));
      write_file(out_path, std::string(result.bytes.begin(), result.bytes.end()));
      json report = result.report.to_json();
      report["policy"] = policy_text;
      if (g.num_vertices() > 0) report["normalized_rate_lwc"] = sgc::normalized_rate_lwc(result.report);
      emit(report);
    } else if (decode->parsed()) {
      const std::string data = read_file(in_path);
      const sgc::Graph g = sgc::decode(std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
      write_file(out_path, edge_list_text(g));
      emit({{"n", g.num_vertices()}, {"m", g.num_edges()}, {"out", out_path}});
    } else if (roundtrip->parsed()) {
      const sgc::Graph g = load_graph(in_path);
      const auto result = sgc::encode(g, sgc::DeltaPolicy::parse(policy_text), parse_mode(mode_text));
      const bool ok = sgc::decode(result.bytes) == g;
      emit({{"ok", ok}, {"n", g.num_vertices()}, {"m", g.num_edges()}, {"total_bits", result.report.total_bits},
            {"nats_total", result.report.nats_total}});
      if (!ok) return kExitInternal;
    } else if (estimate->parsed()) {
      const sgc::Graph g = load_graph(in_path);
      double beta = est_beta;
      if (beta == 0.0) beta = g.num_edges() > 0 && g.num_vertices() > 0
                                  ? sgc::schedule(g.num_edges(), g.num_vertices()).beta
                                  : 1.0;
      const sgc::LsFit fit = est_exact ? sgc::ls_exact(g, beta) : sgc::ls_fit(g, beta, seed);
      json blocks = json::array();
      for (Eigen::Index i = 0; i < fit.blocks.average.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < fit.blocks.average.cols(); ++j) r.push_back(fit.blocks.average(i, j));
        blocks.push_back(r);
      }
      emit({{"beta", fit.beta},
            {"classes", fit.classes},
            {"min_class_size", sgc::min_class_size(g.num_vertices(), fit.beta)},
            {"class_sizes", fit.blocks.sizes},
            {"objective", fit.objective},
            {"block_average", blocks},
            {"assignment", fit.assignment}});
    } else if (analyze->parsed()) {
      const sgc::Graph g = load_graph(in_path);
      json hist = json::object();
      for (auto [d, c] : sgc::degree_histogram(g)) hist[std::to_string(d)] = c;
      json out{{"n", g.num_vertices()},
               {"m", g.num_edges()},
               {"density", sgc::density(g)},
               {"max_degree", g.max_degree()},
               {"degree_histogram", hist}};
      if (g.num_vertices() > 0) {
        const sgc::LocalDist u = sgc::empirical_local_dist(g, depth);
        json weights = json::array();
        for (const auto& atom : u.atoms) weights.push_back(atom.weight.get_str());
        out["depth"] = depth;
        out["local_classes"] = u.atoms.size();
        out["local_weights"] = weights;
        const double avg = 2.0 * static_cast<double>(g.num_edges()) / static_cast<double>(g.num_vertices());
        out["average_degree"] = avg;
        out["s_of_d"] = sgc::s_of_d(avg);
        if (depth > 0) out["dist_degree"] = sgc::dist_degree(u).get_str();
      }
      if (!graphon_path.empty()) {
        const sgc::Graphon w = sgc::parse_graphon(load_json(graphon_path));
        out["graphon"] = {{"describe", w.describe()}, {"norm1", w.norm(1.0)}, {"norm2", w.norm(2.0)},
                          {"ent", sgc::ent(w)}};
      }
      emit(out);
    } else if (trend->parsed()) {
      const sgc::TrendSeries series = sgc::run_trend(experiment, load_json(config_path));
      std::ostringstream csv;
      sgc::write_trend_csv(csv, series);
      write_file(out_path, csv.str());
      write_file(out_path + ".json", sgc::trend_sidecar(series).dump(2) + "\n");
      emit({{"experiment", experiment}, {"rows", series.rows.size()}, {"values", series.values()},
            {"out", out_path}});
    }
  } catch (const sgc::MalformedStream& e) {
    std::cerr << "sgc: corrupted container: " << e.what() << "\n";
    return kExitCorrupt;
  } catch (const UsageError& e) {
    std::cerr << "sgc: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "sgc: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sgc::CapacityError& e) {
    std::cerr << "sgc: capacity exceeded: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "sgc: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
