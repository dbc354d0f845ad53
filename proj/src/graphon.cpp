#include "sgc/graphon.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sgc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double xlogx(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double powerlaw_value(double a, double x, double y) {
  return (1.0 - a) * (1.0 - a) * std::pow(x * y, -a);
}

void check_powerlaw(double a) {
  if (!(a > 0.0 && a < 0.5)) throw std::invalid_argument("power-law exponent must lie in (0, 1/2)");
}

std::uint64_t pair_key(std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  return static_cast<std::uint64_t>(j) * (j - 1) / 2 + i;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double unit_interval(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double LatentStream::operator()(std::size_t i) const noexcept {
  return unit_interval(splitmix64(splitmix64(seed_) ^ splitmix64(i)));
}

std::vector<double> LatentStream::first(std::size_t n) const {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = (*this)(i);
  return xs;
}

void BlockGraphon::validate() const {
  const auto k = static_cast<Eigen::Index>(p.size());
  if (k == 0) throw std::invalid_argument("block graphon needs at least one block");
  if (B.rows() != k || B.cols() != k) throw std::invalid_argument("block matrix must be k x k");
  double total = 0.0;
  for (double w : p) {
    if (!(w >= 0.0)) throw std::invalid_argument("block weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("block weights must sum to 1");
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      if (!(B(a, b) >= 0.0) || !std::isfinite(B(a, b))) {
        throw std::invalid_argument("block values must be finite and nonnegative");
      }
      if (B(a, b) != B(b, a)) throw std::invalid_argument("block matrix must be symmetric");
    }
  }
}

BlockGraphon BlockGraphon::scaled(double factor) const {
  return BlockGraphon{p, B * factor};
}

void GridGraphon::validate() const {
  if (values.rows() == 0 || values.rows() != values.cols()) {
    throw std::invalid_argument("grid graphon needs a nonempty square value matrix");
  }
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (!(values(i, j) >= 0.0) || !std::isfinite(values(i, j))) {
        throw std::invalid_argument("grid values must be finite and nonnegative");
      }
      if (values(i, j) != values(j, i)) throw std::invalid_argument("grid values must be symmetric");
    }
  }
}

Graphon::Graphon(BlockGraphon w) : kind_(std::move(w)) {
  const auto& b = std::get<BlockGraphon>(kind_);
  b.validate();
  cumulative_.resize(b.p.size());
  std::partial_sum(b.p.begin(), b.p.end(), cumulative_.begin());
}

Graphon::Graphon(GridGraphon w) : kind_(std::move(w)) { std::get<GridGraphon>(kind_).validate(); }

Graphon::Graphon(PowerLawGraphon w) : kind_(w) { check_powerlaw(w.a); }

double Graphon::value(double x, double y) const {
  return std::visit(
      overloaded{
          [&](const BlockGraphon& b) {
            auto block = [&](double t) {
              auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), t);
              auto idx = static_cast<Eigen::Index>(it - cumulative_.begin());
              // Skip zero-mass blocks and clamp rounding at the top end.
              idx = std::min<Eigen::Index>(idx, static_cast<Eigen::Index>(b.p.size()) - 1);
              while (idx > 0 && b.p[static_cast<std::size_t>(idx)] == 0.0) --idx;
              return idx;
            };
            return b.B(block(x), block(y));
          },
          [&](const GridGraphon& g) {
            const auto r = static_cast<Eigen::Index>(g.resolution());
            auto cell = [&](double t) {
              return std::min<Eigen::Index>(static_cast<Eigen::Index>(t * static_cast<double>(r)), r - 1);
            };
            return g.values(cell(x), cell(y));
          },
          [&](const PowerLawGraphon& w) { return powerlaw_value(w.a, x, y); },
      },
      kind_);
}

double graphon_norm(const BlockGraphon& w, double p) {
  if (p < 1.0) throw std::invalid_argument("graphon_norm: p must be >= 1");
  double sum = 0.0;
  for (std::size_t a = 0; a < w.p.size(); ++a) {
    for (std::size_t b = 0; b < w.p.size(); ++b) {
      sum += w.p[a] * w.p[b] *
             std::pow(std::abs(w.B(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))), p);
    }
  }
  return std::pow(sum, 1.0 / p);
}

double graphon_norm(const GridGraphon& w, double p) {
  if (p < 1.0) throw std::invalid_argument("graphon_norm: p must be >= 1");
  const double r = static_cast<double>(w.resolution());
  return std::pow(w.values.array().abs().pow(p).sum() / (r * r), 1.0 / p);
}

double Graphon::norm(double p) const {
  return std::visit(overloaded{
                        [&](const BlockGraphon& b) { return graphon_norm(b, p); },
                        [&](const GridGraphon& g) { return graphon_norm(g, p); },
                        [&](const PowerLawGraphon& w) {
                          if (p < 1.0) throw std::invalid_argument("graphon_norm: p must be >= 1");
                          if (w.a * p >= 1.0) return kInf;
                          const double one_dim = 1.0 / (1.0 - w.a * p);
                          return std::pow(std::pow(1.0 - w.a, 2.0 * p) * one_dim * one_dim, 1.0 / p);
                        },
                    },
                    kind_);
}

GridGraphon powerlaw_grid(double a, std::size_t resolution) {
  check_powerlaw(a);
  if (resolution == 0) throw std::invalid_argument("powerlaw_grid: resolution must be positive");
  const double r = static_cast<double>(resolution);
  // Cell average of x^(-a) over [i/r, (i+1)/r).
  std::vector<double> marginal(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    const double lo = static_cast<double>(i) / r;
    const double hi = static_cast<double>(i + 1) / r;
    marginal[i] = r * (std::pow(hi, 1.0 - a) - std::pow(lo, 1.0 - a)) / (1.0 - a);
  }
  GridGraphon g;
  const auto n = static_cast<Eigen::Index>(resolution);
  g.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      g.values(i, j) = g.values(j, i) = (1.0 - a) * (1.0 - a) * marginal[static_cast<std::size_t>(i)] *
                                        marginal[static_cast<std::size_t>(j)];
    }
  }
  return g;
}

GridGraphon Graphon::to_grid(std::size_t resolution) const {
  if (resolution == 0) throw std::invalid_argument("to_grid: resolution must be positive");
  if (const auto* w = std::get_if<PowerLawGraphon>(&kind_)) return powerlaw_grid(w->a, resolution);
  GridGraphon g;
  const auto n = static_cast<Eigen::Index>(resolution);
  g.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      const double y = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
      g.values(i, j) = g.values(j, i) = value(x, y);
    }
  }
  return g;
}

BlockGraphon Graphon::to_block(std::size_t resolution) const {
  if (const auto* b = std::get_if<BlockGraphon>(&kind_)) return *b;
  const GridGraphon g =
      std::holds_alternative<GridGraphon>(kind_) ? std::get<GridGraphon>(kind_) : to_grid(resolution);
  BlockGraphon out;
  out.p.assign(g.resolution(), 1.0 / static_cast<double>(g.resolution()));
  out.B = g.values;
  return out;
}

std::string Graphon::describe() const {
  return std::visit(overloaded{
                        [](const BlockGraphon& b) { return "block(k=" + std::to_string(b.blocks()) + ")"; },
                        [](const GridGraphon& g) { return "grid(r=" + std::to_string(g.resolution()) + ")"; },
                        [](const PowerLawGraphon& w) {
                          std::ostringstream s;
                          s << "powerlaw(a=" << w.a << ")";
                          return s.str();
                        },
                    },
                    kind_);
}

double ent(const BlockGraphon& w) {
  double mean = 0.0;
  double wlogw = 0.0;
  for (std::size_t a = 0; a < w.p.size(); ++a) {
    for (std::size_t b = 0; b < w.p.size(); ++b) {
      const double v = w.B(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      mean += w.p[a] * w.p[b] * v;
      wlogw += w.p[a] * w.p[b] * xlogx(v);
    }
  }
  return wlogw - xlogx(mean);
}

double ent(const GridGraphon& w) {
  const double cells = static_cast<double>(w.values.size());
  double mean = 0.0;
  double wlogw = 0.0;
  for (Eigen::Index i = 0; i < w.values.size(); ++i) {
    mean += w.values.data()[i];
    wlogw += xlogx(w.values.data()[i]);
  }
  return wlogw / cells - xlogx(mean / cells);
}

double ent(const PowerLawGraphon& w) {
  check_powerlaw(w.a);
  // E[W] = 1 and E[W log W] = log (1-a)^2 + 2a / (1-a).
  return 2.0 * std::log(1.0 - w.a) + 2.0 * w.a / (1.0 - w.a);
}

double ent(const Graphon& w) {
  return std::visit([](const auto& g) { return ent(g); }, w.kind());
}

Graphon parse_graphon(const nlohmann::json& spec) {
  try {
    if (!spec.is_object() || !spec.contains("kind")) {
      throw std::invalid_argument("graphon spec must be an object with a \"kind\" field");
    }
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "block") {
      BlockGraphon b;
      b.p = spec.at("p").get<std::vector<double>>();
      const auto rows = spec.at("B").get<std::vector<std::vector<double>>>();
      const auto k = static_cast<Eigen::Index>(rows.size());
      b.B.resize(k, k);
      for (Eigen::Index i = 0; i < k; ++i) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != k) {
          throw std::invalid_argument("block matrix rows must have k entries");
        }
        for (Eigen::Index j = 0; j < k; ++j) b.B(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
      return Graphon(std::move(b));
    }
    if (kind == "grid") {
      const auto rows = spec.at("values").get<std::vector<std::vector<double>>>();
      GridGraphon g;
      const auto r = static_cast<Eigen::Index>(rows.size());
      g.values.resize(r, r);
      for (Eigen::Index i = 0; i < r; ++i) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != r) {
          throw std::invalid_argument("grid rows must have r entries");
        }
        for (Eigen::Index j = 0; j < r; ++j) g.values(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
      if (spec.contains("r") && spec.at("r").get<Eigen::Index>() != r) {
        throw std::invalid_argument("grid resolution does not match the value matrix");
      }
      return Graphon(std::move(g));
    }
    if (kind == "powerlaw") return Graphon(PowerLawGraphon{spec.at("a").get<double>()});
    throw std::invalid_argument("unknown graphon kind \"" + kind + "\"");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad graphon spec: ") + e.what());
  }
}

nlohmann::json graphon_to_json(const Graphon& w) {
  auto matrix = [](const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  return std::visit(overloaded{
                        [&](const BlockGraphon& b) {
                          return nlohmann::json{{"kind", "block"}, {"p", b.p}, {"B", matrix(b.B)}};
                        },
                        [&](const GridGraphon& g) {
                          return nlohmann::json{
                              {"kind", "grid"}, {"r", g.resolution()}, {"values", matrix(g.values)}};
                        },
                        [](const PowerLawGraphon& p) { return nlohmann::json{{"kind", "powerlaw"}, {"a", p.a}}; },
                    },
                    w.kind());
}

Graph sample_w_random(const Graphon& w, std::size_t n, double rho, const LatentStream& xs) {
  if (rho < 0.0) throw std::invalid_argument("sample_w_random: rho must be nonnegative");
  if (std::abs(w.norm(1.0) - 1.0) > 1e-9) {
    std::cerr << "warning: sampling from a graphon with ||W||_1 = " << w.norm(1.0) << "\n";
  }
  const std::vector<double> x = xs.first(n);
  const std::uint64_t coin_seed = splitmix64(xs.seed() ^ 0xC01Dull);
  std::vector<Edge> edges;
  if (rho == 0.0) return Graph::from_edges(n, edges);
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double prob = std::min(1.0, rho * w.value(x[i], x[j]));
      if (prob <= 0.0) continue;
      if (prob >= 1.0 || unit_interval(splitmix64(coin_seed ^ splitmix64(pair_key(i, j)))) < prob) {
        edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
      }
    }
  }
  return Graph::from_edges(n, edges);
}

double conditional_expected_edges(const Graphon& w, double rho, const LatentStream& xs,
                                  std::size_t n) {
  if (rho < 0.0) throw std::invalid_argument("conditional_expected_edges: rho must be nonnegative");
  if (rho == 0.0) return 0.0;
  const std::vector<double> x = xs.first(n);
  long double total = 0.0L;
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) total += std::min(1.0, rho * w.value(x[i], x[j]));
  }
  return static_cast<double>(total);
}

namespace {

double quad_norm(const BlockGraphon& w, const Eigen::VectorXd& mass) {
  const Eigen::MatrixXd sq = w.B.array().square().matrix();
  return mass.dot(sq * mass);
}

// <G, B1 G B2>
double cross_term(const BlockGraphon& w1, const BlockGraphon& w2, const Eigen::MatrixXd& G) {
  return (G.array() * (w1.B * G * w2.B).array()).sum();
}

// Vertex of the transportation polytope maximizing <C, S>, by successive
// shortest paths with Johnson potentials.
Eigen::MatrixXd best_transport(const Eigen::MatrixXd& C, const std::vector<double>& p,
                               const std::vector<double>& q) {
  const auto k1 = static_cast<std::size_t>(C.rows());
  const auto k2 = static_cast<std::size_t>(C.cols());
  const std::size_t nodes = k1 + k2;
  constexpr double eps = 1e-15;
  Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(C.rows(), C.cols());
  std::vector<double> supply = p;
  std::vector<double> demand = q;
  std::vector<double> pot(nodes, 0.0);
  for (std::size_t b = 0; b < k2; ++b) {
    double low = kInf;
    for (std::size_t a = 0; a < k1; ++a) low = std::min(low, -C(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
    pot[k1 + b] = low;
  }
  auto cost = [&](std::size_t a, std::size_t b) {
    return -C(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  };
  std::vector<double> dist(nodes);
  std::vector<std::ptrdiff_t> parent(nodes);
  std::vector<char> done(nodes);
  for (std::size_t round = 0; round < 4 * nodes * nodes + 16; ++round) {
    double left = 0.0;
    for (double s : supply) left += s;
    if (left <= 1e-14) break;
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t a = 0; a < k1; ++a) {
      if (supply[a] > eps) dist[a] = 0.0;
    }
    while (true) {
      std::size_t u = nodes;
      for (std::size_t v = 0; v < nodes; ++v) {
        if (!done[v] && dist[v] < kInf && (u == nodes || dist[v] < dist[u])) u = v;
      }
      if (u == nodes) break;
      done[u] = 1;
      if (u < k1) {
        for (std::size_t b = 0; b < k2; ++b) {
          const double nd = dist[u] + std::max(0.0, cost(u, b) + pot[u] - pot[k1 + b]);
          if (nd < dist[k1 + b]) {
            dist[k1 + b] = nd;
            parent[k1 + b] = static_cast<std::ptrdiff_t>(u);
          }
        }
      } else {
        const std::size_t b = u - k1;
        for (std::size_t a = 0; a < k1; ++a) {
          if (flow(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) <= eps) continue;
          const double nd = dist[u] + std::max(0.0, -cost(a, b) + pot[u] - pot[a]);
          if (nd < dist[a]) {
            dist[a] = nd;
            parent[a] = static_cast<std::ptrdiff_t>(u);
          }
        }
      }
    }
    std::size_t target = nodes;
    for (std::size_t b = 0; b < k2; ++b) {
      if (demand[b] > eps && dist[k1 + b] < kInf && (target == nodes || dist[k1 + b] < dist[target])) {
        target = k1 + b;
      }
    }
    if (target == nodes) break;
    for (std::size_t v = 0; v < nodes; ++v) pot[v] += std::min(dist[v], dist[target]);
    // Walk back to the source row and find the bottleneck.
    double push = demand[target - k1];
    std::size_t v = target;
    while (parent[v] >= 0) {
      const auto u = static_cast<std::size_t>(parent[v]);
      if (u >= k1) push = std::min(push, flow(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u - k1)));
      v = u;
    }
    push = std::min(push, supply[v]);
    supply[v] -= push;
    demand[target - k1] -= push;
    v = target;
    while (parent[v] >= 0) {
      const auto u = static_cast<std::size_t>(parent[v]);
      if (u < k1) {
        flow(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v - k1)) += push;
      } else {
        flow(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u - k1)) -= push;
      }
      v = u;
    }
  }
  return flow;
}

}  // namespace

double coupling_cost(const BlockGraphon& w1, const BlockGraphon& w2, const Eigen::MatrixXd& G) {
  const Eigen::VectorXd rows = G.rowwise().sum();
  const Eigen::VectorXd cols = G.colwise().sum().transpose();
  return quad_norm(w1, rows) + quad_norm(w2, cols) - 2.0 * cross_term(w1, w2, G);
}

double delta2_identity(const BlockGraphon& w1, const BlockGraphon& w2) {
  if (w1.p.size() != w2.p.size()) throw std::invalid_argument("delta2_identity: block counts differ");
  for (std::size_t a = 0; a < w1.p.size(); ++a) {
    if (std::abs(w1.p[a] - w2.p[a]) > 1e-12) throw std::invalid_argument("delta2_identity: weights differ");
  }
  double sq = 0.0;
  for (std::size_t a = 0; a < w1.p.size(); ++a) {
    for (std::size_t c = 0; c < w1.p.size(); ++c) {
      const double d = w1.B(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) -
                       w2.B(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
      sq += w1.p[a] * w1.p[c] * d * d;
    }
  }
  return std::sqrt(sq);
}

Delta2Bound delta2_upper(const BlockGraphon& w1, const BlockGraphon& w2, int effort) {
  w1.validate();
  w2.validate();
  const auto k1 = static_cast<Eigen::Index>(w1.p.size());
  const auto k2 = static_cast<Eigen::Index>(w2.p.size());
  const Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(w1.p.data(), k1);
  const Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(w2.p.data(), k2);
  const double base = quad_norm(w1, p) + quad_norm(w2, q);
  auto distance = [&](const Eigen::MatrixXd& G) {
    return std::sqrt(std::max(0.0, base - 2.0 * cross_term(w1, w2, G)));
  };

  Delta2Bound out;
  const Eigen::MatrixXd product = p * q.transpose();
  out.product = distance(product);
  out.value = out.product;
  std::vector<Eigen::MatrixXd> starts{product};

  if (k1 == k2 && k1 <= 8) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(k1));
    std::iota(perm.begin(), perm.end(), 0);
    Eigen::MatrixXd best_perm;
    do {
      bool matchable = true;
      for (Eigen::Index a = 0; a < k1 && matchable; ++a) {
        matchable = std::abs(p(a) - q(perm[static_cast<std::size_t>(a)])) <= 1e-12;
      }
      if (!matchable) continue;
      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(k1, k2);
      for (Eigen::Index a = 0; a < k1; ++a) G(a, perm[static_cast<std::size_t>(a)]) = p(a);
      const double d = distance(G);
      if (out.permutation < 0 || d < out.permutation) {
        out.permutation = d;
        best_perm = G;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (out.permutation >= 0) {
      out.value = std::min(out.value, out.permutation);
      starts.push_back(best_perm);
    }
  }

  if (effort > 0) {
    std::uint64_t state = 0x5EEDull;
    for (int s = 0; s < 2 * effort; ++s) {
      Eigen::MatrixXd C(k1, k2);
      for (Eigen::Index a = 0; a < k1; ++a) {
        for (Eigen::Index b = 0; b < k2; ++b) C(a, b) = unit_interval(state = splitmix64(state));
      }
      starts.push_back(best_transport(C, w1.p, w2.p));
    }
    const int iterations = 100 * effort;
    double best = kInf;
    for (Eigen::MatrixXd G : starts) {
      double f = cross_term(w1, w2, G);
      for (int it = 0; it < iterations; ++it) {
        const Eigen::MatrixXd grad = w1.B * G * w2.B;
        const Eigen::MatrixXd S = best_transport(grad, w1.p, w2.p);
        const Eigen::MatrixXd D = S - G;
        const double slope = 2.0 * (D.array() * grad.array()).sum();
        if (slope <= 1e-14) break;
        const double curve = cross_term(w1, w2, D);
        double t = 1.0;
        if (curve < 0.0) t = std::clamp(-slope / (2.0 * curve), 0.0, 1.0);
        const double next = f + t * slope + t * t * curve;
        if (next <= f + 1e-16) break;
        G += t * D;
        f = cross_term(w1, w2, G);
      }
      best = std::min(best, distance(G));
    }
    out.descent = best;
    out.value = std::min(out.value, best);
  }
  return out;
}

}  // namespace sgc
