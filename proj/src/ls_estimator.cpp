#include "sgc/ls_estimator.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sgc/errors.hpp"

namespace sgc {

namespace {

using CountMatrix = Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>;

std::size_t floor_classes(double beta) {
  if (!(beta >= 1.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be a finite value >= 1");
  return static_cast<std::size_t>(std::floor(beta));
}

// Squared error summed over ordered cells, for the block-average fit.
double block_sse(const std::vector<std::size_t>& sizes, const CountMatrix& edges) {
  double sse = 0.0;
  const auto k = static_cast<Eigen::Index>(sizes.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      const double ni = static_cast<double>(sizes[static_cast<std::size_t>(i)]);
      const double nj = static_cast<double>(sizes[static_cast<std::size_t>(j)]);
      const double cells = i == j ? ni * ni : 2.0 * ni * nj;
      if (cells == 0.0) continue;
      const double ones = 2.0 * static_cast<double>(edges(i, j));
      sse += ones - ones * ones / cells;
    }
  }
  return sse;
}

std::vector<std::uint32_t> first_occurrence(const std::vector<std::uint32_t>& labels, std::size_t k) {
  std::vector<std::uint32_t> remap(k, std::numeric_limits<std::uint32_t>::max());
  std::uint32_t next = 0;
  std::vector<std::uint32_t> out(labels.size());
  for (std::size_t v = 0; v < labels.size(); ++v) {
    auto& r = remap[labels[v]];
    if (r == std::numeric_limits<std::uint32_t>::max()) r = next++;
    out[v] = r;
  }
  return out;
}

LsFit finish(const Graph& g, double beta, std::size_t k, std::vector<std::uint32_t> labels) {
  LsFit fit;
  fit.beta = beta;
  fit.classes = k;
  fit.assignment = first_occurrence(labels, k);
  fit.blocks = block_average(g, fit.assignment, k);
  fit.objective = ls_objective(g, fit.blocks);
  return fit;
}

bool sizes_admissible(const std::vector<std::size_t>& sizes, std::size_t min_size) {
  return std::all_of(sizes.begin(), sizes.end(),
                     [&](std::size_t s) { return s == 0 || s >= min_size; });
}

// Top-d eigenpairs by magnitude through subspace iteration.
Eigen::MatrixXd spectral_embedding(const Graph& g, std::size_t d, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * g.num_edges());
  for (auto [u, v] : g.edges()) {
    triplets.emplace_back(u, v, 1.0);
    triplets.emplace_back(v, u, 1.0);
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(triplets.begin(), triplets.end());

  const auto width = static_cast<Eigen::Index>(std::min<std::size_t>(d + 2, g.num_vertices()));
  Eigen::MatrixXd Q(n, width);
  std::uint64_t state = seed ^ 0xA5A5A5A5ull;
  for (Eigen::Index i = 0; i < Q.size(); ++i) Q.data()[i] = unit_interval(state = splitmix64(state)) - 0.5;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Q);
  Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, width);
  Eigen::VectorXd previous = Eigen::VectorXd::Zero(width);
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
  for (int it = 0; it < 300; ++it) {
    Eigen::MatrixXd Z = A * Q;
    qr.compute(Z);
    Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, width);
    const Eigen::MatrixXd T = Q.transpose() * (A * Q);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (T + T.transpose()));
    values = eig.eigenvalues();
    vectors = eig.eigenvectors();
    if (it > 5 && (values - previous).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + values.cwiseAbs().maxCoeff())) break;
    previous = values;
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(width));
  for (Eigen::Index i = 0; i < width; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(values(a)) > std::abs(values(b));
  });
  const auto dims = static_cast<Eigen::Index>(std::min<std::size_t>(d, static_cast<std::size_t>(width)));
  Eigen::MatrixXd embed(n, dims);
  for (Eigen::Index c = 0; c < dims; ++c) {
    const Eigen::Index src = order[static_cast<std::size_t>(c)];
    Eigen::VectorXd col = Q * vectors.col(src) * std::abs(values(src));
    // Sign convention: the largest-magnitude entry is positive.
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col(arg) < 0) col = -col;
    embed.col(c) = col;
  }
  return embed;
}

std::vector<std::uint32_t> kmeans(const Eigen::MatrixXd& X, std::size_t k, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(X.rows());
  std::vector<std::uint32_t> label(n, 0);
  if (k <= 1 || n == 0) return label;
  std::uint64_t state = splitmix64(seed + 0x6B6D65616E73ull);
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), X.cols());
  // k-means++ seeding.
  std::size_t first = static_cast<std::size_t>(splitmix64(state) % n);
  state = splitmix64(state);
  centers.row(0) = X.row(static_cast<Eigen::Index>(first));
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      dist[v] = std::min(dist[v], (X.row(static_cast<Eigen::Index>(v)) - centers.row(static_cast<Eigen::Index>(c - 1))).squaredNorm());
      total += dist[v];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double target = unit_interval(state = splitmix64(state)) * total;
      for (std::size_t v = 0; v < n; ++v) {
        target -= dist[v];
        if (target <= 0.0) {
          pick = v;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>((state = splitmix64(state)) % n);
    }
    centers.row(static_cast<Eigen::Index>(c)) = X.row(static_cast<Eigen::Index>(pick));
  }
  for (int it = 0; it < 100; ++it) {
    bool changed = false;
    for (std::size_t v = 0; v < n; ++v) {
      std::uint32_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = (X.row(static_cast<Eigen::Index>(v)) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<std::uint32_t>(c);
        }
      }
      changed = changed || (it == 0) || best != label[v];
      label[v] = best;
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), X.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t v = 0; v < n; ++v) {
      sums.row(label[v]) += X.row(static_cast<Eigen::Index>(v));
      ++counts[label[v]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) centers.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
    }
  }
  return label;
}

// Dissolves undersized classes into the class with the nearest center.
void repair_sizes(const Eigen::MatrixXd& X, std::vector<std::uint32_t>& label, std::size_t k,
                  std::size_t min_size) {
  const auto n = label.size();
  while (true) {
    std::vector<std::size_t> sizes(k, 0);
    for (auto c : label) ++sizes[c];
    std::size_t worst = k;
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0 && sizes[c] < min_size && (worst == k || sizes[c] < sizes[worst])) worst = c;
    }
    if (worst == k) return;
    Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), X.cols());
    for (std::size_t v = 0; v < n; ++v) centers.row(label[v]) += X.row(static_cast<Eigen::Index>(v));
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) centers.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(sizes[c]);
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (label[v] != worst) continue;
      std::size_t best = k;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        if (c == worst || sizes[c] == 0) continue;
        const double d = (X.row(static_cast<Eigen::Index>(v)) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      label[v] = static_cast<std::uint32_t>(best);
    }
  }
}

void relocate(const Graph& g, std::vector<std::uint32_t>& label, std::size_t k, std::size_t min_size) {
  const std::size_t n = label.size();
  BlockCounts counts = block_average(g, label, k);
  std::vector<std::size_t> sizes = counts.sizes;
  CountMatrix edges = counts.edges;
  double current = block_sse(sizes, edges);
  std::vector<std::uint64_t> toward(k);
  for (int pass = 0; pass < 100; ++pass) {
    bool improved = false;
    for (std::size_t v = 0; v < n; ++v) {
      const std::uint32_t a = label[v];
      if (sizes[a] - 1 != 0 && sizes[a] - 1 < min_size) continue;
      std::fill(toward.begin(), toward.end(), 0);
      for (Vertex w : g.neighbors(static_cast<Vertex>(v))) ++toward[label[w]];
      CountMatrix removed = edges;
      for (std::size_t c = 0; c < k; ++c) {
        const auto ia = static_cast<Eigen::Index>(a);
        const auto ic = static_cast<Eigen::Index>(c);
        removed(ia, ic) -= toward[c];
        if (c != a) removed(ic, ia) -= toward[c];
      }
      std::size_t best = k;
      double best_sse = current;
      CountMatrix best_edges;
      for (std::size_t b = 0; b < k; ++b) {
        if (b == a || sizes[b] + 1 < min_size) continue;
        CountMatrix moved = removed;
        for (std::size_t c = 0; c < k; ++c) {
          const auto ib = static_cast<Eigen::Index>(b);
          const auto ic = static_cast<Eigen::Index>(c);
          moved(ib, ic) += toward[c];
          if (c != b) moved(ic, ib) += toward[c];
        }
        --sizes[a];
        ++sizes[b];
        const double sse = block_sse(sizes, moved);
        ++sizes[a];
        --sizes[b];
        if (sse < best_sse - 1e-9 * (1.0 + std::abs(best_sse))) {
          best_sse = sse;
          best = b;
          best_edges = std::move(moved);
        }
      }
      if (best == k) continue;
      --sizes[a];
      ++sizes[best];
      label[v] = static_cast<std::uint32_t>(best);
      edges = std::move(best_edges);
      current = best_sse;
      improved = true;
    }
    if (!improved) break;
  }
}

}  // namespace

BlockCounts block_average(const Graph& g, const std::vector<std::uint32_t>& assignment,
                          std::size_t classes) {
  if (assignment.size() != g.num_vertices()) throw std::invalid_argument("block_average: assignment must cover every vertex");
  BlockCounts out;
  out.sizes.assign(classes, 0);
  for (auto c : assignment) {
    if (c >= classes) throw std::invalid_argument("block_average: label out of range");
    ++out.sizes[c];
  }
  const auto k = static_cast<Eigen::Index>(classes);
  out.edges = CountMatrix::Zero(k, k);
  for (auto [u, v] : g.edges()) {
    const auto a = static_cast<Eigen::Index>(assignment[u]);
    const auto b = static_cast<Eigen::Index>(assignment[v]);
    ++out.edges(a, b);
    if (a != b) ++out.edges(b, a);
  }
  out.average = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double ni = static_cast<double>(out.sizes[static_cast<std::size_t>(i)]);
      const double nj = static_cast<double>(out.sizes[static_cast<std::size_t>(j)]);
      if (ni == 0.0 || nj == 0.0) continue;
      const double m = static_cast<double>(out.edges(i, j));
      out.average(i, j) = i == j ? 2.0 * m / (ni * ni) : m / (ni * nj);
    }
  }
  return out;
}

std::size_t min_class_size(std::size_t n, double beta) {
  floor_classes(beta);
  return static_cast<std::size_t>(std::ceil(static_cast<double>(n) / beta));
}

double ls_objective(const Graph& g, const BlockCounts& blocks) {
  const double n = static_cast<double>(g.num_vertices());
  if (n == 0.0) return 0.0;
  return std::sqrt(std::max(0.0, block_sse(blocks.sizes, blocks.edges)) / (n * n));
}

LsFit ls_exact(const Graph& g, double beta) {
  const std::size_t k = floor_classes(beta);
  const std::size_t n = g.num_vertices();
  if (n > 12 || k > 3) throw CapacityError("ls_exact is limited to n <= 12 and floor(beta) <= 3");
  const std::size_t min_size = min_class_size(n, beta);
  if (n == 0) return finish(g, beta, k, {});
  const auto edges = g.edges();
  // Restricted growth strings: each assignment in first-occurrence form.
  std::vector<std::uint32_t> label(n, 0);
  std::vector<std::uint32_t> prefix_max(n, 0);
  std::vector<std::uint32_t> best;
  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> sizes(k);
  CountMatrix counts(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  auto advance = [&]() {
    for (std::size_t pos = n; pos-- > 1;) {
      const auto cap = std::min<std::uint32_t>(prefix_max[pos - 1] + 1, static_cast<std::uint32_t>(k - 1));
      if (label[pos] < cap) {
        ++label[pos];
        prefix_max[pos] = std::max(prefix_max[pos - 1], label[pos]);
        for (std::size_t j = pos + 1; j < n; ++j) {
          label[j] = 0;
          prefix_max[j] = prefix_max[pos];
        }
        return true;
      }
    }
    return false;
  };
  do {
    std::fill(sizes.begin(), sizes.end(), 0);
    for (auto c : label) ++sizes[c];
    if (!sizes_admissible(sizes, min_size)) continue;
    counts.setZero();
    for (auto [u, v] : edges) ++counts(std::min(label[u], label[v]), std::max(label[u], label[v]));
    const double sse = block_sse(sizes, counts);
    if (best.empty() || sse < best_sse - 1e-9 * (1.0 + best_sse)) {
      best_sse = sse;
      best = label;
    }
  } while (advance());
  return finish(g, beta, k, best);
}

LsFit ls_heuristic(const Graph& g, double beta, std::uint64_t seed) {
  const std::size_t k = floor_classes(beta);
  const std::size_t n = g.num_vertices();
  std::vector<std::uint32_t> label(n, 0);
  if (k == 1 || n == 0) return finish(g, beta, k, label);
  const std::size_t min_size = min_class_size(n, beta);
  const Eigen::MatrixXd X = spectral_embedding(g, k, seed);
  label = kmeans(X, k, seed);
  repair_sizes(X, label, k, min_size);
  relocate(g, label, k, min_size);
  return finish(g, beta, k, label);
}

LsFit ls_fit(const Graph& g, double beta, std::uint64_t seed) {
  if (g.num_vertices() <= 12 && floor_classes(beta) <= 3) return ls_exact(g, beta);
  return ls_heuristic(g, beta, seed);
}

FittedGraphons fitted_graphons(const LsFit& fit, const SplitResult& split) {
  const std::size_t n = fit.assignment.size();
  if (n == 0) throw std::invalid_argument("fitted_graphons: empty graph");
  if (split.heavy.num_vertices() != n) throw std::invalid_argument("fitted_graphons: split and fit sizes differ");
  FittedGraphons out;
  out.full.p.resize(fit.classes);
  for (std::size_t i = 0; i < fit.classes; ++i) {
    out.full.p[i] = static_cast<double>(fit.blocks.sizes[i]) / static_cast<double>(n);
  }
  out.full.B = fit.blocks.average;
  const BlockCounts heavy = block_average(split.heavy, fit.assignment, fit.classes);
  out.heavy.p = out.full.p;
  out.heavy.B = heavy.average;
  out.heavy_edges = heavy.edges;
  return out;
}

}  // namespace sgc
