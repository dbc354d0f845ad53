#include "sgc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sgc {

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges) {
  Graph g(n);
  std::vector<std::size_t> deg(n, 0);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    if (u == v) {
      throw std::invalid_argument("self loop at vertex " + std::to_string(u));
    }
    ++deg[u];
    ++deg[v];
  }
  for (std::size_t v = 0; v < n; ++v) {
    g.offsets_[v + 1] = g.offsets_[v] + deg[v];
  }
  g.targets_.resize(g.offsets_[n]);
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto [u, v] : edges) {
    g.targets_[fill[u]++] = v;
    g.targets_[fill[v]++] = u;
  }
  for (std::size_t v = 0; v < n; ++v) {
    auto first = g.targets_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]);
    auto last = g.targets_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]);
    std::sort(first, last);
    if (std::adjacent_find(first, last) != last) {
      throw std::invalid_argument("duplicate edge at vertex " + std::to_string(v));
    }
  }
  return g;
}

std::size_t Graph::max_degree() const noexcept {
  std::size_t best = 0;
  for (std::size_t v = 0; v < num_vertices(); ++v) {
    best = std::max(best, degree(static_cast<Vertex>(v)));
  }
  return best;
}

bool Graph::has_edge(Vertex u, Vertex v) const noexcept {
  if (u >= num_vertices() || v >= num_vertices()) return false;
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (std::size_t u = 0; u < num_vertices(); ++u) {
    for (Vertex v : neighbors(static_cast<Vertex>(u))) {
      if (u < v) out.emplace_back(static_cast<Vertex>(u), v);
    }
  }
  return out;
}

Graph Graph::permuted(std::span<const Vertex> perm) const {
  if (perm.size() != num_vertices()) {
    throw std::invalid_argument("permutation size mismatch");
  }
  auto es = edges();
  for (auto& [u, v] : es) {
    u = perm[u];
    v = perm[v];
  }
  return from_edges(num_vertices(), es);
}

double density(const Graph& g) {
  const double n = static_cast<double>(g.num_vertices());
  if (n == 0) return 0.0;
  return 2.0 * static_cast<double>(g.num_edges()) / (n * n);
}

double matrix_lp_norm(const Graph& g, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("matrix_lp_norm requires p >= 1");
  // Entries are 0/1, so |A_ij|^p = A_ij and the sum is 2m.
  const double rho = density(g);
  if (rho == 0.0) return 0.0;
  return std::pow(rho, 1.0 / p);
}

std::map<std::size_t, std::size_t> degree_histogram(const Graph& g) {
  std::map<std::size_t, std::size_t> hist;
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    ++hist[g.degree(static_cast<Vertex>(v))];
  }
  return hist;
}

SplitResult split(const Graph& g, double delta) {
  const std::size_t n = g.num_vertices();
  std::vector<char> high(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    high[v] = static_cast<double>(g.degree(static_cast<Vertex>(v))) > delta;
  }
  std::vector<Edge> light;
  std::vector<Edge> heavy;
  std::vector<char> in_r(n, 0);
  for (auto [u, v] : g.edges()) {
    if (high[u] || high[v]) {
      heavy.emplace_back(u, v);
      in_r[u] = in_r[v] = 1;
    } else {
      light.emplace_back(u, v);
    }
  }
  SplitResult out;
  out.delta = delta;
  out.light = Graph::from_edges(n, light);
  out.heavy = Graph::from_edges(n, heavy);
  for (std::size_t v = 0; v < n; ++v) {
    // High vertices are in R even when isolated in heavy; neighbors of high
    // vertices are caught through the heavy edges above.
    if (in_r[v] || high[v]) out.heavy_set.push_back(static_cast<Vertex>(v));
  }
  out.eta = n == 0 ? 0.0 : static_cast<double>(out.heavy_set.size()) / static_cast<double>(n);
  return out;
}

Graph edge_union(const Graph& a, const Graph& b) {
  if (a.num_vertices() != b.num_vertices()) {
    throw std::invalid_argument("edge_union: vertex counts differ");
  }
  auto es = a.edges();
  auto eb = b.edges();
  es.insert(es.end(), eb.begin(), eb.end());
  return Graph::from_edges(a.num_vertices(), es);
}

Graph read_edge_list(std::istream& in) {
  std::string line;
  auto next_line = [&](const char* what) {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return;
    }
    throw std::runtime_error(std::string("edge list: unexpected end of input reading ") + what);
  };
  next_line("header");
  std::istringstream header(line);
  long long n = -1;
  long long m = -1;
  if (!(header >> n >> m) || n < 0 || m < 0) {
    throw std::runtime_error("edge list: malformed header '" + line + "'");
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    next_line("edge");
    std::istringstream row(line);
    long long u = -1;
    long long v = -1;
    if (!(row >> u >> v) || u < 0 || v < 0 || u >= n || v >= n) {
      throw std::runtime_error("edge list: malformed edge line '" + line + "'");
    }
    edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
  }
  try {
    return Graph::from_edges(static_cast<std::size_t>(n), edges);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("edge list: ") + e.what());
  }
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

}  // namespace sgc
