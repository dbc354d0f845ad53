#include "sgc/rooted.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "sgc/errors.hpp"

namespace sgc {

namespace {

// Search nodes allowed when canonicalizing a single non-tree ball.
constexpr std::size_t kCanonSearchBudget = 2'000'000;

using Adj = std::vector<std::vector<std::uint32_t>>;

// ----------------------------------------------------------------- trees

// AHU-style canonical BFS labeling of a rooted tree.
std::vector<std::uint32_t> tree_labeling(const Adj& adj) {
  const std::size_t n = adj.size();
  std::vector<std::uint32_t> parent(n, 0);
  std::vector<std::uint32_t> depth(n, 0);
  std::vector<std::uint32_t> order;
  order.reserve(n);
  order.push_back(0);
  std::vector<char> seen(n, 0);
  seen[0] = 1;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const std::uint32_t v = order[head];
    for (std::uint32_t w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        parent[w] = v;
        depth[w] = depth[v] + 1;
        order.push_back(w);
      }
    }
  }
  std::vector<std::vector<std::uint32_t>> children(n);
  for (std::size_t i = 1; i < n; ++i) children[parent[order[i]]].push_back(order[i]);

  // Level by level from the deepest, rank child-code tuples among the level.
  std::vector<std::uint32_t> code(n, 0);
  const std::uint32_t max_depth = depth[order.back()];
  std::vector<std::vector<std::uint32_t>> levels(max_depth + 1);
  for (std::uint32_t v : order) levels[depth[v]].push_back(v);
  for (std::uint32_t d = max_depth + 1; d-- > 0;) {
    std::vector<std::pair<std::vector<std::uint32_t>, std::uint32_t>> keyed;
    keyed.reserve(levels[d].size());
    for (std::uint32_t v : levels[d]) {
      std::vector<std::uint32_t> key;
      key.reserve(children[v].size());
      for (std::uint32_t c : children[v]) key.push_back(code[c]);
      std::sort(key.begin(), key.end());
      keyed.emplace_back(std::move(key), v);
    }
    std::sort(keyed.begin(), keyed.end());
    std::uint32_t rank = 0;
    for (std::size_t i = 0; i < keyed.size(); ++i) {
      if (i > 0 && keyed[i].first != keyed[i - 1].first) ++rank;
      code[keyed[i].second] = rank;
    }
  }
  for (auto& ch : children) {
    std::stable_sort(ch.begin(), ch.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return code[a] < code[b]; });
  }
  std::vector<std::uint32_t> label(n, 0);
  std::vector<std::uint32_t> queue{0};
  std::uint32_t next = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::uint32_t v = queue[head];
    label[v] = next++;
    for (std::uint32_t c : children[v]) queue.push_back(c);
  }
  return label;
}

// ------------------------------------------------------- general search

using Edges = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

// Refines a coloring to the coarsest equitable one. Colors are renumbered by
// rank of (old color, sorted neighbor colors), which is labeling-invariant.
void refine(const Adj& adj, std::vector<std::uint32_t>& color) {
  const std::size_t n = adj.size();
  std::size_t classes = 0;
  {
    std::vector<std::uint32_t> c = color;
    std::sort(c.begin(), c.end());
    classes = static_cast<std::size_t>(std::unique(c.begin(), c.end()) - c.begin());
  }
  while (true) {
    std::vector<std::pair<std::vector<std::uint32_t>, std::uint32_t>> sig(n);
    for (std::uint32_t v = 0; v < n; ++v) {
      auto& s = sig[v].first;
      s.reserve(adj[v].size() + 1);
      s.push_back(color[v]);
      std::vector<std::uint32_t> nb;
      nb.reserve(adj[v].size());
      for (std::uint32_t w : adj[v]) nb.push_back(color[w]);
      std::sort(nb.begin(), nb.end());
      s.insert(s.end(), nb.begin(), nb.end());
      sig[v].second = v;
    }
    std::sort(sig.begin(), sig.end());
    std::uint32_t rank = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0 && sig[i].first != sig[i - 1].first) ++rank;
      color[sig[i].second] = rank;
    }
    const std::size_t now = static_cast<std::size_t>(rank) + 1;
    if (now == classes) return;
    classes = now;
  }
}

Edges relabeled_edges(const Adj& adj, const std::vector<std::uint32_t>& label) {
  Edges out;
  for (std::uint32_t v = 0; v < adj.size(); ++v) {
    for (std::uint32_t w : adj[v]) {
      if (v < w) {
        auto a = label[v];
        auto b = label[w];
        if (a > b) std::swap(a, b);
        out.emplace_back(a, b);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Search {
  const Adj& adj;
  std::size_t nodes = 0;
  bool have_best = false;
  Edges best_cert;
  std::vector<std::uint32_t> best_label;

  void run(std::vector<std::uint32_t> color) {
    if (++nodes > kCanonSearchBudget) {
      throw CapacityError("canonical labeling search exceeded its budget");
    }
    refine(adj, color);
    const std::size_t n = adj.size();
    // First non-singleton cell (smallest color with two or more members).
    std::vector<std::uint32_t> count(n, 0);
    for (auto c : color) ++count[c];
    std::uint32_t target = std::numeric_limits<std::uint32_t>::max();
    for (std::uint32_t c = 0; c < n; ++c) {
      if (count[c] > 1) {
        target = c;
        break;
      }
    }
    if (target == std::numeric_limits<std::uint32_t>::max()) {
      Edges cert = relabeled_edges(adj, color);
      if (!have_best || cert < best_cert) {
        best_cert = std::move(cert);
        best_label = color;
        have_best = true;
      }
      return;
    }
    std::vector<std::uint32_t> cell;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (color[v] == target) cell.push_back(v);
    }
    // Vertices with equal open or closed neighborhoods are swapped by an
    // automorphism fixing everything else: branch on one of each.
    std::vector<char> skip(cell.size(), 0);
    for (std::size_t i = 0; i < cell.size(); ++i) {
      if (skip[i]) continue;
      for (std::size_t j = i + 1; j < cell.size(); ++j) {
        if (skip[j]) continue;
        if (twins(cell[i], cell[j])) skip[j] = 1;
      }
    }
    for (std::size_t i = 0; i < cell.size(); ++i) {
      if (skip[i]) continue;
      std::vector<std::uint32_t> next(n);
      for (std::uint32_t v = 0; v < n; ++v) {
        next[v] = 2 * color[v] + (v == cell[i] ? 0u : 1u);
      }
      run(std::move(next));
    }
  }

  bool twins(std::uint32_t a, std::uint32_t b) const {
    std::vector<std::uint32_t> na;
    std::vector<std::uint32_t> nb;
    for (auto w : adj[a]) {
      if (w != b) na.push_back(w);
    }
    for (auto w : adj[b]) {
      if (w != a) nb.push_back(w);
    }
    std::sort(na.begin(), na.end());
    std::sort(nb.begin(), nb.end());
    return na == nb;
  }
};

std::string encode_canon(const Adj& adj, const std::vector<std::uint32_t>& label) {
  const std::size_t n = adj.size();
  std::string out(4, '\0');
  for (int b = 0; b < 4; ++b) {
    out[static_cast<std::size_t>(b)] = static_cast<char>((n >> (24 - 8 * b)) & 0xFFu);
  }
  const std::size_t pairs = n * (n - 1) / 2;
  std::string bits((pairs + 7) / 8, '\0');
  auto pair_index = [n](std::size_t i, std::size_t j) {
    // row-major upper triangle, i < j
    return i * (2 * n - i - 1) / 2 + (j - i - 1);
  };
  for (std::uint32_t v = 0; v < n; ++v) {
    for (std::uint32_t w : adj[v]) {
      std::size_t a = label[v];
      std::size_t b = label[w];
      if (a >= b) continue;
      const std::size_t idx = pair_index(a, b);
      bits[idx / 8] = static_cast<char>(static_cast<unsigned char>(bits[idx / 8]) |
                                        (0x80u >> (idx % 8)));
    }
  }
  return out + bits;
}

}  // namespace

std::size_t RootedGraph::num_edges() const noexcept {
  std::size_t deg = 0;
  for (const auto& nb : adj) deg += nb.size();
  return deg / 2;
}

std::size_t RootedGraph::eccentricity() const {
  if (adj.empty()) return 0;
  std::vector<std::size_t> dist(adj.size(), std::numeric_limits<std::size_t>::max());
  std::deque<std::uint32_t> q{0};
  dist[0] = 0;
  std::size_t best = 0;
  while (!q.empty()) {
    const auto v = q.front();
    q.pop_front();
    best = std::max(best, dist[v]);
    for (auto w : adj[v]) {
      if (dist[w] == std::numeric_limits<std::size_t>::max()) {
        dist[w] = dist[v] + 1;
        q.push_back(w);
      }
    }
  }
  return best;
}

std::size_t RootedClass::vertex_count() const {
  if (canon.size() < 4) return 0;
  std::size_t n = 0;
  for (int b = 0; b < 4; ++b) n = (n << 8) | static_cast<unsigned char>(canon[static_cast<std::size_t>(b)]);
  return n;
}

std::size_t RootedClass::root_degree() const {
  const std::size_t n = vertex_count();
  std::size_t deg = 0;
  for (std::size_t idx = 0; idx + 1 < n; ++idx) {
    const auto byte = static_cast<unsigned char>(canon[4 + idx / 8]);
    deg += (byte >> (7 - idx % 8)) & 1u;
  }
  return deg;
}

std::size_t RootedClassHash::operator()(const RootedClass& c) const noexcept {
  return std::hash<std::string>{}(c.canon) ^ (static_cast<std::size_t>(c.depth) * 0x9e3779b97f4a7c15ULL);
}

RootedGraph ball(const Graph& g, Vertex root, std::size_t h) {
  if (root >= g.num_vertices()) throw std::invalid_argument("ball: root out of range");
  std::vector<Vertex> order{root};
  std::map<Vertex, std::uint32_t> index{{root, 0}};
  std::vector<std::size_t> dist{0};
  for (std::size_t head = 0; head < order.size(); ++head) {
    if (dist[head] == h) continue;
    for (Vertex w : g.neighbors(order[head])) {
      if (index.emplace(w, static_cast<std::uint32_t>(order.size())).second) {
        order.push_back(w);
        dist.push_back(dist[head] + 1);
      }
    }
  }
  RootedGraph rg;
  rg.adj.resize(order.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) {
    for (Vertex w : g.neighbors(order[i])) {
      auto it = index.find(w);
      if (it != index.end()) rg.adj[i].push_back(it->second);
    }
    std::sort(rg.adj[i].begin(), rg.adj[i].end());
  }
  return rg;
}

RootedGraph truncate(const RootedGraph& rg, std::size_t h) {
  const std::size_t n = rg.size();
  if (n == 0) return rg;
  std::vector<std::uint32_t> order{0};
  std::vector<std::int64_t> index(n, -1);
  std::vector<std::size_t> dist(n, 0);
  index[0] = 0;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const auto v = order[head];
    if (dist[v] == h) continue;
    for (auto w : rg.adj[v]) {
      if (index[w] < 0) {
        index[w] = static_cast<std::int64_t>(order.size());
        dist[w] = dist[v] + 1;
        order.push_back(w);
      }
    }
  }
  RootedGraph out;
  out.adj.resize(order.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) {
    for (auto w : rg.adj[order[i]]) {
      if (index[w] >= 0) out.adj[i].push_back(static_cast<std::uint32_t>(index[w]));
    }
    std::sort(out.adj[i].begin(), out.adj[i].end());
  }
  return out;
}

std::vector<std::uint32_t> canonical_labeling(const RootedGraph& rg) {
  const std::size_t n = rg.size();
  if (n == 0) return {};
  if (rg.num_edges() + 1 == n) return tree_labeling(rg.adj);
  Search search{rg.adj, 0, false, {}, {}};
  std::vector<std::uint32_t> color(n, 1);
  color[0] = 0;
  search.run(std::move(color));
  return search.best_label;
}

RootedClass canonical_class(const RootedGraph& rg, std::uint32_t depth) {
  if (rg.size() == 0) throw std::invalid_argument("canonical_class: empty rooted graph");
  return {depth, encode_canon(rg.adj, canonical_labeling(rg))};
}

RootedGraph graph_of_class(const RootedClass& cls) {
  const std::size_t n = cls.vertex_count();
  RootedGraph rg;
  rg.adj.resize(n);
  std::size_t idx = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j, ++idx) {
      const auto byte = static_cast<unsigned char>(cls.canon[4 + idx / 8]);
      if ((byte >> (7 - idx % 8)) & 1u) {
        rg.adj[i].push_back(j);
        rg.adj[j].push_back(i);
      }
    }
  }
  for (auto& nb : rg.adj) std::sort(nb.begin(), nb.end());
  return rg;
}

RootedClass neighborhood_class(const Graph& g, Vertex root, std::size_t h) {
  if (root >= g.num_vertices()) {
    throw std::invalid_argument("neighborhood_class: root out of range");
  }
  return canonical_class(ball(g, root, h), static_cast<std::uint32_t>(h));
}

double rooted_distance(const RootedGraph& a, const RootedGraph& b) {
  const std::size_t top = std::max(a.eccentricity(), b.eccentricity());
  for (std::size_t h = 1; h <= top; ++h) {
    const auto ca = canonical_class(truncate(a, h), static_cast<std::uint32_t>(h));
    const auto cb = canonical_class(truncate(b, h), static_cast<std::uint32_t>(h));
    if (ca != cb) return 1.0 / static_cast<double>(h);
  }
  return 0.0;
}

void LocalDist::validate() const {
  mpq_class total = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].cls.depth != depth) throw std::invalid_argument("LocalDist: mixed depths");
    if (sgn(atoms[i].weight) <= 0) throw std::invalid_argument("LocalDist: non-positive weight");
    if (i > 0 && !(atoms[i - 1].cls < atoms[i].cls)) {
      throw std::invalid_argument("LocalDist: atoms not sorted and distinct");
    }
    total += atoms[i].weight;
  }
  if (total != 1) throw std::invalid_argument("LocalDist: weights do not sum to one");
}

LocalDist empirical_local_dist(const Graph& g, std::size_t h) {
  const std::size_t n = g.num_vertices();
  if (n == 0) throw std::invalid_argument("empirical_local_dist: empty graph");
  std::map<RootedClass, std::pair<std::size_t, RootedGraph>> counts;
  for (Vertex v = 0; v < n; ++v) {
    RootedGraph rg = ball(g, v, h);
    RootedClass cls = canonical_class(rg, static_cast<std::uint32_t>(h));
    auto [it, fresh] = counts.try_emplace(std::move(cls), 0, RootedGraph{});
    if (fresh) it->second.second = std::move(rg);
    ++it->second.first;
  }
  LocalDist d;
  d.depth = static_cast<std::uint32_t>(h);
  for (auto& [cls, entry] : counts) {
    mpq_class w(static_cast<unsigned long>(entry.first), static_cast<unsigned long>(n));
    w.canonicalize();
    d.atoms.push_back({cls, std::move(entry.second), w});
  }
  return d;
}

LocalDist make_local_dist(std::uint32_t depth,
                          const std::vector<std::pair<RootedGraph, mpq_class>>& atoms) {
  std::map<RootedClass, std::pair<mpq_class, RootedGraph>> merged;
  for (const auto& [rep, w] : atoms) {
    RootedGraph t = truncate(rep, depth);
    RootedClass cls = canonical_class(t, depth);
    auto [it, fresh] = merged.try_emplace(std::move(cls), mpq_class(0), RootedGraph{});
    if (fresh) it->second.second = std::move(t);
    it->second.first += w;
  }
  LocalDist d;
  d.depth = depth;
  for (auto& [cls, entry] : merged) {
    if (sgn(entry.first) > 0) d.atoms.push_back({cls, std::move(entry.second), entry.first});
  }
  d.validate();
  return d;
}

mpq_class dist_degree(const LocalDist& d) {
  if (d.depth == 0) throw std::invalid_argument("dist_degree: depth 0 has no root degree");
  mpq_class total = 0;
  for (const auto& atom : d.atoms) {
    total += atom.weight * static_cast<unsigned long>(atom.cls.root_degree());
  }
  return total;
}

namespace {

// Max flow source -> left (cap a_i) -> right (if allowed) -> sink (cap b_j),
// exact over rationals. Left-right arcs have unbounded capacity.
mpq_class coupling_mass(const std::vector<mpq_class>& a, const std::vector<mpq_class>& b,
                        const std::vector<std::vector<char>>& allowed) {
  const std::size_t L = a.size();
  const std::size_t R = b.size();
  std::vector<mpq_class> left_res = a;   // source -> i residual
  std::vector<mpq_class> right_res = b;  // j -> sink residual
  std::vector<std::vector<mpq_class>> flow(L, std::vector<mpq_class>(R, 0));
  mpq_class total = 0;
  while (true) {
    // BFS over nodes: 0..L-1 left, L..L+R-1 right.
    std::vector<std::int64_t> prev(L + R, -2);
    std::deque<std::size_t> q;
    for (std::size_t i = 0; i < L; ++i) {
      if (sgn(left_res[i]) > 0) {
        prev[i] = -1;
        q.push_back(i);
      }
    }
    std::int64_t end = -1;
    while (!q.empty() && end < 0) {
      const std::size_t u = q.front();
      q.pop_front();
      if (u < L) {
        for (std::size_t j = 0; j < R; ++j) {
          if (allowed[u][j] && prev[L + j] == -2) {
            prev[L + j] = static_cast<std::int64_t>(u);
            if (sgn(right_res[j]) > 0) {
              end = static_cast<std::int64_t>(L + j);
              break;
            }
            q.push_back(L + j);
          }
        }
      } else {
        const std::size_t j = u - L;
        for (std::size_t i = 0; i < L; ++i) {
          if (sgn(flow[i][j]) > 0 && prev[i] == -2) {
            prev[i] = static_cast<std::int64_t>(u);
            q.push_back(i);
          }
        }
      }
    }
    if (end < 0) break;
    // Bottleneck along the path.
    mpq_class push = right_res[static_cast<std::size_t>(end) - L];
    std::size_t node = static_cast<std::size_t>(end);
    while (true) {
      const std::int64_t p = prev[node];
      if (p == -1) {
        push = std::min(push, left_res[node]);
        break;
      }
      if (node < L) {  // reached left via a backward arc from right p
        push = std::min(push, flow[node][static_cast<std::size_t>(p) - L]);
      }
      node = static_cast<std::size_t>(p);
    }
    node = static_cast<std::size_t>(end);
    right_res[node - L] -= push;
    while (true) {
      const std::int64_t p = prev[node];
      if (p == -1) {
        left_res[node] -= push;
        break;
      }
      if (node >= L) {
        flow[static_cast<std::size_t>(p)][node - L] += push;
      } else {
        flow[node][static_cast<std::size_t>(p) - L] -= push;
      }
      node = static_cast<std::size_t>(p);
    }
    total += push;
  }
  return total;
}

}  // namespace

double lp_distance(const LocalDist& d1, const LocalDist& d2) {
  const std::size_t L = d1.atoms.size();
  const std::size_t R = d2.atoms.size();
  std::vector<std::vector<double>> dist(L, std::vector<double>(R, 0.0));
  std::vector<double> thresholds{0.0};
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < R; ++j) {
      const auto& x = d1.atoms[i];
      const auto& y = d2.atoms[j];
      dist[i][j] = (x.cls.canon == y.cls.canon) ? 0.0 : rooted_distance(x.rep, y.rep);
      thresholds.push_back(dist[i][j]);
    }
  }
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  std::vector<mpq_class> a;
  std::vector<mpq_class> b;
  for (const auto& at : d1.atoms) a.push_back(at.weight);
  for (const auto& at : d2.atoms) b.push_back(at.weight);
  double best = 1.0;
  for (double t : thresholds) {
    std::vector<std::vector<char>> allowed(L, std::vector<char>(R, 0));
    for (std::size_t i = 0; i < L; ++i) {
      for (std::size_t j = 0; j < R; ++j) allowed[i][j] = dist[i][j] <= t;
    }
    const mpq_class mass = coupling_mass(a, b, allowed);
    const double deficit = mpq_class(1 - mass).get_d();
    best = std::min(best, std::max(t, deficit));
  }
  return best;
}

}  // namespace sgc
