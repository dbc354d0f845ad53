#include "sgc/lwc_codec.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "sgc/errors.hpp"

namespace sgc {

namespace {

std::uint64_t choose2(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

std::size_t max_ball_size(std::size_t h, std::size_t cap) {
  std::size_t total = 1;
  std::size_t layer = cap;
  for (std::size_t i = 1; i <= h; ++i) {
    total += layer;
    if (total > 64) return total;
    layer *= (cap == 0 ? 0 : cap - 1);
  }
  return total;
}

std::string ball_key(const RootedGraph& rg) {
  std::string key;
  key.reserve(rg.size() * 4);
  for (const auto& nb : rg.adj) {
    key.push_back(static_cast<char>(nb.size()));
    for (auto w : nb) {
      key.push_back(static_cast<char>(w & 0xFF));
      key.push_back(static_cast<char>((w >> 8) & 0xFF));
    }
  }
  return key;
}

// Canonical classes keyed by the BFS-ordered ball layout.
class ClassCache {
 public:
  explicit ClassCache(std::size_t h) : h_(h) {}

  const RootedClass& of(const Graph& g, Vertex v) {
    RootedGraph rg = ball(g, v, h_);
    std::string key = ball_key(rg);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(std::move(key), canonical_class(rg, static_cast<std::uint32_t>(h_)))
        .first->second;
  }

 private:
  std::size_t h_;
  std::unordered_map<std::string, RootedClass> cache_;
};

std::string table_key(std::size_t n, const TypeTable& t) {
  std::string key = std::to_string(n) + "/" + std::to_string(t.depth) + "/";
  for (const auto& [cls, count] : t.entries) {
    key += std::to_string(cls.canon.size()) + ":" + cls.canon + "=" + std::to_string(count) + ";";
  }
  return key;
}

Graph graph_from_pairs(std::size_t n, const std::vector<std::uint64_t>& pairs) {
  std::vector<Edge> list;
  list.reserve(pairs.size());
  for (auto p : pairs) list.push_back(pair_of_index(p));
  return Graph::from_edges(n, list);
}

std::mutex g_count_mutex;
std::map<std::string, BigInt> g_count_cache;

// Iterative depth-first walk over edge sets in colex order. Pairs are decided
// from the largest index down; excluding comes before including.
class TypicalWalk {
 public:
  TypicalWalk(std::size_t n, const TypeTable& table, std::size_t budget)
      : n_(n), table_(table), budget_(budget), cache_(table.depth) {
    target_m_ = table.implied_edges();
    cap_ = table.max_root_degree();
    for (const auto& [cls, count] : table.entries) {
      const std::size_t d = cls.root_degree();
      if (target_hist_.size() <= d) target_hist_.resize(d + 1, 0);
      target_hist_[d] += count;
    }
  }

  // Calls leaf(edges) for each member; stops when leaf returns false.
  template <typename Leaf>
  void run(Leaf&& leaf) {
    const std::uint64_t total_pairs = choose2(n_);
    if (target_m_ > total_pairs) return;
    deg_.assign(n_, 0);
    fin_hist_.assign(target_hist_.size() + 1, 0);
    chosen_.clear();
    std::size_t nodes = 0;
    std::uint64_t level = 0;  // number of pairs decided
    std::vector<signed char> decision(static_cast<std::size_t>(total_pairs) + 1, -1);
    std::vector<char> finalized(static_cast<std::size_t>(total_pairs) + 1, 0);
    std::uint64_t need = target_m_;

    auto remaining_after = [&](std::uint64_t lvl) { return total_pairs - lvl - 1; };

    while (true) {
      const bool at_leaf = level == total_pairs || need == 0 || need == total_pairs - level;
      if (at_leaf && decision[level] == -1) {
        decision[level] = 2;  // leaves have no children
        if (!finish_leaf(level, need, leaf)) return;
      }
      if (at_leaf || decision[level] >= 1) {
        // Exhausted this level: backtrack.
        if (level == 0) return;
        decision[level] = -1;
        --level;
        undo(level, decision[level], finalized[level], need);
        continue;
      }
      const std::uint64_t p = total_pairs - 1 - level;
      const Edge uv = pair_of_index(p);
      const signed char option = static_cast<signed char>(decision[level] + 1);
      decision[level] = option;
      bool ok = true;
      if (option == 0) {
        ok = remaining_after(level) >= need;
      } else {
        ok = need > 0 && deg_[uv.first] < cap_ && deg_[uv.second] < cap_;
        if (ok) {
          ++deg_[uv.first];
          ++deg_[uv.second];
          chosen_.push_back(p);
          --need;
        }
      }
      if (!ok) continue;
      char fin = 0;
      if (uv.first == 0) {
        fin = 1;
        ok = finalize(uv.second);
        if (ok && uv.second == 1) {
          fin = 2;
          ok = finalize(0);
          if (!ok) unfinalize(uv.second);
        }
        if (!ok) fin = 0;
      }
      if (!ok) {
        if (option == 1) {
          --deg_[uv.first];
          --deg_[uv.second];
          chosen_.pop_back();
          ++need;
        }
        continue;
      }
      finalized[level] = fin;
      if (++nodes > budget_) {
        throw CapacityError("typical-set enumeration exceeded its node budget");
      }
      ++level;
      decision[level] = -1;
    }
  }

 private:
  bool finalize(Vertex v) {
    const std::size_t d = deg_[v];
    if (d >= target_hist_.size() || fin_hist_[d] + 1 > target_hist_[d]) return false;
    ++fin_hist_[d];
    return true;
  }
  void unfinalize(Vertex v) { --fin_hist_[deg_[v]]; }

  void undo(std::uint64_t level, signed char option, char fin, std::uint64_t& need) {
    const std::uint64_t p = choose2(n_) - 1 - level;
    const Edge uv = pair_of_index(p);
    if (fin == 2) unfinalize(0);
    if (fin >= 1) unfinalize(uv.second);
    if (option == 1) {
      --deg_[uv.first];
      --deg_[uv.second];
      chosen_.pop_back();
      ++need;
    }
  }

  // Edges arrive in descending pair order, so reversing sorts them.
  template <typename Leaf>
  bool finish_leaf(std::uint64_t level, std::uint64_t need, Leaf& leaf) {
    std::vector<std::uint64_t> edges = chosen_;
    if (need > 0) {
      // All remaining pairs are forced in.
      for (std::uint64_t l = level; l < choose2(n_); ++l) edges.push_back(choose2(n_) - 1 - l);
      std::vector<std::size_t> deg(n_, 0);
      for (auto p : edges) {
        const Edge e = pair_of_index(p);
        if (++deg[e.first] > cap_ || ++deg[e.second] > cap_) return true;
      }
    }
    std::reverse(edges.begin(), edges.end());
    // With degrees <= 1 the edge count fixes the degree histogram, and the
    // histogram fixes every class.
    if (cap_ > 1 && !matches(graph_from_pairs(n_, edges))) return true;
    return leaf(edges);
  }

  bool matches(const Graph& g) {
    std::map<RootedClass, std::size_t> tally;
    for (Vertex v = 0; v < n_; ++v) ++tally[cache_.of(g, v)];
    if (tally.size() != table_.entries.size()) return false;
    auto it = tally.begin();
    for (const auto& [cls, count] : table_.entries) {
      if (it->first != cls || it->second != count) return false;
      ++it;
    }
    return true;
  }

  std::size_t n_;
  const TypeTable& table_;
  std::size_t budget_;
  ClassCache cache_;
  std::uint64_t target_m_ = 0;
  std::size_t cap_ = 0;
  std::vector<std::size_t> target_hist_;
  std::vector<std::size_t> deg_;
  std::vector<std::size_t> fin_hist_;
  std::vector<std::uint64_t> chosen_;
};

void write_table(CodeStream& out, const TypeTable& table, std::size_t n) {
  if (table.mode == TableMode::all_classes) {
    const auto& classes = bounded_classes(table.depth, static_cast<std::size_t>(std::floor(table.D)));
    auto it = table.entries.begin();
    for (const auto& cls : classes) {
      std::size_t count = 0;
      if (it != table.entries.end() && it->first == cls) {
        count = it->second;
        ++it;
      }
      out.write_uint(count, n);
    }
    if (it != table.entries.end()) {
      throw std::logic_error("type table holds a class outside the bounded class list");
    }
    return;
  }
  out.write_uint(table.entries.size(), n);
  for (const auto& [cls, count] : table.entries) {
    const std::size_t size = cls.vertex_count();
    out.write_uint(size - 1, n - 1);
    const std::size_t pairs = choose2(size);
    for (std::size_t idx = 0; idx < pairs; ++idx) {
      const auto byte = static_cast<unsigned char>(cls.canon[4 + idx / 8]);
      out.write_bits((byte >> (7 - idx % 8)) & 1u, 1);
    }
    out.write_uint(count, n);
  }
}

TypeTable read_table(BitReader& in, std::size_t n, const LwcParams& params) {
  TypeTable table;
  table.depth = params.h;
  table.D = params.D;
  table.mode = table_mode_for(params);
  const std::size_t start = in.position();
  std::size_t total = 0;
  if (table.mode == TableMode::all_classes) {
    for (const auto& cls : bounded_classes(params.h, params.degree_cap())) {
      const std::size_t count = in.read_uint(n);
      if (count > 0) table.entries.emplace_back(cls, count);
      total += count;
    }
  } else {
    const std::size_t k = in.read_uint(n);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t size = in.read_uint(n - 1) + 1;
      RootedClass cls;
      cls.depth = static_cast<std::uint32_t>(params.h);
      const std::size_t pairs = choose2(size);
      cls.canon.assign(4 + (pairs + 7) / 8, '\0');
      for (int b = 0; b < 4; ++b) {
        cls.canon[static_cast<std::size_t>(b)] = static_cast<char>((size >> (24 - 8 * b)) & 0xFFu);
      }
      for (std::size_t idx = 0; idx < pairs; ++idx) {
        if (in.read_bits(1)) {
          cls.canon[4 + idx / 8] = static_cast<char>(
              static_cast<unsigned char>(cls.canon[4 + idx / 8]) | (0x80u >> (idx % 8)));
        }
      }
      const std::size_t count = in.read_uint(n);
      if (count == 0) throw MalformedStream("type table entry with zero count", in.position());
      if (!table.entries.empty() && !(table.entries.back().first < cls)) {
        throw MalformedStream("type table entries out of order", in.position());
      }
      total += count;
      table.entries.emplace_back(std::move(cls), count);
    }
  }
  if (total != n) throw MalformedStream("type table counts do not sum to n", start);
  std::size_t degree_sum = 0;
  for (const auto& [cls, count] : table.entries) degree_sum += cls.root_degree() * count;
  if (degree_sum % 2 != 0) throw MalformedStream("type table degree sum is odd", start);
  return table;
}

}  // namespace

std::size_t LwcParams::degree_cap() const {
  return D <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(D));
}

LwcParams lwc_params(std::size_t n) {
  LwcParams p;
  const double ll = n >= 2 ? std::log(std::log(static_cast<double>(n))) : -1.0;
  p.D = (std::isfinite(ll) && ll > 0.0) ? ll : 0.0;
  const double root = std::sqrt(std::max(std::isfinite(ll) ? ll : 0.0, 0.0));
  p.h = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(root)));
  return p;
}

std::size_t TypeTable::implied_edges() const {
  std::size_t sum = 0;
  for (const auto& [cls, count] : entries) sum += cls.root_degree() * count;
  return sum / 2;
}

std::size_t TypeTable::max_root_degree() const {
  std::size_t best = 0;
  for (const auto& [cls, count] : entries) best = std::max(best, cls.root_degree());
  return best;
}

TableMode table_mode_for(const LwcParams& params) {
  return (params.h <= 2 && max_ball_size(params.h, params.degree_cap()) <= 6)
             ? TableMode::all_classes
             : TableMode::sparse;
}

const std::vector<RootedClass>& bounded_classes(std::size_t h, std::size_t cap) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::size_t>, std::vector<RootedClass>> memo;
  std::lock_guard lock(mu);
  auto it = memo.find({h, cap});
  if (it != memo.end()) return it->second;
  const std::size_t nmax = max_ball_size(h, cap);
  if (nmax > 6) throw CapacityError("bounded class list is only built for balls of <= 6 vertices");
  std::vector<RootedClass> found;
  for (std::size_t size = 1; size <= nmax; ++size) {
    const std::size_t pairs = choose2(size);
    for (std::uint32_t mask = 0; mask < (1u << pairs); ++mask) {
      RootedGraph rg;
      rg.adj.resize(size);
      std::size_t bit = 0;
      for (std::uint32_t i = 0; i < size; ++i) {
        for (std::uint32_t j = i + 1; j < size; ++j, ++bit) {
          if (mask & (1u << bit)) {
            rg.adj[i].push_back(j);
            rg.adj[j].push_back(i);
          }
        }
      }
      bool ok = true;
      for (const auto& nb : rg.adj) ok = ok && nb.size() <= cap;
      if (!ok) continue;
      // Connected with every vertex within distance h of the root.
      if (truncate(rg, h).size() != size) continue;
      found.push_back(canonical_class(rg, static_cast<std::uint32_t>(h)));
    }
  }
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  return memo.emplace(std::make_pair(h, cap), std::move(found)).first->second;
}

TypeTable type_table(const Graph& g, const LwcParams& params) {
  TypeTable t;
  t.depth = params.h;
  t.D = params.D;
  t.mode = table_mode_for(params);
  if (g.max_degree() > params.degree_cap()) {
    throw std::invalid_argument("type_table: graph exceeds the degree bound");
  }
  ClassCache cache(params.h);
  std::map<RootedClass, std::size_t> tally;
  for (Vertex v = 0; v < g.num_vertices(); ++v) ++tally[cache.of(g, v)];
  t.entries.assign(tally.begin(), tally.end());
  return t;
}

BigInt typical_lower_bound(std::size_t n, const TypeTable& table) {
  std::map<std::size_t, std::size_t> hist;
  for (const auto& [cls, count] : table.entries) hist[cls.root_degree()] += count;
  BigInt bound;
  mpz_fac_ui(bound.get_mpz_t(), static_cast<unsigned long>(n));
  for (const auto& [d, c] : hist) {
    BigInt f;
    mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(c));
    mpz_divexact(bound.get_mpz_t(), bound.get_mpz_t(), f.get_mpz_t());
  }
  if (table.max_root_degree() <= 1) {
    // Members are exactly the perfect matchings on the degree-one vertices.
    const auto it = hist.find(1);
    const std::size_t ones = it == hist.end() ? 0 : it->second;
    if (ones % 2 == 1) return 0;
    BigInt pairings;
    mpz_2fac_ui(pairings.get_mpz_t(), static_cast<unsigned long>(ones == 0 ? 0 : ones - 1));
    bound *= pairings;
  }
  return bound;
}

TypicalSet::TypicalSet(std::size_t n, TypeTable table, std::size_t node_budget)
    : n_(n), table_(std::move(table)), budget_(node_budget) {
  std::size_t total = 0;
  for (const auto& [cls, count] : table_.entries) total += count;
  if (total != n_) throw std::invalid_argument("TypicalSet: table counts do not sum to n");
  const std::string key = table_key(n_, table_);
  {
    std::lock_guard lock(g_count_mutex);
    auto it = g_count_cache.find(key);
    if (it != g_count_cache.end()) {
      count_ = it->second;
      return;
    }
  }
  BigInt count = 0;
  TypicalWalk walk(n_, table_, budget_);
  walk.run([&](const std::vector<std::uint64_t>&) {
    ++count;
    return true;
  });
  count_ = count;
  std::lock_guard lock(g_count_mutex);
  g_count_cache.emplace(key, count_);
}

BigInt TypicalSet::rank_of(const Graph& g) const {
  if (g.num_vertices() != n_) throw std::invalid_argument("rank_of: vertex count mismatch");
  std::vector<std::uint64_t> target;
  for (auto [u, v] : g.edges()) target.push_back(pair_index(u, v));
  std::sort(target.begin(), target.end());
  BigInt index = 0;
  bool found = false;
  TypicalWalk walk(n_, table_, budget_);
  walk.run([&](const std::vector<std::uint64_t>& edges) {
    if (edges == target) {
      found = true;
      return false;
    }
    ++index;
    return true;
  });
  if (!found) throw std::invalid_argument("rank_of: graph is not in the typical set");
  return index;
}

Graph TypicalSet::graph_of(const BigInt& rank) const {
  if (sgn(rank) < 0 || rank >= count_) throw std::invalid_argument("graph_of: rank out of range");
  BigInt index = 0;
  Graph out;
  TypicalWalk walk(n_, table_, budget_);
  walk.run([&](const std::vector<std::uint64_t>& edges) {
    if (index == rank) {
      out = graph_from_pairs(n_, edges);
      return false;
    }
    ++index;
    return true;
  });
  return out;
}

void TypicalSet::for_each(const std::function<bool(const Graph&)>& visit) const {
  TypicalWalk walk(n_, table_, budget_);
  walk.run([&](const std::vector<std::uint64_t>& edges) { return visit(graph_from_pairs(n_, edges)); });
}

std::uint64_t pair_index(std::uint64_t u, std::uint64_t v) {
  if (u > v) std::swap(u, v);
  if (u == v) throw std::invalid_argument("pair_index: u == v");
  return choose2(v) + u;
}

Edge pair_of_index(std::uint64_t index) {
  auto v = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(index))) / 2.0);
  while (choose2(v) > index) --v;
  while (choose2(v + 1) <= index) ++v;
  return {static_cast<Vertex>(index - choose2(v)), static_cast<Vertex>(v)};
}

double lemma210_budget(std::size_t n, std::size_t m) {
  const std::uint64_t pairs = choose2(n);
  if (m > pairs) throw std::invalid_argument("lemma210_budget: m exceeds C(n,2)");
  return log_binomial(pairs, m);
}

LwcEncoding lwc_encode(const Graph& g, LwcMode mode, const LwcParams& params) {
  LwcEncoding enc;
  const std::size_t n = g.num_vertices();
  enc.n = n;
  enc.params = params;
  enc.m = g.num_edges();
  enc.table_mode = table_mode_for(params);
  if (n == 0) {
    enc.exact = mode != LwcMode::surrogate;
    return enc;
  }

  std::vector<char> high(n, 0);
  for (Vertex v = 0; v < n; ++v) high[v] = static_cast<double>(g.degree(v)) > params.D;
  std::vector<char> in_y(n, 0);
  std::vector<Edge> kept;
  std::vector<Edge> dropped;
  for (Vertex v = 0; v < n; ++v) {
    if (!high[v]) continue;
    in_y[v] = 1;
    for (Vertex w : g.neighbors(v)) in_y[w] = 1;
  }
  for (auto e : g.edges()) {
    (high[e.first] || high[e.second] ? dropped : kept).push_back(e);
  }
  const Graph tilde = Graph::from_edges(n, kept);
  enc.m_tilde = kept.size();
  TypeTable table = type_table(tilde, params);

  CodeStream& out = enc.stream;
  out.begin_section("lwc.table");
  write_table(out, table, n);

  out.begin_section("lwc.index");
  bool exact = false;
  std::optional<TypicalSet> typical;
  if (mode != LwcMode::surrogate) {
    const bool hopeless = typical_lower_bound(n, table) > static_cast<unsigned long>(kTypicalNodeBudget);
    if (mode == LwcMode::exact || !hopeless) {
      try {
        typical.emplace(n, table);
        exact = true;
      } catch (const CapacityError&) {
        if (mode == LwcMode::exact) throw;
      }
    }
  }
  enc.exact = exact;
  if (exact) {
    const BigInt rank = typical->rank_of(tilde);
    out.write_big(rank, bit_width(BigInt(typical->count() - 1)));
  } else {
    std::vector<std::uint64_t> pairs;
    pairs.reserve(kept.size());
    for (auto [u, v] : kept) pairs.push_back(pair_index(u, v));
    std::sort(pairs.begin(), pairs.end());
    out.write_subset(pairs, choose2(n));
  }

  std::vector<std::uint64_t> y;
  std::vector<std::uint32_t> local(n, 0);
  for (Vertex v = 0; v < n; ++v) {
    if (in_y[v]) {
      local[v] = static_cast<std::uint32_t>(y.size());
      y.push_back(v);
    }
  }
  enc.y_size = y.size();
  enc.z_size = dropped.size();
  out.begin_section("lwc.y_count");
  out.write_uint(y.size(), n);
  out.begin_section("lwc.y_rank");
  out.write_subset(y, n);
  const std::uint64_t y_pairs = choose2(y.size());
  out.begin_section("lwc.z_count");
  out.write_uint(dropped.size(), y_pairs);
  std::vector<std::uint64_t> z;
  z.reserve(dropped.size());
  for (auto [u, v] : dropped) z.push_back(pair_index(local[u], local[v]));
  std::sort(z.begin(), z.end());
  out.begin_section("lwc.z_rank");
  out.write_subset(z, y_pairs);
  return enc;
}

Graph lwc_decode(BitReader& in, std::size_t n, const LwcParams& params, bool exact) {
  if (n == 0) return Graph(0);
  const TypeTable table = read_table(in, n, params);
  const std::size_t m_tilde = table.implied_edges();
  if (table.max_root_degree() > params.degree_cap()) {
    throw MalformedStream("type table exceeds the degree bound", in.position());
  }
  std::vector<Edge> edges;
  if (exact) {
    const std::size_t at = in.position();
    try {
      TypicalSet typical(n, table);
      const BigInt rank = in.read_big(bit_width(BigInt(typical.count() - 1)));
      if (rank >= typical.count()) throw MalformedStream("typical-set index out of range", at);
      edges = typical.graph_of(rank).edges();
    } catch (const CapacityError&) {
      throw MalformedStream("typical set for the decoded table is not enumerable", at);
    } catch (const std::invalid_argument&) {
      throw MalformedStream("typical set for the decoded table is empty", at);
    }
  } else {
    for (auto p : in.read_subset(choose2(n), m_tilde)) edges.push_back(pair_of_index(p));
  }
  const std::size_t y_size = in.read_uint(n);
  const auto y = in.read_subset(n, y_size);
  const std::uint64_t y_pairs = choose2(y_size);
  const std::size_t z_size = in.read_uint(y_pairs);
  for (auto p : in.read_subset(y_pairs, z_size)) {
    const Edge local = pair_of_index(p);
    edges.emplace_back(static_cast<Vertex>(y[local.first]), static_cast<Vertex>(y[local.second]));
  }
  try {
    return Graph::from_edges(n, edges);
  } catch (const std::invalid_argument& e) {
    throw MalformedStream(std::string("inconsistent lwc section: ") + e.what(), in.position());
  }
}

Graph lwc_decode(const LwcEncoding& enc) {
  BitReader in(enc.stream.bytes(), enc.stream.bit_size());
  return lwc_decode(in, enc.n, enc.params, enc.exact);
}

}  // namespace sgc
