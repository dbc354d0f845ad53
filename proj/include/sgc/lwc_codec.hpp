#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "sgc/bitcode.hpp"
#include "sgc/graph.hpp"
#include "sgc/rooted.hpp"

namespace sgc {

// Node limit for the exact typical-set enumeration.
inline constexpr std::size_t kTypicalNodeBudget = 10'000'000;

/// Depth and degree bound of the local-weak-convergence coder.
struct LwcParams {
  std::size_t h = 1;
  double D = 0.0;

  /// Largest admissible integer degree, floor(D).
  std::size_t degree_cap() const;
};

/// D = log log n when positive (else 0), h = max(1, floor(sqrt(max(log log n, 0)))).
LwcParams lwc_params(std::size_t n);

enum class LwcMode { exact, surrogate, automatic };

enum class TableMode {
  all_classes,  // one count per class of bounded degree and depth
  sparse,       // class count, then (class, count) for the classes present
};

/// Depth-h neighborhood-type counts of a degree-bounded graph.
struct TypeTable {
  std::size_t depth = 1;
  double D = 0.0;
  TableMode mode = TableMode::sparse;
  std::vector<std::pair<RootedClass, std::size_t>> entries;  // sorted by class, counts > 0

  /// Edge count implied by the root degrees: sum(count * degree) / 2.
  std::size_t implied_edges() const;
  std::size_t max_root_degree() const;
  bool operator==(const TypeTable&) const = default;
};

/// all_classes when h <= 2 and the largest possible ball has at most six
/// vertices, sparse otherwise.
TableMode table_mode_for(const LwcParams& params);

/// Every rooted class with root eccentricity <= h and maximum degree <= cap,
/// in key order. Memoized; only for small (h, cap).
const std::vector<RootedClass>& bounded_classes(std::size_t h, std::size_t cap);

TypeTable type_table(const Graph& g, const LwcParams& params);

/// The set W of graphs on [n] with maximum degree <= D whose depth-h type
/// counts equal the table, in colex order of their edge sets (pair index
/// C(v,2) + u for u < v). Construction counts the set; throws CapacityError
/// past the node budget.
class TypicalSet {
 public:
  TypicalSet(std::size_t n, TypeTable table, std::size_t node_budget = kTypicalNodeBudget);

  const BigInt& count() const noexcept { return count_; }
  /// Position of g in the order. Throws std::invalid_argument if g is not a member.
  BigInt rank_of(const Graph& g) const;
  /// Member at the given position. Throws std::invalid_argument when out of range.
  Graph graph_of(const BigInt& rank) const;
  /// Visits members in order until the visitor returns false.
  void for_each(const std::function<bool(const Graph&)>& visit) const;

 private:
  std::size_t n_;
  TypeTable table_;
  std::size_t budget_;
  BigInt count_;
};

/// Lower bound on |W| from relabelings of the degree classes; auto mode skips
/// the enumeration when this already exceeds the budget.
BigInt typical_lower_bound(std::size_t n, const TypeTable& table);

struct LwcEncoding {
  CodeStream stream;
  std::size_t n = 0;
  LwcParams params;
  bool exact = false;
  TableMode table_mode = TableMode::sparse;
  std::size_t m = 0;
  std::size_t m_tilde = 0;
  std::size_t y_size = 0;
  std::size_t z_size = 0;

  double nats() const { return stream.nats(); }
};

/// Encodes g with the given parameters. Sections: lwc.table, lwc.index,
/// lwc.y_count, lwc.y_rank, lwc.z_count, lwc.z_rank.
/// Throws CapacityError when exact mode is forced and the enumeration fails.
LwcEncoding lwc_encode(const Graph& g, LwcMode mode, const LwcParams& params);
inline LwcEncoding lwc_encode(const Graph& g, LwcMode mode) {
  return lwc_encode(g, mode, lwc_params(g.num_vertices()));
}

/// Reads an lwc section for a graph on n vertices written in the given mode.
Graph lwc_decode(BitReader& in, std::size_t n, const LwcParams& params, bool exact);
Graph lwc_decode(const LwcEncoding& enc);

/// log C(C(n,2), m) in nats.
double lemma210_budget(std::size_t n, std::size_t m);

/// Pair index C(v,2) + u for u < v, and its inverse.
std::uint64_t pair_index(std::uint64_t u, std::uint64_t v);
Edge pair_of_index(std::uint64_t index);

}  // namespace sgc
