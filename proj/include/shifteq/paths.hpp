#ifndef SHIFTEQ_PATHS_HPP
#define SHIFTEQ_PATHS_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "shifteq/matrix.hpp"

namespace shifteq {

// Materialized path spaces are capped; desk-scale inputs stay far below this.
inline constexpr std::uint64_t kMaxPathSpaceSize = 2'000'000;

/// Edge (v, w, n) of the graph of a matrix F, with 0 <= n < F[v][w].
/// Source and range are stored as positions into F's index sets.
struct Edge {
  std::uint32_t src = 0;
  std::uint32_t rng = 0;
  std::uint64_t ord = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Canonical enumeration of the edge set of one matrix:
/// ordered by (row position, column position, ordinal).
class EdgeTable {
 public:
  explicit EdgeTable(const NonnegMatrix& f) : rows_(f.rows()), cols_(f.cols()) {
    Int total = f.entry_sum();
    if (total > kMaxPathSpaceSize)
      fail(errc::path_space_too_large, "edge set of size " + total.get_str());
    edges_.reserve(total.get_ui());
    by_source_.resize(f.n_rows());
    for (std::uint32_t i = 0; i < f.n_rows(); ++i)
      for (std::uint32_t j = 0; j < f.n_cols(); ++j) {
        const Int& c = f.at(i, j);
        for (std::uint64_t n = 0; n < c.get_ui(); ++n) {
          by_source_[i].push_back(static_cast<std::uint32_t>(edges_.size()));
          edges_.push_back(Edge{i, j, n});
        }
      }
  }

  std::size_t size() const { return edges_.size(); }
  const Edge& edge(std::uint32_t i) const { return edges_.at(i); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::uint32_t>& from_source(std::uint32_t v) const {
    return by_source_.at(v);
  }
  const IndexSet& rows() const { return rows_; }
  const IndexSet& cols() const { return cols_; }

  /// Index of the edge (src, rng, ord) in enumeration order, or -1.
  std::int64_t find(std::uint32_t src, std::uint32_t rng, std::uint64_t ord) const {
    for (std::uint32_t i : by_source_.at(src)) {
      const Edge& e = edges_[i];
      if (e.rng == rng && e.ord == ord) return i;
    }
    return -1;
  }

 private:
  IndexSet rows_, cols_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::uint32_t>> by_source_;
};

inline std::vector<Edge> edge_set(const NonnegMatrix& f) { return EdgeTable(f).edges(); }

/// A composable chain of matrices M1, ..., Mk defining the path space
/// E_{M1} x ... x E_{Mk}.
class PathSpaceSpec {
 public:
  PathSpaceSpec() = default;
  explicit PathSpaceSpec(std::vector<NonnegMatrix> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) fail(errc::invalid_input, "path space spec needs >= 1 factor");
    for (std::size_t i = 0; i + 1 < factors_.size(); ++i)
      if (factors_[i].cols() != factors_[i + 1].rows())
        fail(errc::non_composable_factors,
             "factor " + std::to_string(i) + " does not compose with factor " +
                 std::to_string(i + 1));
  }

  static PathSpaceSpec single(const NonnegMatrix& m) { return PathSpaceSpec({m}); }

  static PathSpaceSpec repeated(const NonnegMatrix& m, std::size_t k) {
    if (!m.is_square()) fail(errc::not_square, "repeated factor must be square");
    return PathSpaceSpec(std::vector<NonnegMatrix>(k, m));
  }

  const std::vector<NonnegMatrix>& factors() const { return factors_; }
  std::size_t length() const { return factors_.size(); }
  const IndexSet& source_set() const { return factors_.front().rows(); }
  const IndexSet& range_set() const { return factors_.back().cols(); }

  NonnegMatrix product() const {
    NonnegMatrix p = factors_.front();
    for (std::size_t i = 1; i < factors_.size(); ++i) p = multiply(p, factors_[i]);
    return p;
  }

  PathSpaceSpec concat(const PathSpaceSpec& o) const {
    std::vector<NonnegMatrix> fs = factors_;
    fs.insert(fs.end(), o.factors_.begin(), o.factors_.end());
    return PathSpaceSpec(std::move(fs));
  }

  friend bool operator==(const PathSpaceSpec& a, const PathSpaceSpec& b) {
    return a.factors_ == b.factors_;
  }
  friend bool operator!=(const PathSpaceSpec& a, const PathSpaceSpec& b) {
    return !(a == b);
  }

 private:
  std::vector<NonnegMatrix> factors_;
};

/// A path is stored as one edge index per factor (indices into the
/// corresponding EdgeTable). Consecutive edges compose.
using PathKey = std::vector<std::uint32_t>;

/// Fully enumerated path space of a spec, in lexicographic order on
/// factor-wise edge order. Enumeration order is part of the external
/// contract: it defines every canonical construction downstream.
class PathSpace {
 public:
  explicit PathSpace(PathSpaceSpec spec) : spec_(std::move(spec)) {
    Int expected = spec_.product().entry_sum();
    if (expected > kMaxPathSpaceSize)
      fail(errc::path_space_too_large, "path space of size " + expected.get_str());
    for (const auto& f : spec_.factors()) tables_.push_back(std::make_shared<EdgeTable>(f));
    enumerate();
    if (Int(static_cast<unsigned long>(paths_.size())) != expected)
      fail(errc::type_check_failure, "path count disagrees with product entry sum");
    index_blocks();
  }

  const PathSpaceSpec& spec() const { return spec_; }
  std::size_t size() const { return paths_.size(); }
  std::size_t path_length() const { return spec_.length(); }
  const PathKey& path(std::size_t i) const { return paths_.at(i); }
  const std::vector<PathKey>& paths() const { return paths_; }
  const EdgeTable& table(std::size_t factor) const { return *tables_.at(factor); }

  std::uint32_t source_of(std::size_t i) const {
    return tables_.front()->edge(paths_.at(i).front()).src;
  }
  std::uint32_t range_of(std::size_t i) const {
    return tables_.back()->edge(paths_.at(i).back()).rng;
  }

  /// Enumeration is lexicographic on the edge-index tuples, so membership
  /// is a binary search.
  std::int64_t find(const PathKey& key) const {
    auto it = std::lower_bound(paths_.begin(), paths_.end(), key);
    if (it == paths_.end() || *it != key) return -1;
    return static_cast<std::int64_t>(it - paths_.begin());
  }

  /// Path indices of the (source, range) block, in enumeration order.
  const std::vector<std::uint32_t>& block(std::uint32_t src, std::uint32_t rng) const {
    static const std::vector<std::uint32_t> empty;
    auto it = blocks_.find({src, rng});
    return it == blocks_.end() ? empty : it->second;
  }
  const std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>>&
  blocks() const {
    return blocks_;
  }

 private:
  void enumerate() {
    const std::size_t k = spec_.length();
    PathKey cur(k, 0);
    // Depth-first over factors; edges of factor i are tried in table order,
    // restricted to those composable with the previous edge.
    struct Frame {
      const std::vector<std::uint32_t>* cands;
      std::size_t pos;
    };
    std::vector<Frame> stack;
    std::vector<std::uint32_t> all0(tables_[0]->size());
    for (std::uint32_t i = 0; i < all0.size(); ++i) all0[i] = i;
    stack.push_back({&all0, 0});
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.pos >= f.cands->size()) {
        stack.pop_back();
        continue;
      }
      std::uint32_t ei = (*f.cands)[f.pos++];
      cur[stack.size() - 1] = ei;
      if (stack.size() == k) {
        paths_.push_back(cur);
        continue;
      }
      std::uint32_t rng = tables_[stack.size() - 1]->edge(ei).rng;
      stack.push_back({&tables_[stack.size()]->from_source(rng), 0});
    }
  }

  void index_blocks() {
    for (std::uint32_t i = 0; i < paths_.size(); ++i)
      blocks_[{source_of(i), range_of(i)}].push_back(i);
  }

  PathSpaceSpec spec_;
  std::vector<std::shared_ptr<EdgeTable>> tables_;
  std::vector<PathKey> paths_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> blocks_;
};

inline std::shared_ptr<const PathSpace> materialize(const PathSpaceSpec& spec) {
  return std::make_shared<PathSpace>(spec);
}

/// All composable edge sequences of the spec, in canonical order.
inline std::vector<PathKey> path_space(const PathSpaceSpec& spec) {
  return PathSpace(spec).paths();
}

// --- JSON ---
// Edge: [source label, range label, ordinal]. Path: array of edges.
// PathSpaceSpec: array of matrix objects.

inline json edge_to_json(const Edge& e, const EdgeTable& t) {
  return json::array({t.rows().label(e.src), t.cols().label(e.rng), e.ord});
}

inline json path_to_json(const PathKey& p, const PathSpace& ps) {
  json a = json::array();
  for (std::size_t i = 0; i < p.size(); ++i)
    a.push_back(edge_to_json(ps.table(i).edge(p[i]), ps.table(i)));
  return a;
}

inline json spec_to_json(const PathSpaceSpec& spec) {
  json a = json::array();
  for (const auto& f : spec.factors()) a.push_back(to_json(f));
  return a;
}

inline PathSpaceSpec spec_from_json(const json& j, const std::string& field = "spec") {
  if (!j.is_array() || j.empty())
    fail(errc::invalid_input, "field '" + field + "' must be a non-empty array of matrices");
  std::vector<NonnegMatrix> fs;
  for (std::size_t i = 0; i < j.size(); ++i)
    fs.push_back(matrix_from_json(j[i], field + "[" + std::to_string(i) + "]"));
  return PathSpaceSpec(std::move(fs));
}

inline PathKey path_from_json(const json& j, const PathSpace& ps,
                              const std::string& field = "path") {
  if (!j.is_array() || j.size() != ps.path_length())
    fail(errc::invalid_input, "field '" + field + "' has wrong number of edges");
  PathKey key;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& ej = j[i];
    if (!ej.is_array() || ej.size() != 3)
      fail(errc::invalid_input, "field '" + field + "' edge must be [src, rng, ord]");
    const EdgeTable& t = ps.table(i);
    std::uint32_t src = static_cast<std::uint32_t>(t.rows().position(ej[0].get<std::string>()));
    std::uint32_t rng = static_cast<std::uint32_t>(t.cols().position(ej[1].get<std::string>()));
    std::uint64_t ord = ej[2].get<std::uint64_t>();
    std::int64_t idx = t.find(src, rng, ord);
    if (idx < 0) fail(errc::invalid_input, "field '" + field + "' names a nonexistent edge");
    key.push_back(static_cast<std::uint32_t>(idx));
  }
  return key;
}

}  // namespace shifteq

#endif
