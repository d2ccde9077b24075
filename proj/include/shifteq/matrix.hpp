#ifndef SHIFTEQ_MATRIX_HPP
#define SHIFTEQ_MATRIX_HPP

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shifteq/errors.hpp"

namespace shifteq {

using Int = mpz_class;
using json = nlohmann::json;

/// Ordered set of distinct vertex labels. The order is part of the value:
/// every canonical enumeration downstream is seeded by it.
class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) fail(errc::invalid_input, "IndexSet must be non-empty");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      auto [it, inserted] = pos_.emplace(labels_[i], i);
      if (!inserted) fail(errc::invalid_input, "duplicate label '" + labels_[i] + "'");
    }
  }

  static IndexSet numbered(std::size_t n, const std::string& prefix = "v") {
    std::vector<std::string> ls;
    ls.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ls.push_back(prefix + std::to_string(i));
    return IndexSet(std::move(ls));
  }

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t position(const std::string& label) const {
    auto it = pos_.find(label);
    if (it == pos_.end()) fail(errc::invalid_input, "unknown label '" + label + "'");
    return it->second;
  }
  bool contains(const std::string& label) const { return pos_.count(label) > 0; }

  friend bool operator==(const IndexSet& a, const IndexSet& b) {
    return a.labels_ == b.labels_;
  }
  friend bool operator!=(const IndexSet& a, const IndexSet& b) { return !(a == b); }

  IndexSet prefixed(const std::string& p) const {
    std::vector<std::string> ls;
    ls.reserve(labels_.size());
    for (const auto& l : labels_) ls.push_back(p + l);
    return IndexSet(std::move(ls));
  }

 private:
  std::vector<std::string> labels_;
  std::map<std::string, std::size_t> pos_;
};

/// Rectangular matrix over arbitrary-precision nonnegative integers with
/// named row and column index sets. Immutable after construction.
class NonnegMatrix {
 public:
  NonnegMatrix() = default;

  NonnegMatrix(IndexSet rows, IndexSet cols, std::vector<Int> row_major)
      : rows_(std::move(rows)), cols_(std::move(cols)), e_(std::move(row_major)) {
    if (e_.size() != rows_.size() * cols_.size())
      fail(errc::dimension_mismatch, "entry count does not match index sets");
    for (const auto& x : e_)
      if (x < 0) fail(errc::invalid_input, "negative entry");
  }

  /// Square matrix over numbered labels v0..v{n-1}; convenience for tests
  /// and literals.
  static NonnegMatrix square(std::vector<std::vector<long>> rows,
                             const std::string& prefix = "v") {
    std::size_t n = rows.size();
    std::vector<Int> e;
    e.reserve(n * n);
    for (const auto& r : rows) {
      if (r.size() != n) fail(errc::not_square, "ragged literal");
      for (long x : r) e.emplace_back(x);
    }
    return NonnegMatrix(IndexSet::numbered(n, prefix), IndexSet::numbered(n, prefix),
                        std::move(e));
  }

  static NonnegMatrix rect(std::vector<std::vector<long>> rows,
                           const IndexSet& ri, const IndexSet& ci) {
    std::vector<Int> e;
    for (const auto& r : rows) {
      if (r.size() != ci.size()) fail(errc::dimension_mismatch, "ragged literal");
      for (long x : r) e.emplace_back(x);
    }
    if (rows.size() != ri.size()) fail(errc::dimension_mismatch, "row count mismatch");
    return NonnegMatrix(ri, ci, std::move(e));
  }

  static NonnegMatrix identity(const IndexSet& ix) {
    std::vector<Int> e(ix.size() * ix.size(), 0);
    for (std::size_t i = 0; i < ix.size(); ++i) e[i * ix.size() + i] = 1;
    return NonnegMatrix(ix, ix, std::move(e));
  }

  const IndexSet& rows() const { return rows_; }
  const IndexSet& cols() const { return cols_; }
  std::size_t n_rows() const { return rows_.size(); }
  std::size_t n_cols() const { return cols_.size(); }
  bool is_square() const { return rows_ == cols_; }

  const Int& at(std::size_t i, std::size_t j) const { return e_.at(i * cols_.size() + j); }
  const Int& at(const std::string& r, const std::string& c) const {
    return at(rows_.position(r), cols_.position(c));
  }
  const std::vector<Int>& entries() const { return e_; }

  Int entry_sum() const {
    Int s = 0;
    for (const auto& x : e_) s += x;
    return s;
  }

  Int max_entry() const {
    Int m = 0;
    for (const auto& x : e_)
      if (x > m) m = x;
    return m;
  }

  friend bool operator==(const NonnegMatrix& a, const NonnegMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.e_ == b.e_;
  }
  friend bool operator!=(const NonnegMatrix& a, const NonnegMatrix& b) {
    return !(a == b);
  }

  /// Same shape and entries; labels may differ.
  bool same_entries(const NonnegMatrix& o) const {
    return n_rows() == o.n_rows() && n_cols() == o.n_cols() && e_ == o.e_;
  }

  NonnegMatrix relabeled(const IndexSet& ri, const IndexSet& ci) const {
    if (ri.size() != n_rows() || ci.size() != n_cols())
      fail(errc::dimension_mismatch, "relabel shape mismatch");
    return NonnegMatrix(ri, ci, e_);
  }

 private:
  IndexSet rows_, cols_;
  std::vector<Int> e_;
};

inline NonnegMatrix multiply(const NonnegMatrix& m, const NonnegMatrix& n) {
  if (m.cols() != n.rows())
    fail(errc::dimension_mismatch,
         "inner index sets differ in multiply (" + std::to_string(m.n_cols()) + " vs " +
             std::to_string(n.n_rows()) + " labels, or label order differs)");
  std::size_t a = m.n_rows(), b = m.n_cols(), c = n.n_cols();
  std::vector<Int> e(a * c, 0);
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t k = 0; k < b; ++k) {
      const Int& mik = m.at(i, k);
      if (mik == 0) continue;
      for (std::size_t j = 0; j < c; ++j) e[i * c + j] += mik * n.at(k, j);
    }
  return NonnegMatrix(m.rows(), n.cols(), std::move(e));
}

inline NonnegMatrix power(const NonnegMatrix& m, std::uint64_t k) {
  if (!m.is_square()) fail(errc::not_square, "power of a non-square matrix");
  if (k < 1) fail(errc::invalid_input, "power exponent must be >= 1");
  NonnegMatrix acc = m;
  for (std::uint64_t i = 1; i < k; ++i) acc = multiply(acc, m);
  return acc;
}

/// No zero rows and no zero columns.
inline bool is_essential(const NonnegMatrix& m) {
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    bool nz = false;
    for (std::size_t j = 0; j < m.n_cols(); ++j) nz = nz || m.at(i, j) != 0;
    if (!nz) return false;
  }
  for (std::size_t j = 0; j < m.n_cols(); ++j) {
    bool nz = false;
    for (std::size_t i = 0; i < m.n_rows(); ++i) nz = nz || m.at(i, j) != 0;
    if (!nz) return false;
  }
  return true;
}

/// C = diag(A, B), D = antidiag(R, S) over the disjoint union of the vertex
/// sets, with V labels prefixed "L:" and W labels prefixed "R:". V labels
/// come before W labels.
inline std::pair<NonnegMatrix, NonnegMatrix> block_assemble(const NonnegMatrix& a,
                                                            const NonnegMatrix& b,
                                                            const NonnegMatrix& r,
                                                            const NonnegMatrix& s) {
  if (!a.is_square() || !b.is_square())
    fail(errc::not_square, "block_assemble needs square A and B");
  if (r.rows() != a.rows() || r.cols() != b.rows() || s.rows() != b.rows() ||
      s.cols() != a.rows())
    fail(errc::dimension_mismatch, "R must be VxW and S must be WxV");
  const std::size_t nv = a.n_rows(), nw = b.n_rows(), n = nv + nw;
  std::vector<std::string> labels;
  labels.reserve(n);
  for (const auto& l : a.rows().labels()) labels.push_back("L:" + l);
  for (const auto& l : b.rows().labels()) labels.push_back("R:" + l);
  IndexSet ix(labels);
  std::vector<Int> ce(n * n, 0), de(n * n, 0);
  for (std::size_t i = 0; i < nv; ++i)
    for (std::size_t j = 0; j < nv; ++j) ce[i * n + j] = a.at(i, j);
  for (std::size_t i = 0; i < nw; ++i)
    for (std::size_t j = 0; j < nw; ++j) ce[(nv + i) * n + (nv + j)] = b.at(i, j);
  for (std::size_t i = 0; i < nv; ++i)
    for (std::size_t j = 0; j < nw; ++j) de[i * n + (nv + j)] = r.at(i, j);
  for (std::size_t i = 0; i < nw; ++i)
    for (std::size_t j = 0; j < nv; ++j) de[(nv + i) * n + j] = s.at(i, j);
  return {NonnegMatrix(ix, ix, std::move(ce)), NonnegMatrix(ix, ix, std::move(de))};
}

// JSON schema: { "rows": [labels], "cols": [labels],
//                "entries": [[row-major decimal strings]] }.
// Entries are decimal strings so consumers never truncate at 64 bits.
inline json to_json(const NonnegMatrix& m) {
  json rows = json::array(), cols = json::array(), entries = json::array();
  for (const auto& l : m.rows().labels()) rows.push_back(l);
  for (const auto& l : m.cols().labels()) cols.push_back(l);
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.n_cols(); ++j) row.push_back(m.at(i, j).get_str());
    entries.push_back(std::move(row));
  }
  return json{{"rows", rows}, {"cols", cols}, {"entries", entries}};
}

inline Int int_from_json(const json& v, const std::string& field) {
  try {
    if (v.is_string()) return Int(v.get<std::string>());
    if (v.is_number_unsigned()) return Int(static_cast<unsigned long>(v.get<std::uint64_t>()));
    if (v.is_number_integer()) return Int(static_cast<long>(v.get<std::int64_t>()));
  } catch (const std::exception&) {
  }
  fail(errc::invalid_input, "field '" + field + "' is not a valid integer");
}

inline NonnegMatrix matrix_from_json(const json& j, const std::string& field = "matrix") {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries"))
    fail(errc::invalid_input, "field '" + field + "' must have rows/cols/entries");
  std::vector<std::string> rl, cl;
  for (const auto& v : j.at("rows")) rl.push_back(v.get<std::string>());
  for (const auto& v : j.at("cols")) cl.push_back(v.get<std::string>());
  IndexSet rows(rl), cols(cl);
  const auto& ent = j.at("entries");
  if (!ent.is_array() || ent.size() != rows.size())
    fail(errc::invalid_input, "field '" + field + ".entries' has wrong row count");
  std::vector<Int> e;
  e.reserve(rows.size() * cols.size());
  for (std::size_t i = 0; i < ent.size(); ++i) {
    if (!ent[i].is_array() || ent[i].size() != cols.size())
      fail(errc::invalid_input, "field '" + field + ".entries[" + std::to_string(i) +
                                    "]' has wrong column count");
    for (const auto& v : ent[i]) {
      Int x = int_from_json(v, field + ".entries");
      if (x < 0) fail(errc::invalid_input, "field '" + field + "' has a negative entry");
      e.push_back(std::move(x));
    }
  }
  return NonnegMatrix(std::move(rows), std::move(cols), std::move(e));
}

}  // namespace shifteq

#endif
