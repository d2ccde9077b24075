#ifndef SHIFTEQ_SEARCH_HPP
#define SHIFTEQ_SEARCH_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "shifteq/equivalences.hpp"

namespace shifteq {

struct SearchBudget {
  std::uint32_t max_inner_dim = 4;
  std::uint64_t entry_bound = 0;  // 0 -> max entry of the input pair, plus one
  std::uint32_t max_lag = 3;
  std::uint32_t max_depth = 4;
  std::uint64_t node_limit = 2'000'000;
  std::int64_t seed = 0;
};

inline json to_json(const SearchBudget& b) {
  return json{{"max_inner_dim", b.max_inner_dim}, {"entry_bound", b.entry_bound},
              {"max_lag", b.max_lag},             {"max_depth", b.max_depth},
              {"node_limit", b.node_limit},       {"seed", b.seed}};
}

inline SearchBudget budget_from_json(const json& j) {
  SearchBudget b;
  if (!j.is_object()) fail(errc::invalid_input, "budget must be an object");
  if (j.contains("max_inner_dim")) b.max_inner_dim = j.at("max_inner_dim").get<std::uint32_t>();
  if (j.contains("entry_bound")) b.entry_bound = j.at("entry_bound").get<std::uint64_t>();
  if (j.contains("max_lag")) b.max_lag = j.at("max_lag").get<std::uint32_t>();
  if (j.contains("max_depth")) b.max_depth = j.at("max_depth").get<std::uint32_t>();
  if (j.contains("node_limit")) b.node_limit = j.at("node_limit").get<std::uint64_t>();
  if (j.contains("seed")) b.seed = j.at("seed").get<std::int64_t>();
  if (b.max_inner_dim < 1 || b.max_lag < 1 || b.node_limit < 1)
    fail(errc::invalid_input, "budget bounds must be >= 1");
  return b;
}

enum class SearchStatus { Found, ExhaustedNone, BudgetExceeded };

inline const char* status_name(SearchStatus s) {
  switch (s) {
    case SearchStatus::Found: return "found";
    case SearchStatus::ExhaustedNone: return "exhausted-none";
    case SearchStatus::BudgetExceeded: return "budget-exceeded";
  }
  return "?";
}

template <class T>
struct SearchResult {
  SearchStatus status = SearchStatus::ExhaustedNone;
  std::optional<T> witness;
  std::uint64_t nodes = 0;
  // When true, an exhausted-none outcome is a proof of nonexistence: the
  // searched bounds provably contain every possible witness.
  bool bound_dominates = false;
};

/// Line-delimited JSON progress events go through this sink (the CLI points
/// it at stderr). Never part of a certificate.
inline std::function<void(const json&)>& progress_sink() {
  static std::function<void(const json&)> sink;
  return sink;
}

inline void emit_progress(const json& j) {
  static std::mutex mu;
  if (!progress_sink()) return;
  std::lock_guard<std::mutex> lk(mu);
  if (progress_sink()) progress_sink()(j);
}

namespace detail {

struct AbortBranch {};

struct Ticker {
  std::uint64_t cap = UINT64_MAX;
  const std::atomic<bool>* cancel = nullptr;
  const char* tag = "";
  std::uint64_t nodes = 0;
  bool truncated = false;

  void tick() {
    ++nodes;
    if (nodes > cap) {
      truncated = true;
      throw AbortBranch{};
    }
    if ((nodes & 0xFFFF) == 0) {
      emit_progress(json{{"event", "progress"}, {"search", tag}, {"nodes", nodes}});
      if (cancel && cancel->load(std::memory_order_relaxed)) {
        truncated = true;
        throw AbortBranch{};
      }
    }
  }
};

template <class T>
struct BranchOutcome {
  std::uint64_t nodes = 0;
  bool truncated = false;
  std::optional<std::pair<std::uint64_t, T>> solution;  // node index at discovery
  std::exception_ptr error;
};

/// Runs the top-level branches of a lex-ordered search, possibly on several
/// workers, and reconstructs exactly the outcome of the sequential search:
/// per-branch node counts are concatenated in branch order, the node limit
/// applies to the cumulative count, and the first in-budget solution wins.
/// The reported result is therefore independent of scheduling.
template <class T, class Explore>
SearchResult<T> run_branches(std::size_t n_branches, unsigned workers,
                             std::uint64_t node_limit, Explore&& explore) {
  if (workers < 1) workers = 1;
  std::vector<BranchOutcome<T>> out(n_branches);
  std::vector<char> done(n_branches, 0);
  std::atomic<bool> cancel{false};
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::optional<SearchResult<T>> decision;
  std::exception_ptr pending_error;
  std::size_t merged = 0;
  std::uint64_t acc = 0;

  auto merge_prefix = [&]() {
    while (merged < n_branches && done[merged]) {
      BranchOutcome<T>& rec = out[merged];
      if (rec.error) {
        // exactly what the sequential search would hit at this point
        pending_error = rec.error;
        cancel.store(true);
        return;
      }
      if (rec.solution) {
        std::uint64_t global = acc + rec.solution->first;
        if (global <= node_limit)
          decision = SearchResult<T>{SearchStatus::Found,
                                     std::move(rec.solution->second), global, false};
        else
          decision = SearchResult<T>{SearchStatus::BudgetExceeded, std::nullopt,
                                     node_limit, false};
        cancel.store(true);
        return;
      }
      if (rec.truncated || acc + rec.nodes > node_limit) {
        decision =
            SearchResult<T>{SearchStatus::BudgetExceeded, std::nullopt, node_limit, false};
        cancel.store(true);
        return;
      }
      acc += rec.nodes;
      ++merged;
    }
  };

  auto work = [&]() {
    while (!cancel.load()) {
      std::size_t b = next.fetch_add(1);
      if (b >= n_branches) return;
      BranchOutcome<T> rec;
      try {
        rec = explore(b, node_limit, cancel);
      } catch (...) {
        rec.error = std::current_exception();
      }
      std::lock_guard<std::mutex> lk(mu);
      out[b] = std::move(rec);
      done[b] = 1;
      if (!decision && !pending_error) merge_prefix();
    }
  };

  std::vector<std::thread> pool;
  for (unsigned i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  std::lock_guard<std::mutex> lk(mu);
  if (!decision && !pending_error) merge_prefix();
  if (pending_error) std::rethrow_exception(pending_error);
  if (decision) return std::move(*decision);
  return SearchResult<T>{SearchStatus::ExhaustedNone, std::nullopt, acc, false};
}

/// Dense int64 matrix for the enumeration cores.
struct SmallMat {
  int nr = 0, nc = 0;
  std::vector<long long> e;

  SmallMat() = default;
  SmallMat(int r, int c) : nr(r), nc(c), e(static_cast<std::size_t>(r) * c, 0) {}
  long long& at(int i, int j) { return e[static_cast<std::size_t>(i) * nc + j]; }
  long long at(int i, int j) const { return e[static_cast<std::size_t>(i) * nc + j]; }

  friend bool operator==(const SmallMat&, const SmallMat&) = default;
};

inline SmallMat small_from(const NonnegMatrix& m) {
  SmallMat s(static_cast<int>(m.n_rows()), static_cast<int>(m.n_cols()));
  for (std::size_t i = 0; i < m.n_rows(); ++i)
    for (std::size_t j = 0; j < m.n_cols(); ++j) {
      const Int& x = m.at(i, j);
      if (!x.fits_slong_p() || x.get_si() > (1LL << 40))
        fail(errc::invalid_input, "search requires desk-scale entries");
      s.at(static_cast<int>(i), static_cast<int>(j)) = x.get_si();
    }
  return s;
}

inline NonnegMatrix small_to(const SmallMat& s, const IndexSet& rows, const IndexSet& cols) {
  std::vector<Int> e;
  e.reserve(s.e.size());
  for (long long x : s.e) e.emplace_back(static_cast<long>(x));
  return NonnegMatrix(rows, cols, std::move(e));
}

inline long long resolve_bound(const NonnegMatrix& a, const NonnegMatrix& b,
                               const SearchBudget& budget) {
  long long bound;
  if (budget.entry_bound != 0) {
    bound = static_cast<long long>(budget.entry_bound);
  } else {
    Int m = a.max_entry();
    if (b.max_entry() > m) m = b.max_entry();
    if (!m.fits_slong_p()) fail(errc::invalid_input, "search requires desk-scale entries");
    bound = m.get_si() + 1;
  }
  if (bound < 1 || bound > 1'000'000)
    fail(errc::invalid_input, "entry bound out of the supported range [1, 1e6]");
  return bound;
}

/// Enumerates factorizations M == R*S with entries in [0, bound], in lex
/// order on (R, S) read row-major. With `target`, S*R == target is enforced.
/// Without a target only trim factorizations are reported (no zero column in
/// R, no zero row in S); a non-trim move factors through a smaller inner
/// dimension that the caller enumerates separately.
/// The visitor returns true to stop the whole enumeration.
class FactorizationEnum {
 public:
  FactorizationEnum(const SmallMat& m, long long bound, int k, const SmallMat* target,
                    Ticker& t)
      : m_(m), bound_(bound), k_(k), target_(target), t_(t), n_(m.nr),
        r_(m.nr, k), s_(k, m.nr),
        acc_(static_cast<std::size_t>(m.nr) * m.nr, 0),
        suffix_(static_cast<std::size_t>(m.nr) * (k + 1), 0) {}

  // pin, when >= 0, fixes R[0][0] so top-level branches can split on it
  bool run(const std::function<bool(const SmallMat&, const SmallMat&)>& visit,
           long long pin = -1) {
    visit_ = &visit;
    pin_ = pin;
    return fill_r(0);
  }

 private:
  bool fill_r(int pos) {
    if (pos == n_ * k_) return start_s();
    const int v = pos / k_, w = pos % k_;
    const long long lo = (pos == 0 && pin_ >= 0) ? pin_ : 0;
    const long long hi = (pos == 0 && pin_ >= 0) ? pin_ : bound_;
    for (long long val = lo; val <= hi; ++val) {
      t_.tick();
      r_.at(v, w) = val;
      if (w == k_ - 1 && !row_ok(v)) continue;
      if (fill_r(pos + 1)) return true;
    }
    r_.at(v, w) = 0;
    return false;
  }

  bool row_ok(int v) const {
    long long row_sum = 0;
    bool row_nz = false, m_row_nz = false;
    for (int j = 0; j < k_; ++j) {
      row_sum += r_.at(v, j);
      row_nz = row_nz || r_.at(v, j) != 0;
    }
    for (int u = 0; u < n_; ++u) {
      m_row_nz = m_row_nz || m_.at(v, u) != 0;
      if (m_.at(v, u) > row_sum * bound_) return false;
    }
    return !(m_row_nz && !row_nz);
  }

  bool start_s() {
    for (int w = 0; w < k_; ++w) {
      bool col_nz = false;
      for (int v = 0; v < n_; ++v) col_nz = col_nz || r_.at(v, w) != 0;
      if (!col_nz) {
        if (!target_) return false;  // trim policy
        // a zero column of R forces column w of S*R to zero
        for (int wp = 0; wp < k_; ++wp)
          if (target_->at(wp, w) != 0) return false;
      }
    }
    for (int v = 0; v < n_; ++v) {
      suffix_[static_cast<std::size_t>(v) * (k_ + 1) + k_] = 0;
      for (int w = k_; w-- > 0;)
        suffix_[static_cast<std::size_t>(v) * (k_ + 1) + w] =
            suffix_[static_cast<std::size_t>(v) * (k_ + 1) + w + 1] + r_.at(v, w);
    }
    std::fill(acc_.begin(), acc_.end(), 0);
    return fill_s(0);
  }

  bool fill_s(int pos) {
    if (pos == k_ * n_) return (*visit_)(r_, s_);
    const int w = pos / n_, vp = pos % n_;
    const bool last_row = (w == k_ - 1);
    for (long long val = 0; val <= bound_; ++val) {
      t_.tick();
      bool ok = true;
      for (int v = 0; v < n_ && ok; ++v) {
        long long a = acc_[static_cast<std::size_t>(v) * n_ + vp] + r_.at(v, w) * val;
        if (a > m_.at(v, vp)) ok = false;
        else if (last_row && a != m_.at(v, vp)) ok = false;
        else if (a + suffix_[static_cast<std::size_t>(v) * (k_ + 1) + w + 1] * bound_ <
                 m_.at(v, vp))
          ok = false;
      }
      if (!ok) {
        // acc strictly increases with val within a row; once over, done
        bool overshoot = false;
        for (int v = 0; v < n_; ++v)
          if (acc_[static_cast<std::size_t>(v) * n_ + vp] + r_.at(v, w) * val >
              m_.at(v, vp))
            overshoot = true;
        if (overshoot) break;
        continue;
      }
      s_.at(w, vp) = val;
      if (vp == n_ - 1 && !s_row_ok(w)) {
        s_.at(w, vp) = 0;
        continue;
      }
      for (int v = 0; v < n_; ++v)
        acc_[static_cast<std::size_t>(v) * n_ + vp] += r_.at(v, w) * val;
      if (fill_s(pos + 1)) return true;
      for (int v = 0; v < n_; ++v)
        acc_[static_cast<std::size_t>(v) * n_ + vp] -= r_.at(v, w) * val;
      s_.at(w, vp) = 0;
    }
    return false;
  }

  bool s_row_ok(int w) const {
    if (target_) {
      for (int wp = 0; wp < k_; ++wp) {
        long long x = 0;
        for (int v = 0; v < n_; ++v) x += s_.at(w, v) * r_.at(v, wp);
        if (x != target_->at(w, wp)) return false;
      }
      return true;
    }
    for (int v = 0; v < n_; ++v)
      if (s_.at(w, v) != 0) return true;
    return false;  // trim policy: no zero row of S
  }

  const SmallMat& m_;
  long long bound_;
  int k_;
  const SmallMat* target_;
  Ticker& t_;
  int n_;
  SmallMat r_, s_;
  std::vector<long long> acc_;
  std::vector<long long> suffix_;
  const std::function<bool(const SmallMat&, const SmallMat&)>* visit_ = nullptr;
  long long pin_ = -1;
};

/// Canonical key of a square matrix under simultaneous row/column
/// permutations: the minimum row-major serialization. Exponential in n;
/// intended for n <= 8.
inline std::string canonical_key(const SmallMat& m) {
  const int n = m.nr;
  if (n > 8) fail(errc::invalid_input, "canonical dedup supports up to 8 vertices");
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::string best;
  do {
    std::string cur = std::to_string(n) + ":";
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        cur += std::to_string(m.at(perm[i], perm[j]));
        cur += ',';
      }
    if (best.empty() || cur < best) best = cur;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Incremental integer linear CSP: variables in [0, bound], equations
/// const + sum(coeff * var) == 0, pruned by interval feasibility.
class LinearCsp {
 public:
  LinearCsp(int nvars, long long bound) : nvars_(nvars), bound_(bound), var_terms_(nvars) {}

  void add_equation(long long constant, const std::map<int, long long>& terms) {
    int eq = static_cast<int>(eqs_.size());
    Eq e;
    e.cur = constant;
    for (const auto& [var, coeff] : terms) {
      if (coeff == 0) continue;
      var_terms_[var].emplace_back(eq, coeff);
      if (coeff > 0)
        e.pos_cap += coeff * bound_;
      else
        e.neg_cap += coeff * bound_;
    }
    eqs_.push_back(e);
  }

  /// Depth-first over variables in index order, values ascending. Calls
  /// visit(values) on every full feasible assignment; visit returns true to
  /// stop. Returns true when stopped.
  bool solve(Ticker& t, std::vector<long long>& values,
             const std::function<bool(const std::vector<long long>&)>& visit) {
    values.assign(nvars_, 0);
    return dfs(0, t, values, visit);
  }

 private:
  struct Eq {
    long long cur = 0;
    long long pos_cap = 0;
    long long neg_cap = 0;
  };

  bool feasible(const Eq& e) const { return e.cur + e.neg_cap <= 0 && 0 <= e.cur + e.pos_cap; }

  bool dfs(int var, Ticker& t, std::vector<long long>& values,
           const std::function<bool(const std::vector<long long>&)>& visit) {
    if (var == nvars_) return visit(values);
    for (long long val = 0; val <= bound_; ++val) {
      t.tick();
      bool ok = true;
      for (const auto& [eq, coeff] : var_terms_[var]) {
        Eq& e = eqs_[eq];
        e.cur += coeff * val;
        if (coeff > 0)
          e.pos_cap -= coeff * bound_;
        else
          e.neg_cap -= coeff * bound_;
      }
      for (const auto& [eq, coeff] : var_terms_[var]) ok = ok && feasible(eqs_[eq]);
      if (ok) {
        values[var] = val;
        if (dfs(var + 1, t, values, visit)) return true;
        values[var] = 0;
      }
      for (const auto& [eq, coeff] : var_terms_[var]) {
        Eq& e = eqs_[eq];
        e.cur -= coeff * val;
        if (coeff > 0)
          e.pos_cap += coeff * bound_;
        else
          e.neg_cap += coeff * bound_;
      }
    }
    return false;
  }

  int nvars_;
  long long bound_;
  std::vector<Eq> eqs_;
  std::vector<std::vector<std::pair<int, long long>>> var_terms_;
};

}  // namespace detail

/// Bounded lex-first search for an elementary step A == R*S, B == S*R.
/// Exhausted-none at entry bound >= max entry of A and B is a proof: for
/// essential pairs, R entries are bounded by max(A) and S entries by max(B).
inline SearchResult<ElementaryStep> search_elementary(const NonnegMatrix& a,
                                                      const NonnegMatrix& b,
                                                      const SearchBudget& budget,
                                                      unsigned workers = 1) {
  if (!a.is_square() || !b.is_square())
    fail(errc::invalid_input, "search_elementary needs square matrices");
  if (!is_essential(a) || !is_essential(b))
    fail(errc::invalid_input, "search_elementary needs essential matrices");
  detail::SmallMat av = detail::small_from(a), bv = detail::small_from(b);
  const long long bound = detail::resolve_bound(a, b, budget);
  long long needed = 0;
  for (long long x : av.e) needed = std::max(needed, x);
  for (long long x : bv.e) needed = std::max(needed, x);

  auto explore = [&](std::size_t branch, std::uint64_t cap,
                     const std::atomic<bool>& cancel) {
    detail::BranchOutcome<ElementaryStep> out;
    detail::Ticker t{cap, &cancel, "elementary"};
    try {
      detail::FactorizationEnum fe(av, bound, bv.nr, &bv, t);
      fe.run(
          [&](const detail::SmallMat& r, const detail::SmallMat& s) {
            ElementaryStep step{detail::small_to(r, a.rows(), b.rows()),
                                detail::small_to(s, b.rows(), a.rows())};
            // exact arithmetic re-verification; pruning is never trusted
            if (multiply(step.R, step.S) != a || multiply(step.S, step.R) != b) return false;
            out.solution = {t.nodes, std::move(step)};
            return true;
          },
          static_cast<long long>(branch));
    } catch (detail::AbortBranch&) {
    }
    out.nodes = t.nodes;
    out.truncated = t.truncated;
    return out;
  };

  auto res = detail::run_branches<ElementaryStep>(static_cast<std::size_t>(bound) + 1,
                                                  workers, budget.node_limit, explore);
  res.bound_dominates = bound >= needed;
  return res;
}

/// Iterative-deepening search for a chain of elementary moves from A to B.
/// States are deduplicated by permutation-canonical form; reaching the
/// target up to a permutation is closed by one explicit permutation step.
inline SearchResult<SSEChain> search_sse_chain(const NonnegMatrix& a, const NonnegMatrix& b,
                                               const SearchBudget& budget,
                                               unsigned workers = 1) {
  (void)workers;  // single-branch search; result is schedule-independent anyway
  if (!a.is_square() || !b.is_square())
    fail(errc::invalid_input, "search_sse_chain needs square matrices");
  if (!is_essential(a) || !is_essential(b))
    fail(errc::invalid_input, "search_sse_chain needs essential matrices");
  if (a.n_rows() > 8 || b.n_rows() > 8 || budget.max_inner_dim > 8)
    fail(errc::invalid_input, "search_sse_chain canonical dedup supports up to 8 vertices");
  detail::SmallMat av = detail::small_from(a), bv = detail::small_from(b);
  const long long bound = detail::resolve_bound(a, b, budget);
  const std::string target_key = detail::canonical_key(bv);

  auto reconstruct = [&](const std::vector<std::pair<detail::SmallMat, detail::SmallMat>>&
                             raw) {
    SSEChain chain;
    chain.start = a;
    IndexSet cur = a.rows();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const auto& [r, s] = raw[i];
      IndexSet inner = (i + 1 == raw.size())
                           ? b.rows()
                           : IndexSet::numbered(static_cast<std::size_t>(r.nc),
                                                "x" + std::to_string(i) + "_");
      chain.steps.push_back(ElementaryStep{detail::small_to(r, cur, inner),
                                           detail::small_to(s, inner, cur)});
      cur = inner;
    }
    if (chain.validate() != b)
      fail(errc::type_check_failure, "reconstructed chain fails validation");
    return chain;
  };

  auto explore = [&](std::size_t, std::uint64_t cap, const std::atomic<bool>& cancel) {
    detail::BranchOutcome<SSEChain> out;
    detail::Ticker t{cap, &cancel, "sse-chain"};
    try {
      t.tick();
      if (a == b) {
        out.solution = {t.nodes, SSEChain{a, {}}};
      } else {
        std::vector<std::pair<detail::SmallMat, detail::SmallMat>> steps;
        std::map<std::string, std::uint32_t> visited;

        // permutation closing the gap between a canonical-equal state and B
        auto close_with_permutation = [&](const detail::SmallMat& m) -> bool {
          const int n = m.nr;
          if (n != bv.nr) return false;
          std::vector<int> sigma(n);
          for (int i = 0; i < n; ++i) sigma[i] = i;
          do {
            bool match = true;
            for (int i = 0; i < n && match; ++i)
              for (int j = 0; j < n && match; ++j)
                if (m.at(sigma[i], sigma[j]) != bv.at(i, j)) match = false;
            if (match) {
              detail::SmallMat p(n, n), pm(n, n);
              for (int i = 0; i < n; ++i) p.at(sigma[i], i) = 1;
              for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) pm.at(i, j) = m.at(sigma[i], j);
              steps.emplace_back(p, pm);
              return true;
            }
          } while (std::next_permutation(sigma.begin(), sigma.end()));
          return false;
        };

        std::function<bool(const detail::SmallMat&, std::uint32_t, std::uint32_t)> dfs =
            [&](const detail::SmallMat& m, std::uint32_t depth,
                std::uint32_t limit) -> bool {
          t.tick();
          if (depth > 0 && m == bv) return true;
          if (depth + 1 <= limit && detail::canonical_key(m) == target_key &&
              close_with_permutation(m))
            return true;
          if (depth == limit) return false;
          std::string key = detail::canonical_key(m);
          auto it = visited.find(key);
          if (it != visited.end() && it->second <= depth) return false;
          visited[key] = depth;
          for (std::uint32_t k = 1; k <= budget.max_inner_dim; ++k) {
            detail::FactorizationEnum fe(m, bound, static_cast<int>(k), nullptr, t);
            bool found = fe.run([&](const detail::SmallMat& r, const detail::SmallMat& s) {
              detail::SmallMat succ(static_cast<int>(k), static_cast<int>(k));
              for (int w = 0; w < static_cast<int>(k); ++w)
                for (int wp = 0; wp < static_cast<int>(k); ++wp) {
                  long long x = 0;
                  for (int v = 0; v < m.nr; ++v) x += s.at(w, v) * r.at(v, wp);
                  succ.at(w, wp) = x;
                }
              steps.emplace_back(r, s);
              if (dfs(succ, depth + 1, limit)) return true;
              steps.pop_back();
              return false;
            });
            if (found) return true;
          }
          return false;
        };

        for (std::uint32_t limit = 1; limit <= budget.max_depth; ++limit) {
          visited.clear();
          steps.clear();
          emit_progress(json{{"event", "progress"},
                             {"search", "sse-chain"},
                             {"depth", limit},
                             {"nodes", t.nodes},
                             {"frontier", visited.size()}});
          if (dfs(av, 0, limit)) {
            out.solution = {t.nodes, reconstruct(steps)};
            break;
          }
        }
      }
    } catch (detail::AbortBranch&) {
    }
    out.nodes = t.nodes;
    out.truncated = t.truncated;
    return out;
  };

  return detail::run_branches<SSEChain>(1, 1, budget.node_limit, explore);
}

/// Lex-first backtracking for a full SE witness (m, R, S): R is solved
/// against the linear system A*R == R*B, then S against S*A == B*S,
/// R*S == A^m and S*R == B^m, all with interval forward-checking.
inline SearchResult<SEWitness> search_se_witness(const NonnegMatrix& a,
                                                 const NonnegMatrix& b,
                                                 const SearchBudget& budget,
                                                 unsigned workers = 1) {
  if (!a.is_square() || !b.is_square())
    fail(errc::invalid_input, "search_se_witness needs square matrices");
  if (!is_essential(a) || !is_essential(b))
    fail(errc::invalid_input, "search_se_witness needs essential matrices");
  detail::SmallMat av = detail::small_from(a), bv = detail::small_from(b);
  const long long bound = detail::resolve_bound(a, b, budget);
  const int nv = av.nr, nw = bv.nr;

  // proof bound for lag m: R <= max(A^m), S <= max(B^m) for essential pairs
  Int needed = 0;
  for (std::uint32_t m = 1; m <= budget.max_lag; ++m) {
    Int ma = power(a, m).max_entry(), mb = power(b, m).max_entry();
    if (ma > needed) needed = ma;
    if (mb > needed) needed = mb;
  }

  auto explore = [&](std::size_t branch, std::uint64_t cap,
                     const std::atomic<bool>& cancel) {
    const std::uint32_t m = static_cast<std::uint32_t>(branch) + 1;
    detail::BranchOutcome<SEWitness> out;
    detail::Ticker t{cap, &cancel, "se-witness"};
    try {
      detail::SmallMat am = detail::small_from(power(a, m));
      detail::SmallMat bm = detail::small_from(power(b, m));
      auto rvar = [&](int v, int w) { return v * nw + w; };
      auto svar = [&](int w, int v) { return w * nv + v; };

      detail::LinearCsp rcsp(nv * nw, bound);
      for (int v = 0; v < nv; ++v)
        for (int w = 0; w < nw; ++w) {
          std::map<int, long long> terms;
          for (int u = 0; u < nv; ++u) terms[rvar(u, w)] += av.at(v, u);
          for (int u = 0; u < nw; ++u) terms[rvar(v, u)] -= bv.at(u, w);
          rcsp.add_equation(0, terms);
        }

      std::vector<long long> rv, sv;
      rcsp.solve(t, rv, [&](const std::vector<long long>& rvals) {
        detail::LinearCsp scsp(nw * nv, bound);
        for (int w = 0; w < nw; ++w)
          for (int v = 0; v < nv; ++v) {
            std::map<int, long long> terms;  // (S*A - B*S)[w][v] == 0
            for (int u = 0; u < nv; ++u) terms[svar(w, u)] += av.at(u, v);
            for (int u = 0; u < nw; ++u) terms[svar(u, v)] -= bv.at(w, u);
            scsp.add_equation(0, terms);
          }
        for (int v = 0; v < nv; ++v)
          for (int vp = 0; vp < nv; ++vp) {
            std::map<int, long long> terms;  // (R*S)[v][vp] == A^m[v][vp]
            for (int w = 0; w < nw; ++w) terms[svar(w, vp)] += rvals[rvar(v, w)];
            scsp.add_equation(-am.at(v, vp), terms);
          }
        for (int w = 0; w < nw; ++w)
          for (int wp = 0; wp < nw; ++wp) {
            std::map<int, long long> terms;  // (S*R)[w][wp] == B^m[w][wp]
            for (int v = 0; v < nv; ++v) terms[svar(w, v)] += rvals[rvar(v, wp)];
            scsp.add_equation(-bm.at(w, wp), terms);
          }
        return scsp.solve(t, sv, [&](const std::vector<long long>& svals) {
          detail::SmallMat r(nv, nw), s(nw, nv);
          for (int v = 0; v < nv; ++v)
            for (int w = 0; w < nw; ++w) r.at(v, w) = rvals[rvar(v, w)];
          for (int w = 0; w < nw; ++w)
            for (int v = 0; v < nv; ++v) s.at(w, v) = svals[svar(w, v)];
          SEWitness wit{m, detail::small_to(r, a.rows(), b.rows()),
                        detail::small_to(s, b.rows(), a.rows())};
          if (!verify_se(a, b, wit)) return false;  // exact re-verification
          out.solution = {t.nodes, std::move(wit)};
          return true;
        });
      });
    } catch (detail::AbortBranch&) {
    }
    out.nodes = t.nodes;
    out.truncated = t.truncated;
    return out;
  };

  auto res = detail::run_branches<SEWitness>(budget.max_lag, workers, budget.node_limit,
                                             explore);
  res.bound_dominates = Int(static_cast<long>(bound)) >= needed;
  return res;
}

/// Enumerates all source/range-preserving bijections dom -> cod in
/// lexicographic order of the forward image sequence. The visitor returns
/// true to stop. Returns true when stopped.
inline bool enumerate_srp_bijections(
    const PathSpace& dom, const PathSpace& cod, detail::Ticker& t,
    const std::function<bool(const std::vector<std::uint32_t>&)>& visit) {
  if (dom.size() != cod.size()) return false;
  const std::size_t n = dom.size();
  std::vector<const std::vector<std::uint32_t>*> cands(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    cands[i] = &cod.block(dom.source_of(i), dom.range_of(i));
    if (cands[i]->size() != dom.block(dom.source_of(i), dom.range_of(i)).size()) return false;
  }
  std::vector<std::uint32_t> fwd(n, UINT32_MAX);
  std::vector<char> used(n, 0);
  std::function<bool(std::uint32_t)> rec = [&](std::uint32_t i) -> bool {
    if (i == n) return visit(fwd);
    for (std::uint32_t c : *cands[i]) {
      if (used[c]) continue;
      t.tick();
      fwd[i] = c;
      used[c] = 1;
      if (rec(i + 1)) return true;
      used[c] = 0;
    }
    fwd[i] = UINT32_MAX;
    return false;
  };
  return rec(0);
}

namespace detail {

/// Backtracking for a two-factor iso phi : E_X x E_Y -> E_Y x E_Z whose
/// staircase phi^(m) equals a given map. Assignments are pruned through the
/// transport chains: a domain path of E_X^m x E_Y is pushed through the
/// staircase as far as assignments exist and compared on completion.
class StaircaseSolver {
 public:
  StaircaseSolver(const PathSpace& dom2, const PathSpace& cod2, const PathIso& rhs,
                  std::uint64_t m)
      : dom2_(dom2), cod2_(cod2), m_(m) {
    const EdgeTable& xt = dom2.table(0);
    const EdgeTable& yt = dom2.table(1);
    pair_index_.assign(xt.size(), std::vector<std::int32_t>(yt.size(), -1));
    for (std::uint32_t i = 0; i < dom2.size(); ++i)
      pair_index_[dom2.path(i)[0]][dom2.path(i)[1]] = static_cast<std::int32_t>(i);
    const PathSpace& u = rhs.domain();
    chains_.reserve(u.size());
    for (std::uint32_t i = 0; i < u.size(); ++i)
      chains_.push_back({u.path(i), rhs.codomain().path(rhs.forward()[i])});
  }

  std::optional<std::vector<std::uint32_t>> solve(Ticker& t) {
    std::optional<std::vector<std::uint32_t>> found;
    enumerate_with_pruning(t, [&](const std::vector<std::uint32_t>& fwd) {
      found = fwd;
      return true;
    });
    return found;
  }

 private:
  bool chains_consistent(const std::vector<std::uint32_t>& fwd) const {
    PathKey cur;
    for (const auto& [u, target] : chains_) {
      cur = u;
      bool stalled = false;
      for (std::uint64_t step = 1; step <= m_; ++step) {
        std::size_t pos = m_ - step;
        std::int32_t d = pair_index_[cur[pos]][cur[pos + 1]];
        if (d < 0) return false;  // transport left the composable set: impossible
        std::uint32_t img = fwd[static_cast<std::uint32_t>(d)];
        if (img == UINT32_MAX) {
          stalled = true;
          break;
        }
        const PathKey& ip = cod2_.path(img);
        cur[pos] = ip[0];
        cur[pos + 1] = ip[1];
      }
      if (!stalled && cur != target) return false;
    }
    return true;
  }

  void enumerate_with_pruning(
      Ticker& t, const std::function<bool(const std::vector<std::uint32_t>&)>& visit) {
    const std::size_t n = dom2_.size();
    if (n != cod2_.size()) return;
    std::vector<const std::vector<std::uint32_t>*> cands(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      cands[i] = &cod2_.block(dom2_.source_of(i), dom2_.range_of(i));
      if (cands[i]->size() != dom2_.block(dom2_.source_of(i), dom2_.range_of(i)).size())
        return;
    }
    std::vector<std::uint32_t> fwd(n, UINT32_MAX);
    std::vector<char> used(n, 0);
    std::function<bool(std::uint32_t)> rec = [&](std::uint32_t i) -> bool {
      if (i == n) return visit(fwd);
      for (std::uint32_t c : *cands[i]) {
        if (used[c]) continue;
        t.tick();
        fwd[i] = c;
        used[c] = 1;
        if (chains_consistent(fwd) && rec(i + 1)) return true;
        used[c] = 0;
      }
      fwd[i] = UINT32_MAX;
      return false;
    };
    rec(0);
  }

  const PathSpace& dom2_;
  const PathSpace& cod2_;
  std::uint64_t m_;
  std::vector<std::vector<std::int32_t>> pair_index_;
  std::vector<std::pair<PathKey, PathKey>> chains_;
};

}  // namespace detail

/// CSP over blockwise bijections for a compatible quadruple on top of a
/// verified SE witness. psi_A and psi_B are enumerated lexicographically;
/// phi_R and phi_S are forced at lag 1 and otherwise solved by staircase
/// backtracking. The returned witness is the lexicographically first
/// solution in (psi_A, psi_B, phi_R, phi_S) order, matching brute-force
/// enumeration.
inline SearchResult<CSEWitness> search_compatible_iso(const NonnegMatrix& a,
                                                      const NonnegMatrix& b,
                                                      const SEWitness& w,
                                                      const SearchBudget& budget,
                                                      unsigned workers = 1) {
  (void)workers;  // single-branch search
  if (!verify_se(a, b, w))
    fail(errc::invalid_input, "search_compatible_iso needs a valid SE witness");

  auto psiA_dom = materialize(PathSpaceSpec({w.R, w.S}));
  auto psiA_cod = materialize(PathSpaceSpec::repeated(a, w.m));
  auto psiB_dom = materialize(PathSpaceSpec({w.S, w.R}));
  auto psiB_cod = materialize(PathSpaceSpec::repeated(b, w.m));
  auto phiR_dom = materialize(PathSpaceSpec({a, w.R}));
  auto phiR_cod = materialize(PathSpaceSpec({w.R, b}));
  auto phiS_dom = materialize(PathSpaceSpec({b, w.S}));
  auto phiS_cod = materialize(PathSpaceSpec({w.S, a}));

  auto explore = [&](std::size_t, std::uint64_t cap, const std::atomic<bool>& cancel) {
    detail::BranchOutcome<CSEWitness> out;
    detail::Ticker t{cap, &cancel, "compatible-iso"};
    try {
      enumerate_srp_bijections(*psiA_dom, *psiA_cod, t, [&](const std::vector<std::uint32_t>& fa) {
        PathIso psi_a(psiA_dom, psiA_cod, fa);
        return enumerate_srp_bijections(
            *psiB_dom, *psiB_cod, t, [&](const std::vector<std::uint32_t>& fb) {
              PathIso psi_b(psiB_dom, psiB_cod, fb);
              CSEWitness c;
              c.se = w;
              c.psi_A = psi_a;
              c.psi_B = psi_b;
              PathIso rhs_r = compat_rhs_r(c);
              PathIso rhs_s = compat_rhs_s(c);
              if (w.m == 1) {
                c.phi_R = rhs_r;
                c.phi_S = rhs_s;
              } else {
                detail::StaircaseSolver sr(*phiR_dom, *phiR_cod, rhs_r, w.m);
                auto fr = sr.solve(t);
                if (!fr) return false;
                detail::StaircaseSolver ss(*phiS_dom, *phiS_cod, rhs_s, w.m);
                auto fs = ss.solve(t);
                if (!fs) return false;
                c.phi_R = PathIso(phiR_dom, phiR_cod, *fr);
                c.phi_S = PathIso(phiS_dom, phiS_cod, *fs);
              }
              if (!verify_cse(a, b, c)) return false;  // pruning is never trusted
              out.solution = {t.nodes, std::move(c)};
              return true;
            });
      });
    } catch (detail::AbortBranch&) {
    }
    out.nodes = t.nodes;
    out.truncated = t.truncated;
    return out;
  };

  auto res = detail::run_branches<CSEWitness>(1, 1, budget.node_limit, explore);
  // the quadruple space is finite and fully enumerated: exhaustion is a proof
  res.bound_dominates = true;
  return res;
}

}  // namespace shifteq

#endif
