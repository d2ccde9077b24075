#ifndef SHIFTEQ_TESTS_CORPUS_HPP
#define SHIFTEQ_TESTS_CORPUS_HPP

// Seeded generators and independent oracles shared by the unit and
// acceptance suites. Oracles deliberately avoid the implementation paths
// they are used to check.

#include <optional>
#include <random>
#include <vector>

#include "shifteq/ck_rep.hpp"
#include "shifteq/invariants.hpp"
#include "shifteq/search.hpp"

namespace shifteq::testsupport {

struct StepSample {
  NonnegMatrix a, b;
  ElementaryStep step;
};

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  long pick(long lo, long hi) {
    return lo + static_cast<long>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  /// Random elementary step with essential endpoints, both entry sums
  /// bounded. Returns nothing when the draw misses; callers loop.
  std::optional<StepSample> step(long max_side, long max_entry_sum, long max_entry = 2) {
    long nv = pick(1, max_side), nw = pick(1, max_side);
    IndexSet vs = IndexSet::numbered(static_cast<std::size_t>(nv), "v");
    IndexSet ws = IndexSet::numbered(static_cast<std::size_t>(nw), "w");
    std::vector<Int> re, se;
    for (long i = 0; i < nv * nw; ++i) re.emplace_back(pick(0, max_entry));
    for (long i = 0; i < nv * nw; ++i) se.emplace_back(pick(0, max_entry));
    NonnegMatrix r(vs, ws, re), s(ws, vs, se);
    NonnegMatrix a = multiply(r, s), b = multiply(s, r);
    if (!is_essential(a) || !is_essential(b)) return std::nullopt;
    if (a.entry_sum() > max_entry_sum || b.entry_sum() > max_entry_sum) return std::nullopt;
    return StepSample{a, b, ElementaryStep{r, s}};
  }

  StepSample step_retry(long max_side, long max_entry_sum, long max_entry = 2) {
    for (int i = 0; i < 100000; ++i) {
      auto s = step(max_side, max_entry_sum, max_entry);
      if (s) return *s;
    }
    fail(errc::invalid_input, "corpus generator starved");
  }

  /// Factors `b` as R'*S' by enumerating trim factorizations at small inner
  /// dimensions and picking one at random; the trivial factorization b*I is
  /// always available as a fallback.
  ElementaryStep factor_of(const NonnegMatrix& b, long max_inner = 3, long bound = 2) {
    std::vector<ElementaryStep> found;
    detail::Ticker t;
    t.cap = 200000;
    detail::SmallMat bm = detail::small_from(b);
    try {
      for (long k = 1; k <= max_inner && found.size() < 40; ++k) {
        detail::FactorizationEnum fe(bm, bound, static_cast<int>(k), nullptr, t);
        fe.run([&](const detail::SmallMat& r, const detail::SmallMat& s) {
          IndexSet inner = IndexSet::numbered(static_cast<std::size_t>(k), "u");
          found.push_back(ElementaryStep{detail::small_to(r, b.rows(), inner),
                                         detail::small_to(s, inner, b.rows())});
          return found.size() >= 40;
        });
      }
    } catch (const detail::AbortBranch&) {
    }
    found.push_back(ElementaryStep{b, NonnegMatrix::identity(b.rows())});
    return found[static_cast<std::size_t>(pick(0, static_cast<long>(found.size()) - 1))];
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// --- independent oracles ---

/// det(tI - A) by signed permutation expansion over Z[t]; ascending
/// coefficients. Exponential; fine for n <= 5.
inline ZPoly char_poly_leibniz(const NonnegMatrix& a) {
  const std::size_t n = a.n_rows();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::vector<Int> acc(n + 1, 0);
  std::sort(perm.begin(), perm.end());
  do {
    int sign = 1;
    {
      std::vector<bool> seen(n, false);
      for (std::size_t i = 0; i < n; ++i) {
        if (seen[i]) continue;
        std::size_t len = 0, j = i;
        while (!seen[j]) {
          seen[j] = true;
          j = perm[j];
          ++len;
        }
        if (len % 2 == 0) sign = -sign;
      }
    }
    // product over i of (t*[i==perm(i)] - A[i][perm(i)])
    std::vector<Int> prod{1};
    for (std::size_t i = 0; i < n; ++i) {
      Int c = -a.at(i, perm[i]);
      std::vector<Int> next(prod.size() + 1, 0);
      for (std::size_t d = 0; d < prod.size(); ++d) {
        next[d] += prod[d] * c;
        if (i == perm[i]) next[d + 1] += prod[d];
      }
      if (i != perm[i]) next.pop_back();
      prod = std::move(next);
    }
    for (std::size_t d = 0; d < prod.size(); ++d)
      acc[d] += sign > 0 ? prod[d] : Int(-prod[d]);
  } while (std::next_permutation(perm.begin(), perm.end()));
  while (acc.size() > 1 && acc.back() == 0) acc.pop_back();
  return ZPoly{acc};
}

/// Signed determinant by permutation expansion; independent of the Bareiss
/// route in the library.
inline Int det_leibniz(const ZMat& m) {
  const std::size_t n = m.nr;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Int acc = 0;
  do {
    int sign = 1;
    std::vector<bool> seen(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      if (seen[i]) continue;
      std::size_t len = 0, j = i;
      while (!seen[j]) {
        seen[j] = true;
        j = perm[j];
        ++len;
      }
      if (len % 2 == 0) sign = -sign;
    }
    Int prod = 1;
    for (std::size_t i = 0; i < n; ++i) prod *= m.at(i, perm[i]);
    acc += sign > 0 ? prod : Int(-prod);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc;
}

/// Brute-force reference for the compatible-iso search. Conceptually this
/// enumerates every quadruple in (psi_A, psi_B, phi_R, phi_S) lex order and
/// returns the first one passing the verifier. Because the first
/// compatibility equation constrains only phi_R and the second only phi_S,
/// the scan over phi_R and phi_S factorizes; each candidate is checked by
/// building its staircase with the library's phi_power and comparing
/// extensionally, a different route from the search's pruned transport.
inline std::optional<CSEWitness> brute_force_compatible(const NonnegMatrix& a,
                                                        const NonnegMatrix& b,
                                                        const SEWitness& w) {
  auto psiA_dom = materialize(PathSpaceSpec({w.R, w.S}));
  auto psiA_cod = materialize(PathSpaceSpec::repeated(a, w.m));
  auto psiB_dom = materialize(PathSpaceSpec({w.S, w.R}));
  auto psiB_cod = materialize(PathSpaceSpec::repeated(b, w.m));
  auto phiR_dom = materialize(PathSpaceSpec({a, w.R}));
  auto phiR_cod = materialize(PathSpaceSpec({w.R, b}));
  auto phiS_dom = materialize(PathSpaceSpec({b, w.S}));
  auto phiS_cod = materialize(PathSpaceSpec({w.S, a}));
  detail::Ticker t;
  std::optional<CSEWitness> found;
  enumerate_srp_bijections(*psiA_dom, *psiA_cod, t, [&](const std::vector<std::uint32_t>& fa) {
    return enumerate_srp_bijections(
        *psiB_dom, *psiB_cod, t, [&](const std::vector<std::uint32_t>& fb) {
          CSEWitness c;
          c.se = w;
          c.psi_A = PathIso(psiA_dom, psiA_cod, fa);
          c.psi_B = PathIso(psiB_dom, psiB_cod, fb);
          PathIso rhs_r = compat_rhs_r(c);
          PathIso rhs_s = compat_rhs_s(c);
          bool got_r = enumerate_srp_bijections(
              *phiR_dom, *phiR_cod, t, [&](const std::vector<std::uint32_t>& fr) {
                PathIso cand(phiR_dom, phiR_cod, fr);
                if (!(phi_power(cand, w.m) == rhs_r)) return false;
                c.phi_R = std::move(cand);
                return true;
              });
          if (!got_r) return false;
          bool got_s = enumerate_srp_bijections(
              *phiS_dom, *phiS_cod, t, [&](const std::vector<std::uint32_t>& fs) {
                PathIso cand(phiS_dom, phiS_cod, fs);
                if (!(phi_power(cand, w.m) == rhs_s)) return false;
                c.phi_S = std::move(cand);
                return true;
              });
          if (!got_s) return false;
          if (!verify_cse(a, b, c)) return false;
          found = std::move(c);
          return true;
        });
  });
  return found;
}

// --- worked pair used across the suites ---

struct WorkedPair {
  NonnegMatrix a1 = NonnegMatrix::square({{1, 1}, {1, 1}});
  IndexSet w = IndexSet::numbered(1, "w");
  NonnegMatrix b = NonnegMatrix::rect({{2}}, w, w);
  NonnegMatrix r;
  NonnegMatrix s;

  WorkedPair()
      : r(NonnegMatrix::rect({{1}, {1}}, a1.rows(), w)),
        s(NonnegMatrix::rect({{1, 1}}, w, a1.rows())) {}

  ElementaryStep step() const { return ElementaryStep{r, s}; }
};

}  // namespace shifteq::testsupport

#endif
