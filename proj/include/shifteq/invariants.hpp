#ifndef SHIFTEQ_INVARIANTS_HPP
#define SHIFTEQ_INVARIANTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shifteq/matrix.hpp"

namespace shifteq {

/// Dense matrix over signed arbitrary-precision integers; workhorse for the
/// invariant computations (char poly, Smith form, lattice bases).
struct ZMat {
  std::size_t nr = 0, nc = 0;
  std::vector<Int> e;

  ZMat() = default;
  ZMat(std::size_t r, std::size_t c) : nr(r), nc(c), e(r * c, 0) {}

  Int& at(std::size_t i, std::size_t j) { return e[i * nc + j]; }
  const Int& at(std::size_t i, std::size_t j) const { return e[i * nc + j]; }

  static ZMat eye(std::size_t n) {
    ZMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  static ZMat from(const NonnegMatrix& a) {
    ZMat m(a.n_rows(), a.n_cols());
    for (std::size_t i = 0; i < a.n_rows(); ++i)
      for (std::size_t j = 0; j < a.n_cols(); ++j) m.at(i, j) = a.at(i, j);
    return m;
  }

  ZMat transposed() const {
    ZMat t(nc, nr);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) t.at(j, i) = at(i, j);
    return t;
  }

  friend ZMat operator*(const ZMat& a, const ZMat& b) {
    if (a.nc != b.nr) fail(errc::dimension_mismatch, "ZMat product shape");
    ZMat c(a.nr, b.nc);
    for (std::size_t i = 0; i < a.nr; ++i)
      for (std::size_t k = 0; k < a.nc; ++k) {
        const Int& x = a.at(i, k);
        if (x == 0) continue;
        for (std::size_t j = 0; j < b.nc; ++j) c.at(i, j) += x * b.at(k, j);
      }
    return c;
  }

  friend bool operator==(const ZMat&, const ZMat&) = default;
};

/// Exact determinant by fraction-free (Bareiss) elimination.
inline Int det(ZMat m) {
  if (m.nr != m.nc) fail(errc::not_square, "determinant of non-square matrix");
  const std::size_t n = m.nr;
  if (n == 0) return 1;
  Int prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m.at(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && m.at(p, k) == 0) ++p;
      if (p == n) return 0;
      for (std::size_t j = 0; j < n; ++j) std::swap(m.at(k, j), m.at(p, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        Int v = m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j);
        mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
        m.at(i, j) = v;
      }
    prev = m.at(k, k);
  }
  return sign > 0 ? m.at(n - 1, n - 1) : Int(-m.at(n - 1, n - 1));
}

/// Smith normal form with transforms: u * input * v == diag(d).
/// uinv is maintained alongside so that input == uinv * diag(d) * vinv
/// without ever inverting anything.
struct SmithResult {
  std::vector<Int> diag;  // min(nr,nc) entries, nonnegative, d1 | d2 | ...
  std::size_t rank = 0;
  ZMat u, uinv, v;
};

inline SmithResult smith_normal_form(ZMat m) {
  SmithResult res;
  const std::size_t nr = m.nr, nc = m.nc, nmin = std::min(nr, nc);
  res.u = ZMat::eye(nr);
  res.uinv = ZMat::eye(nr);
  res.v = ZMat::eye(nc);

  auto swap_rows = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < nc; ++j) std::swap(m.at(a, j), m.at(b, j));
    for (std::size_t j = 0; j < nr; ++j) std::swap(res.u.at(a, j), res.u.at(b, j));
    for (std::size_t i = 0; i < nr; ++i) std::swap(res.uinv.at(i, a), res.uinv.at(i, b));
  };
  auto swap_cols = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t i = 0; i < nr; ++i) std::swap(m.at(i, a), m.at(i, b));
    for (std::size_t i = 0; i < nc; ++i) std::swap(res.v.at(i, a), res.v.at(i, b));
  };
  auto negate_row = [&](std::size_t a) {
    for (std::size_t j = 0; j < nc; ++j) m.at(a, j) = -m.at(a, j);
    for (std::size_t j = 0; j < nr; ++j) res.u.at(a, j) = -res.u.at(a, j);
    for (std::size_t i = 0; i < nr; ++i) res.uinv.at(i, a) = -res.uinv.at(i, a);
  };
  // row a += k * row b
  auto add_row = [&](std::size_t a, std::size_t b, const Int& k) {
    for (std::size_t j = 0; j < nc; ++j) m.at(a, j) += k * m.at(b, j);
    for (std::size_t j = 0; j < nr; ++j) res.u.at(a, j) += k * res.u.at(b, j);
    for (std::size_t i = 0; i < nr; ++i) res.uinv.at(i, b) -= k * res.uinv.at(i, a);
  };
  // col a += k * col b
  auto add_col = [&](std::size_t a, std::size_t b, const Int& k) {
    for (std::size_t i = 0; i < nr; ++i) m.at(i, a) += k * m.at(i, b);
    for (std::size_t i = 0; i < nc; ++i) res.v.at(i, a) += k * res.v.at(i, b);
  };

  for (std::size_t s = 0; s < nmin; ++s) {
    // pivot: smallest nonzero absolute value in the trailing submatrix
    std::size_t pi = s, pj = s;
    bool found = false;
    Int best = 0;
    for (std::size_t i = s; i < nr; ++i)
      for (std::size_t j = s; j < nc; ++j) {
        if (m.at(i, j) == 0) continue;
        Int a = abs(m.at(i, j));
        if (!found || a < best) {
          found = true;
          best = a;
          pi = i;
          pj = j;
        }
      }
    if (!found) break;
    swap_rows(s, pi);
    swap_cols(s, pj);
    if (m.at(s, s) < 0) negate_row(s);

    bool clean = false;
    while (!clean) {
      clean = true;
      for (std::size_t i = s + 1; i < nr; ++i) {
        if (m.at(i, s) == 0) continue;
        Int q = m.at(i, s) / m.at(s, s);  // truncated division keeps |rem| < pivot
        add_row(i, s, -q);
        if (m.at(i, s) != 0) {
          swap_rows(s, i);
          if (m.at(s, s) < 0) negate_row(s);
          clean = false;
        }
      }
      for (std::size_t j = s + 1; j < nc; ++j) {
        if (m.at(s, j) == 0) continue;
        Int q = m.at(s, j) / m.at(s, s);
        add_col(j, s, -q);
        if (m.at(s, j) != 0) {
          swap_cols(s, j);
          clean = false;
        }
      }
      if (clean) {
        // pivot must divide the whole trailing block for d1 | d2 | ...
        for (std::size_t i = s + 1; i < nr && clean; ++i)
          for (std::size_t j = s + 1; j < nc && clean; ++j)
            if (m.at(i, j) % m.at(s, s) != 0) {
              add_row(s, i, 1);
              clean = false;
            }
      }
    }
  }

  res.diag.resize(nmin);
  for (std::size_t s = 0; s < nmin; ++s) {
    res.diag[s] = m.at(s, s);
    if (res.diag[s] != 0) ++res.rank;
  }
  return res;
}

/// Integer coefficients, ascending degree; c[i] is the coefficient of t^i.
struct ZPoly {
  std::vector<Int> c;

  friend bool operator==(const ZPoly&, const ZPoly&) = default;
  std::size_t degree() const { return c.empty() ? 0 : c.size() - 1; }
};

inline std::string poly_display(const ZPoly& p) {
  if (p.c.empty()) return "0";
  std::string out;
  for (std::size_t k = p.c.size(); k-- > 0;) {
    const Int& a = p.c[k];
    if (a == 0) continue;
    Int mag = abs(a);
    if (out.empty())
      out += (a < 0 ? "-" : "");
    else
      out += (a < 0 ? " - " : " + ");
    bool unit = (mag == 1) && k > 0;
    if (!unit) out += mag.get_str();
    if (k >= 1) out += "t";
    if (k >= 2) out += "^" + std::to_string(k);
  }
  return out.empty() ? "0" : out;
}

/// Exact characteristic polynomial det(tI - A) via the Faddeev-LeVerrier
/// recurrence; every division is exact.
inline ZPoly char_poly(const NonnegMatrix& a) {
  if (!a.is_square()) fail(errc::not_square, "char poly of non-square matrix");
  const std::size_t n = a.n_rows();
  ZMat A = ZMat::from(a);
  ZMat M = ZMat::eye(n);
  ZPoly p;
  p.c.assign(n + 1, 0);
  p.c[n] = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    ZMat AM = A * M;
    Int tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += AM.at(i, i);
    Int ck = -tr;
    mpz_divexact_ui(ck.get_mpz_t(), ck.get_mpz_t(), static_cast<unsigned long>(k));
    p.c[n - k] = ck;
    M = AM;
    for (std::size_t i = 0; i < n; ++i) M.at(i, i) += ck;
  }
  return p;
}

/// Characteristic polynomial with every factor of t stripped; monic with
/// nonzero constant term.
inline ZPoly char_poly_away_from_zero(const NonnegMatrix& a) {
  ZPoly p = char_poly(a);
  std::size_t k = 0;
  while (k < p.c.size() - 1 && p.c[k] == 0) ++k;
  ZPoly q;
  q.c.assign(p.c.begin() + static_cast<std::ptrdiff_t>(k), p.c.end());
  return q;
}

/// coker(I - A) as elementary divisors (each > 1, each dividing the next)
/// plus the free rank.
struct BowenFranks {
  std::vector<Int> divisors;
  std::size_t free_rank = 0;

  friend bool operator==(const BowenFranks&, const BowenFranks&) = default;
  bool trivial() const { return divisors.empty() && free_rank == 0; }
};

inline BowenFranks bowen_franks(const NonnegMatrix& a) {
  if (!a.is_square()) fail(errc::not_square, "bowen_franks of non-square matrix");
  const std::size_t n = a.n_rows();
  ZMat m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.at(i, j) = Int(i == j ? 1 : 0) - a.at(i, j);
  SmithResult s = smith_normal_form(std::move(m));
  BowenFranks bf;
  bf.free_rank = n - s.rank;
  for (const Int& d : s.diag)
    if (d > 1) bf.divisors.push_back(d);
  return bf;
}

/// Finite presentation of the eventual-image data of A^T acting on columns:
/// the saturation of the image lattice of (A^T)^n inside Z^V together with
/// the matrix of A^T restricted to it.
struct DimensionPairData {
  std::size_t eventual_rank = 0;
  ZMat lattice_basis;  // n x r, columns form a basis of the saturated lattice
  ZMat action;         // r x r, matrix of A^T on that basis
};

inline DimensionPairData dimension_pair_data(const NonnegMatrix& a) {
  if (!a.is_square()) fail(errc::not_square, "dimension data of non-square matrix");
  const std::size_t n = a.n_rows();
  ZMat t = ZMat::from(a).transposed();
  ZMat p = ZMat::eye(n);
  for (std::size_t i = 0; i < n; ++i) p = p * t;  // (A^T)^n, rank is stable from here on
  SmithResult s = smith_normal_form(p);
  const std::size_t r = s.rank;
  DimensionPairData out;
  out.eventual_rank = r;
  out.lattice_basis = ZMat(n, r);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < r; ++j) out.lattice_basis.at(i, j) = s.uinv.at(i, j);
  // coordinates of A^T * basis in the basis: first r rows of u * (A^T * basis)
  ZMat y = s.u * (t * out.lattice_basis);
  out.action = ZMat(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) out.action.at(i, j) = y.at(i, j);
  for (std::size_t i = r; i < n; ++i)
    for (std::size_t j = 0; j < r; ++j)
      if (y.at(i, j) != 0)
        fail(errc::type_check_failure, "saturated lattice is not invariant");
  return out;
}

/// Bounded search for a unimodular U with U * ma == mb * U. Solves the
/// intertwining system exactly, then scans small integer combinations of a
/// kernel basis for determinant +-1. A miss is evidence, never a proof.
inline std::optional<ZMat> find_unimodular_conjugacy(const ZMat& ma, const ZMat& mb,
                                                     long coeff_bound = 2,
                                                     std::uint64_t combo_limit = 300000) {
  if (ma.nr != ma.nc || mb.nr != mb.nc || ma.nr != mb.nr) return std::nullopt;
  const std::size_t r = ma.nr;
  if (r == 0) return ZMat(0, 0);
  // Sylvester system over vec(U), row-major.
  ZMat sys(r * r, r * r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = 0; b < r; ++b) {
          Int coeff = 0;
          if (i == a) coeff += ma.at(b, j);
          if (j == b) coeff -= mb.at(i, a);
          sys.at(i * r + j, a * r + b) = coeff;
        }
  SmithResult s = smith_normal_form(sys);
  std::vector<std::size_t> kernel_cols;
  for (std::size_t j = 0; j < r * r; ++j)
    if (j >= s.rank) kernel_cols.push_back(j);
  const std::size_t dim = kernel_cols.size();
  if (dim == 0) return std::nullopt;

  // radius by radius, so small conjugators are reached before any cap:
  // radius 1 alone covers every signed sum of distinct kernel generators
  std::uint64_t tried = 0;
  for (long radius = 1; radius <= coeff_bound; ++radius) {
    std::vector<long> coeff(dim, -radius);
    while (true) {
      long maxabs = 0;
      for (long x : coeff) maxabs = std::max(maxabs, x < 0 ? -x : x);
      if (maxabs == radius) {
        if (++tried > combo_limit) return std::nullopt;
        ZMat u(r, r);
        for (std::size_t k = 0; k < dim; ++k) {
          if (coeff[k] == 0) continue;
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j)
              u.at(i, j) += Int(coeff[k]) * s.v.at(i * r + j, kernel_cols[k]);
        }
        Int d = det(u);
        if (d == 1 || d == -1) return u;
      }
      std::size_t pos = 0;
      while (pos < dim && coeff[pos] == radius) coeff[pos++] = -radius;
      if (pos == dim) break;
      ++coeff[pos];
    }
  }
  return std::nullopt;
}

enum class Verdict { NotSE, NotSSEKnownObstruction, Inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::NotSE: return "NotSE";
    case Verdict::NotSSEKnownObstruction: return "NotSSEKnownObstruction";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct ObstructionReport {
  ZPoly char_a, char_b;
  BowenFranks bf_a, bf_b;
  Int det_i_minus_a, det_i_minus_b;
  DimensionPairData dim_a, dim_b;
  std::optional<ZMat> conjugator;
  Verdict verdict = Verdict::Inconclusive;
};

/// Aggregated obstruction verdict. NotSE is issued only on a proof (the
/// nonzero spectra differ); a failed bounded conjugacy search is reported as
/// evidence but never upgrades the verdict.
inline ObstructionReport se_obstruction_report(const NonnegMatrix& a,
                                               const NonnegMatrix& b) {
  if (!a.is_square() || !b.is_square())
    fail(errc::invalid_input, "obstruction report needs square matrices");
  if (!is_essential(a) || !is_essential(b))
    fail(errc::invalid_input, "obstruction report needs essential matrices");
  ObstructionReport rep;
  rep.char_a = char_poly_away_from_zero(a);
  rep.char_b = char_poly_away_from_zero(b);
  rep.bf_a = bowen_franks(a);
  rep.bf_b = bowen_franks(b);
  ZPoly full_a = char_poly(a), full_b = char_poly(b);
  auto eval_at_one = [](const ZPoly& p) {
    Int v = 0;
    for (std::size_t i = p.c.size(); i-- > 0;) v = v * 1 + p.c[i];
    return v;
  };
  rep.det_i_minus_a = eval_at_one(full_a);  // det(I - A) = char_A(1)
  rep.det_i_minus_b = eval_at_one(full_b);
  rep.dim_a = dimension_pair_data(a);
  rep.dim_b = dimension_pair_data(b);
  if (rep.dim_a.eventual_rank == rep.dim_b.eventual_rank)
    rep.conjugator = find_unimodular_conjugacy(rep.dim_a.action, rep.dim_b.action);

  bool sign_mismatch = (rep.det_i_minus_a > 0) != (rep.det_i_minus_b > 0) ||
                       (rep.det_i_minus_a == 0) != (rep.det_i_minus_b == 0);
  if (rep.char_a != rep.char_b || rep.dim_a.eventual_rank != rep.dim_b.eventual_rank)
    rep.verdict = Verdict::NotSE;
  else if (!(rep.bf_a == rep.bf_b) || sign_mismatch)
    rep.verdict = Verdict::NotSSEKnownObstruction;
  else
    rep.verdict = Verdict::Inconclusive;
  return rep;
}

// --- JSON ---

inline json to_json(const ZPoly& p) {
  json coeffs = json::array();
  for (const Int& c : p.c) coeffs.push_back(c.get_str());
  return json{{"coeffs_ascending", coeffs}, {"display", poly_display(p)}};
}

inline json to_json(const ZMat& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.nr; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.nc; ++j) row.push_back(m.at(i, j).get_str());
    rows.push_back(std::move(row));
  }
  return json{{"n_rows", m.nr}, {"n_cols", m.nc}, {"entries", rows}};
}

inline json to_json(const BowenFranks& bf) {
  json div = json::array();
  for (const Int& d : bf.divisors) div.push_back(d.get_str());
  return json{{"elementary_divisors", div}, {"free_rank", bf.free_rank}};
}

inline json to_json(const ObstructionReport& r) {
  json j{{"verdict", verdict_name(r.verdict)},
         {"char_poly_away_from_zero_A", to_json(r.char_a)},
         {"char_poly_away_from_zero_B", to_json(r.char_b)},
         {"bowen_franks_A", to_json(r.bf_a)},
         {"bowen_franks_B", to_json(r.bf_b)},
         {"det_I_minus_A", r.det_i_minus_a.get_str()},
         {"det_I_minus_B", r.det_i_minus_b.get_str()},
         {"eventual_rank_A", r.dim_a.eventual_rank},
         {"eventual_rank_B", r.dim_b.eventual_rank},
         {"dimension_action_A", to_json(r.dim_a.action)},
         {"dimension_action_B", to_json(r.dim_b.action)},
         {"lattice_basis_A", to_json(r.dim_a.lattice_basis)},
         {"lattice_basis_B", to_json(r.dim_b.lattice_basis)}};
  if (r.conjugator)
    j["dimension_action_conjugator"] = to_json(*r.conjugator);
  else
    j["dimension_action_conjugator"] = nullptr;
  return j;
}

}  // namespace shifteq

#endif
