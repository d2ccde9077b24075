#ifndef SHIFTEQ_EQUIVALENCES_HPP
#define SHIFTEQ_EQUIVALENCES_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "shifteq/path_iso.hpp"

namespace shifteq {

using CheckList = std::vector<std::pair<std::string, bool>>;

inline bool all_pass(const CheckList& checks) {
  for (const auto& [name, ok] : checks)
    if (!ok) return false;
  return true;
}

/// Shift-equivalence witness: lag m with R over VxW and S over WxV.
/// The matrices A and B it refers to are supplied by the caller.
struct SEWitness {
  std::uint64_t m = 1;
  NonnegMatrix R, S;
};

inline void require_se_shapes(const NonnegMatrix& a, const NonnegMatrix& b,
                              const SEWitness& w) {
  if (!a.is_square() || !b.is_square())
    fail(errc::dimension_mismatch, "A and B must be square");
  if (w.m < 1) fail(errc::invalid_input, "lag must be >= 1");
  if (w.R.rows() != a.rows() || w.R.cols() != b.rows())
    fail(errc::dimension_mismatch, "R must be indexed VxW");
  if (w.S.rows() != b.rows() || w.S.cols() != a.rows())
    fail(errc::dimension_mismatch, "S must be indexed WxV");
}

/// The four defining equations. The intertwining pair is checked in its
/// only well-typed reading S*A == B*S; when V and W coincide the alternate
/// ordering S*B == A*S also type-checks and is surfaced as an informational
/// extra entry that does not affect the verdict.
inline CheckList verify_se_checks(const NonnegMatrix& a, const NonnegMatrix& b,
                                  const SEWitness& w) {
  require_se_shapes(a, b, w);
  CheckList out;
  out.emplace_back("A^m == R*S", power(a, w.m) == multiply(w.R, w.S));
  out.emplace_back("B^m == S*R", power(b, w.m) == multiply(w.S, w.R));
  out.emplace_back("A*R == R*B", multiply(a, w.R) == multiply(w.R, b));
  out.emplace_back("S*A == B*S", multiply(w.S, a) == multiply(b, w.S));
  if (a.rows() == b.rows())
    out.emplace_back("S*B == A*S (informational alternate ordering)",
                     multiply(w.S, b) == multiply(a, w.S));
  return out;
}

inline bool verify_se(const NonnegMatrix& a, const NonnegMatrix& b, const SEWitness& w) {
  CheckList checks = verify_se_checks(a, b, w);
  for (const auto& [name, ok] : checks)
    if (!ok && name.find("informational") == std::string::npos) return false;
  return true;
}

/// Compatible-shift-equivalence witness: an SE witness plus the four path
/// isomorphisms
///   phi_R : E_A x E_R -> E_R x E_B      phi_S : E_B x E_S -> E_S x E_A
///   psi_A : E_R x E_S -> E_A^m          psi_B : E_S x E_R -> E_B^m
struct CSEWitness {
  SEWitness se;
  PathIso phi_R, phi_S, psi_A, psi_B;

  const NonnegMatrix& matrix_a() const { return phi_R.domain_spec().factors()[0]; }
  const NonnegMatrix& matrix_b() const { return phi_S.domain_spec().factors()[0]; }
};

inline bool cse_shapes_ok(const NonnegMatrix& a, const NonnegMatrix& b,
                          const CSEWitness& c) {
  const SEWitness& w = c.se;
  PathSpaceSpec ar({a, w.R}), rb({w.R, b}), bs({b, w.S}), sa({w.S, a});
  PathSpaceSpec rs({w.R, w.S}), sr({w.S, w.R});
  PathSpaceSpec am = PathSpaceSpec::repeated(a, w.m);
  PathSpaceSpec bm = PathSpaceSpec::repeated(b, w.m);
  return c.phi_R.domain_spec() == ar && c.phi_R.codomain_spec() == rb &&
         c.phi_S.domain_spec() == bs && c.phi_S.codomain_spec() == sa &&
         c.psi_A.domain_spec() == rs && c.psi_A.codomain_spec() == am &&
         c.psi_B.domain_spec() == sr && c.psi_B.codomain_spec() == bm;
}

/// Right-hand sides of the two compatibility equations.
inline PathIso compat_rhs_r(const CSEWitness& c) {
  PathIso id_r = identity_iso(PathSpaceSpec::single(c.se.R));
  return compose(product(id_r, c.psi_B), product(invert(c.psi_A), id_r));
}
inline PathIso compat_rhs_s(const CSEWitness& c) {
  PathIso id_s = identity_iso(PathSpaceSpec::single(c.se.S));
  return compose(product(id_s, c.psi_A), product(invert(c.psi_B), id_s));
}

inline CheckList verify_cse_checks(const NonnegMatrix& a, const NonnegMatrix& b,
                                   const CSEWitness& c) {
  require_se_shapes(a, b, c.se);
  if (!verify_se(a, b, c.se))
    fail(errc::invalid_underlying_se, "the SE equations fail for the witness matrices");
  CheckList out = verify_se_checks(a, b, c.se);
  bool shapes = cse_shapes_ok(a, b, c);
  out.emplace_back("iso shapes match witness", shapes);
  if (!shapes) return out;
  out.emplace_back("phi_R is a path isomorphism", verify_path_iso(c.phi_R));
  out.emplace_back("phi_S is a path isomorphism", verify_path_iso(c.phi_S));
  out.emplace_back("psi_A is a path isomorphism", verify_path_iso(c.psi_A));
  out.emplace_back("psi_B is a path isomorphism", verify_path_iso(c.psi_B));
  if (!all_pass(out)) return out;
  out.emplace_back("phi_R^(m) == (id_R x psi_B)(psi_A^-1 x id_R)",
                   phi_power(c.phi_R, c.se.m) == compat_rhs_r(c));
  out.emplace_back("phi_S^(m) == (id_S x psi_A)(psi_B^-1 x id_S)",
                   phi_power(c.phi_S, c.se.m) == compat_rhs_s(c));
  return out;
}

/// True iff the SE equations, the four iso contracts, and both
/// compatibility equations all hold extensionally.
inline bool verify_cse(const NonnegMatrix& a, const NonnegMatrix& b, const CSEWitness& c) {
  CheckList checks = verify_cse_checks(a, b, c);
  for (const auto& [name, ok] : checks)
    if (!ok && name.find("informational") == std::string::npos) return false;
  return true;
}

/// The two identities that are automatic for any compatible witness:
///   (psi_A x id_A)(id_R x phi_S) == (id_A x psi_A)(phi_R^-1 x id_S)
///   (psi_B x id_B)(id_S x phi_R) == (id_B x psi_B)(phi_S^-1 x id_R)
/// A failure on a witness that passed verify_cse indicates a bug, not bad
/// input.
inline CheckList derived_identity_checks(const CSEWitness& c) {
  PathIso id_a = identity_iso(PathSpaceSpec::single(c.matrix_a()));
  PathIso id_b = identity_iso(PathSpaceSpec::single(c.matrix_b()));
  PathIso id_r = identity_iso(PathSpaceSpec::single(c.se.R));
  PathIso id_s = identity_iso(PathSpaceSpec::single(c.se.S));
  PathIso lhs_a = compose(product(c.psi_A, id_a), product(id_r, c.phi_S));
  PathIso rhs_a = compose(product(id_a, c.psi_A), product(invert(c.phi_R), id_s));
  PathIso lhs_b = compose(product(c.psi_B, id_b), product(id_s, c.phi_R));
  PathIso rhs_b = compose(product(id_b, c.psi_B), product(invert(c.phi_S), id_r));
  CheckList out;
  out.emplace_back("(psi_A x id_A)(id_R x phi_S) == (id_A x psi_A)(phi_R^-1 x id_S)",
                   lhs_a == rhs_a);
  out.emplace_back("(psi_B x id_B)(id_S x phi_R) == (id_B x psi_B)(phi_S^-1 x id_R)",
                   lhs_b == rhs_b);
  return out;
}

inline bool check_derived_identities(const NonnegMatrix& a, const NonnegMatrix& b,
                                     const CSEWitness& c) {
  if (!verify_cse(a, b, c))
    fail(errc::invalid_witness, "derived identities require a verified compatible witness");
  return all_pass(derived_identity_checks(c));
}

/// One elementary move: A == R*S with successor S*R.
struct ElementaryStep {
  NonnegMatrix R, S;

  NonnegMatrix successor() const { return multiply(S, R); }
};

/// Lag-1 compatible witness from an elementary relation A == R*S,
/// B == S*R: psi_A and psi_B are the canonical blockwise bijections and
///   phi_R := (id_R x psi_B)(psi_A^-1 x id_R)
///   phi_S := (id_S x psi_A)(psi_B^-1 x id_S)
/// which satisfies compatibility at lag 1 by construction.
inline CSEWitness sse_step_to_cse(const NonnegMatrix& a, const NonnegMatrix& b,
                                  const ElementaryStep& step) {
  if (multiply(step.R, step.S) != a || multiply(step.S, step.R) != b)
    fail(errc::not_elementary, "step does not factor A and B");
  CSEWitness c;
  c.se = SEWitness{1, step.R, step.S};
  c.psi_A = make_canonical(PathSpaceSpec({step.R, step.S}), PathSpaceSpec::single(a));
  c.psi_B = make_canonical(PathSpaceSpec({step.S, step.R}), PathSpaceSpec::single(b));
  c.phi_R = compat_rhs_r(c);
  c.phi_S = compat_rhs_s(c);
  if (!verify_cse(a, b, c))
    fail(errc::type_check_failure, "lag-1 construction failed its own verification");
  return c;
}

/// Transitivity. For witnesses (A, B, lag m, R, S) and (B, C, lag m', R', S')
/// the composite has lag m + m', matrices R'' = R*R' and S'' = S'*S, and isos
///   phi_R''   = (id_R x phi_R')(phi_R x id_R')
///   phi_S''   = (id_S' x phi_S)(phi_S' x id_S)
///   psi_A''   = (id_A^m' x psi_A)((phi_R^(m'))^-1 x id_S)(id_R x psi_B' x id_S)
///   psi_C''   = (id_C^m x psi_C')((phi_S'^(m))^-1 x id_R')(id_S' x psi_B x id_R')
/// built over two-factor path spaces for E_R'' and E_S'' and then conjugated
/// onto the edge sets of the product matrices through the canonical
/// identifications.
inline CSEWitness compose_cse(const CSEWitness& c1, const CSEWitness& c2) {
  const NonnegMatrix& a = c1.matrix_a();
  const NonnegMatrix& b = c1.matrix_b();
  const NonnegMatrix& c = c2.matrix_b();
  if (b != c2.matrix_a())
    fail(errc::middle_mismatch, "middle matrices of the two witnesses differ");
  const std::uint64_t m = c1.se.m, mp = c2.se.m;
  const NonnegMatrix& r1 = c1.se.R;
  const NonnegMatrix& s1 = c1.se.S;
  const NonnegMatrix& r2 = c2.se.R;
  const NonnegMatrix& s2 = c2.se.S;
  NonnegMatrix rr = multiply(r1, r2);
  NonnegMatrix ss = multiply(s2, s1);

  PathIso id_r1 = identity_iso(PathSpaceSpec::single(r1));
  PathIso id_s1 = identity_iso(PathSpaceSpec::single(s1));
  PathIso id_r2 = identity_iso(PathSpaceSpec::single(r2));
  PathIso id_s2 = identity_iso(PathSpaceSpec::single(s2));
  PathIso id_am = identity_iso(PathSpaceSpec::repeated(a, mp));
  PathIso id_cm = identity_iso(PathSpaceSpec::repeated(c, m));

  PathIso phi_rr = compose(product(id_r1, c2.phi_R), product(c1.phi_R, id_r2));
  PathIso phi_ss = compose(product(id_s2, c1.phi_S), product(c2.phi_S, id_s1));
  PathIso psi_a = compose(
      product(id_am, c1.psi_A),
      compose(product(invert(phi_power(c1.phi_R, mp)), id_s1),
              product(id_r1, c2.psi_A, id_s1)));
  PathIso psi_c = compose(
      product(id_cm, c2.psi_B),
      compose(product(invert(phi_power(c2.phi_S, m)), id_r2),
              product(id_s2, c1.psi_B, id_r2)));

  // Collapse the two-factor path spaces E_R x E_R' and E_S' x E_S onto the
  // edge sets of the product matrices.
  PathIso cr = make_canonical(PathSpaceSpec::single(rr), PathSpaceSpec({r1, r2}));
  PathIso cs = make_canonical(PathSpaceSpec::single(ss), PathSpaceSpec({s2, s1}));
  PathIso id_a1 = identity_iso(PathSpaceSpec::single(a));
  PathIso id_c1 = identity_iso(PathSpaceSpec::single(c));

  CSEWitness out;
  out.se = SEWitness{m + mp, rr, ss};
  out.phi_R = compose(product(invert(cr), id_c1), compose(phi_rr, product(id_a1, cr)));
  out.phi_S = compose(product(invert(cs), id_a1), compose(phi_ss, product(id_c1, cs)));
  out.psi_A = compose(psi_a, product(cr, cs));
  out.psi_B = compose(psi_c, product(cs, cr));
  if (!verify_cse(a, c, out))
    fail(errc::type_check_failure, "composed witness failed its own verification");
  return out;
}

/// A sequence of elementary moves linking `start` to its final matrix.
struct SSEChain {
  NonnegMatrix start;
  std::vector<ElementaryStep> steps;

  /// Matrix after applying all steps; throws BrokenChain on a bad link.
  NonnegMatrix validate() const {
    NonnegMatrix cur = start;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (multiply(steps[i].R, steps[i].S) != cur)
        fail(errc::broken_chain, "step " + std::to_string(i) + " does not factor its source");
      cur = steps[i].successor();
    }
    return cur;
  }
};

/// Left fold of compose_cse over the chain's elementary witnesses. The
/// empty chain yields the identity witness A == A*I, I*A == A.
inline CSEWitness chain_to_cse(const SSEChain& chain, const NonnegMatrix& target) {
  NonnegMatrix end = chain.validate();
  if (end != target) fail(errc::broken_chain, "chain does not end at the target matrix");
  if (chain.steps.empty()) {
    ElementaryStep identity_step{chain.start, NonnegMatrix::identity(chain.start.rows())};
    return sse_step_to_cse(chain.start, chain.start, identity_step);
  }
  NonnegMatrix cur = chain.start;
  NonnegMatrix next = chain.steps[0].successor();
  CSEWitness acc = sse_step_to_cse(cur, next, chain.steps[0]);
  for (std::size_t i = 1; i < chain.steps.size(); ++i) {
    cur = next;
    next = chain.steps[i].successor();
    acc = compose_cse(acc, sse_step_to_cse(cur, next, chain.steps[i]));
  }
  return acc;
}

// --- JSON bundles (the CLI certificate payloads) ---

inline json se_witness_to_json(const NonnegMatrix& a, const NonnegMatrix& b,
                               const SEWitness& w) {
  return json{{"A", to_json(a)}, {"B", to_json(b)}, {"m", w.m},
              {"R", to_json(w.R)}, {"S", to_json(w.S)}};
}

inline SEWitness se_witness_from_json(const json& j) {
  if (!j.is_object() || !j.contains("m") || !j.contains("R") || !j.contains("S"))
    fail(errc::invalid_input, "witness must have m/R/S");
  SEWitness w;
  Int m = int_from_json(j.at("m"), "m");
  if (m < 1 || m > 64) fail(errc::invalid_input, "field 'm' out of range");
  w.m = m.get_ui();
  w.R = matrix_from_json(j.at("R"), "R");
  w.S = matrix_from_json(j.at("S"), "S");
  return w;
}

inline json cse_witness_to_json(const NonnegMatrix& a, const NonnegMatrix& b,
                                const CSEWitness& c) {
  json j = se_witness_to_json(a, b, c.se);
  j["phi_R"] = to_json(c.phi_R);
  j["phi_S"] = to_json(c.phi_S);
  j["psi_A"] = to_json(c.psi_A);
  j["psi_B"] = to_json(c.psi_B);
  return j;
}

inline CSEWitness cse_witness_from_json(const json& j) {
  CSEWitness c;
  c.se = se_witness_from_json(j);
  for (const char* f : {"phi_R", "phi_S", "psi_A", "psi_B"})
    if (!j.contains(f)) fail(errc::invalid_input, std::string("witness missing '") + f + "'");
  c.phi_R = path_iso_from_json(j.at("phi_R"), "phi_R");
  c.phi_S = path_iso_from_json(j.at("phi_S"), "phi_S");
  c.psi_A = path_iso_from_json(j.at("psi_A"), "psi_A");
  c.psi_B = path_iso_from_json(j.at("psi_B"), "psi_B");
  return c;
}

inline json step_to_json(const ElementaryStep& s) {
  return json{{"R", to_json(s.R)}, {"S", to_json(s.S)}};
}

inline ElementaryStep step_from_json(const json& j) {
  if (!j.is_object() || !j.contains("R") || !j.contains("S"))
    fail(errc::invalid_input, "elementary step must have R/S");
  return ElementaryStep{matrix_from_json(j.at("R"), "R"), matrix_from_json(j.at("S"), "S")};
}

inline json chain_to_json(const SSEChain& chain) {
  json steps = json::array();
  for (const auto& s : chain.steps) steps.push_back(step_to_json(s));
  return json{{"start", to_json(chain.start)}, {"steps", steps}};
}

inline SSEChain chain_from_json(const json& j) {
  if (!j.is_object() || !j.contains("start") || !j.contains("steps"))
    fail(errc::invalid_input, "chain must have start/steps");
  SSEChain chain;
  chain.start = matrix_from_json(j.at("start"), "start");
  for (const auto& s : j.at("steps")) chain.steps.push_back(step_from_json(s));
  return chain;
}

}  // namespace shifteq

#endif
