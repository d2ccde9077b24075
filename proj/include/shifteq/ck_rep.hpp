#ifndef SHIFTEQ_CK_REP_HPP
#define SHIFTEQ_CK_REP_HPP

#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "shifteq/equivalences.hpp"

namespace shifteq {

/// Exact root of unity exp(2*pi*i * num/den), kept as a normalized fraction
/// mod 1. Never floating point.
struct Weight {
  long long num = 0;
  long long den = 1;

  static Weight one() { return {0, 1}; }

  static Weight of(long long n, long long d) {
    if (d == 0) fail(errc::invalid_input, "weight denominator must be nonzero");
    if (d < 0) {
      d = -d;
      n = -n;
    }
    n %= d;
    if (n < 0) n += d;
    long long g = std::gcd(n, d);
    if (g == 0) g = 1;
    return {n / g, d / g};
  }

  Weight times(const Weight& o) const {
    return of(num * o.den + o.num * den, den * o.den);
  }
  Weight conj() const { return of(-num, den); }
  Weight pow(std::uint64_t k) const {
    return of(num * static_cast<long long>(k % static_cast<std::uint64_t>(den)), den);
  }
  bool is_one() const { return num == 0; }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

  friend bool operator==(const Weight&, const Weight&) = default;
};

inline Weight weight_from_string(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) fail(errc::invalid_input, "weight must be 'num/den'");
  try {
    return Weight::of(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
  } catch (const std::exception&) {
    fail(errc::invalid_input, "weight must be 'num/den'");
  }
}

/// Finite path in the bipartite graph G_D, stored as alternating indices
/// into the edge tables of R and S. starts_v means the first edge is in E_R
/// (the source vertex lies on the V side).
struct AltPath {
  bool starts_v = true;
  std::vector<std::uint32_t> idx;

  std::size_t length() const { return idx.size(); }
  friend bool operator==(const AltPath&, const AltPath&) = default;

  /// true when the first `n` edges of both paths coincide
  bool prefix_matches(const AltPath& o, std::size_t n) const {
    if (starts_v != o.starts_v) return false;
    if (idx.size() < n || o.idx.size() < n) return false;
    for (std::size_t i = 0; i < n; ++i)
      if (idx[i] != o.idx[i]) return false;
    return true;
  }
};

/// Result of applying a partial weighted map to a basis vector: annihilated,
/// undetermined at this truncation, or a determined prefix with an exact
/// unimodular weight.
struct OpResult {
  enum class Kind { Zero, Unknown, Vec } kind = Kind::Unknown;
  AltPath p;
  Weight w = Weight::one();

  static OpResult zero() { return {Kind::Zero, {}, Weight::one()}; }
  static OpResult unknown() { return {Kind::Unknown, {}, Weight::one()}; }
  static OpResult vec(AltPath p, Weight w) { return {Kind::Vec, std::move(p), w}; }
};

/// One generator of the two operator families, or its adjoint.
struct Op {
  enum class Kind { PV, PW, SA, SB, TR, TS } kind = Kind::PV;
  std::uint32_t index = 0;
  bool adjoint = false;
};

using OpWord = std::vector<Op>;  // composition order: word[0] applied last

namespace ckdetail {

struct PairIndex {
  std::vector<std::vector<std::int32_t>> t;

  void build(const PathSpace& two_factor) {
    t.assign(two_factor.table(0).size(),
             std::vector<std::int32_t>(two_factor.table(1).size(), -1));
    for (std::uint32_t i = 0; i < two_factor.size(); ++i)
      t[two_factor.path(i)[0]][two_factor.path(i)[1]] = static_cast<std::int32_t>(i);
  }
  std::int32_t at(std::uint32_t a, std::uint32_t b) const { return t[a][b]; }
};

}  // namespace ckdetail

/// Shared immutable context for one representation: the witness, its path
/// spaces and pair lookup tables.
struct RepContext {
  CSEWitness c;
  NonnegMatrix A, B, R, S;
  std::uint64_t m = 1;
  ckdetail::PairIndex rs, sr, ar, bs, sa;

  explicit RepContext(const CSEWitness& witness)
      : c(witness), A(witness.matrix_a()), B(witness.matrix_b()), R(witness.se.R),
        S(witness.se.S), m(witness.se.m) {
    rs.build(c.psi_A.domain());
    sr.build(c.psi_B.domain());
    ar.build(c.phi_R.domain());
    bs.build(c.phi_S.domain());
    sa.build(c.phi_S.codomain());
  }

  const EdgeTable& table_r() const { return c.psi_A.domain().table(0); }
  const EdgeTable& table_s() const { return c.psi_A.domain().table(1); }
  const EdgeTable& table_a() const { return c.psi_A.codomain().table(0); }
  const EdgeTable& table_b() const { return c.psi_B.codomain().table(0); }

  // psi_A applied to one block (r, s); m edges of E_A
  const PathKey& psi_a_block(std::uint32_t r, std::uint32_t s) const {
    std::int32_t i = rs.at(r, s);
    if (i < 0) fail(errc::not_alternating, "non-composable (r, s) block");
    return c.psi_A.codomain().path(c.psi_A.forward()[static_cast<std::uint32_t>(i)]);
  }

  // psi_A^-1 of m consecutive E_A edges; (r, s) pair
  std::pair<std::uint32_t, std::uint32_t> psi_a_inv_block(const std::uint32_t* a) const {
    PathKey key(a, a + m);
    std::int64_t i = c.psi_A.codomain().find(key);
    if (i < 0) fail(errc::type_check_failure, "block inversion hit a non-path");
    const PathKey& p = c.psi_A.domain().path(c.psi_A.backward()[static_cast<std::size_t>(i)]);
    return {p[0], p[1]};
  }

  const PathKey& psi_b_block(std::uint32_t s, std::uint32_t r) const {
    std::int32_t i = sr.at(s, r);
    if (i < 0) fail(errc::not_alternating, "non-composable (s, r) block");
    return c.psi_B.codomain().path(c.psi_B.forward()[static_cast<std::uint32_t>(i)]);
  }

  // phi_S(b s) = (s', a')
  std::pair<std::uint32_t, std::uint32_t> phi_s_fwd(std::uint32_t b, std::uint32_t s) const {
    std::int32_t i = bs.at(b, s);
    if (i < 0) fail(errc::not_alternating, "non-composable (b, s) pair");
    const PathKey& p =
        c.phi_S.codomain().path(c.phi_S.forward()[static_cast<std::uint32_t>(i)]);
    return {p[0], p[1]};
  }

  // phi_S^-1(s' a) = (b, s)
  std::pair<std::uint32_t, std::uint32_t> phi_s_inv(std::uint32_t sp, std::uint32_t a) const {
    std::int32_t i = sa.at(sp, a);
    if (i < 0) fail(errc::not_alternating, "non-composable (s, a) pair");
    const PathKey& p =
        c.phi_S.domain().path(c.phi_S.backward()[static_cast<std::uint32_t>(i)]);
    return {p[0], p[1]};
  }

  // phi_R(a r) = (r', b')
  std::pair<std::uint32_t, std::uint32_t> phi_r_fwd(std::uint32_t a, std::uint32_t r) const {
    std::int32_t i = ar.at(a, r);
    if (i < 0) fail(errc::not_alternating, "non-composable (a, r) pair");
    const PathKey& p =
        c.phi_R.codomain().path(c.phi_R.forward()[static_cast<std::uint32_t>(i)]);
    return {p[0], p[1]};
  }
};

/// psi_A^infinity on a finite alternating path: blockwise application of
/// psi_A to (r, s) blocks. The input must start in E_R and have even length.
inline std::vector<std::uint32_t> psi_a_infinity(const CSEWitness& c, const AltPath& x) {
  if (!x.starts_v) fail(errc::not_alternating, "path must start with an E_R edge");
  if (x.length() % 2 != 0) fail(errc::odd_length, "path length must be even");
  RepContext ctx(c);
  std::vector<std::uint32_t> out;
  out.reserve(ctx.m * (x.length() / 2));
  for (std::size_t t = 0; t + 2 <= x.length(); t += 2) {
    const PathKey& blk = ctx.psi_a_block(x.idx[t], x.idx[t + 1]);
    out.insert(out.end(), blk.begin(), blk.end());
  }
  return out;
}

inline AltPath psi_a_infinity_inv(const CSEWitness& c, const std::vector<std::uint32_t>& a) {
  RepContext ctx(c);
  if (a.size() % ctx.m != 0) fail(errc::odd_length, "length must be a multiple of the lag");
  AltPath x{true, {}};
  for (std::size_t t = 0; t < a.size(); t += ctx.m) {
    auto [r, s] = ctx.psi_a_inv_block(a.data() + t);
    x.idx.push_back(r);
    x.idx.push_back(s);
  }
  return x;
}

/// All length-L paths of G_D: V-side vectors (starting in E_R) first, then
/// W-side, each block in canonical path-space order.
struct TruncatedBasis {
  std::uint32_t depth = 0;
  std::vector<AltPath> vectors;
  std::size_t v_side_count = 0;
};

inline TruncatedBasis build_basis(const RepContext& ctx, std::uint32_t depth) {
  TruncatedBasis basis;
  basis.depth = depth;
  std::vector<NonnegMatrix> vfac, wfac;
  for (std::uint32_t i = 0; i < depth / 2; ++i) {
    vfac.push_back(ctx.R);
    vfac.push_back(ctx.S);
    wfac.push_back(ctx.S);
    wfac.push_back(ctx.R);
  }
  for (const PathKey& p : path_space(PathSpaceSpec(vfac)))
    basis.vectors.push_back(AltPath{true, p});
  basis.v_side_count = basis.vectors.size();
  for (const PathKey& p : path_space(PathSpaceSpec(wfac)))
    basis.vectors.push_back(AltPath{false, p});
  return basis;
}

/// The truncated operator family of one compatible witness: P_v, S_a, S_b,
/// T_d acting on the depth-L basis, with exact residual-depth bookkeeping.
/// s_twist multiplies every S_c generator; t_s_twist multiplies every T_d
/// generator with d in E_S.
class TruncatedRep {
 public:
  TruncatedRep(std::shared_ptr<const RepContext> ctx, std::uint32_t depth)
      : ctx_(std::move(ctx)), depth_(depth), basis_(build_basis(*ctx_, depth)) {}

  const RepContext& ctx() const { return *ctx_; }
  std::uint32_t depth() const { return depth_; }
  const TruncatedBasis& basis() const { return basis_; }
  const Weight& s_twist() const { return s_twist_; }
  const Weight& t_s_twist() const { return t_s_twist_; }

  TruncatedRep twisted(const Weight& z) const {
    TruncatedRep r = *this;
    r.s_twist_ = r.s_twist_.times(z);
    r.t_s_twist_ = r.t_s_twist_.times(z.pow(ctx_->m));
    return r;
  }

  /// Applies one generator (or adjoint) to a finite alternating path. The
  /// result is the exactly determined prefix of the true action; edges the
  /// truncation cannot determine are dropped and the loss is visible in the
  /// result length.
  OpResult apply(const Op& op, const AltPath& x) const {
    const RepContext& c = *ctx_;
    const std::size_t len = x.length();
    switch (op.kind) {
      case Op::Kind::PV: {
        if (len == 0) return OpResult::unknown();
        if (x.starts_v && c.table_r().edge(x.idx[0]).src == op.index)
          return OpResult::vec(x, Weight::one());
        return OpResult::zero();
      }
      case Op::Kind::PW: {
        if (len == 0) return OpResult::unknown();
        if (!x.starts_v && c.table_s().edge(x.idx[0]).src == op.index)
          return OpResult::vec(x, Weight::one());
        return OpResult::zero();
      }
      case Op::Kind::TR: {
        const Edge& d = c.table_r().edge(op.index);
        if (!op.adjoint) {
          if (len == 0) return OpResult::unknown();
          if (x.starts_v || c.table_s().edge(x.idx[0]).src != d.rng) return OpResult::zero();
          AltPath y{true, {op.index}};
          y.idx.insert(y.idx.end(), x.idx.begin(), x.idx.end());
          if (y.idx.size() > depth_) y.idx.resize(depth_);
          return OpResult::vec(std::move(y), Weight::one());
        }
        if (len == 0) return OpResult::unknown();
        if (!x.starts_v || x.idx[0] != op.index) return OpResult::zero();
        return OpResult::vec(AltPath{false, {x.idx.begin() + 1, x.idx.end()}},
                             Weight::one());
      }
      case Op::Kind::TS: {
        const Edge& d = c.table_s().edge(op.index);
        if (!op.adjoint) {
          if (len == 0) return OpResult::unknown();
          if (!x.starts_v || c.table_r().edge(x.idx[0]).src != d.rng) return OpResult::zero();
          AltPath y{false, {op.index}};
          y.idx.insert(y.idx.end(), x.idx.begin(), x.idx.end());
          if (y.idx.size() > depth_) y.idx.resize(depth_);
          return OpResult::vec(std::move(y), t_s_twist_);
        }
        if (len == 0) return OpResult::unknown();
        if (x.starts_v || x.idx[0] != op.index) return OpResult::zero();
        return OpResult::vec(AltPath{true, {x.idx.begin() + 1, x.idx.end()}},
                             t_s_twist_.conj());
      }
      case Op::Kind::SA:
        return apply_sa(op, x);
      case Op::Kind::SB:
        return apply_sb(op, x);
    }
    return OpResult::unknown();
  }

  /// word[0] applied last (composition order).
  OpResult apply_word(const OpWord& word, const AltPath& x) const {
    OpResult cur = OpResult::vec(x, Weight::one());
    for (std::size_t i = word.size(); i-- > 0;) {
      if (cur.kind != OpResult::Kind::Vec) return cur;
      OpResult next = apply(word[i], cur.p);
      if (next.kind != OpResult::Kind::Vec) return next;
      next.w = next.w.times(cur.w);
      cur = std::move(next);
    }
    return cur;
  }

 private:
  // psi_A^infinity over the complete (r, s) blocks of a V-side path
  std::vector<std::uint32_t> blocks_image(const AltPath& x, std::size_t k) const {
    std::vector<std::uint32_t> w;
    w.reserve(ctx_->m * k);
    for (std::size_t t = 0; t < k; ++t) {
      const PathKey& blk = ctx_->psi_a_block(x.idx[2 * t], x.idx[2 * t + 1]);
      w.insert(w.end(), blk.begin(), blk.end());
    }
    return w;
  }

  AltPath invert_blocks(const std::vector<std::uint32_t>& w, std::size_t q) const {
    AltPath y{true, {}};
    y.idx.reserve(2 * q);
    for (std::size_t t = 0; t < q; ++t) {
      auto [r, s] = ctx_->psi_a_inv_block(w.data() + t * ctx_->m);
      y.idx.push_back(r);
      y.idx.push_back(s);
    }
    return y;
  }

  OpResult apply_sa(const Op& op, const AltPath& x) const {
    const RepContext& c = *ctx_;
    const Edge& a = c.table_a().edge(op.index);
    const std::size_t len = x.length(), m = c.m;
    if (len == 0) return OpResult::unknown();
    if (!op.adjoint) {
      if (!x.starts_v || c.table_r().edge(x.idx[0]).src != a.rng) return OpResult::zero();
      const std::size_t k = len / 2;
      std::vector<std::uint32_t> w;
      w.reserve(1 + m * k);
      w.push_back(op.index);
      std::vector<std::uint32_t> img = blocks_image(x, k);
      w.insert(w.end(), img.begin(), img.end());
      const std::size_t q = w.size() / m;
      AltPath y = invert_blocks(w, q);
      if (y.idx.size() > depth_) y.idx.resize(depth_);
      return OpResult::vec(std::move(y), s_twist_);
    }
    if (!x.starts_v) return OpResult::zero();
    const std::size_t k = len / 2;
    std::vector<std::uint32_t> w = blocks_image(x, k);
    if (w.empty()) return OpResult::unknown();
    if (w[0] != op.index) return OpResult::zero();
    w.erase(w.begin());
    const std::size_t q = w.size() / m;
    return OpResult::vec(invert_blocks(w, q), s_twist_.conj());
  }

  OpResult apply_sb(const Op& op, const AltPath& x) const {
    const RepContext& c = *ctx_;
    const Edge& b = c.table_b().edge(op.index);
    const std::size_t len = x.length(), m = c.m;
    if (len == 0) return OpResult::unknown();
    if (!op.adjoint) {
      if (x.starts_v || c.table_s().edge(x.idx[0]).src != b.rng) return OpResult::zero();
      AltPath rest{true, {x.idx.begin() + 1, x.idx.end()}};
      const std::size_t k = rest.length() / 2;
      auto [sp, ap] = c.phi_s_fwd(op.index, x.idx[0]);
      std::vector<std::uint32_t> w;
      w.reserve(1 + m * k);
      w.push_back(ap);
      std::vector<std::uint32_t> img = blocks_image(rest, k);
      w.insert(w.end(), img.begin(), img.end());
      const std::size_t q = w.size() / m;
      AltPath tail = invert_blocks(w, q);
      AltPath y{false, {sp}};
      y.idx.insert(y.idx.end(), tail.idx.begin(), tail.idx.end());
      if (y.idx.size() > depth_) y.idx.resize(depth_);
      return OpResult::vec(std::move(y), s_twist_);
    }
    if (x.starts_v) return OpResult::zero();
    AltPath rest{true, {x.idx.begin() + 1, x.idx.end()}};
    const std::size_t k = rest.length() / 2;
    std::vector<std::uint32_t> w = blocks_image(rest, k);
    if (w.empty()) return OpResult::unknown();
    auto [bp, s0] = c.phi_s_inv(x.idx[0], w[0]);
    if (bp != op.index) return OpResult::zero();
    w.erase(w.begin());
    const std::size_t q = w.size() / m;
    AltPath tail = invert_blocks(w, q);
    AltPath y{false, {s0}};
    y.idx.insert(y.idx.end(), tail.idx.begin(), tail.idx.end());
    return OpResult::vec(std::move(y), s_twist_.conj());
  }

  std::shared_ptr<const RepContext> ctx_;
  std::uint32_t depth_;
  TruncatedBasis basis_;
  Weight s_twist_ = Weight::one();
  Weight t_s_twist_ = Weight::one();
};

/// Builds the Prop-style operator family at truncation depth L (even).
inline TruncatedRep build_representation(const CSEWitness& c, std::uint32_t depth) {
  if (depth == 0 || depth % 2 != 0)
    fail(errc::invalid_input, "truncation depth must be a positive even integer");
  if (depth < 2 * c.se.m)
    fail(errc::insufficient_depth, "depth must be at least twice the lag");
  if (!verify_cse(c.matrix_a(), c.matrix_b(), c))
    fail(errc::invalid_witness, "representation requires a verified compatible witness");
  return TruncatedRep(std::make_shared<RepContext>(c), depth);
}

inline TruncatedRep twist_representation(const TruncatedRep& rep, const Weight& z) {
  return rep.twisted(z);
}

/// Outcome of a relation check at one margin.
struct RelationReport {
  bool pass = true;
  bool vacuous = false;  // no instance had enough residual depth
  std::uint64_t checked = 0;
  std::uint64_t excluded = 0;
  std::vector<std::string> failures;

  void fail_on(const std::string& what) {
    pass = false;
    if (failures.size() < 16) failures.push_back(what);
  }
  void finish() { vacuous = (checked == 0); }
};

namespace ckdetail {

/// Compares two composites on every basis vector. Zero-vs-nonzero mismatch
/// always fails; two determined vectors are compared on their common prefix
/// and count as checked only when both retain at least `margin` edges.
inline void compare_words(const TruncatedRep& rep, const OpWord& lhs, const OpWord& rhs,
                          std::uint32_t margin, const std::string& tag, RelationReport& rr) {
  for (const AltPath& x : rep.basis().vectors) {
    OpResult l = rep.apply_word(lhs, x);
    OpResult r = rep.apply_word(rhs, x);
    if (l.kind == OpResult::Kind::Unknown || r.kind == OpResult::Kind::Unknown) {
      ++rr.excluded;
      continue;
    }
    if (l.kind == OpResult::Kind::Zero && r.kind == OpResult::Kind::Zero) {
      ++rr.checked;
      continue;
    }
    if (l.kind != r.kind) {
      rr.fail_on(tag + ": one side vanishes and the other does not");
      continue;
    }
    std::size_t common = std::min(l.p.length(), r.p.length());
    if (common < margin) {
      ++rr.excluded;
      continue;
    }
    if (!(l.w == r.w))
      rr.fail_on(tag + ": weights differ (" + l.w.str() + " vs " + r.w.str() + ")");
    else if (!l.p.prefix_matches(r.p, common))
      rr.fail_on(tag + ": determined prefixes differ");
    else
      ++rr.checked;
  }
}

/// sum over `terms` of (term term^*) must equal P_v: on each basis vector
/// exactly one term survives when the source matches, none otherwise.
inline void compare_projection_sum(const TruncatedRep& rep, const std::vector<Op>& terms,
                                   const Op& pv, std::uint32_t margin, const std::string& tag,
                                   RelationReport& rr) {
  for (const AltPath& x : rep.basis().vectors) {
    OpResult target = rep.apply(pv, x);
    bool excluded = false;
    std::size_t live = 0;
    for (const Op& e : terms) {
      Op adj = e;
      adj.adjoint = true;
      OpResult t = rep.apply_word(OpWord{e, adj}, x);
      if (t.kind == OpResult::Kind::Unknown) {
        excluded = true;
        break;
      }
      if (t.kind == OpResult::Kind::Zero) continue;
      if (t.p.length() < margin) {
        excluded = true;
        break;
      }
      if (!t.w.is_one() || !x.prefix_matches(t.p, t.p.length())) {
        rr.fail_on(tag + ": range projection is not a sub-projection of the identity");
        excluded = true;
        break;
      }
      ++live;
    }
    if (excluded) {
      ++rr.excluded;
      continue;
    }
    const bool should_fix = target.kind == OpResult::Kind::Vec;
    if ((should_fix && live != 1) || (!should_fix && live != 0))
      rr.fail_on(tag + ": range projections do not sum to the vertex projection");
    else
      ++rr.checked;
  }
}

}  // namespace ckdetail

/// All Cuntz-Krieger axioms for both families, as partial-map identities on
/// every basis vector with enough residual depth.
inline RelationReport verify_ck_relations(const TruncatedRep& rep, std::uint32_t margin) {
  const RepContext& c = rep.ctx();
  RelationReport rr;
  const std::size_t nv = c.A.n_rows(), nw = c.B.n_rows();

  std::vector<Op> pvs;
  for (std::uint32_t v = 0; v < nv; ++v) pvs.push_back(Op{Op::Kind::PV, v, false});
  for (std::uint32_t w = 0; w < nw; ++w) pvs.push_back(Op{Op::Kind::PW, w, false});

  // pairwise orthogonal projections, shared by both families
  for (const Op& p : pvs)
    for (const Op& q : pvs) {
      const bool same = p.kind == q.kind && p.index == q.index;
      if (same) {
        ckdetail::compare_words(rep, OpWord{p, q}, OpWord{p}, margin, "P idempotent", rr);
        continue;
      }
      for (const AltPath& x : rep.basis().vectors) {
        OpResult l = rep.apply_word(OpWord{p, q}, x);
        if (l.kind == OpResult::Kind::Unknown)
          ++rr.excluded;
        else if (l.kind != OpResult::Kind::Zero)
          rr.fail_on("P orthogonality: distinct vertex projections overlap");
        else
          ++rr.checked;
      }
    }

  auto edge_ops = [&](bool c_family) {
    std::vector<Op> out;
    if (c_family) {
      for (std::uint32_t a = 0; a < c.table_a().size(); ++a)
        out.push_back(Op{Op::Kind::SA, a, false});
      for (std::uint32_t b = 0; b < c.table_b().size(); ++b)
        out.push_back(Op{Op::Kind::SB, b, false});
    } else {
      for (std::uint32_t r = 0; r < c.table_r().size(); ++r)
        out.push_back(Op{Op::Kind::TR, r, false});
      for (std::uint32_t s = 0; s < c.table_s().size(); ++s)
        out.push_back(Op{Op::Kind::TS, s, false});
    }
    return out;
  };

  auto edge_range = [&](const Op& e) -> Op {
    switch (e.kind) {
      case Op::Kind::SA:
        return Op{Op::Kind::PV, static_cast<std::uint32_t>(c.table_a().edge(e.index).rng),
                  false};
      case Op::Kind::SB:
        return Op{Op::Kind::PW, static_cast<std::uint32_t>(c.table_b().edge(e.index).rng),
                  false};
      case Op::Kind::TR:
        return Op{Op::Kind::PW, static_cast<std::uint32_t>(c.table_r().edge(e.index).rng),
                  false};
      case Op::Kind::TS:
        return Op{Op::Kind::PV, static_cast<std::uint32_t>(c.table_s().edge(e.index).rng),
                  false};
      default:
        return Op{};
    }
  };
  auto edge_source = [&](const Op& e) -> Op {
    switch (e.kind) {
      case Op::Kind::SA:
        return Op{Op::Kind::PV, static_cast<std::uint32_t>(c.table_a().edge(e.index).src),
                  false};
      case Op::Kind::SB:
        return Op{Op::Kind::PW, static_cast<std::uint32_t>(c.table_b().edge(e.index).src),
                  false};
      case Op::Kind::TR:
        return Op{Op::Kind::PV, static_cast<std::uint32_t>(c.table_r().edge(e.index).src),
                  false};
      case Op::Kind::TS:
        return Op{Op::Kind::PW, static_cast<std::uint32_t>(c.table_s().edge(e.index).src),
                  false};
      default:
        return Op{};
    }
  };

  for (bool c_family : {true, false}) {
    const std::string fam = c_family ? "C-family" : "D-family";
    std::vector<Op> edges = edge_ops(c_family);
    for (const Op& e : edges) {
      Op adj = e;
      adj.adjoint = true;
      ckdetail::compare_words(rep, OpWord{adj, e}, OpWord{edge_range(e)}, margin,
                              fam + " S_e^*S_e == P_r(e)", rr);
    }
    for (const Op& p : pvs) {
      std::vector<Op> outgoing;
      for (const Op& e : edges) {
        Op src = edge_source(e);
        if (src.kind == p.kind && src.index == p.index) outgoing.push_back(e);
      }
      if (!outgoing.empty())
        ckdetail::compare_projection_sum(rep, outgoing, p, margin,
                                         fam + " sum S_e S_e^* == P_v", rr);
    }
  }
  rr.finish();
  return rr;
}

/// The two representation equations, evaluated against the path
/// isomorphisms of `c` (which may differ from the witness the rep was built
/// from; that is the fault-injection hook).
inline RelationReport verify_rse_equations(const TruncatedRep& rep, const CSEWitness& c,
                                           std::uint32_t margin) {
  const RepContext& ctx = rep.ctx();
  if (c.se.m != ctx.m || c.se.R != ctx.R || c.se.S != ctx.S)
    fail(errc::invalid_witness, "witness shape does not match the representation");
  RelationReport rr;
  const PathSpace& rs = c.psi_A.domain();
  const PathSpace& sr = c.psi_B.domain();

  // T_{d1 d2} == S_{c1 ... cm} for psi(d1 d2) = c1...cm
  for (std::uint32_t i = 0; i < rs.size(); ++i) {
    const PathKey& p = rs.path(i);
    const PathKey& img = c.psi_A.codomain().path(c.psi_A.forward()[i]);
    OpWord lhs{Op{Op::Kind::TR, p[0], false}, Op{Op::Kind::TS, p[1], false}};
    OpWord rhs;
    for (std::uint32_t a : img) rhs.push_back(Op{Op::Kind::SA, a, false});
    ckdetail::compare_words(rep, lhs, rhs, margin, "T_rs == S_psiA(rs)", rr);
  }
  for (std::uint32_t i = 0; i < sr.size(); ++i) {
    const PathKey& p = sr.path(i);
    const PathKey& img = c.psi_B.codomain().path(c.psi_B.forward()[i]);
    OpWord lhs{Op{Op::Kind::TS, p[0], false}, Op{Op::Kind::TR, p[1], false}};
    OpWord rhs;
    for (std::uint32_t b : img) rhs.push_back(Op{Op::Kind::SB, b, false});
    ckdetail::compare_words(rep, lhs, rhs, margin, "T_sr == S_psiB(sr)", rr);
  }

  // S_c T_d == T_d' S_c' for phi(c d) = d' c'
  const PathSpace& ar = c.phi_R.domain();
  for (std::uint32_t i = 0; i < ar.size(); ++i) {
    const PathKey& p = ar.path(i);
    const PathKey& img = c.phi_R.codomain().path(c.phi_R.forward()[i]);
    OpWord lhs{Op{Op::Kind::SA, p[0], false}, Op{Op::Kind::TR, p[1], false}};
    OpWord rhs{Op{Op::Kind::TR, img[0], false}, Op{Op::Kind::SB, img[1], false}};
    ckdetail::compare_words(rep, lhs, rhs, margin, "S_a T_r == T_r' S_b'", rr);
  }
  const PathSpace& bs = c.phi_S.domain();
  for (std::uint32_t i = 0; i < bs.size(); ++i) {
    const PathKey& p = bs.path(i);
    const PathKey& img = c.phi_S.codomain().path(c.phi_S.forward()[i]);
    OpWord lhs{Op{Op::Kind::SB, p[0], false}, Op{Op::Kind::TS, p[1], false}};
    OpWord rhs{Op{Op::Kind::TS, img[0], false}, Op{Op::Kind::SA, img[1], false}};
    ckdetail::compare_words(rep, lhs, rhs, margin, "S_b T_s == T_s' S_a'", rr);
  }
  rr.finish();
  return rr;
}

/// Vertex projections derived from each family (S_e^* S_e for an incoming
/// edge) coincide as maps on the basis; both families share one P_v.
inline bool vertex_projections_coincide(const TruncatedRep& rep) {
  const RepContext& c = rep.ctx();
  RelationReport rr;
  auto first_incoming_c = [&](Op p) -> std::optional<OpWord> {
    if (p.kind == Op::Kind::PV) {
      for (std::uint32_t a = 0; a < c.table_a().size(); ++a)
        if (c.table_a().edge(a).rng == p.index) {
          Op e{Op::Kind::SA, a, false}, adj = e;
          adj.adjoint = true;
          return OpWord{adj, e};
        }
    } else {
      for (std::uint32_t b = 0; b < c.table_b().size(); ++b)
        if (c.table_b().edge(b).rng == p.index) {
          Op e{Op::Kind::SB, b, false}, adj = e;
          adj.adjoint = true;
          return OpWord{adj, e};
        }
    }
    return std::nullopt;
  };
  auto first_incoming_d = [&](Op p) -> std::optional<OpWord> {
    if (p.kind == Op::Kind::PW) {
      for (std::uint32_t r = 0; r < c.table_r().size(); ++r)
        if (c.table_r().edge(r).rng == p.index) {
          Op e{Op::Kind::TR, r, false}, adj = e;
          adj.adjoint = true;
          return OpWord{adj, e};
        }
    } else {
      for (std::uint32_t s = 0; s < c.table_s().size(); ++s)
        if (c.table_s().edge(s).rng == p.index) {
          Op e{Op::Kind::TS, s, false}, adj = e;
          adj.adjoint = true;
          return OpWord{adj, e};
        }
    }
    return std::nullopt;
  };
  std::vector<Op> pvs;
  for (std::uint32_t v = 0; v < c.A.n_rows(); ++v) pvs.push_back(Op{Op::Kind::PV, v, false});
  for (std::uint32_t w = 0; w < c.B.n_rows(); ++w) pvs.push_back(Op{Op::Kind::PW, w, false});
  for (const Op& p : pvs) {
    auto wc = first_incoming_c(p);
    auto wd = first_incoming_d(p);
    if (!wc || !wd) continue;  // essential matrices always have incoming edges
    ckdetail::compare_words(rep, *wc, *wd, 1, "derived vertex projections", rr);
  }
  rr.finish();
  return rr.pass;
}

// --- dump format ---

inline json alt_path_to_json(const RepContext& c, const AltPath& p) {
  json edges = json::array();
  for (std::size_t i = 0; i < p.idx.size(); ++i) {
    bool is_r = p.starts_v ? (i % 2 == 0) : (i % 2 == 1);
    const EdgeTable& t = is_r ? c.table_r() : c.table_s();
    const Edge& e = t.edge(p.idx[i]);
    edges.push_back(json::array(
        {is_r ? "R" : "S", t.rows().label(e.src), t.cols().label(e.rng), e.ord}));
  }
  return json{{"side", p.starts_v ? "V" : "W"}, {"edges", edges}};
}

inline json op_result_to_json(const RepContext& c, const OpResult& r) {
  switch (r.kind) {
    case OpResult::Kind::Zero:
      return json("zero");
    case OpResult::Kind::Unknown:
      return json("unknown");
    case OpResult::Kind::Vec: {
      json j = alt_path_to_json(c, r.p);
      j["len"] = r.p.length();
      j["weight"] = r.w.str();
      return j;
    }
  }
  return json();
}

inline std::string op_label(const RepContext& c, const Op& op) {
  auto edge_str = [](const EdgeTable& t, std::uint32_t i) {
    const Edge& e = t.edge(i);
    return "(" + t.rows().label(e.src) + "," + t.cols().label(e.rng) + "," +
           std::to_string(e.ord) + ")";
  };
  std::string base;
  switch (op.kind) {
    case Op::Kind::PV: base = "P[" + c.A.rows().label(op.index) + "]"; break;
    case Op::Kind::PW: base = "P[" + c.B.rows().label(op.index) + "]"; break;
    case Op::Kind::SA: base = "S_A" + edge_str(c.table_a(), op.index); break;
    case Op::Kind::SB: base = "S_B" + edge_str(c.table_b(), op.index); break;
    case Op::Kind::TR: base = "T_R" + edge_str(c.table_r(), op.index); break;
    case Op::Kind::TS: base = "T_S" + edge_str(c.table_s(), op.index); break;
  }
  return op.adjoint ? base + "*" : base;
}

/// Full dump: every generator's action on every basis vector, with exact
/// residual lengths and weights.
inline json rep_dump(const TruncatedRep& rep) {
  const RepContext& c = rep.ctx();
  json basis = json::array();
  for (const AltPath& p : rep.basis().vectors) basis.push_back(alt_path_to_json(c, p));
  std::vector<Op> ops;
  for (std::uint32_t v = 0; v < c.A.n_rows(); ++v) ops.push_back(Op{Op::Kind::PV, v, false});
  for (std::uint32_t w = 0; w < c.B.n_rows(); ++w) ops.push_back(Op{Op::Kind::PW, w, false});
  for (std::uint32_t a = 0; a < c.table_a().size(); ++a)
    ops.push_back(Op{Op::Kind::SA, a, false});
  for (std::uint32_t b = 0; b < c.table_b().size(); ++b)
    ops.push_back(Op{Op::Kind::SB, b, false});
  for (std::uint32_t r = 0; r < c.table_r().size(); ++r)
    ops.push_back(Op{Op::Kind::TR, r, false});
  for (std::uint32_t s = 0; s < c.table_s().size(); ++s)
    ops.push_back(Op{Op::Kind::TS, s, false});
  json operators = json::array();
  for (const Op& op : ops) {
    json action = json::array();
    for (std::size_t i = 0; i < rep.basis().vectors.size(); ++i) {
      OpResult r = rep.apply(op, rep.basis().vectors[i]);
      action.push_back(json::array({i, op_result_to_json(c, r)}));
    }
    operators.push_back(json{{"operator", op_label(c, op)}, {"action", action}});
  }
  return json{{"depth", rep.depth()},
              {"lag", c.m},
              {"s_twist", rep.s_twist().str()},
              {"t_s_twist", rep.t_s_twist().str()},
              {"basis", basis},
              {"operators", operators}};
}

}  // namespace shifteq

#endif
