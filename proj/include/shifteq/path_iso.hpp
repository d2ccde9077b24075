#ifndef SHIFTEQ_PATH_ISO_HPP
#define SHIFTEQ_PATH_ISO_HPP

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "shifteq/paths.hpp"

namespace shifteq {

/// Source- and range-preserving bijection between two finite path spaces,
/// stored extensionally in both directions. Domain and codomain are specs
/// (matrix lists), so products and compositions can be type-checked.
class PathIso {
 public:
  PathIso() = default;

  /// Unchecked construction; use verify_path_iso or the factories below.
  PathIso(PathSpaceSpec dom, PathSpaceSpec cod, std::vector<std::uint32_t> fwd)
      : dom_spec_(std::move(dom)),
        cod_spec_(std::move(cod)),
        dom_(materialize(dom_spec_)),
        cod_(materialize(cod_spec_)),
        fwd_(std::move(fwd)) {
    rebuild_backward();
  }

  PathIso(std::shared_ptr<const PathSpace> dom, std::shared_ptr<const PathSpace> cod,
          std::vector<std::uint32_t> fwd)
      : dom_spec_(dom->spec()),
        cod_spec_(cod->spec()),
        dom_(std::move(dom)),
        cod_(std::move(cod)),
        fwd_(std::move(fwd)) {
    rebuild_backward();
  }

  const PathSpaceSpec& domain_spec() const { return dom_spec_; }
  const PathSpaceSpec& codomain_spec() const { return cod_spec_; }
  const PathSpace& domain() const { return *dom_; }
  const PathSpace& codomain() const { return *cod_; }
  const std::vector<std::uint32_t>& forward() const { return fwd_; }
  const std::vector<std::uint32_t>& backward() const { return bwd_; }

  std::uint32_t apply(std::uint32_t dom_index) const { return fwd_.at(dom_index); }
  std::uint32_t apply_inverse(std::uint32_t cod_index) const { return bwd_.at(cod_index); }

  /// Extensional equality: same specs and same graph of pairs.
  friend bool operator==(const PathIso& a, const PathIso& b) {
    return a.dom_spec_ == b.dom_spec_ && a.cod_spec_ == b.cod_spec_ && a.fwd_ == b.fwd_;
  }
  friend bool operator!=(const PathIso& a, const PathIso& b) { return !(a == b); }

  /// Lexicographic order on the forward image sequence; ties broken nowhere
  /// (only used between isos over identical specs).
  static bool lex_less(const PathIso& a, const PathIso& b) { return a.fwd_ < b.fwd_; }

 private:
  void rebuild_backward() {
    if (fwd_.size() != dom_->size())
      fail(errc::shape_mismatch, "forward map size does not match domain");
    bwd_.assign(cod_->size(), UINT32_MAX);
    for (std::uint32_t i = 0; i < fwd_.size(); ++i) {
      if (fwd_[i] >= cod_->size()) fail(errc::shape_mismatch, "image index out of range");
      bwd_[fwd_[i]] = i;
    }
  }

  PathSpaceSpec dom_spec_, cod_spec_;
  std::shared_ptr<const PathSpace> dom_, cod_;
  std::vector<std::uint32_t> fwd_, bwd_;
};

inline PathIso identity_iso(const PathSpaceSpec& spec) {
  auto ps = materialize(spec);
  std::vector<std::uint32_t> fwd(ps->size());
  for (std::uint32_t i = 0; i < fwd.size(); ++i) fwd[i] = i;
  return PathIso(ps, ps, std::move(fwd));
}

/// True iff f is a bijection preserving source and range on every path and
/// the two product matrices agree entrywise.
inline bool verify_path_iso(const PathIso& f) {
  const PathSpace& d = f.domain();
  const PathSpace& c = f.codomain();
  if (d.size() != c.size()) return false;
  if (!d.spec().product().same_entries(c.spec().product())) return false;
  if (d.spec().source_set() != c.spec().source_set()) return false;
  if (d.spec().range_set() != c.spec().range_set()) return false;
  std::vector<bool> hit(c.size(), false);
  for (std::uint32_t i = 0; i < d.size(); ++i) {
    std::uint32_t j = f.forward().at(i);
    if (j >= c.size() || hit[j]) return false;
    hit[j] = true;
    if (d.source_of(i) != c.source_of(j) || d.range_of(i) != c.range_of(j)) return false;
  }
  return true;
}

/// Blockwise canonical bijection: within each (source, range) block the i-th
/// domain path maps to the i-th codomain path in enumeration order. Raises
/// BlockMismatch when some block has unequal cardinalities, which signals
/// that the underlying matrix equation fails.
inline PathIso make_canonical(const PathSpaceSpec& dom, const PathSpaceSpec& cod) {
  auto d = materialize(dom);
  auto c = materialize(cod);
  if (d->spec().source_set() != c->spec().source_set() ||
      d->spec().range_set() != c->spec().range_set())
    fail(errc::block_mismatch, "domain and codomain have different vertex sets");
  std::vector<std::uint32_t> fwd(d->size(), UINT32_MAX);
  for (const auto& [key, dom_block] : d->blocks()) {
    const auto& cod_block = c->block(key.first, key.second);
    if (dom_block.size() != cod_block.size())
      fail(errc::block_mismatch,
           "block (" + d->spec().source_set().label(key.first) + ", " +
               d->spec().range_set().label(key.second) + ") has " +
               std::to_string(dom_block.size()) + " domain paths vs " +
               std::to_string(cod_block.size()) + " codomain paths");
    for (std::size_t i = 0; i < dom_block.size(); ++i) fwd[dom_block[i]] = cod_block[i];
  }
  for (const auto& [key, cod_block] : c->blocks())
    if (d->block(key.first, key.second).size() != cod_block.size())
      fail(errc::block_mismatch, "codomain block missing from domain");
  if (d->size() != c->size()) fail(errc::block_mismatch, "total path counts differ");
  return PathIso(d, c, std::move(fwd));
}

inline PathIso invert(const PathIso& f) {
  return PathIso(f.codomain_spec(), f.domain_spec(), f.backward());
}

/// g after f. Requires f's codomain and g's domain to be the same spec.
inline PathIso compose(const PathIso& g, const PathIso& f) {
  if (f.codomain_spec() != g.domain_spec())
    fail(errc::spec_mismatch, "compose: codomain of f is not the domain of g");
  std::vector<std::uint32_t> fwd(f.domain().size());
  for (std::uint32_t i = 0; i < fwd.size(); ++i) fwd[i] = g.forward()[f.forward()[i]];
  return PathIso(f.domain_spec(), g.codomain_spec(), std::move(fwd));
}

/// Blockwise product: (p, q) -> (f(p), g(q)) on composable concatenations.
inline PathIso product(const PathIso& f, const PathIso& g) {
  if (f.domain_spec().range_set() != g.domain_spec().source_set() ||
      f.codomain_spec().range_set() != g.codomain_spec().source_set())
    fail(errc::non_composable, "product: factors do not concatenate");
  PathSpaceSpec dom = f.domain_spec().concat(g.domain_spec());
  PathSpaceSpec cod = f.codomain_spec().concat(g.codomain_spec());
  auto d = materialize(dom);
  auto c = materialize(cod);
  const std::size_t nf = f.domain_spec().length();
  std::vector<std::uint32_t> fwd(d->size());
  PathKey left, right;
  for (std::uint32_t i = 0; i < d->size(); ++i) {
    const PathKey& p = d->path(i);
    left.assign(p.begin(), p.begin() + nf);
    right.assign(p.begin() + nf, p.end());
    std::int64_t li = f.domain().find(left);
    std::int64_t ri = g.domain().find(right);
    if (li < 0 || ri < 0) fail(errc::type_check_failure, "product: prefix not in factor space");
    const PathKey& lim = f.codomain().path(f.forward()[li]);
    const PathKey& rim = g.codomain().path(g.forward()[ri]);
    PathKey img = lim;
    img.insert(img.end(), rim.begin(), rim.end());
    std::int64_t ci = c->find(img);
    if (ci < 0) fail(errc::type_check_failure, "product: image not composable");
    fwd[i] = static_cast<std::uint32_t>(ci);
  }
  return PathIso(d, c, std::move(fwd));
}

inline PathIso product(const PathIso& f, const PathIso& g, const PathIso& h) {
  return product(product(f, g), h);
}

/// The m-fold staircase of phi : E_X x E_Y -> E_Y x E_Z:
///   phi^(m) = (phi x id_{Z^{m-1}}) o (id_X x phi x id_{Z^{m-2}}) o ... o (id_{X^{m-1}} x phi)
/// with phi^(1) = phi, mapping E_X^m x E_Y -> E_Y x E_Z^m.
inline PathIso phi_power(const PathIso& phi, std::uint64_t m) {
  if (m < 1) fail(errc::invalid_input, "phi_power exponent must be >= 1");
  if (phi.domain_spec().length() != 2 || phi.codomain_spec().length() != 2)
    fail(errc::shape_mismatch, "phi_power needs a two-factor iso");
  const NonnegMatrix& x = phi.domain_spec().factors()[0];
  const NonnegMatrix& y = phi.domain_spec().factors()[1];
  const NonnegMatrix& y2 = phi.codomain_spec().factors()[0];
  const NonnegMatrix& z = phi.codomain_spec().factors()[1];
  if (!x.is_square() || !z.is_square() || y != y2)
    fail(errc::shape_mismatch, "phi_power needs phi : E_X x E_Y -> E_Y x E_Z, X and Z square");
  if (m == 1) return phi;
  PathIso acc = product(identity_iso(PathSpaceSpec::repeated(x, m - 1)), phi);
  for (std::uint64_t j = m - 2;; --j) {
    PathIso term = (j == 0)
                       ? product(phi, identity_iso(PathSpaceSpec::repeated(z, m - 1)))
                       : product(identity_iso(PathSpaceSpec::repeated(x, j)), phi,
                                 identity_iso(PathSpaceSpec::repeated(z, m - 1 - j)));
    acc = compose(term, acc);
    if (j == 0) break;
  }
  return acc;
}

/// Canonical identification of E_{C^n} with E_C^n: in each (v, w) block the
/// k-th edge of C^n maps to the k-th n-path.
inline PathIso power_identification(const NonnegMatrix& c, std::uint64_t n) {
  if (!c.is_square()) fail(errc::not_square, "power_identification needs a square matrix");
  if (n < 1) fail(errc::invalid_input, "power_identification exponent must be >= 1");
  return make_canonical(PathSpaceSpec::single(power(c, n)), PathSpaceSpec::repeated(c, n));
}

// PathIso JSON: { "domain": spec, "codomain": spec, "pairs": [[path, path], ...] }
// with pairs listed in domain enumeration order.
inline json to_json(const PathIso& f) {
  json pairs = json::array();
  for (std::uint32_t i = 0; i < f.domain().size(); ++i)
    pairs.push_back(json::array({path_to_json(f.domain().path(i), f.domain()),
                                 path_to_json(f.codomain().path(f.forward()[i]),
                                              f.codomain())}));
  return json{{"domain", spec_to_json(f.domain_spec())},
              {"codomain", spec_to_json(f.codomain_spec())},
              {"pairs", pairs}};
}

inline PathIso path_iso_from_json(const json& j, const std::string& field = "path_iso") {
  if (!j.is_object() || !j.contains("domain") || !j.contains("codomain") ||
      !j.contains("pairs"))
    fail(errc::invalid_input, "field '" + field + "' must have domain/codomain/pairs");
  PathSpaceSpec dom = spec_from_json(j.at("domain"), field + ".domain");
  PathSpaceSpec cod = spec_from_json(j.at("codomain"), field + ".codomain");
  auto d = materialize(dom);
  auto c = materialize(cod);
  const auto& pairs = j.at("pairs");
  if (!pairs.is_array() || pairs.size() != d->size())
    fail(errc::invalid_input, "field '" + field + ".pairs' has wrong cardinality");
  std::vector<std::uint32_t> fwd(d->size(), UINT32_MAX);
  for (const auto& pr : pairs) {
    if (!pr.is_array() || pr.size() != 2)
      fail(errc::invalid_input, "field '" + field + ".pairs' entries must be [path, path]");
    std::int64_t di = d->find(path_from_json(pr[0], *d, field + ".pairs[0]"));
    std::int64_t ci = c->find(path_from_json(pr[1], *c, field + ".pairs[1]"));
    if (di < 0 || ci < 0)
      fail(errc::invalid_input, "field '" + field + ".pairs' names a nonexistent path");
    if (fwd[di] != UINT32_MAX)
      fail(errc::invalid_input, "field '" + field + ".pairs' assigns a path twice");
    fwd[di] = static_cast<std::uint32_t>(ci);
  }
  return PathIso(d, c, std::move(fwd));
}

}  // namespace shifteq

#endif
