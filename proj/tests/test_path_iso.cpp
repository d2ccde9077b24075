#include <catch2/catch_amalgamated.hpp>

#include "support/corpus.hpp"

using namespace shifteq;
using testsupport::Gen;

namespace {

// the canonical iso between the two factorization orders of the worked pair
PathIso worked_psi_a() {
  testsupport::WorkedPair wp;
  return make_canonical(PathSpaceSpec({wp.r, wp.s}), PathSpaceSpec::single(wp.a1));
}

}  // namespace

TEST_CASE("make_canonical pairs blocks in enumeration order", "[path-iso]") {
  testsupport::WorkedPair wp;
  PathIso f = make_canonical(PathSpaceSpec({wp.a1, wp.r}), PathSpaceSpec({wp.r, wp.b}));
  CHECK(f.domain().size() == 4);
  CHECK(verify_path_iso(f));

  PathSpaceSpec one = PathSpaceSpec::single(wp.a1);
  PathIso id = make_canonical(one, one);
  CHECK(id == identity_iso(one));

  CHECK_THROWS_AS(make_canonical(PathSpaceSpec::single(NonnegMatrix::square({{2}})),
                                 PathSpaceSpec::single(NonnegMatrix::square({{3}}))),
                  Error);
}

TEST_CASE("make_canonical succeeds exactly when products agree", "[path-iso][property]") {
  Gen g(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = g.step(3, 10);
    if (!s) continue;
    // products agree: R*S == A
    CHECK_NOTHROW(make_canonical(PathSpaceSpec({s->step.R, s->step.S}),
                                 PathSpaceSpec::single(s->a)));
    // products disagree after bumping one entry of A
    std::vector<Int> e(s->a.entries());
    e[0] += 1;
    NonnegMatrix bumped(s->a.rows(), s->a.cols(), e);
    CHECK_THROWS_AS(make_canonical(PathSpaceSpec({s->step.R, s->step.S}),
                                   PathSpaceSpec::single(bumped)),
                    Error);
  }
}

TEST_CASE("compose, invert, product behave extensionally", "[path-iso]") {
  PathIso f = worked_psi_a();
  PathIso idd = identity_iso(f.domain_spec());
  PathIso idc = identity_iso(f.codomain_spec());

  CHECK(compose(invert(f), f) == idd);
  CHECK(compose(f, invert(f)) == idc);
  CHECK(compose(idc, f) == f);
  CHECK(compose(f, idd) == f);
  CHECK(invert(invert(f)) == f);
  CHECK(invert(idd) == idd);

  SECTION("compose equals the pointwise composition table") {
    PathIso g = invert(f);
    PathIso gf = compose(g, f);
    for (std::uint32_t i = 0; i < f.domain().size(); ++i)
      CHECK(gf.apply(i) == g.apply(f.apply(i)));
  }

  SECTION("product of identities is the identity") {
    testsupport::WorkedPair wp;
    PathIso ida = identity_iso(PathSpaceSpec::single(wp.a1));
    PathIso idr = identity_iso(PathSpaceSpec::single(wp.r));
    CHECK(product(ida, idr) == identity_iso(PathSpaceSpec({wp.a1, wp.r})));
  }

  SECTION("product respects inverses componentwise") {
    testsupport::WorkedPair wp;
    PathIso psi_b = make_canonical(PathSpaceSpec({wp.s, wp.r}), PathSpaceSpec::single(wp.b));
    PathIso idr = identity_iso(PathSpaceSpec::single(wp.r));
    PathIso p = product(idr, psi_b);
    CHECK(invert(p) == product(idr, invert(psi_b)));
    CHECK(compose(invert(p), p) == identity_iso(p.domain_spec()));
  }

  SECTION("product domain size matches the concatenated product matrix") {
    testsupport::WorkedPair wp;
    PathIso psi_b = make_canonical(PathSpaceSpec({wp.s, wp.r}), PathSpaceSpec::single(wp.b));
    PathIso p = product(worked_psi_a(), psi_b);
    CHECK(Int(static_cast<unsigned long>(p.domain().size())) ==
          p.domain_spec().product().entry_sum());
  }
}

TEST_CASE("verify_path_iso rejects broken maps", "[path-iso]") {
  PathIso f = worked_psi_a();
  CHECK(verify_path_iso(f));

  SECTION("a transposed pair across blocks breaks range preservation") {
    // domain paths 0 and 1 lie in different (v, w) blocks here
    std::vector<std::uint32_t> fwd = f.forward();
    std::uint32_t i = 0, j = 0;
    const PathSpace& d = f.domain();
    bool found = false;
    for (i = 0; i < d.size() && !found; ++i)
      for (j = i + 1; j < d.size() && !found; ++j)
        if (d.source_of(i) != d.source_of(j) || d.range_of(i) != d.range_of(j)) found = true;
    REQUIRE(found);
    std::swap(fwd[i - 1], fwd[j - 1]);
    PathIso broken(f.domain_spec(), f.codomain_spec(), fwd);
    CHECK_FALSE(verify_path_iso(broken));
  }

  SECTION("a non-injective map fails") {
    std::vector<std::uint32_t> fwd = f.forward();
    fwd[1] = fwd[0];
    PathIso broken(f.domain_spec(), f.codomain_spec(), fwd);
    CHECK_FALSE(verify_path_iso(broken));
  }
}

TEST_CASE("phi_power implements the staircase", "[path-iso]") {
  testsupport::WorkedPair wp;
  CSEWitness c = sse_step_to_cse(wp.a1, wp.b, wp.step());
  const PathIso& phi = c.phi_R;

  CHECK(phi_power(phi, 1) == phi);

  SECTION("two steps equal direct transport of each three-edge path") {
    PathIso p2 = phi_power(phi, 2);
    // manual transport: apply phi at the last two coordinates, then at the
    // first two
    const PathSpace& dom = p2.domain();
    PathSpace phi_dom(phi.domain_spec());
    PathSpace phi_cod(phi.codomain_spec());
    for (std::uint32_t i = 0; i < dom.size(); ++i) {
      PathKey u = dom.path(i);
      REQUIRE(u.size() == 3);
      std::int64_t d1 = phi_dom.find({u[1], u[2]});
      REQUIRE(d1 >= 0);
      PathKey m1 = phi_cod.path(phi.apply(static_cast<std::uint32_t>(d1)));
      std::int64_t d2 = phi_dom.find({u[0], m1[0]});
      REQUIRE(d2 >= 0);
      PathKey m2 = phi_cod.path(phi.apply(static_cast<std::uint32_t>(d2)));
      PathKey expect{m2[0], m2[1], m1[1]};
      CHECK(p2.codomain().path(p2.apply(i)) == expect);
    }
  }

  SECTION("domain cardinality is the entry sum of X^m * Y") {
    PathIso p3 = phi_power(phi, 3);
    NonnegMatrix prod = multiply(power(wp.a1, 3), wp.r);
    CHECK(Int(static_cast<unsigned long>(p3.domain().size())) == prod.entry_sum());
  }

  SECTION("staircase recursion") {
    for (std::uint64_t m = 1; m <= 3; ++m) {
      PathIso lhs = phi_power(phi, m + 1);
      PathIso rhs = compose(
          product(phi, identity_iso(PathSpaceSpec::repeated(wp.b, m))),
          product(identity_iso(PathSpaceSpec::single(wp.a1)), phi_power(phi, m)));
      CHECK(lhs == rhs);
    }
  }

  SECTION("validity is preserved by invert, product, phi_power") {
    CHECK(verify_path_iso(invert(phi)));
    CHECK(verify_path_iso(product(phi, identity_iso(PathSpaceSpec::single(wp.b)))));
    CHECK(verify_path_iso(phi_power(phi, 2)));
  }
}

TEST_CASE("path iso JSON round trips extensionally", "[path-iso][json]") {
  PathIso f = worked_psi_a();
  json j = to_json(f);
  PathIso back = path_iso_from_json(j);
  CHECK(back == f);
  CHECK(to_json(back).dump() == j.dump());

  json tampered = j;
  tampered["pairs"][0][1] = tampered["pairs"][1][1];
  CHECK_THROWS_AS(path_iso_from_json(tampered), Error);
}
