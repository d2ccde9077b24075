#include <catch2/catch_amalgamated.hpp>

#include "support/corpus.hpp"

using namespace shifteq;
using testsupport::Gen;

TEST_CASE("verify_se checks the four defining equations", "[equivalences]") {
  testsupport::WorkedPair wp;

  SECTION("identity witness") {
    NonnegMatrix a = NonnegMatrix::square({{1, 2}, {1, 1}});
    SEWitness w{1, a, NonnegMatrix::identity(a.rows())};
    CHECK(verify_se(a, a, w));
  }

  SECTION("elementary pair") {
    CHECK(verify_se(wp.a1, wp.b, SEWitness{1, wp.r, wp.s}));
  }

  SECTION("a non-witness is refuted") {
    IndexSet u = IndexSet::numbered(1, "u");
    NonnegMatrix two = NonnegMatrix::rect({{2}}, u, u);
    NonnegMatrix four = NonnegMatrix::rect({{4}}, u, u);
    SEWitness w{1, NonnegMatrix::rect({{1}}, u, u), NonnegMatrix::rect({{2}}, u, u)};
    CHECK_FALSE(verify_se(two, four, w));  // S*R == [[2]] != [[4]]
    CheckList checks = verify_se_checks(two, four, w);
    bool sr_failed = false;
    for (auto& [name, ok] : checks)
      if (name == "B^m == S*R") sr_failed = !ok;
    CHECK(sr_failed);
  }

  SECTION("both intertwining orderings are surfaced when shapes allow") {
    NonnegMatrix a = NonnegMatrix::square({{1, 1}, {1, 1}});
    SEWitness w{1, a, NonnegMatrix::identity(a.rows())};
    CheckList checks = verify_se_checks(a, a, w);
    bool saw_alt = false;
    for (auto& [name, ok] : checks)
      if (name.find("alternate ordering") != std::string::npos) saw_alt = true;
    CHECK(saw_alt);
  }

  SECTION("dimension errors") {
    CHECK_THROWS_AS(verify_se(wp.a1, wp.b, SEWitness{1, wp.s, wp.r}), Error);
  }
}

TEST_CASE("sse_step_to_cse builds verified lag-1 witnesses", "[equivalences]") {
  testsupport::WorkedPair wp;
  CSEWitness c = sse_step_to_cse(wp.a1, wp.b, wp.step());
  CHECK(c.se.m == 1);
  CHECK(c.psi_A.domain().size() == 4);
  CHECK(verify_cse(wp.a1, wp.b, c));

  SECTION("singleton matrices give singleton identity maps") {
    IndexSet u = IndexSet::numbered(1, "u");
    NonnegMatrix one = NonnegMatrix::rect({{1}}, u, u);
    CSEWitness tiny = sse_step_to_cse(one, one, ElementaryStep{one, one});
    CHECK(tiny.psi_A.domain().size() == 1);
    CHECK(tiny.phi_R.domain().size() == 1);
    CHECK(verify_cse(one, one, tiny));
  }

  SECTION("identity-like witness via R = A, S = I") {
    CSEWitness idc =
        sse_step_to_cse(wp.a1, wp.a1, ElementaryStep{wp.a1, NonnegMatrix::identity(wp.a1.rows())});
    CHECK(verify_cse(wp.a1, wp.a1, idc));
  }

  SECTION("a non-factorization is rejected") {
    CHECK_THROWS_AS(sse_step_to_cse(wp.a1, wp.a1, wp.step()), Error);
  }
}

TEST_CASE("verify_cse detects corrupted isomorphisms", "[equivalences]") {
  testsupport::WorkedPair wp;
  CSEWitness c = sse_step_to_cse(wp.a1, wp.b, wp.step());

  SECTION("a block transposition in psi_B breaks compatibility") {
    // psi_B's single block has two elements; swapping them changes the map
    std::vector<std::uint32_t> fwd = c.psi_B.forward();
    REQUIRE(fwd.size() == 2);
    std::swap(fwd[0], fwd[1]);
    CSEWitness bad = c;
    bad.psi_B = PathIso(c.psi_B.domain_spec(), c.psi_B.codomain_spec(), fwd);
    CHECK(verify_path_iso(bad.psi_B));  // still a path iso
    CHECK_FALSE(verify_cse(wp.a1, wp.b, bad));  // but no longer compatible
  }

  SECTION("an invalid underlying SE throws") {
    NonnegMatrix four = NonnegMatrix::rect({{4}}, wp.w, wp.w);
    CHECK_THROWS_AS(verify_cse(wp.a1, four, c), Error);
  }
}

TEST_CASE("derived identities hold on every compatible witness", "[equivalences]") {
  testsupport::WorkedPair wp;
  CSEWitness c = sse_step_to_cse(wp.a1, wp.b, wp.step());
  CHECK(check_derived_identities(wp.a1, wp.b, c));

  SECTION("composites keep the identities") {
    CSEWitness c2 = sse_step_to_cse(wp.b, wp.a1, ElementaryStep{wp.s, wp.r});
    CSEWitness comp = compose_cse(c, c2);
    CHECK(check_derived_identities(wp.a1, wp.a1, comp));
  }

  SECTION("unverified witnesses are rejected up front") {
    CSEWitness bad = c;
    std::vector<std::uint32_t> fwd = bad.psi_B.forward();
    std::swap(fwd[0], fwd[1]);
    bad.psi_B = PathIso(bad.psi_B.domain_spec(), bad.psi_B.codomain_spec(), fwd);
    CHECK_THROWS_AS(check_derived_identities(wp.a1, wp.b, bad), Error);
  }
}

TEST_CASE("compose_cse is the transitivity construction", "[equivalences]") {
  testsupport::WorkedPair wp;
  NonnegMatrix id_a = NonnegMatrix::identity(wp.a1.rows());
  CSEWitness idc = sse_step_to_cse(wp.a1, wp.a1, ElementaryStep{wp.a1, id_a});

  SECTION("identity composed with itself verifies at lag 2") {
    CSEWitness comp = compose_cse(idc, idc);
    CHECK(comp.se.m == 2);
    CHECK(verify_cse(wp.a1, wp.a1, comp));
  }

  SECTION("composing with the identity pads the lag but transports the same way") {
    CSEWitness c = sse_step_to_cse(wp.a1, wp.b, wp.step());
    NonnegMatrix id_b = NonnegMatrix::identity(wp.b.rows());
    CSEWitness idb = sse_step_to_cse(wp.b, wp.b, ElementaryStep{wp.b, id_b});
    CSEWitness comp = compose_cse(c, idb);
    REQUIRE(comp.se.R == multiply(wp.r, wp.b));
    // under the canonical identification E_{R*B} = E_R x E_B, the padded
    // phi is exactly phi_R x id_B
    PathIso cr = make_canonical(PathSpaceSpec::single(comp.se.R),
                                PathSpaceSpec({wp.r, wp.b}));
    PathIso expected = compose(
        product(invert(cr), identity_iso(PathSpaceSpec::single(wp.b))),
        compose(product(c.phi_R, identity_iso(PathSpaceSpec::single(wp.b))),
                product(identity_iso(PathSpaceSpec::single(wp.a1)), cr)));
    CHECK(comp.phi_R == expected);
  }

  SECTION("random composable pairs compose soundly") {
    Gen g(31);
    int done = 0;
    while (done < 12) {
      auto s1 = g.step(3, 8);
      if (!s1) continue;
      ElementaryStep f2 = g.factor_of(s1->b);
      NonnegMatrix c_mat = f2.successor();
      CSEWitness w1 = sse_step_to_cse(s1->a, s1->b, s1->step);
      CSEWitness w2 = sse_step_to_cse(s1->b, c_mat, f2);
      CSEWitness comp = compose_cse(w1, w2);
      CHECK(verify_cse(s1->a, c_mat, comp));
      CHECK(check_derived_identities(s1->a, c_mat, comp));
      ++done;
    }
  }

  SECTION("middle mismatch is reported") {
    CSEWitness c = sse_step_to_cse(wp.a1, wp.b, wp.step());
    CHECK_THROWS_AS(compose_cse(c, c), Error);
  }
}

TEST_CASE("chain_to_cse folds elementary witnesses", "[equivalences]") {
  testsupport::WorkedPair wp;

  SECTION("length one equals the single-step construction") {
    SSEChain chain{wp.a1, {wp.step()}};
    CSEWitness folded = chain_to_cse(chain, wp.b);
    CSEWitness direct = sse_step_to_cse(wp.a1, wp.b, wp.step());
    CHECK(folded.se.m == direct.se.m);
    CHECK(folded.se.R == direct.se.R);
    CHECK(folded.psi_A == direct.psi_A);
    CHECK(folded.phi_R == direct.phi_R);
    CHECK(folded.phi_S == direct.phi_S);
    CHECK(folded.psi_B == direct.psi_B);
  }

  SECTION("round trip through the small matrix and back") {
    SSEChain chain{wp.a1, {wp.step(), ElementaryStep{wp.s, wp.r}}};
    CSEWitness c = chain_to_cse(chain, wp.a1);
    CHECK(c.se.m == 2);
    CHECK(verify_cse(wp.a1, wp.a1, c));
  }

  SECTION("empty chain gives the identity witness") {
    SSEChain chain{wp.a1, {}};
    CSEWitness c = chain_to_cse(chain, wp.a1);
    CHECK(c.se.m == 1);
    CHECK(c.se.R == wp.a1);
    CHECK(verify_cse(wp.a1, wp.a1, c));
  }

  SECTION("random chains of length up to three verify") {
    Gen g(77);
    int done = 0;
    while (done < 6) {
      auto s1 = g.step(2, 6);
      if (!s1) continue;
      SSEChain chain{s1->a, {s1->step}};
      NonnegMatrix cur = s1->b;
      long extra = g.pick(0, 2);
      for (long i = 0; i < extra; ++i) {
        ElementaryStep next = g.factor_of(cur);
        chain.steps.push_back(next);
        cur = next.successor();
      }
      CSEWitness c = chain_to_cse(chain, cur);
      CHECK(c.se.m == chain.steps.size());
      CHECK(verify_cse(s1->a, cur, c));
      ++done;
    }
  }

  SECTION("broken chains are rejected") {
    SSEChain chain{wp.a1, {wp.step()}};
    CHECK_THROWS_AS(chain_to_cse(chain, wp.a1), Error);  // ends at [[2]], not A1
    SSEChain bad{wp.b, {wp.step()}};
    CHECK_THROWS_AS(chain_to_cse(bad, wp.b), Error);  // step does not factor [[2]]
  }
}

TEST_CASE("a compatible witness always embeds an SE witness", "[equivalences][property]") {
  Gen g(123);
  int done = 0;
  while (done < 15) {
    auto s = g.step(3, 8);
    if (!s) continue;
    CSEWitness c = sse_step_to_cse(s->a, s->b, s->step);
    CHECK(verify_se(s->a, s->b, c.se));
    ++done;
  }
}

TEST_CASE("witness JSON bundles round trip", "[equivalences][json]") {
  testsupport::WorkedPair wp;
  CSEWitness c = sse_step_to_cse(wp.a1, wp.b, wp.step());
  json j = cse_witness_to_json(wp.a1, wp.b, c);
  CSEWitness back = cse_witness_from_json(j);
  CHECK(back.se.m == c.se.m);
  CHECK(back.se.R == c.se.R);
  CHECK(back.se.S == c.se.S);
  CHECK(back.phi_R == c.phi_R);
  CHECK(back.phi_S == c.phi_S);
  CHECK(back.psi_A == c.psi_A);
  CHECK(back.psi_B == c.psi_B);
  CHECK(verify_cse(back.matrix_a(), back.matrix_b(), back));
  CHECK(cse_witness_to_json(back.matrix_a(), back.matrix_b(), back).dump() == j.dump());
}
