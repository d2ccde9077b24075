#include <catch2/catch_amalgamated.hpp>

#include "support/corpus.hpp"

using namespace shifteq;
using testsupport::Gen;

TEST_CASE("multiply computes exact products", "[matrix]") {
  IndexSet v = IndexSet::numbered(2, "v"), w = IndexSet::numbered(1, "w");
  NonnegMatrix col = NonnegMatrix::rect({{1}, {1}}, v, w);
  NonnegMatrix row = NonnegMatrix::rect({{1, 1}}, w, v);
  CHECK(multiply(col, row) == NonnegMatrix::rect({{1, 1}, {1, 1}}, v, v));
  CHECK(multiply(row, col) == NonnegMatrix::rect({{2}}, w, w));

  NonnegMatrix m = NonnegMatrix::square({{3, 1}, {0, 2}});
  CHECK(multiply(NonnegMatrix::identity(m.rows()), m) == m);
  CHECK(multiply(m, NonnegMatrix::identity(m.rows())) == m);

  CHECK_THROWS_AS(multiply(col, col), Error);
}

TEST_CASE("power computes exact powers", "[matrix]") {
  NonnegMatrix fib = NonnegMatrix::square({{1, 1}, {1, 0}});
  CHECK(power(fib, 2) == NonnegMatrix::square({{2, 1}, {1, 1}}));
  CHECK(power(fib, 1) == fib);
  CHECK(power(NonnegMatrix::square({{2}}), 3) == NonnegMatrix::square({{8}}));
  IndexSet v = IndexSet::numbered(2, "v"), w = IndexSet::numbered(1, "w");
  CHECK_THROWS_AS(power(NonnegMatrix::rect({{1}, {1}}, v, w), 2), Error);
}

TEST_CASE("is_essential detects zero rows and columns", "[matrix]") {
  CHECK(is_essential(NonnegMatrix::square({{1, 1}, {1, 0}})));
  CHECK_FALSE(is_essential(NonnegMatrix::square({{0, 0}, {1, 1}})));
  CHECK_FALSE(is_essential(NonnegMatrix::square({{1, 0}, {1, 0}})));
}

TEST_CASE("block_assemble places blocks and prefixes labels", "[matrix]") {
  IndexSet v = IndexSet::numbered(1, "v"), w = IndexSet::numbered(1, "w");
  auto [c, d] = block_assemble(NonnegMatrix::rect({{2}}, v, v), NonnegMatrix::rect({{2}}, w, w),
                               NonnegMatrix::rect({{1}}, v, w), NonnegMatrix::rect({{2}}, w, v));
  CHECK(c.rows().labels() == std::vector<std::string>{"L:v0", "R:w0"});
  CHECK(c.at("L:v0", "L:v0") == 2);
  CHECK(c.at("L:v0", "R:w0") == 0);
  CHECK(c.at("R:w0", "R:w0") == 2);
  CHECK(d.at("L:v0", "R:w0") == 1);
  CHECK(d.at("R:w0", "L:v0") == 2);
  CHECK(d.at("L:v0", "L:v0") == 0);

  SECTION("unit blocks") {
    auto [c2, d2] =
        block_assemble(NonnegMatrix::rect({{1}}, v, v), NonnegMatrix::rect({{1}}, w, w),
                       NonnegMatrix::rect({{1}}, v, w), NonnegMatrix::rect({{1}}, w, v));
    CHECK(c2 == NonnegMatrix::identity(c2.rows()));
    CHECK(d2.at("L:v0", "R:w0") == 1);
    CHECK(d2.at("R:w0", "L:v0") == 1);
  }

  SECTION("elementary pair satisfies D*D == C") {
    testsupport::WorkedPair wp;
    auto [cc, dd] = block_assemble(wp.a1, wp.b, wp.r, wp.s);
    CHECK(multiply(dd, dd) == power(cc, 1));
    CHECK(multiply(cc, dd) == multiply(dd, cc));
  }
}

TEST_CASE("block equations hold exactly when the witness equations do", "[matrix][property]") {
  Gen g(2024);
  int done = 0;
  while (done < 25) {
    auto s = g.step(3, 10);
    if (!s) continue;
    ++done;
    SEWitness w{1, s->step.R, s->step.S};
    REQUIRE(verify_se(s->a, s->b, w));
    auto [c, d] = block_assemble(s->a, s->b, s->step.R, s->step.S);
    CHECK(multiply(c, d) == multiply(d, c));
    CHECK(multiply(d, d) == power(c, 1));
  }
  // non-witnesses violate at least one block equation
  int bad = 0;
  while (bad < 25) {
    auto s = g.step(3, 10);
    if (!s) continue;
    NonnegMatrix b2 = multiply(s->step.S, s->step.R);
    std::vector<Int> e(b2.entries());
    e[static_cast<std::size_t>(g.pick(0, static_cast<long>(e.size()) - 1))] += 1;
    NonnegMatrix corrupt(b2.rows(), b2.cols(), e);
    SEWitness w{1, s->step.R, s->step.S};
    REQUIRE_FALSE(verify_se(s->a, corrupt, w));
    auto [c, d] = block_assemble(s->a, corrupt, s->step.R, s->step.S);
    bool all_hold = multiply(c, d) == multiply(d, c) && multiply(d, d) == power(c, 1);
    CHECK_FALSE(all_hold);
    ++bad;
  }
}

TEST_CASE("multiply is associative and powers add", "[matrix][property]") {
  Gen g(99);
  for (int i = 0; i < 20; ++i) {
    long n1 = g.pick(1, 3), n2 = g.pick(1, 3), n3 = g.pick(1, 3), n4 = g.pick(1, 3);
    IndexSet i1 = IndexSet::numbered(n1, "a"), i2 = IndexSet::numbered(n2, "b");
    IndexSet i3 = IndexSet::numbered(n3, "c"), i4 = IndexSet::numbered(n4, "d");
    auto rnd = [&](const IndexSet& r, const IndexSet& c) {
      std::vector<Int> e;
      for (std::size_t k = 0; k < r.size() * c.size(); ++k) e.emplace_back(g.pick(0, 3));
      return NonnegMatrix(r, c, e);
    };
    NonnegMatrix x = rnd(i1, i2), y = rnd(i2, i3), z = rnd(i3, i4);
    CHECK(multiply(multiply(x, y), z) == multiply(x, multiply(y, z)));

    NonnegMatrix sq = rnd(i1, i1);
    long j = g.pick(1, 3), k = g.pick(1, 3);
    CHECK(power(sq, static_cast<std::uint64_t>(j + k)) ==
          multiply(power(sq, static_cast<std::uint64_t>(j)),
                   power(sq, static_cast<std::uint64_t>(k))));
  }
}

TEST_CASE("matrix JSON uses decimal strings and round trips", "[matrix][json]") {
  Int big = 1;
  for (int i = 0; i < 100; ++i) big *= 2;
  IndexSet v({std::vector<std::string>{"p", "q"}});
  NonnegMatrix m(v, v, {big, 0, 1, big + 1});
  json j = to_json(m);
  CHECK(j["entries"][0][0] == big.get_str());
  NonnegMatrix back = matrix_from_json(j);
  CHECK(back == m);

  CHECK_THROWS_AS(matrix_from_json(json{{"rows", {"a"}}, {"cols", {"a"}},
                                        {"entries", {{"-1"}}}}),
                  Error);
  CHECK_THROWS_AS(matrix_from_json(json{{"rows", {"a"}}, {"cols", {"a"}},
                                        {"entries", json::array()}}),
                  Error);
}
