#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jetforms/geomver.hpp"

using namespace jetforms;

static ChartPtr mech() {
  return std::make_shared<const ChartSpec>(std::vector<std::string>{"t"},
                                           std::vector<std::string>{"q"});
}

static ChartPtr plane() {
  return std::make_shared<const ChartSpec>(std::vector<std::string>{"x", "y"},
                                           std::vector<std::string>{"u"});
}

TEST_CASE("monomial normalization") {
  auto a = BasisOneForm::dx(0);
  auto b = BasisOneForm::contact(0, {});
  auto swapped = normalize_monomial({b, a});
  REQUIRE(swapped.has_value());
  CHECK(swapped->second == -1);
  CHECK(swapped->first == FormMonomial{a, b});
  CHECK(!normalize_monomial({a, a}).has_value());
  CHECK(normalize_monomial({a, b})->second == 1);
}

TEST_CASE("wedge is graded anticommutative") {
  auto c = plane();
  DiffForm dx(c, 1, 1), dy(c, 1, 1), w(c, 1, 1);
  dx.add_term(ScalarExpr(1), {BasisOneForm::dx(0)});
  dy.add_term(ScalarExpr(1), {BasisOneForm::dx(1)});
  w.add_term(ScalarExpr::atom(Atom::fiber(0, {})), {BasisOneForm::contact(0, {})});
  CHECK((wedge(dx, dy) + wedge(dy, dx)).is_zero());
  CHECK(wedge(dx, dx).is_zero());
  DiffForm two = wedge(dx, dy);
  CHECK((wedge(two, w) - wedge(w, two)).is_zero());  // even degree commutes
}

TEST_CASE("exterior derivative squares to zero") {
  auto c = plane();
  ScalarExpr u = ScalarExpr::atom(Atom::fiber(0, {}));
  ScalarExpr x = ScalarExpr::atom(Atom::base(0));
  DiffForm f = DiffForm::scalar(c, u * u * x, 1);
  DiffForm df = exterior_derivative(f);
  CHECK(exterior_derivative(df).is_zero());
  // d on a contact 1-form
  DiffForm w(c, 1, 1);
  w.add_term(u, {BasisOneForm::contact(0, {})});
  CHECK(exterior_derivative(exterior_derivative(w)).is_zero());
}

TEST_CASE("d of a function matches total and vertical parts") {
  auto c = mech();
  ScalarExpr q = ScalarExpr::atom(Atom::fiber(0, {}));
  ScalarExpr q1 = ScalarExpr::atom(Atom::fiber(0, {0}));
  DiffForm df = exterior_derivative(DiffForm::scalar(c, q * q1, 1));
  // horizontal part carries the total derivative d_t(q q1) = q1^2 + q q2
  DiffForm h = horizontalize(df);
  DiffForm expect(c, 1, 2);
  expect.add_term(q1 * q1 + q * ScalarExpr::atom(Atom::fiber(0, {0, 0})), {BasisOneForm::dx(0)});
  CHECK((h - expect).is_zero());
  // contact split: df = h(df) + p_1(df)
  auto parts = split_contact(df);
  DiffForm sum(c, 1, df.order() + 1);
  for (const auto& p : parts) sum = sum + p;
  CHECK((sum - df.raised(df.order() + 1)).is_zero());
  CHECK((parts[0] - h).is_zero());
}

TEST_CASE("omega0 contraction") {
  auto c = plane();
  DiffForm w0 = omega0(c, 1);
  REQUIRE(w0.terms().size() == 1);
  DiffForm w1 = omega_lowered(c, {0}, 1);
  // dx^0 ^ omega_0-lowered-by-0 = omega0
  DiffForm dx0(c, 1, 1);
  dx0.add_term(ScalarExpr(1), {BasisOneForm::dx(0)});
  CHECK((wedge(dx0, w1) - w0).is_zero());
}

TEST_CASE("prolongation of a projectable field") {
  auto c = mech();
  // vertical Xi = q d/dq: Xi_J = y_J
  ScalarExpr q = ScalarExpr::atom(Atom::fiber(0, {}));
  VectorFieldSpec v = VectorFieldSpec::vertical(c, {q});
  ProlongedField p = prolong_vector_field(v, 2);
  CHECK((p.component(0, {0}) - ScalarExpr::atom(Atom::fiber(0, {0}))).is_zero());
  CHECK((p.component(0, {0, 0}) - ScalarExpr::atom(Atom::fiber(0, {0, 0}))).is_zero());
  // time translation prolongs to Xi_J = 0
  VectorFieldSpec tt = VectorFieldSpec::coordinate_base(c, 0);
  ProlongedField pt = prolong_vector_field(tt, 2);
  CHECK(pt.component(0, {0}).is_zero());
  CHECK_THROWS_AS(pt.component(0, {0, 0, 0}), Error);
  // xi must be basic, Xi must be order zero
  CHECK_THROWS_AS(VectorFieldSpec(c, {q}, {q}), Error);
  CHECK_THROWS_AS(VectorFieldSpec(c, {ScalarExpr(1)},
                                  {ScalarExpr::atom(Atom::fiber(0, {0}))}),
                  Error);
}

TEST_CASE("interior product is an antiderivation") {
  auto c = plane();
  RandomSource rnd(11);
  ScalarExpr x = ScalarExpr::atom(Atom::base(0));
  VectorFieldSpec v(c, {x, ScalarExpr(1)}, {random_polynomial(rnd, *c, 0, 2, 2)});
  ProlongedField p = prolong_vector_field(v, 2);
  DiffForm a(c, 1, 1), b(c, 1, 1);
  a.add_term(random_polynomial(rnd, *c, 1, 2, 2), {BasisOneForm::dx(0)});
  a.add_term(random_polynomial(rnd, *c, 1, 2, 2), {BasisOneForm::contact(0, {})});
  b.add_term(random_polynomial(rnd, *c, 1, 2, 2), {BasisOneForm::dx(1)});
  b.add_term(random_polynomial(rnd, *c, 1, 2, 2), {BasisOneForm::dy_top(0, {0})});
  DiffForm lhs = interior_product(p, wedge(a, b));
  DiffForm rhs = wedge(interior_product(p, a), b) - wedge(a, interior_product(p, b));
  CHECK((lhs - rhs).is_zero());
}

TEST_CASE("lie derivative via Cartan formula") {
  auto c = mech();
  // L_{d/dt} (t dt) = dt
  ScalarExpr t = ScalarExpr::atom(Atom::base(0));
  DiffForm tdt(c, 1, 1);
  tdt.add_term(t, {BasisOneForm::dx(0)});
  ProlongedField p = prolong_vector_field(VectorFieldSpec::coordinate_base(c, 0), 2);
  DiffForm expect(c, 1, 2);
  expect.add_term(ScalarExpr(1), {BasisOneForm::dx(0)});
  CHECK((lie_derivative(p, tdt) - expect).is_zero());
}

TEST_CASE("zero section pullback") {
  auto c = mech();
  ScalarExpr q = ScalarExpr::atom(Atom::fiber(0, {}));
  ScalarExpr t = ScalarExpr::atom(Atom::base(0));
  DiffForm f(c, 1, 1);
  f.add_term(q + t * t, {BasisOneForm::dx(0)});
  f.add_term(t, {BasisOneForm::contact(0, {})});
  DiffForm z = pullback_zero_section(f);
  DiffForm expect(c, 1, 0);
  expect.add_term(t * t, {BasisOneForm::dx(0)});
  CHECK((z - expect).is_zero());
}

TEST_CASE("natural order detects cancellation") {
  auto c = mech();
  // omega^q_0 rewritten via dy has order 1 content even at ambient order 2
  DiffForm w(c, 1, 2);
  w.add_term(ScalarExpr(1), {BasisOneForm::contact(0, {0})});
  CHECK(natural_order(w) == 2);
  DiffForm dx(c, 1, 2);
  dx.add_term(ScalarExpr::atom(Atom::fiber(0, {0})), {BasisOneForm::dx(0)});
  CHECK(natural_order(dx) == 1);
  CHECK(natural_order(DiffForm(c, 1, 3)) == 0);
}

TEST_CASE("add_term rejects out-of-range factors") {
  auto c = mech();
  DiffForm f(c, 1, 1);
  CHECK_THROWS_AS(f.add_term(ScalarExpr(1), {BasisOneForm::contact(0, {0})}), Error);
  CHECK_THROWS_AS(f.add_term(ScalarExpr(1), {BasisOneForm::dy_top(0, {})}), Error);
  DiffForm g(c, 2, 1);
  CHECK_THROWS_AS(g.add_term(ScalarExpr(1), {BasisOneForm::dx(0)}), Error);
}
