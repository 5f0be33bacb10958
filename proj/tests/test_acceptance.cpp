// End-to-end acceptance checks: one pass/fail line per criterion.
#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

#include "jetforms/hilbert.hpp"

using namespace jetforms;

namespace {

int g_failures = 0;

void criterion(int n, const std::string& name, const std::function<void()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  std::string err;
  try {
    body();
  } catch (const std::exception& e) {
    err = e.what();
  }
  auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream line;
  if (err.empty()) {
    line << "PASS " << n << ": " << name;
  } else {
    ++g_failures;
    line << "FAIL " << n << ": " << name << " -- " << err;
  }
  line.precision(1);
  line << " (" << std::fixed << dt << "s)";
  std::cout << line.str() << std::endl;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

ScalarExpr y(int f, MultiIndex j = {}) { return ScalarExpr::atom(Atom::fiber(f, j)); }

ChartPtr make_chart(int n, int m, std::vector<std::string> params = {},
                    std::vector<OpaqueSymbol> opaque = {}) {
  std::vector<std::string> base, fields;
  for (int i = 0; i < n; ++i) base.push_back("x" + std::to_string(i));
  for (int f = 0; f < m; ++f) fields.push_back("u" + std::to_string(f));
  return std::make_shared<const ChartSpec>(base, fields, std::move(params), std::move(opaque));
}

// random exterior form with polynomial coefficients
DiffForm random_form(RandomSource& rnd, const ChartPtr& chart, int degree, int order, int terms) {
  std::vector<BasisOneForm> basis;
  for (int i = 0; i < chart->n(); ++i) basis.push_back(BasisOneForm::dx(i));
  for (int sigma = 0; sigma < chart->field_count(); ++sigma) {
    for (int k = 0; k < order; ++k)
      for (const MultiIndex& J : sorted_multi_indices(chart->n(), k))
        basis.push_back(BasisOneForm::contact(sigma, J));
    for (const MultiIndex& J : sorted_multi_indices(chart->n(), order))
      basis.push_back(BasisOneForm::dy_top(sigma, J));
  }
  DiffForm rho(chart, degree, order);
  for (int t = 0; t < terms; ++t) {
    FormMonomial m;
    for (int k = 0; k < degree; ++k)
      m.push_back(basis[static_cast<std::size_t>(
          rnd.uniform_int(0, static_cast<int>(basis.size()) - 1))]);
    if (!normalize_monomial(m)) continue;
    rho.add_term(random_polynomial(rnd, *chart, order, 2, 2), m);
  }
  return rho;
}

// trivial Lagrangian lambda = h(d alpha) from a random (n-1)-form alpha
Lagrangian trivial_lagrangian(RandomSource& rnd, const ChartPtr& chart, int alpha_order) {
  DiffForm alpha = random_form(rnd, chart, chart->n() - 1, alpha_order, 3);
  DiffForm hda = horizontalize(exterior_derivative(alpha));
  ScalarExpr density;
  if (!hda.is_zero()) density = hda.terms().begin()->second;
  return Lagrangian(chart, density);
}

const Rational kEta[4] = {Rational(1), Rational(-1), Rational(-1), Rational(-1)};

}  // namespace

// -------------------------------------------------------------------------

static void klein_gordon() {
  auto c = make_chart(4, 1, {"m2"});
  // field u0 plays the scalar field
  ScalarExpr m2 = ScalarExpr::atom(Atom::param(0));
  ScalarExpr L;
  for (int i = 0; i < 4; ++i) L += ScalarExpr(Rational(1, 2) * kEta[i]) * y(0, {i}) * y(0, {i});
  L -= ScalarExpr(Rational(1, 2)) * m2 * y(0) * y(0);
  Lagrangian lag(c, L);

  SourceForm el = euler_lagrange(lag);
  ScalarExpr el_ref = -m2 * y(0);
  for (int i = 0; i < 4; ++i) el_ref -= ScalarExpr(kEta[i]) * y(0, {i, i});
  require((el.components[0] - el_ref).is_zero(), "Euler-Lagrange form mismatch");

  LepageResult phi = canonical_lepage(lag);
  ScalarExpr lvt_ref;
  for (int i = 0; i < 4; ++i) lvt_ref -= ScalarExpr(Rational(1, 2) * kEta[i]) * y(0) * y(0, {i, i});
  lvt_ref -= ScalarExpr(Rational(1, 2)) * m2 * y(0) * y(0);
  require((phi.lambda_vt->density - lvt_ref).is_zero(), "Vainberg-Tonti density mismatch");

  // alpha^i = 1/2 eta^{ij} u u_j, compared through d(alpha)
  int ord = phi.alpha->order();
  DiffForm alpha_ref(c, 3, ord);
  for (int i = 0; i < 4; ++i)
    alpha_ref = alpha_ref + (ScalarExpr(Rational(1, 2) * kEta[i]) * y(0) * y(0, {i})) *
                                omega_lowered(c, {i}, ord);
  require((exterior_derivative(alpha_ref) - *phi.d_alpha).is_zero(),
          "boundary term d(alpha) mismatch");

  FirstOrderNu nu = first_order_nu(lag);
  require(nu.nu.is_zero(), "nu correction should vanish");

  DiffForm theta = principal_lepage(lag).form;
  require((phi.form - theta).is_zero(), "canonical and principal forms should coincide");
  DiffForm theta_ref = lag.form();
  for (int i = 0; i < 4; ++i) {
    DiffForm w(c, 1, 1);
    w.add_term(ScalarExpr(kEta[i]) * y(0, {i}), {BasisOneForm::contact(0, {})});
    theta_ref = theta_ref + wedge(w, omega_lowered(c, {i}, 1));
  }
  require((theta - theta_ref).is_zero(), "principal form differs from the reference expression");
}

// -------------------------------------------------------------------------

namespace {

struct EmSetup {
  ChartPtr chart;
  Lagrangian lag;
  std::map<Atom, ScalarExpr> gauge;  // A_{p,J} -> A_{p,J} + d^{|J|+1} f
  ScalarExpr Fup[4][4];              // F^{ij}
};

EmSetup em_setup() {
  // opaque atoms df1[i], df2[i,j], df3[i,j,k] stand for derivatives of a
  // gauge function f(x); only used inside substitutions
  std::vector<OpaqueSymbol> symbols;
  for (int arity = 1; arity <= 3; ++arity) {
    OpaqueSymbol s;
    s.name = "df" + std::to_string(arity);
    s.arity = arity;
    s.symmetric = true;
    symbols.push_back(std::move(s));
  }
  std::vector<std::string> fields;
  for (int i = 0; i < 4; ++i) fields.push_back("A" + std::to_string(i));
  EmSetup out{std::make_shared<const ChartSpec>(
                  std::vector<std::string>{"x0", "x1", "x2", "x3"}, fields,
                  std::vector<std::string>{}, symbols),
              {}, {}, {}};
  const ChartPtr& c = out.chart;
  ScalarExpr L;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      ScalarExpr Flow = y(j, {i}) - y(i, {j});
      out.Fup[i][j] = ScalarExpr(kEta[i] * kEta[j]) * Flow;
      L += Flow * out.Fup[i][j];
    }
  out.lag = Lagrangian(c, L);
  for (int p = 0; p < 4; ++p) {
    out.gauge[Atom::fiber(p, {})] = y(p) + ScalarExpr::atom(Atom::opaque(0, {p}));
    for (int i = 0; i < 4; ++i) {
      out.gauge[Atom::fiber(p, {i})] =
          y(p, {i}) + ScalarExpr::atom(Atom::opaque(1, {p, i}));
      for (int j = i; j < 4; ++j)
        out.gauge[Atom::fiber(p, {i, j})] =
            y(p, {i, j}) + ScalarExpr::atom(Atom::opaque(2, {p, i, j}));
    }
  }
  return out;
}

}  // namespace

static void electromagnetism() {
  EmSetup em = em_setup();
  const ChartPtr& c = em.chart;
  const Lagrangian& lag = em.lag;

  // dL/dA_{j,i} = 4 F^{ij}
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      require((partial_derivative(*c, lag.density, Atom::fiber(j, {i})) -
               ScalarExpr(4) * em.Fup[i][j])
                  .is_zero(),
              "dL/dA_{j,i} != 4F^{ij}");

  // Theta = L w0 + 4F^{ij} contact(A_j) ^ w_i
  DiffForm theta = principal_lepage(lag).form;
  DiffForm theta_ref = lag.form();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      DiffForm w(c, 1, 1);
      w.add_term(ScalarExpr(4) * em.Fup[i][j], {BasisOneForm::contact(j, {})});
      theta_ref = theta_ref + wedge(w, omega_lowered(c, {i}, 1));
    }
  require((theta - theta_ref).is_zero(), "principal form mismatch");

  LepageResult phi = canonical_lepage(lag);
  // L_VT = -2 A_j d_i F^{ij}
  ScalarExpr lvt_ref;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i)
      lvt_ref -= ScalarExpr(2) * y(j) * total_derivative(*c, em.Fup[i][j], i);
  require((phi.lambda_vt->density - lvt_ref).is_zero(), "Vainberg-Tonti density mismatch");

  // alpha^i = 2 A_l F^{il}, via d(alpha)
  int aord = phi.alpha->order();
  DiffForm alpha_ref(c, 3, aord);
  for (int i = 0; i < 4; ++i) {
    ScalarExpr ai;
    for (int l = 0; l < 4; ++l) ai += ScalarExpr(2) * y(l) * em.Fup[i][l];
    alpha_ref = alpha_ref + ai * omega_lowered(c, {i}, aord);
  }
  require((exterior_derivative(alpha_ref) - *phi.d_alpha).is_zero(),
          "boundary term d(alpha) mismatch");

  // Phi = L w0 + (4F^{ik} + A^{i,k} - A^j_{,j} eta^{ik}) contact(A_k) ^ w_i
  //             + (A^i eta^{jk} - A^j eta^{ik}) contact(A_k,{j}) ^ w_i
  ScalarExpr divA;
  for (int j = 0; j < 4; ++j) divA += ScalarExpr(kEta[j]) * y(j, {j});
  DiffForm phi_ref = lag.form();
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) {
      ScalarExpr coeff = ScalarExpr(4) * em.Fup[i][k] +
                         ScalarExpr(kEta[i] * kEta[k]) * y(i, {k});
      if (i == k) coeff -= ScalarExpr(kEta[i]) * divA;
      DiffForm w(c, 1, 1);
      w.add_term(coeff, {BasisOneForm::contact(k, {})});
      phi_ref = phi_ref + wedge(w, omega_lowered(c, {i}, 1));
      for (int j = 0; j < 4; ++j) {
        ScalarExpr cj;
        if (j == k) cj += ScalarExpr(kEta[i] * kEta[k]) * y(i);
        if (i == k) cj -= ScalarExpr(kEta[j] * kEta[k]) * y(j);
        if (cj.is_zero()) continue;
        DiffForm wkj(c, 1, 2);
        wkj.add_term(cj, {BasisOneForm::contact(k, {j})});
        phi_ref = phi_ref + wedge(wkj, omega_lowered(c, {i}, 2));
      }
    }
  }
  require((phi.form - phi_ref).is_zero(), "canonical form differs from the reference expression");

  // the first-order nu correction reproduces the same coefficient
  FirstOrderNu nu = first_order_nu(lag);
  require((nu.phi.form - phi.form).is_zero(), "Theta + p1 d(nu) != Phi");

  // dPhi = E + 2(2 eta^{jk}eta^{il} - eta^{ij}eta^{kl} - eta^{ik}eta^{jl})
  //            contact(A_j,{l}) ^ contact(A_k) ^ w_i
  SourceForm el = euler_lagrange(lag);
  DiffForm dphi = exterior_derivative(phi.form);
  DiffForm dphi_ref = el.form();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          Rational coeff;
          if (j == k && i == l) coeff += 2 * kEta[j] * kEta[i];
          if (i == j && k == l) coeff -= kEta[i] * kEta[k];
          if (i == k && j == l) coeff -= kEta[i] * kEta[j];
          if (coeff == 0) continue;
          DiffForm w(c, 2, 2);
          w.add_term(ScalarExpr(2 * coeff),
                     {BasisOneForm::contact(j, {l}), BasisOneForm::contact(k, {})});
          dphi_ref = dphi_ref + wedge(w, omega_lowered(c, {i}, 2));
        }
  require((dphi - dphi_ref).is_zero(), "d(Phi) differs from the reference expression");

  // gauge substitution A_i -> A_i + d_i f
  require((substitute_coefficients(theta, em.gauge) - theta).is_zero(),
          "Theta should be gauge invariant");
  require(!(substitute_coefficients(phi.form, em.gauge) - phi.form).is_zero(),
          "Phi should not be gauge invariant");
  DiffForm dphi_gauge = substitute_coefficients(dphi, em.gauge);
  require((dphi_gauge - dphi).is_zero(), "d(Phi) should be gauge invariant");
}

// -------------------------------------------------------------------------

static void hilbert_numeric() {
  NumericReport rep = hilbert_numeric_suite(20240817, 50, 4);
  require(rep.ok(), rep.failures.empty() ? "suite failed" : rep.failures.front());
  require(rep.trials == 50, "wrong trial count");
  require(rep.max_residual <= 1e-9, "residual above tolerance");
}

// -------------------------------------------------------------------------

static void canonical_closure() {
  RandomSource rnd(101);
  int done = 0;
  while (done < 100) {
    int n = rnd.uniform_int(1, 3);
    int m = rnd.uniform_int(1, 2);
    auto c = make_chart(n, m);
    Lagrangian lag = trivial_lagrangian(rnd, c, 1);
    if (lag.density.is_zero()) continue;
    require(euler_lagrange(lag).is_zero(), "h(d alpha) should be variationally trivial");
    DiffForm dphi = exterior_derivative(canonical_lepage(lag).form);
    require(dphi.is_zero(), "d(Phi) != 0 for a trivial Lagrangian");
    ++done;
  }
  // negative controls
  int controls = 0;
  while (controls < 10) {
    int n = rnd.uniform_int(1, 3);
    int m = rnd.uniform_int(1, 2);
    auto c = make_chart(n, m);
    Lagrangian lag(c, random_polynomial(rnd, *c, 1, 3, 3));
    SourceForm el = euler_lagrange(lag);
    if (el.is_zero()) continue;
    DiffForm dphi = exterior_derivative(canonical_lepage(lag).form);
    require(!dphi.is_zero(), "d(Phi) == 0 for a non-trivial Lagrangian");
    DiffForm p1 = contact_component(dphi, 1);
    require((p1 - el.form().raised(p1.order())).is_zero(), "p1 d(Phi) != Euler-Lagrange form");
    ++controls;
  }
}

// -------------------------------------------------------------------------

static void fundamental_closure() {
  RandomSource rnd(202);
  // the n = m = 2 determinant null Lagrangian first
  {
    auto c = make_chart(2, 2);
    Lagrangian det(c, y(0, {0}) * y(1, {1}) - y(0, {1}) * y(1, {0}));
    require(euler_lagrange(det).is_zero(), "determinant Lagrangian should be trivial");
    require(exterior_derivative(fundamental_lepage(det).form).is_zero(),
            "d(rho) != 0 for the determinant Lagrangian");
  }
  int done = 0;
  while (done < 49) {
    int n = rnd.uniform_int(1, 3);
    int m = rnd.uniform_int(1, 2);
    auto c = make_chart(n, m);
    // horizontal alpha with order-0 coefficients keeps lambda first order
    DiffForm alpha(c, n - 1, 0);
    for (int i = 0; i < n; ++i)
      alpha = alpha + random_polynomial(rnd, *c, 0, 3, 2) * omega_lowered(c, {i}, 0);
    ScalarExpr density;
    DiffForm hda = horizontalize(exterior_derivative(alpha));
    if (hda.is_zero()) continue;
    density = hda.terms().begin()->second;
    Lagrangian lag(c, density, 1);
    require(euler_lagrange(lag).is_zero(), "h(d alpha) should be variationally trivial");
    require(exterior_derivative(fundamental_lepage(lag).form).is_zero(),
            "d(rho) != 0 for a trivial first-order Lagrangian");
    ++done;
  }
}

// -------------------------------------------------------------------------

static void homotopy_identity() {
  RandomSource rnd(303);
  int done = 0;
  while (done < 100) {
    int n = rnd.uniform_int(1, 3);
    int m = rnd.uniform_int(1, 2);
    auto c = make_chart(n, m);
    int degree = rnd.uniform_int(0, n);
    int order = rnd.uniform_int(0, 2);
    DiffForm rho = random_form(rnd, c, degree, order, 3);
    if (rho.is_zero()) continue;
    DiffForm dI = rho.degree() == 0 ? DiffForm(c, 0, rho.order() + 1)
                                    : exterior_derivative(homotopy_I(rho));
    DiffForm rec = homotopy_I(exterior_derivative(rho)) + dI +
                   pullback_zero_section(rho).raised(rho.order() + 1);
    require((rec - rho.raised(rho.order() + 1)).is_zero(), "homotopy identity violated");
    require(homotopy_I(horizontalize(rho)).is_zero(), "I h rho != 0");
    // I p_k rho = p_{k-1} I rho
    if (degree > 0) {
      auto parts = split_contact(rho);
      DiffForm irho = homotopy_I(rho);
      auto iparts = split_contact(irho);
      for (int k = 1; k <= degree; ++k) {
        DiffForm lhs = homotopy_I(parts[static_cast<std::size_t>(k)]);
        DiffForm rhs = k - 1 < static_cast<int>(iparts.size())
                           ? iparts[static_cast<std::size_t>(k - 1)]
                           : DiffForm(c, irho.degree(), irho.order() + 1);
        require((lhs - rhs).is_zero(), "I p_k != p_{k-1} I");
      }
    }
    ++done;
  }
}

// -------------------------------------------------------------------------

static void lepage_conditions() {
  RandomSource rnd(404);
  int trials = 0;
  auto check_one = [&](const DiffForm& theta, const Lagrangian& lag, const char* kind) {
    LepageReport rep = verify_lepage_conditions(theta, lag);
    require(rep.horizontal_matches, std::string(kind) + ": h(theta) != lambda");
    require(rep.p1_is_source, std::string(kind) + ": p1 d(theta) is not a source form");
    require(rep.source_matches_el, std::string(kind) + ": source form != Euler-Lagrange form");
    ++trials;
  };
  for (int t = 0; t < 40; ++t) {
    auto c = make_chart(rnd.uniform_int(1, 2), rnd.uniform_int(1, 2));
    Lagrangian lag(c, random_polynomial(rnd, *c, rnd.uniform_int(1, 2), 3, 3));
    check_one(principal_lepage(lag).form, lag, "principal");
  }
  for (int t = 0; t < 20; ++t) {
    auto c = make_chart(rnd.uniform_int(1, 2), rnd.uniform_int(1, 2));
    Lagrangian lag(c, random_polynomial(rnd, *c, 1, 3, 3), 1);
    check_one(fundamental_lepage(lag).form, lag, "fundamental");
  }
  for (int t = 0; t < 20; ++t) {
    auto c = make_chart(rnd.uniform_int(1, 2), rnd.uniform_int(1, 2));
    Lagrangian lag(c, random_polynomial(rnd, *c, rnd.uniform_int(1, 2), 2, 2));
    check_one(canonical_lepage(lag).form, lag, "canonical");
  }
  for (int t = 0; t < 20; ++t) {
    int n = rnd.uniform_int(1, 2);
    auto c = make_chart(n, rnd.uniform_int(1, 2));
    Lagrangian lprime(c, random_polynomial(rnd, *c, 1, 2, 2), 1);
    DiffForm alpha(c, n - 1, 0);
    for (int i = 0; i < n; ++i)
      alpha = alpha + random_polynomial(rnd, *c, 0, 2, 2) * omega_lowered(c, {i}, 0);
    DiffForm hda = horizontalize(exterior_derivative(alpha));
    ScalarExpr density = lprime.density;
    if (!hda.is_zero()) density += hda.terms().begin()->second;
    Lagrangian lag(c, density, std::max(1, jet_order(*c, density)));
    check_one(reduced_lepage(lag, lprime, alpha).form, lag, "reduced");
  }
  require(trials == 100, "wrong trial count");
}

// -------------------------------------------------------------------------

static void order_bounds() {
  RandomSource rnd(505);
  for (int t = 0; t < 20; ++t) {
    auto c = make_chart(rnd.uniform_int(1, 2), rnd.uniform_int(1, 2));
    int r = rnd.uniform_int(1, 2);
    Lagrangian lag(c, random_polynomial(rnd, *c, r, 3, 3));
    if (lag.order == 0) continue;
    DiffForm theta = principal_lepage(lag).form;
    require(natural_order(theta) <= 2 * lag.order - 1, "ord(Theta) > 2r-1");
    if (is_top_order_affine(*c, lag.density, lag.order))
      require(natural_order(theta) <= 2 * lag.order - 2, "affine ord(Theta) > 2r-2");
    DiffForm phi = canonical_lepage(lag).form;
    require(natural_order(phi) <= 4 * lag.order - 2, "ord(Phi) > 4r-2");
  }
  // affine densities: L = a(x,y,y') y'' + b(x,y,y')
  {
    auto c = make_chart(1, 1);
    ScalarExpr a = random_polynomial(rnd, *c, 1, 2, 2);
    ScalarExpr b = random_polynomial(rnd, *c, 1, 2, 2);
    Lagrangian lag(c, a * y(0, {0, 0}) + b, 2);
    require(is_top_order_affine(*c, lag.density, lag.order), "expected affine density");
    require(natural_order(principal_lepage(lag).form) <= 2, "affine ord(Theta) > 2r-2");
  }
  // first order mechanics: Theta = L dt + dL/dq' (dq - q' dt), token for token
  for (int t = 0; t < 5; ++t) {
    auto c = make_chart(1, 1);
    Lagrangian lag(c, random_polynomial(rnd, *c, 1, 3, 4), 1);
    DiffForm theta = principal_lepage(lag).form;
    DiffForm ref(c, 1, 1);
    ref.add_term(lag.density, {BasisOneForm::dx(0)});
    ref.add_term(partial_derivative(*c, lag.density, Atom::fiber(0, {0})),
                 {BasisOneForm::contact(0, {})});
    require(theta.order() == ref.order() && theta.terms() == ref.terms(),
            "mechanics Theta not reproduced token for token");
  }
}

// -------------------------------------------------------------------------

static void linearity() {
  RandomSource rnd(606);
  for (int t = 0; t < 20; ++t) {
    auto c = make_chart(rnd.uniform_int(1, 2), rnd.uniform_int(1, 2));
    int r = rnd.uniform_int(1, 2);
    Lagrangian l1(c, random_polynomial(rnd, *c, r, 2, 2), r);
    Lagrangian l2(c, random_polynomial(rnd, *c, r, 2, 2), r);
    Lagrangian comb(c, ScalarExpr(2) * l1.density + ScalarExpr(3) * l2.density, r);
    DiffForm lhs = canonical_lepage(comb).form;
    DiffForm rhs = ScalarExpr(2) * canonical_lepage(l1).form +
                   ScalarExpr(3) * canonical_lepage(l2).form;
    require((lhs - rhs).is_zero(), "Phi is not linear in lambda");
  }
  // dynamically equivalent pairs have equal d(Phi)
  for (int t = 0; t < 5; ++t) {
    auto c = make_chart(rnd.uniform_int(1, 2), 1);
    Lagrangian lag(c, random_polynomial(rnd, *c, 1, 2, 3), 1);
    Lagrangian triv = trivial_lagrangian(rnd, c, 1);
    Lagrangian shifted(c, lag.density + triv.density);
    DiffForm a = exterior_derivative(canonical_lepage(lag).form);
    DiffForm b = exterior_derivative(canonical_lepage(shifted).form);
    require((a - b).is_zero(), "d(Phi) differs for dynamically equivalent Lagrangians");
  }
}

// -------------------------------------------------------------------------

static void numeric_cross_checks() {
  // rational paths: residuals of the symbolic identities above are exactly 0
  RandomSource rnd(707);
  {
    auto c = make_chart(2, 1);
    Lagrangian lag(c, random_polynomial(rnd, *c, 1, 3, 3), 1);
    DiffForm theta = principal_lepage(lag).form;
    DiffForm residual = horizontalize(theta) - lag.form();
    require(numeric_zero_check(residual, rnd, 10) == 0, "h(theta) residual nonzero");
    Lagrangian triv = trivial_lagrangian(rnd, c, 1);
    DiffForm dphi = exterior_derivative(canonical_lepage(triv).form);
    require(numeric_zero_check(dphi, rnd, 10) == 0, "closure residual nonzero");
    DiffForm rho = random_form(rnd, c, 1, 1, 3);
    DiffForm rec = homotopy_I(exterior_derivative(rho)) +
                   exterior_derivative(homotopy_I(rho)) +
                   pullback_zero_section(rho).raised(rho.order() + 1);
    require(numeric_zero_check(rec - rho.raised(rho.order() + 1), rnd, 10) == 0,
            "homotopy residual nonzero");
  }
  // opaque-hook path: metric identities stay below 1e-9
  {
    NumericReport rep = hilbert_numeric_suite(808, 10, 2);
    require(rep.ok() && rep.max_residual <= 1e-9, "metric residual above tolerance");
  }
  // finite differences of total derivatives converge at O(h^2)
  {
    auto c = make_chart(1, 1);
    Polynomial sec = Polynomial::term({{Atom::base(0), 3}}, 1) +
                     Polynomial::term({{Atom::base(0), 1}}, 2);
    SectionSpec gamma(c, {sec});
    ScalarExpr f = y(0) * y(0) * y(0, {0});
    double r1 = finite_difference_check(f, gamma, 0, {Rational(1, 2)}, 1e-3);
    double r2 = finite_difference_check(f, gamma, 0, {Rational(1, 2)}, 5e-4);
    require(r1 <= 1e-5 * 10, "finite-difference residual too large");
    require(r1 / r2 > 3.0 && r1 / r2 < 5.0, "finite-difference convergence is not O(h^2)");
  }
}

// -------------------------------------------------------------------------

int main() {
  criterion(1, "Klein-Gordon suite", klein_gordon);
  criterion(2, "electromagnetic suite", electromagnetism);
  criterion(3, "Hilbert suite, numeric", hilbert_numeric);
  criterion(4, "closure of the canonical form", canonical_closure);
  criterion(5, "closure of the fundamental form", fundamental_closure);
  criterion(6, "homotopy identity", homotopy_identity);
  criterion(7, "Lepage conditions", lepage_conditions);
  criterion(8, "order bounds", order_bounds);
  criterion(9, "linearity", linearity);
  criterion(10, "numeric cross-checks", numeric_cross_checks);
  return g_failures == 0 ? 0 : 1;
}
