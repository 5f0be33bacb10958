#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jetforms/forms.hpp"

namespace jetforms {

/// Horizontal n-form lambda = L omega_0 of order r.
struct Lagrangian {
  ChartPtr chart;
  ScalarExpr density;
  int order = 0;

  Lagrangian() = default;
  Lagrangian(ChartPtr c, ScalarExpr L, std::optional<int> r = std::nullopt)
      : chart(std::move(c)), density(std::move(L)) {
    int actual = jet_order(*chart, density);
    order = r.value_or(actual);
    if (order < actual) throw Error("declared Lagrangian order below its jet order");
  }

  DiffForm form() const {
    return wedge(DiffForm::scalar(chart, density, order), omega0(chart, order));
  }
};

/// 1-contact (n+1)-form epsilon_sigma omega^sigma ^ omega_0.
struct SourceForm {
  ChartPtr chart;
  int order = 0;
  std::vector<ScalarExpr> components;  // per field

  DiffForm form() const {
    DiffForm out(chart, chart->n() + 1, order);
    DiffForm w0 = omega0(chart, order);
    for (int sigma = 0; sigma < chart->field_count(); ++sigma) {
      DiffForm ws(chart, 1, order);
      ws.add_term(components[static_cast<std::size_t>(sigma)], {BasisOneForm::contact(sigma, {})});
      out = out + wedge(ws, w0);
    }
    return out;
  }

  bool is_zero() const {
    for (const auto& c : components)
      if (!c.is_zero()) return false;
    return true;
  }
};

/// E_sigma = sum_J (-1)^|J| d_J (dL/dy^sigma_J), J running over sorted
/// multi-indices (each sorted index is one independent variable).
inline SourceForm euler_lagrange(const Lagrangian& lag) {
  const ChartSpec& chart = *lag.chart;
  SourceForm out{lag.chart, std::max(1, 2 * lag.order), {}};
  for (int sigma = 0; sigma < chart.field_count(); ++sigma) {
    ScalarExpr e;
    for (int k = 0; k <= lag.order; ++k) {
      int sign = (k % 2 == 0) ? 1 : -1;
      for (const MultiIndex& J : sorted_multi_indices(chart.n(), k)) {
        ScalarExpr p = partial_derivative(chart, lag.density, Atom::fiber(sigma, J));
        if (p.is_zero()) continue;
        p = total_derivative(chart, p, J);
        e += sign > 0 ? p : -p;
      }
    }
    out.components.push_back(std::move(e));
  }
  return out;
}

enum class LepageKind { Principal, Fundamental, Canonical, Reduced };

inline std::string to_string(LepageKind k) {
  switch (k) {
    case LepageKind::Principal: return "principal";
    case LepageKind::Fundamental: return "fundamental";
    case LepageKind::Canonical: return "canonical";
    case LepageKind::Reduced: return "reduced";
  }
  return "?";
}

/// A Lepage equivalent together with the splitting data used to build it.
struct LepageResult {
  LepageKind kind = LepageKind::Principal;
  DiffForm form;
  std::optional<Lagrangian> lambda_vt;
  std::optional<DiffForm> alpha;    // the (n-1)-form entering d(alpha)
  std::optional<DiffForm> d_alpha;  // the exact correction actually added
  std::optional<Lagrangian> lambda_prime;
};

/// True when no monomial of L is more than linear in the top-order fiber
/// coordinates.
inline bool is_top_order_affine(const ChartSpec& chart, const ScalarExpr& L, int r) {
  if (!L.is_polynomial()) return false;
  for (const auto& [m, c] : L.num().terms()) {
    int top = 0;
    for (const auto& [a, e] : m)
      if (a.kind == AtomKind::Fiber && a.idx.order() == r) top += e;
    if (top > 1) return false;
  }
  return true;
}

namespace detail {

/// Multinomial permutation count of a sorted multi-index, as a rational.
inline Rational perm_count(const MultiIndex& J) { return Rational(J.permutation_count()); }

}  // namespace detail

/// The principal (Poincare-Cartan) Lepage equivalent
///   Theta = L omega_0 + sum B^{J,i}_sigma omega^sigma_J ^ omega_i,
/// with J sorted and
///   B^{J,i}_sigma = C(J) sum_{l=0}^{r-1-|J|} (-1)^l sum_{|P|=l}
///                   C(P)/C(JPi) d_P (dL/dy^sigma_{JPi}),
/// C(.) the multinomial permutation count; this is the symmetric-index
/// transcription of the classical coefficient formula.
inline LepageResult principal_lepage(const Lagrangian& lag) {
  const ChartSpec& chart = *lag.chart;
  const int r = lag.order;
  LepageResult out;
  out.kind = LepageKind::Principal;
  if (r == 0) {
    out.form = lag.form();
    return out;
  }
  const int s = 2 * r - 1;
  DiffForm theta = wedge(DiffForm::scalar(lag.chart, lag.density, s), omega0(lag.chart, s));
  for (int sigma = 0; sigma < chart.field_count(); ++sigma) {
    for (int k = 0; k <= r - 1; ++k) {
      for (const MultiIndex& J : sorted_multi_indices(chart.n(), k)) {
        for (int i = 0; i < chart.n(); ++i) {
          ScalarExpr B;
          for (int l = 0; l <= r - 1 - k; ++l) {
            int sign = (l % 2 == 0) ? 1 : -1;
            for (const MultiIndex& P : sorted_multi_indices(chart.n(), l)) {
              MultiIndex JPi = J.merged(P).push(i);
              ScalarExpr p = partial_derivative(chart, lag.density, Atom::fiber(sigma, JPi));
              if (p.is_zero()) continue;
              p = total_derivative(chart, p, P);
              p = ScalarExpr(detail::perm_count(P) / detail::perm_count(JPi)) * p;
              B += sign > 0 ? p : -p;
            }
          }
          if (B.is_zero()) continue;
          B = ScalarExpr(detail::perm_count(J)) * B;
          DiffForm piece(lag.chart, 1, s);
          piece.add_term(std::move(B), {BasisOneForm::contact(sigma, J)});
          theta = theta + wedge(piece, omega_lowered(lag.chart, {i}, s));
        }
      }
    }
  }
  int bound = is_top_order_affine(chart, lag.density, r) ? std::max(0, 2 * r - 2) : 2 * r - 1;
  if (natural_order(theta) > bound) throw Error("principal form order bound violated");
  out.form = std::move(theta);
  return out;
}

/// The fundamental (first order) Lepage equivalent
///   rho = L omega_0 + sum_k 1/(k!)^2 d^k L/(dy^{s1}_{i1}..dy^{sk}_{ik})
///         omega^{s1} ^ .. ^ omega^{sk} ^ omega_{i1..ik}.
inline LepageResult fundamental_lepage(const Lagrangian& lag) {
  if (lag.order != 1) throw Error("fundamental form requires first order");
  const ChartSpec& chart = *lag.chart;
  const int n = chart.n(), m = chart.field_count();
  DiffForm rho = lag.form();
  int kmax = std::min(m, n);
  std::vector<int> sigmas, is;
  // recursive enumeration of index tuples with distinct sigma's and distinct
  // i's (repeated entries wedge to zero anyway)
  std::function<void(int, const ScalarExpr&)> rec = [&](int depth, const ScalarExpr& deriv) {
    int k = static_cast<int>(sigmas.size());
    if (k > 0) {
      Rational fact = 1;
      for (int j = 2; j <= k; ++j) fact *= j;
      DiffForm cpart(lag.chart, k, 1);
      FormMonomial fm;
      for (int sg : sigmas) fm.push_back(BasisOneForm::contact(sg, {}));
      cpart.add_term(ScalarExpr(Rational(1) / (fact * fact)) * deriv, std::move(fm));
      rho = rho + wedge(cpart, omega_lowered(lag.chart, is, 1));
    }
    if (k == kmax) return;
    for (int sg = 0; sg < m; ++sg) {
      if (std::find(sigmas.begin(), sigmas.end(), sg) != sigmas.end()) continue;
      for (int i = 0; i < n; ++i) {
        if (std::find(is.begin(), is.end(), i) != is.end()) continue;
        ScalarExpr d = partial_derivative(chart, deriv, Atom::fiber(sg, MultiIndex{i}));
        if (d.is_zero()) continue;
        sigmas.push_back(sg);
        is.push_back(i);
        rec(depth + 1, d);
        sigmas.pop_back();
        is.pop_back();
      }
    }
  };
  rec(0, lag.density);
  LepageResult out;
  out.kind = LepageKind::Fundamental;
  out.form = std::move(rho);
  return out;
}

/// Fibered homotopy operator I rho = int_0^1 i_{d/dt}(chi_t^* rho) dt, with
/// chi_t the fiber scaling. Lowers the degree by one, preserves the order.
inline DiffForm homotopy_I(const DiffForm& rho) {
  const ChartPtr& chart = rho.chart();
  DiffForm out(chart, std::max(0, rho.degree() - 1), rho.order());
  if (rho.degree() == 0) return out;
  for (const auto& [m, c] : rho.terms()) {
    ScalarExpr cs = fiber_scale(*chart, c);
    for (std::size_t l = 0; l < m.size(); ++l) {
      if (!m[l].is_contact_kind()) continue;  // dx has no dt component
      // the factor at l contributes its y_J dt part; every other contact
      // factor keeps a factor of t
      int tpow = 0;
      FormMonomial rest;
      for (std::size_t k = 0; k < m.size(); ++k) {
        if (k == l) continue;
        if (m[k].is_contact_kind()) ++tpow;
        rest.push_back(m[k]);
      }
      ScalarExpr integrand = cs * ScalarExpr::atom(Atom::fiber(m[l].field, m[l].idx));
      if (tpow > 0) integrand *= ScalarExpr(Polynomial::term({{Atom::homotopy_t(), tpow}}, 1));
      ScalarExpr val = integrate_t01(*chart, integrand);
      if (l % 2 == 1) val = -val;
      out.add_term(std::move(val), std::move(rest));
    }
  }
  return out;
}

/// Vainberg-Tonti Lagrangian L = y^sigma int_0^1 eps_sigma(x, ty, ...) dt.
inline Lagrangian vainberg_tonti(const SourceForm& eps) {
  const ChartSpec& chart = *eps.chart;
  ScalarExpr L;
  for (int sigma = 0; sigma < chart.field_count(); ++sigma) {
    const ScalarExpr& e = eps.components[static_cast<std::size_t>(sigma)];
    if (e.is_zero()) continue;
    L += ScalarExpr::atom(Atom::fiber(sigma, {})) * integrate_t01(chart, fiber_scale(chart, e));
  }
  int ord = std::max(jet_order(chart, L), eps.order);
  return Lagrangian(eps.chart, std::move(L), ord);
}

/// Canonical Lepage equivalent Phi = Theta_{lambda_VT} + d(alpha), with
/// d(alpha) = d I Theta_lambda + 0^* Theta_lambda (the mu_0 gauge never
/// materialized).
inline LepageResult canonical_lepage(const Lagrangian& lag) {
  SourceForm eps = euler_lagrange(lag);
  Lagrangian lvt = vainberg_tonti(eps);
  DiffForm theta_vt = principal_lepage(lvt).form;
  DiffForm theta = principal_lepage(lag).form;
  DiffForm alpha = homotopy_I(theta);
  DiffForm dalpha = exterior_derivative(alpha) + pullback_zero_section(theta);
  LepageResult out;
  out.kind = LepageKind::Canonical;
  out.form = theta_vt + dalpha;
  out.lambda_vt = std::move(lvt);
  out.alpha = std::move(alpha);
  out.d_alpha = std::move(dalpha);
  int r = std::max(1, lag.order);
  if (natural_order(out.form) > 4 * r - 2) throw Error("canonical form order bound violated");
  return out;
}

/// Components of a horizontal (n-1)-form a = a^i omega_i.
inline std::vector<ScalarExpr> horizontal_components(const DiffForm& a) {
  const ChartPtr& chart = a.chart();
  if (a.degree() != chart->n() - 1) throw Error("expected an (n-1)-form");
  std::vector<ScalarExpr> out;
  for (int i = 0; i < chart->n(); ++i) {
    DiffForm wi = omega_lowered(chart, {i}, a.order());
    const auto& [m, c] = *wi.terms().begin();
    auto it = a.terms().find(m);
    ScalarExpr v;
    if (it != a.terms().end()) v = it->second * c;  // c = +-1
    out.push_back(std::move(v));
    // any non-horizontal term would not match an omega_i monomial; detect:
  }
  DiffForm recon(chart, a.degree(), a.order());
  for (int i = 0; i < chart->n(); ++i)
    recon = recon + ScalarExpr(out[static_cast<std::size_t>(i)]) * omega_lowered(chart, {i}, a.order());
  if (!(recon - a).is_zero()) throw Error("form is not horizontal");
  return out;
}

/// Extracts eps_sigma from a 1-contact (n+1)-form sum eps_sigma omega^sigma ^
/// omega_0; throws when terms with derivative contact factors survive.
inline SourceForm extract_source_form(const DiffForm& p1) {
  const ChartPtr& chart = p1.chart();
  if (p1.degree() != chart->n() + 1) throw Error("expected an (n+1)-form");
  SourceForm out{chart, p1.order(), std::vector<ScalarExpr>(
                                        static_cast<std::size_t>(chart->field_count()), ScalarExpr())};
  DiffForm w0 = omega0(chart, p1.order());
  for (int sigma = 0; sigma < chart->field_count(); ++sigma) {
    DiffForm ws(chart, 1, p1.order());
    ws.add_term(ScalarExpr(1), {BasisOneForm::contact(sigma, {})});
    DiffForm ref = wedge(ws, w0);
    const auto& [m, c] = *ref.terms().begin();
    auto it = p1.terms().find(m);
    if (it != p1.terms().end()) out.components[static_cast<std::size_t>(sigma)] = it->second * c;
  }
  if (!(out.form() - p1).is_zero()) throw Error("form is not a source form");
  return out;
}

/// Lepage-condition report: h(theta) = lambda and p_1 d(theta) a source form
/// equal to the Euler-Lagrange form.
struct LepageReport {
  bool horizontal_matches = false;
  bool p1_is_source = false;
  bool source_matches_el = false;
  DiffForm h_residual;
  std::optional<SourceForm> extracted;
  std::vector<int> contact_degrees;  // contact degrees present in theta

  bool ok() const { return horizontal_matches && p1_is_source && source_matches_el; }
};

inline LepageReport verify_lepage_conditions(const DiffForm& theta, const Lagrangian& lag) {
  LepageReport rep;
  rep.h_residual = horizontalize(theta) - lag.form();
  rep.horizontal_matches = rep.h_residual.is_zero();
  auto parts = split_contact(theta);
  for (int k = 0; k < static_cast<int>(parts.size()); ++k)
    if (!parts[static_cast<std::size_t>(k)].is_zero()) rep.contact_degrees.push_back(k);
  DiffForm p1 = contact_component(exterior_derivative(theta), 1);
  try {
    rep.extracted = extract_source_form(p1);
    rep.p1_is_source = true;
  } catch (const Error&) {
    rep.p1_is_source = false;
  }
  if (rep.p1_is_source) {
    SourceForm el = euler_lagrange(lag);
    rep.source_matches_el = true;
    for (int sigma = 0; sigma < lag.chart->field_count(); ++sigma)
      if (!(rep.extracted->components[static_cast<std::size_t>(sigma)] -
            el.components[static_cast<std::size_t>(sigma)])
               .is_zero())
        rep.source_matches_el = false;
  }
  return rep;
}

/// nu-correction for first order Lagrangians:
///   nu = 1/4 (da^j/dy^sigma_i - da^i/dy^sigma_j) omega^sigma ^ omega_ij,
/// with alpha = I Theta_lambda = a^i omega_i; satisfies
/// Phi = Theta + p_1 d(nu) (verified exactly, up to order raising).
struct FirstOrderNu {
  DiffForm nu;
  DiffForm p1_dnu;
  LepageResult phi;
};

inline FirstOrderNu first_order_nu(const Lagrangian& lag) {
  if (lag.order != 1) throw Error("nu correction requires first order");
  const ChartPtr& chart = lag.chart;
  const int n = chart->n();
  LepageResult phi = canonical_lepage(lag);
  DiffForm theta = principal_lepage(lag).form;
  std::vector<ScalarExpr> a = horizontal_components(homotopy_I(theta));
  DiffForm nu(chart, n - 1, 1);
  for (int sigma = 0; sigma < chart->field_count(); ++sigma) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        ScalarExpr c =
            partial_derivative(*chart, a[static_cast<std::size_t>(j)],
                               Atom::fiber(sigma, MultiIndex{i})) -
            partial_derivative(*chart, a[static_cast<std::size_t>(i)],
                               Atom::fiber(sigma, MultiIndex{j}));
        if (c.is_zero()) continue;
        DiffForm ws(chart, 1, 1);
        ws.add_term(ScalarExpr(Rational(1) / 4) * c, {BasisOneForm::contact(sigma, {})});
        nu = nu + wedge(ws, omega_lowered(chart, {i, j}, 1));
      }
    }
  }
  FirstOrderNu out;
  out.p1_dnu = contact_component(exterior_derivative(nu), 1);
  DiffForm residual = phi.form - theta - out.p1_dnu;
  if (!residual.is_zero()) throw Error("nu correction does not close the Phi-Theta gap");
  out.nu = std::move(nu);
  out.phi = std::move(phi);
  return out;
}

/// Reduced Lepage equivalent phi = Theta_{lambda'} + d(alpha), given the
/// split lambda = lambda' + h d(alpha). The split is certified exactly when
/// possible; charts with opaque symbols may defer the check to numeric
/// verification (require_exact_split = false).
inline LepageResult reduced_lepage(const Lagrangian& lag, const Lagrangian& reduced,
                                   const DiffForm& alpha, bool require_exact_split = true) {
  DiffForm hda = horizontalize(exterior_derivative(alpha));
  DiffForm residual = hda - (lag.form() - reduced.form());
  if (!residual.is_zero() && require_exact_split) {
    std::string msg = "hd(alpha) != lambda - lambda'";
    if (!residual.terms().empty())
      msg += "; residual coefficient: " + to_string(*lag.chart, residual.terms().begin()->second);
    throw Error(msg);
  }
  LepageResult out;
  out.kind = LepageKind::Reduced;
  out.form = principal_lepage(reduced).form + exterior_derivative(alpha);
  out.lambda_prime = reduced;
  out.alpha = alpha;
  out.d_alpha = exterior_derivative(alpha);
  return out;
}

/// Noether current J = h i_{J Xi} theta, a horizontal (n-1)-form.
inline DiffForm noether_current(const DiffForm& theta, const VectorFieldSpec& xi) {
  ProlongedField p = prolong_vector_field(xi, theta.order());
  return horizontalize(interior_product(p, theta));
}

}  // namespace jetforms
