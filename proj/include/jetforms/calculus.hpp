#pragma once

#include <map>
#include <set>

#include "jetforms/chart.hpp"

namespace jetforms {

/// Replace atoms by scalar expressions (simultaneous substitution).
inline ScalarExpr substitute(const Polynomial& p, const std::map<Atom, ScalarExpr>& repl) {
  ScalarExpr out;
  for (const auto& [m, c] : p.terms()) {
    ScalarExpr term{Rational(c)};
    Monomial untouched;
    for (const auto& [a, e] : m) {
      auto it = repl.find(a);
      if (it == repl.end())
        untouched.emplace_back(a, e);
      else
        term *= it->second.pow(e);
    }
    term *= ScalarExpr(Polynomial::term(untouched, 1));
    out += term;
  }
  return out;
}

inline ScalarExpr substitute(const ScalarExpr& e, const std::map<Atom, ScalarExpr>& repl) {
  return substitute(e.num(), repl) / substitute(e.den(), repl);
}

/// Fiber coordinates an expression depends on, including dependencies
/// declared by opaque symbols appearing in it.
inline std::set<JetCoordinate> fiber_dependencies(const ChartSpec& chart, const ScalarExpr& e) {
  std::set<JetCoordinate> deps;
  for (const Atom& a : e.atoms()) {
    if (a.kind == AtomKind::Fiber) deps.insert(a);
    if (a.kind == AtomKind::Opaque)
      for (const JetCoordinate& c : chart.opaque(a.id).fiber_deps) deps.insert(c);
  }
  return deps;
}

/// Largest jet order the expression effectively lives on.
inline int jet_order(const ChartSpec& chart, const ScalarExpr& e) {
  int r = 0;
  for (const JetCoordinate& c : fiber_dependencies(chart, e)) r = std::max(r, c.jet_order());
  return r;
}

namespace detail {

/// Formal partial of a polynomial w.r.t. a chart coordinate, with the chain
/// rule through opaque-symbol derivative rules.
inline ScalarExpr poly_partial(const ChartSpec& chart, const Polynomial& p, const JetCoordinate& c) {
  ScalarExpr out{p.derivative(c)};
  for (const Atom& a : p.atoms()) {
    if (a.kind != AtomKind::Opaque) continue;
    const OpaqueSymbol& sym = chart.opaque(a.id);
    ScalarExpr rule;
    if (c.kind == AtomKind::Base) {
      if (sym.base_rule) rule = sym.base_rule(chart, a.idx, c.id);
    } else {
      if (sym.fiber_rule) rule = sym.fiber_rule(chart, a.idx, c);
    }
    if (!rule.is_zero()) out += ScalarExpr(p.derivative(a)) * rule;
  }
  return out;
}

}  // namespace detail

/// Formal partial derivative with the symmetrized convention: each sorted
/// multi-index is one independent variable.
inline ScalarExpr partial_derivative(const ChartSpec& chart, const ScalarExpr& e,
                                     const JetCoordinate& c) {
  if (!chart.valid_coordinate(c)) throw Error("unknown coordinate");
  if (e.is_polynomial()) return detail::poly_partial(chart, e.num(), c);
  ScalarExpr dn = detail::poly_partial(chart, e.num(), c);
  ScalarExpr dd = detail::poly_partial(chart, e.den(), c);
  return (dn * ScalarExpr(e.den()) - ScalarExpr(e.num()) * dd) /
         ScalarExpr(e.den() * e.den());
}

/// Total x^i-derivative d_i; raises the jet order by at most one.
inline ScalarExpr total_derivative(const ChartSpec& chart, const ScalarExpr& e, int i) {
  if (i < 0 || i >= chart.n()) throw Error("unknown coordinate");
  ScalarExpr out = partial_derivative(chart, e, Atom::base(i));
  for (const JetCoordinate& c : fiber_dependencies(chart, e)) {
    ScalarExpr de = partial_derivative(chart, e, c);
    if (de.is_zero()) continue;
    if (c.idx.order() + 1 > chart.max_order())
      throw Error("jet order overflow at coordinate " + chart.atom_name(c));
    out += de * ScalarExpr::atom(Atom::fiber(c.id, c.idx.push(i)));
  }
  return out;
}

/// d_J = product of total derivatives over the entries of J.
inline ScalarExpr total_derivative(const ChartSpec& chart, ScalarExpr e, const MultiIndex& j) {
  for (auto idx : j.entries()) e = total_derivative(chart, e, idx);
  return e;
}

/// chi_t: every fiber coordinate is multiplied by the homotopy parameter t;
/// opaque atoms are rewritten through their declared scaling behavior.
inline Polynomial fiber_scale(const ChartSpec& chart, const Polynomial& p) {
  Polynomial out;
  const Atom t = Atom::homotopy_t();
  for (const auto& [m, c] : p.terms()) {
    int tpow = 0;
    for (const auto& [a, e] : m) {
      if (a.kind == AtomKind::Fiber) tpow += e;
      if (a.kind == AtomKind::HomotopyT) tpow += 0;  // already scaled factors stay
      if (a.kind == AtomKind::Opaque) {
        const auto& sym = chart.opaque(a.id);
        if (!sym.scaling_degree) throw Error("not fiber-scalable: " + sym.name);
        tpow += *sym.scaling_degree * e;
      }
    }
    out.add_term(monomial_mul(m, tpow > 0 ? Monomial{{t, tpow}} : Monomial{}), c);
  }
  return out;
}

inline ScalarExpr fiber_scale(const ChartSpec& chart, const ScalarExpr& e) {
  return ScalarExpr(fiber_scale(chart, e.num()), fiber_scale(chart, e.den()));
}

/// Exact definite integral over t in [0,1]; the result contains no t.
inline ScalarExpr integrate_t01(const ChartSpec& chart, const ScalarExpr& e) {
  (void)chart;
  const Atom t = Atom::homotopy_t();
  if (e.den().contains(t)) throw Error("homotopy integrand not polynomial in t");
  Polynomial out;
  for (const auto& [m, c] : e.num().terms()) {
    int tpow = 0;
    Monomial rest;
    for (const auto& [a, ex] : m) {
      if (a.kind == AtomKind::HomotopyT)
        tpow = ex;
      else
        rest.emplace_back(a, ex);
    }
    out.add_term(rest, c / (tpow + 1));
  }
  return ScalarExpr(out, e.den());
}

/// Pullback by the zero section on scalars: fiber coordinates become zero,
/// opaque atoms are replaced by their declared zero-section values.
inline ScalarExpr zero_section_scalar(const ChartSpec& chart, const ScalarExpr& e) {
  std::map<Atom, ScalarExpr> repl;
  for (const Atom& a : e.atoms()) {
    if (a.kind == AtomKind::Fiber) repl.emplace(a, ScalarExpr());
    if (a.kind == AtomKind::Opaque) {
      const auto& sym = chart.opaque(a.id);
      if (!sym.zero_value) throw Error("zero section outside symbol domain: " + sym.name);
      repl.emplace(a, ScalarExpr(Rational(sym.zero_value(a.idx))));
    }
  }
  return substitute(e, repl);
}

}  // namespace jetforms
