#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "jetforms/varcalc.hpp"

namespace jetforms {

// ---------------------------------------------------------------------------
// Point evaluation. Exact rational evaluation is used whenever no opaque
// symbol is involved; the double path consults the registered numeric hooks.

/// Assignment of numeric values to jet coordinates and parameters at a point,
/// with cached opaque-atom values computed through their hooks.
struct JetPoint {
  ChartPtr chart;
  std::map<Atom, Rational> values;

  JetPoint() = default;
  // copies drop the cache: a copy is usually about to be perturbed
  JetPoint(const JetPoint& other) : chart(other.chart), values(other.values) {}
  JetPoint& operator=(const JetPoint& other) {
    chart = other.chart;
    values = other.values;
    opaque_cache_.clear();
    return *this;
  }
  JetPoint(JetPoint&&) = default;
  JetPoint& operator=(JetPoint&&) = default;

  Rational exact(const Atom& a) const {
    auto it = values.find(a);
    if (it == values.end()) {
      if (a.kind == AtomKind::Opaque)
        throw Error("opaque symbol in exact evaluation: " + chart->opaque(a.id).name);
      throw Error("missing assignment for coordinate " + chart->atom_name(a));
    }
    return it->second;
  }

  double numeric(const Atom& a) const {
    if (a.kind == AtomKind::Opaque) {
      auto it = opaque_cache_.find(a);
      if (it != opaque_cache_.end()) return it->second;
      const OpaqueSymbol& sym = chart->opaque(a.id);
      if (!sym.hook) throw Error("no numeric hook for symbol " + sym.name);
      std::map<Atom, double> deps;
      for (const JetCoordinate& c : sym.fiber_deps) deps[c] = numeric(c);
      double v = sym.hook(deps, a.idx);
      opaque_cache_[a] = v;
      return v;
    }
    auto it = values.find(a);
    if (it == values.end())
      throw Error("missing assignment for coordinate " + chart->atom_name(a));
    return static_cast<double>(it->second);
  }

private:
  mutable std::map<Atom, double> opaque_cache_;
};

namespace detail {

template <typename T, typename F>
T eval_poly(const Polynomial& p, F&& value_of, T zero, T one) {
  T acc = zero;
  for (const auto& [m, c] : p.terms()) {
    T term = one;
    if constexpr (std::is_same_v<T, double>)
      term = static_cast<double>(c);
    else
      term = c;
    for (const auto& [a, e] : m) {
      T v = value_of(a);
      for (int k = 0; k < e; ++k) term = term * v;
    }
    acc = acc + term;
  }
  return acc;
}

}  // namespace detail

inline Rational eval_exact(const ScalarExpr& e, const JetPoint& p) {
  auto v = [&](const Atom& a) { return p.exact(a); };
  Rational num = detail::eval_poly<Rational>(e.num(), v, Rational(0), Rational(1));
  Rational den = detail::eval_poly<Rational>(e.den(), v, Rational(0), Rational(1));
  if (den == 0) throw Error("division by zero at evaluation point");
  return num / den;
}

inline double eval_numeric(const ScalarExpr& e, const JetPoint& p) {
  auto v = [&](const Atom& a) { return p.numeric(a); };
  double num = detail::eval_poly<double>(e.num(), v, 0.0, 1.0);
  double den = detail::eval_poly<double>(e.den(), v, 0.0, 1.0);
  if (den == 0.0) throw Error("division by zero at evaluation point");
  return num / den;
}

/// Tangent vector at a jet point: components along d/dx^i and d/dy^sigma_J.
template <typename T>
struct TangentVec {
  std::vector<T> dx;                             // size n
  std::map<std::pair<int, MultiIndex>, T> dy;    // (field, J) -> component

  T dy_component(int field, const MultiIndex& j) const {
    auto it = dy.find({field, j});
    return it == dy.end() ? T(0) : it->second;
  }
};

namespace detail {

/// Value of a contact-basis 1-form on a tangent vector at p.
template <typename T, typename EvalAtom>
T basis_value(const BasisOneForm& b, const TangentVec<T>& v, EvalAtom&& fiber_value) {
  switch (b.kind) {
    case BasisOneForm::Kind::Dx:
      return v.dx[b.i];
    case BasisOneForm::Kind::DyTop:
      return v.dy_component(b.field, b.idx);
    case BasisOneForm::Kind::Contact: {
      T acc = v.dy_component(b.field, b.idx);
      for (std::size_t j = 0; j < v.dx.size(); ++j)
        acc = acc - fiber_value(Atom::fiber(b.field, b.idx.push(static_cast<int>(j)))) * v.dx[j];
      return acc;
    }
  }
  return T(0);
}

template <typename T>
T determinant(std::vector<std::vector<T>> m) {
  const std::size_t k = m.size();
  if (k == 0) return T(1);
  // cofactor expansion along the first row (k is small)
  if (k == 1) return m[0][0];
  T acc = T(0);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::vector<T>> sub;
    for (std::size_t r = 1; r < k; ++r) {
      std::vector<T> row;
      for (std::size_t cc = 0; cc < k; ++cc)
        if (cc != c) row.push_back(m[r][cc]);
      sub.push_back(std::move(row));
    }
    T term = m[0][c] * determinant(std::move(sub));
    if (c % 2 == 0)
      acc = acc + term;
    else
      acc = acc - term;
  }
  return acc;
}

}  // namespace detail

/// Evaluates a k-form on k tangent vectors: multilinear, antisymmetric.
template <typename T>
T eval_form(const DiffForm& rho, const JetPoint& p, const std::vector<TangentVec<T>>& vectors) {
  if (static_cast<int>(vectors.size()) != rho.degree())
    throw Error("vector count does not match form degree");
  auto scalar = [&](const ScalarExpr& e) -> T {
    if constexpr (std::is_same_v<T, double>)
      return eval_numeric(e, p);
    else
      return eval_exact(e, p);
  };
  auto fiber_value = [&](const Atom& a) -> T {
    if constexpr (std::is_same_v<T, double>)
      return p.numeric(a);
    else
      return p.exact(a);
  };
  T acc = T(0);
  const std::size_t k = vectors.size();
  for (const auto& [m, c] : rho.terms()) {
    std::vector<std::vector<T>> mat(k, std::vector<T>(k, T(0)));
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t col = 0; col < k; ++col)
        mat[r][col] = detail::basis_value<T>(m[r], vectors[col], fiber_value);
    acc = acc + scalar(c) * detail::determinant(std::move(mat));
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Polynomial test sections and their prolongations.

/// Per field, a polynomial map y^sigma(x) with rational coefficients.
struct SectionSpec {
  ChartPtr chart;
  std::vector<Polynomial> maps;  // base atoms (and params) only

  SectionSpec(ChartPtr c, std::vector<Polynomial> m) : chart(std::move(c)), maps(std::move(m)) {
    if (static_cast<int>(maps.size()) != chart->field_count())
      throw Error("section component count mismatch");
  }

  /// Jet point of the prolonged section over the base point x, populated up
  /// to the given order; parameter values appended verbatim.
  JetPoint prolong_at(const std::vector<Rational>& x, int order,
                      const std::map<Atom, Rational>& params = {}) const {
    JetPoint p;
    p.chart = chart;
    JetPoint base;
    base.chart = chart;
    for (int i = 0; i < chart->n(); ++i) {
      p.values[Atom::base(i)] = x[static_cast<std::size_t>(i)];
      base.values[Atom::base(i)] = x[static_cast<std::size_t>(i)];
    }
    for (const auto& [a, v] : params) {
      p.values[a] = v;
      base.values[a] = v;
    }
    for (int sigma = 0; sigma < chart->field_count(); ++sigma) {
      for (int k = 0; k <= order; ++k) {
        for (const MultiIndex& J : sorted_multi_indices(chart->n(), k)) {
          Polynomial d = maps[static_cast<std::size_t>(sigma)];
          for (auto idx : J.entries()) d = d.derivative(Atom::base(idx));
          p.values[Atom::fiber(sigma, J)] =
              eval_exact(ScalarExpr(d), base);
        }
      }
    }
    return p;
  }

  /// Holonomic lifts of the coordinate vectors d/dx^i through the prolonged
  /// section (components up to jet order `order`).
  std::vector<TangentVec<Rational>> holonomic_lifts(const JetPoint& p, int order) const {
    std::vector<TangentVec<Rational>> out;
    for (int i = 0; i < chart->n(); ++i) {
      TangentVec<Rational> v;
      v.dx.assign(static_cast<std::size_t>(chart->n()), Rational(0));
      v.dx[static_cast<std::size_t>(i)] = 1;
      for (int sigma = 0; sigma < chart->field_count(); ++sigma)
        for (int k = 0; k <= order; ++k)
          for (const MultiIndex& J : sorted_multi_indices(chart->n(), k))
            v.dy[{sigma, J}] = p.exact(Atom::fiber(sigma, J.push(i)));
      out.push_back(std::move(v));
    }
    return out;
  }
};

/// max over base points of |(J gamma)* rho - (J gamma)* lambda| on the
/// coordinate frame; exactly 0 for true Lepage equivalents.
inline Rational section_pullback_check(const DiffForm& rho, const Lagrangian& lag,
                                       const SectionSpec& gamma,
                                       const std::vector<std::vector<Rational>>& points,
                                       const std::map<Atom, Rational>& params = {}) {
  Rational worst = 0;
  int order = std::max(rho.order(), lag.order) + 1;
  for (const auto& x : points) {
    JetPoint p = gamma.prolong_at(x, order, params);
    auto lifts = gamma.holonomic_lifts(p, std::max(rho.order(), lag.order));
    Rational a = eval_form<Rational>(rho, p, lifts);
    Rational b = eval_form<Rational>(lag.form(), p, lifts);
    Rational r = abs(a - b);
    if (r > worst) worst = r;
  }
  return worst;
}

/// Central finite difference of f along the prolonged section vs the
/// symbolic total derivative; O(h^2) accurate.
inline double finite_difference_check(const ScalarExpr& f, const SectionSpec& gamma, int i,
                                      const std::vector<Rational>& x0, double h,
                                      const std::map<Atom, Rational>& params = {}) {
  int order = jet_order(*gamma.chart, f) + 1;
  auto value_at = [&](const std::vector<Rational>& x) {
    return eval_numeric(f, gamma.prolong_at(x, order, params));
  };
  Rational hr(Rational(static_cast<long long>(h * 1e12)) / 1000000000000LL);
  std::vector<Rational> xp = x0, xm = x0;
  xp[static_cast<std::size_t>(i)] += hr;
  xm[static_cast<std::size_t>(i)] -= hr;
  double fd = (value_at(xp) - value_at(xm)) / (2.0 * static_cast<double>(hr));
  double sym = eval_numeric(total_derivative(*gamma.chart, f, i), gamma.prolong_at(x0, order, params));
  return std::fabs(fd - sym);
}

// ---------------------------------------------------------------------------
// Seeded random sampling.

struct RandomSource {
  std::mt19937_64 rng;
  explicit RandomSource(std::uint64_t seed) : rng(seed) {}

  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  /// Small rational k/d with k in [-range, range], d in {1,2,3}.
  Rational rational(int range = 3) {
    return Rational(uniform_int(-range, range), uniform_int(1, 3));
  }
  Rational nonzero_rational(int range = 3) {
    Rational r;
    do { r = rational(range); } while (r == 0);
    return r;
  }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
};

/// Random polynomial in the chart coordinates up to the given jet order and
/// total degree; used for test Lagrangians and homotopy-corpus coefficients.
inline ScalarExpr random_polynomial(RandomSource& rnd, const ChartSpec& chart, int order,
                                    int degree, int terms) {
  std::vector<Atom> pool;
  for (int i = 0; i < chart.n(); ++i) pool.push_back(Atom::base(i));
  for (int sigma = 0; sigma < chart.field_count(); ++sigma)
    for (int k = 0; k <= order; ++k)
      for (const MultiIndex& J : sorted_multi_indices(chart.n(), k))
        pool.push_back(Atom::fiber(sigma, J));
  Polynomial p;
  for (int t = 0; t < terms; ++t) {
    Monomial m;
    int deg = rnd.uniform_int(0, degree);
    std::map<Atom, int> exps;
    for (int d = 0; d < deg; ++d)
      exps[pool[static_cast<std::size_t>(rnd.uniform_int(0, static_cast<int>(pool.size()) - 1))]]++;
    for (const auto& [a, e] : exps) m.emplace_back(a, e);
    p.add_term(m, rnd.rational());
  }
  return ScalarExpr(p);
}

/// Random jet point with small rational coordinates (no opaque hooks).
inline JetPoint random_jet_point(RandomSource& rnd, const ChartPtr& chart, int order) {
  JetPoint p;
  p.chart = chart;
  for (int i = 0; i < chart->n(); ++i) p.values[Atom::base(i)] = rnd.rational();
  for (int sigma = 0; sigma < chart->field_count(); ++sigma)
    for (int k = 0; k <= order; ++k)
      for (const MultiIndex& J : sorted_multi_indices(chart->n(), k))
        p.values[Atom::fiber(sigma, J)] = rnd.rational();
  for (std::size_t q = 0; q < chart->params().size(); ++q)
    p.values[Atom::param(static_cast<int>(q))] = rnd.rational();
  return p;
}

inline TangentVec<Rational> random_tangent(RandomSource& rnd, const ChartPtr& chart, int order) {
  TangentVec<Rational> v;
  for (int i = 0; i < chart->n(); ++i) v.dx.push_back(rnd.rational());
  for (int sigma = 0; sigma < chart->field_count(); ++sigma)
    for (int k = 0; k <= order; ++k)
      for (const MultiIndex& J : sorted_multi_indices(chart->n(), k))
        v.dy[{sigma, J}] = rnd.rational();
  return v;
}

/// Exact check that a form vanishes at random rational jet points; returns
/// the worst absolute value found (0 for symbolically zero forms).
inline Rational numeric_zero_check(const DiffForm& rho, RandomSource& rnd, int trials) {
  Rational worst = 0;
  for (int t = 0; t < trials; ++t) {
    JetPoint p = random_jet_point(rnd, rho.chart(), rho.order());
    std::vector<TangentVec<Rational>> vs;
    for (int k = 0; k < rho.degree(); ++k) vs.push_back(random_tangent(rnd, rho.chart(), rho.order()));
    Rational v = abs(eval_form<Rational>(rho, p, vs));
    if (v > worst) worst = v;
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Verification report (JSON-serializable).

struct NumericReport {
  std::string suite;
  std::uint64_t seed = 0;
  int trials = 0;
  double max_residual = 0;
  int resamples = 0;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }

  nlohmann::json to_json() const {
    return nlohmann::json{{"suite", suite},
                          {"seed", seed},
                          {"trials", trials},
                          {"max_residual", max_residual},
                          {"resamples", resamples},
                          {"failures", failures}};
  }
};

}  // namespace jetforms
