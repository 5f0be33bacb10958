#pragma once

#include "jetforms/geomver.hpp"

namespace jetforms {

/// Chart for a symmetric rank-2 field g_{pq} (p <= q stored), with the two
/// built-in opaque symbols: the inverse metric inv_g[i,j] and the volume
/// factor sqrtdet_g. Derivative rules implement
///   d g^{ij} = -g^{ia} g^{bj} d g_{ab},   d sqrt|det g| = 1/2 sqrt g^{ab} d g_{ab}.
class MetricChart {
public:
  explicit MetricChart(int n, int max_order = 8, std::vector<std::string> base = {}) : n_(n) {
    std::vector<std::string> fields;
    if (base.empty())
      for (int i = 0; i < n; ++i) base.push_back("x" + std::to_string(i));
    if (static_cast<int>(base.size()) != n) throw Error("base name count mismatch");
    for (int p = 0; p < n; ++p)
      for (int q = p; q < n; ++q) fields.push_back("g" + std::to_string(p) + std::to_string(q));

    OpaqueSymbol inv;
    inv.name = "inv_g";
    inv.arity = 2;
    inv.symmetric = true;
    OpaqueSymbol vol;
    vol.name = "sqrtdet_g";
    vol.arity = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p; q < n; ++q) {
        inv.fiber_deps.push_back(Atom::fiber(field_of(p, q), {}));
        vol.fiber_deps.push_back(Atom::fiber(field_of(p, q), {}));
      }
    const int dim = n;
    auto field_of_pq = [dim](int p, int q) {
      if (p > q) std::swap(p, q);
      return p * dim - p * (p - 1) / 2 + (q - p);
    };
    inv.fiber_rule = [dim, field_of_pq](const ChartSpec&, const MultiIndex& idx,
                                        const JetCoordinate& c) -> ScalarExpr {
      if (c.kind != AtomKind::Fiber || c.idx.order() != 0) return {};
      int i = idx[0], j = idx[1];
      // recover (p,q) from the field id
      int p = 0, q = 0, id = c.id;
      for (p = 0; p < dim; ++p) {
        int row = dim - p;
        if (id < row) { q = p + id; break; }
        id -= row;
      }
      auto iv = [&](int a, int b) {
        return ScalarExpr::atom(Atom::opaque(0, MultiIndex{a, b}));
      };
      ScalarExpr r = -(iv(i, p) * iv(q, j));
      if (p != q) r -= iv(i, q) * iv(p, j);
      return r;
    };
    vol.fiber_rule = [dim](const ChartSpec&, const MultiIndex&, const JetCoordinate& c) -> ScalarExpr {
      if (c.kind != AtomKind::Fiber || c.idx.order() != 0) return {};
      int p = 0, q = 0, id = c.id;
      for (p = 0; p < dim; ++p) {
        int row = dim - p;
        if (id < row) { q = p + id; break; }
        id -= row;
      }
      Rational w = (p == q) ? Rational(1, 2) : Rational(1);
      return ScalarExpr(w) * ScalarExpr::atom(Atom::opaque(1, {})) *
             ScalarExpr::atom(Atom::opaque(0, MultiIndex{p, q}));
    };

    auto dense = [dim, field_of_pq](const std::map<Atom, double>& deps) {
      std::vector<std::vector<double>> g(static_cast<std::size_t>(dim),
                                         std::vector<double>(static_cast<std::size_t>(dim), 0.0));
      for (int p = 0; p < dim; ++p)
        for (int q = 0; q < dim; ++q) {
          auto it = deps.find(Atom::fiber(field_of_pq(p, q), {}));
          if (it == deps.end()) throw Error("metric hook missing a component");
          g[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] = it->second;
        }
      return g;
    };
    inv.hook = [dim, dense](const std::map<Atom, double>& deps, const MultiIndex& idx) -> double {
      auto g = dense(deps);
      // Gauss-Jordan inverse with partial pivoting
      std::vector<std::vector<double>> a = g,
          id(static_cast<std::size_t>(dim), std::vector<double>(static_cast<std::size_t>(dim), 0.0));
      for (int i = 0; i < dim; ++i) id[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
      for (int col = 0; col < dim; ++col) {
        int piv = col;
        for (int r = col + 1; r < dim; ++r)
          if (std::fabs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) >
              std::fabs(a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)]))
            piv = r;
        if (std::fabs(a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)]) < 1e-12)
          throw Error("singular metric");
        std::swap(a[static_cast<std::size_t>(col)], a[static_cast<std::size_t>(piv)]);
        std::swap(id[static_cast<std::size_t>(col)], id[static_cast<std::size_t>(piv)]);
        double d = a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
        for (int c2 = 0; c2 < dim; ++c2) {
          a[static_cast<std::size_t>(col)][static_cast<std::size_t>(c2)] /= d;
          id[static_cast<std::size_t>(col)][static_cast<std::size_t>(c2)] /= d;
        }
        for (int r = 0; r < dim; ++r) {
          if (r == col) continue;
          double f = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
          for (int c2 = 0; c2 < dim; ++c2) {
            a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c2)] -=
                f * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(c2)];
            id[static_cast<std::size_t>(r)][static_cast<std::size_t>(c2)] -=
                f * id[static_cast<std::size_t>(col)][static_cast<std::size_t>(c2)];
          }
        }
      }
      return id[static_cast<std::size_t>(idx[0])][static_cast<std::size_t>(idx[1])];
    };
    vol.hook = [dim, dense](const std::map<Atom, double>& deps, const MultiIndex&) -> double {
      auto a = dense(deps);
      double det = 1.0;
      for (int col = 0; col < dim; ++col) {
        int piv = col;
        for (int r = col + 1; r < dim; ++r)
          if (std::fabs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) >
              std::fabs(a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)]))
            piv = r;
        if (std::fabs(a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)]) < 1e-12)
          throw Error("singular metric");
        if (piv != col) {
          std::swap(a[static_cast<std::size_t>(col)], a[static_cast<std::size_t>(piv)]);
          det = -det;
        }
        det *= a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
        for (int r = col + 1; r < dim; ++r) {
          double f = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] /
                     a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
          for (int c2 = col; c2 < dim; ++c2)
            a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c2)] -=
                f * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(c2)];
        }
      }
      return std::sqrt(std::fabs(det));
    };

    chart_ = std::make_shared<const ChartSpec>(std::move(base), std::move(fields),
                                               std::vector<std::string>{},
                                               std::vector<OpaqueSymbol>{inv, vol}, max_order);
  }

  const ChartPtr& chart() const { return chart_; }
  int n() const { return n_; }
  int field_of(int p, int q) const {
    if (p > q) std::swap(p, q);
    return p * n_ - p * (p - 1) / 2 + (q - p);
  }

  ScalarExpr g(int p, int q) const { return ScalarExpr::atom(Atom::fiber(field_of(p, q), {})); }
  ScalarExpr dg(int p, int q, const MultiIndex& j) const {
    return ScalarExpr::atom(Atom::fiber(field_of(p, q), j));
  }
  ScalarExpr inv(int i, int j) const {
    return ScalarExpr::atom(Atom::opaque(0, MultiIndex{i, j}));
  }
  ScalarExpr sqrtdet() const { return ScalarExpr::atom(Atom::opaque(1, {})); }

  /// Christoffel symbol of the first kind, Gamma_{hjl} = 1/2 (g_{hj,l} +
  /// g_{hl,j} - g_{jl,h}).
  ScalarExpr gamma_lower(int h, int j, int l) const {
    return ScalarExpr(Rational(1, 2)) *
           (dg(h, j, MultiIndex{l}) + dg(h, l, MultiIndex{j}) - dg(j, l, MultiIndex{h}));
  }
  /// Gamma^i_{jk} = g^{ih} Gamma_{hjk}.
  ScalarExpr gamma(int i, int j, int k) const {
    ScalarExpr r;
    for (int h = 0; h < n_; ++h) r += inv(i, h) * gamma_lower(h, j, k);
    return r;
  }

  /// Reduced (non-invariant) first order density
  ///   L' = g^{jk} (Gamma^i_{jl} Gamma^l_{ki} - Gamma^i_{jk} Gamma^l_{il}) sqrt|det g|.
  ScalarExpr reduced_density() const {
    ScalarExpr s;
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        ScalarExpr acc;
        for (int i = 0; i < n_; ++i)
          for (int l = 0; l < n_; ++l)
            acc += gamma(i, j, l) * gamma(l, k, i) - gamma(i, j, k) * gamma(l, i, l);
        s += inv(j, k) * acc;
      }
    return s * sqrtdet();
  }

  /// Scalar-curvature density L = g^{jk} R_{jk} sqrt|det g| (second order).
  ScalarExpr curvature_density() const {
    const ChartSpec& c = *chart_;
    ScalarExpr s;
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        ScalarExpr ric;
        for (int i = 0; i < n_; ++i) {
          ric += total_derivative(c, gamma(i, j, k), i) - total_derivative(c, gamma(i, j, i), k);
          for (int p = 0; p < n_; ++p)
            ric += gamma(i, i, p) * gamma(p, j, k) - gamma(i, k, p) * gamma(p, j, i);
        }
        s += inv(j, k) * ric;
      }
    return s * sqrtdet();
  }

  /// alpha = (Gamma^{ij}_j - Gamma^{ji}_j) sqrt|det g| omega_i.
  DiffForm alpha_form() const {
    DiffForm a(chart_, n_ - 1, 1);
    for (int i = 0; i < n_; ++i) {
      ScalarExpr ai;
      for (int j = 0; j < n_; ++j)
        for (int p = 0; p < n_; ++p)
          for (int q = 0; q < n_; ++q)
            ai += (inv(i, p) * inv(j, q) - inv(j, p) * inv(i, q)) * gamma_lower(p, q, j);
      ai *= sqrtdet();
      if (ai.is_zero()) continue;
      a = a + ScalarExpr(ai) * omega_lowered(chart_, {i}, 1);
    }
    return a;
  }

  /// The closed-form first derivative of L',
  ///   Gamma^{rpq} - g^{qr} Gamma^{kp}_k + 1/2 g^{pq} (Gamma^{jr}_j - Gamma^{rj}_j),
  /// times sqrt|det g| (the volume factor is independent of the g_{pq,r}).
  ScalarExpr reduced_density_derivative_rhs(int p, int q, int r) const {
    ScalarExpr acc;
    for (int h = 0; h < n_; ++h)
      for (int j = 0; j < n_; ++j)
        for (int l = 0; l < n_; ++l)
          acc += inv(r, h) * inv(p, j) * inv(q, l) * gamma_lower(h, j, l);
    ScalarExpr tr;  // Gamma^{kp}_k
    for (int k = 0; k < n_; ++k)
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
          tr += inv(k, a) * inv(p, b) * gamma_lower(a, b, k);
    acc -= inv(q, r) * tr;
    ScalarExpr asym;  // Gamma^{jr}_j - Gamma^{rj}_j
    for (int j = 0; j < n_; ++j)
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
          asym += (inv(j, a) * inv(r, b) - inv(r, a) * inv(j, b)) * gamma_lower(a, b, j);
    acc += ScalarExpr(Rational(1, 2)) * inv(p, q) * asym;
    return acc * sqrtdet();
  }

private:
  int n_ = 0;
  ChartPtr chart_;
};

/// Samples a metric jet point: g entries in [-2,2] with |det g| >= 1e-3
/// (resampling otherwise), derivative coordinates in [-1,1].
inline JetPoint sample_metric_point(RandomSource& rnd, const MetricChart& mc, int order,
                                    int* resamples) {
  const int n = mc.n();
  while (true) {
    JetPoint p;
    p.chart = mc.chart();
    for (int i = 0; i < n; ++i) p.values[Atom::base(i)] = rnd.rational();
    std::vector<std::vector<double>> g(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        Rational v(rnd.uniform_int(-2000, 2000), 1000);
        p.values[Atom::fiber(mc.field_of(a, b), {})] = v;
        g[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
            g[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = static_cast<double>(v);
      }
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b)
        for (int k = 1; k <= order; ++k)
          for (const MultiIndex& J : sorted_multi_indices(n, k))
            p.values[Atom::fiber(mc.field_of(a, b), J)] = Rational(rnd.uniform_int(-1000, 1000), 1000);
    // determinant guard (entries are already in [-2,2])
    double det = 1.0;
    {
      auto a = g;
      bool ok = true;
      for (int col = 0; col < n && ok; ++col) {
        int piv = col;
        for (int r2 = col + 1; r2 < n; ++r2)
          if (std::fabs(a[static_cast<std::size_t>(r2)][static_cast<std::size_t>(col)]) >
              std::fabs(a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)]))
            piv = r2;
        if (std::fabs(a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)]) < 1e-12) {
          ok = false;
          break;
        }
        if (piv != col) {
          std::swap(a[static_cast<std::size_t>(col)], a[static_cast<std::size_t>(piv)]);
          det = -det;
        }
        det *= a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
        for (int r2 = col + 1; r2 < n; ++r2) {
          double f = a[static_cast<std::size_t>(r2)][static_cast<std::size_t>(col)] /
                     a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
          for (int c2 = col; c2 < n; ++c2)
            a[static_cast<std::size_t>(r2)][static_cast<std::size_t>(c2)] -=
                f * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(c2)];
        }
      }
      if (!ok) det = 0.0;
    }
    if (std::fabs(det) < 1e-3) {
      if (resamples) ++(*resamples);
      continue;
    }
    return p;
  }
}

inline TangentVec<double> random_metric_tangent(RandomSource& rnd, const MetricChart& mc,
                                                int order) {
  TangentVec<double> v;
  for (int i = 0; i < mc.n(); ++i) v.dx.push_back(rnd.real(-1.0, 1.0));
  for (int sigma = 0; sigma < mc.chart()->field_count(); ++sigma)
    for (int k = 0; k <= order; ++k)
      for (const MultiIndex& J : sorted_multi_indices(mc.n(), k))
        v.dy[{sigma, J}] = rnd.real(-1.0, 1.0);
  return v;
}

/// Numeric discharge of the metric-Lagrangian identities: (a) the closed form
/// of dL'/dg_{pq,r}; (b) Theta_L = Theta_{L'} + d(alpha) on random vectors.
inline NumericReport hilbert_numeric_suite(std::uint64_t seed, int trials, int n = 4) {
  MetricChart mc(n);
  const ChartSpec& chart = *mc.chart();
  NumericReport rep;
  rep.suite = "hilbert-n" + std::to_string(n);
  rep.seed = seed;
  rep.trials = trials;
  RandomSource rnd(seed);

  ScalarExpr lred = mc.reduced_density();
  Lagrangian lag_full(mc.chart(), mc.curvature_density(), 2);
  Lagrangian lag_red(mc.chart(), lred, 1);
  DiffForm theta_full = principal_lepage(lag_full).form;
  DiffForm theta_red = principal_lepage(lag_red).form;
  DiffForm dalpha = exterior_derivative(mc.alpha_form());
  DiffForm residual_form = theta_full - theta_red - dalpha;

  // (a) symbolic derivative vs the closed form, per symmetrized component
  struct Pair { ScalarExpr lhs, rhs; };
  std::vector<Pair> derivative_checks;
  for (int p = 0; p < n; ++p)
    for (int q = p; q < n; ++q)
      for (int r = 0; r < n; ++r) {
        Pair pr;
        pr.lhs = partial_derivative(chart, lred,
                                    Atom::fiber(mc.field_of(p, q), MultiIndex{r}));
        pr.rhs = mc.reduced_density_derivative_rhs(p, q, r);
        if (p != q) pr.rhs += mc.reduced_density_derivative_rhs(q, p, r);
        derivative_checks.push_back(std::move(pr));
      }

  for (int t = 0; t < trials; ++t) {
    JetPoint pt = sample_metric_point(rnd, mc, residual_form.order(), &rep.resamples);
    for (std::size_t c = 0; c < derivative_checks.size(); ++c) {
      double a = eval_numeric(derivative_checks[c].lhs, pt);
      double b = eval_numeric(derivative_checks[c].rhs, pt);
      double rel = std::fabs(a - b) / std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
      rep.max_residual = std::max(rep.max_residual, rel);
      if (rel > 1e-9)
        rep.failures.push_back("derivative identity failed at trial " + std::to_string(t) +
                               " component " + std::to_string(c));
    }
    std::vector<TangentVec<double>> vs;
    for (int k = 0; k < n; ++k) vs.push_back(random_metric_tangent(rnd, mc, residual_form.order()));
    double r1 = eval_form<double>(theta_full, pt, vs);
    double r0 = eval_form<double>(residual_form, pt, vs);
    double rel = std::fabs(r0) / std::max(1.0, std::fabs(r1));
    rep.max_residual = std::max(rep.max_residual, rel);
    if (rel > 1e-9)
      rep.failures.push_back("principal-form splitting failed at trial " + std::to_string(t));
  }
  return rep;
}

}  // namespace jetforms
