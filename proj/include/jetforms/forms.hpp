#pragma once

#include <map>
#include <optional>
#include <vector>

#include "jetforms/calculus.hpp"

namespace jetforms {

/// Contact-basis 1-form on J^sY: dx^i, omega^sigma_J (|J| <= s-1), or the
/// top-order dy^sigma_J (|J| = s).
struct BasisOneForm {
  enum class Kind : std::uint8_t { Dx, Contact, DyTop };
  Kind kind = Kind::Dx;
  std::uint16_t field = 0;  // Contact/DyTop
  MultiIndex idx;           // Contact/DyTop
  std::uint16_t i = 0;      // Dx

  static BasisOneForm dx(int i) {
    return {Kind::Dx, 0, {}, static_cast<std::uint16_t>(i)};
  }
  static BasisOneForm contact(int field, MultiIndex j) {
    return {Kind::Contact, static_cast<std::uint16_t>(field), std::move(j), 0};
  }
  static BasisOneForm dy_top(int field, MultiIndex j) {
    return {Kind::DyTop, static_cast<std::uint16_t>(field), std::move(j), 0};
  }

  bool is_contact_kind() const { return kind != Kind::Dx; }

  friend std::strong_ordering operator<=>(const BasisOneForm& a, const BasisOneForm& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    if (a.kind == Kind::Dx) return a.i <=> b.i;
    if (auto c = a.field <=> b.field; c != 0) return c;
    return a.idx <=> b.idx;
  }
  friend bool operator==(const BasisOneForm&, const BasisOneForm&) = default;
};

/// Strictly increasing factor list; the wedge monomial.
using FormMonomial = std::vector<BasisOneForm>;

/// Sorts factors, tracking the permutation sign; nullopt when a factor
/// repeats (the monomial vanishes).
inline std::optional<std::pair<FormMonomial, int>> normalize_monomial(FormMonomial m) {
  int sign = 1;
  for (std::size_t i = 1; i < m.size(); ++i) {
    std::size_t j = i;
    while (j > 0 && m[j] < m[j - 1]) {
      std::swap(m[j], m[j - 1]);
      sign = -sign;
      --j;
    }
  }
  for (std::size_t i = 1; i < m.size(); ++i)
    if (m[i] == m[i - 1]) return std::nullopt;
  return std::make_pair(std::move(m), sign);
}

namespace detail {

/// Expands every top-order dy factor as dy^s_J = omega^s_J + y^s_{Jj} dx^j,
/// leaving the other factors alone. The result is valid at any ambient order
/// above the original one.
inline std::vector<std::pair<ScalarExpr, FormMonomial>> expand_top(const ChartSpec& chart,
                                                                  const ScalarExpr& coeff,
                                                                  const FormMonomial& m) {
  std::vector<std::pair<ScalarExpr, FormMonomial>> acc{{coeff, {}}};
  for (const BasisOneForm& b : m) {
    std::vector<std::pair<ScalarExpr, BasisOneForm>> alts;
    if (b.kind == BasisOneForm::Kind::DyTop) {
      alts.emplace_back(ScalarExpr(1), BasisOneForm::contact(b.field, b.idx));
      for (int j = 0; j < chart.n(); ++j)
        alts.emplace_back(ScalarExpr::atom(Atom::fiber(b.field, b.idx.push(j))),
                          BasisOneForm::dx(j));
    } else {
      alts.emplace_back(ScalarExpr(1), b);
    }
    std::vector<std::pair<ScalarExpr, FormMonomial>> next;
    for (const auto& [cf, mono] : acc)
      for (const auto& [ca, alt] : alts) {
        auto prod = cf * ca;
        if (prod.is_zero()) continue;
        FormMonomial m2 = mono;
        m2.push_back(alt);
        next.emplace_back(std::move(prod), std::move(m2));
      }
    acc = std::move(next);
  }
  return acc;
}

}  // namespace detail

/// Graded exterior form on J^sY in the contact basis; canonicalized term
/// list, immutable in normal use after construction.
class DiffForm {
public:
  DiffForm() = default;
  DiffForm(ChartPtr chart, int degree, int order)
      : chart_(std::move(chart)), degree_(degree), order_(order) {}

  static DiffForm scalar(ChartPtr chart, ScalarExpr f, int order) {
    DiffForm r(std::move(chart), 0, order);
    r.add_term(std::move(f), {});
    return r;
  }

  const ChartPtr& chart() const { return chart_; }
  int degree() const { return degree_; }
  int order() const { return order_; }
  const std::map<FormMonomial, ScalarExpr>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Adds coeff * (factors wedge), canonicalizing sign and order.
  void add_term(ScalarExpr coeff, FormMonomial factors) {
    if (coeff.is_zero()) return;
    if (static_cast<int>(factors.size()) != degree_)
      throw Error("wedge monomial degree mismatch");
    auto norm = normalize_monomial(std::move(factors));
    if (!norm) return;
    check_factors(norm->first);
    if (norm->second < 0) coeff = -coeff;
    auto [it, inserted] = terms_.emplace(std::move(norm->first), coeff);
    if (!inserted) {
      it->second += coeff;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  friend DiffForm operator+(const DiffForm& a, const DiffForm& b) {
    if (a.degree_ != b.degree_) throw Error("degree mismatch in form sum");
    int s = std::max(a.order_, b.order_);
    DiffForm ra = a.raised(s), rb = b.raised(s);
    for (const auto& [m, c] : rb.terms_) ra.add_term(c, m);
    return ra;
  }
  friend DiffForm operator-(const DiffForm& a, const DiffForm& b) { return a + (-b); }
  friend DiffForm operator-(const DiffForm& a) {
    DiffForm r(a.chart_, a.degree_, a.order_);
    for (const auto& [m, c] : a.terms_) r.terms_[m] = -c;
    return r;
  }
  friend DiffForm operator*(const ScalarExpr& f, const DiffForm& a) {
    DiffForm r(a.chart_, a.degree_, a.order_);
    if (f.is_zero()) return r;
    for (const auto& [m, c] : a.terms_) {
      auto p = f * c;
      if (!p.is_zero()) r.terms_[m] = p;
    }
    return r;
  }

  /// Rewrites the form at a higher ambient order: top-order dy factors are
  /// expanded as dy^s_J = omega^s_J + y^s_{Jj} dx^j.
  DiffForm raised(int s2) const {
    if (s2 < order_) throw Error("cannot lower form order");
    if (s2 == order_) return *this;
    DiffForm r(chart_, degree_, s2);
    for (const auto& [m, c] : terms_)
      for (auto& [cf, mono] : detail::expand_top(*chart_, c, m))
        r.add_term(std::move(cf), std::move(mono));
    return r;
  }

  /// Number of contact-basis factors (Contact or DyTop) in a term.
  static int contact_count(const FormMonomial& m) {
    int k = 0;
    for (const auto& b : m)
      if (b.is_contact_kind()) ++k;
    return k;
  }

  friend bool operator==(const DiffForm& a, const DiffForm& b) {
    if (a.degree_ != b.degree_) return false;
    return (a - b).is_zero();
  }

private:
  void check_factors(const FormMonomial& m) const {
    for (const auto& b : m) {
      switch (b.kind) {
        case BasisOneForm::Kind::Dx:
          if (b.i >= static_cast<std::uint16_t>(chart_->n())) throw Error("dx index out of range");
          break;
        case BasisOneForm::Kind::Contact:
          if (b.idx.order() > order_ - 1) throw Error("contact index order exceeds ambient order");
          break;
        case BasisOneForm::Kind::DyTop:
          if (b.idx.order() != order_) throw Error("dy factor must have top order");
          break;
      }
    }
  }

  ChartPtr chart_;
  int degree_ = 0;
  int order_ = 0;
  std::map<FormMonomial, ScalarExpr> terms_;
};

// ---------------------------------------------------------------------------
// Constructors for the horizontal volume forms.

inline DiffForm omega0(const ChartPtr& chart, int order = 0) {
  DiffForm r(chart, chart->n(), order);
  FormMonomial m;
  for (int i = 0; i < chart->n(); ++i) m.push_back(BasisOneForm::dx(i));
  r.add_term(ScalarExpr(1), std::move(m));
  return r;
}

/// Contraction with the coordinate base vector d/dx^i (on basis monomials).
inline DiffForm contract_dx(const DiffForm& a, int i) {
  DiffForm r(a.chart(), a.degree() - 1, a.order());
  for (const auto& [m, c] : a.terms()) {
    int sign = 1;
    for (std::size_t l = 0; l < m.size(); ++l) {
      if (m[l].kind == BasisOneForm::Kind::Dx && m[l].i == i) {
        FormMonomial rest;
        for (std::size_t k = 0; k < m.size(); ++k)
          if (k != l) rest.push_back(m[k]);
        r.add_term(sign > 0 ? c : -c, std::move(rest));
        break;
      }
      sign = -sign;
    }
  }
  return r;
}

/// omega_{i1...ik} = i_{d_ik} ... i_{d_i1} omega_0.
inline DiffForm omega_lowered(const ChartPtr& chart, const std::vector<int>& is, int order = 0) {
  DiffForm r = omega0(chart, order);
  for (int i : is) r = contract_dx(r, i);
  return r;
}

// ---------------------------------------------------------------------------

/// d: Omega_k(W^s) -> Omega_{k+1}(W^{s+1}).
inline DiffForm exterior_derivative(const DiffForm& rho) {
  const ChartPtr& chart = rho.chart();
  int s = rho.order();
  DiffForm out(chart, rho.degree() + 1, s + 1);
  for (const auto& [m, c] : rho.terms()) {
    auto raised_monomials = detail::expand_top(*chart, ScalarExpr(1), m);
    // df ^ R(b_1) ^ ... ^ R(b_k) with df = (d_i f) dx^i + (df/dy_J) omega_J
    for (int i = 0; i < chart->n(); ++i) {
      ScalarExpr di = total_derivative(*chart, c, i);
      if (di.is_zero()) continue;
      for (const auto& [cf, mono] : raised_monomials) {
        FormMonomial m2 = mono;
        m2.insert(m2.begin(), BasisOneForm::dx(i));
        out.add_term(di * cf, std::move(m2));
      }
    }
    for (const JetCoordinate& yc : fiber_dependencies(*chart, c)) {
      ScalarExpr dc = partial_derivative(*chart, c, yc);
      if (dc.is_zero()) continue;
      for (const auto& [cf, mono] : raised_monomials) {
        FormMonomial m2 = mono;
        m2.insert(m2.begin(), BasisOneForm::contact(yc.id, yc.idx));
        out.add_term(dc * cf, std::move(m2));
      }
    }
    // f * sum_l (-1)^(l-1) R(b_1) .. d(b_l) .. R(b_k);
    // d(dx) = 0, d(dy_top) = 0, d(omega_J) = -omega_{Jj} ^ dx^j.
    for (std::size_t l = 0; l < m.size(); ++l) {
      if (m[l].kind != BasisOneForm::Kind::Contact) continue;
      int sign = (l % 2 == 0) ? 1 : -1;
      for (int j = 0; j < chart->n(); ++j) {
        FormMonomial m2;
        for (std::size_t k = 0; k < m.size(); ++k) {
          if (k == l) {
            m2.push_back(BasisOneForm::contact(m[l].field, m[l].idx.push(j)));
            m2.push_back(BasisOneForm::dx(j));
          } else {
            m2.push_back(m[k]);
          }
        }
        for (auto& [cf, mono] : detail::expand_top(*chart, sign < 0 ? c : -c, m2))
          out.add_term(std::move(cf), std::move(mono));
      }
    }
  }
  return out;
}

/// Contact splitting at order s+1: returns [p_0 rho = h rho, p_1 rho, ...,
/// p_k rho]; the components sum to the order-raised rho.
inline std::vector<DiffForm> split_contact(const DiffForm& rho) {
  DiffForm r = rho.raised(rho.order() + 1);
  std::vector<DiffForm> out;
  for (int k = 0; k <= rho.degree(); ++k) out.emplace_back(r.chart(), r.degree(), r.order());
  for (const auto& [m, c] : r.terms())
    out[static_cast<std::size_t>(DiffForm::contact_count(m))].add_term(c, m);
  return out;
}

/// Horizontalization h = p_0; a morphism of exterior algebras.
inline DiffForm horizontalize(const DiffForm& rho) { return split_contact(rho)[0]; }

/// The k-contact component p_k.
inline DiffForm contact_component(const DiffForm& rho, int k) {
  auto parts = split_contact(rho);
  if (k < 0 || k > rho.degree()) return DiffForm(rho.chart(), rho.degree(), rho.order() + 1);
  return parts[static_cast<std::size_t>(k)];
}

inline DiffForm wedge(const DiffForm& a, const DiffForm& b) {
  if (a.chart() != b.chart()) throw Error("wedge across different charts");
  int s = std::max(a.order(), b.order());
  DiffForm ra = a.raised(s), rb = b.raised(s);
  DiffForm r(a.chart(), a.degree() + b.degree(), s);
  for (const auto& [ma, ca] : ra.terms())
    for (const auto& [mb, cb] : rb.terms()) {
      auto c = ca * cb;
      if (c.is_zero()) continue;
      FormMonomial m = ma;
      m.insert(m.end(), mb.begin(), mb.end());
      r.add_term(std::move(c), std::move(m));
    }
  return r;
}

// ---------------------------------------------------------------------------
// Projectable vector fields and their jet prolongations.

/// pi-projectable vector field xi^i(x) d_i + Xi^sigma(x,y) d_sigma.
struct VectorFieldSpec {
  ChartPtr chart;
  std::vector<ScalarExpr> xi;  // size n, base coordinates only
  std::vector<ScalarExpr> Xi;  // size m, order 0

  VectorFieldSpec(ChartPtr c, std::vector<ScalarExpr> xi_, std::vector<ScalarExpr> Xi_)
      : chart(std::move(c)), xi(std::move(xi_)), Xi(std::move(Xi_)) {
    if (static_cast<int>(xi.size()) != chart->n() ||
        static_cast<int>(Xi.size()) != chart->field_count())
      throw Error("vector field component count mismatch");
    for (const auto& e : xi)
      for (const Atom& a : e.atoms())
        if (a.kind != AtomKind::Base && a.kind != AtomKind::Param)
          throw Error("xi components must depend on base coordinates only");
    for (const auto& e : Xi)
      if (jet_order(*chart, e) > 0) throw Error("Xi components must be of jet order 0");
  }

  static VectorFieldSpec coordinate_base(ChartPtr c, int i) {
    std::vector<ScalarExpr> xi(static_cast<std::size_t>(c->n()), ScalarExpr());
    xi[static_cast<std::size_t>(i)] = ScalarExpr(1);
    std::vector<ScalarExpr> Xi(static_cast<std::size_t>(c->field_count()), ScalarExpr());
    return VectorFieldSpec(std::move(c), std::move(xi), std::move(Xi));
  }
  static VectorFieldSpec vertical(ChartPtr c, std::vector<ScalarExpr> Xi_) {
    std::vector<ScalarExpr> xi(static_cast<std::size_t>(c->n()), ScalarExpr());
    return VectorFieldSpec(std::move(c), std::move(xi), std::move(Xi_));
  }
};

/// Component table of J^r Xi.
struct ProlongedField {
  ChartPtr chart;
  int order = 0;
  std::vector<ScalarExpr> xi;
  std::map<std::pair<int, MultiIndex>, ScalarExpr> comp;  // (field, J) -> Xi^sigma_J

  const ScalarExpr& component(int field, const MultiIndex& j) const {
    auto it = comp.find({field, j});
    if (it == comp.end()) throw Error("prolongation order too low for requested component");
    return it->second;
  }
};

/// Xi^sigma_J = d_J(Xi^sigma - xi^i y^sigma_i) + xi^i y^sigma_{J u i}.
inline ProlongedField prolong_vector_field(const VectorFieldSpec& v, int r) {
  ProlongedField out{v.chart, r, v.xi, {}};
  const ChartSpec& chart = *v.chart;
  for (int sigma = 0; sigma < chart.field_count(); ++sigma) {
    ScalarExpr w = v.Xi[static_cast<std::size_t>(sigma)];
    for (int i = 0; i < chart.n(); ++i)
      w -= v.xi[static_cast<std::size_t>(i)] *
           ScalarExpr::atom(Atom::fiber(sigma, MultiIndex{i}));
    for (int k = 0; k <= r; ++k) {
      for (const MultiIndex& J : sorted_multi_indices(chart.n(), k)) {
        if (k == 0) {
          out.comp[{sigma, J}] = v.Xi[static_cast<std::size_t>(sigma)];
          continue;
        }
        ScalarExpr c = total_derivative(chart, w, J);
        for (int i = 0; i < chart.n(); ++i)
          c += v.xi[static_cast<std::size_t>(i)] *
               ScalarExpr::atom(Atom::fiber(sigma, J.push(i)));
        out.comp[{sigma, J}] = std::move(c);
      }
    }
  }
  return out;
}

/// Graded antiderivation i_{J^r Xi} of degree -1.
inline DiffForm interior_product(const ProlongedField& v, const DiffForm& rho) {
  const ChartPtr& chart = rho.chart();
  DiffForm out(chart, rho.degree() - 1, rho.order());
  if (rho.degree() == 0) return out;
  auto eval_factor = [&](const BasisOneForm& b) -> ScalarExpr {
    switch (b.kind) {
      case BasisOneForm::Kind::Dx:
        return v.xi[b.i];
      case BasisOneForm::Kind::Contact: {
        ScalarExpr r = v.component(b.field, b.idx);
        for (int j = 0; j < chart->n(); ++j)
          r -= ScalarExpr::atom(Atom::fiber(b.field, b.idx.push(j))) * v.xi[static_cast<std::size_t>(j)];
        return r;
      }
      case BasisOneForm::Kind::DyTop:
        return v.component(b.field, b.idx);
    }
    return {};
  };
  for (const auto& [m, c] : rho.terms()) {
    for (std::size_t l = 0; l < m.size(); ++l) {
      ScalarExpr val = eval_factor(m[l]);
      if (val.is_zero()) continue;
      if (l % 2 == 1) val = -val;
      FormMonomial rest;
      for (std::size_t k = 0; k < m.size(); ++k)
        if (k != l) rest.push_back(m[k]);
      out.add_term(c * val, std::move(rest));
    }
  }
  return out;
}

/// Lie derivative via Cartan's formula d i_Xi + i_Xi d.
inline DiffForm lie_derivative(const ProlongedField& v, const DiffForm& rho) {
  DiffForm a = exterior_derivative(interior_product(v, rho));
  DiffForm b = interior_product(v, exterior_derivative(rho));
  return a + b;
}

// ---------------------------------------------------------------------------

/// Pullback by the zero section: fiber values to zero, every contact-basis
/// factor dies; the result lives over the base alone.
inline DiffForm pullback_zero_section(const DiffForm& rho) {
  DiffForm out(rho.chart(), rho.degree(), 0);
  for (const auto& [m, c] : rho.terms()) {
    bool contact = false;
    for (const auto& b : m)
      if (b.is_contact_kind()) contact = true;
    if (contact) continue;
    ScalarExpr v = zero_section_scalar(*rho.chart(), c);
    out.add_term(std::move(v), m);
  }
  return out;
}

/// Substitute coordinates inside all coefficients (basis untouched); used
/// for point substitutions and symmetry checks.
inline DiffForm substitute_coefficients(const DiffForm& rho, const std::map<Atom, ScalarExpr>& repl) {
  DiffForm out(rho.chart(), rho.degree(), rho.order());
  for (const auto& [m, c] : rho.terms()) out.add_term(substitute(c, repl), m);
  return out;
}

/// Minimal jet order the form projects to: rewrite in the natural basis
/// {dx^i, dy^sigma_J} and take the largest order actually present.
inline int natural_order(const DiffForm& rho) {
  const ChartPtr& chart = rho.chart();
  std::map<FormMonomial, ScalarExpr> nat;
  auto add = [&](FormMonomial m, ScalarExpr c) {
    auto norm = normalize_monomial(std::move(m));
    if (!norm || c.is_zero()) return;
    if (norm->second < 0) c = -c;
    auto [it, ins] = nat.emplace(std::move(norm->first), c);
    if (!ins) {
      it->second += c;
      if (it->second.is_zero()) nat.erase(it);
    }
  };
  for (const auto& [m, c] : rho.terms()) {
    std::vector<std::pair<ScalarExpr, FormMonomial>> acc{{c, {}}};
    for (const BasisOneForm& b : m) {
      std::vector<std::pair<ScalarExpr, BasisOneForm>> alts;
      if (b.kind == BasisOneForm::Kind::Contact) {
        alts.emplace_back(ScalarExpr(1), BasisOneForm::dy_top(b.field, b.idx));
        for (int j = 0; j < chart->n(); ++j)
          alts.emplace_back(-ScalarExpr::atom(Atom::fiber(b.field, b.idx.push(j))),
                            BasisOneForm::dx(j));
      } else {
        alts.emplace_back(ScalarExpr(1), b);  // DyTop already natural
      }
      std::vector<std::pair<ScalarExpr, FormMonomial>> next;
      for (const auto& [cf, mono] : acc)
        for (const auto& [ca, alt] : alts) {
          auto prod = cf * ca;
          if (prod.is_zero()) continue;
          FormMonomial m2 = mono;
          m2.push_back(alt);
          next.emplace_back(std::move(prod), std::move(m2));
        }
      acc = std::move(next);
    }
    for (auto& [cf, mono] : acc) add(std::move(mono), std::move(cf));
  }
  int r = 0;
  for (const auto& [m, c] : nat) {
    r = std::max(r, jet_order(*chart, c));
    for (const auto& b : m)
      if (b.kind != BasisOneForm::Kind::Dx) r = std::max(r, b.idx.order());
  }
  return r;
}

}  // namespace jetforms
