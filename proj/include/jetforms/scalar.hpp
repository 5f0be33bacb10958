#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "jetforms/atoms.hpp"

namespace jetforms {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Power product of atoms, sorted by atom, all exponents > 0.
using Monomial = std::vector<std::pair<Atom, int>>;

inline Monomial monomial_mul(const Monomial& a, const Monomial& b) {
  Monomial r;
  r.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      r.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i, ++j;
    } else if (a[i].first < b[j].first) {
      r.push_back(a[i++]);
    } else {
      r.push_back(b[j++]);
    }
  }
  for (; i < a.size(); ++i) r.push_back(a[i]);
  for (; j < b.size(); ++j) r.push_back(b[j]);
  return r;
}

/// Expanded multivariate polynomial with exact rational coefficients.
/// Canonical form: sorted term map, no zero coefficients.
class Polynomial {
public:
  Polynomial() = default;

  static Polynomial constant(Rational c) {
    Polynomial p;
    if (c != 0) p.terms_[{}] = std::move(c);
    return p;
  }
  static Polynomial atom(const Atom& a, int exp = 1) {
    Polynomial p;
    p.terms_[{{a, exp}}] = 1;
    return p;
  }
  static Polynomial term(Monomial m, Rational c) {
    Polynomial p;
    if (c != 0) p.terms_[std::move(m)] = std::move(c);
    return p;
  }

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
  }
  Rational constant_value() const {
    if (terms_.empty()) return 0;
    if (!is_constant()) throw Error("polynomial is not constant");
    return terms_.begin()->second;
  }
  const std::map<Monomial, Rational>& terms() const { return terms_; }

  void add_term(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(const Polynomial& a) {
    Polynomial r;
    for (const auto& [m, c] : a.terms_) r.terms_[m] = -c;
    return r;
  }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial r;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.add_term(monomial_mul(ma, mb), ca * cb);
    return r;
  }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }
  friend Polynomial operator*(const Polynomial& a, const Rational& c) {
    Polynomial r;
    if (c != 0)
      for (const auto& [m, cc] : a.terms_) r.terms_[m] = cc * c;
    return r;
  }

  Polynomial pow(int e) const {
    if (e < 0) throw Error("negative exponent on polynomial");
    Polynomial r = constant(1);
    Polynomial b = *this;
    while (e > 0) {
      if (e & 1) r = r * b;
      b = b * b;
      e >>= 1;
    }
    return r;
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;
  friend std::weak_ordering operator<=>(const Polynomial& a, const Polynomial& b) {
    return a.terms_ <=> b.terms_;
  }

  /// Formal partial derivative, treating every atom as independent.
  Polynomial derivative(const Atom& v) const {
    Polynomial r;
    for (const auto& [m, c] : terms_) {
      for (std::size_t k = 0; k < m.size(); ++k) {
        if (m[k].first != v) continue;
        Monomial dm = m;
        Rational dc = c * m[k].second;
        if (dm[k].second == 1)
          dm.erase(dm.begin() + static_cast<std::ptrdiff_t>(k));
        else
          dm[k].second -= 1;
        r.add_term(dm, dc);
        break;
      }
    }
    return r;
  }

  int degree_in(const Atom& v) const {
    int d = 0;
    for (const auto& [m, c] : terms_)
      for (const auto& [a, e] : m)
        if (a == v) d = std::max(d, e);
    return d;
  }

  bool contains(const Atom& v) const {
    for (const auto& [m, c] : terms_)
      for (const auto& [a, e] : m)
        if (a == v) return true;
    return false;
  }

  std::set<Atom> atoms() const {
    std::set<Atom> s;
    for (const auto& [m, c] : terms_)
      for (const auto& [a, e] : m) s.insert(a);
    return s;
  }

  /// Largest |J| over fiber atoms present.
  int jet_order() const {
    int r = 0;
    for (const auto& [m, c] : terms_)
      for (const auto& [a, e] : m) r = std::max(r, a.jet_order());
    return r;
  }

  /// Leading (largest) monomial coefficient; polynomial must be nonzero.
  const Rational& leading_coefficient() const { return terms_.rbegin()->second; }

private:
  std::map<Monomial, Rational> terms_;
};

// ---------------------------------------------------------------------------
// Multivariate gcd over Q, used only to keep rational-expression denominators
// reduced. Primitive pseudo-remainder sequences in the smallest present atom.

namespace detail {

inline std::optional<Atom> smallest_atom(const Polynomial& p) {
  std::optional<Atom> best;
  for (const auto& [m, c] : p.terms())
    for (const auto& [a, e] : m)
      if (!best || a < *best) best = a;
  return best;
}

/// View as a univariate polynomial in v with Polynomial coefficients.
inline std::map<int, Polynomial> collect(const Polynomial& p, const Atom& v) {
  std::map<int, Polynomial> out;
  for (const auto& [m, c] : p.terms()) {
    int deg = 0;
    Monomial rest;
    for (const auto& [a, e] : m) {
      if (a == v)
        deg = e;
      else
        rest.emplace_back(a, e);
    }
    out[deg].add_term(rest, c);
  }
  for (auto it = out.begin(); it != out.end();)
    it = it->second.is_zero() ? out.erase(it) : std::next(it);
  return out;
}

inline Polynomial from_collected(const std::map<int, Polynomial>& cs, const Atom& v) {
  Polynomial r;
  for (const auto& [d, c] : cs) r += c * Polynomial::atom(v).pow(d);
  return r;
}

std::optional<Polynomial> try_divide(const Polynomial& a, const Polynomial& b);

/// Exact division in the smallest atom of b; nullopt when not divisible.
inline std::optional<Polynomial> try_divide(const Polynomial& a, const Polynomial& b) {
  if (b.is_zero()) return std::nullopt;
  if (a.is_zero()) return Polynomial();
  if (b.is_constant()) {
    Rational inv = 1 / b.constant_value();
    return a * inv;
  }
  Atom v = *smallest_atom(b);
  auto bc = collect(b, v);
  int db = bc.rbegin()->first;
  const Polynomial& blead = bc.rbegin()->second;
  Polynomial rem = a;
  Polynomial quot;
  while (!rem.is_zero()) {
    auto rc = collect(rem, v);
    int dr = rc.rbegin()->first;
    if (dr < db) return std::nullopt;
    auto q = try_divide(rc.rbegin()->second, blead);
    if (!q) return std::nullopt;
    Polynomial qt = *q * Polynomial::atom(v).pow(dr - db);
    quot += qt;
    rem -= qt * b;  // cancels the leading term, so dr strictly decreases
  }
  return quot;
}

Polynomial poly_gcd(const Polynomial& a, const Polynomial& b);

inline Polynomial content_gcd(const std::map<int, Polynomial>& cs) {
  Polynomial g;
  for (const auto& [d, c] : cs) g = poly_gcd(g, c);
  return g;
}

/// Normalize a nonzero polynomial to unit leading coefficient.
inline Polynomial make_monic(const Polynomial& p) {
  if (p.is_zero()) return p;
  return p * (1 / p.leading_coefficient());
}

inline Polynomial poly_gcd(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero()) return make_monic(b);
  if (b.is_zero()) return make_monic(a);
  if (a.is_constant() || b.is_constant()) return Polynomial::constant(1);
  Atom va = *smallest_atom(a), vb = *smallest_atom(b);
  Atom v = va < vb ? va : vb;
  if (!a.contains(v) || !b.contains(v)) return Polynomial::constant(1);

  auto ac = collect(a, v), bc = collect(b, v);
  Polynomial ca = content_gcd(ac), cb = content_gcd(bc);
  Polynomial cont = poly_gcd(ca, cb);
  Polynomial A = *try_divide(a, ca);
  Polynomial B = *try_divide(b, cb);
  // primitive PRS
  while (!B.is_zero() && B.contains(v)) {
    auto Ac = collect(A, v);
    auto Bc = collect(B, v);
    int da = Ac.rbegin()->first, db = Bc.rbegin()->first;
    if (da < db) {
      std::swap(A, B);
      continue;
    }
    // pseudo-remainder of A by B
    Polynomial blead = Bc.rbegin()->second;
    Polynomial rem = A * blead.pow(da - db + 1);
    while (!rem.is_zero() && rem.contains(v)) {
      auto rc = collect(rem, v);
      int dr = rc.rbegin()->first;
      if (dr < db) break;
      auto qq = try_divide(rc.rbegin()->second, blead);
      if (!qq) break;  // fall through; gcd degenerates to 1
      rem -= *qq * Polynomial::atom(v).pow(dr - db) * B;
    }
    A = B;
    if (rem.is_zero()) {
      B = Polynomial();
    } else {
      auto remc = collect(rem, v);
      Polynomial rcont = content_gcd(remc);
      B = *try_divide(rem, rcont);
    }
  }
  if (!B.is_zero()) return make_monic(cont);  // B constant in v -> coprime in v
  return make_monic(cont * A);
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// Exact symbolic scalar: quotient of two canonical polynomials. Denominator
/// is monic in the canonical monomial order; gcd with the numerator is
/// cancelled, so equality is canonical-form identity and zero is unique.
class ScalarExpr {
public:
  ScalarExpr() : num_(), den_(Polynomial::constant(1)) {}
  ScalarExpr(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
    normalize();
  }
  /*implicit*/ ScalarExpr(Polynomial p) : num_(std::move(p)), den_(Polynomial::constant(1)) {}
  /*implicit*/ ScalarExpr(Rational c) : num_(Polynomial::constant(std::move(c))), den_(Polynomial::constant(1)) {}
  /*implicit*/ ScalarExpr(int c) : ScalarExpr(Rational(c)) {}

  static ScalarExpr atom(const Atom& a) { return ScalarExpr(Polynomial::atom(a)); }

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.is_constant(); }
  bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
  Rational constant_value() const { return num_.constant_value() / den_.constant_value(); }

  friend ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
    if (a.den_ == b.den_) return ScalarExpr(a.num_ + b.num_, a.den_);
    return ScalarExpr(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) {
    if (a.den_ == b.den_) return ScalarExpr(a.num_ - b.num_, a.den_);
    return ScalarExpr(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend ScalarExpr operator-(const ScalarExpr& a) { return ScalarExpr(-a.num_, a.den_); }
  friend ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
    return ScalarExpr(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
    if (b.is_zero()) throw Error("division by zero expression");
    return ScalarExpr(a.num_ * b.den_, a.den_ * b.num_);
  }
  ScalarExpr& operator+=(const ScalarExpr& o) { return *this = *this + o; }
  ScalarExpr& operator-=(const ScalarExpr& o) { return *this = *this - o; }
  ScalarExpr& operator*=(const ScalarExpr& o) { return *this = *this * o; }

  ScalarExpr pow(int e) const {
    if (e >= 0) return ScalarExpr(num_.pow(e), den_.pow(e));
    if (is_zero()) throw Error("division by zero expression");
    return ScalarExpr(den_.pow(-e), num_.pow(-e));
  }

  friend bool operator==(const ScalarExpr&, const ScalarExpr&) = default;

  std::set<Atom> atoms() const {
    std::set<Atom> s = num_.atoms();
    auto d = den_.atoms();
    s.insert(d.begin(), d.end());
    return s;
  }
  bool contains(const Atom& a) const { return num_.contains(a) || den_.contains(a); }
  int jet_order() const { return std::max(num_.jet_order(), den_.jet_order()); }

private:
  void normalize() {
    if (den_.is_zero()) throw Error("division by zero expression");
    if (num_.is_zero()) {
      den_ = Polynomial::constant(1);
      return;
    }
    if (den_.is_constant()) {
      Rational inv = 1 / den_.constant_value();
      num_ = num_ * inv;
      den_ = Polynomial::constant(1);
      return;
    }
    Polynomial g = detail::poly_gcd(num_, den_);
    if (!g.is_constant()) {
      auto qn = detail::try_divide(num_, g);
      auto qd = detail::try_divide(den_, g);
      if (qn && qd) {
        num_ = std::move(*qn);
        den_ = std::move(*qd);
      }
    }
    if (den_.is_constant()) {
      Rational inv = 1 / den_.constant_value();
      num_ = num_ * inv;
      den_ = Polynomial::constant(1);
    } else {
      Rational inv = 1 / den_.leading_coefficient();
      num_ = num_ * inv;
      den_ = den_ * inv;
    }
  }

  Polynomial num_, den_;
};

}  // namespace jetforms
