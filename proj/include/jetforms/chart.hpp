#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "jetforms/scalar.hpp"

namespace jetforms {

class ChartSpec;

/// Registered symbol with user-supplied derivative rules and a numeric
/// evaluation hook (e.g. the inverse metric, or the metric volume factor).
/// Symbolic equality involving opaque atoms is syntactic after
/// canonicalization; algebraic relations between them are discharged
/// numerically.
struct OpaqueSymbol {
  std::string name;
  int arity = 0;
  bool symmetric = false;

  /// chi_t rewrites the atom as t^deg * atom; unset means the atom cannot be
  /// fiber-scaled and the homotopy pipeline rejects it.
  std::optional<int> scaling_degree;

  /// Partial derivative of the atom with respect to a fiber coordinate.
  std::function<ScalarExpr(const ChartSpec&, const MultiIndex&, const JetCoordinate&)> fiber_rule;
  /// Partial derivative with respect to a base coordinate x^i.
  std::function<ScalarExpr(const ChartSpec&, const MultiIndex&, int)> base_rule;
  /// Fiber coordinates the atom depends on (drives total derivatives).
  std::vector<JetCoordinate> fiber_deps;

  /// Numeric evaluation from the numeric values of the declared dependencies.
  /// Must raise Error on degenerate input (e.g. singular metric).
  std::function<double(const std::map<Atom, double>&, const MultiIndex&)> hook;

  /// Value on the zero section, when defined there.
  std::function<Rational(const MultiIndex&)> zero_value;
};

/// The fibered chart: base dimension, fields, parameters and registered
/// opaque symbols. Immutable after construction.
class ChartSpec {
public:
  ChartSpec(std::vector<std::string> base_names, std::vector<std::string> fields,
            std::vector<std::string> params = {}, std::vector<OpaqueSymbol> opaque = {},
            int max_order = 8)
      : base_names_(std::move(base_names)),
        fields_(std::move(fields)),
        params_(std::move(params)),
        opaque_(std::move(opaque)),
        max_order_(max_order) {
    if (base_names_.empty()) throw Error("chart requires n >= 1");
    if (fields_.empty()) throw Error("chart requires m >= 1");
    std::unordered_set<std::string> seen;
    auto check = [&](const std::string& s) {
      if (!seen.insert(s).second) throw Error("duplicate identifier in chart: " + s);
    };
    for (const auto& s : base_names_) check(s);
    for (const auto& s : fields_) check(s);
    for (const auto& s : params_) check(s);
    for (const auto& o : opaque_) check(o.name);
    if (max_order_ < 1) throw Error("max order must be >= 1");
  }

  int n() const { return static_cast<int>(base_names_.size()); }
  int field_count() const { return static_cast<int>(fields_.size()); }
  int max_order() const { return max_order_; }
  const std::vector<std::string>& base_names() const { return base_names_; }
  const std::vector<std::string>& fields() const { return fields_; }
  const std::vector<std::string>& params() const { return params_; }
  const std::vector<OpaqueSymbol>& opaque_symbols() const { return opaque_; }
  const OpaqueSymbol& opaque(int id) const { return opaque_[static_cast<std::size_t>(id)]; }

  int field_index(const std::string& name) const {
    for (int i = 0; i < field_count(); ++i)
      if (fields_[static_cast<std::size_t>(i)] == name) return i;
    throw Error("unknown field: " + name);
  }
  std::optional<int> find_param(const std::string& name) const {
    for (std::size_t i = 0; i < params_.size(); ++i)
      if (params_[i] == name) return static_cast<int>(i);
    return std::nullopt;
  }
  std::optional<int> find_opaque(const std::string& name) const {
    for (std::size_t i = 0; i < opaque_.size(); ++i)
      if (opaque_[i].name == name) return static_cast<int>(i);
    return std::nullopt;
  }

  bool valid_coordinate(const JetCoordinate& c) const {
    if (c.kind == AtomKind::Base) return c.id < base_names_.size();
    if (c.kind == AtomKind::Fiber) {
      if (c.id >= fields_.size() || c.idx.order() > max_order_) return false;
      for (auto e : c.idx.entries())
        if (e >= base_names_.size()) return false;
      return true;
    }
    return false;
  }

  std::string atom_name(const Atom& a) const {
    switch (a.kind) {
      case AtomKind::Base:
        return base_names_[a.id];
      case AtomKind::Fiber: {
        const std::string& f = fields_[a.id];
        if (a.idx.empty()) return f;
        return "D(" + f + "," + a.idx.str() + ")";
      }
      case AtomKind::Param:
        return params_[a.id];
      case AtomKind::Opaque: {
        const auto& o = opaque_[a.id];
        if (o.arity == 0) return o.name;
        return o.name + "[" + a.idx.str() + "]";
      }
      case AtomKind::HomotopyT:
        return "t";
    }
    return "?";
  }

private:
  std::vector<std::string> base_names_;
  std::vector<std::string> fields_;
  std::vector<std::string> params_;
  std::vector<OpaqueSymbol> opaque_;
  int max_order_;
};

using ChartPtr = std::shared_ptr<const ChartSpec>;

// ---------------------------------------------------------------------------
// Canonical printing. The output is a valid problem-file expression, which
// makes serialized coefficients reparseable in context.

inline std::string to_string(const Rational& r) {
  std::string s = r.str();
  return s;
}

inline std::string to_string(const ChartSpec& chart, const Polynomial& p) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    Rational a = c;
    bool neg = a < 0;
    if (neg) a = -a;
    out += first ? (neg ? "-" : "") : (neg ? " - " : " + ");
    first = false;
    std::string factors;
    for (const auto& [atom, e] : m) {
      if (!factors.empty()) factors += "*";
      factors += chart.atom_name(atom);
      if (e != 1) factors += "^" + std::to_string(e);
    }
    if (factors.empty()) {
      out += to_string(a);
    } else if (a == 1) {
      out += factors;
    } else {
      out += to_string(a) + "*" + factors;
    }
  }
  return out;
}

inline std::string to_string(const ChartSpec& chart, const ScalarExpr& e) {
  if (e.is_polynomial()) return to_string(chart, e.num());
  return "(" + to_string(chart, e.num()) + ")/(" + to_string(chart, e.den()) + ")";
}

}  // namespace jetforms
