#pragma once

#include <string>

#include <json.hpp>

#include "jetforms/dsl.hpp"

namespace jetforms {

// ---------------------------------------------------------------------------
// Text / JSON factor encoding: dx[i], w[field;J], dy[field;J] with J the
// comma-joined sorted multi-index.

inline std::string factor_str(const ChartSpec& chart, const BasisOneForm& b) {
  switch (b.kind) {
    case BasisOneForm::Kind::Dx:
      return "dx[" + std::to_string(b.i) + "]";
    case BasisOneForm::Kind::Contact:
      return "w[" + chart.fields()[b.field] + ";" + b.idx.str() + "]";
    case BasisOneForm::Kind::DyTop:
      return "dy[" + chart.fields()[b.field] + ";" + b.idx.str() + "]";
  }
  return "?";
}

inline BasisOneForm parse_factor(const ChartSpec& chart, const std::string& s) {
  auto lb = s.find('[');
  auto rb = s.rfind(']');
  if (lb == std::string::npos || rb == std::string::npos || rb < lb)
    throw Error("malformed factor: " + s);
  std::string head = s.substr(0, lb);
  std::string body = s.substr(lb + 1, rb - lb - 1);
  if (head == "dx") return BasisOneForm::dx(std::stoi(body));
  auto semi = body.find(';');
  if (semi == std::string::npos) throw Error("malformed factor: " + s);
  int field = chart.field_index(body.substr(0, semi));
  std::vector<std::uint8_t> idx;
  std::string rest = body.substr(semi + 1);
  std::size_t pos = 0;
  while (pos < rest.size()) {
    auto comma = rest.find(',', pos);
    if (comma == std::string::npos) comma = rest.size();
    idx.push_back(static_cast<std::uint8_t>(std::stoi(rest.substr(pos, comma - pos))));
    pos = comma + 1;
  }
  if (head == "w") return BasisOneForm::contact(field, MultiIndex(idx));
  if (head == "dy") return BasisOneForm::dy_top(field, MultiIndex(idx));
  throw Error("malformed factor: " + s);
}

// ---------------------------------------------------------------------------
// Text

inline std::string to_text(const DiffForm& rho) {
  if (rho.is_zero()) return "0\n";
  const ChartSpec& chart = *rho.chart();
  std::string out;
  for (const auto& [m, c] : rho.terms()) {
    std::string line = "(" + to_string(chart, c) + ")";
    for (const BasisOneForm& b : m) line += " ^ " + factor_str(chart, b);
    out += line + "\n";
  }
  return out;
}

inline std::string to_text(const SourceForm& eps) {
  const ChartSpec& chart = *eps.chart;
  std::string out;
  for (int f = 0; f < chart.field_count(); ++f)
    out += chart.fields()[static_cast<std::size_t>(f)] + ": " +
           to_string(chart, eps.components[static_cast<std::size_t>(f)]) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const DiffForm& rho) {
  const ChartSpec& chart = *rho.chart();
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [m, c] : rho.terms()) {
    nlohmann::json factors = nlohmann::json::array();
    for (const BasisOneForm& b : m) factors.push_back(factor_str(chart, b));
    terms.push_back({{"coeff", to_string(chart, c)}, {"factors", std::move(factors)}});
  }
  return {{"order", rho.order()}, {"degree", rho.degree()}, {"terms", std::move(terms)}};
}

inline DiffForm form_from_json(const nlohmann::json& j, const ChartPtr& chart) {
  DiffForm rho(chart, j.at("degree").get<int>(), j.at("order").get<int>());
  for (const auto& t : j.at("terms")) {
    ScalarExpr c = dsl::parse_expression(t.at("coeff").get<std::string>(), chart);
    FormMonomial m;
    for (const auto& f : t.at("factors"))
      m.push_back(parse_factor(*chart, f.get<std::string>()));
    rho.add_term(std::move(c), std::move(m));
  }
  return rho;
}

inline nlohmann::json to_json(const SourceForm& eps) {
  const ChartSpec& chart = *eps.chart;
  nlohmann::json comps = nlohmann::json::object();
  for (int f = 0; f < chart.field_count(); ++f)
    comps[chart.fields()[static_cast<std::size_t>(f)]] =
        to_string(chart, eps.components[static_cast<std::size_t>(f)]);
  return {{"source_form", std::move(comps)}, {"order", eps.order}};
}

// ---------------------------------------------------------------------------
// LaTeX. Names with an underscore render as subscripted symbols; the output
// uses only standard math-mode macros.

namespace detail {

inline std::string latex_name(const std::string& name) {
  static const std::map<std::string, std::string> greek = {
      {"phi", "\\phi"},   {"psi", "\\psi"},     {"chi", "\\chi"},   {"eta", "\\eta"},
      {"theta", "\\theta"}, {"lambda", "\\lambda"}, {"sigma", "\\sigma"}, {"rho", "\\rho"}};
  auto us = name.find('_');
  std::string head = us == std::string::npos ? name : name.substr(0, us);
  if (auto it = greek.find(head); it != greek.end()) head = it->second;
  else if (head.size() > 1) head = "\\mathit{" + head + "}";
  if (us == std::string::npos) return head;
  return head + "_{" + name.substr(us + 1) + "}";
}

inline std::string latex_atom(const ChartSpec& chart, const Atom& a) {
  switch (a.kind) {
    case AtomKind::Base:
      return latex_name(chart.base_names()[a.id]);
    case AtomKind::Fiber: {
      std::string f = latex_name(chart.fields()[a.id]);
      if (a.idx.empty()) return f;
      std::string sub;
      for (auto e : a.idx.entries()) sub += std::to_string(static_cast<int>(e));
      if (f.find("_{") != std::string::npos) return "{" + f + "}{}_{," + sub + "}";
      return f + "_{," + sub + "}";
    }
    case AtomKind::Param:
      return latex_name(chart.params()[a.id]);
    case AtomKind::Opaque: {
      std::string o = latex_name(chart.opaque(a.id).name);
      if (a.idx.empty()) return o;
      std::string sup;
      for (auto e : a.idx.entries()) sup += std::to_string(static_cast<int>(e));
      return o + "^{" + sup + "}";
    }
    case AtomKind::HomotopyT:
      return "t";
  }
  return "?";
}

inline std::string latex_rational(const Rational& r) {
  Rational a = r < 0 ? Rational(-r) : r;
  std::string s;
  if (boost::multiprecision::denominator(a) == 1)
    s = boost::multiprecision::numerator(a).str();
  else
    s = "\\tfrac{" + boost::multiprecision::numerator(a).str() + "}{" +
        boost::multiprecision::denominator(a).str() + "}";
  return (r < 0 ? "-" : "") + s;
}

inline std::string latex_poly(const ChartSpec& chart, const Polynomial& p) {
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
      if (!factors.empty()) factors += "\\, ";
      std::string f = latex_atom(chart, atom);
      factors += e == 1 ? f : "{" + f + "}^{" + std::to_string(e) + "}";
    }
    if (factors.empty())
      out += latex_rational(a);
    else if (a == 1)
      out += factors;
    else
      out += latex_rational(a) + "\\, " + factors;
  }
  return out;
}

inline std::string latex_factor(const ChartSpec& chart, const BasisOneForm& b) {
  switch (b.kind) {
    case BasisOneForm::Kind::Dx:
      return "\\mathrm{d}x^{" + std::to_string(b.i) + "}";
    case BasisOneForm::Kind::Contact: {
      std::string s = "\\omega^{" + latex_name(chart.fields()[b.field]) + "}";
      if (!b.idx.empty()) {
        std::string sub;
        for (auto e : b.idx.entries()) sub += std::to_string(static_cast<int>(e));
        s += "_{" + sub + "}";
      }
      return s;
    }
    case BasisOneForm::Kind::DyTop: {
      std::string sub;
      for (auto e : b.idx.entries()) sub += std::to_string(static_cast<int>(e));
      std::string s = "\\mathrm{d}y^{" + latex_name(chart.fields()[b.field]) + "}";
      if (!sub.empty()) s += "_{" + sub + "}";
      return s;
    }
  }
  return "?";
}

}  // namespace detail

inline std::string to_latex(const ChartSpec& chart, const ScalarExpr& e) {
  if (e.is_polynomial()) return detail::latex_poly(chart, e.num());
  return "\\frac{" + detail::latex_poly(chart, e.num()) + "}{" +
         detail::latex_poly(chart, e.den()) + "}";
}

inline std::string to_latex(const DiffForm& rho) {
  if (rho.is_zero()) return "0";
  const ChartSpec& chart = *rho.chart();
  std::string out;
  bool first = true;
  for (const auto& [m, c] : rho.terms()) {
    if (!first) out += "\n + ";
    first = false;
    out += "\\left(" + to_latex(chart, c) + "\\right)";
    for (const BasisOneForm& b : m) out += " \\wedge " + detail::latex_factor(chart, b);
  }
  return out;
}

inline std::string to_latex(const SourceForm& eps) {
  const ChartSpec& chart = *eps.chart;
  std::string out;
  for (int f = 0; f < chart.field_count(); ++f) {
    out += "E_{" + detail::latex_name(chart.fields()[static_cast<std::size_t>(f)]) +
           "} = " + to_latex(chart, eps.components[static_cast<std::size_t>(f)]) + " \\\\\n";
  }
  return out;
}

}  // namespace jetforms
