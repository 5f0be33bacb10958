#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "jetforms/serialize.hpp"

namespace jetforms::cli {

struct Options {
  std::string file;
  std::string format = "text";
  std::string out;
  int max_order = -1;  // -1: keep the file's declaration
  bool verbose = false;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline dsl::Problem load(const Options& opt) {
  dsl::ProblemFile pf = dsl::parse(read_file(opt.file));
  if (opt.max_order > 0) {
    pf.max_order = opt.max_order;
  } else if (const char* env = std::getenv("JETFORMS_MAX_ORDER")) {
    pf.max_order = std::atoi(env);
    if (pf.max_order < 1) throw Error("JETFORMS_MAX_ORDER must be a positive integer");
  }
  return dsl::elaborate(pf);
}

inline Lagrangian require_lagrangian(const dsl::Problem& p) {
  if (!p.lagrangian) throw Error("problem file declares no lagrangian");
  return *p.lagrangian;
}

inline void emit(const Options& opt, const std::string& doc) {
  if (opt.out.empty()) {
    std::cout << doc;
    if (!doc.empty() && doc.back() != '\n') std::cout << "\n";
  } else {
    std::ofstream o(opt.out);
    if (!o) throw Error("cannot open output file: " + opt.out);
    o << doc;
  }
}

inline void emit_form(const Options& opt, const DiffForm& rho) {
  if (opt.format == "json")
    emit(opt, to_json(rho).dump(2));
  else if (opt.format == "latex")
    emit(opt, to_latex(rho));
  else
    emit(opt, to_text(rho));
}

inline std::string first_term(const DiffForm& rho) {
  if (rho.is_zero()) return "0";
  const auto& [m, c] = *rho.terms().begin();
  std::string s = "(" + to_string(*rho.chart(), c) + ")";
  for (const BasisOneForm& b : m) s += " ^ " + factor_str(*rho.chart(), b);
  return s;
}

/// Records a nonzero residual form in the report, first offending term only
/// unless verbose.
inline void record(NumericReport& rep, bool verbose, const std::string& what,
                   const DiffForm& residual) {
  if (residual.is_zero()) return;
  rep.failures.push_back(what + ": " + (verbose ? to_text(residual) : first_term(residual)));
}

inline VectorFieldSpec parse_xi(const std::string& spec, const ChartPtr& chart) {
  if (spec.rfind("base:", 0) == 0) {
    int i = std::stoi(spec.substr(5));
    if (i < 0 || i >= chart->n()) throw Error("base index out of range in --xi");
    return VectorFieldSpec::coordinate_base(chart, i);
  }
  // semicolon-separated "field=expr" assignments; unlisted components are zero
  std::vector<ScalarExpr> Xi(static_cast<std::size_t>(chart->field_count()), ScalarExpr());
  std::size_t pos = 0;
  while (pos < spec.size()) {
    auto semi = spec.find(';', pos);
    if (semi == std::string::npos) semi = spec.size();
    std::string item = spec.substr(pos, semi - pos);
    auto eq = item.find('=');
    if (eq == std::string::npos) throw Error("--xi expects base:i or field=expr[;field=expr...]");
    int f = chart->field_index(item.substr(0, eq));
    Xi[static_cast<std::size_t>(f)] = dsl::parse_expression(item.substr(eq + 1), chart);
    pos = semi + 1;
  }
  return VectorFieldSpec::vertical(chart, std::move(Xi));
}

// -------------------------------------------------------------------------
// check suites

inline NumericReport check_lepage(const dsl::Problem& p, std::uint64_t seed, int numeric,
                                  bool verbose) {
  NumericReport rep{"lepage", seed, 0, 0.0, 0, {}};
  Lagrangian lag = require_lagrangian(p);
  RandomSource rnd(seed);
  auto run_one = [&](const LepageResult& res) {
    ++rep.trials;
    LepageReport lr = verify_lepage_conditions(res.form, lag);
    std::string kind = to_string(res.kind);
    if (!lr.horizontal_matches) record(rep, verbose, kind + ": h(theta) != lambda", lr.h_residual);
    if (!lr.p1_is_source) rep.failures.push_back(kind + ": p_1 d(theta) is not a source form");
    if (lr.p1_is_source && !lr.source_matches_el)
      rep.failures.push_back(kind + ": extracted source form differs from Euler-Lagrange form");
    if (numeric > 0) {
      Rational worst = numeric_zero_check(lr.h_residual, rnd, numeric);
      rep.max_residual =
          std::max(rep.max_residual, static_cast<double>(worst.convert_to<double>()));
    }
  };
  bool scalable = true;
  for (const auto& o : lag.chart->opaque_symbols())
    if (!o.scaling_degree) scalable = false;
  run_one(principal_lepage(lag));
  if (scalable) run_one(canonical_lepage(lag));
  if (lag.order <= 1) run_one(fundamental_lepage(lag));
  if (p.reduced && p.alpha) run_one(reduced_lepage(lag, *p.reduced, *p.alpha, !p.metric));
  return rep;
}

inline NumericReport check_closure(const dsl::Problem& p, std::uint64_t seed, int numeric,
                                   bool verbose) {
  NumericReport rep{"closure", seed, 1, 0.0, 0, {}};
  Lagrangian lag = require_lagrangian(p);
  LepageResult phi = canonical_lepage(lag);
  DiffForm dphi = exterior_derivative(phi.form);
  SourceForm el = euler_lagrange(lag);
  if (el.is_zero()) {
    record(rep, verbose, "trivial lambda but d(Phi) != 0", dphi);
  } else {
    auto parts = split_contact(dphi);
    DiffForm residual = parts.size() > 1 ? parts[1] - el.form().raised(dphi.order()) : el.form();
    record(rep, verbose, "p_1 d(Phi) != Euler-Lagrange form", residual);
  }
  if (numeric > 0) {
    RandomSource rnd(seed);
    DiffForm target = el.is_zero() ? dphi : split_contact(dphi)[1] - el.form().raised(dphi.order());
    Rational worst = numeric_zero_check(target, rnd, numeric);
    rep.max_residual = static_cast<double>(worst.convert_to<double>());
  }
  return rep;
}

inline NumericReport check_homotopy(const dsl::Problem& p, std::uint64_t seed, int numeric,
                                    bool verbose) {
  NumericReport rep{"homotopy", seed, 0, 0.0, 0, {}};
  int trials = numeric > 0 ? numeric : 20;
  const ChartPtr& chart = p.chart;
  RandomSource rnd(seed);
  auto run_one = [&](const DiffForm& rho, const std::string& tag) {
    ++rep.trials;
    DiffForm dI = rho.degree() == 0 ? DiffForm(chart, 0, rho.order() + 1)
                                    : exterior_derivative(homotopy_I(rho));
    DiffForm rec = homotopy_I(exterior_derivative(rho)) + dI +
                   pullback_zero_section(rho).raised(rho.order() + 1);
    record(rep, verbose, tag + ": rho != I(d rho) + d(I rho) + pullback", rec - rho.raised(rho.order() + 1));
    record(rep, verbose, tag + ": I(h rho) != 0", homotopy_I(horizontalize(rho)));
  };
  if (p.lagrangian) run_one(p.lagrangian->form(), "lagrangian");
  for (int t = 0; t < trials; ++t) {
    int deg = rnd.uniform_int(0, chart->n());
    int ord = rnd.uniform_int(0, 2);
    DiffForm rho(chart, deg, ord);
    std::vector<BasisOneForm> basis;
    for (int i = 0; i < chart->n(); ++i) basis.push_back(BasisOneForm::dx(i));
    for (int sigma = 0; sigma < chart->field_count(); ++sigma)
      for (int k = 0; k < ord; ++k)
        for (const MultiIndex& J : sorted_multi_indices(chart->n(), k))
          basis.push_back(BasisOneForm::contact(sigma, J));
    for (int sigma = 0; sigma < chart->field_count(); ++sigma)
      for (const MultiIndex& J : sorted_multi_indices(chart->n(), ord))
        basis.push_back(BasisOneForm::dy_top(sigma, J));
    for (int term = 0; term < 3; ++term) {
      FormMonomial m;
      std::vector<std::size_t> picks;
      for (int k = 0; k < deg; ++k)
        picks.push_back(static_cast<std::size_t>(
            rnd.uniform_int(0, static_cast<int>(basis.size()) - 1)));
      for (auto k : picks) m.push_back(basis[k]);
      auto norm = normalize_monomial(m);
      if (!norm) continue;
      rho.add_term(random_polynomial(rnd, *chart, ord, 2, 2), norm->first);
    }
    run_one(rho, "random form " + std::to_string(t));
  }
  return rep;
}

}  // namespace detail

inline int run(int argc, const char* const* argv) {
  CLI::App app{"jetforms: Lepage equivalents and variational identities on jet bundles"};
  app.require_subcommand(1);

  Options opt;
  std::string kind = "principal";
  std::string xi_spec;
  std::string mode;
  int numeric = 0;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("file", opt.file, "problem file (.jf)")->required();
    sub->add_option("--format", opt.format, "text | latex | json")
        ->check(CLI::IsMember({"text", "latex", "json"}));
    sub->add_option("--max-order", opt.max_order, "jet order cap (default 8)");
    sub->add_option("--out", opt.out, "write output to PATH instead of stdout");
  };

  CLI::App* el = app.add_subcommand("el", "Euler-Lagrange source form");
  add_common(el);
  CLI::App* lepage = app.add_subcommand("lepage", "Lepage equivalent of the Lagrangian");
  lepage->add_option("--kind", kind, "principal | fundamental | canonical | reduced")
      ->check(CLI::IsMember({"principal", "fundamental", "canonical", "reduced"}));
  add_common(lepage);
  CLI::App* vt = app.add_subcommand("vt", "Vainberg-Tonti Lagrangian of the source form");
  add_common(vt);
  CLI::App* split = app.add_subcommand("split", "decomposition lambda = lambda_VT + h(d alpha)");
  add_common(split);
  CLI::App* check = app.add_subcommand("check", "run a verification suite");
  check->add_flag("--lepage", "verify the Lepage conditions for all applicable constructors");
  check->add_flag("--closure", "verify d Phi against the Euler-Lagrange form");
  check->add_flag("--homotopy", "verify the contact homotopy identity");
  check->add_option("--numeric", numeric, "number of random evaluation points");
  check->add_option("--seed", seed, "random seed");
  check->add_flag("--verbose", opt.verbose, "dump full residual forms on failure");
  add_common(check);
  CLI::App* noether = app.add_subcommand("noether", "Noether current of a symmetry field");
  noether->add_option("--xi", xi_spec, "base:i or field=expr[;field=expr...]")->required();
  add_common(noether);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    dsl::Problem prob = detail::load(opt);
    if (el->parsed()) {
      SourceForm eps = euler_lagrange(detail::require_lagrangian(prob));
      if (opt.format == "json")
        detail::emit(opt, to_json(eps).dump(2));
      else if (opt.format == "latex")
        detail::emit(opt, to_latex(eps));
      else
        detail::emit(opt, to_text(eps));
    } else if (lepage->parsed()) {
      Lagrangian lag = detail::require_lagrangian(prob);
      LepageResult res;
      if (kind == "principal")
        res = principal_lepage(lag);
      else if (kind == "fundamental")
        res = fundamental_lepage(lag);
      else if (kind == "canonical")
        res = canonical_lepage(lag);
      else {
        if (!prob.reduced || !prob.alpha)
          throw Error("reduced kind requires a reduced block in the problem file");
        res = reduced_lepage(lag, *prob.reduced, *prob.alpha, !prob.metric);
      }
      detail::emit_form(opt, res.form);
    } else if (vt->parsed()) {
      Lagrangian lag = detail::require_lagrangian(prob);
      Lagrangian lvt = vainberg_tonti(euler_lagrange(lag));
      detail::emit_form(opt, lvt.form());
    } else if (split->parsed()) {
      Lagrangian lag = detail::require_lagrangian(prob);
      LepageResult res = canonical_lepage(lag);
      if (opt.format == "json") {
        nlohmann::json j{{"lambda_vt", to_json(res.lambda_vt->form())},
                         {"d_alpha", to_json(*res.d_alpha)}};
        detail::emit(opt, j.dump(2));
      } else if (opt.format == "latex") {
        detail::emit(opt, "\\lambda_{VT} = " + to_latex(res.lambda_vt->form()) +
                              "\\\\\n\\mathrm{d}\\alpha = " + to_latex(*res.d_alpha));
      } else {
        detail::emit(opt, "lambda_VT:\n" + to_text(res.lambda_vt->form()) + "d_alpha:\n" +
                              to_text(*res.d_alpha));
      }
    } else if (check->parsed()) {
      int modes = check->count("--lepage") + check->count("--closure") +
                  check->count("--homotopy");
      if (modes != 1) throw Error("check requires exactly one of --lepage, --closure, --homotopy");
      NumericReport rep;
      if (check->count("--lepage"))
        rep = detail::check_lepage(prob, seed, numeric, opt.verbose);
      else if (check->count("--closure"))
        rep = detail::check_closure(prob, seed, numeric, opt.verbose);
      else
        rep = detail::check_homotopy(prob, seed, numeric, opt.verbose);
      if (opt.format == "text") {
        std::string doc = "suite: " + rep.suite + "\nseed: " + std::to_string(rep.seed) +
                          "\ntrials: " + std::to_string(rep.trials) +
                          "\nmax_residual: " + std::to_string(rep.max_residual) + "\n";
        for (const auto& f : rep.failures) doc += "FAIL " + f + "\n";
        doc += rep.ok() ? "ok\n" : "failed\n";
        detail::emit(opt, doc);
      } else {
        detail::emit(opt, rep.to_json().dump(2));
      }
      if (!rep.ok()) return 1;
    } else if (noether->parsed()) {
      Lagrangian lag = detail::require_lagrangian(prob);
      VectorFieldSpec xi = detail::parse_xi(xi_spec, prob.chart);
      DiffForm current = noether_current(principal_lepage(lag).form, xi);
      detail::emit_form(opt, current);
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace jetforms::cli
