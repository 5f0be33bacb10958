#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jetforms/hilbert.hpp"

namespace jetforms::dsl {

// ---------------------------------------------------------------------------
// Lexer

struct Token {
  enum class Kind { Ident, Int, Sym, End };
  Kind kind = Kind::End;
  std::string text;
  long long value = 0;
  int line = 1, col = 1;
};

class Lexer {
public:
  explicit Lexer(std::string src) : src_(std::move(src)) { advance(); }

  const Token& peek() const { return tok_; }
  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++col_;
        ++pos_;
      } else {
        break;
      }
    }
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_ = Token{Token::Kind::End, "<end of input>", 0, line_, col_};
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_ = Token{Token::Kind::Ident, src_.substr(start, pos_ - start), 0, line_, col_};
      col_ += static_cast<int>(pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      std::string text = src_.substr(start, pos_ - start);
      tok_ = Token{Token::Kind::Int, text, std::stoll(text), line_, col_};
      col_ += static_cast<int>(pos_ - start);
      return;
    }
    if (c == ':' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
      tok_ = Token{Token::Kind::Sym, ":=", 0, line_, col_};
      pos_ += 2;
      col_ += 2;
      return;
    }
    static const std::string singles = "{}()[],;+-*/^=";
    if (singles.find(c) != std::string::npos) {
      tok_ = Token{Token::Kind::Sym, std::string(1, c), 0, line_, col_};
      ++pos_;
      ++col_;
      return;
    }
    throw Error("parse error at line " + std::to_string(line_) + ", col " + std::to_string(col_) +
                ": unexpected character '" + std::string(1, c) + "'");
  }

  std::string src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

// ---------------------------------------------------------------------------
// AST

struct Expr {
  enum class Kind { Number, Ident, Bin, Neg, Pow, Sum, Jet, TotalD };
  Kind kind = Kind::Number;
  Rational number;
  std::string name;                   // Ident name; Bin operator ("+","-","*","/")
  long long exponent = 0;             // Pow
  std::vector<std::string> binders;   // Sum
  std::vector<Expr> kids;             // Bin [l,r]; Neg/Pow/Sum [e]; Ident index args;
                                      // Jet [fieldref, idx...]; TotalD [e, idx]
};

struct ConstDecl {
  std::string name;
  bool is_diag = false;
  std::vector<Rational> diag;
  Rational scalar;
};

struct LetDecl {
  std::string name;
  std::vector<std::string> formals;
  Expr body;
};

struct FieldDecl {
  std::string name;
  int family = -1;  // -1: scalar field; >= 0: family size
  bool symmetric = false;
};

struct ReducedBlock {
  Expr lambda;
  std::optional<std::string> alpha_index;
  std::optional<Expr> alpha;
};

struct ProblemFile {
  std::vector<std::string> base;
  std::vector<FieldDecl> fields;
  std::vector<std::string> params;
  int max_order = 8;
  std::vector<ConstDecl> consts;
  std::vector<LetDecl> lets;
  std::optional<Expr> lagrangian;
  std::optional<ReducedBlock> reduced;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
  explicit Parser(std::string src) : lex_(std::move(src)) {}

  ProblemFile parse_file() {
    ProblemFile pf;
    while (lex_.peek().kind != Token::Kind::End) {
      const Token& t = lex_.peek();
      if (t.kind != Token::Kind::Ident)
        fail("a block keyword (chart, const, let, lagrangian, reduced)");
      if (t.text == "chart")
        parse_chart(pf);
      else if (t.text == "const")
        parse_const(pf);
      else if (t.text == "let")
        parse_let(pf);
      else if (t.text == "lagrangian") {
        lex_.next();
        pf.lagrangian = parse_expr();
        expect_sym(";");
      } else if (t.text == "reduced")
        parse_reduced(pf);
      else
        fail("a block keyword (chart, const, let, lagrangian, reduced)");
    }
    return pf;
  }

  /// Standalone expression entry point (used for coefficient round-trips and
  /// vector-field specs).
  Expr parse_expression_only() {
    Expr e = parse_expr();
    if (lex_.peek().kind != Token::Kind::End) fail("end of expression");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& expected) {
    const Token& t = lex_.peek();
    throw Error("parse error at line " + std::to_string(t.line) + ", col " + std::to_string(t.col) +
                ": expected " + expected + ", got '" + t.text + "'");
  }
  Token expect_sym(const std::string& s) {
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::Sym || t.text != s) fail("'" + s + "'");
    return lex_.next();
  }
  Token expect_ident() {
    if (lex_.peek().kind != Token::Kind::Ident) fail("an identifier");
    return lex_.next();
  }
  Token expect_int() {
    if (lex_.peek().kind != Token::Kind::Int) fail("an integer");
    return lex_.next();
  }
  bool at_sym(const std::string& s) {
    return lex_.peek().kind == Token::Kind::Sym && lex_.peek().text == s;
  }

  Rational parse_rational() {
    bool neg = false;
    if (at_sym("-")) {
      lex_.next();
      neg = true;
    }
    Rational r(expect_int().value);
    if (at_sym("/")) {
      lex_.next();
      long long d = expect_int().value;
      if (d == 0) fail("a nonzero denominator");
      r /= d;
    }
    return neg ? -r : r;
  }

  void parse_chart(ProblemFile& pf) {
    lex_.next();
    expect_sym("{");
    while (!at_sym("}")) {
      Token kw = expect_ident();
      if (kw.text == "base") {
        while (!at_sym(";")) pf.base.push_back(expect_ident().text);
      } else if (kw.text == "field" || kw.text == "symfield") {
        FieldDecl f;
        f.name = expect_ident().text;
        f.symmetric = (kw.text == "symfield");
        if (at_sym("[")) {
          lex_.next();
          f.family = static_cast<int>(expect_int().value);
          expect_sym("]");
        }
        if (f.symmetric && f.family < 0) fail("'[' (symfield requires a size)");
        pf.fields.push_back(std::move(f));
      } else if (kw.text == "param") {
        while (!at_sym(";")) pf.params.push_back(expect_ident().text);
      } else if (kw.text == "max_order") {
        pf.max_order = static_cast<int>(expect_int().value);
      } else {
        fail("a chart item (base, field, symfield, param, max_order)");
      }
      expect_sym(";");
    }
    lex_.next();
  }

  void parse_const(ProblemFile& pf) {
    lex_.next();
    ConstDecl c;
    c.name = expect_ident().text;
    expect_sym("=");
    if (lex_.peek().kind == Token::Kind::Ident && lex_.peek().text == "diag") {
      lex_.next();
      c.is_diag = true;
      expect_sym("(");
      c.diag.push_back(parse_rational());
      while (at_sym(",")) {
        lex_.next();
        c.diag.push_back(parse_rational());
      }
      expect_sym(")");
    } else {
      c.scalar = parse_rational();
    }
    expect_sym(";");
    pf.consts.push_back(std::move(c));
  }

  void parse_let(ProblemFile& pf) {
    lex_.next();
    LetDecl l;
    l.name = expect_ident().text;
    if (at_sym("[")) {
      lex_.next();
      l.formals.push_back(expect_ident().text);
      while (at_sym(",")) {
        lex_.next();
        l.formals.push_back(expect_ident().text);
      }
      expect_sym("]");
    }
    expect_sym(":=");
    l.body = parse_expr();
    expect_sym(";");
    pf.lets.push_back(std::move(l));
  }

  void parse_reduced(ProblemFile& pf) {
    lex_.next();
    expect_sym("{");
    ReducedBlock rb;
    while (!at_sym("}")) {
      Token kw = expect_ident();
      if (kw.text == "lambda") {
        rb.lambda = parse_expr();
      } else if (kw.text == "alpha") {
        expect_sym("[");
        rb.alpha_index = expect_ident().text;
        expect_sym("]");
        expect_sym(":=");
        rb.alpha = parse_expr();
      } else {
        fail("'lambda' or 'alpha'");
      }
      expect_sym(";");
    }
    lex_.next();
    pf.reduced = std::move(rb);
  }

  Expr parse_expr() {
    Expr l = parse_product();
    while (at_sym("+") || at_sym("-")) {
      std::string op = lex_.next().text;
      Expr r = parse_product();
      Expr b;
      b.kind = Expr::Kind::Bin;
      b.name = op;
      b.kids = {std::move(l), std::move(r)};
      l = std::move(b);
    }
    return l;
  }
  Expr parse_product() {
    Expr l = parse_unary();
    while (at_sym("*") || at_sym("/")) {
      std::string op = lex_.next().text;
      Expr r = parse_unary();
      Expr b;
      b.kind = Expr::Kind::Bin;
      b.name = op;
      b.kids = {std::move(l), std::move(r)};
      l = std::move(b);
    }
    return l;
  }
  Expr parse_unary() {
    if (at_sym("-")) {
      lex_.next();
      Expr e;
      e.kind = Expr::Kind::Neg;
      e.kids = {parse_unary()};
      return e;
    }
    return parse_power();
  }
  Expr parse_power() {
    Expr base = parse_primary();
    if (at_sym("^")) {
      lex_.next();
      bool neg = false;
      if (at_sym("-")) {
        lex_.next();
        neg = true;
      }
      long long e = expect_int().value;
      Expr p;
      p.kind = Expr::Kind::Pow;
      p.exponent = neg ? -e : e;
      p.kids = {std::move(base)};
      return p;
    }
    return base;
  }
  Expr parse_primary() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Int) {
      Expr e;
      e.kind = Expr::Kind::Number;
      e.number = Rational(lex_.next().value);
      return e;
    }
    if (at_sym("(")) {
      lex_.next();
      Expr e = parse_expr();
      expect_sym(")");
      return e;
    }
    if (t.kind != Token::Kind::Ident) fail("an expression");
    if (t.text == "sum") {
      lex_.next();
      Expr e;
      e.kind = Expr::Kind::Sum;
      expect_sym("(");
      e.binders.push_back(expect_ident().text);
      while (at_sym(",")) {
        lex_.next();
        e.binders.push_back(expect_ident().text);
      }
      expect_sym(")");
      expect_sym("{");
      e.kids = {parse_expr()};
      expect_sym("}");
      return e;
    }
    if (t.text == "D") {
      lex_.next();
      Expr e;
      e.kind = Expr::Kind::Jet;
      expect_sym("(");
      e.kids.push_back(parse_primary());  // field reference
      while (at_sym(",")) {
        lex_.next();
        e.kids.push_back(parse_expr());
      }
      expect_sym(")");
      if (e.kids.size() < 2) fail("at least one derivative index");
      return e;
    }
    if (t.text == "Dt") {
      lex_.next();
      Expr e;
      e.kind = Expr::Kind::TotalD;
      expect_sym("(");
      e.kids.push_back(parse_expr());
      expect_sym(",");
      e.kids.push_back(parse_expr());
      expect_sym(")");
      return e;
    }
    Expr e;
    e.kind = Expr::Kind::Ident;
    e.name = lex_.next().text;
    if (at_sym("[")) {
      lex_.next();
      e.kids.push_back(parse_expr());
      while (at_sym(",")) {
        lex_.next();
        e.kids.push_back(parse_expr());
      }
      expect_sym("]");
    }
    return e;
  }

  Lexer lex_;
};

inline ProblemFile parse(const std::string& text) { return Parser(text).parse_file(); }

// ---------------------------------------------------------------------------
// Pretty printer (used for the round-trip property and --format text output
// of parsed files).

inline void print_expr(std::ostream& os, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Number:
      if (e.number < 0)
        os << "(" << e.number.str() << ")";
      else
        os << e.number.str();
      break;
    case Expr::Kind::Ident:
      os << e.name;
      if (!e.kids.empty()) {
        os << "[";
        for (std::size_t i = 0; i < e.kids.size(); ++i) {
          if (i) os << ",";
          print_expr(os, e.kids[i]);
        }
        os << "]";
      }
      break;
    case Expr::Kind::Bin:
      os << "(";
      print_expr(os, e.kids[0]);
      os << " " << e.name << " ";
      print_expr(os, e.kids[1]);
      os << ")";
      break;
    case Expr::Kind::Neg:
      os << "(- ";
      print_expr(os, e.kids[0]);
      os << ")";
      break;
    case Expr::Kind::Pow:
      os << "(";
      print_expr(os, e.kids[0]);
      os << ")^" << e.exponent;
      break;
    case Expr::Kind::Sum:
      os << "sum(";
      for (std::size_t i = 0; i < e.binders.size(); ++i) {
        if (i) os << ",";
        os << e.binders[i];
      }
      os << "){ ";
      print_expr(os, e.kids[0]);
      os << " }";
      break;
    case Expr::Kind::Jet:
      os << "D(";
      for (std::size_t i = 0; i < e.kids.size(); ++i) {
        if (i) os << ",";
        print_expr(os, e.kids[i]);
      }
      os << ")";
      break;
    case Expr::Kind::TotalD:
      os << "Dt(";
      print_expr(os, e.kids[0]);
      os << ",";
      print_expr(os, e.kids[1]);
      os << ")";
      break;
  }
}

inline std::string pretty_print(const ProblemFile& pf) {
  std::ostringstream os;
  os << "chart {\n  base";
  for (const auto& b : pf.base) os << " " << b;
  os << ";\n";
  for (const auto& f : pf.fields) {
    os << "  " << (f.symmetric ? "symfield" : "field") << " " << f.name;
    if (f.family >= 0) os << "[" << f.family << "]";
    os << ";\n";
  }
  if (!pf.params.empty()) {
    os << "  param";
    for (const auto& p : pf.params) os << " " << p;
    os << ";\n";
  }
  os << "  max_order " << pf.max_order << ";\n}\n";
  for (const auto& c : pf.consts) {
    os << "const " << c.name << " = ";
    if (c.is_diag) {
      os << "diag(";
      for (std::size_t i = 0; i < c.diag.size(); ++i) {
        if (i) os << ",";
        os << c.diag[i].str();
      }
      os << ")";
    } else {
      os << c.scalar.str();
    }
    os << ";\n";
  }
  for (const auto& l : pf.lets) {
    os << "let " << l.name;
    if (!l.formals.empty()) {
      os << "[";
      for (std::size_t i = 0; i < l.formals.size(); ++i) {
        if (i) os << ",";
        os << l.formals[i];
      }
      os << "]";
    }
    os << " := ";
    print_expr(os, l.body);
    os << ";\n";
  }
  if (pf.lagrangian) {
    os << "lagrangian ";
    print_expr(os, *pf.lagrangian);
    os << ";\n";
  }
  if (pf.reduced) {
    os << "reduced {\n  lambda ";
    print_expr(os, pf.reduced->lambda);
    os << ";\n";
    if (pf.reduced->alpha) {
      os << "  alpha[" << *pf.reduced->alpha_index << "] := ";
      print_expr(os, *pf.reduced->alpha);
      os << ";\n";
    }
    os << "}\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Elaboration

/// Elaborated problem: the chart, the Lagrangian and the optional reduced
/// split inputs.
struct Problem {
  ChartPtr chart;
  std::shared_ptr<MetricChart> metric;  // set when a symfield was declared
  std::optional<Lagrangian> lagrangian;
  std::optional<Lagrangian> reduced;
  std::optional<DiffForm> alpha;
};

namespace detail {

struct FieldEntry {
  int base_index = 0;  // first engine field index
  int family = -1;     // -1 scalar
  bool symmetric = false;
};

struct Context {
  ChartPtr chart;
  std::shared_ptr<MetricChart> metric;
  std::map<std::string, FieldEntry> fields;
  std::map<std::string, const ConstDecl*> consts;
  std::map<std::string, const LetDecl*> lets;
  std::map<std::string, int> index_vars;
  int n = 0;
  int max_order = 8;
};

inline int eval_index(const Context& cx, const Expr& e) {
  if (e.kind == Expr::Kind::Number) {
    Rational r = e.number;
    if (boost::multiprecision::denominator(r) != 1)
      throw Error("index must be an integer");
    long long v = static_cast<long long>(boost::multiprecision::numerator(r));
    return static_cast<int>(v);
  }
  if (e.kind == Expr::Kind::Ident && e.kids.empty()) {
    auto it = cx.index_vars.find(e.name);
    if (it != cx.index_vars.end()) return it->second;
    throw Error("undeclared identifier: " + e.name);
  }
  throw Error("expected an index (integer or bound index variable)");
}

inline Atom field_atom(const Context& cx, const Expr& ref, const MultiIndex& j) {
  if (ref.kind != Expr::Kind::Ident) throw Error("expected a field reference");
  auto it = cx.fields.find(ref.name);
  if (it == cx.fields.end()) throw Error("undeclared identifier: " + ref.name);
  const FieldEntry& fe = it->second;
  if (fe.symmetric) {
    if (ref.kids.size() != 2) throw Error("symmetric field " + ref.name + " needs two indices");
    int p = eval_index(cx, ref.kids[0]);
    int q = eval_index(cx, ref.kids[1]);
    if (p < 0 || p >= cx.n || q < 0 || q >= cx.n) throw Error("index out of range");
    return Atom::fiber(cx.metric->field_of(p, q), j);
  }
  if (fe.family >= 0) {
    if (ref.kids.size() != 1) throw Error("field family " + ref.name + " needs one index");
    int k = eval_index(cx, ref.kids[0]);
    if (k < 0 || k >= fe.family) throw Error("index out of range");
    return Atom::fiber(fe.base_index + k, j);
  }
  if (!ref.kids.empty()) throw Error("scalar field " + ref.name + " takes no indices");
  return Atom::fiber(fe.base_index, j);
}

inline ScalarExpr eval_expr(Context& cx, const Expr& e);

inline ScalarExpr eval_ident(Context& cx, const Expr& e) {
  // bound index variable used as a scalar is an error
  if (e.kids.empty() && cx.index_vars.count(e.name))
    throw Error("index variable used as a scalar: " + e.name);
  if (auto it = cx.consts.find(e.name); it != cx.consts.end()) {
    const ConstDecl& c = *it->second;
    if (!c.is_diag) {
      if (!e.kids.empty()) throw Error("scalar constant " + e.name + " takes no indices");
      return ScalarExpr(c.scalar);
    }
    if (e.kids.size() != 2) throw Error("tensor constant " + e.name + " needs two indices");
    int i = eval_index(cx, e.kids[0]);
    int j = eval_index(cx, e.kids[1]);
    int d = static_cast<int>(c.diag.size());
    if (i < 0 || i >= d || j < 0 || j >= d) throw Error("index out of range");
    return i == j ? ScalarExpr(c.diag[static_cast<std::size_t>(i)]) : ScalarExpr();
  }
  if (auto it = cx.lets.find(e.name); it != cx.lets.end()) {
    const LetDecl& l = *it->second;
    if (e.kids.size() != l.formals.size())
      throw Error("binding " + e.name + " expects " + std::to_string(l.formals.size()) +
                  " indices");
    std::map<std::string, int> saved = cx.index_vars;
    std::map<std::string, int> fresh;
    for (std::size_t k = 0; k < l.formals.size(); ++k)
      fresh[l.formals[k]] = eval_index(cx, e.kids[k]);
    cx.index_vars = std::move(fresh);
    ScalarExpr r = eval_expr(cx, l.body);
    cx.index_vars = std::move(saved);
    return r;
  }
  if (cx.fields.count(e.name)) return ScalarExpr::atom(field_atom(cx, e, {}));
  for (int i = 0; i < cx.n; ++i)
    if (cx.chart->base_names()[static_cast<std::size_t>(i)] == e.name) {
      if (!e.kids.empty()) throw Error("base coordinate " + e.name + " takes no indices");
      return ScalarExpr::atom(Atom::base(i));
    }
  if (auto p = cx.chart->find_param(e.name)) {
    if (!e.kids.empty()) throw Error("parameter " + e.name + " takes no indices");
    return ScalarExpr::atom(Atom::param(*p));
  }
  if (auto o = cx.chart->find_opaque(e.name)) {
    const OpaqueSymbol& sym = cx.chart->opaque(*o);
    if (static_cast<int>(e.kids.size()) != sym.arity)
      throw Error("symbol " + e.name + " expects " + std::to_string(sym.arity) + " indices");
    std::vector<std::uint8_t> idx;
    for (const Expr& k : e.kids) {
      int v = eval_index(cx, k);
      if (v < 0 || v >= cx.n) throw Error("index out of range");
      idx.push_back(static_cast<std::uint8_t>(v));
    }
    return ScalarExpr::atom(Atom::opaque(*o, MultiIndex(idx)));
  }
  throw Error("undeclared identifier: " + e.name);
}

inline ScalarExpr eval_expr(Context& cx, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Number:
      return ScalarExpr(e.number);
    case Expr::Kind::Ident:
      return eval_ident(cx, e);
    case Expr::Kind::Bin: {
      ScalarExpr l = eval_expr(cx, e.kids[0]);
      ScalarExpr r = eval_expr(cx, e.kids[1]);
      if (e.name == "+") return l + r;
      if (e.name == "-") return l - r;
      if (e.name == "*") return l * r;
      if (r.is_zero()) throw Error("division by zero in expression");
      return l / r;
    }
    case Expr::Kind::Neg:
      return -eval_expr(cx, e.kids[0]);
    case Expr::Kind::Pow:
      return eval_expr(cx, e.kids[0]).pow(static_cast<int>(e.exponent));
    case Expr::Kind::Sum: {
      for (const auto& b : e.binders)
        if (cx.index_vars.count(b)) throw Error("index variable shadowed: " + b);
      ScalarExpr acc;
      std::vector<int> vals(e.binders.size(), 0);
      while (true) {
        for (std::size_t k = 0; k < e.binders.size(); ++k) cx.index_vars[e.binders[k]] = vals[k];
        acc += eval_expr(cx, e.kids[0]);
        std::size_t k = e.binders.size();
        while (k > 0 && ++vals[k - 1] == cx.n) {
          vals[k - 1] = 0;
          --k;
        }
        if (k == 0) break;
      }
      for (const auto& b : e.binders) cx.index_vars.erase(b);
      return acc;
    }
    case Expr::Kind::Jet: {
      std::vector<std::uint8_t> idx;
      for (std::size_t k = 1; k < e.kids.size(); ++k) {
        int v = eval_index(cx, e.kids[k]);
        if (v < 0 || v >= cx.n) throw Error("index out of range");
        idx.push_back(static_cast<std::uint8_t>(v));
      }
      if (static_cast<int>(idx.size()) > cx.max_order)
        throw Error("derivative order beyond declared max");
      return ScalarExpr::atom(field_atom(cx, e.kids[0], MultiIndex(idx)));
    }
    case Expr::Kind::TotalD: {
      ScalarExpr inner = eval_expr(cx, e.kids[0]);
      int i = eval_index(cx, e.kids[1]);
      if (i < 0 || i >= cx.n) throw Error("index out of range");
      return total_derivative(*cx.chart, inner, i);
    }
  }
  throw Error("malformed expression");
}

inline Context make_context(const ProblemFile& pf) {
  Context cx;
  cx.n = static_cast<int>(pf.base.size());
  if (cx.n == 0) throw Error("chart requires at least one base coordinate");
  cx.max_order = pf.max_order;

  int sym_count = 0;
  for (const auto& f : pf.fields)
    if (f.symmetric) ++sym_count;
  if (sym_count > 1 || (sym_count == 1 && pf.fields.size() > 1))
    throw Error("a symfield cannot be combined with other fields");

  if (sym_count == 1) {
    const FieldDecl& f = pf.fields.front();
    if (f.family != cx.n) throw Error("symfield size must match the base dimension");
    if (!pf.params.empty()) throw Error("parameters with a symfield are not supported");
    cx.metric = std::make_shared<MetricChart>(cx.n, pf.max_order, pf.base);
    cx.chart = cx.metric->chart();
    cx.fields[f.name] = FieldEntry{0, f.family, true};
  } else {
    std::vector<std::string> names;
    for (const auto& f : pf.fields) {
      if (f.family < 0) {
        cx.fields[f.name] = FieldEntry{static_cast<int>(names.size()), -1, false};
        names.push_back(f.name);
      } else {
        cx.fields[f.name] = FieldEntry{static_cast<int>(names.size()), f.family, false};
        for (int k = 0; k < f.family; ++k) names.push_back(f.name + "_" + std::to_string(k));
      }
    }
    cx.chart = std::make_shared<const ChartSpec>(pf.base, names, pf.params,
                                                 std::vector<OpaqueSymbol>{}, pf.max_order);
  }
  for (const auto& c : pf.consts) cx.consts[c.name] = &c;
  for (const auto& l : pf.lets) cx.lets[l.name] = &l;
  return cx;
}

}  // namespace detail

inline Problem elaborate(const ProblemFile& pf) {
  detail::Context cx = detail::make_context(pf);
  Problem out;
  out.chart = cx.chart;
  out.metric = cx.metric;
  if (pf.lagrangian) out.lagrangian = Lagrangian(cx.chart, detail::eval_expr(cx, *pf.lagrangian));
  if (pf.reduced) {
    out.reduced = Lagrangian(cx.chart, detail::eval_expr(cx, pf.reduced->lambda));
    if (pf.reduced->alpha) {
      std::vector<ScalarExpr> comps;
      int order = 0;
      for (int i = 0; i < cx.n; ++i) {
        cx.index_vars[*pf.reduced->alpha_index] = i;
        comps.push_back(detail::eval_expr(cx, *pf.reduced->alpha));
        order = std::max(order, jet_order(*cx.chart, comps.back()));
        cx.index_vars.erase(*pf.reduced->alpha_index);
      }
      DiffForm a(cx.chart, cx.n - 1, order);
      for (int i = 0; i < cx.n; ++i)
        a = a + ScalarExpr(comps[static_cast<std::size_t>(i)]) * omega_lowered(cx.chart, {i}, order);
      out.alpha = std::move(a);
    }
  }
  return out;
}

/// Parses a standalone expression in the context of an existing chart (all
/// engine field names resolve as scalar fields; opaque symbols and
/// parameters resolve through the chart).
inline ScalarExpr parse_expression(const std::string& text, const ChartPtr& chart) {
  Parser p(text);
  Expr e = p.parse_expression_only();
  detail::Context cx;
  cx.chart = chart;
  cx.n = chart->n();
  cx.max_order = chart->max_order();
  for (int i = 0; i < chart->field_count(); ++i)
    cx.fields[chart->fields()[static_cast<std::size_t>(i)]] = detail::FieldEntry{i, -1, false};
  return detail::eval_expr(cx, e);
}

}  // namespace jetforms::dsl
