#pragma once

// Concrete syntax for partial programs and shapes.
//
//   component C1 {
//     import C2.f, Main.main;
//     export g;
//     buffer 2, 5;
//     proc g(arg) = if b0[0] <= 3 then C2.f(1 + b0[0]) else (b0[1] := 7; exit);
//   }
//
//   shape { Main : import C1.f export main ; C1 : export f compromised ; }
//
// A ';' inside a proc body is the sequencing operator as long as an
// expression follows; otherwise it closes the clause.

#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "scc/lang.hpp"

namespace scc {

struct ParseError : Error {
  ParseError(const std::string& msg, int line) : Error("parse error (line " + std::to_string(line) + "): " + msg) {}
};

namespace detail {

struct Token {
  enum class Kind { Ident, Int, Sym, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string src) : src_(std::move(src)) { advance(); }

  const Token& peek() const { return tok_; }
  const Token& peek2() {
    if (!have2_) {
      saved_ = tok_;
      size_t p = pos_;
      int l = line_;
      advance();
      tok2_ = tok_;
      tok_ = saved_;
      pos2_ = pos_;
      line2_ = line_;
      pos_ = p;
      line_ = l;
      have2_ = true;
    }
    return tok2_;
  }
  Token next() {
    Token t = tok_;
    if (have2_) {
      tok_ = tok2_;
      pos_ = pos2_;
      line_ = line2_;
      have2_ = false;
    } else {
      advance();
    }
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
    tok_.line = line_;
    if (pos_ >= src_.size()) {
      tok_ = {Token::Kind::End, "", line_};
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_ = {Token::Kind::Ident, src_.substr(start, pos_ - start), line_};
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      tok_ = {Token::Kind::Int, src_.substr(start, pos_ - start), line_};
      return;
    }
    for (const char* sym : {":=", "==", "<="}) {
      if (src_.compare(pos_, 2, sym) == 0) {
        tok_ = {Token::Kind::Sym, sym, line_};
        pos_ += 2;
        return;
      }
    }
    tok_ = {Token::Kind::Sym, std::string(1, c), line_};
    ++pos_;
  }

  std::string src_;
  size_t pos_ = 0, pos2_ = 0;
  int line_ = 1, line2_ = 1;
  Token tok_, tok2_, saved_;
  bool have2_ = false;
};

class Parser {
 public:
  explicit Parser(std::string src) : lex_(std::move(src)) {}

  PartialProgram program() {
    PartialProgram p;
    while (lex_.peek().kind != Token::Kind::End) {
      expect_ident("component");
      ComponentDef def = component();
      if (p.defs.count(def.name)) fail("duplicate component " + def.name);
      p.defs.emplace(def.name, std::move(def));
    }
    return p;
  }

  Shape shape() {
    expect_ident("shape");
    expect_sym("{");
    Shape s;
    while (!at_sym("}")) {
      Name name = ident();
      expect_sym(":");
      Interface iface;
      if (at_ident("import")) {
        lex_.next();
        for (;;) {
          Name c = ident();
          expect_sym(".");
          iface.imports.insert({c, ident()});
          if (at_sym(","))
            lex_.next();
          else
            break;
        }
      }
      if (at_ident("export")) {
        lex_.next();
        for (;;) {
          iface.exports.insert(ident());
          if (at_sym(","))
            lex_.next();
          else
            break;
        }
      }
      bool compromised = false;
      if (at_ident("compromised")) {
        lex_.next();
        compromised = true;
      }
      expect_sym(";");
      if (s.interfaces.count(name)) fail("duplicate component " + name + " in shape");
      s.interfaces[name] = std::move(iface);
      if (!compromised) s.uncompromised.insert(name);
    }
    lex_.next();
    return s;
  }

  ExprPtr expr_only() {
    ExprPtr e = expr();
    if (lex_.peek().kind != Token::Kind::End) fail("trailing input after expression");
    return e;
  }

 private:
  ComponentDef component() {
    ComponentDef def;
    def.name = ident();
    expect_sym("{");
    while (!at_sym("}")) {
      if (at_ident("import")) {
        lex_.next();
        for (;;) {
          Name c = ident();
          expect_sym(".");
          def.iface.imports.insert({c, ident()});
          if (at_sym(","))
            lex_.next();
          else
            break;
        }
        expect_sym(";");
      } else if (at_ident("export")) {
        lex_.next();
        for (;;) {
          def.iface.exports.insert(ident());
          if (at_sym(","))
            lex_.next();
          else
            break;
        }
        expect_sym(";");
      } else if (at_ident("buffer")) {
        lex_.next();
        for (;;) {
          Token t = lex_.next();
          if (t.kind != Token::Kind::Int) fail("expected buffer size");
          def.buffers.push_back(static_cast<unsigned>(std::stoul(t.text)));
          if (at_sym(","))
            lex_.next();
          else
            break;
        }
        expect_sym(";");
      } else if (at_ident("proc")) {
        lex_.next();
        Name pname = ident();
        expect_sym("(");
        ident();  // formal argument name; the argument always lives in b0[0]
        expect_sym(")");
        expect_sym("=");
        ExprPtr body = expr();
        expect_sym(";");
        if (def.procedures.count(pname)) fail("duplicate proc " + pname);
        def.procedures[pname] = std::move(body);
      } else {
        fail("expected import/export/buffer/proc");
      }
    }
    lex_.next();
    return def;
  }

  // expr := cmp (';' expr)?   with the trailing ';' belonging to the clause
  // when no expression follows.
  ExprPtr expr() {
    ExprPtr left = cmp();
    if (at_sym(";") && starts_expr(lex_.peek2())) {
      lex_.next();
      return eseq(std::move(left), expr());
    }
    return left;
  }

  ExprPtr cmp() {
    ExprPtr left = add();
    if (at_sym("==")) {
      lex_.next();
      return ebinop(Op::Eq, std::move(left), add());
    }
    if (at_sym("<=")) {
      lex_.next();
      return ebinop(Op::Leq, std::move(left), add());
    }
    return left;
  }

  ExprPtr add() {
    ExprPtr left = mul();
    while (at_sym("+") || at_sym("-")) {
      Op op = lex_.next().text == "+" ? Op::Add : Op::Sub;
      left = ebinop(op, std::move(left), mul());
    }
    return left;
  }

  ExprPtr mul() {
    ExprPtr left = primary();
    while (at_sym("*")) {
      lex_.next();
      left = ebinop(Op::Mul, std::move(left), primary());
    }
    return left;
  }

  ExprPtr primary() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Int) {
      return eint(Word(lex_.next().text));
    }
    if (at_sym("-")) {
      lex_.next();
      if (lex_.peek().kind == Token::Kind::Int) return eint(-Word(lex_.next().text));
      return ebinop(Op::Sub, eint(0), primary());
    }
    if (at_sym("(")) {
      lex_.next();
      ExprPtr e = expr();
      expect_sym(")");
      return e;
    }
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "exit") {
        lex_.next();
        return eexit();
      }
      if (t.text == "if") {
        lex_.next();
        ExprPtr g = expr();
        expect_ident("then");
        ExprPtr yes = expr();
        expect_ident("else");
        ExprPtr no = expr();
        return eif(std::move(g), std::move(yes), std::move(no));
      }
      if (is_buffer_name(t.text) && lex_.peek2().kind == Token::Kind::Sym && lex_.peek2().text == "[") {
        int buf = std::stoi(lex_.next().text.substr(1));
        expect_sym("[");
        ExprPtr idx = expr();
        expect_sym("]");
        if (at_sym(":=")) {
          lex_.next();
          return ewrite(buf, std::move(idx), cmp());
        }
        return eread(buf, std::move(idx));
      }
      Name c = ident();
      expect_sym(".");
      Name p = ident();
      expect_sym("(");
      ExprPtr arg = expr();
      expect_sym(")");
      return ecall(std::move(c), std::move(p), std::move(arg));
    }
    fail("expected expression");
    return nullptr;
  }

  static bool is_buffer_name(const std::string& s) {
    if (s.size() < 2 || s[0] != 'b') return false;
    for (size_t i = 1; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
  }

  static bool starts_expr(const Token& t) {
    if (t.kind == Token::Kind::Int) return true;
    if (t.kind == Token::Kind::Sym) return t.text == "(" || t.text == "-";
    if (t.kind != Token::Kind::Ident) return false;
    return t.text != "proc" && t.text != "import" && t.text != "export" && t.text != "buffer" &&
           t.text != "component" && t.text != "then" && t.text != "else";
  }

  bool at_sym(const std::string& s) {
    return lex_.peek().kind == Token::Kind::Sym && lex_.peek().text == s;
  }
  bool at_ident(const std::string& s) {
    return lex_.peek().kind == Token::Kind::Ident && lex_.peek().text == s;
  }
  void expect_sym(const std::string& s) {
    if (!at_sym(s)) fail("expected '" + s + "', got '" + lex_.peek().text + "'");
    lex_.next();
  }
  void expect_ident(const std::string& s) {
    if (!at_ident(s)) fail("expected '" + s + "', got '" + lex_.peek().text + "'");
    lex_.next();
  }
  Name ident() {
    if (lex_.peek().kind != Token::Kind::Ident) fail("expected identifier, got '" + lex_.peek().text + "'");
    return lex_.next().text;
  }
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, lex_.peek().line); }

  Lexer lex_;
};

inline int prec_of(Op op) {
  switch (op) {
    case Op::Seq: return 0;
    case Op::Eq:
    case Op::Leq: return 1;
    case Op::Add:
    case Op::Sub: return 2;
    case Op::Mul: return 3;
  }
  return 3;
}

inline void print_expr_prec(std::ostream& os, const ExprPtr& e, int min_prec) {
  switch (e->kind) {
    case Expr::Kind::Int:
      if (e->lit < 0) {
        os << "(" << e->lit << ")";
      } else {
        os << e->lit;
      }
      return;
    case Expr::Kind::Exit:
      os << "exit";
      return;
    case Expr::Kind::Binop: {
      int p = prec_of(e->op);
      bool paren = p < min_prec;
      if (paren) os << "(";
      print_expr_prec(os, e->a, p + 1);
      os << (e->op == Op::Seq ? "; " : std::string(" ") + op_text(e->op) + " ");
      print_expr_prec(os, e->b, p);
      if (paren) os << ")";
      return;
    }
    case Expr::Kind::If:
      os << "(if ";
      print_expr_prec(os, e->a, 0);
      os << " then ";
      print_expr_prec(os, e->b, 0);
      os << " else ";
      print_expr_prec(os, e->c, 0);
      os << ")";
      return;
    case Expr::Kind::Read:
      os << "b" << e->buffer << "[";
      print_expr_prec(os, e->a, 0);
      os << "]";
      return;
    case Expr::Kind::Write:
      os << "(b" << e->buffer << "[";
      print_expr_prec(os, e->a, 0);
      os << "] := ";
      print_expr_prec(os, e->b, 2);
      os << ")";
      return;
    case Expr::Kind::Call:
      os << e->comp << "." << e->proc << "(";
      print_expr_prec(os, e->a, 0);
      os << ")";
      return;
  }
}

}  // namespace detail

inline PartialProgram parse_program(const std::string& text) {
  return detail::Parser(text).program();
}
inline Shape parse_shape(const std::string& text) { return detail::Parser(text).shape(); }
inline ExprPtr parse_expr(const std::string& text) { return detail::Parser(text).expr_only(); }

inline std::string print_expr(const ExprPtr& e) {
  std::ostringstream os;
  detail::print_expr_prec(os, e, 0);
  return os.str();
}

inline std::string print_component(const ComponentDef& def) {
  std::ostringstream os;
  os << "component " << def.name << " {\n";
  if (!def.iface.imports.empty()) {
    os << "  import ";
    bool first = true;
    for (const auto& [c, p] : def.iface.imports) {
      if (!first) os << ", ";
      os << c << "." << p;
      first = false;
    }
    os << ";\n";
  }
  if (!def.iface.exports.empty()) {
    os << "  export ";
    bool first = true;
    for (const auto& p : def.iface.exports) {
      if (!first) os << ", ";
      os << p;
      first = false;
    }
    os << ";\n";
  }
  if (!def.buffers.empty()) {
    os << "  buffer ";
    for (size_t i = 0; i < def.buffers.size(); ++i) os << (i ? ", " : "") << def.buffers[i];
    os << ";\n";
  }
  for (const auto& [pname, body] : def.procedures) {
    os << "  proc " << pname << "(arg) = " << print_expr(body) << ";\n";
  }
  os << "}\n";
  return os.str();
}

inline std::string print_program(const PartialProgram& p) {
  std::string out;
  for (const auto& [_, def] : p.defs) out += print_component(def);
  return out;
}

inline std::string print_shape(const Shape& s) {
  std::ostringstream os;
  os << "shape {\n";
  for (const auto& [name, iface] : s.interfaces) {
    os << "  " << name << " :";
    if (!iface.imports.empty()) {
      os << " import ";
      bool first = true;
      for (const auto& [c, p] : iface.imports) {
        if (!first) os << ", ";
        os << c << "." << p;
        first = false;
      }
    }
    if (!iface.exports.empty()) {
      os << " export ";
      bool first = true;
      for (const auto& p : iface.exports) {
        if (!first) os << ", ";
        os << p;
        first = false;
      }
    }
    if (!s.uncompromised.count(name)) os << " compromised";
    os << " ;\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace scc
