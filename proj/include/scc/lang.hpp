#pragma once

// Components, interfaces, shapes, partial programs, linking and the
// well-formedness / shape-satisfaction judgments.

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "scc/words.hpp"

namespace scc {

using Name = std::string;
using ProcRef = std::pair<Name, Name>;  // (component, procedure)

struct Interface {
  std::set<Name> exports;
  std::set<ProcRef> imports;
  bool operator==(const Interface&) const = default;
};

enum class Op { Seq, Add, Sub, Mul, Eq, Leq };

inline const char* op_text(Op op) {
  switch (op) {
    case Op::Seq: return ";";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Eq: return "==";
    case Op::Leq: return "<=";
  }
  return "?";
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression tree. e ::= i | e1 op e2 | if e then e1 else e2
//                               | b[e] | b[e1] := e2 | C.P(e) | exit
struct Expr {
  enum class Kind { Int, Binop, If, Read, Write, Call, Exit };
  Kind kind;
  Word lit;               // Int
  Op op = Op::Seq;        // Binop
  int buffer = 0;         // Read / Write
  Name comp, proc;        // Call
  ExprPtr a, b, c;        // children
};

inline ExprPtr eint(Word i) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Int;
  e->lit = std::move(i);
  return e;
}
inline ExprPtr ebinop(Op op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Binop;
  e->op = op;
  e->a = std::move(l);
  e->b = std::move(r);
  return e;
}
inline ExprPtr eseq(ExprPtr l, ExprPtr r) { return ebinop(Op::Seq, std::move(l), std::move(r)); }
inline ExprPtr eif(ExprPtr g, ExprPtr t, ExprPtr f) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::If;
  e->a = std::move(g);
  e->b = std::move(t);
  e->c = std::move(f);
  return e;
}
inline ExprPtr eread(int buf, ExprPtr idx) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Read;
  e->buffer = buf;
  e->a = std::move(idx);
  return e;
}
inline ExprPtr ewrite(int buf, ExprPtr idx, ExprPtr val) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Write;
  e->buffer = buf;
  e->a = std::move(idx);
  e->b = std::move(val);
  return e;
}
inline ExprPtr ecall(Name comp, Name proc, ExprPtr arg) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Call;
  e->comp = std::move(comp);
  e->proc = std::move(proc);
  e->a = std::move(arg);
  return e;
}
inline ExprPtr eexit() {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Exit;
  return e;
}

inline bool expr_equal(const ExprPtr& x, const ExprPtr& y) {
  if (x == y) return true;
  if (!x || !y) return false;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case Expr::Kind::Int: return x->lit == y->lit;
    case Expr::Kind::Binop: return x->op == y->op && expr_equal(x->a, y->a) && expr_equal(x->b, y->b);
    case Expr::Kind::If:
      return expr_equal(x->a, y->a) && expr_equal(x->b, y->b) && expr_equal(x->c, y->c);
    case Expr::Kind::Read: return x->buffer == y->buffer && expr_equal(x->a, y->a);
    case Expr::Kind::Write:
      return x->buffer == y->buffer && expr_equal(x->a, y->a) && expr_equal(x->b, y->b);
    case Expr::Kind::Call:
      return x->comp == y->comp && x->proc == y->proc && expr_equal(x->a, y->a);
    case Expr::Kind::Exit: return true;
  }
  return false;
}

struct ComponentDef {
  Name name;
  Interface iface;
  std::vector<unsigned> buffers;        // buffer sizes, in word cells
  std::map<Name, ExprPtr> procedures;   // exported and private bodies
};

struct Shape {
  std::map<Name, Interface> interfaces;
  std::set<Name> uncompromised;
};

// Programs and contexts are the same thing: component maps. Which one a
// given value "is" is purely a shape judgment.
struct PartialProgram {
  std::map<Name, ComponentDef> defs;
};

// Execution starts as a call to Main.main with argument 0.
inline const Name kMainComponent = "Main";
inline const Name kMainProc = "main";

struct Violation {
  enum class Kind {
    MissingExport,
    UnimportedCall,
    UnknownBuffer,
    NoBuffers,
    EmptyFirstBuffer,
    SelfImport,
    DuplicateName,
    NameMismatch,
    ImportFromUnknown,
    ImportNotExported,
    MissingMain,
  };
  Kind kind;
  Name a, b;

  std::string text() const {
    switch (kind) {
      case Kind::MissingExport: return "missing export: " + a;
      case Kind::UnimportedCall: return "call to unimported " + a + "." + b;
      case Kind::UnknownBuffer: return "unknown buffer b" + a + " in proc " + b;
      case Kind::NoBuffers: return "component has no buffers";
      case Kind::EmptyFirstBuffer: return "first buffer has size 0";
      case Kind::SelfImport: return "self-import of " + a + "." + b;
      case Kind::DuplicateName: return "duplicate component name " + a;
      case Kind::NameMismatch: return "component keyed " + a + " but named " + b;
      case Kind::ImportFromUnknown: return a + " imports from unknown component " + b;
      case Kind::ImportNotExported: return a + " imports non-exported " + b;
      case Kind::MissingMain: return "no Main component exporting main";
    }
    return "?";
  }
};

namespace detail {
template <class F>
void walk_expr(const ExprPtr& e, F&& f) {
  if (!e) return;
  f(*e);
  walk_expr(e->a, f);
  walk_expr(e->b, f);
  walk_expr(e->c, f);
}
}  // namespace detail

inline std::vector<Violation> check_component_wf(const ComponentDef& c) {
  std::vector<Violation> out;
  for (const auto& [imp_comp, imp_proc] : c.iface.imports)
    if (imp_comp == c.name)
      out.push_back({Violation::Kind::SelfImport, imp_comp, imp_proc});
  for (const auto& ex : c.iface.exports)
    if (!c.procedures.count(ex)) out.push_back({Violation::Kind::MissingExport, ex, {}});
  if (c.buffers.empty())
    out.push_back({Violation::Kind::NoBuffers, {}, {}});
  else if (c.buffers[0] == 0)
    out.push_back({Violation::Kind::EmptyFirstBuffer, {}, {}});
  for (const auto& [pname, body] : c.procedures) {
    detail::walk_expr(body, [&](const Expr& e) {
      if (e.kind == Expr::Kind::Call) {
        if (e.comp != c.name && !c.iface.imports.count({e.comp, e.proc}))
          out.push_back({Violation::Kind::UnimportedCall, e.comp, e.proc});
        if (e.comp == c.name && !c.procedures.count(e.proc))
          out.push_back({Violation::Kind::UnimportedCall, e.comp, e.proc});
      }
      if (e.kind == Expr::Kind::Read || e.kind == Expr::Kind::Write) {
        if (e.buffer < 0 || static_cast<size_t>(e.buffer) >= c.buffers.size())
          out.push_back({Violation::Kind::UnknownBuffer, std::to_string(e.buffer), pname});
      }
    });
  }
  return out;
}

inline std::vector<Violation> check_shape_wf(const Shape& s) {
  std::vector<Violation> out;
  for (const auto& [name, iface] : s.interfaces) {
    for (const auto& [imp_comp, imp_proc] : iface.imports) {
      if (imp_comp == name) {
        out.push_back({Violation::Kind::SelfImport, imp_comp, imp_proc});
        continue;
      }
      auto it = s.interfaces.find(imp_comp);
      if (it == s.interfaces.end()) {
        out.push_back({Violation::Kind::ImportFromUnknown, name, imp_comp});
      } else if (!it->second.exports.count(imp_proc)) {
        out.push_back({Violation::Kind::ImportNotExported, name, imp_comp + "." + imp_proc});
      }
    }
  }
  auto main_it = s.interfaces.find(kMainComponent);
  if (main_it == s.interfaces.end() || !main_it->second.exports.count(kMainProc))
    out.push_back({Violation::Kind::MissingMain, {}, {}});
  for (const auto& u : s.uncompromised)
    if (!s.interfaces.count(u)) out.push_back({Violation::Kind::ImportFromUnknown, u, u});
  return out;
}

inline bool component_satisfies(const ComponentDef& def, const Name& name, const Interface& iface) {
  return def.name == name && def.iface == iface && check_component_wf(def).empty();
}

namespace detail {
inline bool has_shape_side(const PartialProgram& p, const Shape& s, bool uncompromised_side) {
  std::set<Name> expected;
  for (const auto& [name, _] : s.interfaces)
    if (s.uncompromised.count(name) == (uncompromised_side ? 1u : 0u)) expected.insert(name);
  std::set<Name> actual;
  for (const auto& [name, _] : p.defs) actual.insert(name);
  if (expected != actual) return false;
  for (const auto& [name, def] : p.defs)
    if (!component_satisfies(def, name, s.interfaces.at(name))) return false;
  return true;
}
}  // namespace detail

inline bool has_shape_program(const PartialProgram& p, const Shape& s) {
  return detail::has_shape_side(p, s, true);
}
inline bool has_shape_context(const PartialProgram& a, const Shape& s) {
  return detail::has_shape_side(a, s, false);
}

// Swap the two sides of a shape; a context of s is a program of mirror(s).
inline Shape mirror(const Shape& s) {
  Shape m;
  m.interfaces = s.interfaces;
  for (const auto& [name, _] : s.interfaces)
    if (!s.uncompromised.count(name)) m.uncompromised.insert(name);
  return m;
}

struct LinkOverlapError : Error {
  explicit LinkOverlapError(const std::string& names) : Error("link: overlapping components: " + names) {}
};
struct UnknownComponentError : Error {
  explicit UnknownComponentError(const Name& n) : Error("unknown component: " + n) {}
};

inline PartialProgram link(const PartialProgram& a, const PartialProgram& p) {
  std::string overlap;
  for (const auto& [name, _] : a.defs)
    if (p.defs.count(name)) overlap += (overlap.empty() ? "" : ", ") + name;
  if (!overlap.empty()) throw LinkOverlapError(overlap);
  PartialProgram w = p;
  for (const auto& [name, def] : a.defs) w.defs.emplace(name, def);
  return w;
}

struct PartitionResult {
  PartialProgram context;  // the compromised components
  PartialProgram program;  // the uncompromised components
  Shape shape;
};

inline PartitionResult partition(const PartialProgram& w, const std::set<Name>& compromised) {
  for (const auto& n : compromised)
    if (!w.defs.count(n)) throw UnknownComponentError(n);
  PartitionResult r;
  for (const auto& [name, def] : w.defs) {
    r.shape.interfaces[name] = def.iface;
    if (compromised.count(name)) {
      r.context.defs.emplace(name, def);
    } else {
      r.program.defs.emplace(name, def);
      r.shape.uncompromised.insert(name);
    }
  }
  return r;
}

inline std::vector<Violation> check_program_wf(const PartialProgram& w) {
  std::vector<Violation> out;
  for (const auto& [name, def] : w.defs) {
    if (def.name != name) out.push_back({Violation::Kind::NameMismatch, name, def.name});
    auto vs = check_component_wf(def);
    out.insert(out.end(), vs.begin(), vs.end());
  }
  return out;
}

// Numeric indexing used by the target machine. Component indices follow the
// lexicographic order of their names; procedure indices follow the
// lexicographic order of a component's exports, except that Main.main is
// pinned to index 0 so a loaded image can locate the start procedure.
struct IndexMaps {
  std::vector<Name> comp_names;                       // cidx -> name
  std::map<Name, int> comp_index;                     // name -> cidx
  std::vector<std::vector<Name>> proc_names;          // cidx -> pidx -> name
  std::map<ProcRef, std::pair<int, int>> proc_index;  // (comp, proc) -> (cidx, pidx)

  static IndexMaps from_shape(const Shape& s) {
    IndexMaps m;
    for (const auto& [name, _] : s.interfaces) {
      m.comp_index[name] = static_cast<int>(m.comp_names.size());
      m.comp_names.push_back(name);
    }
    m.proc_names.resize(m.comp_names.size());
    for (const auto& [name, iface] : s.interfaces) {
      int cidx = m.comp_index.at(name);
      std::vector<Name> procs(iface.exports.begin(), iface.exports.end());
      if (name == kMainComponent) {
        auto it = std::find(procs.begin(), procs.end(), kMainProc);
        if (it != procs.end()) {
          procs.erase(it);
          procs.insert(procs.begin(), kMainProc);
        }
      }
      for (size_t i = 0; i < procs.size(); ++i)
        m.proc_index[{name, procs[i]}] = {cidx, static_cast<int>(i)};
      m.proc_names[cidx] = std::move(procs);
    }
    return m;
  }

  static IndexMaps from_program(const PartialProgram& w) {
    return from_shape(partition(w, {}).shape);
  }
};

inline Shape shape_of_program(const PartialProgram& w) { return partition(w, {}).shape; }

}  // namespace scc
