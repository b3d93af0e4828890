#pragma once

// Continuation-based small-step interpreter for the source language.
// Undefined behavior (out-of-bounds buffer access) is a classified outcome,
// not a crash; any other stuckness aborts loudly.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "scc/lang.hpp"

namespace scc {

// Flat evaluation contexts:
//   [] op e2 | i1 op [] | if [] then e1 else e2 | b[[]] | b[[]] := e2
//   | b[i1] := [] | C.P([])
struct FlatCtx {
  enum class Kind { BinopL, BinopR, IfGuard, ReadIdx, WriteIdx, WriteVal, CallArg };
  Kind kind;
  Op op = Op::Seq;     // BinopL / BinopR
  Word saved;          // BinopR: i1; WriteVal: i1 (the index)
  int buffer = 0;      // ReadIdx / WriteIdx / WriteVal
  Name comp, proc;     // CallArg
  ExprPtr e1, e2;      // pending subexpressions
};

// Innermost context at the back.
using Kont = std::vector<FlatCtx>;

struct CallFrame {
  Name comp;       // caller component
  Word saved_arg;  // caller's s[C,0,0] at call time
  Kont kont;       // caller continuation
};

struct Config {
  Name current;
  std::vector<Word> store;  // flattened buffer cells, see StoreLayout
  std::vector<CallFrame> callstack;
  Kont kont;
  ExprPtr expr;
};

// Where each (component, buffer) lives in the flattened store.
struct StoreLayout {
  struct BufSlot {
    size_t base;
    size_t size;
  };
  std::map<Name, std::vector<BufSlot>> slots;
  size_t total = 0;

  const BufSlot* slot(const Name& comp, int buffer) const {
    auto it = slots.find(comp);
    if (it == slots.end()) return nullptr;
    if (buffer < 0 || static_cast<size_t>(buffer) >= it->second.size()) return nullptr;
    return &it->second[buffer];
  }
};

struct MissingMainError : Error {
  MissingMainError() : Error("program has no Main.main") {}
};
struct IncompleteProgramError : Error {
  explicit IncompleteProgramError(const std::string& what) : Error("incomplete program: " + what) {}
};
struct UnsupportedExprError : Error {
  UnsupportedExprError() : Error("expression uses buffers, calls or exit") {}
};

// A complete program prepared for execution.
struct LinkedSource {
  PartialProgram prog;
  StoreLayout layout;
  std::map<ProcRef, ExprPtr> procs;
};

inline LinkedSource prepare(const PartialProgram& w) {
  LinkedSource ls;
  ls.prog = w;
  for (const auto& [name, def] : w.defs) {
    auto& v = ls.layout.slots[name];
    for (unsigned sz : def.buffers) {
      v.push_back({ls.layout.total, sz});
      ls.layout.total += sz;
    }
    for (const auto& [pname, body] : def.procedures) ls.procs[{name, pname}] = body;
    for (const auto& [ic, ip] : def.iface.imports) {
      auto it = w.defs.find(ic);
      if (it == w.defs.end()) throw IncompleteProgramError(name + " imports absent " + ic);
      if (!it->second.iface.exports.count(ip))
        throw IncompleteProgramError(ic + "." + ip + " not exported");
    }
  }
  return ls;
}

inline Config init_config(const LinkedSource& ls) {
  auto it = ls.procs.find({kMainComponent, kMainProc});
  if (it == ls.procs.end()) throw MissingMainError();
  Config cfg;
  cfg.current = kMainComponent;
  cfg.store.assign(ls.layout.total, Word(0));  // argument cell already holds 0
  cfg.expr = it->second;
  return cfg;
}

struct StepResult {
  enum class Kind { Step, FinalValue, FinalExit, UBRead, UBWrite };
  Kind kind;
  Word value;    // FinalValue
  Name comp;     // UB: blamed component
  int buffer = 0;
  Word index;    // UB: offending cell index
  bool wide = false;  // a binop tripped the value-width cap
};

namespace detail {
inline Word apply_op(Op op, const Word& l, const Word& r) {
  switch (op) {
    case Op::Seq: return r;
    case Op::Add: return l + r;
    case Op::Sub: return l - r;
    case Op::Mul: return l * r;
    case Op::Eq: return Word(l == r ? 1 : 0);
    case Op::Leq: return Word(l <= r ? 1 : 0);
  }
  return 0;
}
}  // namespace detail

// One small step, in place. The returned StepResult carries classification;
// cfg is only meaningful afterwards when the result is Kind::Step.
inline StepResult step_inplace(const LinkedSource& ls, Config& cfg) {
  const Expr& e = *cfg.expr;
  if (e.kind == Expr::Kind::Exit) return {StepResult::Kind::FinalExit};

  if (e.kind == Expr::Kind::Int) {
    if (cfg.kont.empty()) {
      if (cfg.callstack.empty()) return {StepResult::Kind::FinalValue, e.lit};
      // return rule: restore the caller's argument cell and continuation
      CallFrame frame = std::move(cfg.callstack.back());
      cfg.callstack.pop_back();
      const auto* slot = ls.layout.slot(frame.comp, 0);
      internal_check(slot != nullptr, "caller frame without buffer 0");
      cfg.store[slot->base] = frame.saved_arg;
      cfg.current = frame.comp;
      cfg.kont = std::move(frame.kont);
      return {StepResult::Kind::Step};
    }
    FlatCtx top = std::move(cfg.kont.back());
    cfg.kont.pop_back();
    switch (top.kind) {
      case FlatCtx::Kind::BinopL: {
        FlatCtx next;
        next.kind = FlatCtx::Kind::BinopR;
        next.op = top.op;
        next.saved = e.lit;
        cfg.kont.push_back(std::move(next));
        cfg.expr = top.e2;
        return {StepResult::Kind::Step};
      }
      case FlatCtx::Kind::BinopR: {
        Word v = detail::apply_op(top.op, top.saved, e.lit);
        if (too_wide(v)) {
          StepResult r{StepResult::Kind::Step};
          r.wide = true;
          cfg.expr = eint(std::move(v));
          return r;
        }
        cfg.expr = eint(std::move(v));
        return {StepResult::Kind::Step};
      }
      case FlatCtx::Kind::IfGuard:
        cfg.expr = (e.lit != 0) ? top.e1 : top.e2;
        return {StepResult::Kind::Step};
      case FlatCtx::Kind::ReadIdx: {
        const auto* slot = ls.layout.slot(cfg.current, top.buffer);
        internal_check(slot != nullptr, "read of undeclared buffer survived wf check");
        if (e.lit < 0 || e.lit >= slot->size)
          return {StepResult::Kind::UBRead, {}, cfg.current, top.buffer, e.lit};
        cfg.expr = eint(cfg.store[slot->base + static_cast<size_t>(e.lit)]);
        return {StepResult::Kind::Step};
      }
      case FlatCtx::Kind::WriteIdx: {
        FlatCtx next;
        next.kind = FlatCtx::Kind::WriteVal;
        next.buffer = top.buffer;
        next.saved = e.lit;
        cfg.kont.push_back(std::move(next));
        cfg.expr = top.e2;
        return {StepResult::Kind::Step};
      }
      case FlatCtx::Kind::WriteVal: {
        const auto* slot = ls.layout.slot(cfg.current, top.buffer);
        internal_check(slot != nullptr, "write to undeclared buffer survived wf check");
        if (top.saved < 0 || top.saved >= slot->size)
          return {StepResult::Kind::UBWrite, {}, cfg.current, top.buffer, top.saved};
        cfg.store[slot->base + static_cast<size_t>(top.saved)] = e.lit;
        // the written value remains the current expression
        return {StepResult::Kind::Step};
      }
      case FlatCtx::Kind::CallArg: {
        auto body = ls.procs.find({top.comp, top.proc});
        internal_check(body != ls.procs.end(), "call to unknown procedure survived wf check");
        const auto* caller_slot = ls.layout.slot(cfg.current, 0);
        const auto* callee_slot = ls.layout.slot(top.comp, 0);
        internal_check(caller_slot && callee_slot, "component without buffer 0");
        CallFrame frame{cfg.current, cfg.store[caller_slot->base], std::move(cfg.kont)};
        cfg.callstack.push_back(std::move(frame));
        cfg.store[callee_slot->base] = e.lit;
        cfg.current = top.comp;
        cfg.kont.clear();
        cfg.expr = body->second;
        return {StepResult::Kind::Step};
      }
    }
    internal_check(false, "unhandled continuation");
  }

  // decomposition: e = E[e'], push E, descend into e'
  FlatCtx ctx;
  switch (e.kind) {
    case Expr::Kind::Binop:
      ctx.kind = FlatCtx::Kind::BinopL;
      ctx.op = e.op;
      ctx.e2 = e.b;
      break;
    case Expr::Kind::If:
      ctx.kind = FlatCtx::Kind::IfGuard;
      ctx.e1 = e.b;
      ctx.e2 = e.c;
      break;
    case Expr::Kind::Read:
      ctx.kind = FlatCtx::Kind::ReadIdx;
      ctx.buffer = e.buffer;
      break;
    case Expr::Kind::Write:
      ctx.kind = FlatCtx::Kind::WriteIdx;
      ctx.buffer = e.buffer;
      ctx.e2 = e.b;
      break;
    case Expr::Kind::Call:
      ctx.kind = FlatCtx::Kind::CallArg;
      ctx.comp = e.comp;
      ctx.proc = e.proc;
      break;
    default:
      internal_check(false, "non-value expression with no decomposition");
  }
  cfg.kont.push_back(std::move(ctx));
  cfg.expr = e.a;
  return {StepResult::Kind::Step};
}

// Pure variant: the stepped configuration rides along in the result.
struct PureStep {
  StepResult result;
  Config next;  // valid when result.kind == Step
};
inline PureStep step(const LinkedSource& ls, const Config& cfg) {
  Config copy = cfg;
  StepResult r = step_inplace(ls, copy);
  return {std::move(r), std::move(copy)};
}

struct RunResult {
  enum class Kind { Terminated, FuelExhausted, UndefinedBehavior };
  Kind kind;
  long long steps = 0;
  Name blamed;

  bool operator==(const RunResult& o) const { return kind == o.kind && blamed == o.blamed; }
  std::string text() const {
    switch (kind) {
      case Kind::Terminated: return "TERMINATED";
      case Kind::FuelExhausted: return "FUEL";
      case Kind::UndefinedBehavior: return "UB " + blamed;
    }
    return "?";
  }
};

inline RunResult run_prepared(const LinkedSource& ls, long long fuel) {
  Config cfg = init_config(ls);
  for (long long i = 1; i <= fuel; ++i) {
    StepResult r = step_inplace(ls, cfg);
    switch (r.kind) {
      case StepResult::Kind::Step:
        if (r.wide) return {RunResult::Kind::FuelExhausted, fuel};
        break;
      case StepResult::Kind::FinalValue:
      case StepResult::Kind::FinalExit:
        return {RunResult::Kind::Terminated, i};
      case StepResult::Kind::UBRead:
      case StepResult::Kind::UBWrite:
        return {RunResult::Kind::UndefinedBehavior, i, r.comp};
    }
  }
  return {RunResult::Kind::FuelExhausted, fuel};
}

inline RunResult run(const PartialProgram& w, long long fuel) {
  return run_prepared(prepare(w), fuel);
}

inline Word eval_expr_closed(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::Int: return e->lit;
    case Expr::Kind::Binop:
      return detail::apply_op(e->op, eval_expr_closed(e->a), eval_expr_closed(e->b));
    case Expr::Kind::If:
      return eval_expr_closed(e->a) != 0 ? eval_expr_closed(e->b) : eval_expr_closed(e->c);
    default: throw UnsupportedExprError();
  }
}

}  // namespace scc
