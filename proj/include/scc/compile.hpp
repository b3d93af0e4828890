#pragma once

// Pointwise compilation of components to compartments.
//
// Compartment memory layout: buffers from address 0, then one cell that
// saves the local stack pointer while control is away, then code, then a
// local stack growing upward without bound. r_sp points at the next free
// stack slot.
//
// Each procedure gets two entry points. The external one is the target of
// interface-checked Call instructions: it stores the incoming argument into
// the argument cell, recovers r_sp from the save slot, and remembers how to
// put the save slot back when it returns (reentrant cross-calls overwrite
// it). The internal one is the target of the Jal/Jump local-call path and
// skips all of that. Both fall into a shared body; a flag pushed by the
// prologue tells the epilogue which way to leave. On the external way out
// every register except r_com is cleaned; callers never trust a callee to
// have preserved anything, so they stash the argument cell and their stack
// pointer themselves before any cross-compartment call.

#include <map>
#include <string>
#include <vector>

#include "scc/lang.hpp"
#include "scc/machine.hpp"

namespace scc {

struct CompileOptions {
  bool clean_registers = true;  // off: the no-register-clean insecure build
  bool save_sp = true;          // off: the no-spsave insecure build
  bool local_call_opt = true;   // off: local calls go through Call/Return
};

struct UnknownCalleeError : Error {
  UnknownCalleeError(const Name& c, const Name& p) : Error("unknown callee " + c + "." + p) {}
};
struct UnknownBufferError : Error {
  explicit UnknownBufferError(int b) : Error("unknown buffer b" + std::to_string(b)) {}
};

struct Layout {
  std::vector<Word> bufbase;                    // buffer index -> base address
  Word spsave;                                  // == total buffer size
  Word codebase;                                // == spsave + 1
  std::map<Name, std::pair<Word, Word>> entries;  // proc -> (external, internal)
  Word stackbase;                               // == codebase + code length
};

struct CompiledComponent {
  int cidx = 0;
  CompartMem words;
  std::map<int, Word> entrypoints;  // pidx -> external entry
  Layout layout;
  long long code_len = 0;
};

namespace detail {

struct Emitter {
  std::vector<Instr> code;
  struct ProcPatch {
    size_t at;
    Name proc;
    bool internal;
  };
  std::vector<ProcPatch> proc_patches;  // Const at `at` becomes a proc entry address

  size_t here() const { return code.size(); }
  void emit(Instr x) { code.push_back(std::move(x)); }

  // Store *r_sp <- r; r_sp += 1. Uses r_t1; r must not be r_t1.
  void push_from(int r) {
    emit(istore(kRSp, r));
    emit(iconst(1, kRT1));
    emit(ibinop(MOp::Add, kRSp, kRT1, kRSp));
  }
  // r_sp -= 1; r := *r_sp. Uses r_t1 before the load, so r may be r_t1.
  void pop_to(int r) {
    emit(iconst(1, kRT1));
    emit(ibinop(MOp::Sub, kRSp, kRT1, kRSp));
    emit(iload(kRSp, r));
  }
  void clean_all_but_com() {
    for (int r : {kRRa, kRSp, kRT1, kRT2, kRT3}) emit(iconst(0, r));
  }
};

struct CompCtx {
  const ComponentDef* def;
  const IndexMaps* maps;
  int self_cidx;
  std::map<Name, int> local_pidx;  // every procedure, for the de-optimized build
  std::vector<Word> bufbase;
  Word spsave;
  Word codebase;
  CompileOptions opts;
};

inline void compile_expr_into(Emitter& em, const CompCtx& cx, const ExprPtr& e);

inline void emit_cross_call(Emitter& em, const CompCtx& cx, const Word& cidx, const Word& pidx) {
  // argument is in r_com; save the argument cell and (optionally) r_sp
  em.emit(iconst(0, kRT1));
  em.emit(iload(kRT1, kRT2));
  em.push_from(kRT2);
  if (cx.opts.save_sp) {
    em.emit(iconst(cx.spsave, kRT1));
    em.emit(istore(kRT1, kRSp));
  }
  if (cx.opts.clean_registers) em.clean_all_but_com();
  em.emit(icall(cidx, pidx));
  // back: result in r_com; nothing else can be trusted
  if (cx.opts.save_sp) {
    em.emit(iconst(cx.spsave, kRT1));
    em.emit(iload(kRT1, kRSp));
  }
  em.pop_to(kRT2);
  em.emit(iconst(0, kRT1));
  em.emit(istore(kRT1, kRT2));
}

inline void emit_local_call(Emitter& em, const CompCtx& cx, const Name& proc) {
  // argument is in r_com; the callee's internal entry expects the argument
  // cell already written and skips the store/clean/restore steps
  em.emit(iconst(0, kRT1));
  em.emit(iload(kRT1, kRT2));
  em.push_from(kRT2);
  em.emit(iconst(0, kRT1));
  em.emit(istore(kRT1, kRCom));
  em.proc_patches.push_back({em.here(), proc, true});
  em.emit(iconst(0, kRT1));  // patched to the internal entry address
  em.emit(ijal(kRT1));
  em.pop_to(kRT2);
  em.emit(iconst(0, kRT1));
  em.emit(istore(kRT1, kRT2));
}

inline void compile_expr_into(Emitter& em, const CompCtx& cx, const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::Int:
      em.emit(iconst(e->lit, kRCom));
      return;
    case Expr::Kind::Exit:
      em.emit(ihalt());
      return;
    case Expr::Kind::Binop:
      if (e->op == Op::Seq) {
        compile_expr_into(em, cx, e->a);
        compile_expr_into(em, cx, e->b);
        return;
      }
      compile_expr_into(em, cx, e->a);
      em.push_from(kRCom);
      compile_expr_into(em, cx, e->b);
      em.pop_to(kRT1);
      switch (e->op) {
        case Op::Add: em.emit(ibinop(MOp::Add, kRT1, kRCom, kRCom)); break;
        case Op::Sub: em.emit(ibinop(MOp::Sub, kRT1, kRCom, kRCom)); break;
        case Op::Mul: em.emit(ibinop(MOp::Mul, kRT1, kRCom, kRCom)); break;
        case Op::Eq: em.emit(ibinop(MOp::Eq, kRT1, kRCom, kRCom)); break;
        case Op::Leq: em.emit(ibinop(MOp::Leq, kRT1, kRCom, kRCom)); break;
        case Op::Seq: break;
      }
      return;
    case Expr::Kind::If: {
      compile_expr_into(em, cx, e->a);
      size_t bnz_at = em.here();
      em.emit(ibnz(kRCom, 0));  // offset patched below
      compile_expr_into(em, cx, e->c);  // else branch
      size_t jump_at = em.here();
      em.emit(iconst(0, kRT1));  // patched to the join address
      em.emit(ijump(kRT1));
      size_t then_at = em.here();
      compile_expr_into(em, cx, e->b);
      size_t join_at = em.here();
      em.code[bnz_at].imm = Word(then_at - bnz_at);
      em.code[jump_at].imm = cx.codebase + join_at;
      return;
    }
    case Expr::Kind::Read: {
      if (e->buffer < 0 || static_cast<size_t>(e->buffer) >= cx.bufbase.size())
        throw UnknownBufferError(e->buffer);
      compile_expr_into(em, cx, e->a);
      em.emit(iconst(cx.bufbase[e->buffer], kRT1));
      em.emit(ibinop(MOp::Add, kRT1, kRCom, kRT1));
      em.emit(iload(kRT1, kRCom));  // no bounds check
      return;
    }
    case Expr::Kind::Write: {
      if (e->buffer < 0 || static_cast<size_t>(e->buffer) >= cx.bufbase.size())
        throw UnknownBufferError(e->buffer);
      compile_expr_into(em, cx, e->a);
      em.push_from(kRCom);
      compile_expr_into(em, cx, e->b);
      em.pop_to(kRT1);
      em.emit(iconst(cx.bufbase[e->buffer], kRT2));
      em.emit(ibinop(MOp::Add, kRT2, kRT1, kRT1));
      em.emit(istore(kRT1, kRCom));  // no bounds check; value stays in r_com
      return;
    }
    case Expr::Kind::Call: {
      compile_expr_into(em, cx, e->a);
      bool local = e->comp == cx.def->name;
      if (local && cx.opts.local_call_opt) {
        if (!cx.def->procedures.count(e->proc)) throw UnknownCalleeError(e->comp, e->proc);
        emit_local_call(em, cx, e->proc);
        return;
      }
      Word cidx, pidx;
      if (local) {
        auto it = cx.local_pidx.find(e->proc);
        if (it == cx.local_pidx.end()) throw UnknownCalleeError(e->comp, e->proc);
        cidx = cx.self_cidx;
        pidx = it->second;
      } else {
        auto it = cx.maps->proc_index.find({e->comp, e->proc});
        if (it == cx.maps->proc_index.end()) throw UnknownCalleeError(e->comp, e->proc);
        cidx = it->second.first;
        pidx = it->second.second;
      }
      emit_cross_call(em, cx, cidx, pidx);
      return;
    }
  }
}

}  // namespace detail

// Exposed for the contract tests: code for one expression, placed at
// `codebase`, assuming r_sp holds the next free stack slot. Local calls go
// through the Call path here since there is no surrounding procedure block
// to Jal into.
inline std::vector<Instr> compile_expr(const ExprPtr& e, const ComponentDef& def,
                                       const IndexMaps& maps, const Word& codebase,
                                       CompileOptions opts = {}) {
  detail::CompCtx cx;
  cx.def = &def;
  cx.maps = &maps;
  cx.self_cidx = maps.comp_index.count(def.name) ? maps.comp_index.at(def.name) : 0;
  cx.opts = opts;
  cx.opts.local_call_opt = false;
  Word base = 0;
  for (unsigned sz : def.buffers) {
    cx.bufbase.push_back(base);
    base += sz;
  }
  cx.spsave = base;
  cx.codebase = codebase;
  std::vector<Name> order;
  if (cx.self_cidx < static_cast<int>(maps.proc_names.size()))
    order = maps.proc_names[cx.self_cidx];
  for (const auto& [pname, _] : def.procedures)
    if (!def.iface.exports.count(pname)) order.push_back(pname);
  for (size_t i = 0; i < order.size(); ++i) cx.local_pidx[order[i]] = static_cast<int>(i);
  detail::Emitter em;
  detail::compile_expr_into(em, cx, e);
  return em.code;
}

inline CompiledComponent compile_component(const ComponentDef& def, const IndexMaps& maps,
                                           CompileOptions opts = {}) {
  CompiledComponent out;
  out.cidx = maps.comp_index.at(def.name);

  detail::CompCtx cx;
  cx.def = &def;
  cx.maps = &maps;
  cx.self_cidx = out.cidx;
  cx.opts = opts;
  Word base = 0;
  for (unsigned sz : def.buffers) {
    cx.bufbase.push_back(base);
    out.layout.bufbase.push_back(base);
    base += sz;
  }
  cx.spsave = base;
  cx.codebase = base + 1;
  out.layout.spsave = cx.spsave;
  out.layout.codebase = cx.codebase;

  // exported procedures first, in pidx order, then private ones
  std::vector<Name> order = maps.proc_names[out.cidx];
  for (const auto& [pname, _] : def.procedures)
    if (!def.iface.exports.count(pname)) order.push_back(pname);
  for (size_t i = 0; i < order.size(); ++i) cx.local_pidx[order[i]] = static_cast<int>(i);

  detail::Emitter em;
  std::map<Name, std::pair<size_t, size_t>> entry_offsets;  // proc -> (ext, int)
  for (const Name& pname : order) {
    auto body_it = def.procedures.find(pname);
    internal_check(body_it != def.procedures.end(), "exported procedure without body at codegen");
    size_t ext_at = em.here();
    // external prologue
    em.emit(iconst(0, kRT1));
    em.emit(istore(kRT1, kRCom));        // argument cell := r_com
    em.emit(iconst(cx.spsave, kRT1));
    em.emit(iload(kRT1, kRSp));          // recover own stack pointer
    em.push_from(kRSp);                  // remember it for the way out
    em.emit(iconst(0, kRT1));
    em.push_from(kRT1);                  // flag 0: external entry
    size_t ext_jump_at = em.here();
    em.emit(iconst(0, kRT1));            // patched to the body address
    em.emit(ijump(kRT1));
    size_t int_at = em.here();
    // internal prologue
    em.push_from(kRRa);
    em.emit(iconst(1, kRT1));
    em.push_from(kRT1);                  // flag 1: internal entry
    size_t body_at = em.here();
    em.code[ext_jump_at].imm = cx.codebase + body_at;
    detail::compile_expr_into(em, cx, body_it->second);
    // epilogue: dispatch on the entry flag
    em.pop_to(kRT1);
    size_t bnz_at = em.here();
    em.emit(ibnz(kRT1, 0));
    em.pop_to(kRT2);                     // entry-time stack pointer
    em.emit(iconst(cx.spsave, kRT1));
    em.emit(istore(kRT1, kRT2));         // put the save slot back
    if (opts.clean_registers) em.clean_all_but_com();
    em.emit(iret());
    size_t intret_at = em.here();
    em.code[bnz_at].imm = Word(intret_at - bnz_at);
    em.pop_to(kRT1);                     // saved return address
    em.emit(ijump(kRT1));
    entry_offsets[pname] = {ext_at, int_at};
  }

  for (const auto& patch : em.proc_patches) {
    auto it = entry_offsets.find(patch.proc);
    internal_check(it != entry_offsets.end(), "unresolved local entry patch");
    em.code[patch.at].imm = cx.codebase + (patch.internal ? it->second.second : it->second.first);
  }

  out.code_len = static_cast<long long>(em.code.size());
  out.layout.stackbase = cx.codebase + out.code_len;
  out.words.store(cx.spsave, out.layout.stackbase);
  for (size_t i = 0; i < em.code.size(); ++i) out.words.store(cx.codebase + i, encode(em.code[i]));
  for (const auto& [pname, offs] : entry_offsets)
    out.layout.entries[pname] = {cx.codebase + offs.first, cx.codebase + offs.second};
  // exported entry points; the de-optimized build exposes every procedure
  // so that same-compartment Call instructions resolve
  const auto& pidx_names = maps.proc_names[out.cidx];
  for (size_t pidx = 0; pidx < pidx_names.size(); ++pidx)
    out.entrypoints[static_cast<int>(pidx)] = cx.codebase + entry_offsets.at(pidx_names[pidx]).first;
  if (!opts.local_call_opt)
    for (const auto& [pname, lp] : cx.local_pidx)
      out.entrypoints[lp] = cx.codebase + entry_offsets.at(pname).first;
  return out;
}

inline Image compile_program(const PartialProgram& p, const IndexMaps& maps,
                             CompileOptions opts = {}) {
  Image img;
  for (const auto& [name, def] : p.defs) {
    CompiledComponent cc = compile_component(def, maps, opts);
    img.mem0[cc.cidx] = cc.words;
    img.entry[cc.cidx] = cc.entrypoints;
    img.names[cc.cidx] = name;
    img.name_index[name] = cc.cidx;
    IfaceIdx iface;
    for (const auto& e : def.iface.exports) iface.exports.insert(maps.proc_index.at({name, e}).second);
    for (const auto& ref : def.iface.imports) iface.imports.insert(maps.proc_index.at(ref));
    img.psi[cc.cidx] = std::move(iface);
  }
  return img;
}

// Security measures switchable off, for the attack regression suite only.
inline Image compile_insecure(const PartialProgram& p, const IndexMaps& maps, bool no_clean,
                              bool no_spsave, bool no_local_opt = false) {
  CompileOptions opts;
  opts.clean_registers = !no_clean;
  opts.save_sp = !no_spsave;
  opts.local_call_opt = !no_local_opt;
  return compile_program(p, maps, opts);
}

inline Image compile_whole(const PartialProgram& w, CompileOptions opts = {}) {
  return compile_program(w, IndexMaps::from_program(w), opts);
}

}  // namespace scc
