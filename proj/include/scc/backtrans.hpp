#pragma once

// Definability: map a canonical fine-grained trace and a distinguishing
// action gamma1 to a fully defined high-level context that replays the
// trace's context actions and then terminates on actions ζ-matching gamma1,
// diverging on everything else.
//
// Every generated component keeps a step counter in b0[1] and its argument
// in b0[0]. Each exported procedure increments the counter on entry and
// dispatches on it: the k-th entry of the component runs the k-th scripted
// activation (its internal calls, external calls, and final return or exit,
// with all arguments frozen as literals from the trace). Entries and
// resumptions beyond the script fall into a self-call loop, which is how the
// context stays silent after actions it must reject. Only the r_com value of
// a trace event matters to the construction; source code cannot observe the
// other registers, which is exactly why canonical traces suffice.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scc/compile.hpp"
#include "scc/trace.hpp"

namespace scc {

struct NonCanonicalTraceError : Error {
  explicit NonCanonicalTraceError(size_t at)
      : Error("context action " + std::to_string(at) + " is not canonical") {}
};
struct NonReplayableTraceError : Error {
  explicit NonReplayableTraceError(const std::string& what) : Error("non-replayable trace: " + what) {}
};

struct BacktransInput {
  FineTrace fine;
  ActPayload gamma1;
  Shape shape;
};

struct BacktransOutput {
  PartialProgram context;
  std::string report;
};

namespace detail {

struct ScriptStep {
  bool external;  // call into the program vs a context-internal call
  Name comp, proc;
  Word arg;
};

struct Activation {
  Name comp;
  Name entered_proc;
  int ordinal = 0;          // per-component entry index
  Word arg;
  bool entered_externally = true;
  bool initial = false;     // the context-owned Main.main start
  std::vector<ScriptStep> steps;
  enum class Final { Open, ReturnValue, Exit } final_kind = Final::Open;
  Word final_value;
  bool ret_decision = false;  // post-trace program Return lands after my last call
};

struct Walk {
  std::vector<Activation> acts;
  std::map<Name, int> next_ordinal;
  std::optional<size_t> ret_decision_idx;
};

inline Walk walk_fine_trace(const BacktransInput& in, const SideInfo& info) {
  const auto& maps = info.maps;
  Walk w;
  std::vector<size_t> open;          // indices into w.acts, innermost last
  std::vector<size_t> pending;       // open activations awaiting a program return
  Side turn = info.main_owner;

  auto comp_name = [&](int cidx) -> const Name& { return maps.comp_names.at(cidx); };
  auto proc_name = [&](int cidx, int pidx) -> const Name& {
    const auto& procs = maps.proc_names.at(cidx);
    if (pidx < 0 || static_cast<size_t>(pidx) >= procs.size())
      throw NonReplayableTraceError("procedure index out of range");
    return procs[pidx];
  };
  auto imports_of = [&](const Name& c) -> const std::set<ProcRef>& {
    return in.shape.interfaces.at(c).imports;
  };
  auto open_activation = [&](int cidx, int pidx, Word arg, bool external, bool initial) {
    Activation a;
    a.comp = comp_name(cidx);
    a.entered_proc = proc_name(cidx, pidx);
    a.ordinal = w.next_ordinal[a.comp]++;
    a.arg = std::move(arg);
    a.entered_externally = external;
    a.initial = initial;
    open.push_back(w.acts.size());
    w.acts.push_back(std::move(a));
  };

  if (info.main_owner == Side::Context)
    open_activation(maps.comp_index.at(kMainComponent), 0, 0, false, true);

  size_t ext_index = 0;
  for (size_t i = 0; i < in.fine.size(); ++i) {
    const FineEvent& ev = in.fine[i];
    if (ev.internal) {
      if (ev.owner == Side::Program) continue;  // invisible to the construction
      if (turn != Side::Context) throw NonReplayableTraceError("context internal event out of turn");
      if (open.empty()) throw NonReplayableTraceError("internal event with no running activation");
      Activation& top = w.acts[open.back()];
      if (ev.act.pay.kind == ActPayload::Kind::Call) {
        int c = ev.act.pay.cidx, p = ev.act.pay.pidx;
        if (info.side(c) != Side::Context)
          throw NonReplayableTraceError("internal call crosses to the program side");
        if (!imports_of(top.comp).count({comp_name(c), proc_name(c, p)}))
          throw NonReplayableTraceError(top.comp + " lacks the import for an internal call");
        top.steps.push_back({false, comp_name(c), proc_name(c, p), ev.act.pay.regs[kRCom]});
        open_activation(c, p, ev.act.pay.regs[kRCom], false, false);
      } else if (ev.act.pay.kind == ActPayload::Kind::Ret) {
        if (top.entered_externally || top.initial)
          throw NonReplayableTraceError("internal return from an externally entered activation");
        top.final_kind = Activation::Final::ReturnValue;
        top.final_value = ev.act.pay.regs[kRCom];
        open.pop_back();
      } else {
        throw NonReplayableTraceError("internal tick");
      }
      continue;
    }

    const ExtAction& act = ev.act;
    bool program_turn = turn == Side::Program;
    if (act.program_move != program_turn)
      throw MalformedTraceError("action " + std::to_string(ext_index) + " out of turn");
    if (!act.program_move && act.pay.kind != ActPayload::Kind::Tick &&
        !action_canonical(act.pay))
      throw NonCanonicalTraceError(ext_index);
    ++ext_index;

    switch (act.pay.kind) {
      case ActPayload::Kind::Call: {
        int c = act.pay.cidx, p = act.pay.pidx;
        if (act.program_move) {
          if (info.side(c) != Side::Context)
            throw NonReplayableTraceError("program call does not enter the context");
          open_activation(c, p, act.pay.regs[kRCom], true, false);
        } else {
          if (info.side(c) != Side::Program)
            throw NonReplayableTraceError("context call does not enter the program");
          if (open.empty()) throw NonReplayableTraceError("context call with no running activation");
          Activation& top = w.acts[open.back()];
          if (!imports_of(top.comp).count({comp_name(c), proc_name(c, p)}))
            throw NonReplayableTraceError(top.comp + " lacks the import for an external call");
          top.steps.push_back({true, comp_name(c), proc_name(c, p), act.pay.regs[kRCom]});
          pending.push_back(open.back());
        }
        turn = flip(turn);
        break;
      }
      case ActPayload::Kind::Ret: {
        if (act.program_move) {
          if (pending.empty()) throw NonReplayableTraceError("program return with no pending call");
          if (open.empty() || pending.back() != open.back())
            throw NonReplayableTraceError("program return does not resume the innermost caller");
          pending.pop_back();
        } else {
          if (open.empty()) throw NonReplayableTraceError("context return with no running activation");
          Activation& top = w.acts[open.back()];
          if (!top.entered_externally)
            throw NonReplayableTraceError("external return from an internally entered activation");
          top.final_kind = Activation::Final::ReturnValue;
          top.final_value = act.pay.regs[kRCom];
          open.pop_back();
        }
        turn = flip(turn);
        break;
      }
      case ActPayload::Kind::Tick: {
        if (i + 1 != in.fine.size()) throw MalformedTraceError("tick before the end");
        if (!act.program_move) {
          if (!open.empty()) w.acts[open.back()].final_kind = Activation::Final::Exit;
        }
        turn = flip(turn);  // nothing follows anyway
        break;
      }
    }
  }

  // Validate that gamma1 extends the trace as a program move.
  bool ends_tick = !in.fine.empty() && !in.fine.back().internal &&
                   in.fine.back().act.pay.kind == ActPayload::Kind::Tick;
  if (ends_tick) throw NonReplayableTraceError("gamma1 cannot follow a tick");
  if (turn != Side::Program) throw NonReplayableTraceError("gamma1 is not a program move here");
  switch (in.gamma1.kind) {
    case ActPayload::Kind::Call: {
      int c = in.gamma1.cidx;
      if (c < 0 || static_cast<size_t>(c) >= info.side_of.size() || info.side(c) != Side::Context)
        throw NonReplayableTraceError("gamma1 call does not enter the context");
      proc_name(c, in.gamma1.pidx);
      break;
    }
    case ActPayload::Kind::Ret:
      if (pending.empty())
        throw NonReplayableTraceError("gamma1 return with no pending context call");
      w.ret_decision_idx = pending.back();
      w.acts[*w.ret_decision_idx].ret_decision = true;
      break;
    case ActPayload::Kind::Tick:
      break;
  }
  return w;
}

}  // namespace detail

inline BacktransOutput backtranslate(const BacktransInput& in) {
  SideInfo info = SideInfo::from_shape(in.shape);
  detail::Walk w = detail::walk_fine_trace(in, info);
  const IndexMaps& maps = info.maps;

  BacktransOutput out;
  std::ostringstream report;

  std::optional<std::pair<Name, Name>> call_decision;  // component/proc of a Call gamma1
  if (in.gamma1.kind == ActPayload::Kind::Call) {
    const Name& c = maps.comp_names.at(in.gamma1.cidx);
    call_decision = {c, maps.proc_names.at(in.gamma1.cidx).at(in.gamma1.pidx)};
  }

  for (const auto& [cname, iface] : in.shape.interfaces) {
    if (in.shape.uncompromised.count(cname)) continue;

    ComponentDef def;
    def.name = cname;
    def.iface = iface;
    def.buffers = {2};  // b0[0]: argument, b0[1]: step counter

    Name loop_proc = "div";
    while (iface.exports.count(loop_proc) || loop_proc == kMainProc) loop_proc += "_";
    auto loop_call = [&] { return ecall(cname, loop_proc, eint(0)); };
    def.procedures[loop_proc] = ecall(cname, loop_proc, eint(0));

    report << "component " << cname << ":\n";

    // script expression of one activation
    auto script_expr = [&](const detail::Activation& a) -> ExprPtr {
      std::vector<ExprPtr> calls;
      for (const auto& st : a.steps) calls.push_back(ecall(st.comp, st.proc, eint(st.arg)));
      ExprPtr tail;
      switch (a.final_kind) {
        case detail::Activation::Final::ReturnValue: tail = eint(a.final_value); break;
        case detail::Activation::Final::Exit: tail = eexit(); break;
        case detail::Activation::Final::Open: {
          if (a.ret_decision) {
            internal_check(!calls.empty(), "return decision without a pending call");
            ExprPtr guard = ebinop(Op::Eq, calls.back(), eint(in.gamma1.regs[kRCom]));
            calls.pop_back();
            tail = eif(std::move(guard), eexit(), loop_call());
          } else {
            tail = loop_call();
          }
          break;
        }
      }
      for (auto it = calls.rbegin(); it != calls.rend(); ++it) tail = eseq(*it, tail);
      return tail;
    };

    for (const auto& pname : iface.exports) {
      // collect this procedure's slots in ordinal order
      std::vector<std::pair<int, ExprPtr>> slots;
      for (const auto& a : w.acts) {
        if (a.comp != cname || a.entered_proc != pname) continue;
        slots.push_back({a.ordinal, script_expr(a)});
        report << "  entry " << a.ordinal << " via " << pname << " (arg " << a.arg << "): "
               << a.steps.size() << " call(s), "
               << (a.final_kind == detail::Activation::Final::ReturnValue
                       ? "return " + a.final_value.str()
                       : a.final_kind == detail::Activation::Final::Exit
                             ? std::string("exit")
                             : a.ret_decision ? std::string("return-decision") : std::string("open"))
               << "\n";
      }
      if (call_decision && call_decision->first == cname && call_decision->second == pname) {
        int k = w.next_ordinal.count(cname) ? w.next_ordinal[cname] : 0;
        slots.push_back({k, eif(ebinop(Op::Eq, eread(0, eint(0)), eint(in.gamma1.regs[kRCom])),
                                eexit(), loop_call())});
        report << "  decision entry " << k << " via " << pname << ": arg == "
               << in.gamma1.regs[kRCom] << " ? exit : diverge\n";
      }
      // innermost default: any unscripted entry diverges
      ExprPtr chain = loop_call();
      for (auto it = slots.rbegin(); it != slots.rend(); ++it)
        chain = eif(ebinop(Op::Eq, eread(0, eint(1)), eint(it->first + 1)), it->second,
                    std::move(chain));
      ExprPtr body = eseq(ewrite(0, eint(1), ebinop(Op::Add, eread(0, eint(1)), eint(1))),
                          std::move(chain));
      def.procedures[pname] = std::move(body);
    }

    out.context.defs.emplace(cname, std::move(def));
  }

  out.report = report.str();
  internal_check(has_shape_context(out.context, in.shape), "backtranslated context has wrong shape");
  return out;
}

struct DefinabilityReport {
  bool pre_ok = false;          // the witness really has t.gamma1!
  Membership clause1;           // t is a trace of the compiled context
  Membership clause2;           // t.gamma1!.tick? accepted (or gamma1 == tick)
  bool clause2_applicable = false;
  int clause3_checked = 0;      // sampled differing actions all left the context silent
  int clause3_failures = 0;
  bool unknown = false;
  std::string note;

  bool all_pass() const {
    return pre_ok && clause1.yes() && (!clause2_applicable || clause2.yes()) &&
           clause3_failures == 0 && !unknown;
  }
};

// Operational check of the three definability clauses, QuickCheck style.
inline DefinabilityReport verify_definability(const BacktransOutput& out, const BacktransInput& in,
                                              const Image& witness, long long fuel) {
  DefinabilityReport rep;
  SideInfo info = SideInfo::from_shape(in.shape);
  Trace t = erase_internals(in.fine);
  Trace t_g1 = t;
  t_g1.push_back({in.gamma1, true});

  Membership pre = program_has_trace(witness, in.shape, t_g1, fuel);
  if (pre.kind == Membership::Kind::UnknownFuel) {
    rep.unknown = true;
    rep.note = "witness replay inconclusive";
    return rep;
  }
  rep.pre_ok = pre.yes();

  Image compiled = compile_program(out.context, IndexMaps::from_shape(in.shape));
  rep.clause1 = context_has_trace(compiled, in.shape, t, fuel);
  if (rep.clause1.kind == Membership::Kind::UnknownFuel) rep.unknown = true;

  if (in.gamma1.kind != ActPayload::Kind::Tick) {
    rep.clause2_applicable = true;
    Trace t2 = t_g1;
    t2.push_back({make_tick(), false});
    rep.clause2 = context_has_trace(compiled, in.shape, t2, fuel);
    if (rep.clause2.kind == Membership::Kind::UnknownFuel) rep.unknown = true;
  }

  // clause 3: sampled program actions that differ under zeta must leave the
  // context without any further move
  std::vector<ActPayload> candidates;
  {
    ActPayload g = in.gamma1;
    if (g.kind != ActPayload::Kind::Tick) {
      ActPayload h = g;
      h.regs[kRCom] += 1;
      candidates.push_back(h);
      h.regs[kRCom] = g.regs[kRCom] + 100;
      candidates.push_back(h);
    }
    candidates.push_back(make_ret(RegFile{}));  // kind flip when gamma1 is a call
    for (const auto& [cidx, iface] : info.psi) {
      if (info.side(cidx) != Side::Context) continue;
      for (int pidx : iface.exports) {
        candidates.push_back(make_call(cidx, pidx, RegFile{}));
        if (candidates.size() > 12) break;
      }
    }
  }
  for (const auto& g : candidates) {
    if (canonicalize_action(g) == canonicalize_action(in.gamma1)) continue;
    Trace probe = t;
    probe.push_back({g, true});
    Membership m = context_has_trace(compiled, in.shape, probe, fuel);
    if (m.kind == Membership::Kind::UnknownFuel) {
      rep.unknown = true;
      continue;
    }
    if (!m.yes()) continue;  // not realizable against this context's shape
    ++rep.clause3_checked;
    NextAction nx = next_context_action(compiled, in.shape, probe, fuel);
    if (nx.kind == NextAction::Kind::UnknownFuel) {
      rep.unknown = true;
    } else if (nx.kind == NextAction::Kind::Action) {
      ++rep.clause3_failures;
      rep.note = "context answered after a differing action";
    }
  }
  return rep;
}

}  // namespace scc
