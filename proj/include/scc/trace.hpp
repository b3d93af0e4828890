#pragma once

// Two-player trace semantics over shapes.
//
// A trace is an alternating word of external actions: cross-side Call/Return
// instructions carrying the full register file, plus a final tick when one
// side halts. decompose records the trace of a real linked run; the
// membership drivers replay one side concretely while the opponent's moves
// are injected from the trace. Injected moves are checked against the shape,
// not against any concrete opponent: a context move must be a call some
// reachable context compartment is privileged to make, where reachability
// follows cross-compartment calls and returns within the context since the
// last transfer.
//
// The driver keeps a model of the protected call stack. Frames pushed by the
// concrete side are exact; frames pushed by injected calls carry the set of
// compartments the opponent could have called from. Frames of the opponent
// sitting above the topmost concrete frame are the ones the opponent can
// still pop internally, so their sets feed reachability.

#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scc/machine.hpp"

namespace scc {

enum class Side { Program, Context };

inline Side flip(Side s) { return s == Side::Program ? Side::Context : Side::Program; }

struct ActPayload {
  enum class Kind { Call, Ret, Tick };
  Kind kind = Kind::Tick;
  int cidx = 0, pidx = 0;  // Call target
  RegFile regs{};

  bool operator==(const ActPayload& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::Tick) return true;
    if (kind == Kind::Call && (cidx != o.cidx || pidx != o.pidx)) return false;
    return regs == o.regs;
  }
};

inline ActPayload make_call(int c, int p, RegFile regs) {
  ActPayload a;
  a.kind = ActPayload::Kind::Call;
  a.cidx = c;
  a.pidx = p;
  a.regs = std::move(regs);
  return a;
}
inline ActPayload make_ret(RegFile regs) {
  ActPayload a;
  a.kind = ActPayload::Kind::Ret;
  a.regs = std::move(regs);
  return a;
}
inline ActPayload make_tick() { return {}; }

struct ExtAction {
  ActPayload pay;
  bool program_move = true;  // true: gamma!, false: gamma?

  bool operator==(const ExtAction& o) const { return program_move == o.program_move && pay == o.pay; }
};

using Trace = std::vector<ExtAction>;

struct FineEvent {
  bool internal = false;
  Side owner = Side::Program;  // for internal events
  ExtAction act;               // for internal events only the payload matters
};

using FineTrace = std::vector<FineEvent>;

inline Trace erase_internals(const FineTrace& f) {
  Trace t;
  for (const auto& ev : f)
    if (!ev.internal) t.push_back(ev.act);
  return t;
}

// zeta: clear every register but r_com in an action's file.
inline ActPayload canonicalize_action(ActPayload g) {
  if (g.kind == ActPayload::Kind::Tick) return g;
  for (int r = 0; r < kNumRegs; ++r)
    if (r != kRCom) g.regs[r] = 0;
  return g;
}

// zeta-circle: canonicalize context moves only.
inline Trace canonicalize_trace(Trace t) {
  for (auto& a : t)
    if (!a.program_move) a.pay = canonicalize_action(a.pay);
  return t;
}

inline bool action_canonical(const ActPayload& g) { return g == canonicalize_action(g); }

struct MalformedTraceError : Error {
  explicit MalformedTraceError(const std::string& what) : Error("malformed trace: " + what) {}
};
struct ShapeMismatchError : Error {
  explicit ShapeMismatchError(const std::string& what) : Error("shape mismatch: " + what) {}
};
struct NotTurnError : Error {
  explicit NotTurnError(const std::string& what) : Error(what) {}
};
struct PreconditionUnmetError : Error {
  explicit PreconditionUnmetError(const std::string& what) : Error("precondition unmet: " + what) {}
};

// Index-level view of a shape shared by all trace machinery.
struct SideInfo {
  IndexMaps maps;
  std::map<int, IfaceIdx> psi;
  std::vector<Side> side_of;
  Side main_owner = Side::Program;

  static SideInfo from_shape(const Shape& s) {
    SideInfo info;
    info.maps = IndexMaps::from_shape(s);
    info.side_of.resize(info.maps.comp_names.size(), Side::Context);
    for (const auto& [name, iface] : s.interfaces) {
      int cidx = info.maps.comp_index.at(name);
      info.side_of[cidx] = s.uncompromised.count(name) ? Side::Program : Side::Context;
      IfaceIdx ii;
      for (const auto& e : iface.exports) ii.exports.insert(info.maps.proc_index.at({name, e}).second);
      for (const auto& ref : iface.imports) ii.imports.insert(info.maps.proc_index.at(ref));
      info.psi[cidx] = std::move(ii);
    }
    auto it = info.maps.comp_index.find(kMainComponent);
    if (it == info.maps.comp_index.end()) throw ShapeMismatchError("shape has no Main");
    info.main_owner = info.side_of[it->second];
    return info;
  }

  Side side(int cidx) const { return side_of.at(static_cast<size_t>(cidx)); }
  Side side(const Word& cidx) const {
    internal_check(cidx >= 0 && cidx < Word(side_of.size()), "compartment index out of shape");
    return side_of[static_cast<size_t>(cidx)];
  }
};

// Checks alternation (starting with the main owner), and that a tick can
// only end the trace.
inline void validate_trace(const Trace& t, const SideInfo& info) {
  bool program_turn = info.main_owner == Side::Program;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i].program_move != program_turn)
      throw MalformedTraceError("action " + std::to_string(i) + " out of turn");
    if (t[i].pay.kind == ActPayload::Kind::Tick && i + 1 != t.size())
      throw MalformedTraceError("tick before the end");
    program_turn = !program_turn;
  }
}

struct Membership {
  enum class Kind { Yes, No, UnknownFuel };
  Kind kind = Kind::Yes;
  size_t at = 0;  // index of the offending action
  std::string why;

  bool yes() const { return kind == Kind::Yes; }
  bool operator==(const Membership& o) const { return kind == o.kind; }
};

namespace detail {

// Drives one side of the game concretely against injected opponent moves.
class SideDriver {
 public:
  SideDriver(const Image& own, Side own_side, const SideInfo& info, long long fuel)
      : own_(own), own_side_(own_side), info_(info), fuel_(fuel) {
    mem_ = own.mem0;
    reg_.fill(Word(0));
    int main_cidx = info_.maps.comp_index.at(kMainComponent);
    our_turn_ = info_.main_owner == own_side;
    if (our_turn_) {
      const Word* e = own_.entry_of(main_cidx, 0);
      internal_check(e != nullptr, "main entry missing in shaped image");
      current_ = main_cidx;
      pc_ = *e;
    } else {
      opp_poss_ = {main_cidx};
    }
  }

  bool our_turn() const { return our_turn_; }
  bool game_over() const { return game_over_; }
  long long fuel_left() const { return fuel_; }

  struct Produced {
    enum class Kind { Action, FuelOut };
    Kind kind = Kind::FuelOut;
    ActPayload act;
  };

  using InternalHook = std::function<void(Side, const ActPayload&)>;

  // Run our side until it emits an external action (or halts: a tick).
  Produced run_until_external(const InternalHook& on_internal = nullptr) {
    internal_check(our_turn_ && !game_over_, "driver run out of turn");
    while (fuel_-- > 0) {
      if (pc_ < 0) return tick();
      const Word* w = mem_[current_].fetch(pc_);
      if (!w) return tick();
      auto dec = decode(*w);
      if (!dec) return tick();
      const Instr& x = *dec;
      switch (x.kind) {
        case Instr::Kind::Nop:
          pc_ += 1;
          break;
        case Instr::Kind::Const:
          reg_[x.rd] = x.imm;
          pc_ += 1;
          break;
        case Instr::Kind::Mov:
          reg_[x.rd] = reg_[x.r1];
          pc_ += 1;
          break;
        case Instr::Kind::Load: {
          if (reg_[x.r1] < 0) return tick();
          reg_[x.rd] = mem_[current_].load(reg_[x.r1]);
          pc_ += 1;
          break;
        }
        case Instr::Kind::Store: {
          if (reg_[x.r1] < 0) return tick();
          mem_[current_].store(reg_[x.r1], reg_[x.r2]);
          pc_ += 1;
          break;
        }
        case Instr::Kind::Jump:
          pc_ = reg_[x.r1];
          break;
        case Instr::Kind::Jal:
          reg_[kRRa] = pc_ + 1;
          pc_ = reg_[x.r1];
          break;
        case Instr::Kind::Bnz:
          pc_ = (reg_[x.r1] != 0) ? Word(pc_ + x.imm) : Word(pc_ + 1);
          break;
        case Instr::Kind::Binop: {
          Word v = mapply(x.bop, reg_[x.r1], reg_[x.r2]);
          if (too_wide(v)) return {Produced::Kind::FuelOut};
          reg_[x.rd] = std::move(v);
          pc_ += 1;
          break;
        }
        case Instr::Kind::Halt:
          return tick();
        case Instr::Kind::Call: {
          bool own_call = x.cidx >= 0 && x.cidx == current_;
          if (!own_call) {
            auto it = info_.psi.find(current_);
            if (it == info_.psi.end() || x.cidx < 0 || x.cidx >= Word(info_.side_of.size()) ||
                x.pidx < 0 || x.pidx > 1 << 30 ||
                !it->second.imports.count({static_cast<int>(x.cidx), static_cast<int>(x.pidx)}))
              return tick();
          }
          int c = static_cast<int>(x.cidx);
          int p = static_cast<int>(x.pidx);
          if (info_.side(c) == own_side_) {
            const Word* e = own_.entry_of(c, p);
            if (!e) return tick();
            stack_.push_back(Frame{true, current_, Word(pc_ + 1), {}});
            if (c != current_ && on_internal) on_internal(own_side_, make_call(c, p, reg_));
            current_ = c;
            pc_ = *e;
          } else {
            stack_.push_back(Frame{true, current_, Word(pc_ + 1), {}});
            our_turn_ = false;
            opp_poss_ = {c};
            return {Produced::Kind::Action, make_call(c, p, reg_)};
          }
          break;
        }
        case Instr::Kind::Return: {
          if (stack_.empty()) return tick();
          Frame f = stack_.back();
          stack_.pop_back();
          if (f.ours) {
            if (f.cidx != current_ && on_internal) on_internal(own_side_, make_ret(reg_));
            current_ = f.cidx;
            pc_ = f.pc;
          } else {
            our_turn_ = false;
            opp_poss_ = f.theirs;
            return {Produced::Kind::Action, make_ret(reg_)};
          }
          break;
        }
      }
    }
    fuel_ = 0;
    return {Produced::Kind::FuelOut};
  }

  // Inject an opponent move; false when no opponent of the dual shape could
  // perform it here.
  bool inject(const ActPayload& g) {
    internal_check(!our_turn_ && !game_over_, "injection out of turn");
    if (g.kind == ActPayload::Kind::Tick) {
      game_over_ = true;
      return true;
    }
    if (g.kind == ActPayload::Kind::Call) {
      if (g.cidx < 0 || static_cast<size_t>(g.cidx) >= info_.side_of.size()) return false;
      if (info_.side(g.cidx) != own_side_) return false;
      std::set<int> reach = opp_reach();
      std::set<int> callers;
      for (int cc : reach) {
        auto it = info_.psi.find(cc);
        if (it != info_.psi.end() && it->second.imports.count({g.cidx, g.pidx})) callers.insert(cc);
      }
      if (callers.empty()) return false;
      const Word* e = own_.entry_of(g.cidx, g.pidx);
      if (!e) return false;
      stack_.push_back(Frame{false, 0, 0, std::move(callers)});
      reg_ = g.regs;
      current_ = g.cidx;
      pc_ = *e;
      our_turn_ = true;
      return true;
    }
    // Ret: the opponent pops its own pending frames, then ours.
    size_t i = stack_.size();
    while (i > 0 && !stack_[i - 1].ours) --i;
    if (i == 0) return false;
    Frame f = stack_[i - 1];
    stack_.resize(i - 1);
    reg_ = g.regs;
    current_ = f.cidx;
    pc_ = f.pc;
    our_turn_ = true;
    return true;
  }

 private:
  struct Frame {
    bool ours;
    int cidx;
    Word pc;
    std::set<int> theirs;  // possible opponent callers
  };

  Produced tick() {
    game_over_ = true;
    return {Produced::Kind::Action, make_tick()};
  }

  // Compartments the opponent can currently be in or reach: its current
  // possibilities, everything recoverable by popping its own top frames,
  // closed under its internal import edges.
  std::set<int> opp_reach() const {
    std::set<int> r = opp_poss_;
    for (auto it = stack_.rbegin(); it != stack_.rend() && !it->ours; ++it)
      r.insert(it->theirs.begin(), it->theirs.end());
    bool grew = true;
    while (grew) {
      grew = false;
      std::vector<int> snapshot(r.begin(), r.end());
      for (int c : snapshot) {
        auto it = info_.psi.find(c);
        if (it == info_.psi.end()) continue;
        for (const auto& [ic, ip] : it->second.imports)
          if (info_.side(ic) != own_side_ && r.insert(ic).second) grew = true;
      }
    }
    return r;
  }

  const Image& own_;
  Side own_side_;
  const SideInfo& info_;
  long long fuel_;
  std::map<int, CompartMem> mem_;
  RegFile reg_;
  int current_ = -1;
  Word pc_;
  std::vector<Frame> stack_;
  std::set<int> opp_poss_;
  bool our_turn_ = false;
  bool game_over_ = false;
};

inline Membership drive_trace(SideDriver& d, Side own_side, const SideInfo& info, const Trace& t) {
  validate_trace(t, info);
  for (size_t i = 0; i < t.size(); ++i) {
    const ExtAction& act = t[i];
    if (d.game_over()) return {Membership::Kind::No, i, "action after the game ended"};
    bool ours = act.program_move == (own_side == Side::Program);
    if (ours) {
      internal_check(d.our_turn(), "trace validated but turn mismatch");
      auto prod = d.run_until_external();
      if (prod.kind == SideDriver::Produced::Kind::FuelOut)
        return {Membership::Kind::UnknownFuel, i, "internal step budget exhausted"};
      if (!(prod.act == act.pay)) return {Membership::Kind::No, i, "produced a different action"};
    } else {
      internal_check(!d.our_turn(), "trace validated but turn mismatch");
      if (!d.inject(act.pay)) return {Membership::Kind::No, i, "injected move violates the shape"};
    }
  }
  return {Membership::Kind::Yes};
}

inline Membership has_trace(const Image& own, Side own_side, const SideInfo& info, const Trace& t,
                            long long fuel) {
  SideDriver d(own, own_side, info, fuel);
  return drive_trace(d, own_side, info, t);
}

}  // namespace detail

inline Membership program_has_trace(const Image& p, const Shape& s, const Trace& t, long long fuel) {
  SideInfo info = SideInfo::from_shape(s);
  if (!image_has_shape(p, s, info.maps, true)) throw ShapeMismatchError("p does not have shape *s");
  return detail::has_trace(p, Side::Program, info, t, fuel);
}

inline Membership context_has_trace(const Image& a, const Shape& s, const Trace& t, long long fuel) {
  SideInfo info = SideInfo::from_shape(s);
  if (!image_has_shape(a, s, info.maps, false)) throw ShapeMismatchError("a does not have shape os");
  return detail::has_trace(a, Side::Context, info, t, fuel);
}

struct NextAction {
  enum class Kind { Action, Silent, UnknownFuel };
  Kind kind = Kind::Silent;
  ActPayload act;
};

namespace detail {
inline NextAction next_action(const Image& own, Side own_side, const SideInfo& info, const Trace& t,
                              long long fuel) {
  SideDriver d(own, own_side, info, fuel);
  Membership m = drive_trace(d, own_side, info, t);
  if (m.kind == Membership::Kind::UnknownFuel) return {NextAction::Kind::UnknownFuel};
  internal_check(m.yes(), "next_action on a trace the side does not have");
  if (d.game_over() || !d.our_turn())
    throw NotTurnError(own_side == Side::Program ? "not the program's turn" : "not the context's turn");
  auto prod = d.run_until_external();
  if (prod.kind == SideDriver::Produced::Kind::FuelOut) return {NextAction::Kind::Silent};
  return {NextAction::Kind::Action, prod.act};
}
}  // namespace detail

inline NextAction next_program_action(const Image& p, const Shape& s, const Trace& t, long long fuel) {
  SideInfo info = SideInfo::from_shape(s);
  return detail::next_action(p, Side::Program, info, t, fuel);
}
inline NextAction next_context_action(const Image& a, const Shape& s, const Trace& t, long long fuel) {
  SideInfo info = SideInfo::from_shape(s);
  return detail::next_action(a, Side::Context, info, t, fuel);
}

struct DecomposeResult {
  Trace trace;
  FineTrace fine;
  MRunResult run;
};

// Run the real linked machine and record the external (and, for the fine
// trace, same-side cross-compartment) actions.
inline DecomposeResult decompose_full(const Image& a, const Image& p, const Shape& s, long long fuel) {
  SideInfo info = SideInfo::from_shape(s);
  if (!image_has_shape(p, s, info.maps, true)) throw ShapeMismatchError("p does not have shape *s");
  if (!image_has_shape(a, s, info.maps, false)) throw ShapeMismatchError("a does not have shape os");
  Image linked = link_images(a, p);
  DecomposeResult out;
  MachineState st = init_state(linked);
  out.run = mrun_observe(linked, st, fuel, [&](int prev, const MStepOutcome& step, const MachineState& after) {
    Side prev_side = info.side(prev);
    if (step.kind == MStepOutcome::Kind::Stuck) {
      ExtAction tick{make_tick(), prev_side == Side::Program};
      out.fine.push_back({false, prev_side, tick});
      return;
    }
    if (step.kind != MStepOutcome::Kind::Step || !step.decoded) return;
    if (step.instr.kind == Instr::Kind::Call || step.instr.kind == Instr::Kind::Return) {
      int target = after.current;
      if (target == prev) return;  // same-compartment call, invisible
      ActPayload pay = step.instr.kind == Instr::Kind::Call
                           ? make_call(target, static_cast<int>(step.instr.pidx), after.reg)
                           : make_ret(after.reg);
      if (info.side(target) != prev_side) {
        out.fine.push_back({false, prev_side, ExtAction{pay, prev_side == Side::Program}});
      } else {
        FineEvent ev;
        ev.internal = true;
        ev.owner = prev_side;
        ev.act = ExtAction{pay, prev_side == Side::Program};
        out.fine.push_back(ev);
      }
    }
  });
  out.trace = erase_internals(out.fine);
  return out;
}

inline std::pair<Trace, MRunResult> decompose(const Image& a, const Image& p, const Shape& s,
                                              long long fuel) {
  DecomposeResult r = decompose_full(a, p, s, fuel);
  return {std::move(r.trace), r.run};
}

inline FineTrace decompose_fine(const Image& a, const Image& p, const Shape& s, long long fuel) {
  return decompose_full(a, p, s, fuel).fine;
}

struct ComposeReport {
  Membership program_side;
  Membership context_side;
  bool unknown = false;       // some replay ran out of fuel
  bool consistent = false;    // run status matches the tick
  MRunResult run;
  std::string note;
};

// Lemma-style composition check: with t shared and unextendable, the linked
// run halts exactly when t ends in a tick.
inline ComposeReport compose_check(const Image& p, const Image& a, const Shape& s, const Trace& t,
                                   long long fuel) {
  ComposeReport rep;
  rep.program_side = program_has_trace(p, s, t, fuel);
  rep.context_side = context_has_trace(a, s, t, fuel);
  if (rep.program_side.kind == Membership::Kind::UnknownFuel ||
      rep.context_side.kind == Membership::Kind::UnknownFuel) {
    rep.unknown = true;
    rep.note = "membership inconclusive at this fuel";
    return rep;
  }
  if (!rep.program_side.yes() || !rep.context_side.yes())
    throw PreconditionUnmetError("t is not shared by both sides");
  bool ends_tick = !t.empty() && t.back().pay.kind == ActPayload::Kind::Tick;
  if (!ends_tick) {
    bool program_turn = (SideInfo::from_shape(s).main_owner == Side::Program) == (t.size() % 2 == 0);
    NextAction nx = program_turn ? next_program_action(p, s, t, fuel) : next_context_action(a, s, t, fuel);
    if (nx.kind == NextAction::Kind::UnknownFuel) {
      rep.unknown = true;
      rep.note = "extendability inconclusive at this fuel";
      return rep;
    }
    if (nx.kind == NextAction::Kind::Action)
      throw PreconditionUnmetError("t extends by a shared action");
  }
  Image linked = link_images(a, p);
  rep.run = mrun(linked, fuel);
  rep.consistent = rep.run.halted() == ends_tick;
  return rep;
}

// --- trace text format ------------------------------------------------------

inline std::string regs_text(const RegFile& regs) {
  std::ostringstream os;
  static const char* names[] = {"com", "ra", "sp", "t1", "t2", "t3"};
  for (int r = 0; r < kNumRegs; ++r) os << (r ? " " : "") << names[r] << "=" << regs[r];
  return os.str();
}

inline std::string action_text(const ActPayload& pay) {
  std::ostringstream os;
  switch (pay.kind) {
    case ActPayload::Kind::Call:
      os << "CALL " << pay.cidx << "." << pay.pidx << " " << regs_text(pay.regs);
      break;
    case ActPayload::Kind::Ret: os << "RET " << regs_text(pay.regs); break;
    case ActPayload::Kind::Tick: os << "TICK"; break;
  }
  return os.str();
}

inline std::string write_trace(const Trace& t) {
  std::string out;
  for (const auto& a : t) out += std::string(a.program_move ? "! " : "? ") + action_text(a.pay) + "\n";
  return out;
}

inline std::string write_fine_trace(const FineTrace& f) {
  std::string out;
  for (const auto& ev : f) {
    if (!ev.internal) {
      out += std::string(ev.act.program_move ? "! " : "? ") + action_text(ev.act.pay) + "\n";
    } else {
      const char* marker = ev.act.pay.kind == ActPayload::Kind::Call ? "i>" : "i<";
      out += std::string(marker) + " " + (ev.owner == Side::Program ? "prog" : "ctx") + " " +
             action_text(ev.act.pay) + "\n";
    }
  }
  return out;
}

namespace detail {
inline ActPayload parse_action_text(std::istringstream& ls, int lineno) {
  std::string kind;
  if (!(ls >> kind)) throw MalformedTraceError("empty action at line " + std::to_string(lineno));
  auto parse_regs = [&](RegFile& regs) {
    std::string tok;
    int r = 0;
    while (ls >> tok && r < kNumRegs) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) throw MalformedTraceError("bad register at line " + std::to_string(lineno));
      regs[r++] = Word(tok.substr(eq + 1));
    }
    if (r != kNumRegs) throw MalformedTraceError("expected 6 registers at line " + std::to_string(lineno));
  };
  if (kind == "TICK") return make_tick();
  if (kind == "RET") {
    RegFile regs{};
    parse_regs(regs);
    return make_ret(regs);
  }
  if (kind == "CALL") {
    std::string ref;
    if (!(ls >> ref)) throw MalformedTraceError("CALL without target at line " + std::to_string(lineno));
    auto dot = ref.find('.');
    if (dot == std::string::npos) throw MalformedTraceError("bad CALL target at line " + std::to_string(lineno));
    RegFile regs{};
    parse_regs(regs);
    return make_call(std::stoi(ref.substr(0, dot)), std::stoi(ref.substr(dot + 1)), regs);
  }
  throw MalformedTraceError("unknown action '" + kind + "' at line " + std::to_string(lineno));
}
}  // namespace detail

inline FineTrace read_fine_trace(const std::string& text) {
  FineTrace out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string marker;
    if (!(ls >> marker) || marker[0] == '#') continue;
    FineEvent ev;
    if (marker == "!" || marker == "?") {
      ev.internal = false;
      ev.act.program_move = marker == "!";
      ev.act.pay = detail::parse_action_text(ls, lineno);
      ev.owner = ev.act.program_move ? Side::Program : Side::Context;
    } else if (marker == "i>" || marker == "i<") {
      ev.internal = true;
      std::string owner;
      if (!(ls >> owner)) throw MalformedTraceError("internal event without owner at line " + std::to_string(lineno));
      ev.owner = owner == "prog" ? Side::Program : Side::Context;
      ev.act.program_move = ev.owner == Side::Program;
      ev.act.pay = detail::parse_action_text(ls, lineno);
      if ((marker == "i>") != (ev.act.pay.kind == ActPayload::Kind::Call))
        throw MalformedTraceError("internal marker does not match action at line " + std::to_string(lineno));
    } else {
      throw MalformedTraceError("unknown marker '" + marker + "' at line " + std::to_string(lineno));
    }
    out.push_back(std::move(ev));
  }
  return out;
}

inline Trace read_trace(const std::string& text) { return erase_internals(read_fine_trace(text)); }

}  // namespace scc
