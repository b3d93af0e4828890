#pragma once

// The end-to-end distinguishability game: map a low-level attacker that
// distinguishes two compiled programs to a fully defined source context that
// distinguishes them at the source level. This is the constructive content
// of the structured-full-abstraction argument: decompose the halting run,
// find the longest shared prefix, canonicalize it, back-translate, and check
// the resulting context at the source level.

#include <sstream>

#include "scc/backtrans.hpp"
#include "scc/fulldef.hpp"
#include "scc/gen.hpp"

namespace scc {

struct GamePreconditionError : Error {
  explicit GamePreconditionError(const std::string& what) : Error("scc game precondition: " + what) {}
};
struct GamePostconditionError : Error {
  explicit GamePostconditionError(const std::string& what) : Error("scc game postcondition: " + what) {}
};

struct GameConfig {
  long long fuel_source = 10000;
  long long fuel_target = 0;  // 0: calibrated from fuel_source
  int fulldef_trials = 50;
  long long fulldef_fuel = 4000;
  uint64_t seed = 1;

  long long target_budget() const { return fuel_target > 0 ? fuel_target : target_fuel(fuel_source); }
};

struct GameOutcome {
  enum class Kind { Distinguished, NotDistinguishedLowLevel, UnknownFuel };
  Kind kind = Kind::UnknownFuel;
  PartialProgram attacker;  // the source context A, when Distinguished
  RunResult run_p, run_q;   // source runs of A[P] and A[Q]
  bool swapped = false;     // true when a[Q!] was the halting side
  std::string report;
};

inline GameOutcome scc_game(const PartialProgram& P, const PartialProgram& Q, const Image& a,
                            const Shape& s, const GameConfig& cfg) {
  if (!has_shape_program(P, s)) throw GamePreconditionError("P does not have the program shape");
  if (!has_shape_program(Q, s)) throw GamePreconditionError("Q does not have the program shape");
  FullDefVerdict fp = check_fully_defined_bounded(P, s, cfg.fulldef_trials, cfg.fulldef_fuel, cfg.seed);
  if (fp.counterexample_found) throw GamePreconditionError("P failed the bounded full-definedness check");
  FullDefVerdict fq = check_fully_defined_bounded(Q, s, cfg.fulldef_trials, cfg.fulldef_fuel, cfg.seed + 1);
  if (fq.counterexample_found) throw GamePreconditionError("Q failed the bounded full-definedness check");

  IndexMaps maps = IndexMaps::from_shape(s);
  Image p_down = compile_program(P, maps);
  Image q_down = compile_program(Q, maps);
  if (!image_has_shape(a, s, maps, false)) throw ShapeMismatchError("attacker is not a context of this shape");

  long long budget = cfg.target_budget();
  GameOutcome out;
  std::ostringstream rep;

  MRunResult rp = mrun(link_images(a, p_down), budget);
  MRunResult rq = mrun(link_images(a, q_down), budget);
  rep << "a[P!]: " << rp.text() << "\na[Q!]: " << rq.text() << "\n";
  if (rp.halted() == rq.halted()) {
    out.kind = GameOutcome::Kind::NotDistinguishedLowLevel;
    out.report = rep.str();
    return out;
  }

  // orient: P1 is the side the attacker halts against
  out.swapped = !rp.halted();
  const PartialProgram& P1 = out.swapped ? Q : P;
  const PartialProgram& Q1 = out.swapped ? P : Q;
  const Image& p1_down = out.swapped ? q_down : p_down;
  const Image& q1_down = out.swapped ? p_down : q_down;

  DecomposeResult dec = decompose_full(a, p1_down, s, budget);
  internal_check(dec.run.halted(), "halting side no longer halts");
  const Trace& ti = dec.trace;
  internal_check(!ti.empty() && ti.back().pay.kind == ActPayload::Kind::Tick,
                 "halting run decomposed without a tick");

  // longest prefix of ti that the other compiled program also has
  Membership miss = program_has_trace(q1_down, s, ti, budget);
  if (miss.kind == Membership::Kind::UnknownFuel) {
    rep << "prefix search inconclusive at this fuel\n";
    out.kind = GameOutcome::Kind::UnknownFuel;
    out.report = rep.str();
    return out;
  }
  if (miss.yes()) {
    // the other program shares the whole halting trace; the low-level
    // difference was a fuel artifact
    rep << "both sides share the full trace; distinction was spurious\n";
    out.kind = GameOutcome::Kind::UnknownFuel;
    out.report = rep.str();
    return out;
  }
  size_t cut = miss.at;
  if (!ti[cut].program_move) {
    rep << "divergence at a context action: " << miss.why << "\n";
    out.kind = GameOutcome::Kind::UnknownFuel;
    out.report = rep.str();
    return out;
  }
  ActPayload gamma1 = ti[cut].pay;
  rep << "shared prefix length " << cut << ", gamma1 = " << action_text(gamma1) << "\n";

  // cut the fine trace right before the external action at index `cut` and
  // canonicalize every context-owned event
  FineTrace fine;
  size_t ext_seen = 0;
  for (const auto& ev : dec.fine) {
    if (!ev.internal) {
      if (ext_seen == cut) break;
      ++ext_seen;
    }
    FineEvent copy = ev;
    if (copy.owner == Side::Context || (!copy.internal && !copy.act.program_move))
      copy.act.pay = canonicalize_action(copy.act.pay);
    fine.push_back(std::move(copy));
  }

  BacktransInput input{std::move(fine), gamma1, s};
  BacktransOutput bt = backtranslate(input);
  rep << bt.report;

  RunResult sp = run(link(bt.context, P1), cfg.fuel_source);
  RunResult sq = run(link(bt.context, Q1), cfg.fuel_source);
  rep << "A[P1]: " << sp.text() << "\nA[Q1]: " << sq.text() << "\n";
  if (sp.kind == RunResult::Kind::UndefinedBehavior || sq.kind == RunResult::Kind::UndefinedBehavior)
    throw GamePostconditionError("back-translated context ran into undefined behavior");
  if (sp.kind != RunResult::Kind::Terminated) {
    out.kind = GameOutcome::Kind::UnknownFuel;
    rep << "A[P1] did not terminate within the source budget\n";
    out.report = rep.str();
    return out;
  }
  if (sq.kind != RunResult::Kind::FuelExhausted)
    throw GamePostconditionError("A[Q1] terminated; the context does not distinguish");

  FullDefVerdict fa = check_context_fully_defined_bounded(bt.context, s, cfg.fulldef_trials,
                                                          cfg.fulldef_fuel, cfg.seed + 2);
  if (fa.counterexample_found)
    throw GamePostconditionError("back-translated context failed the full-definedness check");

  out.kind = GameOutcome::Kind::Distinguished;
  out.attacker = std::move(bt.context);
  out.run_p = out.swapped ? sq : sp;
  out.run_q = out.swapped ? sp : sq;
  out.report = rep.str();
  return out;
}

}  // namespace scc
