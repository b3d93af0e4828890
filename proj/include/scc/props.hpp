#pragma once

// The property registry: every lemma, assumption and theorem as an
// executable check over randomly generated compromise scenarios, with
// greedy shrinking of failing cases. All randomness flows from the seed in
// GenConfig; every failure records the trial seed for bit-exact replay.

#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "scc/backtrans.hpp"
#include "scc/demos.hpp"
#include "scc/fulldef.hpp"
#include "scc/game.hpp"
#include "scc/gen.hpp"
#include "scc/interp.hpp"
#include "scc/parse.hpp"

namespace scc {

struct UnknownPropertyError : Error {
  explicit UnknownPropertyError(const std::string& name) : Error("unknown property: " + name) {}
};

struct TrialOutcome {
  enum class Kind { Pass, Fail, Unknown };
  Kind kind = Kind::Pass;
  std::string what;
};

struct PropertyReport {
  std::string name;
  int cases = 0;
  int passes = 0;
  int unknown = 0;
  struct Failure {
    uint64_t seed;
    std::string what;
    std::string shrunk;  // serialized minimized scenario
  };
  std::vector<Failure> failures;

  bool ok() const { return failures.empty(); }
  std::string summary() const {
    std::ostringstream os;
    os << "property " << name << ": " << cases << " cases, " << passes << " passed, " << unknown
       << " unknown, " << failures.size() << " failures";
    return os.str();
  }
};

// Everything a trial needs to be re-checked (and therefore shrunk).
struct Scenario {
  Shape shape;
  PartialProgram program;    // *s side
  PartialProgram context;    // os side, when the context is source-level
  PartialProgram program2;   // second program, for game properties
  Image attacker;            // low-level context
  Image attacker2;           // second low-level context (extensibility)
  bool has_attacker = false;
  bool has_attacker2 = false;
  bool viable = true;        // generation found nothing to test
  size_t trace_cut = static_cast<size_t>(-1);
  uint64_t seed = 0;

  std::string describe() const {
    std::ostringstream os;
    os << "seed " << seed << "\n" << print_shape(shape);
    if (!program.defs.empty()) os << "-- program side --\n" << print_program(program);
    if (!program2.defs.empty()) os << "-- program variant --\n" << print_program(program2);
    if (!context.defs.empty()) os << "-- context side --\n" << print_program(context);
    if (has_attacker) os << "-- attacker image --\n" << write_image(attacker);
    if (trace_cut != static_cast<size_t>(-1)) os << "trace cut: " << trace_cut << "\n";
    return os.str();
  }
};

namespace propdetail {

inline Shape whole_program_shape(const GenConfig& cfg, Rng& rng) {
  Shape s = gen_shape(cfg, rng);
  s.uncompromised.clear();
  for (const auto& [name, _] : s.interfaces) s.uncompromised.insert(name);
  return s;
}

inline std::vector<ExprPtr> children(const ExprPtr& e) {
  std::vector<ExprPtr> out;
  if (e->a) out.push_back(e->a);
  if (e->b) out.push_back(e->b);
  if (e->c) out.push_back(e->c);
  return out;
}

// Component removal is legal when nothing else imports it and it is not Main.
inline bool removable(const Scenario& sc, const Name& name) {
  if (name == kMainComponent) return false;
  for (const auto& [other, iface] : sc.shape.interfaces) {
    if (other == name) continue;
    for (const auto& [ic, _] : iface.imports)
      if (ic == name) return false;
  }
  return true;
}

inline void drop_component(Scenario& sc, const Name& name) {
  sc.shape.interfaces.erase(name);
  sc.shape.uncompromised.erase(name);
  sc.program.defs.erase(name);
  sc.program2.defs.erase(name);
  sc.context.defs.erase(name);
}

using StillFails = std::function<bool(const Scenario&)>;

inline Scenario shrink_scenario(Scenario sc, const StillFails& still_fails, int budget = 160) {
  auto attempt = [&](const Scenario& cand) {
    if (budget <= 0) return false;
    --budget;
    return still_fails(cand);
  };

  // 1. component count (only without compiled attackers: removing a
  // component renumbers compartments and would orphan the image)
  if (!sc.has_attacker && !sc.has_attacker2) {
    bool changed = true;
    while (changed && budget > 0) {
      changed = false;
      for (const auto& [name, _] : sc.shape.interfaces) {
        if (!removable(sc, name)) continue;
        Scenario cand = sc;
        drop_component(cand, name);
        if (attempt(cand)) {
          sc = std::move(cand);
          changed = true;
          break;
        }
      }
    }
  }

  // 2. procedure count: drop private procedures nothing references
  auto progs = [&]() { return std::vector<PartialProgram*>{&sc.program, &sc.program2, &sc.context}; };
  for (PartialProgram* pp : progs()) {
    for (auto& [cname, def] : pp->defs) {
      std::vector<Name> privates;
      for (const auto& [pname, _] : def.procedures)
        if (!def.iface.exports.count(pname)) privates.push_back(pname);
      for (const auto& pname : privates) {
        Scenario cand = sc;
        auto& cdef = (pp == &sc.program   ? cand.program
                      : pp == &sc.program2 ? cand.program2
                                           : cand.context)
                         .defs.at(cname);
        cdef.procedures.erase(pname);
        if (!check_component_wf(cdef).empty()) continue;
        if (attempt(cand)) sc = std::move(cand);
      }
    }
  }

  // 3. expression subtrees: replace bodies by children or by 0
  bool changed = true;
  while (changed && budget > 0) {
    changed = false;
    for (PartialProgram* pp : progs()) {
      for (auto& [cname, def] : pp->defs) {
        for (auto& [pname, body] : def.procedures) {
          std::vector<ExprPtr> cands = children(body);
          if (!(body->kind == Expr::Kind::Int && body->lit == 0)) cands.push_back(eint(0));
          for (const ExprPtr& c : cands) {
            Scenario cand = sc;
            auto& cdef = (pp == &sc.program   ? cand.program
                          : pp == &sc.program2 ? cand.program2
                                               : cand.context)
                             .defs.at(cname);
            cdef.procedures[pname] = c;
            if (!check_component_wf(cdef).empty()) continue;
            if (attempt(cand)) {
              sc = std::move(cand);
              changed = true;
              break;
            }
          }
          if (changed) break;
        }
        if (changed) break;
      }
      if (changed) break;
    }
  }

  // 4. trace prefix
  while (sc.trace_cut != static_cast<size_t>(-1) && sc.trace_cut > 0 && budget > 0) {
    Scenario cand = sc;
    cand.trace_cut -= 1;
    if (attempt(cand))
      sc = std::move(cand);
    else
      break;
  }
  return sc;
}

struct Property {
  std::function<Scenario(const GenConfig&, uint64_t)> generate;
  std::function<TrialOutcome(const GenConfig&, const Scenario&)> check;
};

inline TrialOutcome pass() { return {TrialOutcome::Kind::Pass, ""}; }
inline TrialOutcome fail(const std::string& what) { return {TrialOutcome::Kind::Fail, what}; }
inline TrialOutcome unknown(const std::string& what) { return {TrialOutcome::Kind::Unknown, what}; }

// --- individual properties --------------------------------------------------

inline Property prop_type_safety() {
  return {
      [](const GenConfig& cfg, uint64_t seed) {
        Rng rng(seed);
        Scenario sc;
        sc.seed = seed;
        sc.shape = whole_program_shape(cfg, rng);
        sc.program = gen_program_of_shape(cfg, sc.shape, true, GenMode::Wild, rng);
        return sc;
      },
      [](const GenConfig& cfg, const Scenario& sc) {
        try {
          LinkedSource ls = prepare(sc.program);
          Config c = init_config(ls);
          for (long long i = 0; i < cfg.fuel_source; ++i) {
            StepResult r = step_inplace(ls, c);
            if (r.kind != StepResult::Kind::Step) return pass();
            if (r.wide) return pass();  // resource guard, counts as divergence
          }
          return pass();  // fuel exhausted: every reached configuration classified
        } catch (const std::logic_error& e) {
          return fail(std::string("classifier aborted: ") + e.what());
        }
      }};
}

inline TrialOutcome agree_source_target(const GenConfig& cfg, const PartialProgram& w,
                                        const Image& img) {
  RunResult s = run(w, cfg.fuel_source);
  if (s.kind == RunResult::Kind::UndefinedBehavior)
    return fail("defined-biased program reached undefined behavior, blamed " + s.blamed);
  MRunResult t = mrun(img, cfg.target_budget());
  bool s_term = s.kind == RunResult::Kind::Terminated;
  if (s_term && t.halted()) return pass();
  if (!s_term && !t.halted()) return pass();
  if (s_term && !t.halted())
    return fail("source terminated in " + std::to_string(s.steps) + " steps, target ran out of fuel");
  // target halted, source out of fuel: escalate the source budget once
  RunResult s2 = run(w, cfg.fuel_source * 16);
  if (s2.kind == RunResult::Kind::Terminated) return pass();
  if (s2.kind == RunResult::Kind::UndefinedBehavior)
    return fail("defined-biased program reached undefined behavior late");
  return unknown("target halted but source still out of fuel at 16x budget");
}

inline Property prop_correctness() {
  return {
      [](const GenConfig& cfg, uint64_t seed) {
        Rng rng(seed);
        Scenario sc;
        sc.seed = seed;
        sc.shape = whole_program_shape(cfg, rng);
        sc.program = gen_program_of_shape(cfg, sc.shape, true, GenMode::DefinedBiased, rng);
        return sc;
      },
      [](const GenConfig& cfg, const Scenario& sc) {
        return agree_source_target(cfg, sc.program, compile_whole(sc.program));
      }};
}

inline Property prop_separate_compilation() {
  return {
      [](const GenConfig& cfg, uint64_t seed) {
        Rng rng(seed);
        Scenario sc;
        sc.seed = seed;
        sc.shape = gen_shape_two_sided(cfg, rng);
        sc.program = gen_program_of_shape(cfg, sc.shape, true, GenMode::Wild, rng);
        sc.context = gen_program_of_shape(cfg, sc.shape, false, GenMode::Wild, rng);
        return sc;
      },
      [](const GenConfig&, const Scenario& sc) {
        IndexMaps maps = IndexMaps::from_shape(sc.shape);
        std::string whole = write_image(compile_program(link(sc.context, sc.program), maps));
        std::string split =
            write_image(link_images(compile_program(sc.context, maps), compile_program(sc.program, maps)));
        if (whole != split) return fail("compile-then-link differs from link-then-compile");
        return pass();
      }};
}

inline Property prop_separate_correctness() {
  return {
      [](const GenConfig& cfg, uint64_t seed) {
        Rng rng(seed);
        Scenario sc;
        sc.seed = seed;
        sc.shape = gen_shape_two_sided(cfg, rng);
        sc.program = gen_program_of_shape(cfg, sc.shape, true, GenMode::DefinedBiased, rng);
        sc.context = gen_program_of_shape(cfg, sc.shape, false, GenMode::DefinedBiased, rng);
        return sc;
      },
      [](const GenConfig& cfg, const Scenario& sc) {
        IndexMaps maps = IndexMaps::from_shape(sc.shape);
        Image img = link_images(compile_program(sc.context, maps), compile_program(sc.program, maps));
        return agree_source_target(cfg, link(sc.context, sc.program), img);
      }};
}

inline Scenario gen_attacker_scenario(const GenConfig& cfg, uint64_t seed, GenMode mode,
                                      bool second_attacker = false) {
  Rng rng(seed);
  Scenario sc;
  sc.seed = seed;
  sc.shape = gen_shape_two_sided(cfg, rng);
  sc.program = gen_program_of_shape(cfg, sc.shape, true, mode, rng);
  sc.attacker = gen_lowlevel_attacker(cfg, sc.shape, rng);
  sc.has_attacker = true;
  if (second_attacker) {
    sc.attacker2 = gen_lowlevel_attacker(cfg, sc.shape, rng);
    sc.has_attacker2 = true;
  }
  return sc;
}

inline Property prop_decomposition() {
  return {
      [](const GenConfig& cfg, uint64_t seed) {
        return gen_attacker_scenario(cfg, seed, GenMode::Wild);
      },
      [](const GenConfig& cfg, const Scenario& sc) {
        Image p = compile_program(sc.program, IndexMaps::from_shape(sc.shape));
        long long budget = cfg.target_budget();
        auto [t, r] = decompose(sc.attacker, p, sc.shape, budget);
        if (!r.halted()) return pass();  // stated for terminating runs
        if (t.empty() || t.back().pay.kind != ActPayload::Kind::Tick)
          return fail("halting run decomposed without a final tick");
        Membership mp = program_has_trace(p, sc.shape, t, budget);
        Membership ma = context_has_trace(sc.attacker, sc.shape, t, budget);
        if (mp.kind == Membership::Kind::UnknownFuel || ma.kind == Membership::Kind::UnknownFuel)
          return unknown("membership replay ran out of fuel");
        if (!mp.yes())
          return fail("program side rejected its own decomposed trace at " + std::to_string(mp.at) +
                      " (" + mp.why + ")");
        if (!ma.yes())
          return fail("context side rejected its own decomposed trace at " + std::to_string(ma.at) +
                      " (" + ma.why + ")");
        return pass();
      }};
}

inline Property prop_composition() {
  return {
      [](const GenConfig& cfg, uint64_t seed) {
        return gen_attacker_scenario(cfg, seed, GenMode::Wild);
      },
      [](const GenConfig& cfg, const Scenario& sc) {
        Image p = compile_program(sc.program, IndexMaps::from_shape(sc.shape));
        long long budget = cfg.target_budget();
        auto [t, r] = decompose(sc.attacker, p, sc.shape, budget);
        try {
          ComposeReport rep = compose_check(p, sc.attacker, sc.shape, t, budget);
          if (rep.unknown) return unknown(rep.note);
          if (!rep.consistent)
            return fail(std::string("composition mismatch: run ") + rep.run.text() +
                        (t.empty() || t.back().pay.kind != ActPayload::Kind::Tick ? " without" : " with") +
                        " a tick-terminated trace");
          return pass();
        } catch (const PreconditionUnmetError&) {
          // a fuel-cut run whose trace is still extendable: vacuous case
          if (r.halted()) return fail("halting run produced an extendable trace");
          return pass();
        }
      }};
}

inline Property prop_extensibility() {
  return {
      [](const GenConfig& cfg, uint64_t seed) {
        return gen_attacker_scenario(cfg, seed, GenMode::Wild, /*second_attacker=*/true);
      },
      [](const GenConfig& cfg, const Scenario& sc) {
        Image p = compile_program(sc.program, IndexMaps::from_shape(sc.shape));
        long long budget = cfg.target_budget();
        auto [t, r] = decompose(sc.attacker, p, sc.shape, budget);
        bool any_unknown = false;
        for (size_t i = 0; i < t.size(); ++i) {
          Trace pre(t.begin(), t.begin() + i);
          Trace ext = pre;
          ext.push_back(t[i]);
          if (!t[i].program_move) {
            Membership other = context_has_trace(sc.attacker2, sc.shape, ext, budget);
            if (other.kind == Membership::Kind::UnknownFuel) {
              any_unknown = true;
              continue;
            }
            if (!other.yes()) continue;
            Membership mine = program_has_trace(p, sc.shape, ext, budget);
            if (mine.kind == Membership::Kind::UnknownFuel) {
              any_unknown = true;
              continue;
            }
            if (!mine.yes())
              return fail("program refused a context extension another context of this shape has");
          } else {
            Membership base = context_has_trace(sc.attacker2, sc.shape, pre, budget);
            if (base.kind == Membership::Kind::UnknownFuel) {
              any_unknown = true;
              continue;
            }
            if (!base.yes()) continue;
            Membership extm = context_has_trace(sc.attacker2, sc.shape, ext, budget);
            if (extm.kind == Membership::Kind::UnknownFuel) {
              any_unknown = true;
              continue;
            }
            if (!extm.yes())
              return fail("context refused a program extension the program really takes");
          }
        }
        return any_unknown ? unknown("some replays ran out of fuel") : pass();
      }};
}

inline Property prop_canonicalization() {
  return {
      [](const GenConfig& cfg, uint64_t seed) {
        Scenario sc = gen_attacker_scenario(cfg, seed, GenMode::DefinedBiased);
        Rng rng(seed ^ 0xc0ffee);
        sc.trace_cut = static_cast<size_t>(rng.range(0, 12));
        return sc;
      },
      [](const GenConfig& cfg, const Scenario& sc) {
        Image p = compile_program(sc.program, IndexMaps::from_shape(sc.shape));
        long long budget = cfg.target_budget();
        auto [t, r] = decompose(sc.attacker, p, sc.shape, budget);
        size_t cut = std::min(sc.trace_cut, t.size());
        Trace pre(t.begin(), t.begin() + cut);
        Membership base = program_has_trace(p, sc.shape, pre, budget);
        Membership canon = program_has_trace(p, sc.shape, canonicalize_trace(pre), budget);
        if (base.kind == Membership::Kind::UnknownFuel || canon.kind == Membership::Kind::UnknownFuel)
          return unknown("membership replay ran out of fuel");
        if (!(base == canon))
          return fail("membership of the trace and its canonicalization disagree");
        // scrambling registers zeta clears must not change membership either
        Rng scramble(sc.seed ^ 0xabcdef);
        Trace junk = pre;
        for (auto& act : junk) {
          if (act.program_move || act.pay.kind == ActPayload::Kind::Tick) continue;
          for (int reg : {kRRa, kRSp, kRT1, kRT2, kRT3}) act.pay.regs[reg] = scramble.range(-3, 99);
        }
        Membership noisy = program_has_trace(p, sc.shape, junk, budget);
        if (noisy.kind == Membership::Kind::UnknownFuel) return unknown("noisy replay out of fuel");
        if (!(noisy == base))
          return fail("membership depends on registers the canonicalization clears");
        return pass();
      }};
}

inline Property prop_definability() {
  return {
      [](const GenConfig& cfg, uint64_t seed) {
        // hunt for a scenario whose run contains a program action
        for (int attempt = 0; attempt < 8; ++attempt) {
          Scenario sc = gen_attacker_scenario(cfg, seed + 7919u * attempt, GenMode::DefinedBiased);
          Image p = compile_program(sc.program, IndexMaps::from_shape(sc.shape));
          auto [t, r] = decompose(sc.attacker, p, sc.shape, cfg.target_budget());
          std::vector<size_t> program_moves;
          for (size_t i = 0; i < t.size(); ++i)
            if (t[i].program_move) program_moves.push_back(i);
          if (program_moves.empty()) continue;
          Rng rng(seed ^ 0x5eed);
          sc.trace_cut = program_moves[static_cast<size_t>(rng.next() % program_moves.size())];
          sc.seed = seed;
          return sc;
        }
        Scenario sc;
        sc.seed = seed;
        sc.viable = false;
        return sc;
      },
      [](const GenConfig& cfg, const Scenario& sc) {
        if (!sc.viable) return unknown("no scenario with a program action found");
        long long budget = cfg.target_budget();
        IndexMaps maps = IndexMaps::from_shape(sc.shape);
        Image p = compile_program(sc.program, maps);
        DecomposeResult dec = decompose_full(sc.attacker, p, sc.shape, budget);
        if (sc.trace_cut >= dec.trace.size() || !dec.trace[sc.trace_cut].program_move)
          return pass();  // a shrink candidate changed the run; vacuous
        ActPayload gamma1 = dec.trace[sc.trace_cut].pay;
        FineTrace fine;
        size_t ext_seen = 0;
        for (const auto& ev : dec.fine) {
          if (!ev.internal) {
            if (ext_seen == sc.trace_cut) break;
            ++ext_seen;
          }
          FineEvent copy = ev;
          if (copy.owner == Side::Context || (!copy.internal && !copy.act.program_move))
            copy.act.pay = canonicalize_action(copy.act.pay);
          fine.push_back(std::move(copy));
        }
        BacktransInput input{std::move(fine), gamma1, sc.shape};
        BacktransOutput out;
        try {
          out = backtranslate(input);
        } catch (const Error& e) {
          return fail(std::string("backtranslate rejected a decomposed trace: ") + e.what());
        }
        DefinabilityReport rep = verify_definability(out, input, p, budget);
        if (rep.unknown) return unknown(rep.note.empty() ? "definability replay out of fuel" : rep.note);
        if (!rep.pre_ok) return fail("witness lost the trace after canonicalization");
        if (!rep.clause1.yes()) return fail("clause 1 failed: " + rep.clause1.why);
        if (rep.clause2_applicable && !rep.clause2.yes())
          return fail("clause 2 failed: " + rep.clause2.why);
        if (rep.clause3_failures > 0) return fail("clause 3 failed: " + rep.note);
        FullDefVerdict fd = check_context_fully_defined_bounded(out.context, sc.shape, 100, 4000,
                                                                sc.seed ^ 0xfull);
        if (fd.counterexample_found)
          return fail("back-translated context blamed for undefined behavior");
        return pass();
      }};
}

inline PartialProgram mutate_program(const PartialProgram& p, Rng& rng) {
  PartialProgram q = p;
  std::vector<std::pair<Name, Name>> procs;
  for (const auto& [cname, def] : q.defs)
    for (const auto& [pname, _] : def.procedures) procs.push_back({cname, pname});
  if (procs.empty()) return q;
  auto [cname, pname] = procs[static_cast<size_t>(rng.next() % procs.size())];
  ExprPtr body = q.defs.at(cname).procedures.at(pname);
  q.defs.at(cname).procedures.at(pname) =
      rng.chance(0.5) ? ebinop(Op::Add, body, eint(1)) : eint(rng.range(0, 9));
  return q;
}

// A context that probes one program procedure and halts only on the answer
// it expects. Such contexts make low-level distinguishers easy to find.
inline Image probe_attacker(const GenConfig& cfg, const Shape& s, Rng& rng) {
  PartialProgram a;
  for (const auto& [cname, iface] : s.interfaces) {
    if (s.uncompromised.count(cname)) continue;
    ComponentDef def;
    def.name = cname;
    def.iface = iface;
    def.buffers = {2};
    Name loop_name = "spin";
    while (iface.exports.count(loop_name)) loop_name += "_";
    def.procedures[loop_name] = ecall(cname, loop_name, eint(0));
    std::vector<ProcRef> prog_targets;
    for (const auto& ref : iface.imports)
      if (s.uncompromised.count(ref.first)) prog_targets.push_back(ref);
    for (const auto& pname : iface.exports) {
      if (!prog_targets.empty() && rng.chance(0.85)) {
        const ProcRef& t = rng.pick(prog_targets);
        ExprPtr call = ecall(t.first, t.second, eint(rng.range(0, 5)));
        def.procedures[pname] = eif(ebinop(Op::Eq, call, eint(rng.range(0, 9))), eexit(),
                                    ecall(cname, loop_name, eint(0)));
      } else {
        def.procedures[pname] = rng.chance(0.5) ? eexit() : eint(rng.range(0, 5));
      }
    }
    a.defs.emplace(cname, std::move(def));
  }
  return compile_program(a, IndexMaps::from_shape(s));
}

inline Property prop_scc_end_to_end() {
  return {
      [](const GenConfig& cfg, uint64_t seed) {
        for (int attempt = 0; attempt < 10; ++attempt) {
          Rng rng(seed + 104729u * attempt);
          Scenario sc;
          sc.seed = seed;
          sc.shape = gen_shape_two_sided(cfg, rng);
          sc.program = gen_program_of_shape(cfg, sc.shape, true, GenMode::DefinedBiased, rng);
          Rng mrng = rng.fork();
          sc.program2 = mutate_program(sc.program, mrng);
          IndexMaps maps = IndexMaps::from_shape(sc.shape);
          Image p = compile_program(sc.program, maps);
          Image q = compile_program(sc.program2, maps);
          for (int k = 0; k < 12; ++k) {
            Rng arng = rng.fork();
            Image a = k % 3 == 0 ? gen_lowlevel_attacker(cfg, sc.shape, arng)
                                 : probe_attacker(cfg, sc.shape, arng);
            MRunResult rp = mrun(link_images(a, p), cfg.target_budget());
            MRunResult rq = mrun(link_images(a, q), cfg.target_budget());
            if (rp.halted() != rq.halted()) {
              sc.attacker = std::move(a);
              sc.has_attacker = true;
              return sc;
            }
          }
        }
        Scenario sc;
        sc.seed = seed;
        sc.viable = false;
        return sc;
      },
      [](const GenConfig& cfg, const Scenario& sc) {
        if (!sc.viable) return unknown("no distinguishing attacker found");
        IndexMaps maps = IndexMaps::from_shape(sc.shape);
        MRunResult rp = mrun(link_images(sc.attacker, compile_program(sc.program, maps)), cfg.target_budget());
        MRunResult rq = mrun(link_images(sc.attacker, compile_program(sc.program2, maps)), cfg.target_budget());
        if (rp.halted() == rq.halted()) return pass();  // shrunk away the distinction
        GameConfig gc;
        gc.fuel_source = cfg.fuel_source;
        gc.fuel_target = cfg.target_budget();
        gc.seed = sc.seed;
        try {
          GameOutcome out = scc_game(sc.program, sc.program2, sc.attacker, sc.shape, gc);
          switch (out.kind) {
            case GameOutcome::Kind::Distinguished: {
              // re-verify the postcondition independently of the game
              RunResult p_run = run(link(out.attacker, sc.program), cfg.fuel_source);
              RunResult q_run = run(link(out.attacker, sc.program2), cfg.fuel_source);
              bool p_term = p_run.kind == RunResult::Kind::Terminated;
              bool q_term = q_run.kind == RunResult::Kind::Terminated;
              if (p_term == q_term) return fail("reported context does not distinguish at the source");
              return pass();
            }
            case GameOutcome::Kind::NotDistinguishedLowLevel:
              return fail("game claims no distinction despite differing runs");
            case GameOutcome::Kind::UnknownFuel:
              return unknown(out.report);
          }
        } catch (const GamePostconditionError& e) {
          return fail(e.what());
        } catch (const GamePreconditionError& e) {
          return unknown(e.what());  // the bounded full-definedness check objected
        }
        return pass();
      }};
}

inline Property prop_isolation() {
  return {
      [](const GenConfig& cfg, uint64_t seed) {
        return gen_attacker_scenario(cfg, seed, GenMode::Wild);
      },
      [](const GenConfig& cfg, const Scenario& sc) {
        Image p = compile_program(sc.program, IndexMaps::from_shape(sc.shape));
        Image linked = link_images(sc.attacker, p);
        MachineState st = init_state(linked);
        demodetail::IsolationGuard guard;
        guard.reset(st);
        mrun_observe(linked, st, cfg.target_budget(),
                     [&](int prev, const MStepOutcome& out, const MachineState& after) {
                       guard.step(prev, out, after);
                     });
        if (!guard.ok) return fail("a step touched another compartment's memory or the stack");
        return pass();
      }};
}

inline Property prop_register_hygiene() {
  return {
      [](const GenConfig& cfg, uint64_t seed) {
        return gen_attacker_scenario(cfg, seed, GenMode::DefinedBiased);
      },
      [](const GenConfig& cfg, const Scenario& sc) {
        SideInfo info = SideInfo::from_shape(sc.shape);
        Image p = compile_program(sc.program, info.maps);
        Image linked = link_images(sc.attacker, p);
        MachineState st = init_state(linked);
        bool dirty = false;
        mrun_observe(linked, st, cfg.target_budget(),
                     [&](int prev, const MStepOutcome& out, const MachineState& after) {
                       if (!out.decoded) return;
                       if (out.instr.kind != Instr::Kind::Call && out.instr.kind != Instr::Kind::Return)
                         return;
                       if (info.side(prev) != Side::Program) return;
                       for (int reg : {kRRa, kRSp, kRT1, kRT2, kRT3})
                         if (after.reg[reg] != 0) dirty = true;
                     });
        if (dirty) return fail("program-side Call/Return executed with unclean registers");
        return pass();
      }};
}

inline const std::map<std::string, Property>& registry() {
  static const std::map<std::string, Property> props = {
      {"type-safety", prop_type_safety()},
      {"correctness", prop_correctness()},
      {"separate-compilation", prop_separate_compilation()},
      {"separate-correctness", prop_separate_correctness()},
      {"extensibility", prop_extensibility()},
      {"decomposition", prop_decomposition()},
      {"composition", prop_composition()},
      {"canonicalization", prop_canonicalization()},
      {"definability", prop_definability()},
      {"scc-end-to-end", prop_scc_end_to_end()},
      {"isolation", prop_isolation()},
      {"register-hygiene", prop_register_hygiene()},
  };
  return props;
}

}  // namespace propdetail

inline std::vector<std::string> property_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : propdetail::registry()) names.push_back(name);
  return names;
}

inline PropertyReport run_property(const std::string& name, const GenConfig& cfg) {
  auto it = propdetail::registry().find(name);
  if (it == propdetail::registry().end()) throw UnknownPropertyError(name);
  const propdetail::Property& prop = it->second;

  PropertyReport rep;
  rep.name = name;
  Rng seeder(cfg.seed);
  for (int i = 0; i < cfg.trials; ++i) {
    uint64_t trial_seed = seeder.next();
    Scenario sc = prop.generate(cfg, trial_seed);
    TrialOutcome out = prop.check(cfg, sc);
    ++rep.cases;
    switch (out.kind) {
      case TrialOutcome::Kind::Pass:
        ++rep.passes;
        break;
      case TrialOutcome::Kind::Unknown:
        ++rep.unknown;
        break;
      case TrialOutcome::Kind::Fail: {
        auto still_fails = [&](const Scenario& cand) {
          try {
            return prop.check(cfg, cand).kind == TrialOutcome::Kind::Fail;
          } catch (const std::exception&) {
            return false;
          }
        };
        Scenario shrunk = propdetail::shrink_scenario(sc, still_fails);
        rep.failures.push_back({trial_seed, out.what, shrunk.describe()});
        break;
      }
    }
  }
  return rep;
}

}  // namespace scc
