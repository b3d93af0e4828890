#pragma once

// Fixed attack regression demos.
//
// (i) In-compartment ROP: a component writes past its buffer into its own
// local stack, swaps a saved return address for a forged code word planted in
// the stack region, and hijacks control within its compartment. The hijacked
// code attempts a cross-compartment call it has no import for, which the
// machine stops with an interface violation.
//
// (ii) Register covert channel: under the no-register-clean build, an
// unsuspecting component relays values between two compromised compartments
// that share no interface edge, and leaked layout constants let the attacker
// distinguish two programs no fully defined source context can tell apart.
// The secure build closes both holes.

#include <sstream>

#include "scc/compile.hpp"
#include "scc/interp.hpp"

namespace scc {

struct DemoReport {
  bool rop_hijacked = false;
  bool rop_contained = false;
  bool rop_isolated = false;
  bool covert_value_leaks_insecure = false;
  bool covert_value_blocked_secure = false;
  bool covert_distinguishes_insecure = false;
  bool covert_indistinguishable_secure = false;
  std::string log;

  bool all_pass() const {
    return rop_hijacked && rop_contained && rop_isolated && covert_value_leaks_insecure &&
           covert_value_blocked_secure && covert_distinguishes_insecure &&
           covert_indistinguishable_secure;
  }
};

namespace demodetail {

// Per-step isolation guard: only the executing compartment's partition may
// change, and the protected stack moves only on Call/Return.
struct IsolationGuard {
  std::map<int, uint64_t> gens;
  size_t stack_size = 0;
  bool ok = true;

  void reset(const MachineState& st) {
    gens.clear();
    for (const auto& [cidx, mem] : st.mem) gens[cidx] = mem.generation();
    stack_size = st.stack.size();
  }
  void step(int prev, const MStepOutcome& out, const MachineState& after) {
    for (const auto& [cidx, mem] : after.mem)
      if (cidx != prev && mem.generation() != gens[cidx]) ok = false;
    gens.clear();
    for (const auto& [cidx, mem] : after.mem) gens[cidx] = mem.generation();
    if (out.kind == MStepOutcome::Kind::Step && out.decoded) {
      if (out.instr.kind == Instr::Kind::Call) {
        if (after.stack.size() != stack_size + 1) ok = false;
      } else if (out.instr.kind == Instr::Kind::Return) {
        if (after.stack.size() + 1 != stack_size) ok = false;
      } else if (after.stack.size() != stack_size) {
        ok = false;
      }
    }
    stack_size = after.stack.size();
  }
};

}  // namespace demodetail

inline DemoReport attack_demos() {
  DemoReport rep;
  std::ostringstream log;

  // ---- (i) in-compartment ROP -------------------------------------------
  {
    // Two-phase build: compile once with placeholder literals to learn the
    // layout (immediates do not change code sizes), then with the real ones.
    auto build = [](const Word& forged, const Word& ra_slot, const Word& gadget) {
      PartialProgram w;
      ComponentDef main_def;
      main_def.name = kMainComponent;
      main_def.iface.exports = {kMainProc};
      main_def.buffers = {1};
      main_def.procedures[kMainProc] = ecall(kMainComponent, "g", eint(0));
      main_def.procedures["g"] =
          eseq(ewrite(0, eint(gadget), eint(forged)), eseq(ewrite(0, eint(ra_slot), eint(gadget)), eint(7)));
      ComponentDef d;
      d.name = "D";
      d.iface.exports = {"q"};
      d.buffers = {1};
      d.procedures["q"] = eint(0);
      w.defs[kMainComponent] = main_def;
      w.defs["D"] = d;
      return w;
    };
    PartialProgram probe = build(0, 0, 0);
    IndexMaps maps = IndexMaps::from_program(probe);
    Word stackbase = compile_component(probe.defs.at(kMainComponent), maps).layout.stackbase;
    // stack when g runs: [SB]=entry sp, [SB+1]=flag, [SB+2]=saved arg cell,
    // [SB+3]=saved return address, [SB+4]=flag; transient pushes above
    Word ra_slot = stackbase + 3;
    Word gadget = stackbase + 16;
    Word forged = encode(icall(maps.comp_index.at("D"), 0));  // D.q is not imported by Main
    PartialProgram w = build(forged, ra_slot, gadget);
    Image img = compile_whole(w);
    int main_idx = maps.comp_index.at(kMainComponent);
    int d_idx = maps.comp_index.at("D");

    MachineState st = init_state(img);
    demodetail::IsolationGuard guard;
    guard.reset(st);
    uint64_t d_gen = st.mem.at(d_idx).generation();
    bool reached_gadget = false;
    MRunResult r = mrun_observe(img, st, 100000,
                                [&](int prev, const MStepOutcome& out, const MachineState& after) {
                                  guard.step(prev, out, after);
                                  if (after.current == main_idx && after.pc == gadget)
                                    reached_gadget = true;
                                });
    rep.rop_hijacked = reached_gadget;
    rep.rop_contained = r.halted() && r.reason.kind == StuckReason::Kind::InterfaceViolation &&
                        r.reason.cidx == d_idx;
    rep.rop_isolated = guard.ok && st.mem.at(d_idx).generation() == d_gen;
    log << "rop: hijack " << (rep.rop_hijacked ? "reached the planted word" : "failed") << "; run "
        << r.text() << " (" << r.reason.text() << ")\n";
  }

  // ---- (ii) register covert channel --------------------------------------
  {
    // U is the unsuspecting program component; Main and R are compromised
    // and share no interface edge. U1 and U2 differ only in the size of an
    // unused buffer.
    auto make_u = [](unsigned spare) {
      PartialProgram p;
      ComponentDef u;
      u.name = "U";
      u.iface.exports = {"f"};
      u.iface.imports = {{"R", "g"}};
      u.buffers = {1, spare};
      u.procedures["f"] = ecall("R", "g", eint(5));
      p.defs["U"] = u;
      return p;
    };
    Shape s;
    s.interfaces[kMainComponent] = {{kMainProc}, {{"U", "f"}}};
    s.interfaces["R"] = {{"g"}, {}};
    s.interfaces["U"] = {{"f"}, {{"R", "g"}}};
    s.uncompromised = {"U"};
    IndexMaps maps = IndexMaps::from_shape(s);
    int r_idx = maps.comp_index.at("R");
    int u_idx = maps.comp_index.at("U");

    PartialProgram u1 = make_u(7), u2 = make_u(9);
    Word u1_spsave = compile_component(u1.defs.at("U"), maps).layout.spsave;
    Word u2_spsave = compile_component(u2.defs.at("U"), maps).layout.spsave;
    internal_check(u1_spsave != u2_spsave, "demo variants must differ in layout");

    // attacker: Main plants 99 in r_t3 and calls U.f(42); R halts iff the
    // probed register carries the expected value, else loops forever
    auto make_attacker = [&](int probe_reg, const Word& expected) {
      Image a;
      for (int cidx : {maps.comp_index.at(kMainComponent), r_idx}) {
        a.names[cidx] = maps.comp_names[cidx];
        a.name_index[maps.comp_names[cidx]] = cidx;
        IfaceIdx ii;
        const Interface& iface = s.interfaces.at(maps.comp_names[cidx]);
        for (const auto& e : iface.exports) ii.exports.insert(maps.proc_index.at({maps.comp_names[cidx], e}).second);
        for (const auto& ref : iface.imports) ii.imports.insert(maps.proc_index.at(ref));
        a.psi[cidx] = ii;
      }
      int main_cidx = maps.comp_index.at(kMainComponent);
      std::vector<Instr> main_code = {iconst(99, kRT3), iconst(42, kRCom),
                                      icall(u_idx, maps.proc_index.at({"U", "f"}).second), ihalt()};
      a.entry[main_cidx][0] = 0;
      for (size_t i = 0; i < main_code.size(); ++i) a.mem0[main_cidx].store(Word(i), encode(main_code[i]));
      std::vector<Instr> r_code = {iconst(expected, kRT2), ibinop(MOp::Eq, probe_reg, kRT2, kRT2),
                                   ibnz(kRT2, 3), iconst(1, kRT1), ibnz(kRT1, 0), ihalt()};
      a.entry[r_idx][maps.proc_index.at({"R", "g"}).second] = 0;
      for (size_t i = 0; i < r_code.size(); ++i) a.mem0[r_idx].store(Word(i), encode(r_code[i]));
      return a;
    };

    long long fuel = 200000;
    auto status = [&](const Image& a, const PartialProgram& u, bool secure) {
      Image u_img = secure ? compile_program(u, maps)
                           : compile_insecure(u, maps, /*no_clean=*/true, /*no_spsave=*/false);
      Image linked = link_images(a, u_img);
      MachineState st = init_state(linked);
      demodetail::IsolationGuard guard;
      guard.reset(st);
      MRunResult r = mrun_observe(linked, st, fuel,
                                  [&](int prev, const MStepOutcome& out, const MachineState& after) {
                                    guard.step(prev, out, after);
                                  });
      internal_check(guard.ok, "isolation violated during the covert demo");
      return r.halted();
    };

    // value exchange: Main -> (r_t3) -> through U -> R
    Image probe_value = make_attacker(kRT3, 99);
    rep.covert_value_leaks_insecure = status(probe_value, u1, false);
    rep.covert_value_blocked_secure = !status(probe_value, u1, true);
    log << "covert value: insecure " << (rep.covert_value_leaks_insecure ? "leaks" : "blocked")
        << ", secure " << (rep.covert_value_blocked_secure ? "blocked" : "leaks") << "\n";

    // distinguisher: the leaked sp-save address reveals U1 vs U2
    Image probe_layout = make_attacker(kRT1, u1_spsave);
    bool d1 = status(probe_layout, u1, false);
    bool d2 = status(probe_layout, u2, false);
    rep.covert_distinguishes_insecure = d1 && !d2;
    bool s1 = status(probe_layout, u1, true);
    bool s2 = status(probe_layout, u2, true);
    rep.covert_indistinguishable_secure = s1 == s2;
    log << "covert distinguisher: insecure " << (rep.covert_distinguishes_insecure ? "splits U1/U2" : "fails")
        << ", secure " << (rep.covert_indistinguishable_secure ? "cannot split" : "splits") << "\n";
  }

  rep.log = log.str();
  return rep;
}

}  // namespace scc
