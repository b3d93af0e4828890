#include <catch2/catch_amalgamated.hpp>

#include "scc/calibration.hpp"
#include "scc/compile.hpp"
#include "scc/interp.hpp"
#include "scc/parse.hpp"

using namespace scc;

namespace {

// Run a compiled expression in a one-compartment harness: r_sp is pointed at
// a fresh stack region and a Halt is appended.
MachineState run_expr_harness(const ExprPtr& e, const ComponentDef& def) {
  IndexMaps maps;
  maps.comp_names = {def.name};
  maps.comp_index[def.name] = 0;
  maps.proc_names.resize(1);
  Word buftotal = 0;
  for (unsigned sz : def.buffers) buftotal += sz;
  Word codebase = buftotal + 1;
  std::vector<Instr> body = compile_expr(e, def, maps, codebase + 1);
  std::vector<Instr> code;
  code.push_back(iconst(0, kRSp));  // patched below
  for (auto& x : body) code.push_back(std::move(x));
  code.push_back(ihalt());
  Word stackbase = codebase + Word(code.size());
  code[0] = iconst(stackbase, kRSp);

  Image img;
  img.names[0] = def.name.empty() ? "Main" : def.name;
  img.name_index[img.names[0]] = 0;
  img.psi[0].exports = {0};
  img.entry[0][0] = codebase;
  img.mem0[0].store(buftotal, stackbase);
  for (size_t i = 0; i < code.size(); ++i) img.mem0[0].store(codebase + i, encode(code[i]));
  MachineState st;
  st.current = 0;
  st.mem = img.mem0;
  st.reg.fill(Word(0));
  st.pc = codebase;
  MRunResult r = mrun_observe(img, st, 100000, [](int, const MStepOutcome&, const MachineState&) {});
  REQUIRE(r.halted());
  return st;
}

ComponentDef plain_def() {
  ComponentDef def;
  def.name = "Main";
  def.iface.exports = {"main"};
  def.buffers = {1};
  def.procedures["main"] = eint(0);
  return def;
}

RunResult source_status(const PartialProgram& w, long long fuel) { return run(w, fuel); }

MRunResult target_status(const PartialProgram& w, long long fuel, CompileOptions opts = {}) {
  return mrun(compile_whole(w, opts), target_fuel(fuel));
}

void expect_agreement(const std::string& src, long long fuel = 10000) {
  PartialProgram w = parse_program(src);
  RunResult s = source_status(w, fuel);
  MRunResult t = target_status(w, fuel);
  INFO("source: " << s.text() << " target: " << t.text());
  REQUIRE(s.kind != RunResult::Kind::UndefinedBehavior);
  REQUIRE((s.kind == RunResult::Kind::Terminated) == t.halted());
}

}  // namespace

TEST_CASE("compile_expr: exit is a single Halt") {
  auto code = compile_expr(eexit(), plain_def(), IndexMaps(), 10);
  REQUIRE(code.size() == 1);
  REQUIRE(code[0].kind == Instr::Kind::Halt);
}

TEST_CASE("compile_expr: arithmetic lands in r_com") {
  MachineState st = run_expr_harness(parse_expr("2 + 3"), plain_def());
  REQUIRE(st.reg[kRCom] == 5);
  st = run_expr_harness(parse_expr("2 + 3 * 4 - 1"), plain_def());
  REQUIRE(st.reg[kRCom] == 13);
  st = run_expr_harness(parse_expr("if 1 <= 0 then 7 else 9"), plain_def());
  REQUIRE(st.reg[kRCom] == 9);
  st = run_expr_harness(parse_expr("if 3 == 3 then 7 else 9"), plain_def());
  REQUIRE(st.reg[kRCom] == 7);
  st = run_expr_harness(parse_expr("(b0[0] := 5; b0[0] + 1)"), plain_def());
  REQUIRE(st.reg[kRCom] == 6);
  st = run_expr_harness(parse_expr("7 - 2"), plain_def());
  REQUIRE(st.reg[kRCom] == 5);
}

TEST_CASE("compile_expr: unchecked out-of-bounds read hits the sp save slot") {
  // buffer size 1, so b0[1] is address 1 == the spsave cell
  MachineState st = run_expr_harness(eread(0, eint(1)), plain_def());
  REQUIRE(st.reg[kRCom] != 0);       // it read the saved stack pointer
  REQUIRE(st.reg[kRCom] == st.mem[0].load(1));
}

TEST_CASE("identity procedure: cross-call returns the argument with cleaned registers") {
  PartialProgram w = parse_program(R"(
    component Main { import C.f; export main; buffer 1; proc main(arg) = C.f(7); }
    component C { export f; buffer 1; proc f(arg) = b0[0]; }
  )");
  IndexMaps maps = IndexMaps::from_program(w);
  Image img = compile_program(w, maps);
  int c_idx = maps.comp_index.at("C");
  MachineState st = init_state(img);
  bool saw_return = false;
  mrun_observe(img, st, 100000, [&](int prev, const MStepOutcome& out, const MachineState& after) {
    if (out.decoded && out.instr.kind == Instr::Kind::Return && prev == c_idx &&
        out.kind == MStepOutcome::Kind::Step) {
      saw_return = true;
      REQUIRE(after.reg[kRCom] == 7);
      for (int r : {kRRa, kRSp, kRT1, kRT2, kRT3}) REQUIRE(after.reg[r] == 0);
    }
  });
  REQUIRE(saw_return);
}

TEST_CASE("local recursion compiles to Jal/Jump, no Call/Return instructions") {
  PartialProgram w = parse_program(R"(
    component Main { export main; buffer 1;
      proc main(arg) = Main.count(5);
      proc count(arg) = if b0[0] <= 0 then 0 else Main.count(b0[0] - 1);
    }
  )");
  Image img = compile_whole(w);
  MachineState st = init_state(img);
  int calls = 0, returns = 0, jals = 0;
  MRunResult r = mrun_observe(img, st, 100000,
                              [&](int, const MStepOutcome& out, const MachineState&) {
                                if (!out.decoded) return;
                                if (out.instr.kind == Instr::Kind::Call) ++calls;
                                if (out.instr.kind == Instr::Kind::Return) ++returns;
                                if (out.instr.kind == Instr::Kind::Jal) ++jals;
                              });
  REQUIRE(r.halted());
  REQUIRE(calls == 0);
  REQUIRE(jals == 6);
  REQUIRE(returns == 1);  // only main's own final return, on the empty stack
  REQUIRE(r.reason.kind == StuckReason::Kind::ReturnEmptyStack);
}

TEST_CASE("exported entry points equal the interface exports") {
  PartialProgram w = parse_program(R"(
    component Main { export main; buffer 1;
      proc main(arg) = Main.hidden(0);
      proc hidden(arg) = 3;
    }
  )");
  IndexMaps maps = IndexMaps::from_program(w);
  CompiledComponent cc = compile_component(w.defs.at("Main"), maps);
  REQUIRE(cc.entrypoints.size() == 1);
  REQUIRE(cc.entrypoints.count(0) == 1);
  REQUIRE(cc.layout.entries.count("hidden") == 1);  // it still has entries in the layout
}

TEST_CASE("separate compilation: compile-then-link equals link-then-compile, bit for bit") {
  PartialProgram w = parse_program(R"(
    component Main { import C1.f, C2.g; export main; buffer 2;
      proc main(arg) = C1.f(1) + C2.g(2); }
    component C1 { import C2.g; export f; buffer 1; proc f(arg) = C2.g(b0[0]); }
    component C2 { export g; buffer 1; proc g(arg) = b0[0] * 2; }
  )");
  IndexMaps maps = IndexMaps::from_program(w);
  std::string whole = write_image(compile_program(w, maps));
  for (auto compromised : std::vector<std::set<Name>>{{"C1"}, {"C2"}, {"C1", "C2"}, {}}) {
    auto parts = partition(w, compromised);
    Image a = compile_program(parts.context, maps);
    Image p = compile_program(parts.program, maps);
    REQUIRE(write_image(link_images(a, p)) == whole);
  }
  SECTION("restriction of a larger compile equals the pointwise compile") {
    auto parts = partition(w, {"C1"});
    Image solo = compile_program(parts.context, maps);
    Image whole_img = compile_program(w, maps);
    int cidx = maps.comp_index.at("C1");
    REQUIRE(whole_img.mem0.at(cidx) == solo.mem0.at(cidx));
    REQUIRE(whole_img.entry.at(cidx) == solo.entry.at(cidx));
  }
  SECTION("empty program compiles to an empty image") {
    PartialProgram empty;
    REQUIRE(write_image(compile_program(empty, maps)).empty());
  }
}

TEST_CASE("link_images rejects overlap and unresolved imports") {
  PartialProgram w = parse_program(R"(
    component Main { import C1.f; export main; buffer 1; proc main(arg) = C1.f(0); }
    component C1 { export f; buffer 1; proc f(arg) = 0; }
  )");
  IndexMaps maps = IndexMaps::from_program(w);
  auto parts = partition(w, {"C1"});
  Image a = compile_program(parts.context, maps);
  Image p = compile_program(parts.program, maps);
  REQUIRE_THROWS_AS(link_images(p, p), ImageOverlapError);
  Image empty;
  REQUIRE_THROWS_AS(link_images(p, empty), UnresolvedImportError);
  REQUIRE_NOTHROW(link_images(a, p));
}

TEST_CASE("whole-program agreement on fixed programs") {
  expect_agreement("component Main { export main; buffer 1; proc main(arg) = exit; }");
  expect_agreement("component Main { export main; buffer 1; proc main(arg) = 41 + 1; }");
  expect_agreement(R"(
    component Main { export main; buffer 2;
      proc main(arg) = (b0[1] := Main.fact(6); b0[1]);
      proc fact(arg) = if b0[0] <= 1 then 1 else b0[0] * Main.fact(b0[0] - 1);
    }
  )");
  expect_agreement(R"(
    component Main { import C.f; export main, back; buffer 1;
      proc main(arg) = C.f(4);
      proc back(arg) = C.f(b0[0]); }
    component C { import Main.back; export f; buffer 1;
      proc f(arg) = if b0[0] <= 0 then 0 else Main.back(b0[0] - 1); }
    component Main2 { export unused; buffer 1; proc unused(arg) = 0; }
  )",
                   10000);
  expect_agreement(R"(
    component Main { export main; buffer 1;
      proc main(arg) = Main.loop(0);
      proc loop(arg) = Main.loop(0);
    }
  )",
                   2000);
}

TEST_CASE("cross-component round trip computes the same value as the source") {
  PartialProgram w = parse_program(R"(
    component Main { import C.f; export main; buffer 2;
      proc main(arg) = (b0[1] := 9; if C.f(5) + b0[1] == 20 then exit else Main.spin(0));
      proc spin(arg) = Main.spin(0); }
    component C { export f; buffer 1; proc f(arg) = b0[0] + 6; }
  )");
  // source: C.f(5)=11, +9 = 20, so it exits; the compiled run must halt too
  REQUIRE(run(w, 10000).kind == RunResult::Kind::Terminated);
  REQUIRE(mrun(compile_whole(w), target_fuel(10000)).halted());
}

TEST_CASE("insecure build with no flags is bit-identical to the secure build") {
  PartialProgram w = parse_program(R"(
    component Main { import C.f; export main; buffer 1; proc main(arg) = C.f(1); }
    component C { export f; buffer 1; proc f(arg) = b0[0]; }
  )");
  IndexMaps maps = IndexMaps::from_program(w);
  REQUIRE(write_image(compile_insecure(w, maps, false, false)) ==
          write_image(compile_program(w, maps)));
}

TEST_CASE("de-optimized build preserves run status on defined programs") {
  const char* sources[] = {
      R"(component Main { export main; buffer 1;
           proc main(arg) = Main.fact(5);
           proc fact(arg) = if b0[0] <= 1 then 1 else b0[0] * Main.fact(b0[0] - 1); })",
      R"(component Main { import C.f; export main; buffer 1; proc main(arg) = C.f(3); }
         component C { export f; buffer 1; proc f(arg) = C.priv(b0[0]);
           proc priv(arg) = b0[0] * 2; })",
  };
  for (const char* src : sources) {
    PartialProgram w = parse_program(src);
    IndexMaps maps = IndexMaps::from_program(w);
    CompileOptions deopt;
    deopt.local_call_opt = false;
    MRunResult opt = mrun(compile_program(w, maps), 100000);
    MRunResult de = mrun(compile_program(w, maps, deopt), 100000);
    REQUIRE(opt.halted() == de.halted());
    RunResult s = run(w, 10000);
    REQUIRE((s.kind == RunResult::Kind::Terminated) == opt.halted());
  }
}

TEST_CASE("no-spsave: reentrant cross-call corrupts the local stack") {
  PartialProgram w = parse_program(R"(
    component Main { import U.f; export main; buffer 1; proc main(arg) = U.f(0); }
    component U { import V.h; export f, g; buffer 1;
      proc f(arg) = 3 + V.h(0);
      proc g(arg) = (1 + 1) * (2 + 2); }
    component V { import U.g; export h; buffer 1; proc h(arg) = U.g(0) + 1; }
  )");
  IndexMaps maps = IndexMaps::from_program(w);
  Image secure = compile_program(w, maps);
  MachineState st_secure = init_state(secure);
  MRunResult r_secure =
      mrun_observe(secure, st_secure, 100000, [](int, const MStepOutcome&, const MachineState&) {});
  REQUIRE(r_secure.halted());
  REQUIRE(st_secure.reg[kRCom] == 12);  // 3 + (8 + 1)

  // U.f parks its pending temporary (the literal 3) on its local stack while
  // control is away. Its frame starts at the stack base: two prologue slots,
  // then the temporary.
  int u_idx = maps.comp_index.at("U");
  Word temp_cell = compile_component(w.defs.at("U"), maps).layout.stackbase + 2;
  REQUIRE(st_secure.mem.at(u_idx).load(temp_cell) == 3);  // intact under the secure build

  // Without the sp save, the reentrant entry into U.g reloads the stale
  // saved sp and grows a second frame over U.f's live one.
  Image insecure = compile_insecure(w, maps, /*no_clean=*/false, /*no_spsave=*/true);
  MachineState st = init_state(insecure);
  MRunResult r =
      mrun_observe(insecure, st, 100000, [](int, const MStepOutcome&, const MachineState&) {});
  REQUIRE(r.halted());
  REQUIRE(st.mem.at(u_idx).load(temp_cell) != 3);  // trampled
  bool deviates = !(st.reg[kRCom] == 12 && r.reason.kind == StuckReason::Kind::ReturnEmptyStack);
  REQUIRE(deviates);
}

TEST_CASE("fuel calibration bound holds on fixed terminating programs") {
  const char* sources[] = {
      "component Main { export main; buffer 1; proc main(arg) = exit; }",
      "component Main { export main; buffer 1; proc main(arg) = 1 + 2 * 3; }",
      R"(component Main { export main; buffer 2;
           proc main(arg) = (b0[1] := Main.fact(7); b0[1]);
           proc fact(arg) = if b0[0] <= 1 then 1 else b0[0] * Main.fact(b0[0] - 1); })",
      R"(component Main { import C.f; export main, back; buffer 1;
           proc main(arg) = C.f(6);
           proc back(arg) = C.f(b0[0]); }
         component C { import Main.back; export f; buffer 1;
           proc f(arg) = if b0[0] <= 0 then 0 else Main.back(b0[0] - 1); }
         component Main2 { export unused; buffer 1; proc unused(arg) = 0; })",
  };
  long long worst_num = 0, worst_den = 1;
  for (const char* src : sources) {
    PartialProgram w = parse_program(src);
    RunResult s = run(w, 1000000);
    REQUIRE(s.kind == RunResult::Kind::Terminated);
    MRunResult t = mrun(compile_whole(w), 100000000);
    REQUIRE(t.halted());
    if (t.steps * worst_den > worst_num * s.steps) {
      worst_num = t.steps;
      worst_den = s.steps;
    }
  }
  INFO("worst instruction expansion: " << worst_num << "/" << worst_den);
  REQUIRE(worst_num <= kFuelExpansion * worst_den);
}
