#include <catch2/catch_amalgamated.hpp>

#include <functional>

#include "scc/backtrans.hpp"
#include "scc/fulldef.hpp"
#include "scc/parse.hpp"

using namespace scc;

namespace {

RegFile com_only(Word v) {
  RegFile r{};
  r.fill(Word(0));
  r[kRCom] = std::move(v);
  return r;
}

// Context owns Main and may call P.p; the program side is a single
// component P.
Shape call_out_shape() {
  Shape s;
  s.interfaces[kMainComponent] = {{kMainProc}, {{"P", "p"}}};
  s.interfaces["P"] = {{"p"}, {}};
  s.uncompromised = {"P"};
  return s;
}

}  // namespace

TEST_CASE("backtranslate: empty trace with tick gamma1 gives pure responders") {
  // program side owns main here
  Shape s;
  s.interfaces[kMainComponent] = {{kMainProc}, {{"A", "f"}}};
  s.interfaces["A"] = {{"f"}, {}};
  s.uncompromised = {kMainComponent};

  BacktransInput in{{}, make_tick(), s};
  BacktransOutput out = backtranslate(in);
  REQUIRE(has_shape_context(out.context, s));
  REQUIRE(out.context.defs.count("A") == 1);
  // fully defined by construction: constant in-bounds indices only
  FullDefVerdict v = check_context_fully_defined_bounded(out.context, s, 60, 4000, 11);
  REQUIRE_FALSE(v.counterexample_found);

  // witness: a program whose main halts immediately
  PartialProgram p = parse_program(R"(
    component Main { import A.f; export main; buffer 1; proc main(arg) = exit; }
  )");
  Image witness = compile_program(p, IndexMaps::from_shape(s));
  DefinabilityReport rep = verify_definability(out, in, witness, 200000);
  INFO(rep.note);
  REQUIRE(rep.all_pass());
}

TEST_CASE("backtranslate: call out, compare the returned value, exit or diverge") {
  Shape s = call_out_shape();
  FineTrace fine = {{false, Side::Context, {make_call(1, 0, com_only(7)), false}}};
  // gamma1: the program returns 5
  BacktransInput in{fine, make_ret(com_only(5)), s};
  BacktransOutput out = backtranslate(in);
  REQUIRE(has_shape_context(out.context, s));

  // the witness program really answers 7 with 5
  PartialProgram p = parse_program("component P { export p; buffer 1; proc p(arg) = 5; }");
  Image witness = compile_program(p, IndexMaps::from_shape(s));
  DefinabilityReport rep = verify_definability(out, in, witness, 200000);
  INFO(rep.note);
  REQUIRE(rep.pre_ok);
  REQUIRE(rep.clause1.yes());
  REQUIRE(rep.clause2_applicable);
  REQUIRE(rep.clause2.yes());
  REQUIRE(rep.clause3_failures == 0);
  REQUIRE(rep.clause3_checked > 0);
  REQUIRE(rep.all_pass());

  SECTION("the source-level context distinguishes the matching program from others") {
    PartialProgram good = parse_program("component P { export p; buffer 1; proc p(arg) = 5; }");
    PartialProgram bad = parse_program("component P { export p; buffer 1; proc p(arg) = 6; }");
    REQUIRE(run(link(out.context, good), 10000).kind == RunResult::Kind::Terminated);
    REQUIRE(run(link(out.context, bad), 10000).kind == RunResult::Kind::FuelExhausted);
  }

  SECTION("a context built for a different value rejects this one (mutation)") {
    BacktransInput wrong = in;
    wrong.gamma1 = make_ret(com_only(999));
    BacktransOutput mutated = backtranslate(wrong);
    DefinabilityReport rep2 = verify_definability(mutated, in, witness, 200000);
    REQUIRE(rep2.clause2_applicable);
    REQUIRE_FALSE(rep2.clause2.yes());
  }
}

TEST_CASE("backtranslate: gamma1 call dispatches on the entered procedure and argument") {
  // program owns main and calls into the context after the trace
  Shape s;
  s.interfaces[kMainComponent] = {{kMainProc}, {{"A", "f"}, {"A", "g"}}};
  s.interfaces["A"] = {{"f", "g"}, {}};
  s.uncompromised = {kMainComponent};
  IndexMaps maps = IndexMaps::from_shape(s);
  int a_idx = maps.comp_index.at("A");
  int f_pidx = maps.proc_index.at({"A", "f"}).second;
  int g_pidx = maps.proc_index.at({"A", "g"}).second;

  // empty trace; gamma1: the program calls A.f with 9
  BacktransInput in{{}, make_call(a_idx, f_pidx, com_only(9)), s};
  BacktransOutput out = backtranslate(in);
  Image compiled = compile_program(out.context, maps);

  Trace t_match = {{make_call(a_idx, f_pidx, com_only(9)), true}, {make_tick(), false}};
  REQUIRE(context_has_trace(compiled, s, t_match, 200000).yes());

  // wrong argument: the context diverges instead of ticking
  Trace t_wrong_arg = {{make_call(a_idx, f_pidx, com_only(8)), true}};
  REQUIRE(context_has_trace(compiled, s, t_wrong_arg, 200000).yes());
  REQUIRE(next_context_action(compiled, s, t_wrong_arg, 200000).kind == NextAction::Kind::Silent);

  // wrong procedure: diverges too
  Trace t_wrong_proc = {{make_call(a_idx, g_pidx, com_only(9)), true}};
  REQUIRE(next_context_action(compiled, s, t_wrong_proc, 200000).kind == NextAction::Kind::Silent);

  // gamma1 with dirty extra registers is the same action under zeta
  RegFile dirty = com_only(9);
  dirty[kRT2] = 77;
  Trace t_dirty = {{make_call(a_idx, f_pidx, dirty), true}, {make_tick(), false}};
  REQUIRE(context_has_trace(compiled, s, t_dirty, 200000).yes());
}

TEST_CASE("backtranslate: internal routing is reproduced") {
  // context = {Main, C1}; Main calls C1 internally, then C1 calls the program
  Shape s;
  s.interfaces[kMainComponent] = {{kMainProc}, {{"C1", "h"}}};
  s.interfaces["C1"] = {{"h"}, {{"P", "p"}}};
  s.interfaces["P"] = {{"p"}, {}};
  s.uncompromised = {"P"};
  IndexMaps maps = IndexMaps::from_shape(s);
  int c1 = maps.comp_index.at("C1");
  int pp = maps.comp_index.at("P");

  FineTrace fine = {{true, Side::Context, {make_call(c1, 0, com_only(3)), false}},
                    {false, Side::Context, {make_call(pp, 0, com_only(4)), false}}};
  BacktransInput in{fine, make_ret(com_only(1)), s};
  BacktransOutput out = backtranslate(in);
  REQUIRE(out.context.defs.count(kMainComponent) == 1);
  REQUIRE(out.context.defs.count("C1") == 1);

  PartialProgram p = parse_program("component P { export p; buffer 1; proc p(arg) = 1; }");
  Image witness = compile_program(p, maps);
  DefinabilityReport rep = verify_definability(out, in, witness, 400000);
  INFO(rep.note << " clause1@" << rep.clause1.at << " " << rep.clause1.why);
  REQUIRE(rep.all_pass());

  // replay fidelity: decomposing the compiled context against the witness
  // reproduces the context events of the input up to the decision point
  Image compiled = compile_program(out.context, maps);
  FineTrace replay = decompose_fine(compiled, witness, s, 400000);
  size_t idx = 0;
  for (const auto& ev : replay) {
    if (idx >= fine.size()) break;
    bool ctx_event = (ev.internal && ev.owner == Side::Context) ||
                     (!ev.internal && !ev.act.program_move);
    if (!ctx_event) continue;
    REQUIRE(ev.internal == fine[idx].internal);
    REQUIRE(ev.act.pay.kind == fine[idx].act.pay.kind);
    if (ev.act.pay.kind == ActPayload::Kind::Call) {
      REQUIRE(ev.act.pay.cidx == fine[idx].act.pay.cidx);
      REQUIRE(ev.act.pay.pidx == fine[idx].act.pay.pidx);
      REQUIRE(ev.act.pay.regs[kRCom] == fine[idx].act.pay.regs[kRCom]);
    }
    ++idx;
  }
  REQUIRE(idx == fine.size());
}

TEST_CASE("backtranslate rejects bad inputs") {
  Shape s = call_out_shape();
  SECTION("non-canonical context move") {
    RegFile dirty = com_only(7);
    dirty[kRT1] = 1;
    FineTrace fine = {{false, Side::Context, {make_call(1, 0, dirty), false}}};
    REQUIRE_THROWS_AS(backtranslate({fine, make_ret(com_only(5)), s}), NonCanonicalTraceError);
  }
  SECTION("context call without the import") {
    Shape s2 = s;
    s2.interfaces[kMainComponent].imports.clear();
    FineTrace fine = {{false, Side::Context, {make_call(1, 0, com_only(7)), false}}};
    REQUIRE_THROWS_AS(backtranslate({fine, make_ret(com_only(5)), s2}), NonReplayableTraceError);
  }
  SECTION("gamma1 return with no pending call") {
    REQUIRE_THROWS_AS(backtranslate({{}, make_ret(com_only(5)), s}), NonReplayableTraceError);
  }
}

TEST_CASE("generated contexts are syntactically safe") {
  Shape s = call_out_shape();
  FineTrace fine = {{false, Side::Context, {make_call(1, 0, com_only(7)), false}}};
  BacktransOutput out = backtranslate({fine, make_ret(com_only(5)), s});
  for (const auto& [_, def] : out.context.defs) {
    for (const auto& [pname, body] : def.procedures) {
      std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& e) {
        if (!e) return;
        if (e->kind == Expr::Kind::Read || e->kind == Expr::Kind::Write) {
          REQUIRE(e->a->kind == Expr::Kind::Int);
          REQUIRE(e->a->lit >= 0);
          REQUIRE(e->a->lit < def.buffers[e->buffer]);
        }
        walk(e->a);
        walk(e->b);
        walk(e->c);
      };
      walk(body);
    }
  }
  FullDefVerdict v = check_context_fully_defined_bounded(out.context, s, 100, 4000, 5);
  REQUIRE_FALSE(v.counterexample_found);
}
