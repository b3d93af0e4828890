#include <catch2/catch_amalgamated.hpp>

#include "scc/interp.hpp"
#include "scc/parse.hpp"

using namespace scc;

namespace {
PartialProgram prog(const std::string& src) { return parse_program(src); }
}  // namespace

TEST_CASE("eval_expr_closed arithmetic") {
  REQUIRE(eval_expr_closed(parse_expr("2 + 3")) == 5);
  REQUIRE(eval_expr_closed(parse_expr("1; 4")) == 4);
  REQUIRE(eval_expr_closed(parse_expr("if 2 then 8 else 9")) == 8);
  REQUIRE(eval_expr_closed(parse_expr("if 0 then 8 else 9")) == 9);
  REQUIRE(eval_expr_closed(parse_expr("7 - 2 * 3")) == 1);
  REQUIRE(eval_expr_closed(parse_expr("3 == 3")) == 1);
  REQUIRE(eval_expr_closed(parse_expr("4 <= 3")) == 0);
  REQUIRE_THROWS_AS(eval_expr_closed(parse_expr("b0[0]")), UnsupportedExprError);
}

TEST_CASE("init_config zero store and Main.main body") {
  auto ls = prepare(prog("component Main { export main; buffer 1; proc main(arg) = exit; }"));
  Config cfg = init_config(ls);
  REQUIRE(cfg.current == "Main");
  REQUIRE(cfg.expr->kind == Expr::Kind::Exit);
  REQUIRE(cfg.kont.empty());
  REQUIRE(cfg.callstack.empty());
  REQUIRE(cfg.store.size() == 1);
  REQUIRE(cfg.store[0] == 0);
}

TEST_CASE("init_config covers every component's buffers") {
  auto ls = prepare(prog(R"(
    component Main { import C1.f; export main; buffer 2; proc main(arg) = C1.f(0); }
    component C1 { export f; buffer 1, 3; proc f(arg) = 0; }
  )"));
  REQUIRE(init_config(ls).store.size() == 6);
}

TEST_CASE("missing Main is an error") {
  REQUIRE_THROWS_AS(init_config(prepare(prog("component C { export f; buffer 1; proc f(arg) = 0; }"))),
                    MissingMainError);
}

TEST_CASE("run: exit terminates in one step") {
  RunResult r = run(prog("component Main { export main; buffer 1; proc main(arg) = exit; }"), 100);
  REQUIRE(r.kind == RunResult::Kind::Terminated);
  REQUIRE(r.steps == 1);
}

TEST_CASE("run: syntactic self-loop exhausts fuel") {
  RunResult r = run(prog(R"(
    component Main { export main; buffer 1;
      proc main(arg) = Main.loop(0);
      proc loop(arg) = Main.loop(0);
    }
  )"),
                    500);
  REQUIRE(r.kind == RunResult::Kind::FuelExhausted);
  REQUIRE(r.steps == 500);
}

TEST_CASE("run: out-of-bounds read blames the reading component") {
  RunResult r = run(prog("component Main { export main; buffer 1; proc main(arg) = b0[1]; }"), 100);
  REQUIRE(r.kind == RunResult::Kind::UndefinedBehavior);
  REQUIRE(r.blamed == "Main");
}

TEST_CASE("run: out-of-bounds write blames too") {
  RunResult r =
      run(prog("component Main { export main; buffer 2; proc main(arg) = b0[5] := 1; }"), 100);
  REQUIRE(r.kind == RunResult::Kind::UndefinedBehavior);
  REQUIRE(r.blamed == "Main");
}

TEST_CASE("call writes argument into callee cell and return restores caller") {
  auto ls = prepare(prog(R"(
    component Main { import C1.f; export main; buffer 1;
      proc main(arg) = (b0[0] := 9; C1.f(5) + b0[0]); }
    component C1 { export f; buffer 1; proc f(arg) = b0[0] + 1; }
  )"));
  // C1.f(5) evaluates to 6, caller's argument cell is restored to 9 afterwards
  Config cfg = init_config(ls);
  for (int i = 0; i < 200; ++i) {
    StepResult r = step_inplace(ls, cfg);
    if (r.kind == StepResult::Kind::FinalValue) {
      REQUIRE(r.value == 15);
      return;
    }
    REQUIRE(r.kind == StepResult::Kind::Step);
  }
  FAIL("did not terminate");
}

TEST_CASE("call step shape follows the displayed rules") {
  auto ls = prepare(prog(R"(
    component Main { import C1.f; export main; buffer 1; proc main(arg) = C1.f(5); }
    component C1 { export f; buffer 1; proc f(arg) = b0[0]; }
  )"));
  Config cfg = init_config(ls);
  // decompose Call, reduce argument to a value, then take the call step
  REQUIRE(step_inplace(ls, cfg).kind == StepResult::Kind::Step);
  REQUIRE(cfg.kont.size() == 1);
  REQUIRE(cfg.kont.back().kind == FlatCtx::Kind::CallArg);
  REQUIRE(step_inplace(ls, cfg).kind == StepResult::Kind::Step);
  REQUIRE(cfg.current == "C1");
  REQUIRE(cfg.kont.empty());
  REQUIRE(cfg.callstack.size() == 1);
  REQUIRE(cfg.callstack.back().comp == "Main");
  auto slot = ls.layout.slot("C1", 0);
  REQUIRE(cfg.store[slot->base] == 5);
}

TEST_CASE("exit anywhere under a continuation is final") {
  RunResult r =
      run(prog("component Main { export main; buffer 1; proc main(arg) = 1 + exit; }"), 100);
  REQUIRE(r.kind == RunResult::Kind::Terminated);
}

TEST_CASE("determinism: same fuel same result, larger fuel keeps settled results") {
  PartialProgram w = prog(R"(
    component Main { import C1.f; export main; buffer 2;
      proc main(arg) = (b0[1] := C1.f(3); b0[1] * b0[1]); }
    component C1 { export f; buffer 1; proc f(arg) = if b0[0] <= 0 then 1 else b0[0] * C1.f(b0[0] - 1); }
  )");
  RunResult a = run(w, 5000);
  RunResult b = run(w, 5000);
  REQUIRE(a == b);
  REQUIRE(a.kind == RunResult::Kind::Terminated);
  RunResult c = run(w, 50000);
  REQUIRE(c == a);
}

TEST_CASE("store frame property: steps in C touch only C's cells, except call/return cells") {
  auto ls = prepare(prog(R"(
    component Main { import C1.f; export main; buffer 2;
      proc main(arg) = (b0[1] := 4; C1.f(b0[1])); }
    component C1 { export f; buffer 2; proc f(arg) = b0[1] := b0[0]; }
  )"));
  Config cfg = init_config(ls);
  for (int guard = 0; guard < 500; ++guard) {
    Config before = cfg;
    StepResult r = step_inplace(ls, cfg);
    if (r.kind != StepResult::Kind::Step) break;
    bool call_step = before.kont.size() > 0 && before.kont.back().kind == FlatCtx::Kind::CallArg &&
                     before.expr->kind == Expr::Kind::Int;
    bool return_step = before.kont.empty() && before.expr->kind == Expr::Kind::Int &&
                       !before.callstack.empty();
    for (const auto& [comp, slots] : ls.layout.slots) {
      if (comp == before.current) continue;
      for (const auto& slot : slots) {
        for (size_t i = 0; i < slot.size; ++i) {
          bool changed = before.store[slot.base + i] != cfg.store[slot.base + i];
          if (changed) {
            bool argument_cell = slot.base == ls.layout.slot(comp, 0)->base && i == 0;
            REQUIRE((call_step || return_step));
            REQUIRE(argument_cell);
          }
        }
      }
    }
  }
}
