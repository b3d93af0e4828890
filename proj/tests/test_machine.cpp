#include <catch2/catch_amalgamated.hpp>

#include "scc/machine.hpp"

using namespace scc;

namespace {

// One compartment named Main, code placed from address 0, entry pidx 0.
Image tiny_image(const std::vector<Instr>& code) {
  Image img;
  img.names[0] = "Main";
  img.name_index["Main"] = 0;
  img.psi[0].exports = {0};
  img.entry[0][0] = 0;
  for (size_t i = 0; i < code.size(); ++i) img.mem0[0].store(Word(i), encode(code[i]));
  return img;
}

}  // namespace

TEST_CASE("encoding: opcode table anchors") {
  REQUIRE(encode(ihalt()) == 11);
  REQUIRE(decode(Word(11))->kind == Instr::Kind::Halt);
  REQUIRE_FALSE(decode(Word(12)).has_value());
  REQUIRE(encode(inop()) == 0);
  REQUIRE(encode(iret()) == 8);
}

TEST_CASE("encoding: round-trip over generated instructions") {
  std::vector<Instr> all;
  for (int i = -9; i <= 9; ++i)
    for (int rd = 0; rd < kNumRegs; ++rd) all.push_back(iconst(i, rd));
  for (int a = 0; a < kNumRegs; ++a)
    for (int b = 0; b < kNumRegs; ++b) {
      all.push_back(imov(a, b));
      all.push_back(iload(a, b));
      all.push_back(istore(a, b));
      for (int c = 0; c < kNumRegs; ++c)
        for (int op = 0; op < 5; ++op) all.push_back(ibinop(static_cast<MOp>(op), a, b, c));
    }
  for (int r = 0; r < kNumRegs; ++r) {
    all.push_back(ijump(r));
    all.push_back(ijal(r));
    for (int off = -6; off <= 6; ++off) all.push_back(ibnz(r, off));
  }
  for (int c = 0; c < 7; ++c)
    for (int p = 0; p < 7; ++p) all.push_back(icall(c, p));
  all.push_back(inop());
  all.push_back(iret());
  all.push_back(ihalt());

  std::set<Word> seen;
  for (const auto& x : all) {
    Word w = encode(x);
    REQUIRE(seen.insert(w).second);  // encode is injective
    auto d = decode(w);
    REQUIRE(d.has_value());
    REQUIRE(encode(*d) == w);
  }
}

TEST_CASE("decode rejects malformed payloads") {
  REQUIRE_FALSE(decode(Word(-3)).has_value());
  // register field >= 6 in Mov
  REQUIRE_FALSE(decode(Word(2) + 16 * Word(6)).has_value());
  // nonzero payload on payload-free opcodes
  REQUIRE_FALSE(decode(Word(8) + 16).has_value());
  REQUIRE_FALSE(decode(Word(0) + 16).has_value());
  REQUIRE_FALSE(decode(Word(11) + 32).has_value());
  // binop with bop >= 5
  REQUIRE_FALSE(decode(Word(9) + 16 * Word(5)).has_value());
}

TEST_CASE("cantor pairing is a bijection on a grid") {
  std::set<Word> seen;
  for (int c = 0; c < 30; ++c)
    for (int p = 0; p < 30; ++p) {
      Word n = cantor(c, p);
      REQUIRE(seen.insert(n).second);
      auto [c2, p2] = uncantor(n);
      REQUIRE(c2 == c);
      REQUIRE(p2 == p);
    }
}

TEST_CASE("single halt at entry") {
  MRunResult r = mrun(tiny_image({ihalt()}), 100);
  REQUIRE(r.halted());
  REQUIRE(r.steps == 1);
  REQUIRE(r.reason.kind == StuckReason::Kind::HaltInstr);
}

TEST_CASE("pc-preserving branch loops forever") {
  MRunResult r = mrun(tiny_image({iconst(1, kRT1), ibnz(kRT1, 0)}), 1000);
  REQUIRE(r.kind == MRunResult::Kind::FuelExhausted);
}

TEST_CASE("bnz on zero falls through") {
  Image img = tiny_image({ibnz(kRT1, 3), ihalt()});
  MachineState st = init_state(img);
  REQUIRE(mstep_inplace(img, st).kind == MStepOutcome::Kind::Step);
  REQUIRE(st.pc == 1);
}

TEST_CASE("jal records the return address") {
  Image img = tiny_image({iconst(40, kRT2), ijal(kRT2)});
  MachineState st = init_state(img);
  st.pc = 1;
  st.reg[kRT2] = 40;
  REQUIRE(mstep_inplace(img, st).kind == MStepOutcome::Kind::Step);
  REQUIRE(st.reg[kRRa] == 2);
  REQUIRE(st.pc == 40);
}

TEST_CASE("running off written memory is stuck, not a nop sled") {
  MRunResult r = mrun(tiny_image({inop()}), 100);
  REQUIRE(r.halted());
  REQUIRE(r.steps == 2);
  REQUIRE(r.reason.kind == StuckReason::Kind::Undecodable);
}

TEST_CASE("negative addresses are stuck") {
  Image img = tiny_image({iconst(-4, kRT1), iload(kRT1, kRCom)});
  MRunResult r = mrun(img, 10);
  REQUIRE(r.halted());
  REQUIRE(r.reason.kind == StuckReason::Kind::NegativeAddress);
}

TEST_CASE("interface-checked call and return") {
  // Main (cidx 0) imports 1.0; compartment 1 exports pidx 0 and returns.
  Image img;
  img.names[0] = "Main";
  img.names[1] = "Other";
  img.name_index["Main"] = 0;
  img.name_index["Other"] = 1;
  img.psi[0].exports = {0};
  img.psi[0].imports = {{1, 0}};
  img.psi[1].exports = {0};
  img.entry[0][0] = 0;
  img.entry[1][0] = 0;
  img.mem0[0].store(0, encode(icall(1, 0)));
  img.mem0[0].store(1, encode(ihalt()));
  img.mem0[1].store(0, encode(iconst(99, kRCom)));
  img.mem0[1].store(1, encode(iret()));

  MachineState st = init_state(img);
  REQUIRE(mstep_inplace(img, st).kind == MStepOutcome::Kind::Step);
  REQUIRE(st.current == 1);
  REQUIRE(st.stack.size() == 1);
  REQUIRE(st.stack.back().first == 0);
  REQUIRE(st.stack.back().second == 1);
  REQUIRE(mstep_inplace(img, st).kind == MStepOutcome::Kind::Step);
  MStepOutcome ret = mstep_inplace(img, st);
  REQUIRE(ret.kind == MStepOutcome::Kind::Step);
  REQUIRE(st.current == 0);
  REQUIRE(st.pc == 1);
  REQUIRE(st.stack.empty());
  REQUIRE(st.reg[kRCom] == 99);

  SECTION("calling a non-imported target is an interface violation") {
    Image img2 = img;
    img2.psi[0].imports.clear();
    MachineState st2 = init_state(img2);
    MStepOutcome out = mstep_inplace(img2, st2);
    REQUIRE(out.kind == MStepOutcome::Kind::Stuck);
    REQUIRE(out.reason.kind == StuckReason::Kind::InterfaceViolation);
  }
  SECTION("return on empty stack is stuck") {
    Image img3 = tiny_image({iret()});
    MRunResult r = mrun(img3, 10);
    REQUIRE(r.halted());
    REQUIRE(r.reason.kind == StuckReason::Kind::ReturnEmptyStack);
  }
}

TEST_CASE("init_state: registers zero, pc at Main.main entry") {
  Image img = tiny_image({ihalt()});
  img.entry[0][0] = 0;
  MachineState st = init_state(img);
  for (int r = 0; r < kNumRegs; ++r) REQUIRE(st.reg[r] == 0);
  REQUIRE(st.current == 0);
  REQUIRE(st.pc == 0);
  Image no_main;
  REQUIRE_THROWS_AS(init_state(no_main), MissingMainEntryError);
}

TEST_CASE("image text format round-trips") {
  Image img;
  img.names[0] = "Main";
  img.name_index["Main"] = 0;
  img.names[2] = "C1";
  img.name_index["C1"] = 2;
  img.psi[0].exports = {0};
  img.psi[0].imports = {{2, 1}};
  img.psi[2].exports = {1};
  img.entry[0][0] = 7;
  img.entry[2][1] = 3;
  img.mem0[0].store(7, encode(ihalt()));
  img.mem0[0].store(100, Word("123456789012345678901234567890"));
  img.mem0[2].store(3, encode(iret()));
  std::string text = write_image(img);
  Image img2 = read_image(text);
  REQUIRE(write_image(img2) == text);
  REQUIRE(img2.mem0.at(0).load(100) == Word("123456789012345678901234567890"));
  REQUIRE(img2.psi.at(0).imports.count({2, 1}) == 1);
}

TEST_CASE("isolation: a step writes only the current compartment") {
  // Compartment 0 stores into its own memory while compartment 1 exists.
  Image img = tiny_image({iconst(50, kRT1), iconst(7, kRT2), istore(kRT1, kRT2), ihalt()});
  img.names[1] = "Other";
  img.name_index["Other"] = 1;
  img.psi[1];
  img.mem0[1].store(50, Word(42));
  MachineState st = init_state(img);
  CompartMem other_before = st.mem[1];
  MRunResult r = mrun_observe(img, st, 100, [&](int, const MStepOutcome&, const MachineState& after) {
    REQUIRE(after.mem.at(1) == other_before);
  });
  REQUIRE(r.halted());
  REQUIRE(st.mem[0].load(50) == 7);
}
