#include <catch2/catch_amalgamated.hpp>

#include "scc/lang.hpp"
#include "scc/parse.hpp"

using namespace scc;

namespace {

ComponentDef simple_component(const Name& name) {
  ComponentDef c;
  c.name = name;
  c.iface.exports = {"f"};
  c.buffers = {1};
  c.procedures["f"] = eint(1);
  return c;
}

bool has_violation(const std::vector<Violation>& vs, Violation::Kind k) {
  for (const auto& v : vs)
    if (v.kind == k) return true;
  return false;
}

}  // namespace

TEST_CASE("component wf: export without body") {
  ComponentDef c = simple_component("C0");
  c.iface.exports.insert("g");
  auto vs = check_component_wf(c);
  REQUIRE(has_violation(vs, Violation::Kind::MissingExport));
}

TEST_CASE("component wf: call to unimported procedure") {
  ComponentDef c = simple_component("C0");
  c.procedures["f"] = ecall("D", "g", eint(0));
  auto vs = check_component_wf(c);
  REQUIRE(has_violation(vs, Violation::Kind::UnimportedCall));
}

TEST_CASE("component wf: well-formed one-procedure component") {
  REQUIRE(check_component_wf(simple_component("C0")).empty());
}

TEST_CASE("component wf: self-calls need no import, unknown buffers flagged") {
  ComponentDef c = simple_component("C0");
  c.procedures["f"] = ecall("C0", "f", eint(0));
  REQUIRE(check_component_wf(c).empty());
  c.procedures["f"] = eread(3, eint(0));
  REQUIRE(has_violation(check_component_wf(c), Violation::Kind::UnknownBuffer));
}

TEST_CASE("shape wf: import from component outside the shape") {
  Shape s;
  s.interfaces["Main"] = {{"main"}, {{"C1", "f"}}};
  s.uncompromised = {"Main"};
  REQUIRE(has_violation(check_shape_wf(s), Violation::Kind::ImportFromUnknown));
}

TEST_CASE("shape wf: import of a non-exported procedure") {
  Shape s;
  s.interfaces["Main"] = {{"main"}, {{"C1", "f"}}};
  s.interfaces["C1"] = {{"g"}, {}};
  s.uncompromised = {"Main"};
  REQUIRE(has_violation(check_shape_wf(s), Violation::Kind::ImportNotExported));
}

TEST_CASE("shape wf: mutual imports of exported procedures") {
  Shape s;
  s.interfaces["Main"] = {{"main"}, {{"C1", "f"}}};
  s.interfaces["C1"] = {{"f"}, {{"Main", "main"}}};
  s.uncompromised = {"Main"};
  REQUIRE(check_shape_wf(s).empty());
}

TEST_CASE("shape wf: shape without Main is rejected") {
  Shape s;
  s.interfaces["C1"] = {{"f"}, {}};
  REQUIRE(has_violation(check_shape_wf(s), Violation::Kind::MissingMain));
}

static PartialProgram two_component_program() {
  PartialProgram w;
  ComponentDef main_def;
  main_def.name = "Main";
  main_def.iface.exports = {"main"};
  main_def.iface.imports = {{"C1", "f"}};
  main_def.buffers = {1};
  main_def.procedures["main"] = ecall("C1", "f", eint(3));
  ComponentDef c1 = simple_component("C1");
  w.defs["Main"] = main_def;
  w.defs["C1"] = c1;
  return w;
}

TEST_CASE("shape judgments over a two-component program") {
  PartialProgram w = two_component_program();
  auto [ctx, prog, shape] = partition(w, {"C1"});
  REQUIRE(check_shape_wf(shape).empty());
  REQUIRE(has_shape_program(prog, shape));
  REQUIRE(has_shape_context(ctx, shape));

  SECTION("program defining a compromised component does not have program shape") {
    REQUIRE_FALSE(has_shape_program(w, shape));
  }
  SECTION("a def exporting less than its interface fails") {
    PartialProgram p2 = prog;
    p2.defs.at("Main").procedures.erase("main");
    REQUIRE_FALSE(has_shape_program(p2, shape));
  }
  SECTION("context must define exactly the compromised set") {
    PartialProgram empty;
    REQUIRE_FALSE(has_shape_context(empty, shape));
  }
  SECTION("degenerate scenario: everything compromised") {
    auto all = partition(w, {"Main", "C1"});
    REQUIRE(has_shape_context(all.context, all.shape));
    REQUIRE(all.program.defs.empty());
  }
}

TEST_CASE("link is union and rejects overlap") {
  PartialProgram w = two_component_program();
  auto parts = partition(w, {"C1"});
  PartialProgram relinked = link(parts.context, parts.program);
  REQUIRE(relinked.defs.size() == 2);
  REQUIRE(print_program(relinked) == print_program(w));
  REQUIRE_THROWS_AS(link(w, parts.program), LinkOverlapError);
  PartialProgram empty;
  REQUIRE(print_program(link(empty, w)) == print_program(w));
}

TEST_CASE("partition rejects unknown names and round-trips") {
  PartialProgram w = two_component_program();
  REQUIRE_THROWS_AS(partition(w, {"Nope"}), UnknownComponentError);
  auto parts = partition(w, {});
  REQUIRE(parts.context.defs.empty());
  REQUIRE(parts.program.defs.size() == 2);
  REQUIRE(parts.shape.uncompromised.size() == 2);
}

TEST_CASE("index maps pin Main.main to pidx 0") {
  PartialProgram w = two_component_program();
  w.defs.at("Main").iface.exports.insert("aaa");
  w.defs.at("Main").procedures["aaa"] = eint(0);
  IndexMaps maps = IndexMaps::from_program(w);
  REQUIRE(maps.proc_index.at({"Main", "main"}).second == 0);
  REQUIRE(maps.proc_index.at({"Main", "aaa"}).second == 1);
  // components are indexed lexicographically
  REQUIRE(maps.comp_index.at("C1") == 0);
  REQUIRE(maps.comp_index.at("Main") == 1);
}

TEST_CASE("mirror swaps the two sides") {
  PartialProgram w = two_component_program();
  auto parts = partition(w, {"C1"});
  Shape m = mirror(parts.shape);
  REQUIRE(has_shape_program(parts.context, m));
  REQUIRE(has_shape_context(parts.program, m));
}
