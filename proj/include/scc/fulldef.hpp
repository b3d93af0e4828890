#pragma once

// Bounded check of full definedness: run a partial program against randomly
// generated wild opponents of the dual shape and look for undefined behavior
// blamed on the checked side. Sound in one direction only: a counterexample
// is real, absence of one is evidence, not proof.

#include "scc/gen.hpp"
#include "scc/interp.hpp"

namespace scc {

struct FullDefVerdict {
  bool counterexample_found = false;
  PartialProgram witness_context;
  Name blamed;
  int trials_run = 0;
};

// pre: has_shape_program(p, s). Contexts are generated wild.
inline FullDefVerdict check_fully_defined_bounded(const PartialProgram& p, const Shape& s,
                                                  int trials, long long fuel, uint64_t seed) {
  internal_check(has_shape_program(p, s), "full-definedness check on a wrongly shaped program");
  FullDefVerdict v;
  Rng rng(seed);
  std::set<Name> own;
  for (const auto& [name, _] : p.defs) own.insert(name);
  GenConfig cfg;
  cfg.seed = seed;
  for (int i = 0; i < trials; ++i) {
    Rng trial = rng.fork();
    PartialProgram a = gen_program_of_shape(cfg, s, false, GenMode::Wild, trial);
    ++v.trials_run;
    RunResult r = run(link(a, p), fuel);
    if (r.kind == RunResult::Kind::UndefinedBehavior && own.count(r.blamed)) {
      v.counterexample_found = true;
      v.witness_context = std::move(a);
      v.blamed = r.blamed;
      return v;
    }
  }
  return v;
}

// Dual judgment for contexts: a context of s is a program of mirror(s).
inline FullDefVerdict check_context_fully_defined_bounded(const PartialProgram& a, const Shape& s,
                                                          int trials, long long fuel, uint64_t seed) {
  return check_fully_defined_bounded(a, mirror(s), trials, fuel, seed);
}

}  // namespace scc
