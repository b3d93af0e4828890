#pragma once

// Random generators for shapes, programs of a given shape, and low-level
// attackers. Everything is driven by explicit 64-bit seeds so every report
// line can be replayed bit-exactly.

#include <random>
#include <string>
#include <vector>

#include "scc/calibration.hpp"
#include "scc/compile.hpp"
#include "scc/lang.hpp"

namespace scc {

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(uint64_t seed) : eng(seed ^ 0x9e3779b97f4a7c15ull) {}

  uint64_t next() { return eng(); }
  // uniform in [lo, hi]
  long long range(long long lo, long long hi) {
    internal_check(lo <= hi, "empty range");
    return lo + static_cast<long long>(next() % static_cast<uint64_t>(hi - lo + 1));
  }
  bool chance(double p) { return static_cast<double>(next() % (1ull << 24)) < p * (1ull << 24); }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    internal_check(!v.empty(), "pick from empty vector");
    return v[static_cast<size_t>(next() % v.size())];
  }
  Rng fork() { return Rng(next()); }
};

struct GenConfig {
  uint64_t seed = 1;
  int max_components = 4;
  int max_procs = 3;
  int max_buffer_size = 4;
  int max_expr_depth = 5;
  long long literal_min = -2;
  long long literal_max = 6;   // beyond every buffer size, so wild mode can overflow
  long long fuel_source = 10000;
  long long fuel_target = 0;   // 0: derive from fuel_source via the calibration constant
  int trials = 200;

  long long target_budget() const { return fuel_target > 0 ? fuel_target : target_fuel(fuel_source); }
};

enum class GenMode {
  DefinedBiased,  // only constant, in-bounds buffer indices
  Wild,           // arbitrary index expressions; undefined behavior sources
};

namespace gendetail {

inline std::vector<Name> component_pool(int n) {
  std::vector<Name> names = {kMainComponent};
  for (int i = 1; i < n; ++i) names.push_back("C" + std::to_string(i));
  return names;
}

}  // namespace gendetail

inline Shape gen_shape(const GenConfig& cfg, Rng& rng) {
  int n = static_cast<int>(rng.range(2, std::max(2, cfg.max_components)));
  std::vector<Name> names = gendetail::component_pool(n);
  Shape s;
  for (const auto& name : names) {
    Interface iface;
    int procs = static_cast<int>(rng.range(1, cfg.max_procs));
    for (int p = 0; p < procs; ++p) {
      Name pname = (name == kMainComponent && p == 0) ? kMainProc : "p" + std::to_string(p);
      if (rng.chance(0.85) || pname == kMainProc) iface.exports.insert(pname);
    }
    s.interfaces[name] = std::move(iface);
  }
  // import edges between distinct components, over exported procedures
  for (const auto& from : names)
    for (const auto& to : names) {
      if (from == to) continue;
      for (const auto& p : s.interfaces[to].exports)
        if (rng.chance(0.45)) s.interfaces[from].imports.insert({to, p});
    }
  // a random split; both all-compromised and all-uncompromised are legal
  for (const auto& name : names)
    if (rng.chance(0.5)) s.uncompromised.insert(name);
  return s;
}

// A shape with a nonempty program side, a nonempty context side, and at
// least one context import of a program export (so games are playable).
inline Shape gen_shape_two_sided(const GenConfig& cfg, Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Shape s = gen_shape(cfg, rng);
    size_t n = s.interfaces.size();
    if (s.uncompromised.empty() || s.uncompromised.size() == n) continue;
    bool observable = false;
    for (const auto& [name, iface] : s.interfaces) {
      if (s.uncompromised.count(name)) continue;
      for (const auto& [ic, ip] : iface.imports)
        if (s.uncompromised.count(ic)) observable = true;
    }
    if (observable) return s;
  }
  throw Error("could not generate a two-sided shape");
}

namespace gendetail {

struct ExprGen {
  const GenConfig& cfg;
  Rng& rng;
  const ComponentDef& def;
  GenMode mode;

  ExprPtr literal() { return eint(rng.range(cfg.literal_min, cfg.literal_max)); }

  ExprPtr index_for(int buffer, int depth) {
    if (mode == GenMode::DefinedBiased)
      return eint(rng.range(0, static_cast<long long>(def.buffers[buffer]) - 1));
    if (rng.chance(0.7)) return literal();
    return gen(depth - 1);
  }

  ExprPtr gen(int depth) {
    if (depth <= 0) {
      if (!def.buffers.empty() && rng.chance(0.3)) {
        int b = static_cast<int>(rng.range(0, static_cast<long long>(def.buffers.size()) - 1));
        return eread(b, index_for(b, 0));
      }
      return literal();
    }
    double roll = static_cast<double>(rng.next() % 1000) / 1000.0;
    if (roll < 0.28) {
      Op op = static_cast<Op>(rng.range(0, 5));
      return ebinop(op, gen(depth - 1), gen(depth - 1));
    }
    if (roll < 0.40) return eif(gen(depth - 1), gen(depth - 1), gen(depth - 1));
    if (roll < 0.55) {
      int b = static_cast<int>(rng.range(0, static_cast<long long>(def.buffers.size()) - 1));
      return eread(b, index_for(b, depth));
    }
    if (roll < 0.70) {
      int b = static_cast<int>(rng.range(0, static_cast<long long>(def.buffers.size()) - 1));
      return ewrite(b, index_for(b, depth), gen(depth - 1));
    }
    if (roll < 0.88) {
      std::vector<ProcRef> targets;
      for (const auto& [pname, _] : def.procedures) targets.push_back({def.name, pname});
      for (const auto& ref : def.iface.imports) targets.push_back(ref);
      if (!targets.empty()) {
        const ProcRef& t = rng.pick(targets);
        return ecall(t.first, t.second, gen(depth - 1));
      }
    }
    if (roll < 0.91) return eexit();
    return literal();
  }
};

}  // namespace gendetail

inline PartialProgram gen_program_of_shape(const GenConfig& cfg, const Shape& s, bool program_side,
                                           GenMode mode, Rng& rng) {
  PartialProgram out;
  for (const auto& [name, iface] : s.interfaces) {
    if (s.uncompromised.count(name) != (program_side ? 1u : 0u)) continue;
    ComponentDef def;
    def.name = name;
    def.iface = iface;
    int nbuf = static_cast<int>(rng.range(1, 2));
    for (int b = 0; b < nbuf; ++b)
      def.buffers.push_back(static_cast<unsigned>(rng.range(1, cfg.max_buffer_size)));
    // procedure set: all exports, sometimes one private helper
    std::vector<Name> procs(iface.exports.begin(), iface.exports.end());
    if (rng.chance(0.3)) procs.push_back("q0");
    for (const auto& pname : procs) def.procedures[pname] = eint(0);
    gendetail::ExprGen eg{cfg, rng, def, mode};
    for (const auto& pname : procs)
      def.procedures[pname] = eg.gen(static_cast<int>(rng.range(1, cfg.max_expr_depth)));
    internal_check(check_component_wf(def).empty(), "generator produced an ill-formed component");
    out.defs.emplace(name, std::move(def));
  }
  return out;
}

// Low-level attacker of the context shape: a compiled wild context, a
// compiled context with mutated code words, or raw synthesized instructions
// behind each entry point.
inline Image gen_lowlevel_attacker(const GenConfig& cfg, const Shape& s, Rng& rng) {
  IndexMaps maps = IndexMaps::from_shape(s);
  int strategy = static_cast<int>(rng.range(0, 2));
  if (strategy <= 1) {
    PartialProgram a = gen_program_of_shape(cfg, s, false, GenMode::Wild, rng);
    Image img = compile_program(a, maps);
    if (strategy == 1) {
      // mutate a few code-region words per compartment
      for (auto& [cidx, mem] : img.mem0) {
        std::vector<Word> addrs;
        mem.for_each([&](const Word& addr, const Word&) { addrs.push_back(addr); });
        if (addrs.empty()) continue;
        int hits = static_cast<int>(rng.range(1, 4));
        for (int i = 0; i < hits; ++i) {
          const Word& a2 = addrs[static_cast<size_t>(rng.next() % addrs.size())];
          mem.store(a2, Word(rng.range(0, 4000)));
        }
      }
    }
    return img;
  }
  // raw synthesis
  Image img;
  for (const auto& [name, iface] : s.interfaces) {
    if (s.uncompromised.count(name)) continue;
    int cidx = maps.comp_index.at(name);
    img.names[cidx] = name;
    img.name_index[name] = cidx;
    IfaceIdx ii;
    std::vector<std::pair<int, int>> import_targets;
    for (const auto& e : iface.exports) ii.exports.insert(maps.proc_index.at({name, e}).second);
    for (const auto& ref : iface.imports) {
      auto idx = maps.proc_index.at(ref);
      ii.imports.insert(idx);
      import_targets.push_back(idx);
    }
    img.psi[cidx] = ii;
    CompartMem mem;
    Word addr = 0;
    for (int pidx : ii.exports) {
      img.entry[cidx][pidx] = addr;
      int len = static_cast<int>(rng.range(1, 8));
      for (int i = 0; i < len; ++i) {
        Instr x;
        switch (rng.range(0, 7)) {
          case 0: x = iconst(rng.range(-4, 60), static_cast<int>(rng.range(0, kNumRegs - 1))); break;
          case 1:
            x = ibinop(static_cast<MOp>(rng.range(0, 4)), static_cast<int>(rng.range(0, kNumRegs - 1)),
                       static_cast<int>(rng.range(0, kNumRegs - 1)),
                       static_cast<int>(rng.range(0, kNumRegs - 1)));
            break;
          case 2: x = iload(static_cast<int>(rng.range(0, kNumRegs - 1)), static_cast<int>(rng.range(0, kNumRegs - 1))); break;
          case 3: x = istore(static_cast<int>(rng.range(0, kNumRegs - 1)), static_cast<int>(rng.range(0, kNumRegs - 1))); break;
          case 4:
            if (!import_targets.empty()) {
              auto [c, p] = import_targets[static_cast<size_t>(rng.next() % import_targets.size())];
              x = icall(c, p);
            } else {
              x = inop();
            }
            break;
          case 5: x = iret(); break;
          case 6: x = ibnz(static_cast<int>(rng.range(0, kNumRegs - 1)), rng.range(-2, 3)); break;
          default: x = imov(static_cast<int>(rng.range(0, kNumRegs - 1)), static_cast<int>(rng.range(0, kNumRegs - 1))); break;
        }
        mem.store(addr, encode(x));
        addr += 1;
      }
      mem.store(addr, encode(ihalt()));
      addr += 1;
    }
    img.mem0[cidx] = std::move(mem);
  }
  return img;
}

}  // namespace scc
