#pragma once

// Compartmentalized RISC abstract machine: instruction encoding, partitioned
// memory, and the interface-checked Call/Return semantics over a protected
// cross-compartment call stack. Stuckness of any kind is termination.

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scc/lang.hpp"

namespace scc {

enum class MOp { Add, Sub, Mul, Eq, Leq };

inline const char* mop_text(MOp op) {
  switch (op) {
    case MOp::Add: return "add";
    case MOp::Sub: return "sub";
    case MOp::Mul: return "mul";
    case MOp::Eq: return "eq";
    case MOp::Leq: return "leq";
  }
  return "?";
}

// Register file: r_com carries call arguments and return values across
// compartments; everything else is cleaned at secure boundaries.
inline constexpr int kRCom = 0;
inline constexpr int kRRa = 1;
inline constexpr int kRSp = 2;
inline constexpr int kRT1 = 3;
inline constexpr int kRT2 = 4;
inline constexpr int kRT3 = 5;
inline constexpr int kNumRegs = 6;

using RegFile = std::array<Word, kNumRegs>;

inline const char* reg_name(int r) {
  static const char* names[kNumRegs] = {"com", "ra", "sp", "t1", "t2", "t3"};
  return (r >= 0 && r < kNumRegs) ? names[r] : "?";
}

struct Instr {
  enum class Kind { Nop, Const, Mov, Load, Store, Jump, Jal, Call, Return, Binop, Bnz, Halt };
  Kind kind = Kind::Nop;
  Word imm;           // Const immediate / Bnz offset
  int r1 = 0;         // rs / rp / r / binop r1
  int r2 = 0;         // binop r2
  int rd = 0;         // destination
  MOp bop = MOp::Add;
  Word cidx, pidx;    // Call target
};

inline Instr inop() { return {}; }
inline Instr iconst(Word i, int rd) { Instr x; x.kind = Instr::Kind::Const; x.imm = std::move(i); x.rd = rd; return x; }
inline Instr imov(int rs, int rd) { Instr x; x.kind = Instr::Kind::Mov; x.r1 = rs; x.rd = rd; return x; }
inline Instr iload(int rp, int rd) { Instr x; x.kind = Instr::Kind::Load; x.r1 = rp; x.rd = rd; return x; }
inline Instr istore(int rp, int rs) { Instr x; x.kind = Instr::Kind::Store; x.r1 = rp; x.r2 = rs; return x; }
inline Instr ijump(int r) { Instr x; x.kind = Instr::Kind::Jump; x.r1 = r; return x; }
inline Instr ijal(int r) { Instr x; x.kind = Instr::Kind::Jal; x.r1 = r; return x; }
inline Instr icall(Word c, Word p) { Instr x; x.kind = Instr::Kind::Call; x.cidx = std::move(c); x.pidx = std::move(p); return x; }
inline Instr iret() { Instr x; x.kind = Instr::Kind::Return; return x; }
inline Instr ibinop(MOp op, int r1, int r2, int rd) { Instr x; x.kind = Instr::Kind::Binop; x.bop = op; x.r1 = r1; x.r2 = r2; x.rd = rd; return x; }
inline Instr ibnz(int r, Word off) { Instr x; x.kind = Instr::Kind::Bnz; x.r1 = r; x.imm = std::move(off); return x; }
inline Instr ihalt() { Instr x; x.kind = Instr::Kind::Halt; return x; }

// Word encoding: w = opcode + 16*payload. Zigzag makes immediates
// non-negative, the Cantor pairing packs Call targets into one number.
inline Word zigzag(const Word& i) { return i >= 0 ? Word(2 * i) : Word(-2 * i - 1); }
inline Word unzigzag(const Word& z) { return (z % 2 == 0) ? Word(z / 2) : Word(-((z + 1) / 2)); }
inline Word cantor(const Word& c, const Word& p) { return (c + p) * (c + p + 1) / 2 + p; }
inline std::pair<Word, Word> uncantor(const Word& n) {
  Word s = (boost::multiprecision::sqrt(Word(8 * n + 1)) - 1) / 2;
  Word t = s * (s + 1) / 2;
  Word p = n - t;
  return {s - p, p};
}

inline Word encode(const Instr& x) {
  auto pack = [](int opcode, const Word& payload) { return Word(opcode) + 16 * payload; };
  switch (x.kind) {
    case Instr::Kind::Nop: return pack(0, 0);
    case Instr::Kind::Const: return pack(1, Word(x.rd) + 8 * zigzag(x.imm));
    case Instr::Kind::Mov: return pack(2, Word(x.r1) + 8 * Word(x.rd));
    case Instr::Kind::Load: return pack(3, Word(x.r1) + 8 * Word(x.rd));
    case Instr::Kind::Store: return pack(4, Word(x.r1) + 8 * Word(x.r2));
    case Instr::Kind::Jump: return pack(5, Word(x.r1));
    case Instr::Kind::Jal: return pack(6, Word(x.r1));
    case Instr::Kind::Call: return pack(7, cantor(x.cidx, x.pidx));
    case Instr::Kind::Return: return pack(8, 0);
    case Instr::Kind::Binop:
      return pack(9, Word(static_cast<int>(x.bop)) + 8 * (Word(x.r1) + 8 * (Word(x.r2) + 8 * Word(x.rd))));
    case Instr::Kind::Bnz: return pack(10, Word(x.r1) + 8 * zigzag(x.imm));
    case Instr::Kind::Halt: return pack(11, 0);
  }
  return 0;
}

inline std::optional<Instr> decode(const Word& w) {
  if (w < 0) return std::nullopt;
  int opcode = static_cast<int>(w % 16);
  Word payload = w / 16;
  auto reg = [](const Word& f, int& out) {
    if (f >= kNumRegs) return false;
    out = static_cast<int>(f);
    return true;
  };
  Instr x;
  switch (opcode) {
    case 0:
    case 8:
    case 11:
      if (payload != 0) return std::nullopt;
      x.kind = opcode == 0 ? Instr::Kind::Nop : (opcode == 8 ? Instr::Kind::Return : Instr::Kind::Halt);
      return x;
    case 1:
      x.kind = Instr::Kind::Const;
      if (!reg(payload % 8, x.rd)) return std::nullopt;
      x.imm = unzigzag(payload / 8);
      return x;
    case 2:
    case 3:
      x.kind = opcode == 2 ? Instr::Kind::Mov : Instr::Kind::Load;
      if (!reg(payload % 8, x.r1) || !reg(payload / 8, x.rd)) return std::nullopt;
      return x;
    case 4:
      x.kind = Instr::Kind::Store;
      if (!reg(payload % 8, x.r1) || !reg(payload / 8, x.r2)) return std::nullopt;
      return x;
    case 5:
    case 6:
      x.kind = opcode == 5 ? Instr::Kind::Jump : Instr::Kind::Jal;
      if (!reg(payload, x.r1)) return std::nullopt;
      return x;
    case 7: {
      x.kind = Instr::Kind::Call;
      auto [c, p] = uncantor(payload);
      x.cidx = c;
      x.pidx = p;
      return x;
    }
    case 9: {
      x.kind = Instr::Kind::Binop;
      Word bop = payload % 8;
      if (bop >= 5) return std::nullopt;
      x.bop = static_cast<MOp>(static_cast<int>(bop));
      if (!reg((payload / 8) % 8, x.r1) || !reg((payload / 64) % 8, x.r2) || !reg(payload / 512, x.rd))
        return std::nullopt;
      return x;
    }
    case 10:
      x.kind = Instr::Kind::Bnz;
      if (!reg(payload % 8, x.r1)) return std::nullopt;
      x.imm = unzigzag(payload / 8);
      return x;
    default:
      return std::nullopt;
  }
}

inline std::string instr_text(const Instr& x) {
  std::ostringstream os;
  switch (x.kind) {
    case Instr::Kind::Nop: os << "Nop"; break;
    case Instr::Kind::Const: os << "Const " << x.imm << " -> r_" << reg_name(x.rd); break;
    case Instr::Kind::Mov: os << "Mov r_" << reg_name(x.r1) << " -> r_" << reg_name(x.rd); break;
    case Instr::Kind::Load: os << "Load *r_" << reg_name(x.r1) << " -> r_" << reg_name(x.rd); break;
    case Instr::Kind::Store: os << "Store *r_" << reg_name(x.r1) << " <- r_" << reg_name(x.r2); break;
    case Instr::Kind::Jump: os << "Jump r_" << reg_name(x.r1); break;
    case Instr::Kind::Jal: os << "Jal r_" << reg_name(x.r1); break;
    case Instr::Kind::Call: os << "Call " << x.cidx << " " << x.pidx; break;
    case Instr::Kind::Return: os << "Return"; break;
    case Instr::Kind::Binop:
      os << "Binop " << mop_text(x.bop) << " r_" << reg_name(x.r1) << " r_" << reg_name(x.r2)
         << " -> r_" << reg_name(x.rd);
      break;
    case Instr::Kind::Bnz: os << "Bnz r_" << reg_name(x.r1) << " " << x.imm; break;
    case Instr::Kind::Halt: os << "Halt"; break;
  }
  return os.str();
}

// One compartment's private memory. Dense storage near zero (buffers, code,
// the local stack), a sparse overflow map for far-flung addresses.
class CompartMem {
 public:
  bool written(const Word& a) const {
    if (a < 0) return false;
    if (a < Word(low_.size())) return set_[static_cast<size_t>(a)] != 0;
    return high_.count(a) != 0;
  }
  // 0 when unwritten (infinite zero-initialized memory)
  Word load(const Word& a) const {
    if (a < 0) return 0;
    if (a < Word(low_.size())) {
      size_t i = static_cast<size_t>(a);
      return set_[i] ? low_[i] : Word(0);
    }
    auto it = high_.find(a);
    return it == high_.end() ? Word(0) : it->second;
  }
  const Word* fetch(const Word& a) const {
    if (a < 0) return nullptr;
    if (a < Word(low_.size())) {
      size_t i = static_cast<size_t>(a);
      return set_[i] ? &low_[i] : nullptr;
    }
    auto it = high_.find(a);
    return it == high_.end() ? nullptr : &it->second;
  }
  void store(const Word& a, Word v) {
    internal_check(a >= 0, "negative address store");
    ++generation_;
    if (a < kDenseCap) {
      size_t i = static_cast<size_t>(a);
      if (i >= low_.size()) {
        low_.resize(i + 1);
        set_.resize(i + 1, 0);
      }
      low_[i] = std::move(v);
      set_[i] = 1;
      return;
    }
    high_[a] = std::move(v);
  }

  // Bumped on every store; lets replays assert cheaply that a partition was
  // left untouched.
  uint64_t generation() const { return generation_; }
  bool operator==(const CompartMem& o) const {
    size_t n = std::max(low_.size(), o.low_.size());
    for (size_t i = 0; i < n; ++i) {
      bool sa = i < set_.size() && set_[i], sb = i < o.set_.size() && o.set_[i];
      if (sa != sb) return false;
      if (sa && low_[i] != o.low_[i]) return false;
    }
    return high_ == o.high_;
  }

  template <class F>
  void for_each(F&& f) const {
    for (size_t i = 0; i < low_.size(); ++i)
      if (set_[i]) f(Word(i), low_[i]);
    for (const auto& [a, v] : high_) f(a, v);
  }

 private:
  static constexpr long long kDenseCap = 1 << 22;
  std::vector<Word> low_;
  std::vector<uint8_t> set_;
  std::map<Word, Word> high_;
  uint64_t generation_ = 0;
};

// Interface at the index level, as the machine checks it.
struct IfaceIdx {
  std::set<int> exports;
  std::set<std::pair<int, int>> imports;
  bool operator==(const IfaceIdx&) const = default;
};

struct Image {
  std::map<int, IfaceIdx> psi;
  std::map<int, std::map<int, Word>> entry;  // cidx -> pidx -> address
  std::map<int, CompartMem> mem0;
  std::map<int, Name> names;
  std::map<Name, int> name_index;

  bool imports_ok(int cur, const Word& c, const Word& p) const {
    auto it = psi.find(cur);
    if (it == psi.end()) return false;
    if (c < 0 || c > 1 << 30 || p < 0 || p > 1 << 30) return false;
    return it->second.imports.count({static_cast<int>(c), static_cast<int>(p)}) != 0;
  }
  const Word* entry_of(const Word& c, const Word& p) const {
    if (c < 0 || c > 1 << 30 || p < 0 || p > 1 << 30) return nullptr;
    auto it = entry.find(static_cast<int>(c));
    if (it == entry.end()) return nullptr;
    auto jt = it->second.find(static_cast<int>(p));
    return jt == it->second.end() ? nullptr : &jt->second;
  }
};

struct MachineState {
  int current = 0;
  std::vector<std::pair<int, Word>> stack;  // protected: (compartment, return pc)
  std::map<int, CompartMem> mem;
  RegFile reg;
  Word pc;
};

struct StuckReason {
  enum class Kind { HaltInstr, Undecodable, InterfaceViolation, ReturnEmptyStack, NegativeAddress };
  Kind kind = Kind::HaltInstr;
  Word cidx, pidx;  // InterfaceViolation target

  std::string text() const {
    switch (kind) {
      case Kind::HaltInstr: return "halt";
      case Kind::Undecodable: return "undecodable";
      case Kind::InterfaceViolation:
        return "interface violation " + cidx.str() + "." + pidx.str();
      case Kind::ReturnEmptyStack: return "return on empty stack";
      case Kind::NegativeAddress: return "negative address";
    }
    return "?";
  }
};

struct MStepOutcome {
  enum class Kind { Step, Stuck, Resource };
  Kind kind = Kind::Step;
  StuckReason reason;
  Instr instr;       // decoded instruction, when decoding succeeded
  bool decoded = false;
};

struct MissingMainEntryError : Error {
  MissingMainEntryError() : Error("image has no entry for Main.main") {}
};

inline MachineState init_state(const Image& img) {
  auto it = img.name_index.find(kMainComponent);
  if (it == img.name_index.end()) throw MissingMainEntryError();
  const Word* e = img.entry_of(it->second, 0);  // Main.main is pinned to pidx 0
  if (!e) throw MissingMainEntryError();
  MachineState st;
  st.current = it->second;
  st.mem = img.mem0;
  st.reg.fill(Word(0));
  st.pc = *e;
  return st;
}

inline Word mapply(MOp op, const Word& l, const Word& r) {
  switch (op) {
    case MOp::Add: return l + r;
    case MOp::Sub: return l - r;
    case MOp::Mul: return l * r;
    case MOp::Eq: return Word(l == r ? 1 : 0);
    case MOp::Leq: return Word(l <= r ? 1 : 0);
  }
  return 0;
}

inline MStepOutcome mstep_inplace(const Image& img, MachineState& st) {
  MStepOutcome out;
  if (st.pc < 0) {
    out.kind = MStepOutcome::Kind::Stuck;
    out.reason.kind = StuckReason::Kind::NegativeAddress;
    return out;
  }
  const Word* w = st.mem[st.current].fetch(st.pc);
  if (!w) {
    out.kind = MStepOutcome::Kind::Stuck;
    out.reason.kind = StuckReason::Kind::Undecodable;
    return out;
  }
  auto dec = decode(*w);
  if (!dec) {
    out.kind = MStepOutcome::Kind::Stuck;
    out.reason.kind = StuckReason::Kind::Undecodable;
    return out;
  }
  out.instr = *dec;
  out.decoded = true;
  const Instr& x = out.instr;
  auto stuck = [&](StuckReason::Kind k) {
    out.kind = MStepOutcome::Kind::Stuck;
    out.reason.kind = k;
    if (k == StuckReason::Kind::InterfaceViolation) {
      out.reason.cidx = x.cidx;
      out.reason.pidx = x.pidx;
    }
    return out;
  };
  switch (x.kind) {
    case Instr::Kind::Nop:
      st.pc += 1;
      return out;
    case Instr::Kind::Const:
      st.reg[x.rd] = x.imm;
      st.pc += 1;
      return out;
    case Instr::Kind::Mov:
      st.reg[x.rd] = st.reg[x.r1];
      st.pc += 1;
      return out;
    case Instr::Kind::Load: {
      const Word& a = st.reg[x.r1];
      if (a < 0) return stuck(StuckReason::Kind::NegativeAddress);
      st.reg[x.rd] = st.mem[st.current].load(a);
      st.pc += 1;
      return out;
    }
    case Instr::Kind::Store: {
      const Word& a = st.reg[x.r1];
      if (a < 0) return stuck(StuckReason::Kind::NegativeAddress);
      st.mem[st.current].store(a, st.reg[x.r2]);
      st.pc += 1;
      return out;
    }
    case Instr::Kind::Jump:
      st.pc = st.reg[x.r1];
      return out;
    case Instr::Kind::Jal:
      st.reg[kRRa] = st.pc + 1;
      st.pc = st.reg[x.r1];
      return out;
    case Instr::Kind::Bnz:
      st.pc = (st.reg[x.r1] != 0) ? Word(st.pc + x.imm) : Word(st.pc + 1);
      return out;
    case Instr::Kind::Binop: {
      Word v = mapply(x.bop, st.reg[x.r1], st.reg[x.r2]);
      if (too_wide(v)) {
        out.kind = MStepOutcome::Kind::Resource;
        return out;
      }
      st.reg[x.rd] = std::move(v);
      st.pc += 1;
      return out;
    }
    case Instr::Kind::Call: {
      bool own = (x.cidx >= 0 && x.cidx == st.current);
      if (!own && !img.imports_ok(st.current, x.cidx, x.pidx))
        return stuck(StuckReason::Kind::InterfaceViolation);
      const Word* target = img.entry_of(x.cidx, x.pidx);
      if (!target) return stuck(StuckReason::Kind::InterfaceViolation);
      st.stack.emplace_back(st.current, st.pc + 1);
      st.current = static_cast<int>(x.cidx);
      st.pc = *target;
      return out;
    }
    case Instr::Kind::Return: {
      if (st.stack.empty()) return stuck(StuckReason::Kind::ReturnEmptyStack);
      auto [c, pc] = st.stack.back();
      st.stack.pop_back();
      st.current = c;
      st.pc = std::move(pc);
      return out;
    }
    case Instr::Kind::Halt:
      return stuck(StuckReason::Kind::HaltInstr);
  }
  return out;
}

// Pure variant over an immutable snapshot.
struct MPureStep {
  MStepOutcome outcome;
  MachineState next;
};
inline MPureStep mstep(const Image& img, const MachineState& st) {
  MachineState copy = st;
  MStepOutcome out = mstep_inplace(img, copy);
  return {std::move(out), std::move(copy)};
}

struct MRunResult {
  enum class Kind { Halted, FuelExhausted };
  Kind kind = Kind::FuelExhausted;
  long long steps = 0;
  StuckReason reason;

  bool halted() const { return kind == Kind::Halted; }
  std::string text() const {
    return kind == Kind::Halted ? "HALTED " + std::to_string(steps) : "FUEL";
  }
};

// Core run loop. `observe(prev_current, outcome, state_after)` fires after
// every step, including the stuck one.
template <class F>
MRunResult mrun_observe(const Image& img, MachineState& st, long long fuel, F&& observe) {
  for (long long i = 1; i <= fuel; ++i) {
    int prev = st.current;
    MStepOutcome out = mstep_inplace(img, st);
    observe(prev, out, st);
    if (out.kind == MStepOutcome::Kind::Stuck) return {MRunResult::Kind::Halted, i, out.reason};
    if (out.kind == MStepOutcome::Kind::Resource) return {MRunResult::Kind::FuelExhausted, fuel, {}};
  }
  return {MRunResult::Kind::FuelExhausted, fuel, {}};
}

inline MRunResult mrun(const Image& img, long long fuel) {
  MachineState st = init_state(img);
  return mrun_observe(img, st, fuel, [](int, const MStepOutcome&, const MachineState&) {});
}

struct ImageFormatError : Error {
  explicit ImageFormatError(const std::string& what) : Error("image format: " + what) {}
};
struct ImageOverlapError : Error {
  explicit ImageOverlapError(int cidx) : Error("image link: compartment " + std::to_string(cidx) + " present on both sides") {}
};
struct UnresolvedImportError : Error {
  UnresolvedImportError(int c, int p)
      : Error("image link: import " + std::to_string(c) + "." + std::to_string(p) + " unresolved") {}
};

inline Image link_images(const Image& a, const Image& b) {
  Image out = a;
  for (const auto& [cidx, iface] : b.psi) {
    if (out.psi.count(cidx)) throw ImageOverlapError(cidx);
    out.psi[cidx] = iface;
  }
  for (const auto& [cidx, e] : b.entry) out.entry[cidx] = e;
  for (const auto& [cidx, m] : b.mem0) out.mem0[cidx] = m;
  for (const auto& [cidx, n] : b.names) out.names[cidx] = n;
  for (const auto& [n, cidx] : b.name_index) out.name_index[n] = cidx;
  for (const auto& [cidx, iface] : out.psi)
    for (const auto& [ic, ip] : iface.imports) {
      auto it = out.psi.find(ic);
      if (it == out.psi.end() || !it->second.exports.count(ip)) throw UnresolvedImportError(ic, ip);
    }
  return out;
}

// Flat text format, one directive per line:
//   compartment <cidx> <name>
//   export <pidx> <entry-addr>
//   import <cidx>.<pidx>
//   mem <addr> <word>
inline std::string write_image(const Image& img) {
  std::ostringstream os;
  for (const auto& [cidx, name] : img.names) {
    os << "compartment " << cidx << " " << name << "\n";
    auto psi_it = img.psi.find(cidx);
    auto entry_it = img.entry.find(cidx);
    if (entry_it != img.entry.end())
      for (const auto& [pidx, addr] : entry_it->second) os << "export " << pidx << " " << addr << "\n";
    if (psi_it != img.psi.end())
      for (const auto& [c, p] : psi_it->second.imports) os << "import " << c << "." << p << "\n";
    auto mem_it = img.mem0.find(cidx);
    if (mem_it != img.mem0.end())
      mem_it->second.for_each([&](const Word& a, const Word& v) { os << "mem " << a << " " << v << "\n"; });
  }
  return os.str();
}

inline Image read_image(const std::string& text) {
  Image img;
  std::istringstream is(text);
  std::string line;
  int cur = -1;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw) || kw[0] == '#') continue;
    auto need_cur = [&] {
      if (cur < 0) throw ImageFormatError("directive before compartment at line " + std::to_string(lineno));
    };
    if (kw == "compartment") {
      std::string name;
      if (!(ls >> cur >> name)) throw ImageFormatError("bad compartment line " + std::to_string(lineno));
      img.names[cur] = name;
      img.name_index[name] = cur;
      img.psi[cur];
      img.mem0[cur];
      img.entry[cur];
    } else if (kw == "export") {
      need_cur();
      int pidx;
      std::string addr;
      if (!(ls >> pidx >> addr)) throw ImageFormatError("bad export line " + std::to_string(lineno));
      img.entry[cur][pidx] = Word(addr);
      img.psi[cur].exports.insert(pidx);
    } else if (kw == "import") {
      need_cur();
      std::string ref;
      if (!(ls >> ref)) throw ImageFormatError("bad import line " + std::to_string(lineno));
      auto dot = ref.find('.');
      if (dot == std::string::npos) throw ImageFormatError("bad import ref at line " + std::to_string(lineno));
      img.psi[cur].imports.insert({std::stoi(ref.substr(0, dot)), std::stoi(ref.substr(dot + 1))});
    } else if (kw == "mem") {
      need_cur();
      std::string addr, val;
      if (!(ls >> addr >> val)) throw ImageFormatError("bad mem line " + std::to_string(lineno));
      img.mem0[cur].store(Word(addr), Word(val));
    } else {
      throw ImageFormatError("unknown directive '" + kw + "' at line " + std::to_string(lineno));
    }
  }
  return img;
}

inline std::string disasm(const Image& img) {
  std::ostringstream os;
  for (const auto& [cidx, name] : img.names) {
    os << "compartment " << cidx << " (" << name << ")\n";
    auto it = img.mem0.find(cidx);
    if (it == img.mem0.end()) continue;
    it->second.for_each([&](const Word& a, const Word& v) {
      os << "  " << a << ": " << v << "\t";
      auto d = decode(v);
      os << (d ? instr_text(*d) : std::string("<data>")) << "\n";
    });
  }
  return os.str();
}

// Index-level shape satisfaction: the image has partitions under exactly the
// side's component indices, entry points for exactly their exports, and the
// interfaces the shape prescribes.
inline bool image_has_shape(const Image& img, const Shape& s, const IndexMaps& maps, bool program_side) {
  std::set<int> expected;
  for (const auto& [name, _] : s.interfaces)
    if (s.uncompromised.count(name) == (program_side ? 1u : 0u)) expected.insert(maps.comp_index.at(name));
  std::set<int> actual;
  for (const auto& [cidx, _] : img.mem0) actual.insert(cidx);
  if (expected != actual) return false;
  for (int cidx : expected) {
    const Name& name = maps.comp_names[cidx];
    const Interface& iface = s.interfaces.at(name);
    IfaceIdx want;
    for (const auto& e : iface.exports) want.exports.insert(maps.proc_index.at({name, e}).second);
    for (const auto& ref : iface.imports) want.imports.insert(maps.proc_index.at(ref));
    auto it = img.psi.find(cidx);
    if (it == img.psi.end() || !(it->second == want)) return false;
    auto et = img.entry.find(cidx);
    std::set<int> have;
    if (et != img.entry.end())
      for (const auto& [pidx, _] : et->second) have.insert(pidx);
    if (have != want.exports) return false;
    auto nt = img.names.find(cidx);
    if (nt == img.names.end() || nt->second != name) return false;
  }
  return true;
}

}  // namespace scc
