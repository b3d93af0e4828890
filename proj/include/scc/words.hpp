#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>
#include <string>

namespace scc {

// Machine words and source integers are unbounded.
using Word = boost::multiprecision::cpp_int;

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void internal_check(bool ok, const char* what) {
  if (!ok) throw std::logic_error(std::string("internal invariant violated: ") + what);
}

// Resource cap: a run that manufactures a value wider than this is treated as
// divergent (reported as fuel exhaustion). The cap is far above anything a
// meaningful test computes and keeps runaway squaring loops from eating all
// memory. Source and target trip it on the same value, so the two levels
// never disagree because of it.
inline constexpr unsigned kMaxValueBits = 1u << 20;

inline bool too_wide(const Word& w) {
  if (w == 0) return false;
  return boost::multiprecision::msb(w < 0 ? Word(-w) : w) >= kMaxValueBits;
}

inline std::string word_str(const Word& w) { return w.str(); }

}  // namespace scc
