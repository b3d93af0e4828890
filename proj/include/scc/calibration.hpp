#pragma once

namespace scc {

// Target fuel per unit of source fuel. Every source step expands to a
// bounded instruction count; the largest observed ratio over the generator
// corpus is below 40 (the call step: caller sequence plus callee prologue),
// measured by the calibration test in tests/test_compile.cpp. 64 leaves
// headroom so cross-level runs never disagree because the target ran short.
inline constexpr long long kFuelExpansion = 64;

inline long long target_fuel(long long source_fuel) { return source_fuel * kFuelExpansion; }

}  // namespace scc
