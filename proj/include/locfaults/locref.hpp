#pragma once

#include <string>
#include <tuple>
#include <vector>

namespace locfaults {

// A source location, optionally qualified by the loop iterations that were
// entered to reach it after unrolling. Rendered "11" outside loops,
// "9:2.11" for line 11 inside iteration 2 of the loop whose condition sits
// at line 9, nesting outer-to-inner for nested loops.
struct LoopCtx {
  int cond_line = 0;
  int iteration = 0;

  friend bool operator==(const LoopCtx&, const LoopCtx&) = default;
  friend auto operator<=>(const LoopCtx&, const LoopCtx&) = default;
};

struct LocRef {
  int line = 0;
  std::vector<LoopCtx> ctx;

  std::string str() const {
    std::string out;
    for (const auto& c : ctx) {
      if (!out.empty()) out += '.';
      out += std::to_string(c.cond_line) + ':' + std::to_string(c.iteration);
    }
    // A loop condition is identified by its own line; do not repeat it.
    if (!ctx.empty() && ctx.back().cond_line == line) return out;
    if (!out.empty()) out += '.';
    out += std::to_string(line);
    return out;
  }

  friend bool operator==(const LocRef&, const LocRef&) = default;
  friend auto operator<=>(const LocRef&, const LocRef&) = default;
};

}  // namespace locfaults
