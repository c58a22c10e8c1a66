#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "remind/common.hpp"
#include "remind/frontend.hpp"

namespace remind::corruption {

enum class Kind { None, Random, Segment, Channel };

const char* kind_name(Kind k);

/// Declarative description of one corruption protocol plus its seed.
struct CorruptionSpec {
  Kind kind = Kind::None;
  double rate = 0.5;                      // random kind: fraction of C*T points
  std::vector<int> channel_indices{0, 1}; // channel kind
  std::uint64_t seed = 0;
};

/// Parses "kind=segment", "kind=random,rate=0.5", "kind=channel,channels=0+1",
/// with an optional ",seed=N" field.
CorruptionSpec parse_spec(const std::string& text);
std::string spec_to_string(const CorruptionSpec& spec);

struct CorruptionResult {
  frontend::Recording corrupted;
  BoolMask mask;  // true where a point was corrupted
};

/// Applies a spec. Corrupted points are zeroed; everything else is bitwise
/// unchanged. Kinds: none (identity), segment (ceil(T/2) contiguous columns at
/// a seeded uniform start), random (floor(rate*C*T) points drawn uniformly
/// without replacement), channel (whole listed channels).
CorruptionResult apply(const CorruptionSpec& spec, const frontend::Recording& x);

/// Seeded categorical draw over {random, segment, channel} proportional to the
/// given weights. All-zero weights yield kind none.
CorruptionSpec sample_mix(const std::array<double, 3>& weights, std::uint64_t seed);

}  // namespace remind::corruption
