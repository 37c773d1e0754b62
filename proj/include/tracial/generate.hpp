#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tracial/moments.hpp"

namespace tracial {

// Labels accepted by gen_random:
//   rank4                one generic size-2 atom
//   BC1..BC4             rank-5 basic cases (points on the case variety plus
//                        anticommuting trace-0 size-2 atoms)
//   REL1..REL4           rank-6 basic relations, generic odd moments
//   REL1-sym, REL3-sym   REL1 / REL3 with vanishing odd moments
const std::vector<std::string>& generator_labels();

struct Generated {
    std::string label;
    Measure measure;
    MomentSequence moments;
};

// Deterministic under seed. Densities are normalized to sum to 1.
// Throws std::invalid_argument for an unknown label.
Generated gen_random(const std::string& label, std::uint64_t seed);

}  // namespace tracial
