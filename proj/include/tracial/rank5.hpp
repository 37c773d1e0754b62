#pragma once

#include <string>
#include <vector>

#include "tracial/linalg.hpp"
#include "tracial/moments.hpp"

namespace tracial {

// Closed-form PSD test of a normalized canonical rank-5 sequence.
struct PsdConditions {
    bool holds = false;
    std::vector<Condition> conditions;
};

// bc is one of "BC1".."BC4".
PsdConditions psd_conditions_rank5(const std::string& bc, const MomentSequence& seq);

// alpha_0 for the symmetric-moment data (beta_X = beta_Y = beta_X3 = 0):
//   BC1: (b2^2 - b4) / (2 (-1 + 2 b2 - b4))  against M(1,0) + M(-1,0)
//   BC2, BC3: 1/2 - b2^2 / (2 b4)             against M(0,1) + M(0,-1)
//   BC4: (b4 - b2^2) / b4                     against M(0,0)
double rank5_alpha0_closed_form(const std::string& bc, const MomentSequence& seq);

struct Rank5Report {
    std::string bc;
    bool psd = false;
    std::vector<Condition> psd_conditions;
    bool exists = false;
    std::string reason;
    std::vector<Condition> existence_conditions;
    Measure measure;                  // canonical coordinates, densities sum to 1
    std::vector<Measure> alternatives;  // other minimal measures when not unique
    std::vector<int> minimal_type;
    std::string uniqueness;  // "unique", "two-measures"
    double alpha0 = 0.0;
    bool boundary = false;
    std::vector<std::string> notes;
};

// seq: normalized sequence in the canonical form of bc.
Rank5Report solve_rank5(const std::string& bc, const MomentSequence& seq, const ToleranceConfig& cfg);

}  // namespace tracial
