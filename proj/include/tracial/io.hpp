#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"
#include "tracial/moments.hpp"
#include "tracial/transforms.hpp"

namespace tracial {

using Json = nlohmann::ordered_json;

// Malformed or inconsistent user input (bad JSON shape, missing or
// conflicting moments).
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// {"beta": {"1": r, "X": r, ...}} with canonical-word keys. Non-canonical
// keys are accepted and folded into their class; two different values for
// one class, a missing class, or a word above the degree are input errors.
MomentSequence sequence_from_json(const Json& j, int degree = 4);
Json sequence_to_json(const MomentSequence& seq);

// {"atoms": [{"A": [[..]], "B": [[..]], "density": r}, ...]}
Measure measure_from_json(const Json& j);
Json measure_to_json(const Measure& mu);

Json chain_to_json(const TransformChain& chain);

// Parses text as JSON, mapping parse errors to InputError.
Json parse_json(const std::string& text);

}  // namespace tracial
