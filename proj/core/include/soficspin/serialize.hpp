// JSON (de)serialization for specs, models, actions and pattern
// distributions, plus generator-word string notation: generators are
// 'a'..'z' and inverses the corresponding capitals.
#pragma once

#include <json.hpp>
#include <string>

#include "soficspin/cayley.hpp"
#include "soficspin/homgraph.hpp"
#include "soficspin/model.hpp"
#include "soficspin/state.hpp"

namespace soficspin {

using nlohmann::json;

Word parse_word(const std::string& s, int r);
std::string format_word(const Word& w, int r);

json group_spec_to_json(const GroupSpec& spec);
GroupSpec group_spec_from_json(const json& j);

json model_to_json(const SpinModel& model);
// Accepts either explicit {"alphabet", "J", "h"} or the preset form
// {"preset": "ising", "beta": b, "field": B}.
SpinModel model_from_json(const json& j);

json hom_to_json(const HomGraph& hom);
HomGraph hom_from_json(const json& j);

json pattern_distribution_to_json(const PatternDistribution& P, const GroupSpec& spec);
PatternDistribution pattern_distribution_from_json(const json& j);

// Stable hash of a JSON value (canonical dump), used to stamp outputs.
std::uint64_t json_hash(const json& j);

}  // namespace soficspin
