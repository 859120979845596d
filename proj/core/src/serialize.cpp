#include "soficspin/serialize.hpp"

namespace soficspin {

Word parse_word(const std::string& s, int r) {
  Word w;
  for (char c : s) {
    if (c >= 'a' && c <= 'z') {
      int g = c - 'a';
      if (g >= r) throw ConfigError("parse_word: generator out of range in '" + s + "'");
      w.push_back(g);
    } else if (c >= 'A' && c <= 'Z') {
      int g = c - 'A';
      if (g >= r) throw ConfigError("parse_word: generator out of range in '" + s + "'");
      w.push_back(r + g);
    } else if (c == ' ') {
      continue;
    } else {
      throw ConfigError("parse_word: bad character in '" + s + "'");
    }
  }
  return w;
}

std::string format_word(const Word& w, int r) {
  std::string s;
  for (int l : w) s += static_cast<char>(l < r ? 'a' + l : 'A' + (l - r));
  return s;
}

json group_spec_to_json(const GroupSpec& spec) {
  json j;
  switch (spec.family) {
    case GroupFamily::FreeGroup: j["family"] = "free"; break;
    case GroupFamily::FreeAbelian: j["family"] = "free_abelian"; break;
    case GroupFamily::FreeProductCyclic: j["family"] = "free_product_cyclic"; break;
    case GroupFamily::FinitePresented: j["family"] = "finite_presented"; break;
  }
  j["r"] = spec.r;
  if (!spec.orders.empty()) j["orders"] = spec.orders;
  if (!spec.relators.empty()) {
    json rel = json::array();
    for (const Word& w : spec.relators) rel.push_back(format_word(w, spec.r));
    j["relators"] = rel;
  }
  j["max_radius"] = spec.max_radius;
  return j;
}

GroupSpec group_spec_from_json(const json& j) {
  GroupSpec spec;
  const std::string family = j.at("family").get<std::string>();
  spec.r = j.at("r").get<int>();
  if (family == "free") {
    spec.family = GroupFamily::FreeGroup;
  } else if (family == "free_abelian") {
    spec.family = GroupFamily::FreeAbelian;
  } else if (family == "free_product_cyclic") {
    spec.family = GroupFamily::FreeProductCyclic;
    spec.orders = j.at("orders").get<std::vector<int>>();
  } else if (family == "finite_presented") {
    spec.family = GroupFamily::FinitePresented;
    for (const auto& s : j.at("relators"))
      spec.relators.push_back(parse_word(s.get<std::string>(), spec.r));
  } else {
    throw ConfigError("group spec: unknown family '" + family + "'");
  }
  if (j.contains("max_radius")) spec.max_radius = j["max_radius"].get<int>();
  if (j.contains("budget")) {
    const json& b = j["budget"];
    if (b.contains("max_rules")) spec.budget.max_rules = b["max_rules"].get<int>();
    if (b.contains("max_word_len")) spec.budget.max_word_len = b["max_word_len"].get<int>();
    if (b.contains("max_steps")) spec.budget.max_steps = b["max_steps"].get<long>();
  }
  spec.validate();
  return spec;
}

json model_to_json(const SpinModel& model) {
  return json{{"alphabet", model.alphabet}, {"J", model.J}, {"h", model.h}};
}

SpinModel model_from_json(const json& j) {
  SpinModel model;
  if (j.contains("preset")) {
    const std::string preset = j["preset"].get<std::string>();
    if (preset != "ising") throw ConfigError("model: unknown preset '" + preset + "'");
    model = SpinModel::ising(j.value("beta", 1.0), j.value("field", 0.0));
  } else {
    model.alphabet = j.at("alphabet").get<int>();
    model.J = j.at("J").get<std::vector<std::vector<double>>>();
    model.h = j.at("h").get<std::vector<double>>();
  }
  // Report the offending cell for asymmetric couplings.
  for (size_t a = 0; a < model.J.size(); ++a)
    for (size_t b = 0; b < model.J[a].size(); ++b)
      if (model.J[a][b] != model.J[b][a])
        throw ConfigError("model: J(" + std::to_string(a) + "," + std::to_string(b) +
                          ") != J(" + std::to_string(b) + "," + std::to_string(a) + ")");
  model.validate();
  return model;
}

json hom_to_json(const HomGraph& hom) {
  return json{{"n", hom.n}, {"perms", hom.perms}};
}

HomGraph hom_from_json(const json& j) {
  return HomGraph(j.at("n").get<int>(),
                  j.at("perms").get<std::vector<std::vector<int>>>());
}

json pattern_distribution_to_json(const PatternDistribution& P, const GroupSpec& spec) {
  json atoms = json::array();
  for (const auto& [labels, mass] : P.w) {
    atoms.push_back(json{{"labels", labels}, {"weight", mass}});
  }
  return json{{"radius", P.radius},
              {"group_spec_hash", to_hex(json_hash(group_spec_to_json(spec)))},
              {"atoms", atoms}};
}

PatternDistribution pattern_distribution_from_json(const json& j) {
  PatternDistribution P;
  P.radius = j.at("radius").get<int>();
  for (const auto& atom : j.at("atoms")) {
    std::vector<Letter> labels;
    for (const auto& l : atom.at("labels")) labels.push_back(l.get<Letter>());
    P.w[labels] += atom.at("weight").get<double>();
  }
  return P;
}

std::uint64_t json_hash(const json& j) { return fnv1a(j.dump()); }

}  // namespace soficspin
