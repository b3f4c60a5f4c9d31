#pragma once

// Scenario files: a named fixture bundling the requirement list, its tables,
// schedule and budgets, and an optional expected-results block with pinned
// outcomes and cost constants.  JSON, versioned by schema_version = 1:
//
//   {
//     "schema_version": 1,
//     "name": "s1",
//     "schedule": "compact" | "paper" | {"deltas": [8, 14]},
//     "strip_convention": "literal" | "next",
//     "budgets": {"stage": 512, "sim_stages": 48},
//     "functionals": [
//       {"id": "phi0", "block_encode": {"max_level": 13, "step_delays": [[3, 10]]}},
//       {"id": "psi0", "axioms": [{"use": "", "input": 0, "output": 7, "step": 1}]}
//     ],
//     "partials": [{"id": "r0", "values": [[0, 7]]}],
//     "ce_sets": [{"id": "w0", "enumerations": [[0, 3]]}],
//     "requirements": [
//       {"kind": "M", "phi": "phi0"},
//       {"kind": "L", "psi": "psi0", "r": "r0"},
//       {"kind": "P", "w": "w0"}
//     ],
//     "expected": {
//       "outcomes": ["Mi", "Li", "P:1"],
//       "a_prefix": "1",
//       "xi": [{"e": 0, "rho": "", "entries": [[0, 7]]}],
//       "sim_cost_coeff": 50,
//       "watch_coeff": 4,
//       "watch_exp": 2
//     }
//   }
//
// Load -> serialize -> load is the identity; all tables are validated on
// load and errors carry their JSON location.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lowspeed/functionals.hpp"
#include "lowspeed/labeled_tree.hpp"
#include "lowspeed/orchestrator.hpp"
#include "lowspeed/procedure.hpp"

namespace lowspeed {

struct ReqSpec {
  ReqKind kind = ReqKind::M;
  std::string phi;  // M
  std::string psi;  // L
  std::string r;    // L
  std::string w;    // P
};

struct Budgets {
  std::int64_t stage = 512;
  std::int64_t sim_stages = 48;
};

struct ExpectedXi {
  int e = 0;
  std::string rho;
  std::vector<std::pair<std::int64_t, std::int64_t>> entries;  // input -> value
};

struct Expected {
  std::vector<std::string> outcomes;              // outcome tokens in slot order
  std::optional<std::string> a_prefix;
  std::vector<ExpectedXi> xi;
  std::optional<std::int64_t> sim_cost_coeff;     // C in C*s^3
  std::optional<std::int64_t> watch_coeff;        // c in c*s^q
  std::optional<int> watch_exp;                   // q
};

struct Scenario {
  std::string name;
  Schedule schedule = Schedule::compact();
  StripConvention strip = StripConvention::Literal;
  Budgets budgets;
  std::vector<FunctionalTable> functionals;
  std::vector<PartialFunctionTable> partials;
  std::vector<StagedCeSet> ce_sets;
  std::vector<ReqSpec> req_specs;
  std::optional<Expected> expected;

  const FunctionalTable& functional(const std::string& id) const {
    for (const auto& f : functionals)
      if (f.id == id) return f;
    throw std::invalid_argument("scenario " + name + ": no functional \"" + id + "\"");
  }
  const PartialFunctionTable& partial(const std::string& id) const {
    for (const auto& p : partials)
      if (p.id == id) return p;
    throw std::invalid_argument("scenario " + name + ": no partial \"" + id + "\"");
  }
  const StagedCeSet& ce_set(const std::string& id) const {
    for (const auto& w : ce_sets)
      if (w.id == id) return w;
    throw std::invalid_argument("scenario " + name + ": no c.e. set \"" + id + "\"");
  }

  // Requirement views pointing into this scenario's tables; the scenario must
  // outlive them.
  std::vector<Requirement> requirements() const {
    std::vector<Requirement> out;
    for (const auto& rs : req_specs) {
      switch (rs.kind) {
        case ReqKind::M: out.push_back(Requirement::M(functional(rs.phi))); break;
        case ReqKind::L: out.push_back(Requirement::L(functional(rs.psi), partial(rs.r))); break;
        case ReqKind::P: out.push_back(Requirement::P(ce_set(rs.w))); break;
      }
    }
    return out;
  }

  BuildOptions build_options() const {
    BuildOptions opt;
    opt.schedule = schedule;
    opt.strip = strip;
    opt.stage_budget = budgets.stage;
    return opt;
  }
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void fail_at(const std::string& where, const std::string& what) {
  throw std::invalid_argument(where + ": " + what);
}

inline const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail_at(where, std::string("missing field \"") + key + "\"");
  return *it;
}

inline std::string need_string(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_string()) fail_at(where + "." + key, "expected a string");
  return v.get<std::string>();
}

inline std::int64_t need_int(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number_integer()) fail_at(where + "." + key, "expected an integer");
  return v.get<std::int64_t>();
}

inline std::vector<std::pair<std::int64_t, std::int64_t>> int_pairs(const json& v,
                                                                    const std::string& where) {
  if (!v.is_array()) fail_at(where, "expected an array of [a, b] pairs");
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& p = v[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
        !p[1].is_number_integer())
      fail_at(where + "[" + std::to_string(i) + "]", "expected an [int, int] pair");
    out.emplace_back(p[0].get<std::int64_t>(), p[1].get<std::int64_t>());
  }
  return out;
}

inline FunctionalTable parse_functional(const json& j, const std::string& where) {
  if (!j.is_object()) fail_at(where, "expected an object");
  std::string id = need_string(j, "id", where);
  bool has_axioms = j.contains("axioms"), has_gen = j.contains("block_encode");
  if (has_axioms == has_gen)
    fail_at(where, "give exactly one of \"axioms\" and \"block_encode\"");
  FunctionalTable t;
  if (has_gen) {
    const json& g = j["block_encode"];
    BlockEncode be;
    be.max_level = static_cast<int>(need_int(g, "max_level", where + ".block_encode"));
    if (g.contains("step_delays"))
      for (auto& [lvl, d] : int_pairs(g["step_delays"], where + ".block_encode.step_delays"))
        be.step_delays[static_cast<int>(lvl)] = d;
    t = FunctionalTable::from_block_encode(id, be);
  } else {
    const json& arr = j["axioms"];
    if (!arr.is_array()) fail_at(where + ".axioms", "expected an array");
    std::vector<Axiom> axioms;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string aw = where + ".axioms[" + std::to_string(i) + "]";
      const json& a = arr[i];
      if (!a.is_object()) fail_at(aw, "expected an object");
      Axiom ax;
      ax.use = need_string(a, "use", aw);
      for (char c : ax.use)
        if (c != '0' && c != '1') fail_at(aw + ".use", "expected a 0/1 string");
      ax.input = need_int(a, "input", aw);
      ax.output = need_int(a, "output", aw);
      ax.step = need_int(a, "step", aw);
      axioms.push_back(std::move(ax));
    }
    t = FunctionalTable::from_axioms(id, std::move(axioms));
  }
  try {
    t.validate();
  } catch (const std::exception& ex) {
    fail_at(where, ex.what());
  }
  return t;
}

inline json functional_to_json(const FunctionalTable& t) {
  json j;
  j["id"] = t.id;
  if (t.generated()) {
    json g;
    g["max_level"] = t.generator().max_level;
    if (!t.generator().step_delays.empty()) {
      json d = json::array();
      for (auto& [lvl, delay] : t.generator().step_delays)
        d.push_back(json::array({lvl, delay}));
      g["step_delays"] = d;
    }
    j["block_encode"] = g;
  } else {
    json arr = json::array();
    for (const Axiom& a : t.explicit_axioms())
      arr.push_back(json{{"use", a.use}, {"input", a.input}, {"output", a.output},
                         {"step", a.step}});
    j["axioms"] = arr;
  }
  return j;
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j, const std::string& where = "scenario") {
  using detail::fail_at;
  using detail::int_pairs;
  using detail::need;
  using detail::need_int;
  using detail::need_string;
  if (!j.is_object()) fail_at(where, "expected a JSON object");
  std::int64_t ver = need_int(j, "schema_version", where);
  if (ver != 1) fail_at(where + ".schema_version", "unsupported version " + std::to_string(ver));

  Scenario sc;
  sc.name = need_string(j, "name", where);

  const nlohmann::json& sj = need(j, "schedule", where);
  if (sj.is_string()) {
    std::string tok = sj.get<std::string>();
    if (tok == "paper")
      sc.schedule = Schedule::paper();
    else if (tok == "compact")
      sc.schedule = Schedule::compact();
    else
      fail_at(where + ".schedule", "expected \"paper\", \"compact\", or {\"deltas\": [...]}");
  } else if (sj.is_object() && sj.contains("deltas")) {
    const nlohmann::json& d = sj["deltas"];
    if (!d.is_array()) fail_at(where + ".schedule.deltas", "expected an array");
    std::vector<std::int64_t> deltas;
    for (const auto& v : d) {
      if (!v.is_number_integer()) fail_at(where + ".schedule.deltas", "expected integers");
      deltas.push_back(v.get<std::int64_t>());
    }
    try {
      sc.schedule = Schedule::custom(std::move(deltas));
    } catch (const std::exception& ex) {
      fail_at(where + ".schedule", ex.what());
    }
  } else {
    fail_at(where + ".schedule", "expected \"paper\", \"compact\", or {\"deltas\": [...]}");
  }

  if (j.contains("strip_convention")) {
    try {
      sc.strip = parse_strip_convention(need_string(j, "strip_convention", where));
    } catch (const std::exception& ex) {
      fail_at(where + ".strip_convention", ex.what());
    }
  }

  if (j.contains("budgets")) {
    const nlohmann::json& b = j["budgets"];
    if (!b.is_object()) fail_at(where + ".budgets", "expected an object");
    if (b.contains("stage")) sc.budgets.stage = need_int(b, "stage", where + ".budgets");
    if (b.contains("sim_stages"))
      sc.budgets.sim_stages = need_int(b, "sim_stages", where + ".budgets");
    if (sc.budgets.stage < 1 || sc.budgets.sim_stages < 1)
      fail_at(where + ".budgets", "budgets must be >= 1");
  }

  std::set<std::string> names;
  auto claim = [&](const std::string& id, const std::string& w) {
    if (!names.insert(id).second) fail_at(w, "duplicate table id \"" + id + "\"");
  };
  if (j.contains("functionals")) {
    const nlohmann::json& arr = j["functionals"];
    if (!arr.is_array()) fail_at(where + ".functionals", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string w = where + ".functionals[" + std::to_string(i) + "]";
      sc.functionals.push_back(detail::parse_functional(arr[i], w));
      claim(sc.functionals.back().id, w);
    }
  }
  if (j.contains("partials")) {
    const nlohmann::json& arr = j["partials"];
    if (!arr.is_array()) fail_at(where + ".partials", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string w = where + ".partials[" + std::to_string(i) + "]";
      if (!arr[i].is_object()) fail_at(w, "expected an object");
      PartialFunctionTable p;
      p.id = need_string(arr[i], "id", w);
      for (auto& [k, v] : int_pairs(need(arr[i], "values", w), w + ".values")) {
        if (p.values.count(k)) fail_at(w + ".values", "duplicate input " + std::to_string(k));
        p.values[k] = v;
      }
      claim(p.id, w);
      sc.partials.push_back(std::move(p));
    }
  }
  if (j.contains("ce_sets")) {
    const nlohmann::json& arr = j["ce_sets"];
    if (!arr.is_array()) fail_at(where + ".ce_sets", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string w = where + ".ce_sets[" + std::to_string(i) + "]";
      if (!arr[i].is_object()) fail_at(w, "expected an object");
      StagedCeSet s;
      s.id = need_string(arr[i], "id", w);
      s.enumerations = int_pairs(need(arr[i], "enumerations", w), w + ".enumerations");
      for (auto& [el, st] : s.enumerations)
        if (el < 0 || st < 0) fail_at(w + ".enumerations", "elements and stages must be >= 0");
      claim(s.id, w);
      sc.ce_sets.push_back(std::move(s));
    }
  }

  const nlohmann::json& reqs = need(j, "requirements", where);
  if (!reqs.is_array()) fail_at(where + ".requirements", "expected an array");
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    std::string w = where + ".requirements[" + std::to_string(i) + "]";
    if (!reqs[i].is_object()) fail_at(w, "expected an object");
    std::string kind = need_string(reqs[i], "kind", w);
    ReqSpec rs;
    if (kind == "M") {
      rs.kind = ReqKind::M;
      rs.phi = need_string(reqs[i], "phi", w);
      sc.functional(rs.phi);
    } else if (kind == "L") {
      rs.kind = ReqKind::L;
      rs.psi = need_string(reqs[i], "psi", w);
      rs.r = need_string(reqs[i], "r", w);
      sc.functional(rs.psi);
      sc.partial(rs.r);
    } else if (kind == "P") {
      rs.kind = ReqKind::P;
      rs.w = need_string(reqs[i], "w", w);
      sc.ce_set(rs.w);
    } else {
      fail_at(w + ".kind", "expected \"M\", \"L\", or \"P\"");
    }
    ReqKind want = OutcomeString::kind_at(i);
    if (rs.kind != want)
      fail_at(w, std::string("slot expects kind ") + "MLP"[static_cast<int>(want)]);
    sc.req_specs.push_back(std::move(rs));
  }

  if (j.contains("expected")) {
    const nlohmann::json& ej = j["expected"];
    std::string w = where + ".expected";
    if (!ej.is_object()) fail_at(w, "expected an object");
    Expected ex;
    if (ej.contains("outcomes")) {
      if (!ej["outcomes"].is_array()) fail_at(w + ".outcomes", "expected an array");
      for (const auto& o : ej["outcomes"]) {
        if (!o.is_string()) fail_at(w + ".outcomes", "expected strings");
        ex.outcomes.push_back(o.get<std::string>());
      }
    }
    if (ej.contains("a_prefix")) ex.a_prefix = need_string(ej, "a_prefix", w);
    if (ej.contains("xi")) {
      if (!ej["xi"].is_array()) fail_at(w + ".xi", "expected an array");
      for (std::size_t i = 0; i < ej["xi"].size(); ++i) {
        std::string xw = w + ".xi[" + std::to_string(i) + "]";
        const nlohmann::json& xj = ej["xi"][i];
        if (!xj.is_object()) fail_at(xw, "expected an object");
        ExpectedXi xe;
        xe.e = static_cast<int>(need_int(xj, "e", xw));
        xe.rho = need_string(xj, "rho", xw);
        xe.entries = int_pairs(need(xj, "entries", xw), xw + ".entries");
        ex.xi.push_back(std::move(xe));
      }
    }
    if (ej.contains("sim_cost_coeff")) ex.sim_cost_coeff = need_int(ej, "sim_cost_coeff", w);
    if (ej.contains("watch_coeff")) ex.watch_coeff = need_int(ej, "watch_coeff", w);
    if (ej.contains("watch_exp"))
      ex.watch_exp = static_cast<int>(need_int(ej, "watch_exp", w));
    sc.expected = std::move(ex);
  }
  return sc;
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["name"] = sc.name;
  switch (sc.schedule.kind) {
    case Schedule::Kind::Paper: j["schedule"] = "paper"; break;
    case Schedule::Kind::Compact: j["schedule"] = "compact"; break;
    case Schedule::Kind::Custom: j["schedule"] = nlohmann::json{{"deltas", sc.schedule.deltas}}; break;
  }
  j["strip_convention"] = sc.strip == StripConvention::Literal ? "literal" : "next";
  j["budgets"] = nlohmann::json{{"stage", sc.budgets.stage},
                                {"sim_stages", sc.budgets.sim_stages}};
  if (!sc.functionals.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : sc.functionals) arr.push_back(detail::functional_to_json(f));
    j["functionals"] = arr;
  }
  if (!sc.partials.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : sc.partials) {
      nlohmann::json vals = nlohmann::json::array();
      for (auto& [k, v] : p.values) vals.push_back(nlohmann::json::array({k, v}));
      arr.push_back(nlohmann::json{{"id", p.id}, {"values", vals}});
    }
    j["partials"] = arr;
  }
  if (!sc.ce_sets.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : sc.ce_sets) {
      nlohmann::json en = nlohmann::json::array();
      for (auto& [el, st] : s.enumerations) en.push_back(nlohmann::json::array({el, st}));
      arr.push_back(nlohmann::json{{"id", s.id}, {"enumerations", en}});
    }
    j["ce_sets"] = arr;
  }
  nlohmann::json reqs = nlohmann::json::array();
  for (const auto& rs : sc.req_specs) {
    nlohmann::json rj;
    switch (rs.kind) {
      case ReqKind::M: rj = {{"kind", "M"}, {"phi", rs.phi}}; break;
      case ReqKind::L: rj = {{"kind", "L"}, {"psi", rs.psi}, {"r", rs.r}}; break;
      case ReqKind::P: rj = {{"kind", "P"}, {"w", rs.w}}; break;
    }
    reqs.push_back(rj);
  }
  j["requirements"] = reqs;
  if (sc.expected) {
    nlohmann::json ej;
    if (!sc.expected->outcomes.empty()) ej["outcomes"] = sc.expected->outcomes;
    if (sc.expected->a_prefix) ej["a_prefix"] = *sc.expected->a_prefix;
    if (!sc.expected->xi.empty()) {
      nlohmann::json xs = nlohmann::json::array();
      for (const auto& xe : sc.expected->xi) {
        nlohmann::json en = nlohmann::json::array();
        for (auto& [k, v] : xe.entries) en.push_back(nlohmann::json::array({k, v}));
        xs.push_back(nlohmann::json{{"e", xe.e}, {"rho", xe.rho}, {"entries", en}});
      }
      ej["xi"] = xs;
    }
    if (sc.expected->sim_cost_coeff) ej["sim_cost_coeff"] = *sc.expected->sim_cost_coeff;
    if (sc.expected->watch_coeff) ej["watch_coeff"] = *sc.expected->watch_coeff;
    if (sc.expected->watch_exp) ej["watch_exp"] = *sc.expected->watch_exp;
    j["expected"] = ej;
  }
  return j;
}

inline std::string serialize_scenario(const Scenario& sc) {
  return scenario_to_json(sc).dump(2) + "\n";
}

inline Scenario parse_scenario_text(const std::string& text,
                                    const std::string& where = "scenario") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& ex) {
    throw std::invalid_argument(where + ": " + ex.what());
  }
  return parse_scenario(j, where);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_scenario: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& ex) {
    throw std::invalid_argument("load_scenario: " + path + ": " + ex.what());
  }
  return parse_scenario(j, path);
}

}  // namespace lowspeed
