#pragma once

// One-stop execution of a scenario: build the family and path, run the
// simulations, execute the selected check categories, and collect artifacts
// (trace, report, optional DOT) as strings keyed by filename.  Everything is
// deterministic; two runs of the same scenario produce identical artifacts.
//
// Trace format: tab-separated, one event per line, stable field order.
//   scenario <name> <stage_budget> <sim_stages>
//   step     <slot> <kind+index> <resolved> <outcome> <a_after> <tree_key> <cost>
//   tree     <key> <e> <provenance> <depth> <status> <status_stage> <fnv64>
//   sim      <e> <rho> <input> <value> <stage> <witness>
//   simcost  <e> <rho> <total> <per-stage commas>
//   check    <category> <name> <pass> <detail>
// Tree contents are folded into a 64-bit FNV-1a of the full fingerprint so
// golden traces stay small while still pinning every node.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lowspeed/checks.hpp"
#include "lowspeed/orchestrator.hpp"
#include "lowspeed/scenario.hpp"
#include "lowspeed/simulation.hpp"

namespace lowspeed {

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return out;
}

struct RunOptions {
  std::int64_t budget_override = 0;      // 0 keeps the scenario budget
  std::int64_t sim_budget_override = 0;  // 0 keeps the scenario sim budget
  std::set<std::string> categories;      // empty or "all" runs everything
  bool emit_dot = false;
  std::optional<Schedule> schedule_override;
};

struct SimInstance {
  int e = 0;
  Label eta;
  std::string rho;
  SimulationLedger ledger;
};

// Holds pointers into the scenario's tables; the scenario must outlive it.
struct RunResult {
  Orchestration orc;
  std::vector<SimInstance> sims;
  CheckSuite checks;
  std::map<std::string, std::string> artifacts;
  bool ok = false;
};

namespace detail {

inline std::string file_key(const std::string& family_key) {
  if (family_key.empty()) return "base";
  std::string out;
  for (char c : family_key)
    out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

inline void check_label_universe(CheckSuite& out) {
  // Universe of word length <= n plus top, sorted descending, for small n:
  // the order must walk the documented chain and pred must step down it.
  auto universe = [](int n) {
    std::vector<Label> ls{Label::Top()};
    std::vector<std::string> words{""};
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (static_cast<int>(words[i].size()) >= n) continue;
      words.push_back(words[i] + kInf);
      words.push_back(words[i] + kFin);
    }
    for (auto& w : words) ls.push_back(Label::Word(w));
    std::sort(ls.begin(), ls.end(),
              [](const Label& a, const Label& b) { return label_cmp(a, b) > 0; });
    return ls;
  };
  auto chain2 = universe(2);
  std::vector<std::string> want{"T", "ff", "fi", "f", "if", "ii", "i", ""};
  bool chain_ok = chain2.size() == want.size();
  std::string got;
  for (std::size_t i = 0; i < chain2.size(); ++i) {
    if (i) got += " > ";
    got += format_label(chain2[i]).empty() ? "(empty)" : format_label(chain2[i]);
    if (chain_ok && format_label(chain2[i]) != want[i]) chain_ok = false;
  }
  out.add("labels", "order-chain", chain_ok, got);

  bool pred_ok = true;
  std::string pred_bad;
  for (int n = 1; n <= 4 && pred_ok; ++n) {
    auto ls = universe(n);
    for (std::size_t i = 0; i + 1 < ls.size(); ++i) {
      Label p = label_pred(ls[i], static_cast<std::size_t>(n));
      if (label_cmp(p, ls[i + 1]) != 0) {
        pred_ok = false;
        pred_bad = "pred_" + std::to_string(n) + "(" + format_label(ls[i]) + ") = " +
                   format_label(p) + ", chain has " + format_label(ls[i + 1]);
        break;
      }
    }
  }
  out.add("labels", "pred-steps-chain", pred_ok,
          pred_ok ? "predecessor walks the sorted chain for n <= 4" : pred_bad);
}

inline int computed_cofinal_cap(const LabeledTree& t) {
  int cap = -1;
  const auto& frontier = t.levels[static_cast<std::size_t>(t.depth())];
  for (int i = 0; i < static_cast<int>(frontier.size()); ++i) {
    int best = -1;
    NodeId id{t.depth(), i};
    while (true) {
      const LabeledNode& n = t.node(id);
      if (n.label.top && n.scope > best) best = n.scope;
      if (id.level == 0) break;
      id = t.parent_of(id);
    }
    if (cap < 0 || best < cap) cap = best;
  }
  return cap;
}

}  // namespace detail

inline CheckSuite verify_expected(const Scenario& sc, const TruePathState& path,
                                  const std::vector<SimInstance>& sims) {
  CheckSuite out;
  if (!sc.expected) {
    out.add("expected", "pinned-block", true, "scenario has no expected block; skipped");
    return out;
  }
  const Expected& ex = *sc.expected;
  if (!ex.outcomes.empty()) {
    bool match = ex.outcomes.size() == path.steps.size();
    std::string detail;
    for (std::size_t i = 0; match && i < ex.outcomes.size(); ++i) {
      const StepRecord& rec = path.steps[i];
      std::string got = rec.resolved ? outcome_token(rec.kind, rec.outcome) : "?";
      if (got != ex.outcomes[i]) {
        match = false;
        detail = "slot " + std::to_string(i) + ": expected " + ex.outcomes[i] + ", got " + got;
      }
    }
    if (ex.outcomes.size() != path.steps.size())
      detail = "expected " + std::to_string(ex.outcomes.size()) + " outcomes, got " +
               std::to_string(path.steps.size());
    out.add("expected", "outcomes", match, match ? "all slots match" : detail);
  }
  if (ex.a_prefix)
    out.add("expected", "a-prefix", path.a == *ex.a_prefix,
            path.a == *ex.a_prefix ? "A = \"" + path.a + "\""
                                   : "expected \"" + *ex.a_prefix + "\", got \"" + path.a + "\"");
  for (const ExpectedXi& xe : ex.xi) {
    const SimInstance* hit = nullptr;
    for (const auto& si : sims)
      if (si.e == xe.e && si.rho == xe.rho) hit = &si;
    std::string tag = "xi[e=" + std::to_string(xe.e) + ",rho=\"" + xe.rho + "\"]";
    if (!hit) {
      out.add("expected", tag, false, "no such simulation instance ran");
      continue;
    }
    bool match = hit->ledger.xi.size() == xe.entries.size();
    std::string detail;
    for (auto& [k, v] : xe.entries) {
      auto it = hit->ledger.xi.find(k);
      if (it == hit->ledger.xi.end()) {
        match = false;
        detail = "input " + std::to_string(k) + " undefined";
        break;
      }
      if (it->second.value != v) {
        match = false;
        detail = "input " + std::to_string(k) + ": expected " + std::to_string(v) + ", got " +
                 std::to_string(it->second.value);
        break;
      }
    }
    if (match && hit->ledger.xi.size() != xe.entries.size())
      detail = "extra simulated inputs beyond the pinned " + std::to_string(xe.entries.size());
    out.add("expected", tag, match, match ? std::to_string(xe.entries.size()) + " entries match" : detail);
  }
  if (ex.sim_cost_coeff) {
    bool ok = true;
    std::string detail = "all per-stage costs within " + std::to_string(*ex.sim_cost_coeff) + "*s^3";
    for (const auto& si : sims) {
      auto rep = verify_cost_bound(si.ledger, *ex.sim_cost_coeff);
      if (!rep.ok()) {
        ok = false;
        detail = "e=" + std::to_string(si.e) + " rho=\"" + si.rho + "\": " +
                 rep.checks.front().detail;
      }
    }
    out.add("expected", "sim-cost-coeff", ok, detail);
  }
  return out;
}

inline RunResult run_scenario(const Scenario& sc, const RunOptions& opt = {}) {
  BuildOptions bopt = sc.build_options();
  if (opt.budget_override > 0) bopt.stage_budget = opt.budget_override;
  if (opt.schedule_override) bopt.schedule = *opt.schedule_override;
  std::int64_t sim_stages =
      opt.sim_budget_override > 0 ? opt.sim_budget_override : sc.budgets.sim_stages;
  std::vector<Requirement> reqs = sc.requirements();

  RunResult res{build_A(reqs, bopt), {}, {}, {}, false};
  Orchestration& orc = res.orc;
  auto want = [&](const char* cat) {
    return opt.categories.empty() || opt.categories.count("all") != 0 ||
           opt.categories.count(cat) != 0;
  };

  if (want("labels")) detail::check_label_universe(res.checks);

  if (want("trees")) {
    Schedule paper = Schedule::paper();
    bool sched_ok = paper.expansionary_level(1) == 0 && paper.expansionary_level(2) == 64 &&
                    paper.expansionary_level(3) == 192;
    res.checks.add("trees", "stock-schedule", sched_ok,
                   "e_1=" + std::to_string(paper.expansionary_level(1)) +
                       " e_2=" + std::to_string(paper.expansionary_level(2)) +
                       " e_3=" + std::to_string(paper.expansionary_level(3)));
    for (const FamilyEntry& fe : orc.family.entries()) {
      std::string tag = fe.key.empty() ? "base" : fe.key;
      res.checks.merge(check_admissible_line(*fe.tree, fe.tree->depth(), 1, tag));
      res.checks.add("trees", tag + ":cofinal-cap", true,
                     "max witnessed top-scope on every path: " +
                         std::to_string(detail::computed_cofinal_cap(*fe.tree)));
    }
  }

  if (want("procedure")) {
    for (const FamilyEntry& fe : orc.family.entries()) {
      if (!fe.proc) continue;
      const FunctionalTable& phi =
          sc.functional(sc.req_specs[static_cast<std::size_t>(3 * fe.e)].phi);
      std::string tag = "T" + std::to_string(fe.e);
      const LabeledTree& t = *fe.tree;
      res.checks.merge(check_expansionary_ancestors(t, bopt.schedule, tag));
      res.checks.merge(check_splits_or_down(t, phi, bopt.stage_budget, tag));
      res.checks.merge(check_branch_splitting(t, phi, bopt.stage_budget, bopt.schedule, tag));
      res.checks.merge(
          check_label_projection(t, *orc.family.entry(fe.host_key).tree, tag));
    }
  }

  if (want("truepath")) {
    res.checks.add("truepath", "complete", orc.path.complete,
                   orc.path.complete ? "every slot resolved"
                                     : "walk stopped before the last slot");
    CaseReport cr = check_minimality_cases(orc, reqs, bopt.stage_budget);
    for (const auto& c : cr.checks) res.checks.add("truepath", c.name, c.pass, c.detail);
    for (const StepRecord& rec : orc.path.steps) {
      if (rec.kind != ReqKind::P || !rec.resolved) continue;
      const StagedCeSet* w = reqs[rec.slot].w;
      bool differs = !w->is_characteristic_prefix(orc.path.a, bopt.stage_budget);
      res.checks.add("truepath", "P" + std::to_string(rec.e) + ":a-differs",
                     differs,
                     differs ? "A is not a characteristic prefix of " + w->id
                             : "A agrees with " + w->id + " on its whole length");
    }
  }

  if (want("simulation")) {
    for (const StepRecord& rec : orc.path.steps) {
      if (rec.kind != ReqKind::L || !rec.resolved) continue;
      int e = rec.e;
      const FunctionalTable& psi =
          sc.functional(sc.req_specs[static_cast<std::size_t>(3 * e + 1)].psi);
      const PartialFunctionTable& r =
          sc.partial(sc.req_specs[static_cast<std::size_t>(3 * e + 1)].r);
      std::string ltag = "L" + std::to_string(e);
      SimTrees st;
      std::vector<std::string> cover;
      try {
        st = sim_trees_for(orc, e);
        cover = choose_cover(st, e);
      } catch (const std::exception& exn) {
        res.checks.add("simulation", ltag + ":cover", false, exn.what());
        continue;
      }
      res.checks.add("simulation", ltag + ":cover", true,
                     std::to_string(cover.size()) + " cover node(s)");
      Label eta = sim_guesses_for(orc.path, e);
      for (const std::string& rho : cover) {
        SimInstance si{e, eta, rho, sim_run(st, psi, e, eta, rho, sim_stages)};
        std::string tag = ltag + "@\"" + rho + "\"";
        bool linf = orc.path.pi.l(static_cast<std::size_t>(e)).infinitary;
        if (linf) {
          std::int64_t c = sc.expected && sc.expected->watch_coeff ? *sc.expected->watch_coeff : 8;
          int q = sc.expected && sc.expected->watch_exp ? *sc.expected->watch_exp : 2;
          auto rw = verify_result_watched(si.ledger, st, psi, orc.path.a, sim_stages, c, q);
          for (const auto& ck : rw.checks)
            res.checks.add("simulation", tag + ":" + ck.name, ck.pass, ck.detail);
        } else {
          res.checks.add("simulation", tag + ":watched", true,
                         "skipped: finitary comparison outcome");
        }
        auto ot = verify_on_tree(si.ledger, *st.trees[static_cast<std::size_t>(e)], psi,
                                 sim_stages);
        for (const auto& ck : ot.checks)
          res.checks.add("simulation", tag + ":" + ck.name, ck.pass, ck.detail);
        bool agree = true;
        for (std::int64_t n : psi.declared_inputs()) {
          auto va = psi.eval(orc.path.a, n, bopt.stage_budget);
          auto vr = r.eval(n);
          if (va && vr && *va != *vr) agree = false;
        }
        if (linf && agree) {
          auto lf = verify_low_for_speed(si.ledger, r);
          for (const auto& ck : lf.checks)
            res.checks.add("simulation", tag + ":" + ck.name, ck.pass, ck.detail);
        } else {
          res.checks.add("simulation", tag + ":agrees", true,
                         linf ? "skipped: computation along A departs from the reference"
                              : "skipped: finitary comparison outcome");
        }
        std::int64_t C = sc.expected && sc.expected->sim_cost_coeff
                             ? *sc.expected->sim_cost_coeff
                             : 64;
        auto cb = verify_cost_bound(si.ledger, C);
        for (const auto& ck : cb.checks)
          res.checks.add("simulation", tag + ":" + ck.name, ck.pass, ck.detail);
        res.sims.push_back(std::move(si));
      }
    }
  }

  res.checks.merge(verify_expected(sc, orc.path, res.sims));

  // Artifacts.
  {
    std::ostringstream tr;
    tr << "scenario\t" << sc.name << "\t" << bopt.stage_budget << "\t" << sim_stages << "\n";
    for (const StepRecord& rec : orc.path.steps) {
      tr << "step\t" << rec.slot << "\t" << "MLP"[static_cast<int>(rec.kind)] << rec.e << "\t"
         << (rec.resolved ? 1 : 0) << "\t"
         << (rec.resolved ? outcome_token(rec.kind, rec.outcome) : "-") << "\t" << rec.a_after
         << "\t" << (rec.tree_key.empty() ? "(base)" : rec.tree_key) << "\t" << rec.cost
         << "\n";
    }
    for (const FamilyEntry& fe : orc.family.entries()) {
      tr << "tree\t" << (fe.key.empty() ? "(base)" : fe.key) << "\t" << fe.e << "\t"
         << fe.tree->provenance << "\t" << fe.tree->depth() << "\t"
         << tree_status_name(fe.tree->status) << "\t" << fe.tree->status_stage << "\t"
         << hex64(fnv1a64(tree_fingerprint(*fe.tree))) << "\n";
    }
    for (const SimInstance& si : res.sims) {
      for (const auto& [k, entry] : si.ledger.xi)
        tr << "sim\t" << si.e << "\t" << si.rho << "\t" << k << "\t" << entry.value << "\t"
           << entry.stage << "\t" << entry.witness << "\n";
      tr << "simcost\t" << si.e << "\t" << si.rho << "\t" << si.ledger.total_cost() << "\t";
      for (std::size_t i = 0; i < si.ledger.stage_cost.size(); ++i)
        tr << (i ? "," : "") << si.ledger.stage_cost[i];
      tr << "\n";
    }
    for (const CheckLine& l : res.checks.lines)
      tr << "check\t" << l.category << "\t" << l.name << "\t" << (l.pass ? 1 : 0) << "\t"
         << l.detail << "\n";
    res.artifacts["trace.tsv"] = tr.str();
  }
  {
    std::ostringstream rp;
    rp << "scenario " << sc.name << " (stage budget " << bopt.stage_budget << ", sim stages "
       << sim_stages << ")\n\n";
    rp << format_true_path(orc.path) << "\n";
    for (const SimInstance& si : res.sims) rp << format_simulation(si.ledger);
    rp << "\n";
    int fails = res.checks.failures();
    for (const CheckLine& l : res.checks.lines)
      rp << (l.pass ? "pass" : "FAIL") << "  [" << l.category << "] " << l.name << ": "
         << l.detail << "\n";
    rp << "\n" << (fails == 0 ? "all checks passed" : std::to_string(fails) + " check(s) failed")
       << " (" << res.checks.lines.size() << " total)\n";
    res.artifacts["report.txt"] = rp.str();
  }
  if (opt.emit_dot)
    for (const FamilyEntry& fe : orc.family.entries())
      res.artifacts["tree_" + detail::file_key(fe.key) + ".dot"] =
          export_dot(*fe.tree, fe.key.empty() ? "base" : fe.key);

  res.ok = res.checks.ok();
  return res;
}

// Measured constants for the expected block: the smallest integer
// coefficients the run satisfies, doubled for headroom.
struct Calibration {
  std::int64_t sim_cost_coeff = 1;
  std::int64_t watch_coeff = 1;
  int watch_exp = 2;
  std::string suggested;  // JSON snippet for the scenario file
};

inline Calibration calibrate_scenario(const Scenario& sc, const RunOptions& opt = {}) {
  RunOptions ropt = opt;
  ropt.categories = {"simulation"};  // construction + sims, no heavy invariants
  RunResult res = run_scenario(sc, ropt);
  Calibration cal;
  std::int64_t sim_stages =
      opt.sim_budget_override > 0 ? opt.sim_budget_override : sc.budgets.sim_stages;
  for (const SimInstance& si : res.sims)
    for (std::size_t i = 0; i < si.ledger.stage_cost.size(); ++i) {
      std::int64_t s = static_cast<std::int64_t>(i) + 1;
      std::int64_t need = (si.ledger.stage_cost[i] + s * s * s - 1) / (s * s * s);
      cal.sim_cost_coeff = std::max(cal.sim_cost_coeff, need);
    }
  std::int64_t budget = opt.budget_override > 0 ? opt.budget_override : sc.budgets.stage;
  for (const SimInstance& si : res.sims) {
    if (!res.orc.path.pi.l(static_cast<std::size_t>(si.e)).infinitary) continue;
    const FunctionalTable& psi =
        sc.functional(sc.req_specs[static_cast<std::size_t>(3 * si.e + 1)].psi);
    for (std::int64_t r : psi.declared_inputs()) {
      std::optional<std::int64_t> first;
      for (std::int64_t s = 1; s <= sim_stages && !first; ++s)
        if (psi.eval(res.orc.path.a, r, s)) first = s;
      if (!first) continue;
      auto it = si.ledger.xi.find(r);
      if (it == si.ledger.xi.end()) continue;  // watched check will fail; nothing to pin
      std::int64_t denom = *first * *first;
      cal.watch_coeff = std::max(cal.watch_coeff, (it->second.stage + denom - 1) / denom);
    }
  }
  cal.sim_cost_coeff *= 2;
  cal.watch_coeff *= 2;

  nlohmann::json ex;
  std::vector<std::string> outcomes;
  for (const StepRecord& rec : res.orc.path.steps)
    outcomes.push_back(rec.resolved ? outcome_token(rec.kind, rec.outcome) : "?");
  ex["outcomes"] = outcomes;
  ex["a_prefix"] = res.orc.path.a;
  nlohmann::json xs = nlohmann::json::array();
  for (const SimInstance& si : res.sims) {
    nlohmann::json en = nlohmann::json::array();
    for (const auto& [k, entry] : si.ledger.xi)
      en.push_back(nlohmann::json::array({k, entry.value}));
    xs.push_back(nlohmann::json{{"e", si.e}, {"rho", si.rho}, {"entries", en}});
  }
  ex["xi"] = xs;
  ex["sim_cost_coeff"] = cal.sim_cost_coeff;
  ex["watch_coeff"] = cal.watch_coeff;
  ex["watch_exp"] = cal.watch_exp;
  cal.suggested = ex.dump(2);
  (void)budget;
  return cal;
}

}  // namespace lowspeed
