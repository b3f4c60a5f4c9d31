// Oracle-free simulation: cover choice, the admission predicate with its
// waiting gate, single-assignment harvesting, and the post-run checks.  The
// reference admission below re-derives the acceptance condition from scratch
// (explicit prefix chains, no tree views) and the suite holds the production
// path to exact agreement with it.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "lowspeed/base_tree.hpp"
#include "lowspeed/orchestrator.hpp"
#include "lowspeed/simulation.hpp"

using namespace lowspeed;
using Catch::Matchers::ContainsSubstring;

namespace ref {

// Root-to-deepest chain of nodes whose values prefix sigma, cut at `limit`.
std::vector<NodeId> prefix_chain(const LabeledTree& t, const std::string& sigma, int limit) {
  std::vector<NodeId> chain;
  const std::string& rv = t.node(t.root_id()).value;
  if (sigma.compare(0, rv.size(), rv) != 0) return chain;
  chain.push_back(t.root_id());
  while (chain.back().level < limit) {
    const LabeledNode& cur = t.node(chain.back());
    int next = -1;
    for (int ci : cur.children) {
      const std::string& cv = t.levels[static_cast<std::size_t>(chain.back().level) + 1]
                                      [static_cast<std::size_t>(ci)].value;
      if (cv.size() <= sigma.size() && sigma.compare(0, cv.size(), cv) == 0) next = ci;
    }
    if (next < 0) break;
    chain.push_back(NodeId{chain.back().level + 1, next});
  }
  return chain;
}

bool compat(const std::string& a, const std::string& b) {
  std::size_t n = std::min(a.size(), b.size());
  return a.compare(0, n, b.substr(0, n)) == 0;
}

// One tree's clause of the admission condition, transcribed independently:
// sigma must be a portion node inside the view above rho through labels
// above the guess suffix, or properly extend a frontier leaf of that view;
// on procedure-built trees a leaf whose label predecessor equals the suffix
// admits, while its wait is designated, only wait-compatible extensions.
bool admit(const LabeledTree& t, bool proc, const Label& eta_above, const std::string& rho,
           const std::string& sigma, std::int64_t s) {
  auto rho_id = t.find(rho);
  if (!rho_id) return false;
  int portion = t.depth_at_stage(s);
  if (portion < 0) return false;
  std::vector<NodeId> chain = prefix_chain(t, sigma, portion);
  if (chain.empty()) return false;
  NodeId deepest = chain.back();
  // In-view test: rho must sit on the chain and everything strictly past it
  // must be labeled above the suffix.
  int rl = rho_id->level;
  bool in_view = static_cast<int>(chain.size()) > rl - chain.front().level &&
                 chain[static_cast<std::size_t>(rl - chain.front().level)] == *rho_id;
  if (in_view)
    for (std::size_t i = static_cast<std::size_t>(rl - chain.front().level) + 1;
         i < chain.size(); ++i)
      if (label_cmp(t.node(chain[i]).label, eta_above) <= 0) in_view = false;
  const LabeledNode& dn = t.node(deepest);
  if (dn.value == sigma) return in_view;
  if (deepest.level != portion || !in_view) return false;
  bool designated = dn.ever_waiting && dn.declared_at >= 0 && dn.declared_at <= s &&
                    (dn.emitted_at < 0 || s < dn.emitted_at);
  if (proc && designated &&
      label_cmp(label_pred(dn.label, static_cast<std::size_t>(dn.scope)), eta_above) == 0)
    return compat(sigma, dn.wait_first) || compat(sigma, dn.wait_second);
  return true;
}

// Full simulation loop transcribed from the acceptance condition.
std::map<std::int64_t, SimEntry> run(const SimTrees& st, const FunctionalTable& psi, int e,
                                     const Label& eta, const std::string& rho,
                                     std::int64_t stages) {
  std::map<std::int64_t, SimEntry> xi;
  for (std::int64_t s = 1; s <= stages; ++s) {
    for (std::int64_t len = static_cast<std::int64_t>(rho.size()); len < s; ++len) {
      std::vector<std::string> ms = members_of_length(len);
      std::sort(ms.begin(), ms.end());
      for (const std::string& sigma : ms) {
        if (sigma.compare(0, rho.size(), rho) != 0) continue;
        bool pass = true;
        for (std::size_t ep = 0; ep < st.trees.size() && pass; ++ep) {
          Label above = Label::Word(eta.word.substr(ep + 1));
          pass = admit(*st.trees[ep], st.procedure_built[ep], above, rho, sigma, s);
        }
        if (!pass) continue;
        for (std::int64_t k : psi.declared_inputs()) {
          if (k >= s || xi.count(k)) continue;
          if (auto v = psi.eval(sigma, k, s)) xi[k] = SimEntry{*v, s, sigma};
        }
      }
    }
  }
  return xi;
}

}  // namespace ref

namespace {

void require_same(const std::map<std::int64_t, SimEntry>& got,
                  const std::map<std::int64_t, SimEntry>& want) {
  REQUIRE(got.size() == want.size());
  for (const auto& [k, e] : want) {
    INFO("input " << k);
    REQUIRE(got.count(k) == 1);
    const SimEntry& g = got.at(k);
    REQUIRE(g.value == e.value);
    REQUIRE(g.stage == e.stage);
    REQUIRE(g.witness == e.witness);
  }
}

// Two-round orchestration over cheap generated tables; both splitting
// requirements resolve infinitary, stacking tree 1 on tree 0.
struct Stack {
  FunctionalTable phiA = FunctionalTable::from_block_encode("phiA", BlockEncode{8, {}});
  FunctionalTable phiB = FunctionalTable::from_block_encode("phiB", BlockEncode{8, {}});
  FunctionalTable psiA = FunctionalTable::from_axioms("psiA", {{"", 0, 7, 1}});
  FunctionalTable psiB = FunctionalTable::from_axioms("psiB", {{"1", 0, 3, 1}});
  PartialFunctionTable rA{"rA", {{0, 7}}};
  PartialFunctionTable rB{"rB", {{0, 3}}};
  StagedCeSet wA{"wA", {}};
  StagedCeSet wB{"wB", {}};
  Orchestration orc;

  Stack()
      : orc(build_A(
            {Requirement::M(phiA), Requirement::L(psiA, rA), Requirement::P(wA),
             Requirement::M(phiB), Requirement::L(psiB, rB), Requirement::P(wB)},
            [] {
              BuildOptions o;
              o.schedule = Schedule::compact();
              o.stage_budget = 120;
              return o;
            }())) {}
};

// Hand tree with a designated waiting leaf whose wait pair leaves room for
// incompatible members: pair under "0" at the next boundary but one.
LabeledTree gate_tree() {
  LabeledTree t;
  t.set_root("", 1, Label::Top(), 0);
  std::vector<LabeledTree::ChildSpec> l1;
  l1.push_back({0, "0", 1, Label::Word("i"), NodeKind::Main});
  l1.push_back({0, "1", 1, Label::Top(), NodeKind::Main});
  t.emit_level(std::move(l1), 2);
  for (auto& n : t.levels[1]) {
    n.ever_waiting = true;
    n.declared_at = 1;
    n.wait_first = n.value + "000000";
    n.wait_second = n.value + "001111";
  }
  return t;
}

}  // namespace

TEST_CASE("the stacked walk resolves and yields its cover") {
  Stack stk;
  REQUIRE(stk.orc.path.complete);
  REQUIRE(path_key(stk.orc.path.pi) == "Mi|Li|P:1|Mi|Li|P:100");
  REQUIRE(stk.orc.path.a == "100");
  SimTrees st = sim_trees_for(stk.orc, 1);
  REQUIRE(st.trees.size() == 2);
  REQUIRE((st.procedure_built[0] && st.procedure_built[1]));
  REQUIRE(format_label(sim_guesses_for(stk.orc.path, 1)) == "ii");
  REQUIRE(format_label(sim_guesses_for(stk.orc.path, 0)) == "i");
  // Tree 1's root already has enough scope everywhere, so it covers alone.
  REQUIRE(choose_cover(st, 1) == std::vector<std::string>{"1"});
  REQUIRE_THROWS_AS(sim_trees_for(stk.orc, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(choose_cover(sim_trees_for(stk.orc, 0), 1), std::invalid_argument);
}

TEST_CASE("cover search descends past unqualified nodes and reports dead ends") {
  // Tree 0 lacks tree 1's root value entirely, so nothing ever qualifies.
  LabeledTree t0;
  t0.set_root("", 1, Label::Top(), 0);
  {
    std::vector<LabeledTree::ChildSpec> l1;
    l1.push_back({0, "00", 1, Label::Top(), NodeKind::Main});
    l1.push_back({0, "11", 1, Label::Top(), NodeKind::Main});
    t0.emit_level(std::move(l1), 1);
  }
  LabeledTree t1;
  t1.set_root("0", 1, Label::Top(), 0);
  SimTrees st;
  st.trees = {&t0, &t1};
  st.procedure_built = {true, true};
  REQUIRE_THROWS_WITH(choose_cover(st, 1), ContainsSubstring("insufficient depth"));

  // A non-top root defers to its children: the cover is the next antichain.
  LabeledTree t2;
  t2.set_root("", 1, Label::Top(), 0);
  {
    std::vector<LabeledTree::ChildSpec> l1;
    l1.push_back({0, "0", 1, Label::Top(), NodeKind::Main});
    l1.push_back({0, "1", 1, Label::Top(), NodeKind::Main});
    t2.emit_level(std::move(l1), 1);
    std::vector<LabeledTree::ChildSpec> l2;
    l2.push_back({0, "000", 1, Label::Top(), NodeKind::Main});
    l2.push_back({0, "011", 1, Label::Top(), NodeKind::Main});
    l2.push_back({1, "100", 1, Label::Top(), NodeKind::Main});
    l2.push_back({1, "111", 1, Label::Top(), NodeKind::Main});
    t2.emit_level(std::move(l2), 2);
  }
  LabeledTree t3;
  t3.set_root("0", 1, Label::Word("i"), 0);
  {
    std::vector<LabeledTree::ChildSpec> l1;
    l1.push_back({0, "000", 1, Label::Top(), NodeKind::Main});
    l1.push_back({0, "011", 1, Label::Top(), NodeKind::Main});
    t3.emit_level(std::move(l1), 1);
  }
  SimTrees st2;
  st2.trees = {&t2, &t3};
  st2.procedure_built = {true, true};
  REQUIRE(choose_cover(st2, 1) == std::vector<std::string>{"000", "011"});
}

TEST_CASE("the waiting gate admits only wait-compatible extensions") {
  LabeledTree t = gate_tree();
  detail::StagePortion sp;
  sp.t = &t;
  sp.proc = true;
  sp.eta_above = Label::Empty();
  sp.rho_id = t.root_id();
  sp.portion = t.depth_at_stage(3);
  REQUIRE(sp.portion == 1);
  // Nodes themselves are admitted through the view, gate or not.
  REQUIRE(detail::admits_sigma(sp, "0", 3, nullptr));
  REQUIRE(detail::admits_sigma(sp, "1", 3, nullptr));
  // The i-labeled leaf has label predecessor empty, equal to the guess
  // suffix, so its extensions are gated while the wait is designated.
  REQUIRE(detail::admits_sigma(sp, "000", 3, nullptr));     // prefix of wait_first
  REQUIRE(detail::admits_sigma(sp, "0000000", 3, nullptr)); // the wait target itself
  REQUIRE_FALSE(detail::admits_sigma(sp, "011", 3, nullptr));
  REQUIRE_FALSE(detail::admits_sigma(sp, "0110000", 3, nullptr));
  // The top-labeled leaf's predecessor is f, not the suffix: ungated.
  REQUIRE(detail::admits_sigma(sp, "110", 3, nullptr));
  // Off the procedure-built path the gate does not exist at all.
  sp.proc = false;
  REQUIRE(detail::admits_sigma(sp, "011", 3, nullptr));
  sp.proc = true;
  // Once the wait discharges the gate lifts at the emission stage.
  t.levels[1][0].emitted_at = 5;
  REQUIRE_FALSE(detail::admits_sigma(sp, "011", 4, nullptr));
  REQUIRE(detail::admits_sigma(sp, "011", 5, nullptr));
  // Against the suffix f the i-labeled leaf leaves the view and the
  // top-labeled leaf becomes the gated one.
  t.levels[1][0].emitted_at = -1;
  sp.eta_above = Label::Word("f");
  REQUIRE_FALSE(detail::admits_sigma(sp, "0", 3, nullptr));
  REQUIRE_FALSE(detail::admits_sigma(sp, "000", 3, nullptr));
  REQUIRE(detail::admits_sigma(sp, "100", 3, nullptr));  // prefix of the wait pair
  REQUIRE_FALSE(detail::admits_sigma(sp, "110", 3, nullptr));
  // A missing cover node admits nothing.
  sp.rho_id = std::nullopt;
  REQUIRE_FALSE(detail::admits_sigma(sp, "0", 3, nullptr));
}

TEST_CASE("gated and ungated runs differ exactly on incompatible witnesses") {
  LabeledTree t = gate_tree();
  FunctionalTable psi =
      FunctionalTable::from_axioms("psi", {{"011", 0, 9, 1}, {"0000", 1, 4, 1}});
  SimTrees gated;
  gated.trees = {&t};
  gated.procedure_built = {true};
  SimTrees ungated;
  ungated.trees = {&t};
  ungated.procedure_built = {false};
  SimulationLedger lg = sim_run(gated, psi, 0, Label::Word("i"), "", 6);
  SimulationLedger lu = sim_run(ungated, psi, 0, Label::Word("i"), "", 6);
  // Input 0 computes only above "011", which the designated wait on "0"
  // keeps out; input 1 computes above a wait-compatible string.
  REQUIRE(lg.xi.count(0) == 0);
  REQUIRE(lg.xi.count(1) == 1);
  REQUIRE(lg.xi.at(1).value == 4);
  REQUIRE(lg.xi.at(1).witness == "0000");
  REQUIRE(lu.xi.count(0) == 1);
  REQUIRE(lu.xi.at(0).value == 9);
  REQUIRE(lu.xi.at(0).witness == "011");
  REQUIRE(lu.xi.at(1).value == 4);
  // Both agree with the reference transcription.
  require_same(lg.xi, ref::run(gated, psi, 0, Label::Word("i"), "", 6));
  require_same(lu.xi, ref::run(ungated, psi, 0, Label::Word("i"), "", 6));
}

TEST_CASE("values are single-assignment in enumeration order") {
  LabeledTree t = gate_tree();
  t.levels[1][0].ever_waiting = false;  // no gate; both cones open
  FunctionalTable psi =
      FunctionalTable::from_axioms("psi", {{"1", 0, 9, 1}, {"000", 0, 7, 1}, {"1", 5, 8, 1}});
  SimTrees st;
  st.trees = {&t};
  st.procedure_built = {true};
  SimulationLedger led = sim_run(st, psi, 0, Label::Word("i"), "", 8);
  // "1" is enumerated at length 1 before "000" appears at all, and the
  // assignment never moves afterwards.
  REQUIRE(led.xi.at(0).value == 9);
  REQUIRE(led.xi.at(0).witness == "1");
  REQUIRE(led.xi.at(0).stage == 2);
  // Inputs are harvested only below the stage clock.
  REQUIRE(led.xi.at(5).stage == 6);
  require_same(led.xi, ref::run(st, psi, 0, Label::Word("i"), "", 8));
}

TEST_CASE("the production admission agrees with the reference everywhere") {
  Stack stk;
  SimTrees st = sim_trees_for(stk.orc, 1);
  Label eta = sim_guesses_for(stk.orc.path, 1);
  const std::string rho = choose_cover(st, 1).front();
  std::int64_t mismatches = 0;
  for (std::int64_t s : {1, 2, 3, 5, 8, 13, 21, 34, 48}) {
    for (std::int64_t len = 0; len < s && len <= 20; ++len) {
      for (const std::string& sigma : members_of_length(len)) {
        for (std::size_t ep = 0; ep < st.trees.size(); ++ep) {
          detail::StagePortion sp;
          sp.t = st.trees[ep];
          sp.proc = st.procedure_built[ep];
          sp.eta_above = guess_word_above(eta, ep);
          sp.rho_id = sp.t->find(rho);
          sp.portion = sp.t->depth_at_stage(s);
          bool got = detail::admits_sigma(sp, sigma, s, nullptr);
          bool want = ref::admit(*sp.t, sp.proc, sp.eta_above, rho, sigma, s);
          if (got != want) {
            ++mismatches;
            INFO("tree " << ep << " sigma \"" << sigma << "\" stage " << s);
            CHECK(got == want);
          }
        }
      }
    }
  }
  REQUIRE(mismatches == 0);
}

TEST_CASE("a stacked simulation replays the reference loop exactly") {
  Stack stk;
  SimTrees st = sim_trees_for(stk.orc, 1);
  Label eta = sim_guesses_for(stk.orc.path, 1);
  const std::string rho = choose_cover(st, 1).front();
  FunctionalTable psi = FunctionalTable::from_axioms(
      "psi", {{"1", 0, 7, 1}, {"100", 1, 3, 2}, {"1000000", 2, 9, 5}});
  SimulationLedger led = sim_run(st, psi, 1, eta, rho, 48);
  require_same(led.xi, ref::run(st, psi, 1, eta, rho, 48));
  REQUIRE(led.xi.size() == 3);
  REQUIRE(led.xi.at(0).value == 7);
  REQUIRE(led.xi.at(1).value == 3);
  REQUIRE(led.xi.at(2).value == 9);
  REQUIRE(led.stage_cost.size() == 48);
  for (std::int64_t c : led.stage_cost) REQUIRE(c >= 0);
  REQUIRE(led.total_cost() > 0);
  std::string txt = format_simulation(led);
  REQUIRE_THAT(txt, ContainsSubstring("e=1 eta=ii rho=\"1\""));
  REQUIRE_THAT(txt, ContainsSubstring("0 -> 7"));
}

TEST_CASE("watched convergences land within their deadline") {
  Stack stk;
  SimTrees st = sim_trees_for(stk.orc, 1);
  Label eta = sim_guesses_for(stk.orc.path, 1);
  FunctionalTable psi = FunctionalTable::from_axioms(
      "psi", {{"1", 0, 7, 1}, {"100", 1, 3, 2}, {"1000000", 2, 9, 5}});
  SimulationLedger led = sim_run(st, psi, 1, eta, "1", 48);
  SimReport rep = verify_result_watched(led, st, psi, stk.orc.path.a, 48, 2, 2);
  REQUIRE(rep.ok());
  bool watched0 = false, vac2 = false, lab = false;
  for (const auto& c : rep.checks) {
    if (c.name == "watched[0]") {
      watched0 = true;
      REQUIRE_THAT(c.detail, ContainsSubstring("simulated at stage"));
    }
    if (c.name == "watched[2]") {
      vac2 = true;
      // A = "100" never reaches the length-7 use within the budget.
      REQUIRE_THAT(c.detail, ContainsSubstring("vacuous"));
    }
    if (c.name == "a-labeled[1]") lab = true;
  }
  REQUIRE((watched0 && vac2 && lab));
  // A cover the prefix does not extend is refused up front.
  SimulationLedger off = sim_run(st, psi, 1, eta, "111", 8);
  SimReport bad = verify_result_watched(off, st, psi, stk.orc.path.a, 8, 2, 2);
  REQUIRE_FALSE(bad.ok());
  REQUIRE_THAT(bad.checks.front().detail, ContainsSubstring("does not extend"));
}

TEST_CASE("a too-tight deadline is reported, not absorbed") {
  Stack stk;
  SimTrees st = sim_trees_for(stk.orc, 1);
  Label eta = sim_guesses_for(stk.orc.path, 1);
  // Declared input 3 converges along A at stage 1, but harvesting waits for
  // the clock to pass the input, so the simulation lands at stage 4.
  FunctionalTable psi = FunctionalTable::from_axioms("psi", {{"1", 3, 6, 1}});
  SimulationLedger led = sim_run(st, psi, 1, eta, "1", 16);
  REQUIRE(led.xi.at(3).stage == 4);
  SimReport tight = verify_result_watched(led, st, psi, stk.orc.path.a, 16, 1, 1);
  REQUIRE_FALSE(tight.ok());
  SimReport loose = verify_result_watched(led, st, psi, stk.orc.path.a, 16, 4, 1);
  REQUIRE(loose.ok());
}

TEST_CASE("simulated values are witnessed on the tree or flagged") {
  Stack stk;
  SimTrees st = sim_trees_for(stk.orc, 1);
  Label eta = sim_guesses_for(stk.orc.path, 1);
  FunctionalTable psi = FunctionalTable::from_axioms(
      "psi", {{"1", 0, 7, 1}, {"100", 1, 3, 2}});
  SimulationLedger led = sim_run(st, psi, 1, eta, "1", 24);
  const LabeledTree& te = *st.trees[1];
  SimReport rep = verify_on_tree(led, te, psi, 24);
  REQUIRE(rep.ok());
  // A value no tree node computes fails the check.
  led.xi[9] = SimEntry{123, 5, "fabricated"};
  psi = FunctionalTable::from_axioms("psi", {{"1", 0, 7, 1}, {"100", 1, 3, 2}});
  SimReport bad = verify_on_tree(led, te, psi, 24);
  REQUIRE_FALSE(bad.ok());
  // And an empty ledger passes vacuously, saying so.
  SimulationLedger none;
  SimReport vac = verify_on_tree(none, te, psi, 24);
  REQUIRE(vac.ok());
  REQUIRE_THAT(vac.checks.front().detail, ContainsSubstring("vacuous"));
}

TEST_CASE("agreement with the reference function is checked value by value") {
  SimulationLedger led;
  led.xi[0] = SimEntry{7, 2, "1"};
  led.xi[4] = SimEntry{5, 3, "10"};
  PartialFunctionTable good{"r", {{0, 7}, {4, 5}}};
  PartialFunctionTable half{"r", {{0, 7}, {4, 6}}};
  PartialFunctionTable off{"r", {{9, 1}}};
  REQUIRE(verify_low_for_speed(led, good).ok());
  SimReport bad = verify_low_for_speed(led, half);
  REQUIRE_FALSE(bad.ok());
  SimReport vac = verify_low_for_speed(led, off);
  REQUIRE(vac.ok());
  REQUIRE_THAT(vac.checks.front().detail, ContainsSubstring("vacuous"));
}

TEST_CASE("the cubic cost bound compares against the recorded curve") {
  SimulationLedger led;
  led.stage_cost = {5, 100};
  REQUIRE_FALSE(verify_cost_bound(led, 1).ok());
  SimReport ok = verify_cost_bound(led, 13);
  REQUIRE(ok.ok());
  REQUIRE_THAT(ok.checks.front().detail, ContainsSubstring("worst stage 2 cost 100"));
  Stack stk;
  SimTrees st = sim_trees_for(stk.orc, 1);
  FunctionalTable psi = FunctionalTable::from_axioms("psi", {{"1", 0, 7, 1}});
  SimulationLedger real = sim_run(st, psi, 1, sim_guesses_for(stk.orc.path, 1), "1", 32);
  REQUIRE(verify_cost_bound(real, 64).ok());
}
