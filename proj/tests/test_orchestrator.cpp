// True-path resolution: relabeled restrictions, per-slot resolvers, the
// sequential A walk, and the post-resolution case checks.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <string>
#include <vector>

#include "lowspeed/base_tree.hpp"
#include "lowspeed/orchestrator.hpp"

using namespace lowspeed;
using Catch::Matchers::ContainsSubstring;

namespace {

// Mixed-label host exercising every relabel rule: admitted tops, admitted
// f-words, rejected at-or-below-f labels, and a cone cut off mid-tree.
LabeledTree mixed_host() {
  LabeledTree t;
  t.set_root("", 1, Label::Top(), 0);
  std::vector<LabeledTree::ChildSpec> l1;
  l1.push_back({0, "00", 2, Label::Top(), NodeKind::Main});
  l1.push_back({0, "11", 2, Label::Top(), NodeKind::Main});
  l1.push_back({0, "01", 2, Label::Word("ff"), NodeKind::Secondary});
  l1.push_back({0, "10", 1, Label::Word("i"), NodeKind::Secondary});
  t.emit_level(std::move(l1), 4);
  std::vector<LabeledTree::ChildSpec> l2;
  l2.push_back({0, "0000", 2, Label::Top(), NodeKind::Main});
  l2.push_back({0, "0011", 2, Label::Word("ff"), NodeKind::Secondary});
  l2.push_back({1, "1100", 3, Label::Top(), NodeKind::Main});
  l2.push_back({1, "1111", 2, Label::Top(), NodeKind::Main});
  l2.push_back({2, "0100", 2, Label::Word("fi"), NodeKind::Main});
  l2.push_back({2, "0111", 2, Label::Word("f"), NodeKind::Main});
  t.emit_level(std::move(l2), 9);
  return t;
}

FunctionalTable stuck_phi() {
  return FunctionalTable::from_axioms(
      "phi", {{"0", 0, 5, 1}, {"100", 0, 0, 3}, {"111", 0, 1, 3}});
}

}  // namespace

TEST_CASE("relabeling keeps the above-f cone and shifts scopes and labels") {
  LabeledTree host = mixed_host();
  LabeledTree v = relabel_finitary(host, "");
  REQUIRE(v.provenance == "view");
  REQUIRE(v.depth() == 2);
  const auto& r = v.node(v.root_id());
  REQUIRE((r.value == "" && r.scope == 1 && r.label.top));
  // Level 1: "10" is labeled i, not above f, and drops out.
  REQUIRE(v.levels[1].size() == 3);
  auto expect = [&](const std::string& value, int scope, const std::string& label,
                    NodeKind kind) {
    auto id = v.find(value);
    REQUIRE(id.has_value());
    const auto& n = v.node(*id);
    REQUIRE(n.scope == scope);
    REQUIRE(format_label(n.label) == label);
    REQUIRE(n.kind == kind);
  };
  expect("00", 1, "T", NodeKind::Main);
  expect("11", 1, "T", NodeKind::Main);
  expect("01", 1, "f", NodeKind::Secondary);  // ff loses its leading f
  REQUIRE_FALSE(v.find("10").has_value());
  // Level 2: "0111" sits at f and is rejected; the rest shift down.
  REQUIRE(v.levels[2].size() == 5);
  expect("0000", 1, "T", NodeKind::Main);
  expect("0011", 1, "f", NodeKind::Secondary);
  expect("1100", 2, "T", NodeKind::Main);
  expect("1111", 1, "T", NodeKind::Main);
  expect("0100", 1, "i", NodeKind::Main);
  REQUIRE_FALSE(v.find("0111").has_value());
  // Emission stages carry over from the host levels.
  REQUIRE(v.level_stage == std::vector<std::int64_t>{0, 4, 9});
}

TEST_CASE("relabeling at an inner node keeps only its cone") {
  LabeledTree host = mixed_host();
  LabeledTree v = relabel_finitary(host, "00");
  REQUIRE(v.depth() == 1);
  REQUIRE(v.node(v.root_id()).value == "00");
  REQUIRE(v.level_stage == std::vector<std::int64_t>{4, 9});
  REQUIRE(v.levels[1].size() == 2);
  REQUIRE(v.find("0000").has_value());
  REQUIRE(v.find("0011").has_value());
}

TEST_CASE("relabel roots must be top-labeled tree nodes") {
  LabeledTree host = mixed_host();
  REQUIRE_THROWS_WITH(relabel_finitary(host, "0x"), ContainsSubstring("not on the tree"));
  REQUIRE_THROWS_WITH(relabel_finitary(host, "10"), ContainsSubstring("not labeled top"));
}

TEST_CASE("comparison slots prefer top-labeled disagreements") {
  LabeledTree host = mixed_host();
  FunctionalTable psi =
      FunctionalTable::from_axioms("psi", {{"01", 0, 5, 1}, {"1100", 0, 6, 1}});
  PartialFunctionTable r7{"r7", {{0, 7}}};
  PartialFunctionTable r6{"r6", {{0, 6}}};
  PartialFunctionTable roff{"roff", {{1, 9}}};
  // Both cones disagree with r7; the top-labeled "1100" wins over the
  // shallower but non-top "01".
  Resolution res = resolve_L(host, psi, r7, 40);
  REQUIRE(res.resolved);
  REQUIRE(res.outcome == Outcome::Node("1100"));
  REQUIRE_THAT(res.detail, ContainsSubstring("functional gives 6, reference gives 7"));
  // With r6 the top cone agrees, so the second pass surfaces "01".
  res = resolve_L(host, psi, r6, 40);
  REQUIRE(res.outcome == Outcome::Node("01"));
  // A reference undefined on every compared input never disagrees.
  res = resolve_L(host, psi, roff, 40);
  REQUIRE(res.outcome == Outcome::Infty());
  REQUIRE_THAT(res.detail, ContainsSubstring("no disagreement"));
}

TEST_CASE("avoidance slots pick the main child off the set") {
  LabeledTree host = mixed_host();
  StagedCeSet empty{"w", {}};
  Resolution res = resolve_P(host, empty, "", 40);
  REQUIRE(res.outcome == Outcome::Node("11"));  // "00" prefixes 000...
  StagedCeSet both{"w", {{0, 3}, {1, 3}}};
  res = resolve_P(host, both, "", 40);
  REQUIRE(res.outcome == Outcome::Node("00"));  // characteristic now starts 11
  // Before the enumeration stage the set is still empty.
  res = resolve_P(host, both, "", 2);
  REQUIRE(res.outcome == Outcome::Node("11"));
  // Secondaries are not eligible; only the two mains were weighed.
  REQUIRE_THAT(res.detail, ContainsSubstring("\"11\""));
}

TEST_CASE("avoidance needs two main children on the built portion") {
  LabeledTree host = mixed_host();
  StagedCeSet empty{"w", {}};
  Resolution res = resolve_P(host, empty, "0000", 40);
  REQUIRE_FALSE(res.resolved);
  REQUIRE_THAT(res.detail, ContainsSubstring("need 2"));
  REQUIRE_THROWS_AS(resolve_P(host, empty, "banana", 40), std::logic_error);
}

TEST_CASE("a growing splitting run resolves infinitary") {
  FunctionalTable phi = FunctionalTable::from_block_encode("phi", BlockEncode{6, {}});
  LabeledTree base = as_admissible_root(14);
  ProcedureState ps = run_procedure(0, phi, base, "", Schedule::compact(), 40);
  Resolution res = resolve_M(ps, base, "", phi, 40);
  REQUIRE(res.resolved);
  REQUIRE(res.outcome == Outcome::Infty());
  REQUIRE_THAT(res.detail, ContainsSubstring("depth 5"));
}

TEST_CASE("no growth without a stuck certificate stays unresolved") {
  FunctionalTable phi = FunctionalTable::from_block_encode("phi", BlockEncode{6, {}});
  LabeledTree base = as_admissible_root(14);
  ProcedureState ps = run_procedure(0, phi, base, "", Schedule::compact(), 0);
  Resolution res = resolve_M(ps, base, "", phi, 0);
  REQUIRE_FALSE(res.resolved);
  REQUIRE_THAT(res.detail, ContainsSubstring("not provably stuck"));
}

TEST_CASE("a stuck run certifies the all-agree failure case") {
  FunctionalTable phi = stuck_phi();
  LabeledTree base = as_admissible_root(14);
  ProcedureState ps = run_procedure(0, phi, base, "", Schedule::compact(), 40);
  REQUIRE(ps.stuck());
  Resolution res = resolve_M(ps, base, "", phi, 40);
  REQUIRE(res.resolved);
  // The root sees 5 against 0, so it cannot certify; "0" is the least
  // candidate whose whole view computes one constant.
  REQUIRE(res.outcome == Outcome::Node("0"));
  REQUIRE_THAT(res.detail, ContainsSubstring("all defined values agree"));
  // The witness scan anchors at A, which must be a host node.
  REQUIRE_THROWS_AS(resolve_M(ps, base, "banana", phi, 40), std::logic_error);
}

TEST_CASE("a stuck run certifies the divergence failure case") {
  FunctionalTable phi = stuck_phi();
  LabeledTree base = as_admissible_root(14);
  ProcedureState host = run_procedure(0, phi, base, "", Schedule::compact(), 40);
  // Steps at 4 delay the split past the stuck host's deepest cut, so the
  // wait can never discharge and the stuckness propagates.
  FunctionalTable phi2 = FunctionalTable::from_axioms(
      "phi2", {{"000", 0, 1, 4}, {"100", 0, 2, 4}, {"1", 1, 9, 1}});
  ProcedureState inner = run_procedure(1, phi2, host.out, "", Schedule::compact(), 40);
  REQUIRE(inner.stuck());
  REQUIRE(inner.out.status_stage == host.out.status_stage);
  Resolution res = resolve_M(inner, host.out, "", phi2, 40);
  REQUIRE(res.resolved);
  // The root's view still sees 1 against 2; above "000" input 1 has no
  // axiom anywhere in the view.
  REQUIRE(res.outcome == Outcome::Node("000"));
  REQUIRE_THAT(res.detail, ContainsSubstring("input 1 diverges everywhere"));
}

TEST_CASE("requirement lists are validated against the slot rotation") {
  FunctionalTable phi = FunctionalTable::from_block_encode("phi", BlockEncode{4, {}});
  PartialFunctionTable r{"r", {{0, 7}}};
  StagedCeSet w{"w", {}};
  REQUIRE_THROWS_WITH(validate_requirements({Requirement::L(phi, r)}),
                      ContainsSubstring("rotation"));
  Requirement bad = Requirement::M(phi);
  bad.psi = &phi;
  REQUIRE_THROWS_WITH(validate_requirements({bad}),
                      ContainsSubstring("M takes exactly a functional"));
  Requirement badp = Requirement::P(w);
  badp.r = &r;
  REQUIRE_THROWS_WITH(validate_requirements({Requirement::M(phi),
                                             Requirement::L(phi, r), badp}),
                      ContainsSubstring("P takes exactly a staged set"));
}

TEST_CASE("outcome tokens and path keys") {
  REQUIRE(outcome_token(ReqKind::M, Outcome::Infty()) == "Mi");
  REQUIRE(outcome_token(ReqKind::M, Outcome::Node("01")) == "Mf:01");
  REQUIRE(outcome_token(ReqKind::L, Outcome::Infty()) == "Li");
  REQUIRE(outcome_token(ReqKind::L, Outcome::Node("0")) == "Lf:0");
  REQUIRE(outcome_token(ReqKind::P, Outcome::Node("1")) == "P:1");
  OutcomeString pi;
  pi.push(Outcome::Infty());
  pi.push(Outcome::Infty());
  pi.push(Outcome::Node("1"));
  REQUIRE(path_key(pi) == "Mi|Li|P:1");
}

TEST_CASE("a full walk over one growing requirement round") {
  FunctionalTable phi = FunctionalTable::from_block_encode("phi", BlockEncode{6, {}});
  FunctionalTable psi = FunctionalTable::from_axioms("psi", {{"", 0, 7, 1}});
  PartialFunctionTable r{"r", {{0, 7}}};
  StagedCeSet w{"w", {}};
  std::vector<Requirement> reqs{Requirement::M(phi), Requirement::L(psi, r),
                                Requirement::P(w)};
  BuildOptions opt;
  opt.schedule = Schedule::compact();
  opt.stage_budget = 40;
  Orchestration orc = build_A(reqs, opt);
  REQUIRE(orc.path.complete);
  REQUIRE(orc.path.a == "1");
  REQUIRE(path_key(orc.path.pi) == "Mi|Li|P:1");
  REQUIRE(orc.path.steps.size() == 3);
  REQUIRE(orc.path.steps[0].tree_key == "Mi");
  REQUIRE(orc.path.steps[1].tree_key == "Mi");
  REQUIRE(orc.path.steps[2].a_before == "");
  REQUIRE(orc.path.steps[2].a_after == "1");
  for (const auto& st : orc.path.steps) REQUIRE(st.cost > 0);
  // Family: the base plus the one procedure tree.
  REQUIRE(orc.family.entries().size() == 2);
  REQUIRE(orc.family.entry("Mi").e == 0);
  REQUIRE(orc.family.entry("Mi").host_key == "");
  REQUIRE(orc.family.entry("Mi").tree->provenance == "procedure");
  REQUIRE_THROWS_AS(orc.family.entry("nope"), std::out_of_range);
  std::string txt = format_true_path(orc.path);
  REQUIRE_THAT(txt, ContainsSubstring("M_0: infty"));
  REQUIRE_THAT(txt, ContainsSubstring("complete; A = \"1\""));
}

TEST_CASE("a stuck round walks through the witness view") {
  FunctionalTable phi = stuck_phi();
  FunctionalTable psi = FunctionalTable::from_axioms("psi", {{"0", 0, 4, 1}});
  PartialFunctionTable r{"r", {{0, 4}}};
  StagedCeSet w{"w", {{0, 5}}};
  std::vector<Requirement> reqs{Requirement::M(phi), Requirement::L(psi, r),
                                Requirement::P(w)};
  BuildOptions opt;
  opt.schedule = Schedule::compact();
  opt.stage_budget = 40;
  Orchestration orc = build_A(reqs, opt);
  REQUIRE(orc.path.complete);
  REQUIRE(path_key(orc.path.pi) == "Mf:0|Li|P:000");
  REQUIRE(orc.path.a == "000");
  // The stuck procedure tree is kept alongside the view it led to.
  REQUIRE(orc.family.entries().size() == 3);
  REQUIRE(orc.family.entry("Mi").tree->status == TreeStatus::Stuck);
  const FamilyEntry& view = orc.family.entry("Mf:0");
  REQUIRE(view.host_key == "");
  REQUIRE(view.root_value == "0");
  REQUIRE(view.tree->provenance == "view");
  REQUIRE(view.tree->node(view.tree->root_id()).value == "0");
  // L and P act on the view: P chose among the view root's mains.
  REQUIRE(orc.path.steps[2].tree_key == "Mf:0");
  REQUIRE(view.tree->find("000").has_value());
}

TEST_CASE("an unresolvable slot stops the walk explicitly") {
  FunctionalTable phi = FunctionalTable::from_block_encode("phi", BlockEncode{6, {}});
  BuildOptions opt;
  opt.schedule = Schedule::compact();
  opt.stage_budget = 0;
  Orchestration orc = build_A({Requirement::M(phi)}, opt);
  REQUIRE_FALSE(orc.path.complete);
  REQUIRE(orc.path.steps.size() == 1);
  REQUIRE_FALSE(orc.path.steps[0].resolved);
  REQUIRE(orc.path.pi.size() == 0);
  REQUIRE_THAT(format_true_path(orc.path), ContainsSubstring("stopped"));
}

TEST_CASE("trees are cached by path key and shared with their procedures") {
  FunctionalTable phi = FunctionalTable::from_block_encode("phi", BlockEncode{6, {}});
  TreeFamily fam(Schedule::compact(), StripConvention::Literal, 40);
  FamilyEntry& a = fam.ensure_procedure("Mi", 0, phi, "", "");
  FamilyEntry& b = fam.ensure_procedure("Mi", 0, phi, "", "");
  REQUIRE(&a == &b);
  REQUIRE(fam.entries().size() == 2);
  REQUIRE(a.tree.get() == &a.proc->out);  // the tree aliases the run's output
}

TEST_CASE("the case checks pass on honest walks and catch tampering") {
  FunctionalTable phi = stuck_phi();
  FunctionalTable psi = FunctionalTable::from_axioms("psi", {{"0", 0, 4, 1}});
  PartialFunctionTable r{"r", {{0, 4}}};
  StagedCeSet w{"w", {{0, 5}}};
  std::vector<Requirement> reqs{Requirement::M(phi), Requirement::L(psi, r),
                                Requirement::P(w)};
  BuildOptions opt;
  opt.schedule = Schedule::compact();
  opt.stage_budget = 40;
  Orchestration orc = build_A(reqs, opt);
  CaseReport rep = check_minimality_cases(orc, reqs, opt.stage_budget);
  REQUIRE(rep.ok());
  std::vector<std::string> names;
  for (const auto& c : rep.checks) names.push_back(c.name);
  for (const char* want : {"a-monotone[M0]", "a-on-tree[M0]", "root-is-a[M0]",
                           "admissible[M0]", "finitary-case[M0]", "a-monotone[P0]"}) {
    INFO(want);
    REQUIRE(std::find(names.begin(), names.end(), want) != names.end());
  }
  // A tampered witness no longer certifies and the root check notices too.
  orc.path.steps[0].outcome = Outcome::Node("1");
  CaseReport bad = check_minimality_cases(orc, reqs, opt.stage_budget);
  REQUIRE_FALSE(bad.ok());
  bool root_fail = false, cert_fail = false;
  for (const auto& c : bad.checks) {
    if (c.name == "root-is-a[M0]" && !c.pass) root_fail = true;
    if (c.name == "finitary-case[M0]" && !c.pass) cert_fail = true;
  }
  REQUIRE(root_fail);
  REQUIRE(cert_fail);
  REQUIRE_THAT(format_case_report(bad), ContainsSubstring("FAIL"));
}

TEST_CASE("the splitting case check is exercised non-vacuously") {
  FunctionalTable phi = FunctionalTable::from_block_encode("phi", BlockEncode{6, {}});
  FunctionalTable psi = FunctionalTable::from_axioms("psi", {{"", 0, 7, 1}});
  PartialFunctionTable r{"r", {{0, 7}}};
  StagedCeSet w{"w", {}};
  std::vector<Requirement> reqs{Requirement::M(phi), Requirement::L(psi, r),
                                Requirement::P(w)};
  BuildOptions opt;
  opt.schedule = Schedule::compact();
  opt.stage_budget = 40;
  Orchestration orc = build_A(reqs, opt);
  CaseReport rep = check_minimality_cases(orc, reqs, opt.stage_budget);
  REQUIRE(rep.ok());
  for (const auto& c : rep.checks)
    if (c.name == "splitting[M0]") {
      REQUIRE_THAT(c.detail, ContainsSubstring("pairwise split"));
      REQUIRE_THAT(c.detail, !ContainsSubstring("vacuous"));
    }
}
