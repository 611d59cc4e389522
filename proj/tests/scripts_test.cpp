#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ktlab/coding.hpp"
#include "ktlab/diagonal.hpp"
#include "ktlab/scripts.hpp"
#include "ktlab/systems.hpp"

using namespace ktlab;

namespace {

Formula agent_all() { return Formula::atom(PredSym::Ag, {Term::var(0)}); }

int uses(const ScriptResult& r, const std::string& key) {
  auto it = r.rule_uses.find(key);
  return it == r.rule_uses.end() ? 0 : it->second;
}

int uses(const CheckResult& c, const std::string& key) {
  auto it = c.rule_uses.find(key);
  return it == c.rule_uses.end() ? 0 : it->second;
}

}  // namespace

TEST_CASE("unary collapse over the two truth-of-knowledge schemata") {
  TheoremDB db;
  ScriptResult r = script_kaplan_montague(db);
  INFO(r.detail);
  REQUIRE(r.accepted);
  CHECK(r.conclusion == falsum());
  // No necessitation anywhere: the known-knowledge schema replaces it.
  CHECK(uses(r, "nec_k1") == 0);
  CHECK(uses(r, "nec_t") == 0);
  CHECK(uses(r, "schema") >= 3);

  // The same derivation is rejected by the factive knowledge system at the
  // first schema citation; everything before that step is system-neutral.
  CheckResult replay = replay_final_against(r, "kt");
  CHECK_FALSE(replay.accepted);
  CHECK(replay.failed_step == 4);
  CHECK(replay.reason.find("schema") != std::string::npos);
}

TEST_CASE("unary collapse via necessitation on theorem lines") {
  TheoremDB db;
  ScriptResult r = script_montague(db);
  INFO(r.detail);
  REQUIRE(r.accepted);
  CHECK(r.conclusion == falsum());
  CHECK(uses(r, "nec_k1") == 2);
  CHECK(uses(r, "nec_t") == 0);

  // Necessitation of a local assumption is rejected: the assumption taints
  // its consequences and the rule demands an untainted line.
  FixedPointResult fp = unknown_sentence();
  Proof bad;
  bad.system = "montague";
  Justification jh;
  jh.kind = JKind::Hyp;
  bad.steps.push_back({fp.theta, jh});
  Justification jn;
  jn.kind = JKind::NecK1;
  jn.lines = {1};
  bad.steps.push_back({nec_k1_formula(fp.theta), jn});
  TheoremDB scratch;
  CheckResult c = check_proof(bad, scratch);
  CHECK_FALSE(c.accepted);
  CHECK(c.failed_step == 2);
}

TEST_CASE("positive introspection collapses the factive system") {
  TheoremDB db;
  ScriptResult r = script_u4_inconsistency(db);
  INFO(r.detail);
  REQUIRE(r.accepted);
  CHECK(r.conclusion == falsum());

  // Without the introspection axiom the proof dies exactly there.
  CheckResult replay = replay_final_against(r, "kt");
  CHECK_FALSE(replay.accepted);
  CHECK(replay.failed_step == 2);
  CHECK(replay.reason.find("u4") != std::string::npos);
}

TEST_CASE("truth biconditional transfers to the knowledge atoms") {
  TheoremDB db;
  Formula zz = Formula::eq(Term::zero(), Term::zero());
  ScriptResult r = script_tb_transfer(db, zz, "kt_ia");
  INFO(r.detail);
  REQUIRE(r.accepted);

  // Conclusion: one guarded universal over agents, with a biconditional
  // between a truth atom at a coded knowledge atom and the knowledge atom.
  REQUIRE(r.conclusion.kind() == FormulaKind::All);
  Formula body = r.conclusion.sub()[0];
  REQUIRE(body.kind() == FormulaKind::Imp);
  CHECK(body.sub()[0] == Formula::atom(PredSym::Ag, {Term::var(0)}));

  // The interaction axiom is the first step the base factive system lacks.
  CheckResult replay = replay_final_against(r, "kt");
  CHECK_FALSE(replay.accepted);
  CHECK(replay.failed_step == 2);
  CHECK(replay.reason.find("ia") != std::string::npos);

  // Open parameters are refused.
  ScriptResult bad = script_tb_transfer(db, Formula::eq(Term::var(3),
                                                        Term::zero()),
                                        "kt_ia");
  CHECK_FALSE(bad.accepted);
}

TEST_CASE("truth biconditional transfer iterates through a proved agent") {
  TheoremDB db;
  ScriptResult r = script_tb_transfer_nested(db);
  INFO(r.detail);
  REQUIRE(r.accepted);
  CHECK(registry().find("kt_ia_demo") != nullptr);
  CHECK(registry().extends("kt_ia_demo", "kt_ia"));
  // Final conclusion speaks about knowledge of a knowledge atom.
  CHECK(r.conclusion.kind() == FormulaKind::All);

  // Running it twice is idempotent over the registry.
  TheoremDB db2;
  ScriptResult r2 = script_tb_transfer_nested(db2);
  CHECK(r2.accepted);
  CHECK(to_string(r2.conclusion) == to_string(r.conclusion));
}

TEST_CASE("operator implication closes by self-certification") {
  TheoremDB db;
  Formula A = agent_all();
  CkEquivalence ck = make_ck(A);
  Formula fwd = guard_l0(ck.u, Formula::imp(ck.ck, ck.psi));
  Formula bwd = guard_l0(ck.u, Formula::imp(ck.psi, ck.ck));
  ScriptResult r = script_implied_ck(db, A, ck.ck, ck.ck, fwd, bwd);
  INFO(r.detail);
  REQUIRE(r.accepted);
  CHECK(r.conclusion == guard_l0(ck.u, Formula::imp(ck.ck, ck.ck)));
  CHECK(uses(r.checks.back(), "loeb") == 1);

  // Unknown hypotheses are refused, not trusted.
  TheoremDB db2;
  Formula junk = guard_l0(ck.u, Formula::imp(ck.ck, falsum()));
  ScriptResult bad = script_implied_ck(db2, A, ck.ck, ck.ck, junk, bwd);
  CHECK_FALSE(bad.accepted);
  CHECK(bad.detail.find("hypothesis") != std::string::npos);
}

TEST_CASE("any two unfolding operators for one filter agree") {
  TheoremDB db;
  ScriptResult r = script_unique_ck(db, agent_all());
  INFO(r.detail);
  REQUIRE(r.accepted);
  CHECK(uses(r, "loeb") == 2);
  REQUIRE(r.conclusion.kind() == FormulaKind::All);
  // Body: code guard implying a biconditional between the two operators.
  Formula inner = r.conclusion.sub()[0].sub()[1];
  CHECK(inner.kind() == FormulaKind::And);
}

TEST_CASE("common knowledge distributes over conjunction") {
  TheoremDB db;
  Formula phi = Formula::eq(Term::zero(), Term::zero());
  Formula psi = Formula::eq(Term::succ(Term::zero()),
                            Term::succ(Term::zero()));
  ScriptResult r = script_conj_ck(db, agent_all(), phi, psi);
  INFO(r.detail);
  REQUIRE(r.accepted);
  CHECK(uses(r.checks.back(), "loeb") == 2);

  CkEquivalence ck = make_ck(agent_all());
  Formula chi = Formula::land(phi, psi);
  Formula expected = Formula::iff(
      Formula::land(subst(ck.ck, ck.u, gq(phi)),
                    subst(ck.ck, ck.u, gq(psi))),
      subst(ck.ck, ck.u, gq(chi)));
  CHECK(r.conclusion == expected);
}

TEST_CASE("relativized transfer routes the code through the identity") {
  TheoremDB db;
  Formula every = Formula::eq(Term::var(0), Term::var(0));
  Formula A = every, B = agent_all();
  CkEquivalence cka = make_ck(A);
  CkEquivalence ckb = make_ck(B);
  ScriptResult r = script_general_ck(db, A, B, cka.ck, ckb.ck);
  INFO(r.detail);
  REQUIRE(r.accepted);

  Term idy = Term::dot(DotFn::Id, {Term::var(cka.u)});
  Formula expected = guard_l0(
      cka.u, Formula::imp(cka.ck, subst(ckb.ck, ckb.u, idy)));
  CHECK(r.conclusion == expected);

  // Operators other than the filters' own unfoldings are refused.
  TheoremDB db2;
  ScriptResult bad = script_general_ck(db2, A, B, ckb.ck, cka.ck);
  CHECK_FALSE(bad.accepted);
}

TEST_CASE("shrinking the filter grows common knowledge") {
  TheoremDB db;
  Formula every = Formula::eq(Term::var(0), Term::var(0));
  ScriptResult r = script_monotone_ck(db, every, agent_all());
  INFO(r.detail);
  REQUIRE(r.accepted);
  CHECK(uses(r, "loeb") == 1);
}

TEST_CASE("the headline closure facts for common knowledge") {
  TheoremDB db;
  ScriptResult r = script_ck_main(db, agent_all());
  INFO(r.detail);
  REQUIRE(r.accepted);

  // The reflection hypothesis internalizes provability exactly once, and the
  // certified implication uses the self-certification rule exactly once.
  int sigma_proofs = 0, loeb_proofs = 0;
  for (const CheckResult& c : r.checks) {
    if (uses(c, "pr_sigma") > 0) {
      ++sigma_proofs;
      CHECK(uses(c, "pr_sigma") == 1);
      CHECK(uses(c, "loeb") == 0);
    }
    if (uses(c, "loeb") > 0) {
      ++loeb_proofs;
      CHECK(uses(c, "loeb") == 1);
    }
  }
  CHECK(sigma_proofs == 1);
  CHECK(loeb_proofs == 2);  // the ground closure instance and the main fact

  // Worked corollary: the named equation is commonly known.
  CkEquivalence ck = make_ck(agent_all());
  Formula zz = Formula::eq(Term::zero(), Term::zero());
  CHECK(r.conclusion == subst(ck.ck, ck.u, gq(zz)));
}

TEST_CASE("sampled instances of the term-value axioms") {
  TheoremDB db;
  ScriptResult r = script_kt_proves_befs_instances(db, 20);
  INFO(r.detail);
  REQUIRE(r.accepted);
  int same = 0, distinct = 0, replays = 0;
  for (const Proof& p : r.proofs) {
    if (p.system != "kt" && p.system != "kt_ubf_ia" &&
        p.system != "befs_v_rdcb")
      continue;
    if (p.system == "kt_ubf_ia" || p.system == "befs_v_rdcb") {
      ++replays;
      continue;
    }
    const Formula& f = p.steps.back().formula;
    REQUIRE(f.kind() == FormulaKind::All);
    Formula core = f.sub()[0].sub()[1];  // strip the agent guard
    REQUIRE(core.kind() == FormulaKind::Imp);
    if (core.sub()[0].kind() == FormulaKind::Not)
      ++distinct;
    else
      ++same;
  }
  CHECK(same >= 20);
  CHECK(distinct >= 20);
  CHECK(replays == 2);
}

TEST_CASE("scripts are deterministic") {
  TheoremDB a, b;
  ScriptResult ra = script_kaplan_montague(a);
  ScriptResult rb = script_kaplan_montague(b);
  REQUIRE(ra.accepted);
  REQUIRE(rb.accepted);
  REQUIRE(ra.proofs.size() == rb.proofs.size());
  for (std::size_t i = 0; i < ra.proofs.size(); ++i)
    CHECK(to_string(ra.proofs[i]) == to_string(rb.proofs[i]));
}

TEST_CASE("the factive system structurally extends the base epistemic one") {
  CHECK(registry().extends("kt", "dcb"));
  CHECK_FALSE(registry().extends("dcb", "kt"));
}

TEST_CASE("the full battery runs green on one shared database") {
  TheoremDB db;
  std::vector<ScriptResult> rs = run_all_scripts(db);
  CHECK(rs.size() == 12);
  for (const ScriptResult& r : rs) {
    INFO(r.id << ": " << r.detail);
    CHECK(r.accepted);
  }
  std::string table = format_script_table(rs);
  CHECK(table.find("PASS") != std::string::npos);
  CHECK(table.find("FAIL") == std::string::npos);
}
