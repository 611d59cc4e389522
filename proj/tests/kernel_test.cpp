#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ktlab/coding.hpp"
#include "ktlab/kernel.hpp"
#include "ktlab/proofbuilder.hpp"
#include "ktlab/systems.hpp"

#include <string>
#include <vector>

using namespace ktlab;

namespace {

Formula pf(const std::string& s) { return parse_formula(s); }

Justification j_axiom(const std::string& name) {
  Justification j;
  j.kind = JKind::Axiom;
  j.axiom_name = name;
  return j;
}

Justification j_compute() {
  Justification j;
  j.kind = JKind::Compute;
  return j;
}

Justification j_taut(std::vector<int> lines = {}) {
  Justification j;
  j.kind = JKind::Taut;
  j.lines = std::move(lines);
  return j;
}

Justification j_hyp() {
  Justification j;
  j.kind = JKind::Hyp;
  return j;
}

Justification j_mp(int imp, int ant) {
  Justification j;
  j.kind = JKind::Mp;
  j.lines = {imp, ant};
  return j;
}

Justification j_ug(int line, Var v) {
  Justification j;
  j.kind = JKind::Ug;
  j.lines = {line};
  j.var = v;
  return j;
}

Justification j_line(JKind k, int line) {
  Justification j;
  j.kind = k;
  j.lines = {line};
  return j;
}

Justification j_syntax_fact() {
  Justification j;
  j.kind = JKind::SyntaxFact;
  return j;
}

Justification j_fol(FolRule r, std::vector<int> lines) {
  Justification j;
  j.kind = JKind::Fol;
  j.fol = r;
  j.lines = std::move(lines);
  return j;
}

Justification j_ui(int line, Term t) {
  Justification j = j_fol(FolRule::Ui, {line});
  j.term = std::move(t);
  return j;
}

Justification j_ui_imp(Term t) {
  Justification j = j_fol(FolRule::UiImp, {});
  j.term = std::move(t);
  return j;
}

Justification j_d1(const std::string& system, Formula f) {
  Justification j;
  j.kind = JKind::D1;
  j.system = system;
  j.f1 = std::move(f);
  return j;
}

Justification j_theorem(const std::string& system, Formula f) {
  Justification j;
  j.kind = JKind::Theorem;
  j.system = system;
  j.f1 = std::move(f);
  return j;
}

Proof mk(const std::string& system,
         std::vector<std::pair<Formula, Justification>> steps) {
  Proof p;
  p.system = system;
  for (auto& [f, j] : steps) p.steps.push_back(Step{std::move(f), std::move(j)});
  return p;
}

}  // namespace

TEST_CASE("two-step truth necessitation is accepted where the rule exists") {
  TheoremDB db;
  Proof p = parse_proof(
      "system fs\n"
      "# a ground fact, then its quotation under T\n"
      "1 | 0=0 | compute\n"
      "2 | T(quote(0=0)) | nec_t 1\n");
  CheckResult r = check_proof(p, db);
  CHECK(r.accepted);
  CHECK(r.nec_uses == 1);
  CHECK(r.rule_uses["nec_t"] == 1);
  CHECK(db.contains("fs", pf("T(quote(0=0))")));

  p.system = "uct";
  CheckResult r2 = check_proof(p, db);
  CHECK_FALSE(r2.accepted);
  CHECK(r2.failed_step == 2);
  CHECK(r2.reason.find("nec_t") != std::string::npos);
}

TEST_CASE("necessitation budget of the finite approximations") {
  TheoremDB db;
  Proof p = parse_proof(
      "system befs2\n"
      "1 | 0=0 | compute\n"
      "2 | T(quote(0=0)) | nec_t 1\n"
      "3 | 1=1 | compute\n"
      "4 | T(quote(1=1)) | nec_t 3\n");
  CheckResult r = check_proof(p, db);
  CHECK_FALSE(r.accepted);
  CHECK(r.failed_step == 4);
  CHECK(r.reason.find("budget") != std::string::npos);

  // One use fits befs2's budget.
  Proof p1 = p;
  p1.steps.resize(2);
  CHECK(check_proof(p1, db).accepted);

  // A rejected proof must leave no trace in the database.
  CHECK_FALSE(db.contains("befs2", pf("T(quote(1=1))")));

  // The same proof is accepted one budget level up.
  p.system = "befs3";
  CheckResult r3 = check_proof(p, db);
  CHECK(r3.accepted);
  CHECK(r3.nec_uses == 2);
}

TEST_CASE("necessitation on a hypothesis is rejected") {
  TheoremDB db;
  Proof p = mk("fs", {{pf("U(0)"), j_hyp()},
                      {nec_t_formula(pf("U(0)")), j_line(JKind::NecT, 1)}});
  CheckResult r = check_proof(p, db);
  CHECK_FALSE(r.accepted);
  CHECK(r.failed_step == 2);
  CHECK(r.reason.find("hypothesis") != std::string::npos);

  // A proof may use hypotheses internally but its conclusion must not rest
  // on one.
  Proof p2 = mk("fs", {{pf("U(0)"), j_hyp()}});
  CheckResult r2 = check_proof(p2, db);
  CHECK_FALSE(r2.accepted);
  CHECK(r2.reason.find("conclusion") != std::string::npos);

  Proof p3 = mk("fs", {{pf("U(0)"), j_hyp()},
                       {pf("U(0) | !U(1)"), j_taut({1})},
                       {pf("0=0"), j_compute()}});
  CHECK(check_proof(p3, db).accepted);
}

TEST_CASE("generalization respects hypothesis variables") {
  TheoremDB db;
  Proof p = mk("base", {{pf("U(v0)"), j_hyp()},
                        {pf("forall v0 U(v0)"), j_ug(1, Var{0})}});
  CheckResult r = check_proof(p, db);
  CHECK_FALSE(r.accepted);
  CHECK(r.failed_step == 2);
  CHECK(r.reason.find("generalizes") != std::string::npos);

  // Generalizing over a variable the hypothesis does not mention is fine.
  Proof p2 = mk("base", {{pf("U(0)"), j_hyp()},
                         {pf("U(0) | U(v1)"), j_taut({1})},
                         {pf("forall v1 (U(0) | U(v1))"), j_ug(2, Var{1})},
                         {pf("0=0"), j_compute()}});
  CHECK(check_proof(p2, db).accepted);
}

TEST_CASE("computation steps decide ground atoms only") {
  CHECK(verify_compute(pf("S(S(0)) = 2")));
  CHECK(verify_compute(pf("(2 + 3) = 5")));
  CHECK(verify_compute(pf("!((2 * 3) = 5)")));
  CHECK(verify_compute(pf(".L0(quote(0=0))")));
  CHECK(verify_compute(pf("!.L0(17)")));
  CHECK(verify_compute(
      Formula::eq(Term::dot(DotFn::Neg, {gq(pf("0=0"))}), gq(pf("!0=0")))));
  CHECK_FALSE(verify_compute(pf("v0 = v0")));
  CHECK_FALSE(verify_compute(pf("u(0) = 0")));
  CHECK_FALSE(verify_compute(pf("U(0)")));
  CHECK_FALSE(verify_compute(pf("0=0 & 1=1")));
}

TEST_CASE("tautological consequence over non-propositional atoms") {
  CHECK(tautological_consequence({}, pf("T(quote(0=0)) | !T(quote(0=0))")));
  CHECK(tautological_consequence({pf("0=0"), pf("1=1")}, pf("0=0 & 1=1")));
  CHECK(tautological_consequence({pf("U(0) -> U(1)"), pf("U(0)")}, pf("U(1)")));
  // Quantified formulas are opaque atoms.
  CHECK(tautological_consequence({pf("forall v0 U(v0)")},
                                 pf("(forall v0 U(v0)) | U(3)")));
  CHECK_FALSE(tautological_consequence({pf("forall v0 U(v0)")}, pf("U(3)")));
  CHECK_FALSE(tautological_consequence({}, pf("U(0)")));

  // Distinct-atom budget: 25 distinct equations exceed the table limit.
  Formula big = pf("0=0");
  for (int i = 1; i < 25; ++i)
    big = Formula::land(big, Formula::eq(numeral(i), numeral(i)));
  CHECK_FALSE(tautological_consequence({big}, big));
  Formula small = pf("0=0");
  for (int i = 1; i < 24; ++i)
    small = Formula::land(small, Formula::eq(numeral(i), numeral(i)));
  CHECK(tautological_consequence({small}, small));
}

TEST_CASE("agent-knowledge admissibility: provability plus reflection") {
  TheoremDB db;
  // First make the target sentence a checked theorem.
  Proof a = mk("dcb", {{pf("exists v0 Ag(v0)"), j_axiom("non_triviality")}});
  REQUIRE(check_proof(a, db).accepted);

  Formula phi = pf("exists v0 Ag(v0)");
  Term code = gq(phi);
  const Formula& r_dcb = *registry().get("dcb").axiom("r_dcb");

  Formula step3 = subst(r_dcb.sub()[0], r_dcb.qvar(), Term::var(0));
  Formula inner_all = step3.sub()[1];
  Formula step4 = Formula::imp(
      inner_all, subst(inner_all.sub()[0], inner_all.qvar(), code));
  Formula goal = nec_k_formula(phi);

  Proof b = mk("dcb", {
      {d1_formula("dcb", phi), j_d1("dcb", phi)},
      {r_dcb, j_axiom("r_dcb")},
      {step3, j_ui(2, Term::var(0))},
      {step4, j_ui_imp(code)},
      {Formula::datom(DotPred::L0, {code}), j_compute()},
      {Formula::imp(Formula::atom(PredSym::Ag, {Term::var(0)}),
                    k2(Term::var(0), code)),
       j_taut({1, 3, 4, 5})},
      {goal, j_ug(6, Var{0})},
  });
  CheckResult r = check_proof(b, db);
  CHECK(r.accepted);
  CHECK(r.nec_uses == 0);
  CHECK(db.contains("dcb", goal));

  // The same derivation survives a print/parse round trip.
  Proof b2 = parse_proof(to_string(b));
  CHECK(b2.system == "dcb");
  REQUIRE(b2.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < b.steps.size(); ++i)
    CHECK(b2.steps[i].formula == b.steps[i].formula);
  TheoremDB db2;
  Proof a2 = a;
  REQUIRE(check_proof(a2, db2).accepted);
  CHECK(check_proof(b2, db2).accepted);
}

TEST_CASE("provability steps: d1, d2, monotonicity, theorem import") {
  TheoremDB db;
  REQUIRE(check_proof(mk("base", {{pf("0=0"), j_compute()}}), db).accepted);

  SUBCASE("d1 requires a checked theorem") {
    Proof p = mk("base", {{d1_formula("base", pf("0=0")), j_d1("base", pf("0=0"))}});
    CHECK(check_proof(p, db).accepted);
    Proof q = mk("base", {{d1_formula("base", pf("1=1")), j_d1("base", pf("1=1"))}});
    CheckResult r = check_proof(q, db);
    CHECK_FALSE(r.accepted);
    CHECK(r.reason.find("not a checked theorem") != std::string::npos);
  }

  SUBCASE("d2 is a closed distribution instance") {
    Justification j;
    j.kind = JKind::D2;
    j.system = "base";
    j.f1 = pf("0=0");
    j.f2 = pf("1=1");
    Proof p = mk("base", {{d2_formula("base", pf("0=0"), pf("1=1")), j}});
    CHECK(check_proof(p, db).accepted);
    Proof q = mk("base", {{d2_formula("base", pf("1=1"), pf("0=0")), j}});
    CHECK_FALSE(check_proof(q, db).accepted);
  }

  SUBCASE("pr_mono follows registered extension only") {
    Justification mono;
    mono.kind = JKind::PrMono;
    mono.system = "base";
    mono.system2 = "fs";
    mono.lines = {1};
    Proof p = mk("base", {{d1_formula("base", pf("0=0")), j_d1("base", pf("0=0"))},
                          {Formula::pr("fs", gq(pf("0=0"))), mono}});
    CHECK(check_proof(p, db).accepted);

    mono.system2 = "dcb";  // dcb does not contain the truth axioms
    Proof q = mk("fs", {{d1_formula("base", pf("0=0")), j_d1("base", pf("0=0"))},
                        {Formula::pr("dcb", gq(pf("0=0"))), mono}});
    CheckResult r = check_proof(q, db);
    CHECK(r.accepted);

    mono.system = "fs";
    mono.system2 = "dcb";
    Proof q2 = mk("fs", {{d1_formula("fs", pf("0=0")), j_d1("fs", pf("0=0"))}});
    REQUIRE(check_proof(mk("fs", {{pf("0=0"), j_compute()}}), db).accepted);
    REQUIRE(check_proof(q2, db).accepted);
    Proof q3 = mk("fs", {{d1_formula("fs", pf("0=0")), j_d1("fs", pf("0=0"))},
                         {Formula::pr("dcb", gq(pf("0=0"))), mono}});
    CHECK_FALSE(check_proof(q3, db).accepted);
  }

  SUBCASE("theorem import honors extension and budget rules") {
    Proof ok = mk("fs", {{pf("0=0"), j_theorem("base", pf("0=0"))}});
    CHECK(check_proof(ok, db).accepted);

    Proof into_budget = mk("befs2", {{pf("0=0"), j_theorem("base", pf("0=0"))}});
    CHECK(check_proof(into_budget, db).accepted);

    REQUIRE(check_proof(parse_proof("system fs\n"
                                    "1 | 0=0 | compute\n"
                                    "2 | T(quote(0=0)) | nec_t 1\n"),
                        db)
                .accepted);
    // fs can necessitate without bound, so befs2 does not even extend it.
    Proof smuggle =
        mk("befs2", {{pf("T(quote(0=0))"), j_theorem("fs", pf("T(quote(0=0))"))}});
    CheckResult r = check_proof(smuggle, db);
    CHECK_FALSE(r.accepted);
    CHECK(r.reason.find("extend") != std::string::npos);

    // A theorem of a sibling approximation hides necessitation uses that the
    // target's budget could not absorb.
    REQUIRE(check_proof(parse_proof("system befs2\n"
                                    "1 | 0=0 | compute\n"
                                    "2 | T(quote(0=0)) | nec_t 1\n"),
                        db)
                .accepted);
    Proof hidden = mk("befs3", {{pf("T(quote(0=0))"),
                                 j_theorem("befs2", pf("T(quote(0=0))"))}});
    CheckResult rh = check_proof(hidden, db);
    CHECK_FALSE(rh.accepted);
    CHECK(rh.reason.find("import") != std::string::npos);

    Proof wrong_dir =
        mk("dcb", {{pf("T(quote(0=0))"), j_theorem("fs", pf("T(quote(0=0))"))}});
    CHECK_FALSE(check_proof(wrong_dir, db).accepted);
  }
}

TEST_CASE("sigma-completeness of provability, cross-checked against d1") {
  TheoremDB db;
  REQUIRE(check_proof(mk("base", {{pf("0=0"), j_compute()}}), db).accepted);
  Formula inner = d1_formula("base", pf("0=0"));  // Pr[base](quote(0=0))
  REQUIRE(check_proof(mk("base", {{inner, j_d1("base", pf("0=0"))}}), db).accepted);

  // Route one: d1 applied to the provability sentence itself.
  Proof direct = mk("base", {{d1_formula("base", inner), j_d1("base", inner)}});
  REQUIRE(check_proof(direct, db).accepted);
  Formula target = direct.steps.back().formula;

  // Route two: the sigma-completeness schema, instantiated and evaluated.
  Nat n0 = gc(pf("0=0"));
  Formula sigma = pr_sigma_formula("base");
  Formula inst = subst(sigma.sub()[0], sigma.qvar(), numeral(n0));
  Term lifted = inst.sub()[1].sub()[1].terms()[0];
  Nat n1 = gc(inner);

  Justification sig;
  sig.kind = JKind::PrSigma;
  sig.system = "base";
  Proof via_schema = mk("base", {
      {sigma, sig},
      {inst, j_ui(1, numeral(n0))},
      {Formula::datom(DotPred::L0, {numeral(n0)}), j_compute()},
      {inner, j_d1("base", pf("0=0"))},
      {Formula::pr("base", lifted), j_taut({2, 3, 4})},
      {Formula::eq(lifted, numeral(n1)), j_compute()},
      {target, j_fol(FolRule::EqCong, {6, 5})},
  });
  CheckResult r = check_proof(via_schema, db);
  CHECK(r.accepted);
  CHECK(via_schema.steps.back().formula == target);
}

TEST_CASE("internal instantiation of a coded guarded universal") {
  TheoremDB db;
  // Prove a guarded universal sentence, then reason about its code.
  Formula matrix = pf("T(v3) | !T(v3)");
  Proof q1 = mk("base", {
      {matrix, j_taut()},
      {guard_l0(Var{3}, matrix).sub()[0], j_taut({1})},
      {guard_l0(Var{3}, matrix), j_ug(2, Var{3})},
  });
  REQUIRE(check_proof(q1, db).accepted);
  Formula psi = q1.steps.back().formula;

  Formula expected = guard_l0(
      Var{0},
      Formula::pr("base",
                  Term::dot(DotFn::Sbt,
                            {gq(matrix), Term::dot(DotFn::Gq, {Term::var(0)}),
                             numeral(var_code(Var{3}))})));
  std::optional<Formula> helper = internal_ui_formula("base", gc(psi));
  REQUIRE(helper.has_value());
  CHECK(*helper == expected);

  Justification iui;
  iui.kind = JKind::InternalUi;
  iui.system = "base";
  iui.lines = {1};
  Proof q2 = mk("base", {
      {d1_formula("base", psi), j_d1("base", psi)},
      {expected, iui},
  });
  CHECK(check_proof(q2, db).accepted);

  // A premise that codes no guarded universal is rejected.
  REQUIRE(check_proof(mk("base", {{pf("0=0"), j_compute()}}), db).accepted);
  Proof bad = mk("base", {
      {d1_formula("base", pf("0=0")), j_d1("base", pf("0=0"))},
      {expected, iui},
  });
  CheckResult r = check_proof(bad, db);
  CHECK_FALSE(r.accepted);
  CHECK(r.failed_step == 2);
}

TEST_CASE("multi-layer internal instantiation peels nested guards") {
  TheoremDB db;
  Formula matrix = pf("T(v4) | !T(v4) | U(v5)");
  Formula two = guard_l0(Var{4}, guard_l0(Var{5}, matrix));
  Proof prove = mk("base", {
      {matrix, j_taut()},
      {guard_l0(Var{5}, matrix).sub()[0], j_taut({1})},
      {guard_l0(Var{5}, matrix), j_ug(2, Var{5})},
      {Formula::imp(Formula::datom(DotPred::L0, {Term::var(4)}),
                    guard_l0(Var{5}, matrix)),
       j_taut({3})},
      {two, j_ug(4, Var{4})},
  });
  REQUIRE(check_proof(prove, db).accepted);

  std::optional<Formula> all = internal_ui_formula("base", gc(two));
  std::optional<Formula> one = internal_ui_formula("base", gc(two), 1);
  REQUIRE(all.has_value());
  REQUIRE(one.has_value());
  CHECK(*all != *one);
  CHECK(all->kind() == FormulaKind::All);
  CHECK(all->sub()[0].sub()[1].kind() == FormulaKind::All);
  CHECK(one->sub()[0].sub()[1].kind() == FormulaKind::Atom);

  Justification i2;
  i2.kind = JKind::InternalUi;
  i2.system = "base";
  i2.lines = {1};
  i2.peel = 1;
  Proof q = mk("base", {
      {d1_formula("base", two), j_d1("base", two)},
      {*one, i2},
  });
  CHECK(check_proof(q, db).accepted);
}

TEST_CASE("symbolically verified coding laws") {
  CHECK(verify_syntax_fact(pf("forall v0 (.ev(.num(v0)) = v0)")));
  CHECK(verify_syntax_fact(pf("forall v0 (.id(v0) = v0)")));
  CHECK(verify_syntax_fact(pf("forall v0 (.ev(.gq(v0)) = v0)")));

  // Substituting for a variable that a sentence cannot contain free is inert.
  Formula noop = guard_l0(
      Var{0}, Formula::eq(Term::dot(DotFn::Sbt,
                                    {Term::var(0), Term::dot(DotFn::Gq, {Term::var(0)}),
                                     numeral(var_code(Var{1}))}),
                          Term::var(0)));
  CHECK(verify_syntax_fact(noop));

  // Substitution distributes over the coded conditional.
  Term vc = numeral(var_code(Var{1}));
  auto sb = [&](Term body, Term what) {
    return Term::dot(DotFn::Sbt, {std::move(body), std::move(what), vc});
  };
  Term t0 = Term::var(0), t1 = Term::var(1), t2 = Term::var(2);
  Formula dist = guard_l0(
      Var{0},
      guard_l0(Var{1},
               guard_term0(Var{2},
                           Formula::eq(sb(Term::dot(DotFn::Imp, {t0, t1}), t2),
                                       Term::dot(DotFn::Imp,
                                                 {sb(t0, t2), sb(t1, t2)})))));
  CHECK(verify_syntax_fact(dist));

  // A law that genuinely substitutes: open code built from a numeral slot.
  Term openf = Term::dot(DotFn::EqA,
                         {Term::dot(DotFn::Num, {Term::var(0)}), vc});
  Term subbed = Term::dot(DotFn::Sbt,
                          {openf, Term::dot(DotFn::Num, {Term::var(1)}), vc});
  Term rhs = Term::dot(DotFn::EqA, {Term::dot(DotFn::Num, {Term::var(0)}),
                                    Term::dot(DotFn::Num, {Term::var(1)})});
  Formula subst_law =
      Formula::forall(Var{0}, Formula::forall(Var{1}, Formula::eq(subbed, rhs)));
  CHECK(verify_syntax_fact(subst_law));

  // Unsound or undecidable candidates are rejected.
  CHECK_FALSE(verify_syntax_fact(pf("forall v0 (.ev(v0) = v0)")));
  CHECK_FALSE(verify_syntax_fact(pf("forall v0 (.num(v0) = v0)")));
  CHECK_FALSE(verify_syntax_fact(pf("v0 = v0")));

  // Ground spot checks: every accepted schematic law holds under the concrete
  // evaluator on sampled instances.
  std::vector<Formula> sentences = {pf("0=0"), pf("U(3)"), pf("exists v0 Ag(v0)"),
                                    pf("T(quote(1=1))")};
  for (const Formula& s1 : sentences)
    for (const Formula& s2 : sentences) {
      Term ct = gq(parse_term("(2 + 2)"));
      Formula ground = Formula::eq(
          Term::dot(DotFn::Sbt,
                    {Term::dot(DotFn::Imp, {gq(s1), gq(s2)}), ct, vc}),
          Term::dot(DotFn::Imp, {Term::dot(DotFn::Sbt, {gq(s1), ct, vc}),
                                 Term::dot(DotFn::Sbt, {gq(s2), ct, vc})}));
      CHECK(verify_compute(ground));
    }
}

TEST_CASE("equality congruence respects binders") {
  TheoremDB db;
  Proof good = mk("base", {
      {pf("(1 + 1) = 2"), j_compute()},
      {pf("U((1 + 1)) | !U((1 + 1))"), j_taut()},
      {pf("forall v5 (U((1 + 1)) | !U((1 + 1)))"), j_ug(2, Var{5})},
      {pf("forall v5 (U(2) | !U((1 + 1)))"), j_fol(FolRule::EqCong, {1, 3})},
  });
  CHECK(check_proof(good, db).accepted);

  Proof bad = mk("base", {
      {pf("v0 = 0"), j_hyp()},
      {pf("v0 = v0"), j_fol(FolRule::EqRefl, {})},
      {pf("forall v0 (v0 = v0)"), j_ug(2, Var{0})},
      {pf("forall v0 (0 = v0)"), j_fol(FolRule::EqCong, {1, 3})},
  });
  CheckResult r = check_proof(bad, db);
  CHECK_FALSE(r.accepted);
  CHECK(r.failed_step == 4);
}

TEST_CASE("quantifier axiom forms") {
  TheoremDB db;
  // Vacuous introduction under an antecedent.
  Proof p = mk("base", {
      {pf("U(0) -> forall v1 U(0)"), j_fol(FolRule::VacImp, {})},
      {pf("0=0"), j_compute()},
  });
  CHECK(check_proof(p, db).accepted);

  Proof bad = mk("base", {
      {pf("U(v1) -> forall v1 U(v1)"), j_fol(FolRule::VacImp, {})},
  });
  CHECK_FALSE(check_proof(bad, db).accepted);

  Justification ei = j_fol(FolRule::EiImp, {});
  ei.term = numeral(0);
  Proof q = mk("base", {{pf("U(0) -> exists v0 U(v0)"), ei}});
  CHECK(check_proof(q, db).accepted);

  // Existential elimination.
  Proof ee = mk("dcb", {
      {pf("exists v0 Ag(v0)"), j_axiom("non_triviality")},
      {pf("Ag(v0) -> (Ag(v0) | U(1))"), j_taut()},
      {pf("forall v0 (Ag(v0) -> (Ag(v0) | U(1)))"), j_ug(2, Var{0})},
  });
  REQUIRE(check_proof(ee, db).accepted);
  // v0 is still free in the would-be conclusion, so ex_elim must refuse.
  Proof ee_bad = mk("dcb", {
      {pf("exists v0 Ag(v0)"), j_axiom("non_triviality")},
      {pf("Ag(v0) -> (Ag(v0) | U(1))"), j_taut()},
      {pf("forall v0 (Ag(v0) -> (Ag(v0) | U(1)))"), j_ug(2, Var{0})},
      {pf("Ag(v0) | U(1)"), j_fol(FolRule::ExElim, {1, 3})},
  });
  CHECK_FALSE(check_proof(ee_bad, db).accepted);

  Justification ei_v0 = j_fol(FolRule::EiImp, {});
  ei_v0.term = Term::var(0);
  Proof ee_good = mk("dcb", {
      {pf("exists v0 Ag(v0)"), j_axiom("non_triviality")},
      {pf("Ag(v0) -> (exists v1 Ag(v1))"), ei_v0},
      {pf("forall v0 (Ag(v0) -> (exists v1 Ag(v1)))"), j_ug(2, Var{0})},
      {pf("exists v1 Ag(v1)"), j_fol(FolRule::ExElim, {1, 3})},
  });
  CHECK(check_proof(ee_good, db).accepted);
}

TEST_CASE("remaining rule forms reach their canonical conclusions") {
  TheoremDB db;
  SUBCASE("conec_t inverts nec_t") {
    Proof p = parse_proof(
        "system fs\n"
        "1 | 0=0 | compute\n"
        "2 | T(quote(0=0)) | nec_t 1\n"
        "3 | 0=0 | conec_t 2\n");
    CheckResult r = check_proof(p, db);
    CHECK(r.accepted);
    CHECK(r.nec_uses == 2);
  }
  SUBCASE("nec_k reaches the canonical agent-universal") {
    Proof p = mk("kt", {{pf("0=0"), j_compute()},
                        {nec_k_formula(pf("0=0")), j_line(JKind::NecK, 1)}});
    CHECK(check_proof(p, db).accepted);
    Proof q = mk("dcb", {{pf("0=0"), j_compute()},
                         {nec_k_formula(pf("0=0")), j_line(JKind::NecK, 1)}});
    CHECK_FALSE(check_proof(q, db).accepted);
  }
  SUBCASE("nec_k1 exists only where registered") {
    Proof p = mk("montague", {{pf("0=0"), j_compute()},
                              {nec_k1_formula(pf("0=0")), j_line(JKind::NecK1, 1)}});
    CHECK(check_proof(p, db).accepted);
    Proof q = mk("km", {{pf("0=0"), j_compute()},
                        {nec_k1_formula(pf("0=0")), j_line(JKind::NecK1, 1)}});
    CHECK_FALSE(check_proof(q, db).accepted);
  }
  SUBCASE("t_over_k converts truth into common knowledge of agents") {
    Proof p = parse_proof(
        "system befs\n"
        "1 | 0=0 | compute\n"
        "2 | T(quote(0=0)) | nec_t 1\n"
        "3 | forall v0 (Ag(v0) -> K2(v0, quote(0=0))) | t_over_k 2\n");
    CheckResult r = check_proof(p, db);
    CHECK(r.accepted);
    CHECK(p.steps[2].formula == all_agents_know(gq(pf("0=0"))));
  }
}

TEST_CASE("modus ponens") {
  TheoremDB db;
  Proof p = mk("base", {
      {pf("0=0 -> (0=0 | 1=1)"), j_taut()},
      {pf("0=0"), j_compute()},
      {pf("0=0 | 1=1"), j_mp(1, 2)},
  });
  CHECK(check_proof(p, db).accepted);

  Proof q = mk("base", {
      {pf("0=0 -> (0=0 | 1=1)"), j_taut()},
      {pf("1=1"), j_compute()},
      {pf("0=0 | 1=1"), j_mp(1, 2)},
  });
  CheckResult r = check_proof(q, db);
  CHECK_FALSE(r.accepted);
  CHECK(r.reason.find("antecedent") != std::string::npos);
}

TEST_CASE("the reflection fixed point rule") {
  TheoremDB db;
  Proof p = mk("base", {
      {pf("0=0"), j_compute()},
      {Formula::imp(d1_formula("base", pf("0=0")), pf("0=0")), j_taut({1})},
      {pf("0=0"), j_line(JKind::Loeb, 2)},
  });
  CHECK(check_proof(p, db).accepted);

  // The premise must be untainted.
  Proof t = mk("base", {
      {Formula::imp(d1_formula("base", pf("0=0")), pf("0=0")), j_hyp()},
      {pf("0=0"), j_line(JKind::Loeb, 1)},
  });
  CHECK_FALSE(check_proof(t, db).accepted);

  // Budgeted approximations have no fixed point rule.
  Proof b = mk("befs2", {
      {pf("0=0"), j_compute()},
      {Formula::imp(d1_formula("befs2", pf("0=0")), pf("0=0")), j_taut({1})},
      {pf("0=0"), j_line(JKind::Loeb, 2)},
  });
  CheckResult r = check_proof(b, db);
  CHECK_FALSE(r.accepted);
  CHECK(r.failed_step == 3);

  // The coded antecedent must match the consequent exactly.
  Proof m = mk("base", {
      {pf("0=0"), j_compute()},
      {Formula::imp(d1_formula("base", pf("1=1")), pf("0=0")), j_taut({1})},
      {pf("0=0"), j_line(JKind::Loeb, 2)},
  });
  CHECK_FALSE(check_proof(m, db).accepted);
}

TEST_CASE("schema citations instantiate and compare") {
  TheoremDB db;
  Formula a = pf("(v0 + 0) = v0");
  Justification sj;
  sj.kind = JKind::Schema;
  sj.schema = SchemaId::Induction;
  sj.params = SchemaParams(a, std::nullopt, Var{0});
  Proof p = mk("base", {{instantiate(SchemaId::Induction,
                                     SchemaParams(a, std::nullopt, Var{0})),
                         sj}});
  CHECK(check_proof(p, db).accepted);

  Justification uj;
  uj.kind = JKind::Schema;
  uj.schema = SchemaId::UctAtom;
  uj.params = SchemaParams(pf("U(v0)"));
  Proof q = mk("fs", {{instantiate(SchemaId::UctAtom, SchemaParams(pf("U(v0)"))),
                       uj}});
  CHECK(check_proof(q, db).accepted);

  Proof bad = mk("base", {{instantiate(SchemaId::UctAtom, SchemaParams(pf("U(v0)"))),
                           uj}});
  CheckResult r = check_proof(bad, db);
  CHECK_FALSE(r.accepted);
  CHECK(r.reason.find("not available") != std::string::npos);
}

TEST_CASE("axiom citations") {
  TheoremDB db;
  const SystemDef& base = registry().get("base");
  Proof p = mk("base", {{base.axioms[0].formula, j_axiom(base.axioms[0].name)}});
  CHECK(check_proof(p, db).accepted);
  Proof q = mk("base", {{base.axioms[0].formula, j_axiom("nonexistent")}});
  CHECK_FALSE(check_proof(q, db).accepted);
  Proof m = mk("base", {{pf("0=0"), j_axiom(base.axioms[0].name)}});
  CHECK_FALSE(check_proof(m, db).accepted);
}

TEST_CASE("malformed proofs are rejected with located reasons") {
  TheoremDB db;
  Proof empty;
  empty.system = "base";
  CHECK_FALSE(check_proof(empty, db).accepted);

  Proof unknown = mk("no_such_system", {{pf("0=0"), j_compute()}});
  CheckResult r = check_proof(unknown, db);
  CHECK_FALSE(r.accepted);
  CHECK(r.failed_step == 0);

  Proof fwd = mk("base", {{pf("0=0"), j_taut({1})}});
  CHECK_FALSE(check_proof(fwd, db).accepted);

  Proof meta = mk("base", {{Formula::meta_sentence(0), j_compute()}});
  CheckResult rm = check_proof(meta, db);
  CHECK_FALSE(rm.accepted);
  CHECK(rm.reason.find("placeholder") != std::string::npos);

  CHECK_THROWS_AS(parse_proof("system base\n2 | 0=0 | compute\n"), ParseError);
  CHECK_THROWS_AS(parse_proof("1 | 0=0 | compute\n"), ParseError);
  CHECK_THROWS_AS(parse_proof("system base\n1 | 0=0 compute\n"), ParseError);
}

TEST_CASE("checking is deterministic and the database is idempotent") {
  Proof p = parse_proof(
      "system fs\n"
      "1 | 0=0 | compute\n"
      "2 | T(quote(0=0)) | nec_t 1\n");
  TheoremDB db1, db2;
  CheckResult a = check_proof(p, db1);
  CheckResult b = check_proof(p, db2);
  CHECK(a.accepted == b.accepted);
  CHECK(a.nec_uses == b.nec_uses);
  CHECK(a.rule_uses == b.rule_uses);

  std::size_t before = db1.size();
  CHECK(check_proof(p, db1).accepted);
  CHECK(db1.size() == before);

  const Proof* stored = db1.proof_of("fs", pf("T(quote(0=0))"));
  REQUIRE(stored != nullptr);
  CHECK(stored->steps.size() == 2);
}

TEST_CASE("proof text round-trips through print and parse") {
  // Formulas containing the Or connective share the column separator; the
  // splitter must still find the unique valid reading.
  Proof p = parse_proof(
      "system base\n"
      "1 | (T(v3) | !T(v3)) | taut\n"
      "2 | .L0(v3) -> (T(v3) | !T(v3)) | taut 1\n"
      "3 | forall v3 (.L0(v3) -> (T(v3) | !T(v3))) | ug 2 v3\n");
  TheoremDB db;
  CHECK(check_proof(p, db).accepted);

  std::string printed = to_string(p);
  Proof q = parse_proof(printed);
  REQUIRE(q.steps.size() == p.steps.size());
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    CHECK(q.steps[i].formula == p.steps[i].formula);
    CHECK(to_string(q.steps[i].just) == to_string(p.steps[i].just));
  }
  CHECK(to_string(q) == printed);
}

TEST_CASE("predicate matrices in coding laws") {
  // Guarded sentence-hood facts about the coded connectives.
  CHECK(verify_syntax_fact(pf("forall v0 (.L0(v0) -> .L0(v0))")));
  CHECK(verify_syntax_fact(pf("forall v0 (.L0(v0) -> .L0(.neg(v0)))")));
  CHECK(verify_syntax_fact(
      pf("forall v0 (.L0(v0) -> forall v1 (.L0(v1) -> .L0(.imp(v0, v1))))")));

  // Substituting a quoted numeral into an open coded formula closes it.
  Term vc1 = numeral(var_code(Var{1}));
  Term lifted = Term::dot(
      DotFn::Sbt,
      {gq(k1(Term::var(1))), Term::dot(DotFn::Gq, {Term::var(0)}), vc1});
  Formula lift_law = guard_l0(Var{0}, Formula::datom(DotPred::L0, {lifted}));
  CHECK(verify_syntax_fact(lift_law));

  // Unrestricted slots: quoting any value yields a closed arithmetic term.
  CHECK(verify_syntax_fact(pf("forall v0 .Term0PA(.gq(v0))")));

  // Ground instances go through the concrete evaluator.
  CHECK(verify_syntax_fact(
      Formula::datom(DotPred::L0, {gq(pf("exists v0 Ag(v0)"))})));

  // Rejected: a sentence code is not a term code, an unevaluable argument,
  // and a substitution that leaves another variable free.
  CHECK_FALSE(verify_syntax_fact(pf("forall v0 (.L0(v0) -> .Term0PA(v0))")));
  CHECK_FALSE(verify_syntax_fact(pf("forall v0 (.L0(v0) -> .L0(.gq(v0)))")));
  Term open_lift = Term::dot(
      DotFn::Sbt,
      {gq(k2(Term::var(1), Term::var(2))), Term::dot(DotFn::Gq, {Term::var(0)}),
       vc1});
  CHECK_FALSE(verify_syntax_fact(
      guard_l0(Var{0}, Formula::datom(DotPred::L0, {open_lift}))));

  // The justification accepts them inside proofs and round-trips as text.
  TheoremDB db;
  Proof p = mk("dcb", {{lift_law, j_syntax_fact()}});
  CHECK(check_proof(p, db).accepted);
  Proof q = parse_proof(to_string(p));
  CHECK(check_proof(q, db).accepted);
}

TEST_CASE("the congruence axiom form rewrites under an antecedent") {
  TheoremDB db;
  Proof p = mk("base", {
      {pf("((1 + 1) = 2) -> (U((1 + 1)) -> U(2))"),
       j_fol(FolRule::CongImp, {})},
      {pf("(.id(3) = 3) -> (K1(.id(3)) -> K1(3))"),
       j_fol(FolRule::CongImp, {})},
  });
  CHECK(check_proof(p, db).accepted);
  Proof q = parse_proof(to_string(p));
  CHECK(check_proof(q, db).accepted);

  // The consequent must follow the cited equation.
  Proof bad = mk("base", {
      {pf("((1 + 1) = 2) -> (U((1 + 1)) -> U(3))"),
       j_fol(FolRule::CongImp, {})},
  });
  CheckResult r = check_proof(bad, db);
  CHECK_FALSE(r.accepted);
  CHECK(r.failed_step == 1);

  // Replacement below a binder that captures the equation is refused.
  Proof cap = mk("base", {
      {pf("(v1 = 0) -> (forall v1 U(v1) -> forall v1 U(0))"),
       j_fol(FolRule::CongImp, {})},
  });
  CHECK_FALSE(check_proof(cap, db).accepted);
}

TEST_CASE("implication form of internal instantiation") {
  TheoremDB db;

  // Establish a guarded universal theorem of base first.
  ProofBuilder pg("base");
  int t1 = pg.taut(pf("K1(v1) -> K1(v1)"));
  int t2 = pg.taut(pf(".L0(v1) -> (K1(v1) -> K1(v1))"), {t1});
  pg.ug(t2, Var{1});
  Proof gproof = pg.take();
  REQUIRE(check_proof(gproof, db).accepted);
  Formula g = gproof.steps.back().formula;

  // The implication form discharged by modus ponens meets the rule form.
  ProofBuilder pb("base");
  int d = pb.d1("base", g);
  int rule_form = pb.internal_ui("base", d);
  int imp_form = pb.internal_ui_imp("base", g);
  Term point = gq(pf("0=0"));
  int a = pb.instantiate_guarded(rule_form, point);
  int b0 = pb.instantiate_guarded(imp_form, point);
  int b = pb.mp(b0, d);
  CHECK(pb.formula(a) == pb.formula(b));

  Formula f = pb.formula(imp_form);
  REQUIRE(f.kind() == FormulaKind::All);
  const Formula& inner = f.sub()[0].sub()[1];
  REQUIRE(inner.kind() == FormulaKind::Imp);
  CHECK(inner.sub()[0] == Formula::pr("base", gq(g)));

  Proof p = pb.take();
  CHECK(check_proof(p, db).accepted);
  Proof q = parse_proof(to_string(p));
  CHECK(check_proof(q, db).accepted);

  // A two-guard universal peels once or fully on request.
  Formula g2 = guard_l0(
      Var{1}, guard_l0(Var{2}, pf("K1(v1) -> (K1(v2) -> K1(v1))")));
  ProofBuilder p2("base");
  int full = p2.internal_ui_imp("base", g2);
  int once = p2.internal_ui_imp("base", g2, 1);
  Formula ffull = p2.formula(full);
  Formula fonce = p2.formula(once);
  REQUIRE(ffull.kind() == FormulaKind::All);
  CHECK(ffull.sub()[0].sub()[1].kind() == FormulaKind::All);
  CHECK(fonce.sub()[0].sub()[1].kind() == FormulaKind::Imp);
  CHECK(check_proof(p2.take(), db).accepted);

  // Not a guarded universal; and a conclusion that does not match.
  CHECK_THROWS_AS(ProofBuilder("base").internal_ui_imp("base", pf("0=0")),
                  Error);
  Justification j;
  j.kind = JKind::InternalUiImp;
  j.system = "base";
  j.f1 = g;
  Proof bad = mk("base", {{pf("0=0"), j}});
  CheckResult r = check_proof(bad, db);
  CHECK_FALSE(r.accepted);
  CHECK(r.failed_step == 1);
}
