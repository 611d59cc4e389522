#include "ktlab/scripts.hpp"

#include "ktlab/coding.hpp"
#include "ktlab/proofbuilder.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

namespace ktlab {

namespace {

Term vt(int i) { return Term::var(i); }
Term vt(Var v) { return Term::var(v); }

Formula ag_at(const Term& t) { return Formula::atom(PredSym::Ag, {t}); }
Formula tf_at(const Term& t) { return Formula::atom(PredSym::T, {t}); }
Formula l0_at(const Term& t) { return Formula::datom(DotPred::L0, {t}); }

Term dneg(const Term& t) { return Term::dot(DotFn::Neg, {t}); }
Term dimp(const Term& a, const Term& b) { return Term::dot(DotFn::Imp, {a, b}); }

// Code of `th` with the uses of y routed through the quoted value of t:
// the substitution term that unfolding clauses quantify over.
Term code_at(const Formula& th, Var y, const Term& t) {
  return Term::dot(DotFn::Sbt,
                   {gq(th), Term::dot(DotFn::Gq, {t}), numeral(var_code(y))});
}

int max_var_index(const Term& t);

int max_var_index_args(const std::vector<Term>& ts) {
  int m = -1;
  for (const Term& t : ts) m = std::max(m, max_var_index(t));
  return m;
}

int max_var_index(const Term& t) {
  int m = -1;
  if (t.kind() == TermKind::VarT) m = t.var_of().index;
  return std::max(m, max_var_index_args(t.args()));
}

int max_var_index(const Formula& f) {
  int m = max_var_index_args(f.terms());
  if (f.kind() == FormulaKind::All || f.kind() == FormulaKind::Ex)
    m = std::max(m, f.qvar().index);
  for (const Formula& s : f.sub()) m = std::max(m, max_var_index(s));
  return m;
}

// Incremental assembly: proofs check into the shared database as they are
// produced, so later proofs can import earlier conclusions.
struct Build {
  Build(TheoremDB& db_, std::string id) : db(&db_) { r.id = std::move(id); }
  TheoremDB* db;
  ScriptResult r;

  bool add(Proof p) {
    CheckResult c = check_proof(p, *db);
    if (c.accepted) {
      for (const auto& [k, n] : c.rule_uses) r.rule_uses[k] += n;
    } else if (r.detail.empty()) {
      r.detail = "proof " + std::to_string(r.proofs.size() + 1) +
                 " rejected at step " + std::to_string(c.failed_step) + ": " +
                 c.reason;
    }
    bool ok = c.accepted;
    r.proofs.push_back(std::move(p));
    r.checks.push_back(std::move(c));
    return ok;
  }

  // Certifies a propositional truth of `system` unless already present.
  void ensure_taut(const std::string& system, const Formula& f) {
    if (db->contains(system, f)) return;
    ProofBuilder pb(system);
    pb.taut(f);
    add(pb.take());
  }

  ScriptResult error(const std::string& why) {
    r.accepted = false;
    r.detail = why;
    return std::move(r);
  }

  ScriptResult finish(const std::string& ok_detail) {
    r.accepted = !r.checks.empty();
    for (const CheckResult& c : r.checks) r.accepted = r.accepted && c.accepted;
    if (!r.proofs.empty() && !r.proofs.back().steps.empty())
      r.conclusion = r.proofs.back().steps.back().formula;
    if (r.accepted) r.detail = ok_detail;
    return std::move(r);
  }
};

// ---------- pointwise toolkit at a fixed agent variable ----------

// Closure of one agent's knowledge under coded modus ponens, instantiated:
//   Ag(a) -> ((K2(a, code A) & K2(a, code (A->B))) -> K2(a, code B)).
// uk_line holds the closure axiom; A and B must be sentences.
int uk_pointwise(ProofBuilder& pb, int uk_at_a, Var a, const Formula& A,
                 const Formula& B) {
  Formula allv1 = pb.formula(uk_at_a).sub()[1];
  int j1 = pb.ui_imp(allv1, gq(A));
  int c1 = pb.compute(l0_at(gq(A)));
  Formula allv2 = subst(allv1.sub()[0].sub()[1], Var{1}, gq(A));
  int j2 = pb.ui_imp(allv2, gq(B));
  int c2 = pb.compute(l0_at(gq(B)));
  Formula inner = subst(allv2.sub()[0].sub()[1], Var{2}, gq(B));
  int t = pb.taut(Formula::imp(ag_at(vt(a)), inner),
                  {uk_at_a, j1, c1, j2, c2});
  int cc = pb.compute(
      Formula::eq(dimp(gq(A), gq(B)), gq(Formula::imp(A, B))));
  Formula fixed = Formula::imp(
      ag_at(vt(a)),
      Formula::imp(Formula::land(k2(vt(a), gq(A)),
                                 k2(vt(a), gq(Formula::imp(A, B)))),
                   k2(vt(a), gq(B))));
  return pb.eq_cong(cc, t, fixed);
}

// Every agent knows the cited subsystem theorem F:
//   Ag(a) -> K2(a, code F);  r_at_a holds the reflection axiom at a.
int knows_theorem(ProofBuilder& pb, int r_at_a, Var a, const Formula& F) {
  Formula allv1 = pb.formula(r_at_a).sub()[1];
  int d = pb.d1("dcb", F);
  int u = pb.ui_imp(allv1, gq(F));
  int c = pb.compute(l0_at(gq(F)));
  return pb.taut(Formula::imp(ag_at(vt(a)), k2(vt(a), gq(F))),
                 {r_at_a, d, u, c});
}

// The unary knowledge biconditional at a literal code:
//   K1(code F) <-> forall v0 (Ag(v0) -> K2(v0, code F)).
int k1_iff_all(ProofBuilder& pb, int k1k2_line, const Formula& F) {
  return pb.instantiate_guarded(k1k2_line, gq(F));
}

// K1 of a theorem line via agentwise necessitation and the biconditional.
int k1_of_theorem(ProofBuilder& pb, int k1k2_line, int thm_line) {
  const Formula f = pb.formula(thm_line);
  int n = pb.nec_k(thm_line);
  int e = k1_iff_all(pb, k1k2_line, f);
  return pb.taut(k1(gq(f)), {n, e});
}

// Unconditional closure for the unary reading:
//   (K1(code A) & K1(code (A->B))) -> K1(code B).
int k1_closure_imp(ProofBuilder& pb, int k1k2_line, int uk_at_v0,
                   const Formula& A, const Formula& B) {
  Formula AB = Formula::imp(A, B);
  int fa = k1_iff_all(pb, k1k2_line, A);
  int fab = k1_iff_all(pb, k1k2_line, AB);
  int fb = k1_iff_all(pb, k1k2_line, B);
  int ukp = uk_pointwise(pb, uk_at_v0, Var{0}, A, B);
  int pa = pb.ui_imp(all_agents_know(gq(A)), vt(0));
  int pab = pb.ui_imp(all_agents_know(gq(AB)), vt(0));
  Formula ant = Formula::land(k1(gq(A)), k1(gq(AB)));
  int t = pb.taut(
      Formula::imp(ant, Formula::imp(ag_at(vt(0)), k2(vt(0), gq(B)))),
      {fa, fab, ukp, pa, pab});
  int g = pb.ug(t, Var{0});
  int ai = pb.all_imp(g);
  int vi = pb.vac_imp(ant, Var{0});
  return pb.taut(Formula::imp(ant, k1(gq(B))), {ai, vi, fb});
}

// K1(code A) -> T(code A), from the factivity axiom and a nonempty agent
// domain (the guarded universal is discharged by choosing a witness).
int k1_to_t_imp(ProofBuilder& pb, int k1k2_line, int v_line, int nontriv_line,
                const Formula& A) {
  int fa = k1_iff_all(pb, k1k2_line, A);
  int vi = pb.ui(v_line, vt(0));
  Formula allv1 = pb.formula(vi).sub()[1];
  int vv = pb.ui_imp(allv1, gq(A));
  int cl = pb.compute(l0_at(gq(A)));
  int pz = pb.ui_imp(all_agents_know(gq(A)), vt(0));
  Formula k1a = k1(gq(A));
  int t = pb.taut(
      Formula::imp(k1a, Formula::imp(ag_at(vt(0)), tf_at(gq(A)))),
      {fa, vi, vv, cl, pz});
  int g = pb.ug(t, Var{0});
  int ai = pb.all_imp(g);
  int vc = pb.vac_imp(k1a, Var{0});
  // Discharge the remaining agent-guarded universal through the witness.
  Formula h = guard_ag(Var{0}, tf_at(gq(A)));
  int q1 = pb.ui_imp(h, vt(0));
  int q2 = pb.taut(Formula::imp(ag_at(vt(0)), Formula::imp(h, tf_at(gq(A)))),
                   {q1});
  int q3 = pb.ug(q2, Var{0});
  int q4 = pb.ex_elim(nontriv_line, q3);
  return pb.taut(Formula::imp(k1a, tf_at(gq(A))), {ai, vc, q4});
}

// ---------- unary collapse scripts ----------

ScriptResult do_kaplan_montague(TheoremDB& db) {
  Build b(db, "kaplan_montague");
  FixedPointResult fp = knowledge_of_own_negation();
  if (!b.add(fp.witness_proof)) return b.error("diagonal witness rejected");
  Formula kappa = fp.theta;
  Formula nk = Formula::lnot(kappa);
  Formula diag = Formula::iff(kappa, k1(gq(nk)));
  Formula bridge = Formula::eq(dneg(gq(kappa)), gq(nk));
  Formula utk = Formula::imp(k1(gq(nk)), nk);
  Formula lemma = Formula::imp(utk, nk);

  {
    ProofBuilder pb("base");
    int e = pb.theorem("base", fp.equivalence);
    int c = pb.compute(bridge);
    int d = pb.eq_cong(c, e, diag);
    pb.taut(lemma, {d});
    if (!b.add(pb.take())) return b.error("support lemma rejected");
  }

  ProofBuilder pb("km");
  int e = pb.theorem("base", fp.equivalence);
  int c = pb.compute(bridge);
  int d = pb.eq_cong(c, e, diag);
  int ut = pb.schema(SchemaId::UtK, SchemaParams(nk));
  int dd = pb.d1("base", lemma);
  int ik = pb.schema(SchemaId::IK, SchemaParams(utk, nk));
  int kut = pb.schema(SchemaId::KUtK, SchemaParams(nk));
  int kb = pb.taut(k1(gq(nk)), {dd, ik, kut});
  pb.taut(falsum(), {kb, ut, d});
  b.add(pb.take());
  return b.finish("false equation derived; biconditional imported from the "
                  "diagonal witness");
}

ScriptResult do_montague(TheoremDB& db) {
  Build b(db, "montague");
  FixedPointResult fp = unknown_sentence();
  if (!b.add(fp.witness_proof)) return b.error("diagonal witness rejected");
  Formula delta = fp.theta;

  ProofBuilder pb("montague");
  int e = pb.theorem("base", fp.equivalence);
  int ut = pb.schema(SchemaId::UtK, SchemaParams(delta));
  int nd = pb.taut(Formula::lnot(k1(gq(delta))), {e, ut});
  int dl = pb.taut(delta, {e, nd});
  int k1d = pb.nec_k1(dl);
  int k1nd = pb.nec_k1(nd);
  int ut2 = pb.schema(SchemaId::UtK, SchemaParams(Formula::lnot(k1(gq(delta)))));
  pb.taut(falsum(), {k1d, k1nd, ut2});
  b.add(pb.take());
  return b.finish("false equation derived; necessitation applied to theorem "
                  "lines only");
}

ScriptResult do_u4_inconsistency(TheoremDB& db) {
  Build b(db, "u4_inconsistency");
  FixedPointResult fp = unknown_sentence();
  if (!b.add(fp.witness_proof)) return b.error("diagonal witness rejected");
  Formula delta = fp.theta;
  Formula nd = Formula::lnot(delta);
  Formula bot = falsum();

  ProofBuilder pb("kt_u4");
  int diag = pb.theorem("base", fp.equivalence);
  int u4ax = pb.axiom("u4");
  int u4i = pb.instantiate_guarded(u4ax, gq(delta));
  int cc = pb.compute(Formula::eq(
      Term::dot(DotFn::K1A, {Term::dot(DotFn::Gq, {gq(delta)})}),
      gq(k1(gq(delta)))));
  int u4b = pb.eq_cong(cc, u4i,
                       Formula::imp(k1(gq(delta)), k1(gq(k1(gq(delta))))));
  int k1k2 = pb.axiom("k1_k2");
  int uk0 = pb.axiom("uk_k");
  int uka = pb.ui(uk0, vt(0));
  int vax = pb.axiom("v");
  int ntr = pb.axiom("non_triviality");
  Formula kd = k1(gq(delta));
  int t1 = pb.taut(Formula::imp(kd, nd), {diag});
  int l1 = k1_of_theorem(pb, k1k2, t1);
  int c1 = k1_closure_imp(pb, k1k2, uka, kd, nd);
  int t8 = pb.taut(Formula::imp(delta, Formula::imp(nd, bot)));
  int l8 = k1_of_theorem(pb, k1k2, t8);
  int c2 = k1_closure_imp(pb, k1k2, uka, delta, Formula::imp(nd, bot));
  int c3 = k1_closure_imp(pb, k1k2, uka, nd, bot);
  int big = pb.taut(Formula::imp(kd, k1(gq(bot))),
                    {u4b, l1, c1, l8, c2, c3});
  int kt = k1_to_t_imp(pb, k1k2, vax, ntr, bot);
  int ua = pb.schema(SchemaId::UctAtom, SchemaParams(bot));
  int cf = pb.compute(Formula::lnot(bot));
  int nkd = pb.taut(Formula::lnot(kd), {big, kt, ua, cf});
  int dl = pb.taut(delta, {diag, nkd});
  int kdl = k1_of_theorem(pb, k1k2, dl);
  pb.taut(bot, {nkd, kdl});
  b.add(pb.take());
  return b.finish("false equation derived; truth of the false equation "
                  "discharged by the atomic truth biconditional");
}

// ---------- truth biconditional transfer ----------

void ensure_demo_system() {
  if (registry().find("kt_ia_demo")) return;
  SystemDef d = registry().get("kt_ia");
  d.name = "kt_ia_demo";
  d.axioms.push_back({"ag_zero", ag_at(numeral(0))});
  registry().register_system(std::move(d));
}

// Core transfer: from the truth biconditional for phi (a theorem of esys,
// already checked), derive in ext:
//   forall v0 (Ag(v0) -> (T(code K2(num v0, code phi)) <-> K2(v0, code phi))).
void tb_core(Build& b, const Formula& phi, const std::string& ext,
             const std::string& esys) {
  Formula E = Formula::iff(tf_at(gq(phi)), phi);
  Formula h1 = Formula::imp(tf_at(gq(phi)), phi);
  Formula h2 = Formula::imp(phi, tf_at(gq(phi)));
  Formula F1 = Formula::imp(E, h1);
  Formula F2 = Formula::imp(E, h2);
  b.ensure_taut("dcb", F1);
  b.ensure_taut("dcb", F2);

  ProofBuilder pb(ext);
  int e = pb.theorem(esys, E);
  int iax = pb.axiom("ia");
  int n = pb.nec_k(e);
  int ni = pb.ui(n, vt(0));
  int r0 = pb.axiom("r_dcb");
  int ri = pb.ui(r0, vt(0));
  Formula allv1r = pb.formula(ri).sub()[1];
  int d1f1 = pb.d1("dcb", F1);
  int u1 = pb.ui_imp(allv1r, gq(F1));
  int cf1 = pb.compute(l0_at(gq(F1)));
  int d1f2 = pb.d1("dcb", F2);
  int u2 = pb.ui_imp(allv1r, gq(F2));
  int cf2 = pb.compute(l0_at(gq(F2)));
  int uk0 = pb.axiom("uk_k");
  int uka = pb.ui(uk0, vt(0));
  int uk1 = uk_pointwise(pb, uka, Var{0}, E, h1);
  int uk2 = uk_pointwise(pb, uka, Var{0}, E, h2);
  int uk3 = uk_pointwise(pb, uka, Var{0}, tf_at(gq(phi)), phi);
  int uk4 = uk_pointwise(pb, uka, Var{0}, phi, tf_at(gq(phi)));
  int tk = pb.taut(
      Formula::imp(ag_at(vt(0)),
                   Formula::iff(k2(vt(0), gq(tf_at(gq(phi)))),
                                k2(vt(0), gq(phi)))),
      {ni, ri, d1f1, u1, cf1, uk1, d1f2, u2, cf2, uk2, uk3, uk4});

  int ii = pb.ui(iax, vt(0));
  Formula allv1i = pb.formula(ii).sub()[1];
  int ui_ia = pb.ui_imp(allv1i, gq(phi));
  int ci = pb.compute(l0_at(gq(phi)));
  int cta = pb.compute(Formula::eq(
      Term::dot(DotFn::TA, {Term::dot(DotFn::Gq, {gq(phi)})}),
      gq(tf_at(gq(phi)))));
  Formula inner1 = Formula::iff(
      k2(vt(0), gq(tf_at(gq(phi)))),
      tf_at(Term::dot(DotFn::K2A, {Term::dot(DotFn::Num, {vt(0)}),
                                   Term::dot(DotFn::Gq, {gq(phi)})})));
  int e1 = pb.eq_cong(cta, ui_ia,
                      Formula::imp(allv1i, Formula::imp(l0_at(gq(phi)), inner1)));
  int cgq = pb.compute(
      Formula::eq(Term::dot(DotFn::Gq, {gq(phi)}), numeral(gc(gq(phi)))));
  Term k2a_code = Term::dot(DotFn::K2A, {Term::dot(DotFn::Num, {vt(0)}),
                                         numeral(gc(gq(phi)))});
  Formula inner2 =
      Formula::iff(k2(vt(0), gq(tf_at(gq(phi)))), tf_at(k2a_code));
  int e2 = pb.eq_cong(cgq, e1,
                      Formula::imp(allv1i, Formula::imp(l0_at(gq(phi)), inner2)));
  int big = pb.taut(
      Formula::imp(ag_at(vt(0)),
                   Formula::iff(tf_at(k2a_code), k2(vt(0), gq(phi)))),
      {tk, ii, e2, ci});
  pb.ug(big, Var{0});
  b.add(pb.take());
}

ScriptResult do_tb_transfer(TheoremDB& db, const Formula& phi,
                            const std::string& ext) {
  Build b(db, "tb_transfer[" + ext + "]");
  if (!phi.sentence()) return b.error("transfer parameter must be a sentence");
  Formula E = Formula::iff(tf_at(gq(phi)), phi);
  std::string esys;
  if (db.contains("kt", E)) {
    esys = "kt";
  } else if (db.contains(ext, E)) {
    esys = ext;
  } else if (phi.kind() == FormulaKind::Atom && phi.in_lminus()) {
    ProofBuilder pe("kt");
    pe.schema(SchemaId::UctAtom, SchemaParams(phi));
    if (!b.add(pe.take())) return b.error("truth biconditional rejected");
    esys = "kt";
  } else {
    return b.error("missing truth biconditional for the transfer parameter");
  }
  tb_core(b, phi, ext, esys);
  return b.finish("agentwise truth/knowledge biconditional established");
}

ScriptResult do_tb_transfer_nested(TheoremDB& db) {
  ensure_demo_system();
  Build b(db, "tb_transfer_nested");
  Formula phi = Formula::eq(Term::zero(), Term::zero());
  Formula E = Formula::iff(tf_at(gq(phi)), phi);
  if (!db.contains("kt", E)) {
    ProofBuilder pe("kt");
    pe.schema(SchemaId::UctAtom, SchemaParams(phi));
    if (!b.add(pe.take())) return b.error("truth biconditional rejected");
  }
  tb_core(b, phi, "kt_ia_demo", "kt");
  Formula c1 = b.r.proofs.back().steps.back().formula;

  // Project the transferred biconditional onto the proved agent 0, then
  // rewrite the coded knowledge atom to a literal code: a truth
  // biconditional for the nested sentence K2(0, code phi).
  Formula phi2 = k2(numeral(0), gq(phi));
  Term k2a_code = Term::dot(DotFn::K2A, {Term::dot(DotFn::Num, {numeral(0)}),
                                         numeral(gc(gq(phi)))});
  {
    ProofBuilder pb("kt_ia_demo");
    int l = pb.theorem("kt_ia_demo", c1);
    int az = pb.axiom("ag_zero");
    int u = pb.ui(l, numeral(0));
    int m = pb.mp(u, az);
    int cc = pb.compute(Formula::eq(k2a_code, gq(phi2)));
    pb.eq_cong(cc, m, Formula::iff(tf_at(gq(phi2)), phi2));
    if (!b.add(pb.take())) return b.error("nested biconditional rejected");
  }
  tb_core(b, phi2, "kt_ia_demo", "kt_ia_demo");
  return b.finish("transfer iterated once through a proved agenthood fact");
}

// ---------- guarded implication core ----------

struct CoreSpec {
  Formula theta, theta2;
  Var y;
  Formula H1, H2;             // guarded halves, theorems of dcb
  std::optional<Formula> P3;  // forall v (filter2(v) -> filter1(v))
};

// Derives G = forall y (.L0(y) -> (theta -> theta2)) by self-certification:
// assuming the provability of G, each unfolding clause of theta transfers to
// one of theta2 pointwise at a fresh code variable, and the loop closes.
int dagger_core(ProofBuilder& pb, const CoreSpec& s) {
  Var y = s.y;
  if (s.H1.kind() != FormulaKind::All ||
      s.H1.sub()[0].kind() != FormulaKind::Imp ||
      s.H1.sub()[0].sub()[1].kind() != FormulaKind::Imp)
    throw Error("first hypothesis does not have the guarded shape");
  if (s.H2.kind() != FormulaKind::All ||
      s.H2.sub()[0].kind() != FormulaKind::Imp ||
      s.H2.sub()[0].sub()[1].kind() != FormulaKind::Imp)
    throw Error("second hypothesis does not have the guarded shape");
  Formula psi1_y = s.H1.sub()[0].sub()[1].sub()[1];
  Formula psi2_y = s.H2.sub()[0].sub()[1].sub()[0];
  if (psi2_y.kind() != FormulaKind::All)
    throw Error("second hypothesis body is not an unfolding clause");
  Var xb = psi2_y.qvar();

  int w = std::max({9, max_var_index(s.theta) + 1, max_var_index(s.theta2) + 1,
                    max_var_index(psi1_y) + 1, max_var_index(psi2_y) + 1});
  Term wt = vt(w);
  Term yt = vt(y);
  Formula L0w = l0_at(wt);
  Formula G = guard_l0(y, Formula::imp(s.theta, s.theta2));
  Formula P = Formula::pr("dcb", gq(G));

  Term s1w = code_at(s.theta, y, wt);
  Term s2w = code_at(s.theta2, y, wt);
  Term chw = code_at(Formula::imp(s.theta, s.theta2), y, wt);
  Term impw = dimp(s1w, s2w);

  int imp_line = pb.internal_ui_imp("dcb", G);
  int p1 = pb.ui(imp_line, wt);
  int sf_dist = pb.syntax_fact(guard_l0(Var{w}, Formula::eq(chw, impw)));
  int p2 = pb.ui(sf_dist, wt);
  int p3c = pb.cong_imp(Formula::eq(chw, impw), Formula::pr("dcb", chw),
                        Formula::pr("dcb", impw));
  int sf_imp = pb.syntax_fact(guard_l0(Var{w}, l0_at(impw)));
  int p4 = pb.ui(sf_imp, wt);
  int sf_1 = pb.syntax_fact(guard_l0(Var{w}, l0_at(s1w)));
  int p10 = pb.ui(sf_1, wt);
  int sf_2 = pb.syntax_fact(guard_l0(Var{w}, l0_at(s2w)));
  int p11 = pb.ui(sf_2, wt);

  int r0 = pb.axiom("r_dcb");
  int ri = pb.ui(r0, vt(xb));
  Formula allv1r = pb.formula(ri).sub()[1];
  int p6a = pb.ui_imp(allv1r, impw);
  int uk0 = pb.axiom("uk_k");
  int uki = pb.ui(uk0, vt(xb));
  Formula allv1u = pb.formula(uki).sub()[1];
  int p8 = pb.ui_imp(allv1u, s1w);
  Formula allv2u = subst(allv1u.sub()[0].sub()[1], Var{1}, s1w);
  int p9 = pb.ui_imp(allv2u, s2w);

  Formula psi1_w = subst(psi1_y, y, wt);
  Formula psi2_w = subst(psi2_y, y, wt);
  int p12 = pb.ui_imp(psi1_w, vt(xb));
  Formula inst2 = subst(psi2_w.sub()[0], psi2_w.qvar(), vt(xb));

  std::optional<int> p3i;
  if (s.P3) {
    int p3l = pb.theorem("dcb", *s.P3);
    p3i = pb.ui(p3l, vt(xb));
  }

  Formula ant = Formula::land(Formula::land(L0w, P), psi1_w);
  Formula agxb = ag_at(vt(xb));
  int tQ1 = pb.taut(Formula::imp(Formula::land(L0w, P),
                                 Formula::pr("dcb", impw)),
                    {p1, p2, p3c});
  int tQ2 = pb.taut(
      Formula::imp(L0w, Formula::imp(agxb,
                                     Formula::imp(Formula::pr("dcb", impw),
                                                  k2(vt(xb), impw)))),
      {ri, p6a, p4});
  int tQ3 = pb.taut(
      Formula::imp(L0w,
                   Formula::imp(agxb,
                                Formula::imp(Formula::land(k2(vt(xb), s1w),
                                                           k2(vt(xb), impw)),
                                             k2(vt(xb), s2w)))),
      {uki, p8, p9, p10, p11});
  std::vector<int> prem = {tQ1, tQ2, tQ3, p12};
  if (p3i) prem.push_back(*p3i);
  int p13 = pb.taut(Formula::imp(ant, inst2), prem);
  int p15 = pb.ug(p13, xb);
  int p16 = pb.all_imp(p15);
  int p17 = pb.vac_imp(ant, xb);
  int p18 = pb.taut(
      Formula::imp(Formula::land(L0w, P), Formula::imp(psi1_w, psi2_w)),
      {p16, p17});

  int h1l = pb.theorem("dcb", s.H1);
  int h1w = pb.ui(h1l, wt);
  int h2l = pb.theorem("dcb", s.H2);
  int h2w = pb.ui(h2l, wt);
  Formula th_w = subst(s.theta, y, wt);
  Formula th2_w = subst(s.theta2, y, wt);
  int p20 = pb.taut(
      Formula::imp(Formula::land(L0w, P), Formula::imp(th_w, th2_w)),
      {p18, h1w, h2w});
  int p21 = pb.taut(
      Formula::imp(P, Formula::imp(L0w, Formula::imp(th_w, th2_w))), {p20});
  int p22 = pb.ug(p21, Var{w});
  int p23 = pb.all_imp(p22);
  int p24 = pb.vac_imp(P, Var{w});
  Formula fw = pb.formula(p23).sub()[1];
  int p25 = pb.taut(Formula::imp(P, fw), {p23, p24});
  int q1 = pb.ui_imp(fw, yt);
  int q2 = pb.taut(
      Formula::imp(P, Formula::imp(l0_at(yt),
                                   Formula::imp(s.theta, s.theta2))),
      {p25, q1});
  int q3 = pb.ug(q2, y);
  int q4 = pb.all_imp(q3);
  int q5 = pb.vac_imp(P, y);
  int q6 = pb.taut(Formula::imp(P, G), {q4, q5});
  return pb.loeb(q6);
}

Formula fwd_half(const CkEquivalence& ck) {
  return guard_l0(ck.u, Formula::imp(ck.ck, ck.psi));
}

Formula bwd_half(const CkEquivalence& ck) {
  return guard_l0(ck.u, Formula::imp(ck.psi, ck.ck));
}

// Checks the underlying witness and the guarded equivalence into the
// database, then splits the equivalence into its two guarded halves.
void add_cke(Build& b, const CkEquivalence& ck) {
  b.add(ck.fp.witness_proof);
  b.add(ck.guarded);
  Formula conc = ck.guarded.steps.back().formula;
  for (bool forward : {true, false}) {
    Formula half = forward ? fwd_half(ck) : bwd_half(ck);
    if (b.db->contains("dcb", half)) continue;
    ProofBuilder pb("dcb");
    int l = pb.theorem("dcb", conc);
    int i = pb.ui(l, vt(ck.u));
    int h = pb.taut(Formula::imp(l0_at(vt(ck.u)), half.sub()[0].sub()[1]),
                    {i});
    pb.ug(h, ck.u);
    b.add(pb.take());
  }
}

ScriptResult do_implied_ck(TheoremDB& db, const Formula& A,
                           const Formula& theta, const Formula& theta2,
                           const Formula& H1, const Formula& H2) {
  Build b(db, "implied_ck");
  if (!db.contains("dcb", H1) || !db.contains("dcb", H2)) {
    // The canonical halves of the unfolding equivalence may be derived on
    // demand; anything else must be supplied as a checked proof.
    if (A.free_vars().size() != 1) return b.error("missing hypothesis proof");
    CkEquivalence ck = make_ck(A);
    Formula f = fwd_half(ck), w = bwd_half(ck);
    if ((H1 == f || H1 == w) && (H2 == f || H2 == w))
      add_cke(b, ck);
    if (!db.contains("dcb", H1) || !db.contains("dcb", H2))
      return b.error("missing hypothesis proof");
  }
  if (theta.free_vars().size() != 1 || theta2.free_vars().size() != 1 ||
      theta.free_vars() != theta2.free_vars())
    return b.error("operators must share one free code variable");
  Var y{theta.free_vars()[0]};
  ProofBuilder pb("dcb");
  CoreSpec spec{theta, theta2, y, H1, H2, std::nullopt};
  dagger_core(pb, spec);
  b.add(pb.take());
  return b.finish("pointwise implication closed by self-certification");
}

// An alpha-variant unfolding operator over the same filter: same fixed-point
// construction, different bound agent variable, hence a different code.
struct VariantCk {
  Formula ck;
  Var u;
  Formula psi;
  FixedPointResult fp;
  Proof guarded;
};

VariantCk make_ck_variant(const Formula& A) {
  if (A.free_vars().size() != 1)
    throw Error("agent filter must have exactly one free variable");
  Var x{A.free_vars()[0]};
  int base_idx = fresh_var_index({A});
  Var u{base_idx};
  Var v{base_idx + 1};
  Var xp{std::max({x.index + 1, base_idx + 2, 5})};
  Formula Axp = subst(A, x, vt(xp));
  Term at_u = Term::dot(DotFn::Sbt,
                        {vt(v), Term::dot(DotFn::Gq, {vt(u)}),
                         numeral(var_code(u))});
  Formula body = Formula::land(k2(vt(xp), vt(u)), k2(vt(xp), at_u));
  Formula phi = guard_ag(xp, Formula::imp(Axp, body));

  VariantCk out;
  out.fp = fixed_point(phi, v);
  out.ck = out.fp.theta;
  out.u = u;
  out.psi = subst(phi, v, gq(out.ck));
  ProofBuilder pb("dcb");
  int imported = pb.theorem("base", out.fp.equivalence);
  int open = pb.ui(imported, vt(u));
  int guarded = pb.taut(Formula::imp(l0_at(vt(u)), pb.formula(open)), {open});
  pb.ug(guarded, u);
  out.guarded = pb.take();
  return out;
}

ScriptResult do_unique_ck(TheoremDB& db, const Formula& A) {
  Build b(db, "unique_ck");
  if (A.free_vars().size() != 1)
    return b.error("agent filter must have exactly one free variable");
  CkEquivalence ck = make_ck(A);
  add_cke(b, ck);
  VariantCk cv = make_ck_variant(A);
  b.add(cv.fp.witness_proof);
  b.add(cv.guarded);
  Formula conc2 = cv.guarded.steps.back().formula;
  Formula f2 = guard_l0(cv.u, Formula::imp(cv.ck, cv.psi));
  Formula w2 = guard_l0(cv.u, Formula::imp(cv.psi, cv.ck));
  for (const Formula& half : {f2, w2}) {
    if (db.contains("dcb", half)) continue;
    ProofBuilder pb("dcb");
    int l = pb.theorem("dcb", conc2);
    int i = pb.ui(l, vt(cv.u));
    int h = pb.taut(Formula::imp(l0_at(vt(cv.u)), half.sub()[0].sub()[1]),
                    {i});
    pb.ug(h, cv.u);
    b.add(pb.take());
  }
  if (ck.u != cv.u) return b.error("operators disagree on the code variable");
  Var u = ck.u;

  {
    ProofBuilder pb("dcb");
    CoreSpec spec{ck.ck, cv.ck, u, fwd_half(ck), w2, std::nullopt};
    dagger_core(pb, spec);
    b.add(pb.take());
  }
  {
    ProofBuilder pb("dcb");
    CoreSpec spec{cv.ck, ck.ck, u, f2, bwd_half(ck), std::nullopt};
    dagger_core(pb, spec);
    b.add(pb.take());
  }
  Formula leg1 = guard_l0(u, Formula::imp(ck.ck, cv.ck));
  Formula leg2 = guard_l0(u, Formula::imp(cv.ck, ck.ck));
  ProofBuilder pb("dcb");
  int l1 = pb.theorem("dcb", leg1);
  int l2 = pb.theorem("dcb", leg2);
  int u1 = pb.ui(l1, vt(u));
  int u2 = pb.ui(l2, vt(u));
  int t = pb.taut(
      Formula::imp(l0_at(vt(u)), Formula::iff(ck.ck, cv.ck)), {u1, u2});
  pb.ug(t, u);
  b.add(pb.take());
  return b.finish("both operators agree on every coded sentence");
}

// The unfolding equivalence at a literal code, with the coded substitution
// collapsed to a literal code of the instantiated operator.
struct GroundCke {
  Formula ck_at;
  Formula psi;
  int line;
};

GroundCke cke_ground(ProofBuilder& pb, int cke_thm, const CkEquivalence& ck,
                     const Formula& phi) {
  GroundCke out;
  int inst = pb.instantiate_guarded(cke_thm, gq(phi));
  out.ck_at = subst(ck.ck, ck.u, gq(phi));
  Term raw = Term::dot(DotFn::Sbt,
                       {gq(ck.ck), Term::dot(DotFn::Gq, {gq(phi)}),
                        numeral(var_code(ck.u))});
  int cb = pb.compute(Formula::eq(raw, gq(out.ck_at)));
  // The unfolding at the literal code, with the coded substitution collapsed
  // to the literal code of the instantiated operator.
  Var x = ck.psi.qvar();
  Formula filter = ck.psi.sub()[0].sub()[1].sub()[0];
  out.psi = guard_ag(
      x, Formula::imp(filter,
                      Formula::land(k2(Term::var(x), gq(phi)),
                                    k2(Term::var(x), gq(out.ck_at)))));
  out.line = pb.eq_cong(cb, inst, Formula::iff(out.ck_at, out.psi));
  return out;
}

ScriptResult do_conj_ck(TheoremDB& db, const Formula& A, const Formula& phi,
                        const Formula& psi) {
  Build b(db, "conj_ck");
  if (A.free_vars().size() != 1)
    return b.error("agent filter must have exactly one free variable");
  if (!phi.sentence() || !psi.sentence())
    return b.error("conjuncts must be sentences");
  CkEquivalence ck = make_ck(A);
  add_cke(b, ck);
  Var x{A.free_vars()[0]};
  Formula chi = Formula::land(phi, psi);
  Formula cke_conc = ck.guarded.steps.back().formula;

  Formula ck_phi = subst(ck.ck, ck.u, gq(phi));
  Formula ck_psi = subst(ck.ck, ck.u, gq(psi));
  Formula ck_chi = subst(ck.ck, ck.u, gq(chi));
  Formula thc = Formula::land(ck_phi, ck_psi);
  Formula Gc = Formula::imp(thc, ck_chi);
  Formula Gd = Formula::imp(ck_chi, thc);

  Formula T1 = Formula::imp(phi, Formula::imp(psi, chi));
  Formula T2 = Formula::imp(ck_phi, Formula::imp(ck_psi, thc));
  Formula T3 = Formula::imp(chi, phi);
  Formula T4 = Formula::imp(chi, psi);
  Formula T5 = Formula::imp(thc, ck_phi);
  Formula T6 = Formula::imp(thc, ck_psi);
  for (const Formula& t : {T1, T2, T3, T4, T5, T6}) b.ensure_taut("dcb", t);

  ProofBuilder pb("dcb");
  int ckel = pb.theorem("dcb", cke_conc);
  int r0 = pb.axiom("r_dcb");
  int ri = pb.ui(r0, vt(x));
  Formula allv1r = pb.formula(ri).sub()[1];
  int uk0 = pb.axiom("uk_k");
  int uka = pb.ui(uk0, vt(x));
  GroundCke gphi = cke_ground(pb, ckel, ck, phi);
  GroundCke gpsi = cke_ground(pb, ckel, ck, psi);
  GroundCke gchi = cke_ground(pb, ckel, ck, chi);
  int iphi = pb.ui_imp(gphi.psi, vt(x));
  int ipsi = pb.ui_imp(gpsi.psi, vt(x));
  int ichi = pb.ui_imp(gchi.psi, vt(x));
  Formula A_at = A;  // the filter's free variable is x itself
  Formula Pc = Formula::pr("dcb", gq(Gc));
  Formula Pd = Formula::pr("dcb", gq(Gd));

  // Direction 1: common knowledge of both conjuncts yields the conjunction.
  int rc1 = pb.ui_imp(allv1r, gq(Gc));
  int cc1 = pb.compute(l0_at(gq(Gc)));
  int kT1 = knows_theorem(pb, ri, x, T1);
  int ua1 = uk_pointwise(pb, uka, x, phi, Formula::imp(psi, chi));
  int ua2 = uk_pointwise(pb, uka, x, psi, chi);
  int kT2 = knows_theorem(pb, ri, x, T2);
  int ub1 = uk_pointwise(pb, uka, x, ck_phi, Formula::imp(ck_psi, thc));
  int ub2 = uk_pointwise(pb, uka, x, ck_psi, thc);
  int uc = uk_pointwise(pb, uka, x, thc, ck_chi);
  Formula agx = ag_at(vt(x));
  Formula antA = Formula::land(thc, Formula::land(agx, A_at));
  Formula pair_full = Formula::land(
      Formula::land(k2(vt(x), gq(phi)), k2(vt(x), gq(ck_phi))),
      Formula::land(k2(vt(x), gq(psi)), k2(vt(x), gq(ck_psi))));
  int tA = pb.taut(Formula::imp(antA, pair_full),
                   {gphi.line, iphi, gpsi.line, ipsi});
  int tB = pb.taut(Formula::imp(antA, k2(vt(x), gq(chi))),
                   {tA, kT1, ua1, ua2});
  int tC = pb.taut(Formula::imp(Formula::land(Pc, antA),
                                k2(vt(x), gq(ck_chi))),
                   {tA, kT2, ub1, ub2, ri, rc1, cc1, uc});
  Formula inst_chi = gchi.psi.sub()[0];
  int big1 = pb.taut(Formula::imp(Formula::land(Pc, thc), inst_chi),
                     {tB, tC});
  Formula ctx1 = Formula::land(Pc, thc);
  int g1 = pb.ug(big1, x);
  int ai1 = pb.all_imp(g1);
  int vi1 = pb.vac_imp(ctx1, x);
  int cl1 = pb.taut(Formula::imp(ctx1, gchi.psi), {ai1, vi1});
  int d1g = pb.taut(Formula::imp(Pc, Gc), {cl1, gchi.line});
  int lb1 = pb.loeb(d1g);

  // Direction 2: common knowledge of the conjunction splits.
  int rc2 = pb.ui_imp(allv1r, gq(Gd));
  int cc2 = pb.compute(l0_at(gq(Gd)));
  int kT3 = knows_theorem(pb, ri, x, T3);
  int ud1 = uk_pointwise(pb, uka, x, chi, phi);
  int kT4 = knows_theorem(pb, ri, x, T4);
  int ud2 = uk_pointwise(pb, uka, x, chi, psi);
  int ue0 = uk_pointwise(pb, uka, x, ck_chi, thc);
  int kT5 = knows_theorem(pb, ri, x, T5);
  int ue1 = uk_pointwise(pb, uka, x, thc, ck_phi);
  int kT6 = knows_theorem(pb, ri, x, T6);
  int ue2 = uk_pointwise(pb, uka, x, thc, ck_psi);
  Formula antD = Formula::land(Pd, Formula::land(ck_chi,
                                                 Formula::land(agx, A_at)));
  int tD = pb.taut(
      Formula::imp(antD,
                   Formula::land(k2(vt(x), gq(chi)),
                                 k2(vt(x), gq(ck_chi)))),
      {gchi.line, ichi});
  int tE = pb.taut(
      Formula::imp(antD, Formula::land(k2(vt(x), gq(phi)),
                                       k2(vt(x), gq(ck_phi)))),
      {tD, kT3, ud1, ri, rc2, cc2, ue0, kT5, ue1});
  int tF = pb.taut(
      Formula::imp(antD, Formula::land(k2(vt(x), gq(psi)),
                                       k2(vt(x), gq(ck_psi)))),
      {tD, kT4, ud2, ri, rc2, cc2, ue0, kT6, ue2});
  Formula ctx2 = Formula::land(Pd, ck_chi);
  int bphi = pb.taut(Formula::imp(ctx2, gphi.psi.sub()[0]), {tE});
  int bpsi = pb.taut(Formula::imp(ctx2, gpsi.psi.sub()[0]), {tF});
  int g2 = pb.ug(bphi, x);
  int ai2 = pb.all_imp(g2);
  int vi2 = pb.vac_imp(ctx2, x);
  int clphi = pb.taut(Formula::imp(ctx2, gphi.psi), {ai2, vi2});
  int g3 = pb.ug(bpsi, x);
  int ai3 = pb.all_imp(g3);
  int clpsi = pb.taut(Formula::imp(ctx2, gpsi.psi), {ai3, vi2});
  int d2g = pb.taut(Formula::imp(Pd, Gd),
                    {clphi, clpsi, gphi.line, gpsi.line});
  int lb2 = pb.loeb(d2g);

  pb.taut(Formula::iff(thc, ck_chi), {lb1, lb2});
  b.add(pb.take());
  return b.finish("common knowledge distributes over the conjunction");
}

// Shared relativized-transfer core; conclusion routes theta2's code through
// the coded identity outside the certified implication.
ScriptResult do_general_ck(TheoremDB& db, const std::string& id,
                           const Formula& A, const Formula& B,
                           const Formula& theta, const Formula& theta2,
                           DotFn f) {
  Build b(db, id);
  if (f != DotFn::Id)
    return b.error("only the coded identity routing is mechanized");
  if (A.free_vars().size() != 1 || B.free_vars().size() != 1)
    return b.error("agent filters must have exactly one free variable");
  CkEquivalence cka = make_ck(A);
  CkEquivalence ckb = make_ck(B);
  if (!(theta == cka.ck) || !(theta2 == ckb.ck))
    return b.error("operators must be the unfolding operators of the filters");
  if (cka.u != ckb.u) return b.error("operators disagree on the code variable");
  Var u = cka.u;
  Var xb{B.free_vars()[0]};
  add_cke(b, cka);
  add_cke(b, ckb);

  Formula A_at_xb = subst(A, Var{A.free_vars()[0]}, vt(xb));
  Formula P3 = Formula::forall(xb, Formula::imp(B, A_at_xb));
  if (!db.contains("dcb", P3)) {
    // The subfilter premise is provable outright only in trivial shapes.
    bool proved = false;
    if (A_at_xb.kind() == FormulaKind::Atom && A_at_xb.pred() == PredSym::Eq &&
        A_at_xb.terms()[0] == A_at_xb.terms()[1]) {
      ProofBuilder pd("dcb");
      int er = pd.eq_refl(A_at_xb.terms()[0]);
      int tt = pd.taut(Formula::imp(B, A_at_xb), {er});
      pd.ug(tt, xb);
      proved = b.add(pd.take());
    } else if (A_at_xb == B) {
      ProofBuilder pd("dcb");
      int tt = pd.taut(Formula::imp(B, A_at_xb));
      pd.ug(tt, xb);
      proved = b.add(pd.take());
    }
    if (!proved || !db.contains("dcb", P3))
      return b.error("missing hypothesis proof");
  }

  // The routing premise: agents' knowledge respects the coded identity.
  Term yt = vt(u);
  Term idy = Term::dot(DotFn::Id, {yt});
  Formula P4 = guard_l0(
      u, guard_ag(xb, Formula::imp(B, Formula::imp(k2(vt(xb), yt),
                                                   k2(vt(xb), idy)))));
  if (!db.contains("dcb", P4)) {
    ProofBuilder pd("dcb");
    int sf = pd.syntax_fact(guard_l0(u, Formula::eq(yt, idy)));
    int r2 = pd.ui(sf, yt);
    int c = pd.cong_imp(Formula::eq(yt, idy), k2(vt(xb), yt),
                        k2(vt(xb), idy));
    int t = pd.taut(
        Formula::imp(l0_at(yt),
                     Formula::imp(ag_at(vt(xb)),
                                  Formula::imp(B, Formula::imp(k2(vt(xb), yt),
                                                               k2(vt(xb), idy))))),
        {r2, c});
    int gx = pd.ug(t, xb);
    int ai = pd.all_imp(gx);
    int vi = pd.vac_imp(l0_at(yt), xb);
    int t2 = pd.taut(Formula::imp(l0_at(yt), pd.formula(ai).sub()[1]),
                     {ai, vi});
    pd.ug(t2, u);
    if (!b.add(pd.take())) return b.error("routing premise rejected");
  }

  ProofBuilder pb("dcb");
  CoreSpec spec{theta, theta2, u, fwd_half(cka), bwd_half(ckb), P3};
  int g0 = dagger_core(pb, spec);
  int sfid = pb.syntax_fact(guard_l0(u, Formula::eq(yt, idy)));
  int r2 = pb.ui(sfid, yt);
  int u1 = pb.ui(g0, yt);
  Formula th2_id = subst(theta2, u, idy);
  int r3 = pb.cong_imp(Formula::eq(yt, idy), theta2, th2_id);
  int t = pb.taut(
      Formula::imp(l0_at(yt), Formula::imp(theta, th2_id)), {u1, r2, r3});
  pb.ug(t, u);
  b.add(pb.take());
  return b.finish("relativized transfer closed; code routed through the "
                  "identity after certification");
}

ScriptResult do_ck_main(TheoremDB& db, const Formula& A) {
  Build b(db, "ck_main");
  if (A.free_vars().size() != 1)
    return b.error("agent filter must have exactly one free variable");
  CkEquivalence ck = make_ck(A);
  add_cke(b, ck);
  Var x{A.free_vars()[0]};
  Var u = ck.u;
  Formula cke_conc = ck.guarded.steps.back().formula;

  // (a) closure under coded modus ponens, on a named ground instance.
  Formula phi = Formula::eq(Term::zero(), Term::zero());
  Formula psi = Formula::eq(Term::succ(Term::zero()), Term::succ(Term::zero()));
  Formula phipsi = Formula::imp(phi, psi);
  {
    Formula ck_phi = subst(ck.ck, u, gq(phi));
    Formula ck_imp = subst(ck.ck, u, gq(phipsi));
    Formula ck_psi = subst(ck.ck, u, gq(psi));
    Formula thc = Formula::land(ck_phi, ck_imp);
    Formula G = Formula::imp(thc, ck_psi);
    Formula P = Formula::pr("dcb", gq(G));
    Formula T2 = Formula::imp(ck_phi, Formula::imp(ck_imp, thc));
    b.ensure_taut("dcb", T2);

    ProofBuilder pb("dcb");
    int ckel = pb.theorem("dcb", cke_conc);
    int r0 = pb.axiom("r_dcb");
    int ri = pb.ui(r0, vt(x));
    Formula allv1r = pb.formula(ri).sub()[1];
    int uk0 = pb.axiom("uk_k");
    int uka = pb.ui(uk0, vt(x));
    GroundCke gphi = cke_ground(pb, ckel, ck, phi);
    GroundCke gimp = cke_ground(pb, ckel, ck, phipsi);
    GroundCke gpsi = cke_ground(pb, ckel, ck, psi);
    int iphi = pb.ui_imp(gphi.psi, vt(x));
    int iimp = pb.ui_imp(gimp.psi, vt(x));
    int rg = pb.ui_imp(allv1r, gq(G));
    int cg = pb.compute(l0_at(gq(G)));
    int u1 = uk_pointwise(pb, uka, x, phi, psi);
    int kT2 = knows_theorem(pb, ri, x, T2);
    int ub1 = uk_pointwise(pb, uka, x, ck_phi, Formula::imp(ck_imp, thc));
    int ub2 = uk_pointwise(pb, uka, x, ck_imp, thc);
    int uc = uk_pointwise(pb, uka, x, thc, ck_psi);
    Formula agx = ag_at(vt(x));
    Formula ant = Formula::land(P, Formula::land(thc, Formula::land(agx, A)));
    int tA = pb.taut(
        Formula::imp(ant, Formula::land(
                              Formula::land(k2(vt(x), gq(phi)),
                                            k2(vt(x), gq(ck_phi))),
                              Formula::land(k2(vt(x), gq(phipsi)),
                                            k2(vt(x), gq(ck_imp))))),
        {gphi.line, iphi, gimp.line, iimp});
    int tB = pb.taut(Formula::imp(ant, k2(vt(x), gq(psi))), {tA, u1});
    int tC = pb.taut(Formula::imp(ant, k2(vt(x), gq(ck_psi))),
                     {tA, kT2, ub1, ub2, ri, rg, cg, uc});
    Formula ctx = Formula::land(P, thc);
    int big = pb.taut(Formula::imp(ctx, gpsi.psi.sub()[0]), {tB, tC});
    int g = pb.ug(big, x);
    int ai = pb.all_imp(g);
    int vi = pb.vac_imp(ctx, x);
    int cl = pb.taut(Formula::imp(ctx, gpsi.psi), {ai, vi});
    int dg = pb.taut(Formula::imp(P, G), {cl, gpsi.line});
    pb.loeb(dg);
    if (!b.add(pb.take())) return b.error("closure instance rejected");
  }

  // (b) everything the base epistemic system proves is commonly known.  The
  // internalized completeness template fixes the code variable, so the
  // filter's operator must use the same one.
  if (u != Var{1})
    return b.error("filter must yield the standard code variable");
  Formula theta = Formula::pr("dcb", vt(u));
  Term s_th_u = code_at(theta, u, vt(u));
  Formula pair = Formula::land(k2(vt(x), vt(u)), k2(vt(x), s_th_u));
  Formula psi1 = guard_ag(x, Formula::imp(A, pair));
  Formula H1 = guard_l0(u, Formula::imp(theta, psi1));
  Formula G_b = guard_l0(u, Formula::imp(theta, ck.ck));
  {
    ProofBuilder pb("dcb");
    int r0 = pb.axiom("r_dcb");
    int ri = pb.ui(r0, vt(x));
    Formula allv1r = pb.formula(ri).sub()[1];
    int a1 = pb.ui_imp(allv1r, vt(u));
    int ps = pb.pr_sigma("dcb");
    int psw = pb.ui(ps, vt(u));
    int a2 = pb.ui_imp(allv1r, s_th_u);
    int sf = pb.syntax_fact(guard_l0(u, l0_at(s_th_u)));
    int sfu = pb.ui(sf, vt(u));
    int big = pb.taut(
        Formula::imp(l0_at(vt(u)),
                     Formula::imp(theta,
                                  Formula::imp(ag_at(vt(x)),
                                               Formula::imp(A, pair)))),
        {ri, a1, psw, a2, sfu});
    Formula ctx = Formula::land(l0_at(vt(u)), theta);
    int t2 = pb.taut(
        Formula::imp(ctx, Formula::imp(ag_at(vt(x)), Formula::imp(A, pair))),
        {big});
    int g = pb.ug(t2, x);
    int ai = pb.all_imp(g);
    int vi = pb.vac_imp(ctx, x);
    int t3 = pb.taut(Formula::imp(ctx, psi1), {ai, vi});
    int t4 = pb.taut(Formula::imp(l0_at(vt(u)), Formula::imp(theta, psi1)),
                     {t3});
    pb.ug(t4, u);
    if (!b.add(pb.take())) return b.error("reflection hypothesis rejected");
  }
  {
    ProofBuilder pb("dcb");
    CoreSpec spec{theta, ck.ck, u, H1, bwd_half(ck), std::nullopt};
    dagger_core(pb, spec);
    if (!b.add(pb.take())) return b.error("certified implication rejected");
  }

  // (c) a worked corollary: the named equation is commonly known.
  {
    ProofBuilder pd("dcb");
    pd.compute(Formula::eq(Term::zero(), Term::zero()));
    if (!b.add(pd.take())) return b.error("ground equation rejected");
  }
  {
    Formula zz = Formula::eq(Term::zero(), Term::zero());
    ProofBuilder pb("dcb");
    int dd = pb.d1("dcb", zz);
    int bl = pb.theorem("dcb", G_b);
    int bi = pb.instantiate_guarded(bl, gq(zz));
    pb.mp(bi, dd);
    b.add(pb.take());
  }
  return b.finish("closure, reflection and the worked corollary established");
}

// ---------- instances of the term-value axioms ----------

void uns_instance(Build& b, const Term& s, const Term& t, Var v,
                  const Formula& phi) {
  Formula phis = subst(phi, v, s);
  Formula phit = subst(phi, v, t);
  Formula Pst = Formula::imp(phis, phit);
  Formula Pts = Formula::imp(phit, phis);
  if (!b.db->contains("dcb", Pst)) {
    ProofBuilder pd("dcb");
    int c = pd.compute(Formula::eq(s, t));
    int t0 = pd.taut(Formula::imp(phis, phis));
    pd.eq_cong(c, t0, Pst);
    b.add(pd.take());
  }
  if (!b.db->contains("dcb", Pts)) {
    ProofBuilder pd("dcb");
    int c = pd.compute(Formula::eq(t, s));
    int t0 = pd.taut(Formula::imp(phit, phit));
    pd.eq_cong(c, t0, Pts);
    b.add(pd.take());
  }

  Term sc = numeral(gc(s));
  Term tc = numeral(gc(t));
  Term vc = numeral(var_code(v));
  Term sub_s = Term::dot(DotFn::Sbt, {gq(phi), sc, vc});
  Term sub_t = Term::dot(DotFn::Sbt, {gq(phi), tc, vc});
  Formula ante = Formula::eq(Term::dot(DotFn::Ev, {sc}),
                             Term::dot(DotFn::Ev, {tc}));

  ProofBuilder pb("kt");
  int r0 = pb.axiom("r_dcb");
  int ri = pb.ui(r0, vt(0));
  Formula allv1r = pb.formula(ri).sub()[1];
  int d1s = pb.d1("dcb", Pst);
  int us = pb.ui_imp(allv1r, gq(Pst));
  int cs = pb.compute(l0_at(gq(Pst)));
  int d1t = pb.d1("dcb", Pts);
  int ut = pb.ui_imp(allv1r, gq(Pts));
  int ct = pb.compute(l0_at(gq(Pts)));
  int uk0 = pb.axiom("uk_k");
  int uka = pb.ui(uk0, vt(0));
  int uk1 = uk_pointwise(pb, uka, Var{0}, phis, phit);
  int uk2 = uk_pointwise(pb, uka, Var{0}, phit, phis);
  int tk = pb.taut(
      Formula::imp(ag_at(vt(0)),
                   Formula::iff(k2(vt(0), gq(phis)), k2(vt(0), gq(phit)))),
      {ri, d1s, us, cs, uk1, d1t, ut, ct, uk2});
  int bs = pb.compute(Formula::eq(gq(phis), sub_s));
  int e1 = pb.eq_cong(bs, tk,
                      Formula::imp(ag_at(vt(0)),
                                   Formula::iff(k2(vt(0), sub_s),
                                                k2(vt(0), gq(phit)))));
  int bt = pb.compute(Formula::eq(gq(phit), sub_t));
  int e2 = pb.eq_cong(bt, e1,
                      Formula::imp(ag_at(vt(0)),
                                   Formula::iff(k2(vt(0), sub_s),
                                                k2(vt(0), sub_t))));
  int ca = pb.compute(ante);
  int tw = pb.taut(
      Formula::imp(ag_at(vt(0)),
                   Formula::imp(ante, Formula::iff(k2(vt(0), sub_s),
                                                   k2(vt(0), sub_t)))),
      {e2, ca});
  pb.ug(tw, Var{0});
  b.add(pb.take());
}

void und_instance(Build& b, const Term& s, const Term& t) {
  Formula N = Formula::lnot(Formula::eq(s, t));
  if (!b.db->contains("dcb", N)) {
    ProofBuilder pd("dcb");
    pd.compute(N);
    b.add(pd.take());
  }
  Term sc = numeral(gc(s));
  Term tc = numeral(gc(t));
  Formula ante = Formula::lnot(Formula::eq(Term::dot(DotFn::Ev, {sc}),
                                           Term::dot(DotFn::Ev, {tc})));
  Term neq_code = Term::dot(DotFn::NeqA, {sc, tc});

  ProofBuilder pb("kt");
  int r0 = pb.axiom("r_dcb");
  int ri = pb.ui(r0, vt(0));
  Formula allv1r = pb.formula(ri).sub()[1];
  int dn = pb.d1("dcb", N);
  int un = pb.ui_imp(allv1r, gq(N));
  int cn = pb.compute(l0_at(gq(N)));
  int tn = pb.taut(Formula::imp(ag_at(vt(0)), k2(vt(0), gq(N))),
                   {ri, dn, un, cn});
  int bn = pb.compute(Formula::eq(gq(N), neq_code));
  int e = pb.eq_cong(bn, tn,
                     Formula::imp(ag_at(vt(0)), k2(vt(0), neq_code)));
  int ca = pb.compute(ante);
  int tw = pb.taut(
      Formula::imp(ag_at(vt(0)), Formula::imp(ante, k2(vt(0), neq_code))),
      {e, ca});
  pb.ug(tw, Var{0});
  b.add(pb.take());
}

ScriptResult do_kt_proves_befs(TheoremDB& db, int sample) {
  Build b(db, "kt_proves_befs_instances");
  if (sample < 1) return b.error("sample must be positive");
  Var v{7};
  std::vector<Formula> shapes = {
      Formula::atom(PredSym::U, {vt(v)}), tf_at(vt(v)), k1(vt(v)),
      Formula::eq(vt(v), vt(v))};
  int uns = 0, und = 0;
  for (int i = 0; i < sample; ++i) {
    Nat a = i + 1, c = i + 2;
    Term s = Term::plus(numeral(a), numeral(c));
    Term t = numeral(a + c);
    uns_instance(b, s, t, v, shapes[i % shapes.size()]);
    ++uns;
  }
  for (int i = 0; i < sample; ++i) {
    Term s = numeral(i);
    Term t = i % 2 == 0 ? Term::succ(numeral(i)) : numeral(i + 2);
    und_instance(b, s, t);
    ++und;
  }

  // The two composite-rule replays that close the axiomatization gap.
  {
    ProofBuilder pb("kt_ubf_ia");
    int c = pb.compute(Formula::eq(Term::zero(), Term::zero()));
    int n = pb.nec_t(c);
    int cn = pb.conec_t(n);
    pb.nec_k(cn);
    b.add(pb.take());
  }
  {
    ProofBuilder pb("befs_v_rdcb");
    int c = pb.compute(Formula::eq(Term::zero(), Term::zero()));
    int n = pb.nec_t(c);
    pb.t_over_k(n);
    b.add(pb.take());
  }
  std::ostringstream os;
  os << uns << " same-value and " << und
     << " distinct-value instances proved; both composite-rule replays check";
  return b.finish(os.str());
}

}  // namespace

// ---------- public surface ----------

ScriptResult script_kaplan_montague(TheoremDB& db) {
  return do_kaplan_montague(db);
}
ScriptResult script_montague(TheoremDB& db) { return do_montague(db); }
ScriptResult script_u4_inconsistency(TheoremDB& db) {
  return do_u4_inconsistency(db);
}
ScriptResult script_tb_transfer(TheoremDB& db, const Formula& phi,
                                const std::string& ext) {
  return do_tb_transfer(db, phi, ext);
}
ScriptResult script_tb_transfer_nested(TheoremDB& db) {
  return do_tb_transfer_nested(db);
}
ScriptResult script_implied_ck(TheoremDB& db, const Formula& A,
                               const Formula& theta, const Formula& theta2,
                               const Formula& H1, const Formula& H2) {
  return do_implied_ck(db, A, theta, theta2, H1, H2);
}
ScriptResult script_unique_ck(TheoremDB& db, const Formula& A) {
  return do_unique_ck(db, A);
}
ScriptResult script_conj_ck(TheoremDB& db, const Formula& A,
                            const Formula& phi, const Formula& psi) {
  return do_conj_ck(db, A, phi, psi);
}
ScriptResult script_general_ck(TheoremDB& db, const Formula& A,
                               const Formula& B, const Formula& theta,
                               const Formula& theta2, DotFn f) {
  return do_general_ck(db, "general_ck", A, B, theta, theta2, f);
}
ScriptResult script_monotone_ck(TheoremDB& db, const Formula& A,
                                const Formula& B, DotFn f) {
  CkEquivalence cka = make_ck(A);
  CkEquivalence ckb = make_ck(B);
  return do_general_ck(db, "monotone_ck", A, B, cka.ck, ckb.ck, f);
}
ScriptResult script_ck_main(TheoremDB& db, const Formula& A) {
  return do_ck_main(db, A);
}
ScriptResult script_kt_proves_befs_instances(TheoremDB& db, int sample) {
  return do_kt_proves_befs(db, sample);
}

std::vector<ScriptResult> run_all_scripts(TheoremDB& db) {
  std::vector<ScriptResult> out;
  out.push_back(script_kaplan_montague(db));
  out.push_back(script_montague(db));
  out.push_back(script_u4_inconsistency(db));
  out.push_back(script_tb_transfer(db, Formula::eq(Term::zero(), Term::zero()),
                                   "kt_ia"));
  out.push_back(script_tb_transfer_nested(db));
  Formula allf = ag_at(vt(0));
  {
    CkEquivalence ck = make_ck(allf);
    Formula f = guard_l0(ck.u, Formula::imp(ck.ck, ck.psi));
    Formula w = guard_l0(ck.u, Formula::imp(ck.psi, ck.ck));
    out.push_back(script_implied_ck(db, allf, ck.ck, ck.ck, f, w));
  }
  out.push_back(script_unique_ck(db, allf));
  out.push_back(script_conj_ck(
      db, allf, Formula::eq(Term::zero(), Term::zero()),
      Formula::eq(Term::succ(Term::zero()), Term::succ(Term::zero()))));
  Formula every = Formula::eq(vt(0), vt(0));
  {
    CkEquivalence cka = make_ck(every);
    CkEquivalence ckb = make_ck(allf);
    out.push_back(
        script_general_ck(db, every, allf, cka.ck, ckb.ck, DotFn::Id));
  }
  out.push_back(script_monotone_ck(db, every, allf, DotFn::Id));
  out.push_back(script_ck_main(db, allf));
  out.push_back(script_kt_proves_befs_instances(db, 20));
  return out;
}

CheckResult replay_final_against(const ScriptResult& r,
                                 const std::string& system) {
  TheoremDB scratch;
  for (std::size_t i = 0; i + 1 < r.proofs.size(); ++i)
    check_proof(r.proofs[i], scratch);
  if (r.proofs.empty()) {
    CheckResult c;
    c.reason = "no proofs to replay";
    return c;
  }
  Proof p = r.proofs.back();
  p.system = system;
  return check_proof(p, scratch);
}

std::string format_script_table(const std::vector<ScriptResult>& rs) {
  std::size_t wid = 4;
  for (const ScriptResult& r : rs) wid = std::max(wid, r.id.size());
  std::ostringstream os;
  for (const ScriptResult& r : rs) {
    os << (r.accepted ? "PASS" : "FAIL") << "  " << r.id;
    for (std::size_t i = r.id.size(); i < wid + 2; ++i) os << ' ';
    os << r.detail << "\n";
  }
  return os.str();
}

}  // namespace ktlab
