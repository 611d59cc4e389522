#include "ktlab/systems.hpp"

#include <algorithm>
#include <sstream>

namespace ktlab {

namespace {

Term v(int i) { return Term::var(i); }

Term d1(DotFn f, const Term& a) { return Term::dot(f, {a}); }
Term d2(DotFn f, const Term& a, const Term& b) { return Term::dot(f, {a, b}); }
Term d3(DotFn f, const Term& a, const Term& b, const Term& c) {
  return Term::dot(f, {a, b, c});
}

Formula tf(const Term& code) { return Formula::atom(PredSym::T, {code}); }
Formula ag(const Term& t) { return Formula::atom(PredSym::Ag, {t}); }

Formula l1(const Term& code, const Term& var_code) {
  return Formula::datom(DotPred::L1, {code, var_code});
}

}  // namespace

Formula k1(const Term& code) { return Formula::atom(PredSym::K1, {code}); }
Formula k2(const Term& agent, const Term& code) {
  return Formula::atom(PredSym::K2, {agent, code});
}

Formula falsum() { return Formula::eq(Term::zero(), Term::succ(Term::zero())); }

Formula guard_l0(Var w, const Formula& body) {
  return Formula::forall(
      w, Formula::imp(Formula::datom(DotPred::L0, {Term::var(w)}), body));
}

Formula guard_ag(Var w, const Formula& body) {
  return Formula::forall(w, Formula::imp(ag(Term::var(w)), body));
}

Formula guard_var(Var w, const Formula& body) {
  return Formula::forall(
      w, Formula::imp(Formula::datom(DotPred::VarP, {Term::var(w)}), body));
}

Formula guard_term0pa(Var w, const Formula& body) {
  return Formula::forall(
      w, Formula::imp(Formula::datom(DotPred::Term0PA, {Term::var(w)}), body));
}

Formula guard_term0(Var w, const Formula& body) {
  return Formula::forall(
      w, Formula::imp(Formula::datom(DotPred::Term0L, {Term::var(w)}), body));
}

const char* rule_name(RuleId r) {
  switch (r) {
    case RuleId::MP: return "mp";
    case RuleId::UG: return "ug";
    case RuleId::NecT: return "nec_t";
    case RuleId::ConecT: return "conec_t";
    case RuleId::NecK: return "nec_k";
    case RuleId::NecK1: return "nec_k1";
    case RuleId::TOverK: return "t_over_k";
  }
  return "?";
}

const char* schema_name(SchemaId s) {
  switch (s) {
    case SchemaId::Induction: return "induction";
    case SchemaId::UctAtom: return "uct_atom";
    case SchemaId::UtK: return "ut_k";
    case SchemaId::KUtK: return "k_ut_k";
    case SchemaId::IK: return "i_k";
    case SchemaId::TB: return "tb";
    case SchemaId::U4Instance: return "u4_instance";
  }
  return "?";
}

std::optional<RuleId> rule_by_name(const std::string& s) {
  for (RuleId r : {RuleId::MP, RuleId::UG, RuleId::NecT, RuleId::ConecT,
                   RuleId::NecK, RuleId::NecK1, RuleId::TOverK}) {
    if (s == rule_name(r)) return r;
  }
  return std::nullopt;
}

std::optional<SchemaId> schema_by_name(const std::string& s) {
  for (SchemaId id :
       {SchemaId::Induction, SchemaId::UctAtom, SchemaId::UtK, SchemaId::KUtK,
        SchemaId::IK, SchemaId::TB, SchemaId::U4Instance}) {
    if (s == schema_name(id)) return id;
  }
  return std::nullopt;
}

// ---------- schema instantiation ----------

namespace {

void require_sentence(const Formula& f, const char* what) {
  if (!f.ok()) throw Error(std::string(what) + ": missing formula parameter");
  if (f.has_meta())
    throw Error(std::string(what) + ": parameter contains placeholders");
  if (!f.sentence())
    throw Error(std::string(what) + ": parameter must be a sentence, got " +
                to_string(f));
}

Formula close_universally(Formula f) {
  std::vector<int> free = f.free_vars();
  for (auto it = free.rbegin(); it != free.rend(); ++it)
    f = Formula::forall(Var{*it}, f);
  return f;
}

Formula make_induction(const Formula& phi, Var iv) {
  if (!phi.ok()) throw Error("induction: missing formula parameter");
  if (phi.has_meta()) throw Error("induction: parameter contains placeholders");
  Formula base = subst(phi, iv, Term::zero());
  Formula step =
      Formula::forall(iv, Formula::imp(phi, subst(phi, iv, Term::succ(Term::var(iv)))));
  Formula concl = Formula::forall(iv, phi);
  return close_universally(
      Formula::imp(Formula::land(base, step), concl));
}

// Disquotation for one atomic formula A(x1..xn) of the truth-free,
// knowledge-free sublanguage: quantify over codes of closed arithmetic terms
// w1..wn and state T(code of A(t_w1..t_wn)) <-> A(val(w1)..val(wn)).
Formula make_uct_atom(const Formula& a) {
  if (!a.ok()) throw Error("uct_atom: missing formula parameter");
  if (a.has_meta()) throw Error("uct_atom: parameter contains placeholders");
  if (a.kind() != FormulaKind::Atom || !a.in_lminus())
    throw Error("uct_atom: parameter must be an atomic formula without T, K "
                "or provability, got " + to_string(a));
  const std::vector<int>& xs = a.free_vars();
  const int n = static_cast<int>(xs.size());
  if (n == 0) return Formula::iff(tf(gq(a)), a);

  int base = xs.back() + 1;
  std::vector<Term> ws;
  for (int i = 0; i < n; ++i) ws.push_back(v(base + i));

  // Left side: the code of A with each variable replaced by the coded term wi.
  // When A applies a primitive predicate to the bare variables in ascending
  // order the dotted atom builders produce the code directly; otherwise fold
  // substitution over the quoted formula.
  Term lhs_code;
  bool bare_vars = a.terms().size() == static_cast<std::size_t>(n);
  for (std::size_t i = 0; bare_vars && i < a.terms().size(); ++i) {
    const Term& t = a.terms()[i];
    if (t.kind() != TermKind::VarT ||
        t.var_of().index != xs[static_cast<int>(i)])
      bare_vars = false;
  }
  if (bare_vars) {
    switch (a.pred()) {
      case PredSym::Eq: lhs_code = d2(DotFn::EqA, ws[0], ws[1]); break;
      case PredSym::U: lhs_code = d1(DotFn::UA, ws[0]); break;
      case PredSym::Ag: lhs_code = d1(DotFn::AgA, ws[0]); break;
      default: bare_vars = false; break;
    }
  }
  if (!bare_vars) {
    lhs_code = gq(a);
    for (int i = 0; i < n; ++i)
      lhs_code = d3(DotFn::Sbt, lhs_code, ws[i], numeral(var_code(Var{xs[i]})));
  }

  Formula rhs = a;
  for (int i = 0; i < n; ++i)
    rhs = subst(rhs, Var{xs[i]}, d1(DotFn::Ev, ws[i]));

  Formula body = Formula::iff(tf(lhs_code), rhs);
  for (int i = n - 1; i >= 0; --i)
    body = guard_term0pa(Var{base + i}, body);
  return body;
}

}  // namespace

Formula induction_instance(const Formula& phi, Var iv) {
  return make_induction(phi, iv);
}

Formula instantiate(SchemaId id, const SchemaParams& p) {
  switch (id) {
    case SchemaId::Induction: {
      if (!p.v) throw Error("induction: missing induction variable");
      return make_induction(p.a, *p.v);
    }
    case SchemaId::UctAtom:
      return make_uct_atom(p.a);
    case SchemaId::UtK: {
      require_sentence(p.a, "ut_k");
      return Formula::imp(k1(gq(p.a)), p.a);
    }
    case SchemaId::KUtK: {
      require_sentence(p.a, "k_ut_k");
      Formula inner = Formula::imp(k1(gq(p.a)), p.a);
      return k1(gq(inner));
    }
    case SchemaId::IK: {
      require_sentence(p.a, "i_k");
      if (!p.b) throw Error("i_k: missing second sentence");
      require_sentence(*p.b, "i_k");
      Formula imp_ab = Formula::imp(p.a, *p.b);
      return Formula::imp(
          Formula::land(Formula::pr("base", gq(imp_ab)), k1(gq(p.a))),
          k1(gq(*p.b)));
    }
    case SchemaId::TB: {
      require_sentence(p.a, "tb");
      return Formula::iff(tf(gq(p.a)), p.a);
    }
    case SchemaId::U4Instance: {
      require_sentence(p.a, "u4_instance");
      Formula known = k1(gq(p.a));
      return Formula::imp(known, k1(gq(known)));
    }
  }
  throw Error("unknown schema");
}

// ---------- system definitions ----------

const Formula* SystemDef::axiom(const std::string& axiom_name) const {
  for (const NamedAxiom& a : axioms)
    if (a.name == axiom_name) return &a.formula;
  return nullptr;
}

bool SystemDef::has_axiom_formula(const Formula& f) const {
  for (const NamedAxiom& a : axioms)
    if (a.formula == f) return true;
  return false;
}

namespace {

// Arithmetic core.
std::vector<NamedAxiom> arithmetic_axioms() {
  Formula pa1 = Formula::forall(
      Var{0}, Formula::forall(
                  Var{1}, Formula::imp(Formula::eq(Term::succ(v(0)), Term::succ(v(1))),
                                       Formula::eq(v(0), v(1)))));
  Formula pa2 = Formula::forall(
      Var{0}, Formula::lnot(Formula::eq(Term::zero(), Term::succ(v(0)))));
  Formula pa3 = Formula::forall(
      Var{0}, Formula::eq(Term::plus(v(0), Term::zero()), v(0)));
  Formula pa4 = Formula::forall(
      Var{0},
      Formula::forall(Var{1}, Formula::eq(Term::plus(v(0), Term::succ(v(1))),
                                          Term::succ(Term::plus(v(0), v(1))))));
  Formula pa5 = Formula::forall(
      Var{0}, Formula::eq(Term::times(v(0), Term::zero()), Term::zero()));
  Formula pa6 = Formula::forall(
      Var{0},
      Formula::forall(Var{1},
                      Formula::eq(Term::times(v(0), Term::succ(v(1))),
                                  Term::plus(Term::times(v(0), v(1)), v(0)))));
  return {{"pa1", pa1}, {"pa2", pa2}, {"pa3", pa3},
          {"pa4", pa4}, {"pa5", pa5}, {"pa6", pa6}};
}

// Compositional disquotation axioms for the truth predicate.
std::vector<NamedAxiom> truth_axioms() {
  Var f1{1}, f2{2};
  Formula uct_neg = guard_l0(
      f1, Formula::iff(tf(d1(DotFn::Neg, v(1))), Formula::lnot(tf(v(1)))));
  auto binop = [&](DotFn f, Formula (*join)(const Formula&, const Formula&)) {
    return guard_l0(
        f1, guard_l0(f2, Formula::iff(tf(d2(f, v(1), v(2))),
                                      join(tf(v(1)), tf(v(2))))));
  };
  Formula uct_imp = binop(DotFn::Imp, &Formula::imp);
  Formula uct_and = binop(DotFn::And, &Formula::land);
  Formula uct_or = binop(DotFn::Or, &Formula::lor);

  // Quantified codes: truth of .all(v, phi) is truth of every closed-term
  // instance, taken over codes of closed terms of the full language.
  Var vv{0}, vf{1}, vt{2};
  Formula all_rhs = guard_term0(
      vt, tf(d3(DotFn::Sbt, v(1), v(2), v(0))));
  Formula uct_all = guard_var(
      vv, Formula::forall(
              vf, Formula::imp(l1(v(1), v(0)),
                               Formula::iff(tf(d2(DotFn::All, v(0), v(1))),
                                            all_rhs))));
  Formula ex_rhs = Formula::exists(
      vt, Formula::land(Formula::datom(DotPred::Term0L, {v(2)}),
                        tf(d3(DotFn::Sbt, v(1), v(2), v(0)))));
  Formula uct_ex = guard_var(
      vv, Formula::forall(
              vf, Formula::imp(l1(v(1), v(0)),
                               Formula::iff(tf(d2(DotFn::Ex, v(0), v(1))),
                                            ex_rhs))));
  return {{"uct_neg", uct_neg}, {"uct_imp", uct_imp}, {"uct_and", uct_and},
          {"uct_or", uct_or},   {"uct_all", uct_all}, {"uct_ex", uct_ex}};
}

NamedAxiom ax_non_triviality() {
  return {"non_triviality", Formula::exists(Var{0}, ag(v(0)))};
}

// Common knowledge is knowledge by every agent.
NamedAxiom ax_k1_k2() {
  Formula body = Formula::iff(
      k1(v(1)), guard_ag(Var{0}, k2(v(0), v(1))));
  return {"k1_k2", guard_l0(Var{1}, body)};
}

// Knowledge of each agent is closed under coded modus ponens.
NamedAxiom ax_uk_k() {
  Formula body = Formula::imp(
      Formula::land(k2(v(0), v(1)), k2(v(0), d2(DotFn::Imp, v(1), v(2)))),
      k2(v(0), v(2)));
  return {"uk_k",
          guard_ag(Var{0}, guard_l0(Var{1}, guard_l0(Var{2}, body)))};
}

// Each agent knows every theorem of the named system (self-referential).
NamedAxiom ax_reflection_into_k(const std::string& system) {
  Formula body = Formula::imp(Formula::pr(system, v(1)), k2(v(0), v(1)));
  return {"r_" + system, guard_ag(Var{0}, guard_l0(Var{1}, body))};
}

// Knowledge is factive at the level of truth.
NamedAxiom ax_v() {
  Formula body = Formula::imp(k2(v(0), v(1)), tf(v(1)));
  return {"v", guard_ag(Var{0}, guard_l0(Var{1}, body))};
}

// Knowledge respects the values of closed arithmetic terms.
NamedAxiom ax_uns_k() {
  Var a{0}, xv{1}, s{2}, t{3}, f{4};
  Formula same_val = Formula::eq(d1(DotFn::Ev, v(2)), d1(DotFn::Ev, v(3)));
  Formula body = Formula::imp(
      same_val,
      Formula::iff(k2(v(0), d3(DotFn::Sbt, v(4), v(2), v(1))),
                   k2(v(0), d3(DotFn::Sbt, v(4), v(3), v(1)))));
  Formula inner = Formula::forall(f, Formula::imp(l1(v(4), v(1)), body));
  return {"uns_k", guard_ag(a, guard_var(xv, guard_term0pa(
                                              s, guard_term0pa(t, inner))))};
}

// Agents know all true numerical distinctness facts.
NamedAxiom ax_und_k() {
  Var a{0}, s{1}, t{2};
  Formula diff = Formula::lnot(
      Formula::eq(d1(DotFn::Ev, v(1)), d1(DotFn::Ev, v(2))));
  Formula body = Formula::imp(diff, k2(v(0), d2(DotFn::NeqA, v(1), v(2))));
  return {"und_k", guard_ag(a, guard_term0pa(s, guard_term0pa(t, body)))};
}

// Knowledge satisfies the omega-rule over coded instances.
NamedAxiom ax_ubf_k() {
  Var a{0}, xv{1}, f{2}, t{3};
  Formula all_inst =
      guard_term0pa(t, k2(v(0), d3(DotFn::Sbt, v(2), v(3), v(1))));
  Formula body =
      Formula::imp(all_inst, k2(v(0), d2(DotFn::All, v(1), v(2))));
  Formula inner = Formula::forall(f, Formula::imp(l1(v(2), v(1)), body));
  return {"ubf_k", guard_ag(a, guard_var(xv, inner))};
}

// Interaction: knowing the truth of a sentence is the truth of knowing it.
NamedAxiom ax_ia() {
  Var a{0}, f{1};
  Term qf = d1(DotFn::Gq, v(1));
  Formula lhs = k2(v(0), d1(DotFn::TA, qf));
  Formula rhs = tf(d2(DotFn::K2A, d1(DotFn::Num, v(0)), qf));
  return {"ia", guard_ag(a, guard_l0(f, Formula::iff(lhs, rhs)))};
}

// Positive and negative introspection through the truth predicate.
NamedAxiom ax_in_plus() {
  Var a{0}, f{1};
  Term qf = d1(DotFn::Gq, v(1));
  Formula lhs = k2(v(0), d1(DotFn::TA, qf));
  Formula rhs = k2(v(0), d2(DotFn::K2A, d1(DotFn::Num, v(0)), qf));
  return {"in_plus", guard_ag(a, guard_l0(f, Formula::imp(lhs, rhs)))};
}

NamedAxiom ax_in_minus() {
  Var a{0}, f{1};
  Term qf = d1(DotFn::Gq, v(1));
  Formula lhs = Formula::lnot(k2(v(0), d1(DotFn::TA, qf)));
  Formula rhs = k2(
      v(0), d1(DotFn::Neg, d2(DotFn::K2A, d1(DotFn::Num, v(0)), qf)));
  return {"in_minus", guard_ag(a, guard_l0(f, Formula::imp(lhs, rhs)))};
}

// Positive introspection for common knowledge, in its unary reading.
NamedAxiom ax_u4() {
  Var f{0};
  Formula body =
      Formula::imp(k1(v(0)), k1(d1(DotFn::K1A, d1(DotFn::Gq, v(0)))));
  return {"u4", guard_l0(f, body)};
}

// Everything the ground system proves is true.
NamedAxiom ax_r_t_base() {
  Var f{0};
  Formula body = Formula::imp(Formula::pr("base", v(0)), tf(v(0)));
  return {"r_t_base", guard_l0(f, body)};
}

void append(std::vector<NamedAxiom>& dst, const std::vector<NamedAxiom>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

bool mentions_pr(const Formula& f, const std::string& system) {
  if (f.kind() == FormulaKind::Atom)
    return f.pred() == PredSym::Pr && f.pr_system() == system;
  for (const Formula& s : f.sub())
    if (mentions_pr(s, system)) return true;
  return false;
}

Formula rename_pr(const Formula& f, const std::string& from,
                  const std::string& to) {
  switch (f.kind()) {
    case FormulaKind::Atom:
      if (f.pred() == PredSym::Pr && f.pr_system() == from)
        return Formula::pr(to, f.terms()[0]);
      return f;
    case FormulaKind::Not:
      return Formula::lnot(rename_pr(f.sub()[0], from, to));
    case FormulaKind::Imp:
      return Formula::imp(rename_pr(f.sub()[0], from, to),
                          rename_pr(f.sub()[1], from, to));
    case FormulaKind::And:
      return Formula::land(rename_pr(f.sub()[0], from, to),
                           rename_pr(f.sub()[1], from, to));
    case FormulaKind::Or:
      return Formula::lor(rename_pr(f.sub()[0], from, to),
                          rename_pr(f.sub()[1], from, to));
    case FormulaKind::All:
      return Formula::forall(f.qvar(), rename_pr(f.sub()[0], from, to));
    case FormulaKind::Ex:
      return Formula::exists(f.qvar(), rename_pr(f.sub()[0], from, to));
    case FormulaKind::MetaSentence:
      return f;
  }
  return f;
}

// Resolves the SELF placeholder in a system whose axioms cite their own
// provability predicate; exactly one axiom must use it.
SystemDef resolve_self(SystemDef def) {
  int holes = 0;
  for (const NamedAxiom& a : def.axioms)
    if (mentions_pr(a.formula, "SELF")) ++holes;
  if (holes != 1)
    throw Error("self-referential system " + def.name + " must cite Pr[SELF] "
                "in exactly one axiom, found " + std::to_string(holes));
  for (NamedAxiom& a : def.axioms)
    a.formula = rename_pr(a.formula, "SELF", def.name);
  return def;
}

void check_closed(const SystemDef& def) {
  for (const NamedAxiom& a : def.axioms) {
    if (!a.formula.sentence() || a.formula.has_meta())
      throw Error("axiom " + a.name + " of " + def.name +
                  " is not a sentence: " + to_string(a.formula));
    if (mentions_pr(a.formula, "SELF"))
      throw Error("axiom " + a.name + " of " + def.name +
                  " has an unresolved SELF provability reference");
  }
}

}  // namespace

// ---------- registry ----------

Registry::Registry() {
  auto add = [this](SystemDef def) {
    check_closed(def);
    systems_.emplace(def.name, std::move(def));
  };

  const std::set<RuleId> logic = {RuleId::MP, RuleId::UG};

  SystemDef base;
  base.name = "base";
  base.axioms = arithmetic_axioms();
  base.schemata = {SchemaId::Induction};
  base.rules = logic;
  add(base);

  SystemDef uct = base;
  uct.name = "uct";
  append(uct.axioms, truth_axioms());
  uct.schemata.insert(SchemaId::UctAtom);
  add(uct);

  SystemDef fs = uct;
  fs.name = "fs";
  fs.rules.insert(RuleId::NecT);
  fs.rules.insert(RuleId::ConecT);
  add(fs);

  SystemDef dcb = base;
  dcb.name = "dcb";
  dcb.axioms.push_back(ax_non_triviality());
  dcb.axioms.push_back(ax_k1_k2());
  dcb.axioms.push_back(ax_uk_k());
  dcb.axioms.push_back(ax_reflection_into_k("SELF"));
  dcb = resolve_self(std::move(dcb));
  // The reflection axiom keeps a stable name.
  dcb.axioms.back().name = "r_dcb";
  add(dcb);

  SystemDef kt = fs;
  kt.name = "kt";
  kt.axioms.push_back(ax_non_triviality());
  kt.axioms.push_back(ax_k1_k2());
  kt.axioms.push_back(ax_uk_k());
  kt.axioms.push_back(systems_.at("dcb").axioms.back());  // r_dcb, verbatim
  kt.axioms.push_back(ax_v());
  kt.rules.insert(RuleId::NecK);
  add(kt);

  SystemDef befs = fs;
  befs.name = "befs";
  befs.axioms.push_back(ax_non_triviality());
  befs.axioms.push_back(ax_k1_k2());
  befs.axioms.push_back(ax_uk_k());
  befs.axioms.push_back(ax_uns_k());
  befs.axioms.push_back(ax_und_k());
  befs.axioms.push_back(ax_ubf_k());
  befs.axioms.push_back(ax_ia());
  befs.rules.insert(RuleId::TOverK);
  add(befs);

  // Finite approximations: befs0 is the arithmetic ground system, befs1 adds
  // the axioms plus reflection-as-truth but no truth necessitation, befs<n>
  // allows n-1 truth (co)necessitation steps per proof.
  SystemDef befs0 = base;
  befs0.name = "befs0";
  befs0.nec_budget = 0;
  add(befs0);

  SystemDef befs1 = befs;
  befs1.name = "befs1";
  befs1.axioms.push_back(ax_r_t_base());
  befs1.rules.erase(RuleId::NecT);
  befs1.rules.erase(RuleId::ConecT);
  befs1.nec_budget = 0;
  add(befs1);

  for (int n = 2; n <= 4; ++n) {
    SystemDef bn = befs;
    bn.name = "befs" + std::to_string(n);
    bn.nec_budget = n - 1;
    add(bn);
  }

  // Provability-free knowledge systems over arithmetic, with the common
  // knowledge predicate in its unary reading.
  SystemDef km = base;
  km.name = "km";
  km.schemata.insert(SchemaId::UtK);
  km.schemata.insert(SchemaId::KUtK);
  km.schemata.insert(SchemaId::IK);
  add(km);

  SystemDef montague = base;
  montague.name = "montague";
  montague.schemata.insert(SchemaId::UtK);
  montague.rules.insert(RuleId::NecK1);
  add(montague);

  // Named extensions used by the derivation scripts.
  SystemDef kt_u4 = kt;
  kt_u4.name = "kt_u4";
  kt_u4.axioms.push_back(ax_u4());
  kt_u4.schemata.insert(SchemaId::U4Instance);
  add(kt_u4);

  SystemDef kt_ia = kt;
  kt_ia.name = "kt_ia";
  kt_ia.axioms.push_back(ax_ia());
  add(kt_ia);

  SystemDef kt_ubf_ia = kt;
  kt_ubf_ia.name = "kt_ubf_ia";
  kt_ubf_ia.axioms.push_back(ax_ubf_k());
  kt_ubf_ia.axioms.push_back(ax_ia());
  add(kt_ubf_ia);

  SystemDef kt_inp = kt_ubf_ia;
  kt_inp.name = "kt_ubf_ia_inp";
  kt_inp.axioms.push_back(ax_in_plus());
  add(kt_inp);

  SystemDef kt_inpm = kt_inp;
  kt_inpm.name = "kt_ubf_ia_inp_inm";
  kt_inpm.axioms.push_back(ax_in_minus());
  add(kt_inpm);

  SystemDef befs_v = befs;
  befs_v.name = "befs_v_rdcb";
  befs_v.axioms.push_back(ax_v());
  befs_v.axioms.push_back(systems_.at("dcb").axioms.back());
  add(befs_v);
}

Registry& Registry::instance() {
  static Registry r;
  return r;
}

const SystemDef& Registry::get(const std::string& name) const {
  const SystemDef* s = find(name);
  if (!s) throw Error("unknown system: " + name);
  return *s;
}

const SystemDef* Registry::find(const std::string& name) const {
  auto it = systems_.find(name);
  return it == systems_.end() ? nullptr : &it->second;
}

void Registry::register_system(SystemDef def) {
  check_closed(def);
  if (systems_.count(def.name))
    throw Error("system already registered: " + def.name);
  systems_.emplace(def.name, std::move(def));
}

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  out.reserve(systems_.size());
  for (const auto& [name, def] : systems_) out.push_back(name);
  return out;
}

std::optional<int> nec_capacity(const SystemDef& s) {
  if (!s.rules.count(RuleId::NecT) && !s.rules.count(RuleId::ConecT)) return 0;
  return s.nec_budget;
}

bool Registry::extends(const std::string& sys, const std::string& base) const {
  const SystemDef& a = get(sys);
  const SystemDef& b = get(base);
  for (const NamedAxiom& ax : b.axioms)
    if (!a.has_axiom_formula(ax.formula)) return false;
  if (!std::includes(a.schemata.begin(), a.schemata.end(), b.schemata.begin(),
                     b.schemata.end()))
    return false;
  if (!std::includes(a.rules.begin(), a.rules.end(), b.rules.begin(),
                     b.rules.end()))
    return false;
  std::optional<int> allow = nec_capacity(a);
  std::optional<int> need = nec_capacity(b);
  if (!need) return !allow.has_value();
  if (allow && *allow < *need) return false;
  return true;
}

std::string Registry::ensure_befs_n(int n) {
  if (n < 0) throw Error("befs approximation index must be nonnegative");
  std::string name = "befs" + std::to_string(n);
  if (systems_.count(name)) return name;
  SystemDef bn = get("befs");
  bn.name = name;
  bn.nec_budget = n - 1;
  systems_.emplace(name, std::move(bn));
  return name;
}

const SystemDef& register_self_referential(SystemDef def) {
  SystemDef resolved = resolve_self(std::move(def));
  std::string name = resolved.name;
  Registry& r = Registry::instance();
  r.register_system(std::move(resolved));
  return r.get(name);
}

std::string Registry::manifest() const {
  // Curated order first, then any later registrations alphabetically.
  static const char* kOrder[] = {
      "base", "uct", "fs", "dcb", "kt", "befs", "befs0", "befs1",
      "befs2", "befs3", "befs4", "km", "montague", "kt_u4", "kt_ia",
      "kt_ubf_ia", "kt_ubf_ia_inp", "kt_ubf_ia_inp_inm", "befs_v_rdcb"};
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const char* n : kOrder)
    if (systems_.count(n)) { order.push_back(n); seen.insert(n); }
  for (const auto& [name, def] : systems_)
    if (!seen.count(name)) order.push_back(name);

  std::ostringstream os;
  os << "ktlab axiom systems\n"
     << "===================\n"
     << "Logic: classical first-order logic with equality over the signature\n"
     << "0, S, +, *, u; U, Ag, K1, K2, T, Pr[<system>], and the dotted\n"
     << "defined symbols.  Propositional steps are certified by truth-table\n"
     << "tautologies; quantifier and equality steps by the primitive rules\n"
     << "ui, ei, all_imp, all_vacuous, ex_elim, eq_refl, eq_cong and the\n"
     << "axiom forms ui_imp, ei_imp, vac_imp.  Schemata are instantiated\n"
     << "per proof line.\n";
  for (const std::string& name : order) {
    const SystemDef& def = systems_.at(name);
    os << "\nsystem " << name << "\n";
    if (def.nec_budget)
      os << "  truth necessitation budget: " << *def.nec_budget << "\n";
    os << "  axioms:\n";
    for (const NamedAxiom& a : def.axioms)
      os << "    " << a.name << ": " << to_string(a.formula) << "\n";
    if (!def.schemata.empty()) {
      os << "  schemata:";
      for (SchemaId s : def.schemata) os << " " << schema_name(s);
      os << "\n";
    }
    os << "  rules:";
    for (RuleId r : def.rules) os << " " << rule_name(r);
    os << "\n";
  }
  return os.str();
}

}  // namespace ktlab
