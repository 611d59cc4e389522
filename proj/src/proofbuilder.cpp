#include "ktlab/proofbuilder.hpp"

#include "ktlab/coding.hpp"

namespace ktlab {

ProofBuilder::ProofBuilder(std::string system) {
  proof_.system = std::move(system);
}

int ProofBuilder::push(Formula f, Justification j) {
  if (!f.ok()) throw Error("proof step without a formula");
  proof_.steps.push_back(Step{std::move(f), std::move(j)});
  return static_cast<int>(proof_.steps.size());
}

const Formula& ProofBuilder::at(int line) const {
  if (line < 1 || line > size())
    throw Error("no proof line " + std::to_string(line));
  return proof_.steps[line - 1].formula;
}

const Formula& ProofBuilder::formula(int line) const { return at(line); }

Proof ProofBuilder::take() { return std::move(proof_); }

int ProofBuilder::axiom(const std::string& name) {
  const Formula* f = registry().get(proof_.system).axiom(name);
  if (!f) throw Error("no axiom named " + name + " in " + proof_.system);
  Justification j;
  j.kind = JKind::Axiom;
  j.axiom_name = name;
  return push(*f, std::move(j));
}

int ProofBuilder::schema(SchemaId id, const SchemaParams& params) {
  Justification j;
  j.kind = JKind::Schema;
  j.schema = id;
  j.params = params;
  return push(instantiate(id, params), std::move(j));
}

int ProofBuilder::compute(Formula f) {
  Justification j;
  j.kind = JKind::Compute;
  return push(std::move(f), std::move(j));
}

int ProofBuilder::taut(Formula f, std::vector<int> premises) {
  Justification j;
  j.kind = JKind::Taut;
  j.lines = std::move(premises);
  return push(std::move(f), std::move(j));
}

int ProofBuilder::hyp(Formula f) {
  Justification j;
  j.kind = JKind::Hyp;
  return push(std::move(f), std::move(j));
}

int ProofBuilder::mp(int imp, int ant) {
  const Formula& ab = at(imp);
  if (ab.kind() != FormulaKind::Imp)
    throw Error("mp premise " + std::to_string(imp) + " is not an implication");
  Justification j;
  j.kind = JKind::Mp;
  j.lines = {imp, ant};
  return push(ab.sub()[1], std::move(j));
}

int ProofBuilder::ug(int line, Var v) {
  Justification j;
  j.kind = JKind::Ug;
  j.lines = {line};
  j.var = v;
  return push(Formula::forall(v, at(line)), std::move(j));
}

namespace {

Justification fol_j(FolRule r, std::vector<int> lines) {
  Justification j;
  j.kind = JKind::Fol;
  j.fol = r;
  j.lines = std::move(lines);
  return j;
}

}  // namespace

int ProofBuilder::ui(int line, const Term& t) {
  const Formula& a = at(line);
  if (a.kind() != FormulaKind::All)
    throw Error("ui premise " + std::to_string(line) + " is not universal");
  Justification j = fol_j(FolRule::Ui, {line});
  j.term = t;
  return push(subst(a.sub()[0], a.qvar(), t), std::move(j));
}

int ProofBuilder::ei(const Formula& ex_target, int line, const Term& witness) {
  Justification j = fol_j(FolRule::Ei, {line});
  j.term = witness;
  return push(ex_target, std::move(j));
}

int ProofBuilder::all_imp(int line) {
  const Formula& a = at(line);
  if (a.kind() != FormulaKind::All || a.sub()[0].kind() != FormulaKind::Imp)
    throw Error("all_imp premise is not a universal implication");
  Var v = a.qvar();
  Justification j = fol_j(FolRule::AllImp, {line});
  return push(Formula::imp(Formula::forall(v, a.sub()[0].sub()[0]),
                           Formula::forall(v, a.sub()[0].sub()[1])),
              std::move(j));
}

int ProofBuilder::all_vacuous(int line, Var v) {
  Justification j = fol_j(FolRule::AllVacuous, {line});
  j.var = v;
  return push(Formula::forall(v, at(line)), std::move(j));
}

int ProofBuilder::ex_elim(int ex_line, int all_line) {
  const Formula& all = at(all_line);
  if (all.kind() != FormulaKind::All || all.sub()[0].kind() != FormulaKind::Imp)
    throw Error("ex_elim side premise is not a universal implication");
  return push(all.sub()[0].sub()[1], fol_j(FolRule::ExElim, {ex_line, all_line}));
}

int ProofBuilder::eq_refl(const Term& t) {
  return push(Formula::eq(t, t), fol_j(FolRule::EqRefl, {}));
}

int ProofBuilder::eq_cong(int eq_line, int in_line, Formula result) {
  return push(std::move(result), fol_j(FolRule::EqCong, {eq_line, in_line}));
}

int ProofBuilder::ui_imp(const Formula& all, const Term& t) {
  if (all.kind() != FormulaKind::All)
    throw Error("ui_imp needs a universal formula");
  Justification j = fol_j(FolRule::UiImp, {});
  j.term = t;
  return push(Formula::imp(all, subst(all.sub()[0], all.qvar(), t)),
              std::move(j));
}

int ProofBuilder::ei_imp(const Formula& ex_target, const Term& witness) {
  if (ex_target.kind() != FormulaKind::Ex)
    throw Error("ei_imp needs an existential formula");
  Justification j = fol_j(FolRule::EiImp, {});
  j.term = witness;
  return push(
      Formula::imp(subst(ex_target.sub()[0], ex_target.qvar(), witness),
                   ex_target),
      std::move(j));
}

int ProofBuilder::vac_imp(const Formula& body, Var v) {
  return push(Formula::imp(body, Formula::forall(v, body)),
              fol_j(FolRule::VacImp, {}));
}

int ProofBuilder::nec_t(int line) {
  Justification j;
  j.kind = JKind::NecT;
  j.lines = {line};
  return push(nec_t_formula(at(line)), std::move(j));
}

int ProofBuilder::conec_t(int line) {
  const Formula& a = at(line);
  if (a.kind() != FormulaKind::Atom || a.pred() != PredSym::T ||
      a.terms()[0].kind() != TermKind::Numeral)
    throw Error("conec_t premise is not T of a literal code");
  std::optional<Formula> dec = decode_formula(a.terms()[0].value());
  if (!dec) throw Error("conec_t premise code does not decode");
  Justification j;
  j.kind = JKind::ConecT;
  j.lines = {line};
  return push(*dec, std::move(j));
}

int ProofBuilder::nec_k(int line) {
  Justification j;
  j.kind = JKind::NecK;
  j.lines = {line};
  return push(nec_k_formula(at(line)), std::move(j));
}

int ProofBuilder::nec_k1(int line) {
  Justification j;
  j.kind = JKind::NecK1;
  j.lines = {line};
  return push(nec_k1_formula(at(line)), std::move(j));
}

int ProofBuilder::t_over_k(int line) {
  const Formula& a = at(line);
  if (a.kind() != FormulaKind::Atom || a.pred() != PredSym::T)
    throw Error("t_over_k premise is not a T atom");
  Justification j;
  j.kind = JKind::TOverK;
  j.lines = {line};
  return push(all_agents_know(a.terms()[0]), std::move(j));
}

int ProofBuilder::d1(const std::string& system, const Formula& phi) {
  Justification j;
  j.kind = JKind::D1;
  j.system = system;
  j.f1 = phi;
  return push(d1_formula(system, phi), std::move(j));
}

int ProofBuilder::d2(const std::string& system, const Formula& phi,
                     const Formula& psi) {
  Justification j;
  j.kind = JKind::D2;
  j.system = system;
  j.f1 = phi;
  j.f2 = psi;
  return push(d2_formula(system, phi, psi), std::move(j));
}

int ProofBuilder::cong_imp(const Formula& eq, const Formula& from,
                           Formula to) {
  if (eq.kind() != FormulaKind::Atom || eq.pred() != PredSym::Eq)
    throw Error("cong_imp needs an equation antecedent");
  if (!cong_formula(from, to, eq.terms()[0], eq.terms()[1]))
    throw Error("cong_imp consequent does not follow the equation");
  return push(Formula::imp(eq, Formula::imp(from, std::move(to))),
              fol_j(FolRule::CongImp, {}));
}
int ProofBuilder::internal_ui_imp(const std::string& system, const Formula& g,
                                  int peel) {
  std::optional<Formula> f = internal_ui_imp_formula(system, gc(g), peel);
  if (!f) throw Error("internal_ui_imp parameter codes no guarded universal");
  Justification j;
  j.kind = JKind::InternalUiImp;
  j.system = system;
  j.f1 = g;
  j.peel = peel;
  return push(*f, std::move(j));
}
int ProofBuilder::internal_ui(const std::string& system, int line, int peel) {
  const Formula& a = at(line);
  if (a.kind() != FormulaKind::Atom || a.pred() != PredSym::Pr ||
      a.terms()[0].kind() != TermKind::Numeral)
    throw Error("internal_ui premise is not a provability atom on a code");
  std::optional<Formula> f =
      internal_ui_formula(system, a.terms()[0].value(), peel);
  if (!f) throw Error("internal_ui premise codes no guarded universal");
  Justification j;
  j.kind = JKind::InternalUi;
  j.system = system;
  j.lines = {line};
  j.peel = peel;
  return push(*f, std::move(j));
}

int ProofBuilder::pr_sigma(const std::string& system) {
  Justification j;
  j.kind = JKind::PrSigma;
  j.system = system;
  return push(pr_sigma_formula(system), std::move(j));
}

int ProofBuilder::pr_mono(const std::string& from, const std::string& to,
                          int line) {
  const Formula& a = at(line);
  if (a.kind() != FormulaKind::Atom || a.pred() != PredSym::Pr)
    throw Error("pr_mono premise is not a provability atom");
  Justification j;
  j.kind = JKind::PrMono;
  j.system = from;
  j.system2 = to;
  j.lines = {line};
  return push(Formula::pr(to, a.terms()[0]), std::move(j));
}

int ProofBuilder::syntax_fact(Formula f) {
  Justification j;
  j.kind = JKind::SyntaxFact;
  return push(std::move(f), std::move(j));
}

int ProofBuilder::loeb(int line) {
  const Formula& a = at(line);
  if (a.kind() != FormulaKind::Imp)
    throw Error("loeb premise is not an implication");
  Justification j;
  j.kind = JKind::Loeb;
  j.lines = {line};
  return push(a.sub()[1], std::move(j));
}

int ProofBuilder::theorem(const std::string& system, const Formula& f) {
  Justification j;
  j.kind = JKind::Theorem;
  j.system = system;
  j.f1 = f;
  return push(f, std::move(j));
}

int ProofBuilder::instantiate_guarded(int line, const Term& t) {
  const Formula& a = at(line);
  if (a.kind() != FormulaKind::All || a.sub()[0].kind() != FormulaKind::Imp)
    throw Error("instantiate_guarded needs a guarded universal");
  int inst = ui(line, t);
  const Formula& guard = at(inst).sub()[0];
  int side = compute(guard);
  return mp(inst, side);
}

}  // namespace ktlab
