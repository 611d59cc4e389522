#include "ktlab/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <sstream>

namespace ktlab {

const char* jkind_name(JKind k) {
  switch (k) {
    case JKind::Axiom: return "axiom";
    case JKind::Schema: return "schema";
    case JKind::Compute: return "compute";
    case JKind::Taut: return "taut";
    case JKind::Fol: return "fol";
    case JKind::Hyp: return "hyp";
    case JKind::Mp: return "mp";
    case JKind::Ug: return "ug";
    case JKind::NecT: return "nec_t";
    case JKind::ConecT: return "conec_t";
    case JKind::NecK: return "nec_k";
    case JKind::NecK1: return "nec_k1";
    case JKind::TOverK: return "t_over_k";
    case JKind::D1: return "d1";
    case JKind::D2: return "d2";
    case JKind::InternalUi: return "internal_ui";
    case JKind::InternalUiImp: return "internal_ui_imp";
    case JKind::PrSigma: return "pr_sigma";
    case JKind::PrMono: return "pr_mono";
    case JKind::SyntaxFact: return "syntax_fact";
    case JKind::Loeb: return "loeb";
    case JKind::Theorem: return "theorem";
  }
  return "?";
}

const char* fol_rule_name(FolRule r) {
  switch (r) {
    case FolRule::Ui: return "ui";
    case FolRule::Ei: return "ei";
    case FolRule::AllImp: return "all_imp";
    case FolRule::AllVacuous: return "all_vacuous";
    case FolRule::ExElim: return "ex_elim";
    case FolRule::EqRefl: return "eq_refl";
    case FolRule::EqCong: return "eq_cong";
    case FolRule::UiImp: return "ui_imp";
    case FolRule::EiImp: return "ei_imp";
    case FolRule::VacImp: return "vac_imp";
    case FolRule::CongImp: return "cong_imp";
  }
  return "?";
}

// ---------- theorem database ----------

bool TheoremDB::contains(const std::string& system, const Formula& f) const {
  auto it = by_system_.find(system);
  if (it == by_system_.end()) return false;
  return it->second.count(gc(f)) != 0;
}

const Proof* TheoremDB::proof_of(const std::string& system,
                                 const Formula& f) const {
  auto it = by_system_.find(system);
  if (it == by_system_.end()) return nullptr;
  auto jt = it->second.find(gc(f));
  return jt == it->second.end() ? nullptr : &jt->second.proof;
}

void TheoremDB::insert(const std::string& system, const Formula& f, Proof p) {
  by_system_[system].insert_or_assign(gc(f), Entry{f, std::move(p)});
}

std::vector<Formula> TheoremDB::theorems(const std::string& system) const {
  std::vector<Formula> out;
  auto it = by_system_.find(system);
  if (it == by_system_.end()) return out;
  out.reserve(it->second.size());
  for (const auto& [code, e] : it->second) out.push_back(e.formula);
  return out;
}

std::size_t TheoremDB::size() const {
  std::size_t n = 0;
  for (const auto& [s, m] : by_system_) n += m.size();
  return n;
}

// ---------- conclusion shapes ----------

Formula d1_formula(const std::string& system, const Formula& phi) {
  return Formula::pr(system, gq(phi));
}

Formula d2_formula(const std::string& system, const Formula& phi,
                   const Formula& psi) {
  Formula ab = Formula::imp(phi, psi);
  return Formula::imp(
      Formula::pr(system, gq(ab)),
      Formula::imp(Formula::pr(system, gq(phi)),
                   Formula::pr(system, gq(psi))));
}

Formula pr_sigma_formula(const std::string& system) {
  Term u = Term::var(0);
  Formula pr_open = Formula::pr(system, Term::var(1));
  Term lifted = Term::dot(
      DotFn::Sbt, {gq(pr_open), Term::dot(DotFn::Gq, {u}),
                   numeral(var_code(Var{1}))});
  return guard_l0(
      Var{0},
      Formula::imp(Formula::pr(system, u), Formula::pr(system, lifted)));
}

Formula all_agents_know(const Term& code) {
  return guard_ag(Var{0}, k2(Term::var(0), code));
}

Formula nec_k_formula(const Formula& phi) { return all_agents_know(gq(phi)); }

Formula nec_t_formula(const Formula& phi) {
  return Formula::atom(PredSym::T, {gq(phi)});
}

Formula nec_k1_formula(const Formula& phi) { return k1(gq(phi)); }

namespace {

std::optional<Formula> internal_ui_core(const std::string& system,
                                        const Nat& coded_sentence, int peel,
                                        bool imp_form) {
  std::optional<Formula> dec = decode_formula(coded_sentence);
  if (!dec || !dec->sentence()) return std::nullopt;
  Formula body = *dec;
  std::vector<Var> ys;
  while (peel < 0 || static_cast<int>(ys.size()) < peel) {
    if (body.kind() != FormulaKind::All) break;
    const Formula& in = body.sub()[0];
    if (in.kind() != FormulaKind::Imp) break;
    const Formula& g = in.sub()[0];
    if (g.kind() != FormulaKind::Atom || g.pred() != PredSym::Dotted ||
        g.dpred() != DotPred::L0 ||
        g.terms()[0] != Term::var(body.qvar()))
      break;
    ys.push_back(body.qvar());
    body = in.sub()[1];
  }
  if (ys.empty()) return std::nullopt;
  if (peel >= 0 && static_cast<int>(ys.size()) != peel) return std::nullopt;

  Term chain = gq(body);
  for (std::size_t j = 0; j < ys.size(); ++j)
    chain = Term::dot(DotFn::Sbt,
                      {chain, Term::dot(DotFn::Gq, {Term::var(static_cast<int>(j))}),
                       numeral(var_code(ys[j]))});
  Formula out = Formula::pr(system, chain);
  if (imp_form)
    out = Formula::imp(Formula::pr(system, numeral(coded_sentence)),
                       std::move(out));
  for (int j = static_cast<int>(ys.size()) - 1; j >= 0; --j)
    out = guard_l0(Var{j}, out);
  return out;
}

}  // namespace

std::optional<Formula> internal_ui_formula(const std::string& system,
                                           const Nat& coded_sentence,
                                           int peel) {
  return internal_ui_core(system, coded_sentence, peel, false);
}

std::optional<Formula> internal_ui_imp_formula(const std::string& system,
                                               const Nat& coded_sentence,
                                               int peel) {
  return internal_ui_core(system, coded_sentence, peel, true);
}

// ---------- ground computation ----------

bool verify_compute(const Formula& f) {
  auto ground_atom = [](const Formula& a, bool expect) -> bool {
    if (a.kind() != FormulaKind::Atom) return false;
    if (a.pred() == PredSym::Eq) {
      std::optional<Nat> l = try_eval_ground(a.terms()[0]);
      std::optional<Nat> r = try_eval_ground(a.terms()[1]);
      return l && r && ((*l == *r) == expect);
    }
    if (a.pred() == PredSym::Dotted) {
      std::vector<Nat> vals;
      for (const Term& t : a.terms()) {
        std::optional<Nat> v = try_eval_ground(t);
        if (!v) return false;
        vals.push_back(*v);
      }
      return dot_holds(a.dpred(), vals) == expect;
    }
    return false;
  };
  if (f.kind() == FormulaKind::Atom) return ground_atom(f, true);
  if (f.kind() == FormulaKind::Not) return ground_atom(f.sub()[0], false);
  return false;
}

// ---------- tautology checking ----------

namespace {

// Propositional skeleton: -1-k encodes atom k, otherwise an operator node.
struct PropNode {
  FormulaKind op;
  int a = -1, b = -1;  // children; atom index when leaf
  int atom = -1;
};

struct PropCompiler {
  std::vector<Formula> atoms;
  std::vector<PropNode> nodes;

  int atom_index(const Formula& f) {
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (atoms[i] == f) return static_cast<int>(i);
    atoms.push_back(f);
    return static_cast<int>(atoms.size() - 1);
  }

  int compile(const Formula& f) {
    PropNode n;
    switch (f.kind()) {
      case FormulaKind::Not:
        n.op = FormulaKind::Not;
        n.a = compile(f.sub()[0]);
        break;
      case FormulaKind::Imp:
      case FormulaKind::And:
      case FormulaKind::Or:
        n.op = f.kind();
        n.a = compile(f.sub()[0]);
        n.b = compile(f.sub()[1]);
        break;
      default:
        n.op = FormulaKind::Atom;
        n.atom = atom_index(f);
        break;
    }
    nodes.push_back(n);
    return static_cast<int>(nodes.size() - 1);
  }

  bool eval(int idx, std::uint32_t mask) const {
    const PropNode& n = nodes[idx];
    switch (n.op) {
      case FormulaKind::Atom: return (mask >> n.atom) & 1u;
      case FormulaKind::Not: return !eval(n.a, mask);
      case FormulaKind::Imp: return !eval(n.a, mask) || eval(n.b, mask);
      case FormulaKind::And: return eval(n.a, mask) && eval(n.b, mask);
      case FormulaKind::Or: return eval(n.a, mask) || eval(n.b, mask);
      default: return false;
    }
  }
};

}  // namespace

bool tautological_consequence(const std::vector<Formula>& premises,
                              const Formula& conclusion) {
  PropCompiler pc;
  std::vector<int> prem_roots;
  prem_roots.reserve(premises.size());
  for (const Formula& p : premises) prem_roots.push_back(pc.compile(p));
  int concl = pc.compile(conclusion);
  if (pc.atoms.size() > 24) return false;
  const std::uint32_t limit = 1u << pc.atoms.size();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    bool all = true;
    for (int r : prem_roots)
      if (!pc.eval(r, mask)) { all = false; break; }
    if (all && !pc.eval(concl, mask)) return false;
  }
  return true;
}

// ---------- symbolic verification of coding laws ----------

namespace {

// A symbolic natural: a known constant, an opaque natural (slot), or the code
// of a term/formula that may contain placeholder leaves standing for opaque
// closed terms, numerals of opaque naturals, or opaque sentences.
struct SymV {
  enum class K : std::uint8_t { Con, Slot, CodeT, CodeF } k;
  Nat con;
  int slot = -1;
  Term t;
  Formula f;

  static SymV mk_con(Nat n) { SymV s; s.k = K::Con; s.con = std::move(n); return s; }
  static SymV mk_slot(int i) { SymV s; s.k = K::Slot; s.slot = i; return s; }
  static SymV mk_t(Term t) { SymV s; s.k = K::CodeT; s.t = std::move(t); return s; }
  static SymV mk_f(Formula f) { SymV s; s.k = K::CodeF; s.f = std::move(f); return s; }
};

// Meta-free codes collapse to their numeric value.
SymV sym_norm(SymV v) {
  if (v.k == SymV::K::CodeT && !v.t.has_meta()) return SymV::mk_con(gc(v.t));
  if (v.k == SymV::K::CodeF && !v.f.has_meta()) return SymV::mk_con(gc(v.f));
  return v;
}

bool sym_equal(const SymV& a0, const SymV& b0) {
  SymV a = sym_norm(a0), b = sym_norm(b0);
  if (a.k != b.k) return false;
  switch (a.k) {
    case SymV::K::Con: return a.con == b.con;
    case SymV::K::Slot: return a.slot == b.slot;
    case SymV::K::CodeT: return a.t == b.t;
    case SymV::K::CodeF: return a.f == b.f;
  }
  return false;
}

std::optional<Term> as_code_t(const SymV& v) {
  if (v.k == SymV::K::CodeT) return v.t;
  if (v.k == SymV::K::Con) return decode_term(v.con);
  return std::nullopt;
}

std::optional<Formula> as_code_f(const SymV& v) {
  if (v.k == SymV::K::CodeF) return v.f;
  if (v.k == SymV::K::Con) return decode_formula(v.con);
  return std::nullopt;
}

std::optional<Var> as_var_code(const SymV& v) {
  std::optional<Term> t = as_code_t(v);
  if (t && t->kind() == TermKind::VarT) return t->var_of();
  return std::nullopt;
}

using SymEnv = std::map<int, SymV>;

std::optional<SymV> eval_sym(const Term& t, const SymEnv& env);

std::optional<SymV> eval_sym_dot(DotFn fn, const std::vector<SymV>& a) {
  switch (fn) {
    case DotFn::Neg: {
      auto f = as_code_f(a[0]);
      if (!f) return std::nullopt;
      return SymV::mk_f(Formula::lnot(*f));
    }
    case DotFn::Imp:
    case DotFn::And:
    case DotFn::Or: {
      auto f = as_code_f(a[0]), g = as_code_f(a[1]);
      if (!f || !g) return std::nullopt;
      if (fn == DotFn::Imp) return SymV::mk_f(Formula::imp(*f, *g));
      if (fn == DotFn::And) return SymV::mk_f(Formula::land(*f, *g));
      return SymV::mk_f(Formula::lor(*f, *g));
    }
    case DotFn::All:
    case DotFn::Ex: {
      auto v = as_var_code(a[0]);
      auto f = as_code_f(a[1]);
      if (!v || !f) return std::nullopt;
      return SymV::mk_f(fn == DotFn::All ? Formula::forall(*v, *f)
                                         : Formula::exists(*v, *f));
    }
    case DotFn::Sbt:
      return std::nullopt;  // handled lazily in eval_sym
    case DotFn::Gq:
    case DotFn::Num: {
      const SymV& x = a[0];
      if (x.k == SymV::K::Slot) return SymV::mk_t(Term::meta_numeral(x.slot));
      if (x.k == SymV::K::Con) return SymV::mk_t(numeral(x.con));
      SymV n = sym_norm(x);
      if (n.k == SymV::K::Con) return SymV::mk_t(numeral(n.con));
      // A guarded unknown is one number seen two ways: quoting it yields
      // the numeral of that same unknown, so the slot carries over.
      if (n.k == SymV::K::CodeF && n.f.kind() == FormulaKind::MetaSentence)
        return SymV::mk_t(Term::meta_numeral(n.f.slot()));
      if (n.k == SymV::K::CodeT && n.t.kind() == TermKind::MetaTerm)
        return SymV::mk_t(Term::meta_numeral(n.t.slot()));
      return std::nullopt;
    }
    case DotFn::Ev: {
      if (a[0].k == SymV::K::Slot) return std::nullopt;
      if (a[0].k == SymV::K::CodeT) {
        const Term& t = a[0].t;
        if (t.kind() == TermKind::Numeral) return SymV::mk_con(t.value());
        if (t.kind() == TermKind::MetaNumeral) return SymV::mk_slot(t.slot());
        if (!t.has_meta()) {
          if (t.closed() && t.arithmetic()) return SymV::mk_con(eval_closed_term(t));
          return SymV::mk_con(0);  // total semantics defaults here
        }
        return std::nullopt;
      }
      if (a[0].k == SymV::K::Con)
        return SymV::mk_con(dot_eval(DotFn::Ev, {a[0].con}));
      return std::nullopt;  // CodeF: ill-typed, value 0 only when concrete
    }
    case DotFn::EqA:
    case DotFn::NeqA: {
      auto s = as_code_t(a[0]), t = as_code_t(a[1]);
      if (!s || !t) return std::nullopt;
      Formula e = Formula::eq(*s, *t);
      return SymV::mk_f(fn == DotFn::EqA ? e : Formula::lnot(e));
    }
    case DotFn::TA:
    case DotFn::K1A:
    case DotFn::UA:
    case DotFn::AgA: {
      auto s = as_code_t(a[0]);
      if (!s) return std::nullopt;
      PredSym p = fn == DotFn::TA    ? PredSym::T
                  : fn == DotFn::K1A ? PredSym::K1
                  : fn == DotFn::UA  ? PredSym::U
                                     : PredSym::Ag;
      return SymV::mk_f(Formula::atom(p, {*s}));
    }
    case DotFn::K2A: {
      auto s = as_code_t(a[0]), t = as_code_t(a[1]);
      if (!s || !t) return std::nullopt;
      return SymV::mk_f(Formula::atom(PredSym::K2, {*s, *t}));
    }
    case DotFn::Id:
      return a[0];
    case DotFn::QImp: {
      auto s = as_code_t(a[0]), t = as_code_t(a[1]);
      if (!s || !t) return std::nullopt;
      return SymV::mk_t(Term::dot(DotFn::Imp, {*s, *t}));
    }
  }
  return std::nullopt;
}

std::optional<SymV> eval_sym(const Term& t, const SymEnv& env) {
  switch (t.kind()) {
    case TermKind::VarT: {
      auto it = env.find(t.var_of().index);
      if (it == env.end()) return std::nullopt;
      return it->second;
    }
    case TermKind::Numeral:
      return SymV::mk_con(t.value());
    case TermKind::Succ:
    case TermKind::Plus:
    case TermKind::Times: {
      std::vector<Nat> vals;
      for (const Term& a : t.args()) {
        auto v = eval_sym(a, env);
        if (!v) return std::nullopt;
        SymV n = sym_norm(*v);
        if (n.k != SymV::K::Con) return std::nullopt;
        vals.push_back(n.con);
      }
      if (t.kind() == TermKind::Succ) return SymV::mk_con(vals[0] + 1);
      if (t.kind() == TermKind::Plus) return SymV::mk_con(vals[0] + vals[1]);
      return SymV::mk_con(vals[0] * vals[1]);
    }
    case TermKind::DotApp: {
      if (t.fn() == DotFn::Sbt) {
        // Lazy in the substituted term: when the target position is closed
        // the result does not depend on it, and the law stays checkable even
        // if that argument has no symbolic code.
        auto a0 = eval_sym(t.args()[0], env);
        auto a2 = eval_sym(t.args()[2], env);
        if (!a0 || !a2) return std::nullopt;
        auto f = as_code_f(*a0);
        auto v = as_var_code(*a2);
        if (!f || !v) return std::nullopt;
        const std::vector<int>& fv = f->free_vars();
        if (!std::binary_search(fv.begin(), fv.end(), v->index))
          return SymV::mk_f(*f);
        auto a1 = eval_sym(t.args()[1], env);
        if (!a1) return std::nullopt;
        auto s = as_code_t(*a1);
        if (!s || !s->closed()) return std::nullopt;
        try {
          return SymV::mk_f(sbt(*f, *s, *v));
        } catch (const Error&) {
          return std::nullopt;
        }
      }
      std::vector<SymV> args;
      for (const Term& a : t.args()) {
        auto v = eval_sym(a, env);
        if (!v) return std::nullopt;
        args.push_back(*v);
      }
      return eval_sym_dot(t.fn(), args);
    }
    default:
      return std::nullopt;  // u-applications and placeholders are opaque
  }
}

}  // namespace

bool verify_syntax_fact(const Formula& f0) {
  if (!f0.ok() || !f0.sentence() || f0.has_meta()) return false;
  SymEnv env;
  int slot = 0;
  Formula cur = f0;
  while (cur.kind() == FormulaKind::All) {
    Var v = cur.qvar();
    const Formula& body = cur.sub()[0];
    bool guarded = false;
    if (body.kind() == FormulaKind::Imp) {
      const Formula& g = body.sub()[0];
      if (g.kind() == FormulaKind::Atom && g.pred() == PredSym::Dotted &&
          g.terms().size() == 1 && g.terms()[0] == Term::var(v)) {
        switch (g.dpred()) {
          case DotPred::L0:
            env[v.index] = SymV::mk_f(Formula::meta_sentence(slot++));
            guarded = true;
            break;
          case DotPred::Term0PA:
            env[v.index] =
                SymV::mk_t(Term::meta_term(slot++, MetaTermSort::ClosedPA));
            guarded = true;
            break;
          case DotPred::Term0L:
            env[v.index] =
                SymV::mk_t(Term::meta_term(slot++, MetaTermSort::ClosedL));
            guarded = true;
            break;
          default:
            break;
        }
      }
      if (guarded) {
        cur = body.sub()[1];
        continue;
      }
    }
    env[v.index] = SymV::mk_slot(slot++);
    cur = body;
  }
  if (cur.kind() == FormulaKind::Atom && cur.pred() == PredSym::Eq) {
    auto l = eval_sym(cur.terms()[0], env);
    auto r = eval_sym(cur.terms()[1], env);
    return l && r && sym_equal(*l, *r);
  }
  // A dotted-predicate matrix is certified when the symbolic value of its
  // argument satisfies the predicate under every admissible instantiation of
  // the guard variables.
  if (cur.kind() == FormulaKind::Atom && cur.pred() == PredSym::Dotted &&
      cur.terms().size() == 1) {
    auto v0 = eval_sym(cur.terms()[0], env);
    if (!v0) return false;
    SymV v = sym_norm(*v0);
    if (v.k == SymV::K::Con) return dot_holds(cur.dpred(), {v.con});
    switch (cur.dpred()) {
      case DotPred::L0:
        // Meta markers stand for sentences and closed terms, so emptiness of
        // the object-variable set is instantiation-independent.
        return v.k == SymV::K::CodeF && v.f.free_vars().empty();
      case DotPred::Term0PA:
        return v.k == SymV::K::CodeT && v.t.closed() && v.t.arithmetic();
      case DotPred::Term0L:
        return v.k == SymV::K::CodeT && v.t.closed();
      default:
        return false;
    }
  }
  return false;
}

// ---------- congruence replacement ----------

bool cong_term(const Term& a, const Term& b, const Term& s, const Term& t) {
  if (a == b) return true;
  if (a == s && b == t) return true;
  // Succ folds over numerals on construction, so a rewrite inside S(...) can
  // surface as a literal numeral; peel one S against one unit of the value.
  if (a.kind() == TermKind::Succ && b.kind() == TermKind::Numeral &&
      b.value() > 0)
    return cong_term(a.args()[0], numeral(b.value() - 1), s, t);
  if (a.kind() == TermKind::Numeral && b.kind() == TermKind::Succ &&
      a.value() > 0)
    return cong_term(numeral(a.value() - 1), b.args()[0], s, t);
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case TermKind::Succ:
    case TermKind::Plus:
    case TermKind::Times:
    case TermKind::UFun:
      break;
    case TermKind::DotApp:
      if (a.fn() != b.fn()) return false;
      break;
    default:
      return false;  // distinct leaves
  }
  if (a.args().size() != b.args().size()) return false;
  for (std::size_t i = 0; i < a.args().size(); ++i)
    if (!cong_term(a.args()[i], b.args()[i], s, t)) return false;
  return true;
}

bool cong_formula(const Formula& a, const Formula& b, const Term& s,
                  const Term& t) {
  if (a == b) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case FormulaKind::Atom: {
      if (a.pred() != b.pred()) return false;
      if (a.pred() == PredSym::Dotted && a.dpred() != b.dpred()) return false;
      if (a.pred() == PredSym::Pr && a.pr_system() != b.pr_system())
        return false;
      if (a.terms().size() != b.terms().size()) return false;
      for (std::size_t i = 0; i < a.terms().size(); ++i)
        if (!cong_term(a.terms()[i], b.terms()[i], s, t)) return false;
      return true;
    }
    case FormulaKind::All:
    case FormulaKind::Ex: {
      if (a.qvar() != b.qvar()) return false;
      // Replacement below a binder that captures a variable of the equation
      // would be unsound.
      const std::vector<int>& sf = s.free_vars();
      const std::vector<int>& tf = t.free_vars();
      if (std::binary_search(sf.begin(), sf.end(), a.qvar().index) ||
          std::binary_search(tf.begin(), tf.end(), a.qvar().index))
        return a == b;
      return cong_formula(a.sub()[0], b.sub()[0], s, t);
    }
    default: {
      if (a.sub().size() != b.sub().size()) return false;
      for (std::size_t i = 0; i < a.sub().size(); ++i)
        if (!cong_formula(a.sub()[i], b.sub()[i], s, t)) return false;
      return true;
    }
  }
}

// ---------- the checker ----------

namespace {

struct Failure {
  int step;
  std::string reason;
};

}  // namespace

CheckResult check_proof(const Proof& p, TheoremDB& db) {
  CheckResult res;
  Registry& reg = registry();

  auto fail = [&](int step_1based, const std::string& why) -> CheckResult {
    res.accepted = false;
    res.failed_step = step_1based;
    res.reason = why;
    return res;
  };

  const SystemDef* sys = reg.find(p.system);
  if (!sys) return fail(0, "unknown system: " + p.system);
  if (p.steps.empty()) return fail(0, "empty proof");

  const int n = static_cast<int>(p.steps.size());
  std::vector<std::set<int>> hyp_deps(n);

  for (int i = 0; i < n; ++i) {
    const Step& st = p.steps[i];
    const Formula& f = st.formula;
    const Justification& j = st.just;
    const int here = i + 1;
    res.rule_uses[jkind_name(j.kind)]++;

    if (!f.ok()) return fail(here, "missing formula");
    if (f.has_meta()) return fail(here, "formula contains placeholders");

    for (int ln : j.lines)
      if (ln < 1 || ln > i)
        return fail(here, "premise index " + std::to_string(ln) +
                              " not an earlier step");
    auto prem = [&](std::size_t k) -> const Formula& {
      return p.steps[j.lines[k] - 1].formula;
    };
    auto inherit = [&](std::set<int>& out) {
      for (int ln : j.lines) {
        const std::set<int>& h = hyp_deps[ln - 1];
        out.insert(h.begin(), h.end());
      }
    };
    auto require_untainted = [&](const char* rule) -> std::optional<std::string> {
      for (int ln : j.lines)
        if (!hyp_deps[ln - 1].empty())
          return std::string(rule) +
                 " premise depends on an undischarged hypothesis (step " +
                 std::to_string(ln) + ")";
      return std::nullopt;
    };
    auto need_rule = [&](RuleId r) -> std::optional<std::string> {
      if (!sys->rules.count(r))
        return std::string("rule ") + rule_name(r) + " not available in " +
               p.system;
      return std::nullopt;
    };
    auto arity = [&](std::size_t want) -> bool { return j.lines.size() == want; };

    std::set<int>& taint = hyp_deps[i];

    switch (j.kind) {
      case JKind::Axiom: {
        const Formula* ax = sys->axiom(j.axiom_name);
        if (!ax) return fail(here, "no axiom named " + j.axiom_name + " in " +
                                       p.system);
        if (*ax != f) return fail(here, "formula does not match axiom " +
                                            j.axiom_name);
        break;
      }
      case JKind::Schema: {
        if (!j.schema || !j.params) return fail(here, "schema citation incomplete");
        if (!sys->schemata.count(*j.schema))
          return fail(here, std::string("schema ") + schema_name(*j.schema) +
                                " not available in " + p.system);
        Formula inst;
        try {
          inst = instantiate(*j.schema, *j.params);
        } catch (const Error& e) {
          return fail(here, e.what());
        }
        if (inst != f)
          return fail(here, "formula does not match the schema instance");
        break;
      }
      case JKind::Compute:
        if (!verify_compute(f))
          return fail(here, "not a verifiable ground computation");
        break;
      case JKind::Taut: {
        std::vector<Formula> prems;
        for (std::size_t k = 0; k < j.lines.size(); ++k)
          prems.push_back(prem(k));
        if (!tautological_consequence(prems, f))
          return fail(here, "not a tautological consequence of the cited steps");
        inherit(taint);
        break;
      }
      case JKind::Fol: {
        switch (j.fol) {
          case FolRule::Ui: {
            if (!arity(1) || !j.term) return fail(here, "ui needs one premise and a term");
            const Formula& a = prem(0);
            if (a.kind() != FormulaKind::All)
              return fail(here, "ui premise is not universal");
            Formula want;
            try {
              want = subst(a.sub()[0], a.qvar(), *j.term);
            } catch (const CaptureError& e) {
              return fail(here, e.what());
            }
            if (want != f) return fail(here, "ui instance mismatch");
            break;
          }
          case FolRule::Ei: {
            if (!arity(1) || !j.term) return fail(here, "ei needs one premise and a term");
            if (f.kind() != FormulaKind::Ex)
              return fail(here, "ei conclusion is not existential");
            Formula want;
            try {
              want = subst(f.sub()[0], f.qvar(), *j.term);
            } catch (const CaptureError& e) {
              return fail(here, e.what());
            }
            if (want != prem(0)) return fail(here, "ei witness mismatch");
            break;
          }
          case FolRule::AllImp: {
            if (!arity(1)) return fail(here, "all_imp needs one premise");
            const Formula& a = prem(0);
            if (a.kind() != FormulaKind::All ||
                a.sub()[0].kind() != FormulaKind::Imp)
              return fail(here, "all_imp premise shape mismatch");
            Var v = a.qvar();
            Formula want = Formula::imp(Formula::forall(v, a.sub()[0].sub()[0]),
                                        Formula::forall(v, a.sub()[0].sub()[1]));
            if (want != f) return fail(here, "all_imp conclusion mismatch");
            break;
          }
          case FolRule::AllVacuous: {
            if (!arity(1) || !j.var)
              return fail(here, "all_vacuous needs one premise and a variable");
            const Formula& a = prem(0);
            const std::vector<int>& fv = a.free_vars();
            if (std::binary_search(fv.begin(), fv.end(), j.var->index))
              return fail(here, "all_vacuous variable occurs free in premise");
            if (f != Formula::forall(*j.var, a))
              return fail(here, "all_vacuous conclusion mismatch");
            break;
          }
          case FolRule::ExElim: {
            if (!arity(2)) return fail(here, "ex_elim needs two premises");
            const Formula& ex = prem(0);
            const Formula& all = prem(1);
            if (ex.kind() != FormulaKind::Ex || all.kind() != FormulaKind::All ||
                all.sub()[0].kind() != FormulaKind::Imp)
              return fail(here, "ex_elim premise shape mismatch");
            if (ex.qvar() != all.qvar() ||
                ex.sub()[0] != all.sub()[0].sub()[0])
              return fail(here, "ex_elim premises do not align");
            const Formula& psi = all.sub()[0].sub()[1];
            const std::vector<int>& fv = psi.free_vars();
            if (std::binary_search(fv.begin(), fv.end(), ex.qvar().index))
              return fail(here, "ex_elim variable occurs free in conclusion");
            if (psi != f) return fail(here, "ex_elim conclusion mismatch");
            break;
          }
          case FolRule::EqRefl: {
            if (!arity(0)) return fail(here, "eq_refl takes no premises");
            if (f.kind() != FormulaKind::Atom || f.pred() != PredSym::Eq ||
                f.terms()[0] != f.terms()[1])
              return fail(here, "eq_refl conclusion is not of the form t = t");
            break;
          }
          case FolRule::EqCong: {
            if (!arity(2)) return fail(here, "eq_cong needs two premises");
            const Formula& e = prem(0);
            if (e.kind() != FormulaKind::Atom || e.pred() != PredSym::Eq)
              return fail(here, "eq_cong first premise is not an equation");
            if (!cong_formula(prem(1), f, e.terms()[0], e.terms()[1]))
              return fail(here,
                          "conclusion is not the premise with occurrences "
                          "replaced along the equation");
            break;
          }
          case FolRule::UiImp: {
            if (!arity(0) || !j.term)
              return fail(here, "ui_imp takes no premises and needs a term");
            if (f.kind() != FormulaKind::Imp ||
                f.sub()[0].kind() != FormulaKind::All)
              return fail(here, "ui_imp conclusion shape mismatch");
            const Formula& all = f.sub()[0];
            Formula want;
            try {
              want = subst(all.sub()[0], all.qvar(), *j.term);
            } catch (const CaptureError& e) {
              return fail(here, e.what());
            }
            if (want != f.sub()[1])
              return fail(here, "ui_imp instance mismatch");
            break;
          }
          case FolRule::EiImp: {
            if (!arity(0) || !j.term)
              return fail(here, "ei_imp takes no premises and needs a term");
            if (f.kind() != FormulaKind::Imp ||
                f.sub()[1].kind() != FormulaKind::Ex)
              return fail(here, "ei_imp conclusion shape mismatch");
            const Formula& ex = f.sub()[1];
            Formula want;
            try {
              want = subst(ex.sub()[0], ex.qvar(), *j.term);
            } catch (const CaptureError& e) {
              return fail(here, e.what());
            }
            if (want != f.sub()[0])
              return fail(here, "ei_imp witness mismatch");
            break;
          }
          case FolRule::VacImp: {
            if (!arity(0)) return fail(here, "vac_imp takes no premises");
            if (f.kind() != FormulaKind::Imp ||
                f.sub()[1].kind() != FormulaKind::All ||
                f.sub()[1].sub()[0] != f.sub()[0])
              return fail(here, "vac_imp conclusion shape mismatch");
            const std::vector<int>& fv = f.sub()[0].free_vars();
            if (std::binary_search(fv.begin(), fv.end(),
                                   f.sub()[1].qvar().index))
              return fail(here, "vac_imp variable occurs free in the body");
            break;
          }
          case FolRule::CongImp: {
            if (!arity(0)) return fail(here, "cong_imp takes no premises");
            if (f.kind() != FormulaKind::Imp ||
                f.sub()[0].kind() != FormulaKind::Atom ||
                f.sub()[0].pred() != PredSym::Eq ||
                f.sub()[1].kind() != FormulaKind::Imp)
              return fail(here, "cong_imp conclusion shape mismatch");
            const Formula& e = f.sub()[0];
            if (!cong_formula(f.sub()[1].sub()[0], f.sub()[1].sub()[1],
                              e.terms()[0], e.terms()[1]))
              return fail(here,
                          "consequent is not the antecedent with occurrences "
                          "replaced along the equation");
            break;
          }
        }
        inherit(taint);
        break;
      }
      case JKind::Hyp:
        taint.insert(i);
        break;
      case JKind::Mp: {
        if (auto e = need_rule(RuleId::MP)) return fail(here, *e);
        if (!arity(2)) return fail(here, "mp needs two premises");
        const Formula& ab = prem(0);
        if (ab.kind() != FormulaKind::Imp)
          return fail(here, "mp first premise is not an implication");
        if (ab.sub()[0] != prem(1))
          return fail(here, "mp antecedent mismatch");
        if (ab.sub()[1] != f) return fail(here, "mp conclusion mismatch");
        inherit(taint);
        break;
      }
      case JKind::Ug: {
        if (auto e = need_rule(RuleId::UG)) return fail(here, *e);
        if (!arity(1) || !j.var)
          return fail(here, "ug needs one premise and a variable");
        if (f != Formula::forall(*j.var, prem(0)))
          return fail(here, "ug conclusion mismatch");
        for (int h : hyp_deps[j.lines[0] - 1]) {
          const std::vector<int>& fv = p.steps[h].formula.free_vars();
          if (std::binary_search(fv.begin(), fv.end(), j.var->index))
            return fail(here,
                        "ug generalizes a variable free in hypothesis step " +
                            std::to_string(h + 1));
        }
        inherit(taint);
        break;
      }
      case JKind::NecT: {
        if (auto e = need_rule(RuleId::NecT)) return fail(here, *e);
        if (!arity(1)) return fail(here, "nec_t needs one premise");
        if (auto e = require_untainted("nec_t")) return fail(here, *e);
        if (!prem(0).sentence())
          return fail(here, "nec_t premise must be a sentence");
        if (f != nec_t_formula(prem(0)))
          return fail(here, "nec_t conclusion mismatch");
        res.nec_uses++;
        if (sys->nec_budget && res.nec_uses > *sys->nec_budget)
          return fail(here, "truth necessitation budget of " + p.system +
                                " exceeded");
        break;
      }
      case JKind::ConecT: {
        if (auto e = need_rule(RuleId::ConecT)) return fail(here, *e);
        if (!arity(1)) return fail(here, "conec_t needs one premise");
        if (auto e = require_untainted("conec_t")) return fail(here, *e);
        const Formula& a = prem(0);
        if (a.kind() != FormulaKind::Atom || a.pred() != PredSym::T ||
            a.terms()[0].kind() != TermKind::Numeral)
          return fail(here, "conec_t premise is not T of a literal code");
        std::optional<Formula> dec = decode_formula(a.terms()[0].value());
        if (!dec || !dec->sentence())
          return fail(here, "conec_t premise code is not a sentence");
        if (*dec != f) return fail(here, "conec_t conclusion mismatch");
        res.nec_uses++;
        if (sys->nec_budget && res.nec_uses > *sys->nec_budget)
          return fail(here, "truth necessitation budget of " + p.system +
                                " exceeded");
        break;
      }
      case JKind::NecK: {
        if (auto e = need_rule(RuleId::NecK)) return fail(here, *e);
        if (!arity(1)) return fail(here, "nec_k needs one premise");
        if (auto e = require_untainted("nec_k")) return fail(here, *e);
        if (!prem(0).sentence())
          return fail(here, "nec_k premise must be a sentence");
        if (f != nec_k_formula(prem(0)))
          return fail(here, "nec_k conclusion mismatch");
        break;
      }
      case JKind::NecK1: {
        if (auto e = need_rule(RuleId::NecK1)) return fail(here, *e);
        if (!arity(1)) return fail(here, "nec_k1 needs one premise");
        if (auto e = require_untainted("nec_k1")) return fail(here, *e);
        if (!prem(0).sentence())
          return fail(here, "nec_k1 premise must be a sentence");
        if (f != nec_k1_formula(prem(0)))
          return fail(here, "nec_k1 conclusion mismatch");
        break;
      }
      case JKind::TOverK: {
        if (auto e = need_rule(RuleId::TOverK)) return fail(here, *e);
        if (!arity(1)) return fail(here, "t_over_k needs one premise");
        if (auto e = require_untainted("t_over_k")) return fail(here, *e);
        const Formula& a = prem(0);
        if (a.kind() != FormulaKind::Atom || a.pred() != PredSym::T ||
            a.terms()[0].kind() != TermKind::Numeral)
          return fail(here, "t_over_k premise is not T of a literal code");
        std::optional<Formula> dec = decode_formula(a.terms()[0].value());
        if (!dec || !dec->sentence())
          return fail(here, "t_over_k premise code is not a sentence");
        if (f != all_agents_know(a.terms()[0]))
          return fail(here, "t_over_k conclusion mismatch");
        break;
      }
      case JKind::D1: {
        if (!j.f1) return fail(here, "d1 needs a theorem formula");
        if (!reg.find(j.system))
          return fail(here, "unknown system: " + j.system);
        if (!db.contains(j.system, *j.f1))
          return fail(here, "d1 cites a formula that is not a checked theorem of " +
                                j.system);
        if (f != d1_formula(j.system, *j.f1))
          return fail(here, "d1 conclusion mismatch");
        break;
      }
      case JKind::D2: {
        if (!j.f1 || !j.f2) return fail(here, "d2 needs two sentences");
        if (!reg.find(j.system))
          return fail(here, "unknown system: " + j.system);
        if (!j.f1->sentence() || !j.f2->sentence())
          return fail(here, "d2 parameters must be sentences");
        if (f != d2_formula(j.system, *j.f1, *j.f2))
          return fail(here, "d2 conclusion mismatch");
        break;
      }
      case JKind::InternalUi: {
        if (!arity(1)) return fail(here, "internal_ui needs one premise");
        if (auto e = require_untainted("internal_ui")) return fail(here, *e);
        const Formula& a = prem(0);
        if (a.kind() != FormulaKind::Atom || a.pred() != PredSym::Pr ||
            a.pr_system() != j.system ||
            a.terms()[0].kind() != TermKind::Numeral)
          return fail(here,
                      "internal_ui premise is not Pr[" + j.system +
                          "] of a literal code");
        std::optional<Formula> want =
            internal_ui_formula(j.system, a.terms()[0].value(), j.peel);
        if (!want)
          return fail(here,
                      "internal_ui premise does not code a guarded universal "
                      "sentence");
        if (*want != f) return fail(here, "internal_ui conclusion mismatch");
        break;
      }
      case JKind::InternalUiImp: {
        if (!arity(0) || !j.f1)
          return fail(here,
                      "internal_ui_imp takes no premises and needs a formula");
        std::optional<Formula> want =
            internal_ui_imp_formula(j.system, gc(*j.f1), j.peel);
        if (!want)
          return fail(here,
                      "internal_ui_imp parameter is not a guarded universal "
                      "sentence");
        if (*want != f)
          return fail(here, "internal_ui_imp conclusion mismatch");
        break;
      }
      case JKind::PrSigma: {
        if (!reg.find(j.system))
          return fail(here, "unknown system: " + j.system);
        if (f != pr_sigma_formula(j.system))
          return fail(here, "pr_sigma conclusion mismatch");
        break;
      }
      case JKind::PrMono: {
        if (!arity(1)) return fail(here, "pr_mono needs one premise");
        const Formula& a = prem(0);
        if (a.kind() != FormulaKind::Atom || a.pred() != PredSym::Pr ||
            a.pr_system() != j.system)
          return fail(here, "pr_mono premise is not Pr[" + j.system + "]");
        if (!reg.find(j.system2))
          return fail(here, "unknown system: " + j.system2);
        if (!reg.extends(j.system2, j.system))
          return fail(here, j.system2 + " does not extend " + j.system);
        if (f != Formula::pr(j.system2, a.terms()[0]))
          return fail(here, "pr_mono conclusion mismatch");
        inherit(taint);
        break;
      }
      case JKind::SyntaxFact:
        if (!verify_syntax_fact(f))
          return fail(here, "not a symbolically verifiable coding law");
        break;
      case JKind::Loeb: {
        if (!arity(1)) return fail(here, "loeb needs one premise");
        if (auto e = require_untainted("loeb")) return fail(here, *e);
        if (!reg.extends(p.system, "base"))
          return fail(here, p.system + " does not extend base");
        if (sys->nec_budget)
          return fail(here, "loeb is not available in budgeted approximations");
        const Formula& a = prem(0);
        if (a.kind() != FormulaKind::Imp)
          return fail(here, "loeb premise is not an implication");
        const Formula& pr_part = a.sub()[0];
        if (pr_part.kind() != FormulaKind::Atom ||
            pr_part.pred() != PredSym::Pr || pr_part.pr_system() != p.system ||
            pr_part.terms()[0].kind() != TermKind::Numeral)
          return fail(here, "loeb premise antecedent is not Pr[" + p.system +
                                "] of a literal code");
        std::optional<Formula> dec =
            decode_formula(pr_part.terms()[0].value());
        if (!dec || *dec != a.sub()[1])
          return fail(here,
                      "loeb premise code does not match its consequent");
        if (f != a.sub()[1]) return fail(here, "loeb conclusion mismatch");
        break;
      }
      case JKind::Theorem: {
        if (!j.f1) return fail(here, "theorem import needs a formula");
        if (!reg.find(j.system))
          return fail(here, "unknown system: " + j.system);
        if (!db.contains(j.system, *j.f1))
          return fail(here, "not a checked theorem of " + j.system);
        if (!reg.extends(p.system, j.system))
          return fail(here, p.system + " does not extend " + j.system);
        // A theorem of a system that can necessitate may hide uses that
        // would break this proof's budget accounting.
        if (sys->nec_budget && nec_capacity(reg.get(j.system)) != 0)
          return fail(here,
                      "budgeted approximations may only import theorems of "
                      "necessitation-free systems");
        if (f != *j.f1) return fail(here, "theorem formula mismatch");
        break;
      }
    }
  }

  if (!hyp_deps.back().empty())
    return fail(n, "conclusion depends on an undischarged hypothesis");

  res.accepted = true;
  res.failed_step = -1;
  db.insert(p.system, p.steps.back().formula, p);
  return res;
}

// ---------- proof text ----------

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t sep = s.find(" ; ", pos);
    if (sep == std::string::npos) {
      out.push_back(trim(s.substr(pos)));
      return out;
    }
    out.push_back(trim(s.substr(pos, sep - pos)));
    pos = sep + 3;
  }
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

std::optional<int> parse_index(const std::string& w) {
  if (w.empty()) return std::nullopt;
  for (char c : w)
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
  try {
    return std::stoi(w);
  } catch (...) {
    return std::nullopt;
  }
}

std::optional<Var> parse_var_token(const std::string& w) {
  if (w.size() < 2 || w[0] != 'v') return std::nullopt;
  auto idx = parse_index(w.substr(1));
  if (!idx) return std::nullopt;
  return Var{*idx};
}

// Returns nullopt when the text is not a justification (used by the
// field-splitting scan); throws nothing.
std::optional<Justification> try_parse_justification(const std::string& text) {
  std::vector<std::string> fields = split_fields(text);
  std::vector<std::string> head = words(fields[0]);
  if (head.empty()) return std::nullopt;
  const std::string& kw = head[0];
  Justification j;
  auto nums = [&](std::size_t from) -> std::optional<std::vector<int>> {
    std::vector<int> out;
    for (std::size_t i = from; i < head.size(); ++i) {
      auto n = parse_index(head[i]);
      if (!n) return std::nullopt;
      out.push_back(*n);
    }
    return out;
  };
  auto formula_field = [&](std::size_t i) -> std::optional<Formula> {
    if (i >= fields.size()) return std::nullopt;
    try {
      return parse_formula(fields[i]);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  auto term_field = [&](std::size_t i) -> std::optional<Term> {
    if (i >= fields.size()) return std::nullopt;
    try {
      return parse_term(fields[i]);
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  if (kw == "axiom") {
    if (head.size() != 2 || fields.size() != 1) return std::nullopt;
    j.kind = JKind::Axiom;
    j.axiom_name = head[1];
    return j;
  }
  if (kw == "schema") {
    if (head.size() < 2) return std::nullopt;
    auto id = schema_by_name(head[1]);
    if (!id) return std::nullopt;
    j.kind = JKind::Schema;
    j.schema = *id;
    std::optional<Var> v;
    if (head.size() == 3) {
      v = parse_var_token(head[2]);
      if (!v) return std::nullopt;
    } else if (head.size() > 3) {
      return std::nullopt;
    }
    auto a = formula_field(1);
    if (!a) return std::nullopt;
    std::optional<Formula> b;
    if (fields.size() >= 3) {
      b = formula_field(2);
      if (!b) return std::nullopt;
    }
    if (fields.size() > 3) return std::nullopt;
    j.params = SchemaParams(*a, b, v);
    return j;
  }
  if (kw == "compute") {
    if (head.size() != 1 || fields.size() != 1) return std::nullopt;
    j.kind = JKind::Compute;
    return j;
  }
  if (kw == "taut") {
    auto ls = nums(1);
    if (!ls || fields.size() != 1) return std::nullopt;
    j.kind = JKind::Taut;
    j.lines = *ls;
    return j;
  }
  if (kw == "fol") {
    if (head.size() < 2) return std::nullopt;
    j.kind = JKind::Fol;
    const std::string& r = head[1];
    if (r == "ui" || r == "ei") {
      j.fol = r == "ui" ? FolRule::Ui : FolRule::Ei;
      if (head.size() != 3 || fields.size() != 2) return std::nullopt;
      auto ln = parse_index(head[2]);
      auto t = term_field(1);
      if (!ln || !t) return std::nullopt;
      j.lines = {*ln};
      j.term = t;
      return j;
    }
    if (r == "all_imp") {
      j.fol = FolRule::AllImp;
      if (head.size() != 3 || fields.size() != 1) return std::nullopt;
      auto ln = parse_index(head[2]);
      if (!ln) return std::nullopt;
      j.lines = {*ln};
      return j;
    }
    if (r == "all_vacuous") {
      j.fol = FolRule::AllVacuous;
      if (head.size() != 4 || fields.size() != 1) return std::nullopt;
      auto ln = parse_index(head[2]);
      auto v = parse_var_token(head[3]);
      if (!ln || !v) return std::nullopt;
      j.lines = {*ln};
      j.var = v;
      return j;
    }
    if (r == "ex_elim" || r == "eq_cong") {
      j.fol = r == "ex_elim" ? FolRule::ExElim : FolRule::EqCong;
      if (head.size() != 4 || fields.size() != 1) return std::nullopt;
      auto l1_ = parse_index(head[2]);
      auto l2_ = parse_index(head[3]);
      if (!l1_ || !l2_) return std::nullopt;
      j.lines = {*l1_, *l2_};
      return j;
    }
    if (r == "eq_refl") {
      j.fol = FolRule::EqRefl;
      if (head.size() != 2 || fields.size() != 1) return std::nullopt;
      return j;
    }
    if (r == "ui_imp" || r == "ei_imp") {
      j.fol = r == "ui_imp" ? FolRule::UiImp : FolRule::EiImp;
      if (head.size() != 2 || fields.size() != 2) return std::nullopt;
      auto t = term_field(1);
      if (!t) return std::nullopt;
      j.term = t;
      return j;
    }
    if (r == "vac_imp") {
      j.fol = FolRule::VacImp;
      if (head.size() != 2 || fields.size() != 1) return std::nullopt;
      return j;
    }
    if (r == "cong_imp") {
      j.fol = FolRule::CongImp;
      if (head.size() != 2 || fields.size() != 1) return std::nullopt;
      return j;
    }
    return std::nullopt;
  }
  if (kw == "hyp") {
    if (head.size() != 1 || fields.size() != 1) return std::nullopt;
    j.kind = JKind::Hyp;
    return j;
  }
  if (kw == "mp") {
    auto ls = nums(1);
    if (!ls || ls->size() != 2 || fields.size() != 1) return std::nullopt;
    j.kind = JKind::Mp;
    j.lines = *ls;
    return j;
  }
  if (kw == "ug") {
    if (head.size() != 3 || fields.size() != 1) return std::nullopt;
    auto ln = parse_index(head[1]);
    auto v = parse_var_token(head[2]);
    if (!ln || !v) return std::nullopt;
    j.kind = JKind::Ug;
    j.lines = {*ln};
    j.var = v;
    return j;
  }
  auto unary = [&](JKind k) -> std::optional<Justification> {
    if (head.size() != 2 || fields.size() != 1) return std::nullopt;
    auto ln = parse_index(head[1]);
    if (!ln) return std::nullopt;
    j.kind = k;
    j.lines = {*ln};
    return j;
  };
  if (kw == "nec_t") return unary(JKind::NecT);
  if (kw == "conec_t") return unary(JKind::ConecT);
  if (kw == "nec_k") return unary(JKind::NecK);
  if (kw == "nec_k1") return unary(JKind::NecK1);
  if (kw == "t_over_k") return unary(JKind::TOverK);
  if (kw == "loeb") return unary(JKind::Loeb);
  if (kw == "d1" || kw == "theorem") {
    if (head.size() != 2 || fields.size() != 2) return std::nullopt;
    auto a = formula_field(1);
    if (!a) return std::nullopt;
    j.kind = kw == "d1" ? JKind::D1 : JKind::Theorem;
    j.system = head[1];
    j.f1 = a;
    return j;
  }
  if (kw == "d2") {
    if (head.size() != 2 || fields.size() != 3) return std::nullopt;
    auto a = formula_field(1);
    auto b = formula_field(2);
    if (!a || !b) return std::nullopt;
    j.kind = JKind::D2;
    j.system = head[1];
    j.f1 = a;
    j.f2 = b;
    return j;
  }
  if (kw == "internal_ui") {
    if (head.size() < 3 || head.size() > 4 || fields.size() != 1)
      return std::nullopt;
    auto ln = parse_index(head[2]);
    if (!ln) return std::nullopt;
    j.kind = JKind::InternalUi;
    j.system = head[1];
    j.lines = {*ln};
    if (head.size() == 4) {
      auto k = parse_index(head[3]);
      if (!k) return std::nullopt;
      j.peel = *k;
    }
    return j;
  }
  if (kw == "internal_ui_imp") {
    if (head.size() < 2 || head.size() > 3 || fields.size() != 2)
      return std::nullopt;
    j.kind = JKind::InternalUiImp;
    j.system = head[1];
    if (head.size() == 3) {
      auto k = parse_index(head[2]);
      if (!k) return std::nullopt;
      j.peel = *k;
    }
    auto g = formula_field(1);
    if (!g) return std::nullopt;
    j.f1 = g;
    return j;
  }
  if (kw == "pr_sigma") {
    if (head.size() != 2 || fields.size() != 1) return std::nullopt;
    j.kind = JKind::PrSigma;
    j.system = head[1];
    return j;
  }
  if (kw == "pr_mono") {
    if (head.size() != 4 || fields.size() != 1) return std::nullopt;
    auto ln = parse_index(head[3]);
    if (!ln) return std::nullopt;
    j.kind = JKind::PrMono;
    j.system = head[1];
    j.system2 = head[2];
    j.lines = {*ln};
    return j;
  }
  if (kw == "syntax_fact") {
    if (head.size() != 1 || fields.size() != 1) return std::nullopt;
    j.kind = JKind::SyntaxFact;
    return j;
  }
  return std::nullopt;
}

}  // namespace

Proof parse_proof(const std::string& text) {
  Proof p;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  int next_index = 1;
  while (std::getline(is, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.rfind("system ", 0) == 0 && p.steps.empty()) {
      if (!p.system.empty())
        throw ParseError("duplicate system header", lineno, 1);
      p.system = trim(line.substr(7));
      continue;
    }
    std::size_t first = line.find(" | ");
    if (first == std::string::npos)
      throw ParseError("expected `<index> | <formula> | <justification>`",
                       lineno, 1);
    auto idx = parse_index(trim(line.substr(0, first)));
    if (!idx) throw ParseError("step index is not a number", lineno, 1);
    if (*idx != next_index)
      throw ParseError("step index " + std::to_string(*idx) +
                           " out of order (expected " +
                           std::to_string(next_index) + ")",
                       lineno, 1);
    std::string rest = line.substr(first + 3);

    // The formula/justification separator is the first ` | ` whose prefix is
    // a complete formula and whose suffix is a justification; justification
    // keywords never parse as formulas, so the split is unambiguous.
    Step st;
    bool found = false;
    std::size_t pos = 0;
    while (true) {
      std::size_t sep = rest.find(" | ", pos);
      if (sep == std::string::npos) break;
      std::string ftext = trim(rest.substr(0, sep));
      std::string jtext = trim(rest.substr(sep + 3));
      std::optional<Justification> jj = try_parse_justification(jtext);
      if (jj) {
        try {
          st.formula = parse_formula(ftext);
          st.just = *jj;
          found = true;
          break;
        } catch (const Error&) {
          // formula prefix incomplete; try the next separator
        }
      }
      pos = sep + 3;
    }
    if (!found)
      throw ParseError("cannot split line into formula and justification",
                       lineno, 1);
    p.steps.push_back(std::move(st));
    ++next_index;
  }
  if (p.system.empty())
    throw ParseError("missing `system <name>` header", lineno ? lineno : 1, 1);
  return p;
}

std::string to_string(const Justification& j) {
  std::ostringstream os;
  os << jkind_name(j.kind);
  switch (j.kind) {
    case JKind::Axiom:
      os << " " << j.axiom_name;
      break;
    case JKind::Schema:
      os << " " << schema_name(*j.schema);
      if (j.params->v) os << " v" << j.params->v->index;
      os << " ; " << to_string(j.params->a);
      if (j.params->b) os << " ; " << to_string(*j.params->b);
      break;
    case JKind::Taut:
      for (int ln : j.lines) os << " " << ln;
      break;
    case JKind::Fol:
      os << " " << fol_rule_name(j.fol);
      for (int ln : j.lines) os << " " << ln;
      if (j.var) os << " v" << j.var->index;
      if (j.term) os << " ; " << to_string(*j.term);
      break;
    case JKind::Mp:
    case JKind::NecT:
    case JKind::ConecT:
    case JKind::NecK:
    case JKind::NecK1:
    case JKind::TOverK:
    case JKind::Loeb:
      for (int ln : j.lines) os << " " << ln;
      break;
    case JKind::Ug:
      os << " " << j.lines[0] << " v" << j.var->index;
      break;
    case JKind::D1:
    case JKind::Theorem:
      os << " " << j.system << " ; " << to_string(*j.f1);
      break;
    case JKind::D2:
      os << " " << j.system << " ; " << to_string(*j.f1) << " ; "
         << to_string(*j.f2);
      break;
    case JKind::InternalUi:
      os << " " << j.system << " " << j.lines[0];
      if (j.peel >= 0) os << " " << j.peel;
      break;
    case JKind::InternalUiImp:
      os << " " << j.system;
      if (j.peel >= 0) os << " " << j.peel;
      os << " ; " << to_string(*j.f1);
      break;
    case JKind::PrSigma:
      os << " " << j.system;
      break;
    case JKind::PrMono:
      os << " " << j.system << " " << j.system2 << " " << j.lines[0];
      break;
    default:
      break;
  }
  return os.str();
}

std::string to_string(const Proof& p) {
  std::ostringstream os;
  os << "system " << p.system << "\n";
  for (std::size_t i = 0; i < p.steps.size(); ++i)
    os << (i + 1) << " | " << to_string(p.steps[i].formula) << " | "
       << to_string(p.steps[i].just) << "\n";
  return os.str();
}

}  // namespace ktlab
