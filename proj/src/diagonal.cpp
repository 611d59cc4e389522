#include "ktlab/diagonal.hpp"

#include "ktlab/coding.hpp"
#include "ktlab/proofbuilder.hpp"

#include <algorithm>

namespace ktlab {

namespace {

// Maps the code held by t to the code of that formula with the numeral of
// the code substituted for y.
Term self_application(const Term& t, Var y) {
  return Term::dot(DotFn::Sbt,
                   {t, Term::dot(DotFn::Gq, {t}), numeral(var_code(y))});
}

}  // namespace

FixedPointResult fixed_point(const Formula& phi, Var y) {
  const std::vector<int>& fv = phi.free_vars();
  if (!std::binary_search(fv.begin(), fv.end(), y.index))
    throw Error("fixed point slot v" + std::to_string(y.index) +
                " is not free in the formula");

  Formula beta = subst(phi, y, self_application(Term::var(y), y));
  Term b = numeral(gc(beta));
  Term self = self_application(b, y);
  Formula theta = subst(phi, y, self);
  Term code = gq(theta);
  Formula phi_theta = subst(phi, y, code);

  ProofBuilder pb("base");
  int eq1 = pb.compute(Formula::eq(self, code));
  int fwd0 = pb.taut(Formula::imp(theta, theta));
  int fwd = pb.eq_cong(eq1, fwd0, Formula::imp(theta, phi_theta));
  int bwd0 = pb.taut(Formula::imp(phi_theta, phi_theta));
  int eq2 = pb.compute(Formula::eq(code, self));
  int bwd = pb.eq_cong(eq2, bwd0, Formula::imp(phi_theta, theta));
  Formula matrix = Formula::iff(theta, phi_theta);
  int line = pb.taut(matrix, {fwd, bwd});

  Formula equivalence = matrix;
  std::vector<int> xs;
  for (int i : fv)
    if (i != y.index) xs.push_back(i);
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) {
    line = pb.ug(line, Var{*it});
    equivalence = pb.formula(line);
  }

  FixedPointResult out;
  out.theta = std::move(theta);
  out.equivalence = std::move(equivalence);
  out.witness_proof = pb.take();
  out.self_term = std::move(self);
  return out;
}

CkEquivalence make_ck(const Formula& A) {
  if (A.free_vars().size() != 1)
    throw Error("agent filter must have exactly one free variable");
  Var x{A.free_vars()[0]};
  int base_idx = fresh_var_index({A});
  Var u{base_idx};
  Var v{base_idx + 1};

  // Each A-agent knows u and knows the v-coded formula at the numeral of u.
  Term at_u = Term::dot(DotFn::Sbt,
                        {Term::var(v), Term::dot(DotFn::Gq, {Term::var(u)}),
                         numeral(var_code(u))});
  Formula body = Formula::land(k2(Term::var(x), Term::var(u)),
                               k2(Term::var(x), at_u));
  Formula phi = guard_ag(x, Formula::imp(A, body));

  CkEquivalence out;
  out.fp = fixed_point(phi, v);
  out.ck = out.fp.theta;
  out.u = u;
  out.psi = subst(phi, v, gq(out.ck));

  ProofBuilder pb("dcb");
  int imported = pb.theorem("base", out.fp.equivalence);
  int open = pb.ui(imported, Term::var(u));
  int guarded = pb.taut(
      Formula::imp(Formula::datom(DotPred::L0, {Term::var(u)}),
                   pb.formula(open)),
      {open});
  pb.ug(guarded, u);
  out.guarded = pb.take();
  return out;
}

const SystemDef& make_self_ref_system(SystemDef template_def) {
  return register_self_referential(std::move(template_def));
}

namespace {

FixedPointResult unary_fixed_point(const Formula& phi) {
  return fixed_point(phi, Var{0});
}

}  // namespace

FixedPointResult knowledge_of_own_negation() {
  return unary_fixed_point(
      k1(Term::dot(DotFn::Neg, {Term::var(0)})));
}

FixedPointResult unknown_sentence() {
  return unary_fixed_point(Formula::lnot(k1(Term::var(0))));
}

FixedPointResult truth_teller() {
  return unary_fixed_point(Formula::atom(PredSym::T, {Term::var(0)}));
}

FixedPointResult liar() {
  return unary_fixed_point(
      Formula::lnot(Formula::atom(PredSym::T, {Term::var(0)})));
}

FixedPointResult henkin(const std::string& system) {
  registry().get(system);  // validates the name
  return unary_fixed_point(Formula::pr(system, Term::var(0)));
}

}  // namespace ktlab
