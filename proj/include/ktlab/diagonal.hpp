#pragma once

#include "ktlab/kernel.hpp"
#include "ktlab/systems.hpp"

namespace ktlab {

// Output of the fixed-point constructor: theta together with a checkable
// equivalence proof.
struct FixedPointResult {
  Formula theta;        // free variables: those of phi minus the code slot
  Formula equivalence;  // forall x (theta <-> phi[slot := quote(theta)])
  Proof witness_proof;  // proof of `equivalence` over the arithmetic ground
                        // system, built from compute / eq_cong / taut / ug
  Term self_term;       // ground dotted term evaluating to gc(theta)
};

// Builds theta with theta <-> phi[y := quote(theta)] via the substitution
// dot-function applied to phi's own code.  Throws when y is not free in phi.
FixedPointResult fixed_point(const Formula& phi, Var y);

// Common-knowledge operator relative to a unary agent filter A, plus the
// guarded equivalence with its unfolding.
struct CkEquivalence {
  Formula ck;           // one free variable, u
  Var u;
  Formula psi;          // the unfolding: forall x (A(x) -> K2(x,u) & K2(x, ck-at-u))
  FixedPointResult fp;  // underlying fixed point (equivalence proved over base)
  Proof guarded;        // dcb proof of forall u (.L0(u) -> (ck <-> psi));
                        // check fp.witness_proof first, it is imported here
};

// Throws when A does not have exactly one free variable.
CkEquivalence make_ck(const Formula& A);

// Registers a system whose reflection axiom mentions its own provability
// predicate; the template cites Pr[SELF] in exactly one axiom.
const SystemDef& make_self_ref_system(SystemDef template_def);

// Named fixed points used throughout the derivation scripts.
FixedPointResult knowledge_of_own_negation();        // k <-> K1(.neg(quote(k)))
FixedPointResult unknown_sentence();                 // d <-> !K1(quote(d))
FixedPointResult truth_teller();                     // t <-> T(quote(t))
FixedPointResult liar();                             // l <-> !T(quote(l))
FixedPointResult henkin(const std::string& system);  // h <-> Pr[system](quote(h))

}  // namespace ktlab
