#pragma once

#include "ktlab/kernel.hpp"
#include "ktlab/systems.hpp"

#include <string>
#include <vector>

namespace ktlab {

// Assembles checkable proofs step by step.  Each method appends one step and
// returns its 1-based index; conclusions are computed from the premises
// wherever the rule determines them, so call sites state only what is not
// forced.  Malformed uses throw Error immediately rather than waiting for the
// checker.  The result of take() still goes through check_proof; the builder
// adds convenience, not trust.
class ProofBuilder {
 public:
  explicit ProofBuilder(std::string system);

  int axiom(const std::string& name);
  int schema(SchemaId id, const SchemaParams& params);
  int compute(Formula f);
  int taut(Formula f, std::vector<int> premises = {});
  int hyp(Formula f);
  int mp(int imp, int ant);
  int ug(int line, Var v);

  int ui(int line, const Term& t);
  int ei(const Formula& ex_target, int line, const Term& witness);
  int all_imp(int line);
  int all_vacuous(int line, Var v);
  int ex_elim(int ex_line, int all_line);
  int eq_refl(const Term& t);
  int eq_cong(int eq_line, int in_line, Formula result);
  int ui_imp(const Formula& all, const Term& t);
  int ei_imp(const Formula& ex_target, const Term& witness);
  int vac_imp(const Formula& body, Var v);
  int cong_imp(const Formula& eq, const Formula& from, Formula to);

  int nec_t(int line);
  int conec_t(int line);
  int nec_k(int line);
  int nec_k1(int line);
  int t_over_k(int line);

  int d1(const std::string& system, const Formula& phi);
  int d2(const std::string& system, const Formula& phi, const Formula& psi);
  int internal_ui(const std::string& system, int line, int peel = -1);
  int internal_ui_imp(const std::string& system, const Formula& g,
                      int peel = -1);
  int pr_sigma(const std::string& system);
  int pr_mono(const std::string& from, const std::string& to, int line);
  int syntax_fact(Formula f);
  int loeb(int line);
  int theorem(const std::string& system, const Formula& f);

  // From a line of shape forall v (guard -> chi) with a computable guard
  // instance, emits ui / compute / mp and returns the line holding chi[t/v].
  int instantiate_guarded(int line, const Term& t);

  const Formula& formula(int line) const;
  int size() const { return static_cast<int>(proof_.steps.size()); }
  const std::string& system() const { return proof_.system; }

  Proof take();

 private:
  int push(Formula f, Justification j);
  const Formula& at(int line) const;

  Proof proof_;
};

}  // namespace ktlab
