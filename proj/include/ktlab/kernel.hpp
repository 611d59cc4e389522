#ifndef KTLAB_KERNEL_HPP
#define KTLAB_KERNEL_HPP

#include "ktlab/coding.hpp"
#include "ktlab/systems.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

// Hilbert-style proof objects and their checker.  A proof is a numbered list
// of steps, each carrying a formula and a justification; checking is a pure
// function of (registry, theorem database, proof).  Conclusions of accepted
// proofs enter the theorem database keyed by their code.

namespace ktlab {

enum class JKind : std::uint8_t {
  Axiom,       // named axiom of the target system
  Schema,      // schema instance (id + parameters)
  Compute,     // true ground arithmetic/coding fact
  Taut,        // tautological consequence of cited lines
  Fol,         // quantifier/equality rule
  Hyp,         // local assumption; taints everything derived from it
  Mp, Ug,
  NecT, ConecT, NecK, NecK1, TOverK,
  D1,          // cite a checked theorem phi of S: conclude Pr[S](q phi)
  D2,          // provability distributes over implication, per instance
  InternalUi,  // universal instantiation under Pr
  InternalUiImp,  // premise-less form: Pr of a guarded universal -> Pr of instances
  PrSigma,     // internalized sigma-1 completeness of Pr[S]
  PrMono,      // Pr[S](t) -> Pr[S'](t) for S' extending S
  SyntaxFact,  // universally quantified coding law, verified symbolically
  Loeb,
  Theorem,     // import a checked theorem of a subsystem
};

enum class FolRule : std::uint8_t {
  Ui,          // forall v phi  =>  phi[t/v]
  Ei,          // phi[t/v]  =>  exists v phi
  AllImp,      // forall v (phi -> psi)  =>  forall v phi -> forall v psi
  AllVacuous,  // phi  =>  forall v phi, v not free in phi
  ExElim,      // exists v phi, forall v (phi -> psi), v not free in psi => psi
  EqRefl,      // t = t
  EqCong,      // s = t, phi  =>  phi with some occurrences of s replaced by t
  UiImp,       // premise-less: forall v phi -> phi[t/v]
  EiImp,       // premise-less: phi[t/v] -> exists v phi
  VacImp,      // premise-less: phi -> forall v phi, v not free in phi
  CongImp,     // premise-less: s = t -> (phi -> phi'), phi' = phi with s ~> t
};

const char* jkind_name(JKind k);
const char* fol_rule_name(FolRule r);

struct Justification {
  JKind kind{};
  FolRule fol{};
  std::string system;            // d1/d2/internal_ui/pr_sigma/pr_mono/theorem
  std::string system2;           // pr_mono destination
  std::string axiom_name;        // axiom
  std::optional<SchemaId> schema;
  std::optional<SchemaParams> params;
  std::vector<int> lines;        // 1-based premise indices
  std::optional<Term> term;      // ui/ei witness
  std::optional<Var> var;        // ug/all_vacuous
  std::optional<Formula> f1, f2; // d1/d2/theorem parameters
  int peel = -1;                 // internal_ui: guard layers; -1 = all
};

struct Step {
  Formula formula;
  Justification just;
};

struct Proof {
  std::string system;
  std::vector<Step> steps;
};

class TheoremDB {
 public:
  bool contains(const std::string& system, const Formula& f) const;
  const Proof* proof_of(const std::string& system, const Formula& f) const;
  void insert(const std::string& system, const Formula& f, Proof p);
  std::vector<Formula> theorems(const std::string& system) const;
  std::size_t size() const;

 private:
  struct Entry {
    Formula formula;
    Proof proof;
  };
  std::map<std::string, std::map<Nat, Entry>> by_system_;
};

struct CheckResult {
  bool accepted = false;
  int failed_step = -1;               // 1-based; -1 when accepted
  std::string reason;
  int nec_uses = 0;                   // NecT + ConecT steps
  std::map<std::string, int> rule_uses;  // justification keyword -> count

  explicit operator bool() const { return accepted; }
};

// Checks p against its target system; on acceptance inserts the final
// formula into db (the conclusion must not depend on hypotheses).
CheckResult check_proof(const Proof& p, TheoremDB& db);

// Conclusion shapes shared by the checker and the proof builder.
Formula d1_formula(const std::string& system, const Formula& phi);
Formula d2_formula(const std::string& system, const Formula& phi,
                   const Formula& psi);
Formula pr_sigma_formula(const std::string& system);
Formula nec_k_formula(const Formula& phi);            // every agent knows it
Formula all_agents_know(const Term& code);            // forall v0 Ag -> K2
Formula nec_t_formula(const Formula& phi);            // T(q phi)
Formula nec_k1_formula(const Formula& phi);           // K1(q phi)
// Peels `peel` leading "forall y (.L0(y) -> _)" layers (-1 = all) off the
// sentence coded by the premise Pr[S](n) and rebuilds the guarded conclusion;
// nullopt when the premise does not have the required shape.
std::optional<Formula> internal_ui_formula(const std::string& system,
                                           const Nat& coded_sentence,
                                           int peel = -1);
// Implication form used when the provability premise is only hypothetical:
// guards the peeled variables and concludes
//   Pr[S](n) -> Pr[S](instance chain), n the code of the guarded universal.
std::optional<Formula> internal_ui_imp_formula(const std::string& system,
                                               const Nat& coded_sentence,
                                               int peel = -1);

// Parallel-walk congruence: b is a with some occurrences of s replaced by t
// (never below a binder that captures a variable of the equation).  Backs the
// eq_cong rule and the cong_imp axiom form.
bool cong_term(const Term& a, const Term& b, const Term& s, const Term& t);
bool cong_formula(const Formula& a, const Formula& b, const Term& s,
                  const Term& t);

// True when the formula is a universally guarded coding-function identity
// provable for every substitution of its guarded variables; used by the
// syntax_fact justification.  Conservative: false on anything it cannot
// symbolically evaluate.
bool verify_syntax_fact(const Formula& f);

// True ground facts for the compute justification.
bool verify_compute(const Formula& f);

// Tautological consequence by truth tables over maximal non-propositional
// subformulas; at most 24 distinct such atoms.
bool tautological_consequence(const std::vector<Formula>& premises,
                              const Formula& conclusion);

// ---------- proof text ----------

// One step per line: `<index> | <formula> | <justification>`.  A line
// `system <name>` before the first step names the target system; `#` starts
// a comment.  Throws ParseError with the offending line.
Proof parse_proof(const std::string& text);
std::string to_string(const Proof& p);
std::string to_string(const Justification& j);

}  // namespace ktlab

#endif  // KTLAB_KERNEL_HPP
