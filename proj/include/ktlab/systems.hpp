#ifndef KTLAB_SYSTEMS_HPP
#define KTLAB_SYSTEMS_HPP

#include "ktlab/coding.hpp"
#include "ktlab/syntax.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

// Axiom systems: named sets of closed axioms, schema generators, and deductive
// rules, with an optional budget bounding the total uses of the two
// truth-necessitation rules per proof (the approximating systems befs<n>).

namespace ktlab {

enum class RuleId : std::uint8_t {
  MP, UG,
  NecT,    // from phi infer T(quote phi)
  ConecT,  // from T(quote phi) infer phi
  NecK,    // from phi infer: every agent knows quote phi  (binary K)
  NecK1,   // from phi infer K1(quote phi)                 (unary K)
  TOverK,  // from T(quote phi) infer: every agent knows quote phi
};

enum class SchemaId : std::uint8_t {
  Induction,   // param: formula + induction variable
  UctAtom,     // param: atomic formula without T, K, Pr
  UtK,         // param: sentence phi -> K1(q phi) -> phi
  KUtK,        // param: sentence phi -> K1(q(K1(q phi) -> phi))
  IK,          // params: sentences phi, psi
  TB,          // param: sentence phi -> T(q phi) <-> phi
  U4Instance,  // param: sentence phi -> K1(q phi) -> K1(q K1(q phi))
};

const char* rule_name(RuleId r);
const char* schema_name(SchemaId s);
std::optional<RuleId> rule_by_name(const std::string& s);
std::optional<SchemaId> schema_by_name(const std::string& s);

struct SchemaParams {
  Formula a;                // primary formula parameter
  std::optional<Formula> b; // IK's second sentence
  std::optional<Var> v;     // induction variable

  SchemaParams(Formula a_, std::optional<Formula> b_ = std::nullopt,
               std::optional<Var> v_ = std::nullopt)
      : a(std::move(a_)), b(std::move(b_)), v(v_) {}
};

// The closed axiom instance for a schema; throws Error on out-of-domain
// parameters.
Formula instantiate(SchemaId id, const SchemaParams& p);
Formula induction_instance(const Formula& phi, Var v);

struct NamedAxiom {
  std::string name;
  Formula formula;
};

struct SystemDef {
  std::string name;
  std::vector<NamedAxiom> axioms;        // closed
  std::set<SchemaId> schemata;
  std::set<RuleId> rules;
  std::optional<int> nec_budget;         // max NecT+ConecT uses per proof

  const Formula* axiom(const std::string& axiom_name) const;
  bool has_axiom_formula(const Formula& f) const;
};

// Truth (co)necessitation uses a proof in this system may make: 0 when the
// rules are absent entirely, the budget when one is set, unbounded otherwise.
std::optional<int> nec_capacity(const SystemDef& s);

class Registry {
 public:
  // Preloaded with the builtin systems; see manifest() for the full list.
  static Registry& instance();

  const SystemDef& get(const std::string& name) const;   // throws Error
  const SystemDef* find(const std::string& name) const;
  void register_system(SystemDef def);                   // throws on dup name
  std::vector<std::string> names() const;

  // Structural extension: sys has (at least) all axioms, schemata and rules
  // of base, and an equal or larger rule budget.
  bool extends(const std::string& sys, const std::string& base) const;

  // befs<n>: registers on demand, returns the name.
  std::string ensure_befs_n(int n);

  std::string manifest() const;

 private:
  Registry();
  std::map<std::string, SystemDef> systems_;
};

inline Registry& registry() { return Registry::instance(); }

// Registers a system whose axioms may cite the system's own provability
// predicate through the placeholder name "SELF" (exactly one axiom must).
// Exposed through the self-reference toolkit as well.
const SystemDef& register_self_referential(SystemDef def);

// Building blocks shared by registry construction, scripts and tests.
Formula falsum();                        // 0 = S(0)
Formula guard_l0(Var v, const Formula& body);    // forall v (.L0(v) -> body)
Formula guard_ag(Var v, const Formula& body);    // forall v (Ag(v) -> body)
Formula guard_var(Var v, const Formula& body);   // forall v (.Var(v) -> body)
Formula guard_term0pa(Var v, const Formula& body);
Formula guard_term0(Var v, const Formula& body);
Formula k2(const Term& agent, const Term& code);
Formula k1(const Term& code);

}  // namespace ktlab

#endif  // KTLAB_SYSTEMS_HPP
