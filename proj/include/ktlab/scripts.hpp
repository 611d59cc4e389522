#pragma once

#include "ktlab/diagonal.hpp"
#include "ktlab/kernel.hpp"
#include "ktlab/systems.hpp"

#include <map>
#include <string>
#include <vector>

// Replayed derivations: each script assembles one or more proofs, checks them
// into the shared theorem database in order, and reports the verdict together
// with aggregate rule-use statistics.  Scripts are deterministic: the same
// database state yields the same proofs.

namespace ktlab {

struct ScriptResult {
  std::string id;
  std::vector<Proof> proofs;          // checked into the database in order
  std::vector<CheckResult> checks;    // one per proof
  bool accepted = false;              // every constituent proof checks
  std::map<std::string, int> rule_uses;  // justification keyword -> count
  Formula conclusion;                 // final proof's last formula
  std::string detail;                 // one-line summary
};

// Unary-knowledge collapse: a sentence equivalent to the unknowability of its
// own negation plus the knowledge-of-truth and known-knowledge-of-truth
// schemata prove the false equation.  The biconditional step cites the
// diagonal witness as a checked theorem.
ScriptResult script_kaplan_montague(TheoremDB& db);

// The same collapse from the knowledge-of-truth schema and unary
// necessitation alone; necessitation is applied only to theorem lines.
ScriptResult script_montague(TheoremDB& db);

// Positive introspection for unary knowledge collapses the factive system:
// the truth of the false equation is reached through the knowledge-is-true
// axiom and discharged by the atomic truth biconditional.
ScriptResult script_u4_inconsistency(TheoremDB& db);

// Transfers the truth biconditional of phi to the knowledge atoms about phi:
// for every agent, T at the coded knowledge atom is equivalent to knowledge
// of phi.  Requires the truth/knowledge interaction axiom of `ext`.
ScriptResult script_tb_transfer(TheoremDB& db, const Formula& phi,
                                const std::string& ext);

// Iterates the transfer once: after proving the truth biconditional for a
// ground equation, a proved agenthood fact turns the transferred equivalence
// into the truth biconditional of a knowledge atom, which transfers again.
// Registers a demonstration system extending the interaction system with one
// named agent.
ScriptResult script_tb_transfer_nested(TheoremDB& db);

// From the two halves of fixed-point equivalences for theta and theta2
// (hypotheses looked up in the database), concludes that theta implies
// theta2 on every coded sentence.  Uses the self-certification rule once.
ScriptResult script_implied_ck(TheoremDB& db, const Formula& A,
                               const Formula& theta, const Formula& theta2,
                               const Formula& H1, const Formula& H2);

// Any two operators satisfying the common-knowledge unfolding for the same
// agent filter agree on every coded sentence.
ScriptResult script_unique_ck(TheoremDB& db, const Formula& A);

// Common knowledge of two sentences is common knowledge of their conjunction.
ScriptResult script_conj_ck(TheoremDB& db, const Formula& A,
                            const Formula& phi, const Formula& psi);

// Relativized transfer: with theta unfolding over filter A, theta2 refolding
// over a subfilter B, and the pointwise routing function fixed to the coded
// identity, theta implies theta2 at the routed code.  theta and theta2 must
// be the unfolding operators of their filters.
ScriptResult script_general_ck(TheoremDB& db, const Formula& A,
                               const Formula& B, const Formula& theta,
                               const Formula& theta2, DotFn f = DotFn::Id);

// Shrinking the agent filter grows common knowledge: the A-operator implies
// the B-operator pointwise when every B-agent is an A-agent.
ScriptResult script_monotone_ck(TheoremDB& db, const Formula& A,
                                const Formula& B, DotFn f = DotFn::Id);

// The headline closure facts for the common-knowledge operator: (a) closure
// under coded modus ponens on named instances, (b) everything the base
// epistemic system proves is common knowledge, (c) a worked corollary of (b).
ScriptResult script_ck_main(TheoremDB& db, const Formula& A);

// Proves sampled instances of the two term-value axioms inside the factive
// knowledge system, then replays the two rule-admissibility arguments that
// close the gap between the two axiomatizations.
ScriptResult script_kt_proves_befs_instances(TheoremDB& db, int sample);

// Runs every script on the shared database, in dependency order.
std::vector<ScriptResult> run_all_scripts(TheoremDB& db);

// Re-checks the final proof of `r` against another system after replaying the
// supporting proofs into a scratch database; used by the negative examples
// (a derivation valid in one system fails in a weaker one at the first step
// citing the missing axiom or schema).
CheckResult replay_final_against(const ScriptResult& r,
                                 const std::string& system);

// One pass/fail line per script, aligned for terminal output.
std::string format_script_table(const std::vector<ScriptResult>& rs);

}  // namespace ktlab
