#ifndef KTLAB_CODING_HPP
#define KTLAB_CODING_HPP

#include "ktlab/syntax.hpp"

#include <optional>
#include <vector>

// Goedel coding.  Expressions serialize to a self-delimiting byte stream (one
// tag byte per node, LEB128 varints for numbers); the stream, prefixed with a
// 0x01 sentinel to protect leading zeros, is read as a base-256 natural.  The
// code of an expression is therefore linear in its size, which keeps nested
// quotation towers tractable; pairing-based schemes blow up exponentially.
//
// Dotted symbols evaluate as total functions on naturals: on ill-typed input
// the functions return 0 and the predicates are false.  eval_dotted is the
// strict variant used at the API surface; it rejects ill-typed input instead.

namespace ktlab {

Nat gc(const Term& t);     // throws Error on meta placeholders
Nat gc(const Formula& f);
Nat gc(const AnyExpr& e);

std::optional<Term> decode_term(const Nat& code);
std::optional<Formula> decode_formula(const Nat& code);
std::optional<AnyExpr> decode_any(const Nat& code);

// Quotation: the numeral of the code.
Term gq(const Term& t);
Term gq(const Formula& f);
Nat var_code(Var v);

// Total semantics of the dotted symbols (default 0 / false).
Nat dot_eval(DotFn f, const std::vector<Nat>& args);
bool dot_holds(DotPred p, const std::vector<Nat>& args);

// Strict variant: throws Error instead of defaulting on ill-typed input.
Nat eval_dotted(DotFn f, const std::vector<Nat>& args);

// Value of a closed term over arithmetic and dotted symbols (total dotted
// semantics; no u).  nullopt when the term is open or contains u or a meta
// placeholder.
std::optional<Nat> try_eval_ground(const Term& t);

// Cantor pairing, used to encode finite relations as sets of naturals.
// 2z = (a+b)^2 + (a+b) + 2b, so membership is arithmetically expressible.
Nat cantor_pair(const Nat& a, const Nat& b);
std::pair<Nat, Nat> cantor_unpair(const Nat& z);

}  // namespace ktlab

#endif  // KTLAB_CODING_HPP
