#ifndef KTLAB_SYNTAX_HPP
#define KTLAB_SYNTAX_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

// Object language: arithmetic (0, S, +, *), a unary predicate U and unary
// function u, knowledge predicates K1 (common) and K2 (agent-indexed), truth T,
// agenthood Ag, equality, a family of provability predicates Pr[<system>], and
// a registry of "dotted" defined symbols that compute on Goedel codes.
//
// Numerals S^n(0) are stored as a single Numeral(n) node; the succ factory
// folds S over numerals, so the n-fold S-tower and Numeral(n) are one term and
// code injectivity is unaffected.  Quote towers would otherwise be
// unrepresentable (the numeral of a code has code-many S nodes).

namespace ktlab {

using Nat = boost::multiprecision::cpp_int;

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : Error {
  int line, col;
  ParseError(const std::string& what, int line_, int col_)
      : Error("syntax error at " + std::to_string(line_) + ":" +
              std::to_string(col_) + ": " + what),
        line(line_), col(col_) {}
};

struct Var {
  int index = 0;
  friend bool operator==(Var a, Var b) { return a.index == b.index; }
  friend bool operator!=(Var a, Var b) { return a.index != b.index; }
  friend bool operator<(Var a, Var b) { return a.index < b.index; }
};

// Dotted function symbols. All compute total functions on naturals; see
// coding.hpp for semantics. QImp builds the code of a dotted-implication TERM
// (needed to quote terms inside provability facts).
enum class DotFn : std::uint8_t {
  Neg, Imp, And, Or,      // formula code x formula code -> formula code
  All, Ex,                // var code x formula code -> formula code
  Sbt,                    // formula x term x var code -> formula code
  Gq,                     // n -> code of numeral(n)          (quote)
  Num,                    // n -> code of numeral(n)          (agent numeral)
  Ev,                     // closed L_PA term code -> value   (default 0)
  EqA, NeqA,              // term codes -> code of (s=t) / not(s=t)
  TA, K1A, UA, AgA,       // term code -> atom code
  K2A,                    // term code x term code -> K2 atom code
  Id,                     // identity (script-definable f)
  QImp,                   // term codes a,b -> code of term .imp(t_a, t_b)
};

enum class DotPred : std::uint8_t {
  L0,       // codes a sentence of L
  L1,       // (phi, v): codes a formula whose only free variable is v
  Term0PA,  // codes a closed arithmetic term
  Term0L,   // codes a closed term of L
  VarP,     // codes a variable
  AtomP,    // codes an atomic L_minus formula
};

int dot_fn_arity(DotFn f);
const char* dot_fn_name(DotFn f);    // ".imp" etc
int dot_pred_arity(DotPred p);
const char* dot_pred_name(DotPred p);
std::optional<DotFn> dot_fn_by_name(const std::string& s);
std::optional<DotPred> dot_pred_by_name(const std::string& s);

enum class TermKind : std::uint8_t {
  VarT, Numeral, Succ, Plus, Times, UFun, DotApp,
  MetaNumeral,  // schematic: the numeral of an opaque natural (slot)
  MetaTerm,     // schematic: an opaque closed term (slot, sublanguage)
};

enum class MetaTermSort : std::uint8_t { ClosedPA, ClosedL };

class Term;
using TermPtr = std::shared_ptr<const struct TermNode>;

struct TermNode {
  TermKind kind;
  Var var{};                  // VarT
  Nat value{};                // Numeral
  DotFn fn{};                 // DotApp
  int slot = 0;               // Meta*
  MetaTermSort meta_sort{};   // MetaTerm
  std::vector<Term> args;
  std::vector<int> free;      // sorted, deduped free variable indices
  std::size_t hash = 0;
  bool arithmetic = true;     // only 0,S,+,* (numerals and MetaNumeral count)
  bool lminus = true;         // arithmetic or U-free fragment symbols: adds u
  bool has_meta = false;
};

class Term {
 public:
  Term() = default;  // empty; only for containers, do not evaluate

  static Term var(int index);
  static Term var(Var v) { return var(v.index); }
  static Term numeral(const Nat& n);
  static Term zero() { return numeral(0); }
  static Term succ(const Term& t);  // folds over numerals
  static Term plus(const Term& a, const Term& b);
  static Term times(const Term& a, const Term& b);
  static Term ufun(const Term& t);
  static Term dot(DotFn f, std::vector<Term> args);  // arity checked
  static Term meta_numeral(int slot);
  static Term meta_term(int slot, MetaTermSort sort);

  bool ok() const { return p_ != nullptr; }
  TermKind kind() const { return p_->kind; }
  Var var_of() const { return p_->var; }
  const Nat& value() const { return p_->value; }
  DotFn fn() const { return p_->fn; }
  int slot() const { return p_->slot; }
  MetaTermSort meta_sort() const { return p_->meta_sort; }
  const std::vector<Term>& args() const { return p_->args; }
  const std::vector<int>& free_vars() const { return p_->free; }
  bool closed() const { return p_->free.empty(); }
  bool arithmetic() const { return p_->arithmetic; }  // term of L_PA
  bool in_lminus() const { return p_->lminus; }
  bool has_meta() const { return p_->has_meta; }
  std::size_t hash() const { return p_->hash; }
  const TermNode* node() const { return p_.get(); }

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

 private:
  explicit Term(TermPtr p) : p_(std::move(p)) {}
  static Term make(TermNode n);
  TermPtr p_;
};

enum class PredSym : std::uint8_t {
  Eq, U, K1, K2, T, Ag, Pr, Dotted,
};

enum class FormulaKind : std::uint8_t {
  Atom, Not, Imp, And, Or, All, Ex,
  MetaSentence,  // schematic: an opaque sentence (slot)
};

class Formula;
using FormulaPtr = std::shared_ptr<const struct FormulaNode>;

struct FormulaNode {
  FormulaKind kind;
  PredSym pred{};             // Atom
  DotPred dpred{};            // Atom with pred==Dotted
  std::string pr_system;      // Atom with pred==Pr
  Var qvar{};                 // All/Ex
  int slot = 0;               // MetaSentence
  std::vector<Term> terms;    // Atom args
  std::vector<Formula> sub;
  std::vector<int> free;
  std::size_t hash = 0;
  bool lpa = true;            // formula of L_PA (arith + equality)
  bool lminus = true;         // formula of L_minus (adds U, u, Ag)
  bool has_meta = false;
};

class Formula {
 public:
  Formula() = default;

  static Formula atom(PredSym p, std::vector<Term> args);  // arity checked
  static Formula datom(DotPred p, std::vector<Term> args);
  static Formula pr(const std::string& system, const Term& t);
  static Formula eq(const Term& a, const Term& b) { return atom(PredSym::Eq, {a, b}); }
  static Formula lnot(const Formula& f);
  static Formula imp(const Formula& a, const Formula& b);
  static Formula land(const Formula& a, const Formula& b);
  static Formula lor(const Formula& a, const Formula& b);
  static Formula iff(const Formula& a, const Formula& b);  // (a->b) & (b->a)
  static Formula forall(Var v, const Formula& f);
  static Formula exists(Var v, const Formula& f);
  static Formula meta_sentence(int slot);

  bool ok() const { return p_ != nullptr; }
  FormulaKind kind() const { return p_->kind; }
  PredSym pred() const { return p_->pred; }
  DotPred dpred() const { return p_->dpred; }
  const std::string& pr_system() const { return p_->pr_system; }
  Var qvar() const { return p_->qvar; }
  int slot() const { return p_->slot; }
  const std::vector<Term>& terms() const { return p_->terms; }
  const std::vector<Formula>& sub() const { return p_->sub; }
  const std::vector<int>& free_vars() const { return p_->free; }
  bool sentence() const { return p_->free.empty(); }
  bool in_lpa() const { return p_->lpa; }
  bool in_lminus() const { return p_->lminus; }
  bool has_meta() const { return p_->has_meta; }
  std::size_t hash() const { return p_->hash; }
  const FormulaNode* node() const { return p_.get(); }

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

 private:
  explicit Formula(FormulaPtr p) : p_(std::move(p)) {}
  static Formula make(FormulaNode n);
  FormulaPtr p_;
};

int pred_arity(PredSym p);

// ---------- printing ----------

std::string to_string(const Term& t);
std::string to_string(const Formula& f);

// ---------- parsing ----------

using AnyExpr = std::variant<Term, Formula>;

Formula parse_formula(const std::string& text);
Term parse_term(const std::string& text);
AnyExpr parse_any(const std::string& text);  // formula if possible, else term

// Hook used by the parser's quote(...) sugar; installed by the coding module.
using QuoteFn = std::function<Nat(const AnyExpr&)>;
QuoteFn& quote_hook();

// ---------- substitution ----------

struct CaptureError : Error {
  using Error::Error;
};

// Replace free occurrences of v by t.  Throws CaptureError if a free variable
// of t would be captured by a binder (no renaming is performed).
Term subst(const Term& s, Var v, const Term& t);
Formula subst(const Formula& f, Var v, const Term& t);

// The paper's sbt: defined for closed t only (throws Error otherwise).
Formula sbt(const Formula& f, const Term& t, Var v);

// ---------- numerals and evaluation ----------

Term numeral(const Nat& n);

// Value of a closed arithmetic term (0, S, +, * and numerals only).
// Throws Error on free variables or non-arithmetic symbols.
Nat eval_closed_term(const Term& t);

// Smallest variable index not free in any of the formulas.
int fresh_var_index(std::initializer_list<Formula> fs, int at_least = 0);

}  // namespace ktlab

#endif  // KTLAB_SYNTAX_HPP
