#include "ktlab/syntax.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace ktlab {

namespace {

std::size_t hash_combine(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t hash_nat(const Nat& n) {
  Nat lo = n & 0xFFFFFFFFFFFFFFFFULL;
  std::size_t h = static_cast<std::size_t>(lo.convert_to<std::uint64_t>());
  return hash_combine(h, static_cast<std::size_t>(msb(n + 1)));
}

std::vector<int> merge_free(const std::vector<Term>& ts) {
  std::vector<int> out;
  for (const auto& t : ts)
    out.insert(out.end(), t.free_vars().begin(), t.free_vars().end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct DotFnInfo { DotFn f; const char* name; int arity; };
constexpr std::array<DotFnInfo, 19> kDotFns{{
    {DotFn::Neg, ".neg", 1},   {DotFn::Imp, ".imp", 2},
    {DotFn::And, ".and", 2},   {DotFn::Or, ".or", 2},
    {DotFn::All, ".all", 2},   {DotFn::Ex, ".ex", 2},
    {DotFn::Sbt, ".sbt", 3},   {DotFn::Gq, ".gq", 1},
    {DotFn::Num, ".num", 1},   {DotFn::Ev, ".ev", 1},
    {DotFn::EqA, ".eq", 2},    {DotFn::NeqA, ".neq", 2},
    {DotFn::TA, ".T", 1},      {DotFn::K1A, ".K1", 1},
    {DotFn::UA, ".U", 1},      {DotFn::AgA, ".Ag", 1},
    {DotFn::K2A, ".K2", 2},    {DotFn::Id, ".id", 1},
    {DotFn::QImp, ".qimp", 2},
}};

struct DotPredInfo { DotPred p; const char* name; int arity; };
constexpr std::array<DotPredInfo, 6> kDotPreds{{
    {DotPred::L0, ".L0", 1},
    {DotPred::L1, ".L1", 2},
    {DotPred::Term0PA, ".Term0PA", 1},
    {DotPred::Term0L, ".Term0", 1},
    {DotPred::VarP, ".Var", 1},
    {DotPred::AtomP, ".Atom", 1},
}};

}  // namespace

int dot_fn_arity(DotFn f) {
  for (const auto& i : kDotFns) if (i.f == f) return i.arity;
  throw Error("unknown dotted function");
}

const char* dot_fn_name(DotFn f) {
  for (const auto& i : kDotFns) if (i.f == f) return i.name;
  throw Error("unknown dotted function");
}

int dot_pred_arity(DotPred p) {
  for (const auto& i : kDotPreds) if (i.p == p) return i.arity;
  throw Error("unknown dotted predicate");
}

const char* dot_pred_name(DotPred p) {
  for (const auto& i : kDotPreds) if (i.p == p) return i.name;
  throw Error("unknown dotted predicate");
}

std::optional<DotFn> dot_fn_by_name(const std::string& s) {
  for (const auto& i : kDotFns) if (s == i.name) return i.f;
  return std::nullopt;
}

std::optional<DotPred> dot_pred_by_name(const std::string& s) {
  for (const auto& i : kDotPreds) if (s == i.name) return i.p;
  return std::nullopt;
}

// ---------- terms ----------

Term Term::make(TermNode n) {
  std::size_t h = hash_combine(0x7e3a, static_cast<std::size_t>(n.kind));
  switch (n.kind) {
    case TermKind::VarT: h = hash_combine(h, n.var.index); break;
    case TermKind::Numeral: h = hash_combine(h, hash_nat(n.value)); break;
    case TermKind::DotApp: h = hash_combine(h, static_cast<std::size_t>(n.fn)); break;
    case TermKind::MetaNumeral: h = hash_combine(h, 0x11u + n.slot); break;
    case TermKind::MetaTerm:
      h = hash_combine(h, 0x23u + n.slot);
      h = hash_combine(h, static_cast<std::size_t>(n.meta_sort));
      break;
    default: break;
  }
  for (const auto& a : n.args) h = hash_combine(h, a.hash());
  n.hash = h;
  return Term(std::make_shared<const TermNode>(std::move(n)));
}

Term Term::var(int index) {
  if (index < 0) throw Error("negative variable index");
  TermNode n;
  n.kind = TermKind::VarT;
  n.var = Var{index};
  n.free = {index};
  return make(std::move(n));
}

Term Term::numeral(const Nat& n) {
  if (n < 0) throw Error("negative numeral");
  TermNode node;
  node.kind = TermKind::Numeral;
  node.value = n;
  return make(std::move(node));
}

Term Term::succ(const Term& t) {
  if (t.kind() == TermKind::Numeral) return numeral(t.value() + 1);
  TermNode n;
  n.kind = TermKind::Succ;
  n.args = {t};
  n.free = t.free_vars();
  n.arithmetic = t.arithmetic();
  n.lminus = t.in_lminus();
  n.has_meta = t.has_meta();
  return make(std::move(n));
}

Term Term::plus(const Term& a, const Term& b) {
  TermNode n;
  n.kind = TermKind::Plus;
  n.args = {a, b};
  n.free = merge_free(n.args);
  n.arithmetic = a.arithmetic() && b.arithmetic();
  n.lminus = a.in_lminus() && b.in_lminus();
  n.has_meta = a.has_meta() || b.has_meta();
  return make(std::move(n));
}

Term Term::times(const Term& a, const Term& b) {
  TermNode n;
  n.kind = TermKind::Times;
  n.args = {a, b};
  n.free = merge_free(n.args);
  n.arithmetic = a.arithmetic() && b.arithmetic();
  n.lminus = a.in_lminus() && b.in_lminus();
  n.has_meta = a.has_meta() || b.has_meta();
  return make(std::move(n));
}

Term Term::ufun(const Term& t) {
  TermNode n;
  n.kind = TermKind::UFun;
  n.args = {t};
  n.free = t.free_vars();
  n.arithmetic = false;
  n.lminus = t.in_lminus();
  n.has_meta = t.has_meta();
  return make(std::move(n));
}

Term Term::dot(DotFn f, std::vector<Term> args) {
  if (static_cast<int>(args.size()) != dot_fn_arity(f))
    throw Error(std::string("arity mismatch for ") + dot_fn_name(f));
  TermNode n;
  n.kind = TermKind::DotApp;
  n.fn = f;
  n.args = std::move(args);
  n.free = merge_free(n.args);
  n.arithmetic = false;
  n.lminus = false;
  for (const auto& a : n.args) n.has_meta = n.has_meta || a.has_meta();
  return make(std::move(n));
}

Term Term::meta_numeral(int slot) {
  TermNode n;
  n.kind = TermKind::MetaNumeral;
  n.slot = slot;
  n.has_meta = true;
  return make(std::move(n));
}

Term Term::meta_term(int slot, MetaTermSort sort) {
  TermNode n;
  n.kind = TermKind::MetaTerm;
  n.slot = slot;
  n.meta_sort = sort;
  n.arithmetic = sort == MetaTermSort::ClosedPA;
  n.lminus = sort == MetaTermSort::ClosedPA;
  n.has_meta = true;
  return make(std::move(n));
}

bool operator==(const Term& a, const Term& b) {
  if (a.p_ == b.p_) return true;
  if (!a.p_ || !b.p_) return false;
  if (a.hash() != b.hash() || a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case TermKind::VarT: return a.var_of() == b.var_of();
    case TermKind::Numeral: return a.value() == b.value();
    case TermKind::DotApp:
      if (a.fn() != b.fn()) return false;
      break;
    case TermKind::MetaNumeral: return a.slot() == b.slot();
    case TermKind::MetaTerm:
      return a.slot() == b.slot() && a.meta_sort() == b.meta_sort();
    default: break;
  }
  if (a.args().size() != b.args().size()) return false;
  for (std::size_t i = 0; i < a.args().size(); ++i)
    if (a.args()[i] != b.args()[i]) return false;
  return true;
}

// ---------- formulas ----------

int pred_arity(PredSym p) {
  switch (p) {
    case PredSym::Eq: case PredSym::K2: return 2;
    case PredSym::U: case PredSym::K1: case PredSym::T:
    case PredSym::Ag: case PredSym::Pr: return 1;
    case PredSym::Dotted: break;
  }
  throw Error("pred_arity: dotted predicates have their own table");
}

Formula Formula::make(FormulaNode n) {
  std::size_t h = hash_combine(0x51f0, static_cast<std::size_t>(n.kind));
  if (n.kind == FormulaKind::Atom) {
    h = hash_combine(h, static_cast<std::size_t>(n.pred));
    if (n.pred == PredSym::Dotted)
      h = hash_combine(h, static_cast<std::size_t>(n.dpred));
    if (n.pred == PredSym::Pr)
      h = hash_combine(h, std::hash<std::string>{}(n.pr_system));
  }
  if (n.kind == FormulaKind::All || n.kind == FormulaKind::Ex)
    h = hash_combine(h, 0x77u + n.qvar.index);
  if (n.kind == FormulaKind::MetaSentence) h = hash_combine(h, 0x39u + n.slot);
  for (const auto& t : n.terms) h = hash_combine(h, t.hash());
  for (const auto& f : n.sub) h = hash_combine(h, f.hash());
  n.hash = h;
  return Formula(std::make_shared<const FormulaNode>(std::move(n)));
}

Formula Formula::atom(PredSym p, std::vector<Term> args) {
  if (p == PredSym::Pr) throw Error("use Formula::pr for provability atoms");
  if (p == PredSym::Dotted) throw Error("use Formula::datom for dotted atoms");
  if (static_cast<int>(args.size()) != pred_arity(p))
    throw Error("atom arity mismatch");
  FormulaNode n;
  n.kind = FormulaKind::Atom;
  n.pred = p;
  n.terms = std::move(args);
  n.free = merge_free(n.terms);
  bool arith = true, lm = true;
  for (const auto& t : n.terms) {
    arith = arith && t.arithmetic();
    lm = lm && t.in_lminus();
    n.has_meta = n.has_meta || t.has_meta();
  }
  switch (p) {
    case PredSym::Eq: n.lpa = arith; n.lminus = lm; break;
    case PredSym::U: case PredSym::Ag: n.lpa = false; n.lminus = lm; break;
    default: n.lpa = false; n.lminus = false; break;
  }
  return make(std::move(n));
}

Formula Formula::datom(DotPred p, std::vector<Term> args) {
  if (static_cast<int>(args.size()) != dot_pred_arity(p))
    throw Error(std::string("arity mismatch for ") + dot_pred_name(p));
  FormulaNode n;
  n.kind = FormulaKind::Atom;
  n.pred = PredSym::Dotted;
  n.dpred = p;
  n.terms = std::move(args);
  n.free = merge_free(n.terms);
  n.lpa = false;
  n.lminus = false;
  for (const auto& t : n.terms) n.has_meta = n.has_meta || t.has_meta();
  return make(std::move(n));
}

Formula Formula::pr(const std::string& system, const Term& t) {
  if (system.empty()) throw Error("empty system name in provability atom");
  FormulaNode n;
  n.kind = FormulaKind::Atom;
  n.pred = PredSym::Pr;
  n.pr_system = system;
  n.terms = {t};
  n.free = t.free_vars();
  n.lpa = false;
  n.lminus = false;
  n.has_meta = t.has_meta();
  return make(std::move(n));
}

namespace {
FormulaNode connective(FormulaKind k, std::vector<Formula> sub) {
  FormulaNode n;
  n.kind = k;
  n.sub = std::move(sub);
  std::vector<int> fv;
  for (const auto& f : n.sub) {
    fv.insert(fv.end(), f.free_vars().begin(), f.free_vars().end());
    n.lpa = n.lpa && f.in_lpa();
    n.lminus = n.lminus && f.in_lminus();
    n.has_meta = n.has_meta || f.has_meta();
  }
  std::sort(fv.begin(), fv.end());
  fv.erase(std::unique(fv.begin(), fv.end()), fv.end());
  n.free = std::move(fv);
  return n;
}
}  // namespace

Formula Formula::lnot(const Formula& f) {
  return make(connective(FormulaKind::Not, {f}));
}
Formula Formula::imp(const Formula& a, const Formula& b) {
  return make(connective(FormulaKind::Imp, {a, b}));
}
Formula Formula::land(const Formula& a, const Formula& b) {
  return make(connective(FormulaKind::And, {a, b}));
}
Formula Formula::lor(const Formula& a, const Formula& b) {
  return make(connective(FormulaKind::Or, {a, b}));
}
Formula Formula::iff(const Formula& a, const Formula& b) {
  return land(imp(a, b), imp(b, a));
}

Formula Formula::forall(Var v, const Formula& f) {
  FormulaNode n = connective(FormulaKind::All, {f});
  n.qvar = v;
  n.free.erase(std::remove(n.free.begin(), n.free.end(), v.index), n.free.end());
  return make(std::move(n));
}

Formula Formula::exists(Var v, const Formula& f) {
  FormulaNode n = connective(FormulaKind::Ex, {f});
  n.qvar = v;
  n.free.erase(std::remove(n.free.begin(), n.free.end(), v.index), n.free.end());
  return make(std::move(n));
}

Formula Formula::meta_sentence(int slot) {
  FormulaNode n;
  n.kind = FormulaKind::MetaSentence;
  n.slot = slot;
  n.lpa = false;
  n.lminus = false;
  n.has_meta = true;
  return make(std::move(n));
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.p_ == b.p_) return true;
  if (!a.p_ || !b.p_) return false;
  if (a.hash() != b.hash() || a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case FormulaKind::Atom:
      if (a.pred() != b.pred()) return false;
      if (a.pred() == PredSym::Dotted && a.dpred() != b.dpred()) return false;
      if (a.pred() == PredSym::Pr && a.pr_system() != b.pr_system()) return false;
      break;
    case FormulaKind::All: case FormulaKind::Ex:
      if (a.qvar() != b.qvar()) return false;
      break;
    case FormulaKind::MetaSentence: return a.slot() == b.slot();
    default: break;
  }
  if (a.terms().size() != b.terms().size()) return false;
  for (std::size_t i = 0; i < a.terms().size(); ++i)
    if (a.terms()[i] != b.terms()[i]) return false;
  if (a.sub().size() != b.sub().size()) return false;
  for (std::size_t i = 0; i < a.sub().size(); ++i)
    if (a.sub()[i] != b.sub()[i]) return false;
  return true;
}

// ---------- printing ----------

namespace {

void print_term(std::ostream& os, const Term& t) {
  switch (t.kind()) {
    case TermKind::VarT: os << 'v' << t.var_of().index; return;
    case TermKind::Numeral: os << t.value().str(); return;
    case TermKind::Succ:
      os << "S(";
      print_term(os, t.args()[0]);
      os << ')';
      return;
    case TermKind::Plus:
    case TermKind::Times:
      os << '(';
      print_term(os, t.args()[0]);
      os << (t.kind() == TermKind::Plus ? " + " : " * ");
      print_term(os, t.args()[1]);
      os << ')';
      return;
    case TermKind::UFun:
      os << "u(";
      print_term(os, t.args()[0]);
      os << ')';
      return;
    case TermKind::DotApp: {
      os << dot_fn_name(t.fn()) << '(';
      bool first = true;
      for (const auto& a : t.args()) {
        if (!first) os << ", ";
        first = false;
        print_term(os, a);
      }
      os << ')';
      return;
    }
    case TermKind::MetaNumeral: os << "?n" << t.slot(); return;
    case TermKind::MetaTerm:
      os << (t.meta_sort() == MetaTermSort::ClosedPA ? "?p" : "?t") << t.slot();
      return;
  }
  throw Error("print_term: bad kind");
}

int level_of(const Formula& f) {
  switch (f.kind()) {
    case FormulaKind::Atom: case FormulaKind::MetaSentence: return 5;
    case FormulaKind::Not: return 4;
    case FormulaKind::And: return 3;
    case FormulaKind::Or: return 2;
    case FormulaKind::Imp: return 1;
    case FormulaKind::All: case FormulaKind::Ex: return 0;
  }
  return 5;
}

void print_formula(std::ostream& os, const Formula& f, int min_level) {
  const bool paren = level_of(f) < min_level;
  if (paren) os << '(';
  switch (f.kind()) {
    case FormulaKind::Atom:
      switch (f.pred()) {
        case PredSym::Eq:
          print_term(os, f.terms()[0]);
          os << " = ";
          print_term(os, f.terms()[1]);
          break;
        case PredSym::U: os << "U("; print_term(os, f.terms()[0]); os << ')'; break;
        case PredSym::Ag: os << "Ag("; print_term(os, f.terms()[0]); os << ')'; break;
        case PredSym::T: os << "T("; print_term(os, f.terms()[0]); os << ')'; break;
        case PredSym::K1: os << "K1("; print_term(os, f.terms()[0]); os << ')'; break;
        case PredSym::K2:
          os << "K2(";
          print_term(os, f.terms()[0]);
          os << ", ";
          print_term(os, f.terms()[1]);
          os << ')';
          break;
        case PredSym::Pr:
          os << "Pr[" << f.pr_system() << "](";
          print_term(os, f.terms()[0]);
          os << ')';
          break;
        case PredSym::Dotted: {
          os << dot_pred_name(f.dpred()) << '(';
          bool first = true;
          for (const auto& t : f.terms()) {
            if (!first) os << ", ";
            first = false;
            print_term(os, t);
          }
          os << ')';
          break;
        }
      }
      break;
    case FormulaKind::MetaSentence: os << '?' << f.slot(); break;
    case FormulaKind::Not:
      os << '!';
      print_formula(os, f.sub()[0], 4);
      break;
    case FormulaKind::And:
      print_formula(os, f.sub()[0], 3);
      os << " & ";
      print_formula(os, f.sub()[1], 4);
      break;
    case FormulaKind::Or:
      print_formula(os, f.sub()[0], 2);
      os << " | ";
      print_formula(os, f.sub()[1], 3);
      break;
    case FormulaKind::Imp:
      print_formula(os, f.sub()[0], 2);
      os << " -> ";
      print_formula(os, f.sub()[1], 1);
      break;
    case FormulaKind::All:
    case FormulaKind::Ex:
      os << (f.kind() == FormulaKind::All ? "forall v" : "exists v")
         << f.qvar().index << " (";
      print_formula(os, f.sub()[0], 0);
      os << ')';
      break;
  }
  if (paren) os << ')';
}

}  // namespace

std::string to_string(const Term& t) {
  std::ostringstream os;
  print_term(os, t);
  return os.str();
}

std::string to_string(const Formula& f) {
  std::ostringstream os;
  print_formula(os, f, 0);
  return os.str();
}

// ---------- parsing ----------

namespace {

enum class Tok : std::uint8_t {
  LParen, RParen, LBracket, RBracket, Comma, Arrow, Amp, Pipe, Bang, Equal,
  PlusT, StarT, Ident, Number, DotName, Meta, End,
};

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

struct Lexer {
  const std::string& src;
  std::size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line, col);
  }

  void bump(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos < src.size(); ++i) {
      if (src[pos] == '\n') { ++line; col = 1; } else { ++col; }
      ++pos;
    }
  }

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      while (pos < src.size()) {
        char c = src[pos];
        if (c == '#') {
          while (pos < src.size() && src[pos] != '\n') bump();
        } else if (std::isspace(static_cast<unsigned char>(c))) {
          bump();
        } else {
          break;
        }
      }
      if (pos >= src.size()) {
        out.push_back({Tok::End, "", line, col});
        return out;
      }
      int tl = line, tc = col;
      char c = src[pos];
      auto push = [&](Tok k, std::string text) {
        out.push_back({k, std::move(text), tl, tc});
      };
      switch (c) {
        case '(': bump(); push(Tok::LParen, "("); continue;
        case ')': bump(); push(Tok::RParen, ")"); continue;
        case '[': bump(); push(Tok::LBracket, "["); continue;
        case ']': bump(); push(Tok::RBracket, "]"); continue;
        case ',': bump(); push(Tok::Comma, ","); continue;
        case '&': bump(); push(Tok::Amp, "&"); continue;
        case '|': bump(); push(Tok::Pipe, "|"); continue;
        case '!': bump(); push(Tok::Bang, "!"); continue;
        case '=': bump(); push(Tok::Equal, "="); continue;
        case '+': bump(); push(Tok::PlusT, "+"); continue;
        case '*': bump(); push(Tok::StarT, "*"); continue;
        case '-':
          if (pos + 1 < src.size() && src[pos + 1] == '>') {
            bump(2);
            push(Tok::Arrow, "->");
            continue;
          }
          fail("stray '-'");
        case '?': {
          bump();
          std::string digits;
          while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
            digits += src[pos];
            bump();
          }
          if (digits.empty()) fail("expected digits after '?'");
          push(Tok::Meta, digits);
          continue;
        }
        case '.': {
          std::string name(1, '.');
          bump();
          while (pos < src.size() &&
                 (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) {
            name += src[pos];
            bump();
          }
          if (name.size() == 1) fail("expected name after '.'");
          push(Tok::DotName, name);
          continue;
        }
        default: break;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::string digits;
        while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
          digits += src[pos];
          bump();
        }
        push(Tok::Number, digits);
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string name;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) {
          name += src[pos];
          bump();
        }
        push(Tok::Ident, name);
        continue;
      }
      fail(std::string("unexpected character '") + c + "'");
    }
  }
};

bool is_var_name(const std::string& s) {
  if (s.size() < 2 || s[0] != 'v') return false;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

struct Parser {
  std::vector<Token> toks;
  std::size_t i = 0;

  const Token& peek(std::size_t k = 0) const {
    return toks[std::min(i + k, toks.size() - 1)];
  }
  const Token& next() { return toks[std::min(i++, toks.size() - 1)]; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw ParseError(msg + (t.kind == Tok::End ? " (at end of input)"
                                               : " (near '" + t.text + "')"),
                     t.line, t.col);
  }

  void expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what);
    ++i;
  }

  bool at(Tok k) const { return peek().kind == k; }

  // ----- terms -----

  std::vector<Term> term_args(int arity, const char* name) {
    expect(Tok::LParen, "'('");
    std::vector<Term> out;
    for (int k = 0; k < arity; ++k) {
      if (k > 0) expect(Tok::Comma, "','");
      out.push_back(term());
    }
    if (at(Tok::Comma)) fail(std::string("too many arguments for ") + name);
    expect(Tok::RParen, "')'");
    return out;
  }

  Term term() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: {
        next();
        return Term::numeral(Nat(t.text));
      }
      case Tok::DotName: {
        auto f = dot_fn_by_name(t.text);
        if (!f) fail("unknown dotted function '" + t.text + "'");
        next();
        return Term::dot(*f, term_args(dot_fn_arity(*f), t.text.c_str()));
      }
      case Tok::LParen: {
        next();
        Term a = term();
        if (at(Tok::PlusT)) {
          next();
          Term b = term();
          expect(Tok::RParen, "')'");
          return Term::plus(a, b);
        }
        if (at(Tok::StarT)) {
          next();
          Term b = term();
          expect(Tok::RParen, "')'");
          return Term::times(a, b);
        }
        fail("expected '+' or '*' inside parenthesized term");
      }
      case Tok::Ident: {
        if (is_var_name(t.text)) {
          next();
          return Term::var(std::stoi(t.text.substr(1)));
        }
        if (t.text == "S") {
          next();
          return Term::succ(term_args(1, "S")[0]);
        }
        if (t.text == "u") {
          next();
          return Term::ufun(term_args(1, "u")[0]);
        }
        if (t.text == "quote") {
          next();
          expect(Tok::LParen, "'('");
          AnyExpr e = any_expr();
          expect(Tok::RParen, "')'");
          if (!quote_hook())
            fail("quote(...) needs the coding module to be linked in");
          return Term::numeral(quote_hook()(e));
        }
        fail("unexpected name '" + t.text + "' in term");
      }
      default:
        fail("expected a term");
    }
  }

  // ----- formulas -----

  Formula formula() { return quantified(); }

  Formula quantified() {
    if (at(Tok::Ident) && (peek().text == "forall" || peek().text == "exists")) {
      bool all = peek().text == "forall";
      next();
      if (!(at(Tok::Ident) && is_var_name(peek().text)))
        fail("expected a variable after quantifier");
      Var v{std::stoi(next().text.substr(1))};
      Formula body = quantified();
      return all ? Formula::forall(v, body) : Formula::exists(v, body);
    }
    return implication();
  }

  Formula implication() {
    Formula a = disjunction();
    if (at(Tok::Arrow)) {
      next();
      Formula b = quantified();  // right-associative; quantifier allowed bare
      return Formula::imp(a, b);
    }
    return a;
  }

  Formula disjunction() {
    Formula a = conjunction();
    while (at(Tok::Pipe)) {
      next();
      a = Formula::lor(a, conjunction());
    }
    return a;
  }

  Formula conjunction() {
    Formula a = negation();
    while (at(Tok::Amp)) {
      next();
      a = Formula::land(a, negation());
    }
    return a;
  }

  Formula negation() {
    if (at(Tok::Bang)) {
      next();
      return Formula::lnot(negation());
    }
    return atom();
  }

  Formula eq_tail(const Term& lhs) {
    expect(Tok::Equal, "'='");
    return Formula::eq(lhs, term());
  }

  Formula atom() {
    const Token& t = peek();
    if (t.kind == Tok::Meta) {
      next();
      return Formula::meta_sentence(std::stoi(t.text));
    }
    if (t.kind == Tok::DotName) {
      if (auto p = dot_pred_by_name(t.text)) {
        next();
        return Formula::datom(*p, term_args(dot_pred_arity(*p), t.text.c_str()));
      }
      return eq_tail(term());  // dotted function application
    }
    if (t.kind == Tok::LParen) {
      // Either a parenthesized formula or a parenthesized term (+/*) used in
      // an equality.  Try the term reading first, then backtrack.
      std::size_t save = i;
      try {
        Term lhs = term();
        if (at(Tok::Equal)) return eq_tail(lhs);
      } catch (const ParseError&) {
      }
      i = save;
      next();
      Formula f = formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (t.kind == Tok::Ident) {
      const std::string& s = t.text;
      if (s == "U" || s == "Ag" || s == "T" || s == "K1") {
        if (peek(1).kind == Tok::LParen) {
          next();
          PredSym p = s == "U" ? PredSym::U
                    : s == "Ag" ? PredSym::Ag
                    : s == "T" ? PredSym::T : PredSym::K1;
          return Formula::atom(p, term_args(1, s.c_str()));
        }
      }
      if (s == "K2" && peek(1).kind == Tok::LParen) {
        next();
        auto args = term_args(2, "K2");
        return Formula::atom(PredSym::K2, std::move(args));
      }
      if (s == "Pr" && peek(1).kind == Tok::LBracket) {
        next();
        next();
        if (!at(Tok::Ident)) fail("expected a system name in Pr[...]");
        std::string sys = next().text;
        expect(Tok::RBracket, "']'");
        auto args = term_args(1, "Pr");
        return Formula::pr(sys, args[0]);
      }
      return eq_tail(term());
    }
    if (t.kind == Tok::Number) return eq_tail(term());
    fail("expected a formula");
  }

  AnyExpr any_expr() {
    std::size_t save = i;
    try {
      Formula f = formula();
      if (at(Tok::RParen) || at(Tok::End)) return f;
    } catch (const ParseError&) {
    }
    i = save;
    return term();
  }
};

Parser make_parser(const std::string& text) {
  Parser p;
  p.toks = Lexer(text).run();
  return p;
}

}  // namespace

QuoteFn& quote_hook() {
  static QuoteFn hook;
  return hook;
}

Formula parse_formula(const std::string& text) {
  Parser p = make_parser(text);
  Formula f = p.formula();
  if (!p.at(Tok::End)) p.fail("trailing input after formula");
  return f;
}

Term parse_term(const std::string& text) {
  Parser p = make_parser(text);
  Term t = p.term();
  if (!p.at(Tok::End)) p.fail("trailing input after term");
  return t;
}

AnyExpr parse_any(const std::string& text) {
  Parser p = make_parser(text);
  std::size_t save = p.i;
  try {
    Formula f = p.formula();
    if (p.at(Tok::End)) return f;
  } catch (const ParseError&) {
  }
  p.i = save;
  Term t = p.term();
  if (!p.at(Tok::End)) p.fail("trailing input after term");
  return t;
}

// ---------- substitution ----------

Term subst(const Term& s, Var v, const Term& t) {
  if (!std::binary_search(s.free_vars().begin(), s.free_vars().end(), v.index))
    return s;
  switch (s.kind()) {
    case TermKind::VarT:
      return s.var_of() == v ? t : s;
    case TermKind::Succ: return Term::succ(subst(s.args()[0], v, t));
    case TermKind::Plus:
      return Term::plus(subst(s.args()[0], v, t), subst(s.args()[1], v, t));
    case TermKind::Times:
      return Term::times(subst(s.args()[0], v, t), subst(s.args()[1], v, t));
    case TermKind::UFun: return Term::ufun(subst(s.args()[0], v, t));
    case TermKind::DotApp: {
      std::vector<Term> args;
      args.reserve(s.args().size());
      for (const auto& a : s.args()) args.push_back(subst(a, v, t));
      return Term::dot(s.fn(), std::move(args));
    }
    default:
      return s;  // numerals and meta leaves are closed
  }
}

Formula subst(const Formula& f, Var v, const Term& t) {
  if (!std::binary_search(f.free_vars().begin(), f.free_vars().end(), v.index))
    return f;
  switch (f.kind()) {
    case FormulaKind::Atom: {
      std::vector<Term> args;
      args.reserve(f.terms().size());
      for (const auto& a : f.terms()) args.push_back(subst(a, v, t));
      if (f.pred() == PredSym::Pr) return Formula::pr(f.pr_system(), args[0]);
      if (f.pred() == PredSym::Dotted)
        return Formula::datom(f.dpred(), std::move(args));
      return Formula::atom(f.pred(), std::move(args));
    }
    case FormulaKind::Not: return Formula::lnot(subst(f.sub()[0], v, t));
    case FormulaKind::Imp:
      return Formula::imp(subst(f.sub()[0], v, t), subst(f.sub()[1], v, t));
    case FormulaKind::And:
      return Formula::land(subst(f.sub()[0], v, t), subst(f.sub()[1], v, t));
    case FormulaKind::Or:
      return Formula::lor(subst(f.sub()[0], v, t), subst(f.sub()[1], v, t));
    case FormulaKind::All:
    case FormulaKind::Ex: {
      if (f.qvar() == v) return f;  // unreachable: v would not be free
      const auto& tf = t.free_vars();
      if (std::binary_search(tf.begin(), tf.end(), f.qvar().index))
        throw CaptureError("substitution would capture v" +
                           std::to_string(f.qvar().index));
      Formula body = subst(f.sub()[0], v, t);
      return f.kind() == FormulaKind::All ? Formula::forall(f.qvar(), body)
                                          : Formula::exists(f.qvar(), body);
    }
    default:
      return f;
  }
}

Formula sbt(const Formula& f, const Term& t, Var v) {
  if (!t.closed()) throw Error("sbt requires a closed term");
  return subst(f, v, t);
}

// ---------- evaluation ----------

Term numeral(const Nat& n) { return Term::numeral(n); }

Nat eval_closed_term(const Term& t) {
  switch (t.kind()) {
    case TermKind::Numeral: return t.value();
    case TermKind::Succ: return eval_closed_term(t.args()[0]) + 1;
    case TermKind::Plus:
      return eval_closed_term(t.args()[0]) + eval_closed_term(t.args()[1]);
    case TermKind::Times:
      return eval_closed_term(t.args()[0]) * eval_closed_term(t.args()[1]);
    case TermKind::VarT:
      throw Error("eval_closed_term: open term");
    default:
      throw Error("eval_closed_term: not an arithmetic term");
  }
}

int fresh_var_index(std::initializer_list<Formula> fs, int at_least) {
  int idx = at_least;
  for (const auto& f : fs)
    if (!f.free_vars().empty())
      idx = std::max(idx, f.free_vars().back() + 1);
  return idx;
}

}  // namespace ktlab
