#include "ktlab/coding.hpp"

#include <algorithm>
#include <iterator>

namespace ktlab {

namespace {

// Tag bytes.  Terms live below 0x40, formulas at 0x40 and above.  DotApp tags
// are 0x10 + the DotFn value; atom tags encode the predicate.
constexpr std::uint8_t kSentinel = 0x01;
constexpr std::uint8_t kTagVar = 0x02;
constexpr std::uint8_t kTagNumeral = 0x03;
constexpr std::uint8_t kTagSucc = 0x04;
constexpr std::uint8_t kTagPlus = 0x05;
constexpr std::uint8_t kTagTimes = 0x06;
constexpr std::uint8_t kTagUFun = 0x07;
constexpr std::uint8_t kTagDotBase = 0x10;  // + DotFn
constexpr std::uint8_t kTagNot = 0x40;
constexpr std::uint8_t kTagImp = 0x41;
constexpr std::uint8_t kTagAnd = 0x42;
constexpr std::uint8_t kTagOr = 0x43;
constexpr std::uint8_t kTagAll = 0x44;
constexpr std::uint8_t kTagEx = 0x45;
constexpr std::uint8_t kTagEq = 0x50;
constexpr std::uint8_t kTagU = 0x51;
constexpr std::uint8_t kTagK1 = 0x52;
constexpr std::uint8_t kTagK2 = 0x53;
constexpr std::uint8_t kTagT = 0x54;
constexpr std::uint8_t kTagAg = 0x55;
constexpr std::uint8_t kTagDotPred = 0x56;  // + pred byte
constexpr std::uint8_t kTagPr = 0x5F;       // + name length + name bytes

using Bytes = std::vector<std::uint8_t>;

void put_varint(Bytes& out, Nat n) {
  // little-endian base-128, continuation bit on all but the last group
  while (true) {
    std::uint8_t b = static_cast<std::uint8_t>((n & 0x7F).convert_to<unsigned>());
    n >>= 7;
    if (n == 0) {
      out.push_back(b);
      return;
    }
    out.push_back(b | 0x80);
  }
}

void put_varint(Bytes& out, std::size_t n) { put_varint(out, Nat(n)); }

void ser_term(Bytes& out, const Term& t);

void ser_formula(Bytes& out, const Formula& f) {
  switch (f.kind()) {
    case FormulaKind::Atom:
      switch (f.pred()) {
        case PredSym::Eq: out.push_back(kTagEq); break;
        case PredSym::U: out.push_back(kTagU); break;
        case PredSym::K1: out.push_back(kTagK1); break;
        case PredSym::K2: out.push_back(kTagK2); break;
        case PredSym::T: out.push_back(kTagT); break;
        case PredSym::Ag: out.push_back(kTagAg); break;
        case PredSym::Dotted:
          out.push_back(kTagDotPred);
          out.push_back(static_cast<std::uint8_t>(f.dpred()));
          break;
        case PredSym::Pr:
          out.push_back(kTagPr);
          put_varint(out, f.pr_system().size());
          for (char c : f.pr_system())
            out.push_back(static_cast<std::uint8_t>(c));
          break;
      }
      for (const auto& t : f.terms()) ser_term(out, t);
      return;
    case FormulaKind::Not:
      out.push_back(kTagNot);
      ser_formula(out, f.sub()[0]);
      return;
    case FormulaKind::Imp:
    case FormulaKind::And:
    case FormulaKind::Or:
      out.push_back(f.kind() == FormulaKind::Imp ? kTagImp
                    : f.kind() == FormulaKind::And ? kTagAnd : kTagOr);
      ser_formula(out, f.sub()[0]);
      ser_formula(out, f.sub()[1]);
      return;
    case FormulaKind::All:
    case FormulaKind::Ex:
      out.push_back(f.kind() == FormulaKind::All ? kTagAll : kTagEx);
      put_varint(out, static_cast<std::size_t>(f.qvar().index));
      ser_formula(out, f.sub()[0]);
      return;
    case FormulaKind::MetaSentence:
      throw Error("cannot code a schematic placeholder");
  }
  throw Error("ser_formula: bad kind");
}

void ser_term(Bytes& out, const Term& t) {
  switch (t.kind()) {
    case TermKind::VarT:
      out.push_back(kTagVar);
      put_varint(out, static_cast<std::size_t>(t.var_of().index));
      return;
    case TermKind::Numeral:
      out.push_back(kTagNumeral);
      put_varint(out, t.value());
      return;
    case TermKind::Succ:
      out.push_back(kTagSucc);
      ser_term(out, t.args()[0]);
      return;
    case TermKind::Plus:
    case TermKind::Times:
      out.push_back(t.kind() == TermKind::Plus ? kTagPlus : kTagTimes);
      ser_term(out, t.args()[0]);
      ser_term(out, t.args()[1]);
      return;
    case TermKind::UFun:
      out.push_back(kTagUFun);
      ser_term(out, t.args()[0]);
      return;
    case TermKind::DotApp:
      out.push_back(static_cast<std::uint8_t>(
          kTagDotBase + static_cast<std::uint8_t>(t.fn())));
      for (const auto& a : t.args()) ser_term(out, a);
      return;
    case TermKind::MetaNumeral:
    case TermKind::MetaTerm:
      throw Error("cannot code a schematic placeholder");
  }
  throw Error("ser_term: bad kind");
}

Nat fold_bytes(const Bytes& b) {
  Bytes all;
  all.reserve(b.size() + 1);
  all.push_back(kSentinel);
  all.insert(all.end(), b.begin(), b.end());
  Nat n;
  import_bits(n, all.begin(), all.end(), 8, true);
  return n;
}

std::optional<Bytes> unfold_bytes(const Nat& n) {
  if (n <= 0) return std::nullopt;
  Bytes all;
  export_bits(n, std::back_inserter(all), 8, true);
  if (all.empty() || all[0] != kSentinel) return std::nullopt;
  all.erase(all.begin());
  return all;
}

struct Reader {
  const Bytes& b;
  std::size_t pos = 0;
  bool bad = false;

  explicit Reader(const Bytes& bytes) : b(bytes) {}

  std::optional<std::uint8_t> byte() {
    if (pos >= b.size()) return std::nullopt;
    return b[pos++];
  }

  std::optional<Nat> varint() {
    Nat n = 0;
    int shift = 0;
    while (true) {
      auto c = byte();
      if (!c) return std::nullopt;
      n |= Nat(*c & 0x7F) << shift;
      if (!(*c & 0x80)) {
        // canonical varint: no trailing zero group unless the value is 0
        if (shift > 0 && *c == 0) return std::nullopt;
        return n;
      }
      shift += 7;
      if (shift > 1 << 24) return std::nullopt;  // absurd length
    }
  }

  std::optional<int> small_varint() {
    auto n = varint();
    if (!n || *n > 1000000000) return std::nullopt;
    return n->convert_to<int>();
  }
};

std::optional<Term> read_term(Reader& r);
std::optional<Formula> read_formula(Reader& r);

std::optional<Term> read_term(Reader& r) {
  auto tag = r.byte();
  if (!tag) return std::nullopt;
  switch (*tag) {
    case kTagVar: {
      auto i = r.small_varint();
      if (!i) return std::nullopt;
      return Term::var(*i);
    }
    case kTagNumeral: {
      auto n = r.varint();
      if (!n) return std::nullopt;
      return Term::numeral(*n);
    }
    case kTagSucc: {
      auto a = read_term(r);
      if (!a) return std::nullopt;
      // canonical numerals: S never wraps a numeral in a coded term
      if (a->kind() == TermKind::Numeral) return std::nullopt;
      return Term::succ(*a);
    }
    case kTagPlus:
    case kTagTimes: {
      auto a = read_term(r);
      if (!a) return std::nullopt;
      auto b2 = read_term(r);
      if (!b2) return std::nullopt;
      return *tag == kTagPlus ? Term::plus(*a, *b2) : Term::times(*a, *b2);
    }
    case kTagUFun: {
      auto a = read_term(r);
      if (!a) return std::nullopt;
      return Term::ufun(*a);
    }
    default: {
      if (*tag >= kTagDotBase && *tag < kTagDotBase + 19) {
        DotFn f = static_cast<DotFn>(*tag - kTagDotBase);
        int arity = dot_fn_arity(f);
        std::vector<Term> args;
        for (int i = 0; i < arity; ++i) {
          auto a = read_term(r);
          if (!a) return std::nullopt;
          args.push_back(*a);
        }
        return Term::dot(f, std::move(args));
      }
      return std::nullopt;
    }
  }
}

std::optional<Formula> read_formula(Reader& r) {
  auto tag = r.byte();
  if (!tag) return std::nullopt;
  auto atom = [&](PredSym p) -> std::optional<Formula> {
    std::vector<Term> args;
    for (int i = 0; i < pred_arity(p); ++i) {
      auto t = read_term(r);
      if (!t) return std::nullopt;
      args.push_back(*t);
    }
    return Formula::atom(p, std::move(args));
  };
  switch (*tag) {
    case kTagEq: return atom(PredSym::Eq);
    case kTagU: return atom(PredSym::U);
    case kTagK1: return atom(PredSym::K1);
    case kTagK2: return atom(PredSym::K2);
    case kTagT: return atom(PredSym::T);
    case kTagAg: return atom(PredSym::Ag);
    case kTagDotPred: {
      auto p = r.byte();
      if (!p || *p >= 6) return std::nullopt;
      DotPred dp = static_cast<DotPred>(*p);
      std::vector<Term> args;
      for (int i = 0; i < dot_pred_arity(dp); ++i) {
        auto t = read_term(r);
        if (!t) return std::nullopt;
        args.push_back(*t);
      }
      return Formula::datom(dp, std::move(args));
    }
    case kTagPr: {
      auto len = r.small_varint();
      if (!len || *len == 0 || *len > 64) return std::nullopt;
      std::string name;
      for (int i = 0; i < *len; ++i) {
        auto c = r.byte();
        if (!c) return std::nullopt;
        name += static_cast<char>(*c);
      }
      auto t = read_term(r);
      if (!t) return std::nullopt;
      return Formula::pr(name, *t);
    }
    case kTagNot: {
      auto a = read_formula(r);
      if (!a) return std::nullopt;
      return Formula::lnot(*a);
    }
    case kTagImp:
    case kTagAnd:
    case kTagOr: {
      auto a = read_formula(r);
      if (!a) return std::nullopt;
      auto b = read_formula(r);
      if (!b) return std::nullopt;
      return *tag == kTagImp ? Formula::imp(*a, *b)
             : *tag == kTagAnd ? Formula::land(*a, *b) : Formula::lor(*a, *b);
    }
    case kTagAll:
    case kTagEx: {
      auto v = r.small_varint();
      if (!v) return std::nullopt;
      auto a = read_formula(r);
      if (!a) return std::nullopt;
      return *tag == kTagAll ? Formula::forall(Var{*v}, *a)
                             : Formula::exists(Var{*v}, *a);
    }
    default: return std::nullopt;
  }
}

}  // namespace

Nat gc(const Term& t) {
  if (t.has_meta()) throw Error("cannot code a schematic placeholder");
  Bytes b;
  ser_term(b, t);
  return fold_bytes(b);
}

Nat gc(const Formula& f) {
  if (f.has_meta()) throw Error("cannot code a schematic placeholder");
  Bytes b;
  ser_formula(b, f);
  return fold_bytes(b);
}

Nat gc(const AnyExpr& e) {
  return std::holds_alternative<Term>(e) ? gc(std::get<Term>(e))
                                         : gc(std::get<Formula>(e));
}

std::optional<Term> decode_term(const Nat& code) {
  auto bytes = unfold_bytes(code);
  if (!bytes) return std::nullopt;
  Reader r(*bytes);
  auto t = read_term(r);
  if (!t || r.pos != bytes->size()) return std::nullopt;
  return t;
}

std::optional<Formula> decode_formula(const Nat& code) {
  auto bytes = unfold_bytes(code);
  if (!bytes) return std::nullopt;
  Reader r(*bytes);
  auto f = read_formula(r);
  if (!f || r.pos != bytes->size()) return std::nullopt;
  return f;
}

std::optional<AnyExpr> decode_any(const Nat& code) {
  auto bytes = unfold_bytes(code);
  if (!bytes || bytes->empty()) return std::nullopt;
  if ((*bytes)[0] >= kTagNot) {
    auto f = decode_formula(code);
    if (!f) return std::nullopt;
    return AnyExpr(*f);
  }
  auto t = decode_term(code);
  if (!t) return std::nullopt;
  return AnyExpr(*t);
}

Term gq(const Term& t) { return Term::numeral(gc(t)); }
Term gq(const Formula& f) { return Term::numeral(gc(f)); }
Nat var_code(Var v) { return gc(Term::var(v)); }

namespace {

std::optional<Formula> as_formula(const Nat& n) { return decode_formula(n); }
std::optional<Term> as_term(const Nat& n) { return decode_term(n); }

std::optional<Var> as_var(const Nat& n) {
  auto t = decode_term(n);
  if (!t || t->kind() != TermKind::VarT) return std::nullopt;
  return t->var_of();
}

std::optional<Nat> dot_eval_opt(DotFn f, const std::vector<Nat>& a) {
  switch (f) {
    case DotFn::Neg: {
      auto x = as_formula(a[0]);
      if (!x) return std::nullopt;
      return gc(Formula::lnot(*x));
    }
    case DotFn::Imp:
    case DotFn::And:
    case DotFn::Or: {
      auto x = as_formula(a[0]), y = as_formula(a[1]);
      if (!x || !y) return std::nullopt;
      return gc(f == DotFn::Imp ? Formula::imp(*x, *y)
                : f == DotFn::And ? Formula::land(*x, *y)
                                  : Formula::lor(*x, *y));
    }
    case DotFn::All:
    case DotFn::Ex: {
      auto v = as_var(a[0]);
      auto x = as_formula(a[1]);
      if (!v || !x) return std::nullopt;
      return gc(f == DotFn::All ? Formula::forall(*v, *x)
                                : Formula::exists(*v, *x));
    }
    case DotFn::Sbt: {
      auto x = as_formula(a[0]);
      auto t = as_term(a[1]);
      auto v = as_var(a[2]);
      if (!x || !t || !v || !t->closed()) return std::nullopt;
      return gc(subst(*x, *v, *t));
    }
    case DotFn::Gq:
    case DotFn::Num:
      return gc(Term::numeral(a[0]));
    case DotFn::Ev: {
      auto t = as_term(a[0]);
      if (!t || !t->closed() || !t->arithmetic()) return std::nullopt;
      return eval_closed_term(*t);
    }
    case DotFn::EqA:
    case DotFn::NeqA: {
      auto s = as_term(a[0]), t = as_term(a[1]);
      if (!s || !t) return std::nullopt;
      Formula eq = Formula::eq(*s, *t);
      return gc(f == DotFn::EqA ? eq : Formula::lnot(eq));
    }
    case DotFn::TA:
    case DotFn::K1A:
    case DotFn::UA:
    case DotFn::AgA: {
      auto t = as_term(a[0]);
      if (!t) return std::nullopt;
      PredSym p = f == DotFn::TA ? PredSym::T
                  : f == DotFn::K1A ? PredSym::K1
                  : f == DotFn::UA ? PredSym::U : PredSym::Ag;
      return gc(Formula::atom(p, {*t}));
    }
    case DotFn::K2A: {
      auto s = as_term(a[0]), t = as_term(a[1]);
      if (!s || !t) return std::nullopt;
      return gc(Formula::atom(PredSym::K2, {*s, *t}));
    }
    case DotFn::Id:
      return a[0];
    case DotFn::QImp: {
      auto s = as_term(a[0]), t = as_term(a[1]);
      if (!s || !t) return std::nullopt;
      return gc(Term::dot(DotFn::Imp, {*s, *t}));
    }
  }
  return std::nullopt;
}

}  // namespace

Nat dot_eval(DotFn f, const std::vector<Nat>& args) {
  if (static_cast<int>(args.size()) != dot_fn_arity(f))
    throw Error(std::string("arity mismatch for ") + dot_fn_name(f));
  auto r = dot_eval_opt(f, args);
  return r ? *r : Nat(0);
}

Nat eval_dotted(DotFn f, const std::vector<Nat>& args) {
  if (static_cast<int>(args.size()) != dot_fn_arity(f))
    throw Error(std::string("arity mismatch for ") + dot_fn_name(f));
  auto r = dot_eval_opt(f, args);
  if (!r)
    throw Error(std::string(dot_fn_name(f)) + ": argument does not code a " +
                "suitable expression");
  return *r;
}

bool dot_holds(DotPred p, const std::vector<Nat>& args) {
  if (static_cast<int>(args.size()) != dot_pred_arity(p))
    throw Error(std::string("arity mismatch for ") + dot_pred_name(p));
  switch (p) {
    case DotPred::L0: {
      auto f = as_formula(args[0]);
      return f && f->sentence();
    }
    case DotPred::L1: {
      auto f = as_formula(args[0]);
      auto v = as_var(args[1]);
      return f && v && f->free_vars() == std::vector<int>{v->index};
    }
    case DotPred::Term0PA: {
      auto t = as_term(args[0]);
      return t && t->closed() && t->arithmetic();
    }
    case DotPred::Term0L: {
      auto t = as_term(args[0]);
      return t && t->closed();
    }
    case DotPred::VarP:
      return as_var(args[0]).has_value();
    case DotPred::AtomP: {
      auto f = as_formula(args[0]);
      return f && f->kind() == FormulaKind::Atom && f->in_lminus();
    }
  }
  return false;
}

std::optional<Nat> try_eval_ground(const Term& t) {
  switch (t.kind()) {
    case TermKind::Numeral: return t.value();
    case TermKind::Succ: {
      auto a = try_eval_ground(t.args()[0]);
      if (!a) return std::nullopt;
      return *a + 1;
    }
    case TermKind::Plus:
    case TermKind::Times: {
      auto a = try_eval_ground(t.args()[0]);
      auto b = try_eval_ground(t.args()[1]);
      if (!a || !b) return std::nullopt;
      return t.kind() == TermKind::Plus ? Nat(*a + *b) : Nat(*a * *b);
    }
    case TermKind::DotApp: {
      std::vector<Nat> args;
      for (const auto& a : t.args()) {
        auto v = try_eval_ground(a);
        if (!v) return std::nullopt;
        args.push_back(*v);
      }
      return dot_eval(t.fn(), args);
    }
    default:
      return std::nullopt;  // variables, u, meta
  }
}

Nat cantor_pair(const Nat& a, const Nat& b) {
  Nat s = a + b;
  return s * (s + 1) / 2 + b;
}

std::pair<Nat, Nat> cantor_unpair(const Nat& z) {
  Nat disc = 8 * z + 1;
  Nat s = (sqrt(disc) - 1) / 2;
  Nat b = z - s * (s + 1) / 2;
  return {Nat(s - b), b};
}

namespace {
struct QuoteHookInstaller {
  QuoteHookInstaller() {
    quote_hook() = [](const AnyExpr& e) { return gc(e); };
  }
} g_quote_hook_installer;
}  // namespace

}  // namespace ktlab
