#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ktlab/coding.hpp"

#include <random>
#include <set>

using namespace ktlab;

namespace {

Term v(int i) { return Term::var(i); }
Term num(long long n) { return Term::numeral(Nat(n)); }

struct Gen {
  std::mt19937 rng;
  explicit Gen(unsigned seed) : rng(seed) {}
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  Term term(int depth) {
    if (depth <= 0) return pick(2) ? v(pick(3)) : num(pick(100));
    switch (pick(7)) {
      case 0: return Term::succ(term(depth - 1));
      case 1: return Term::plus(term(depth - 1), term(depth - 1));
      case 2: return Term::times(term(depth - 1), term(depth - 1));
      case 3: return Term::ufun(term(depth - 1));
      case 4: return Term::dot(DotFn::Sbt,
                               {term(depth - 1), term(depth - 1), term(depth - 1)});
      case 5: return Term::dot(DotFn::Num, {term(depth - 1)});
      default: return term(0);
    }
  }

  Formula formula(int depth) {
    if (depth <= 0) {
      switch (pick(5)) {
        case 0: return Formula::eq(term(0), term(0));
        case 1: return Formula::atom(PredSym::U, {term(0)});
        case 2: return Formula::atom(PredSym::K2, {term(0), term(0)});
        case 3: return Formula::pr("base", term(0));
        default: return Formula::atom(PredSym::T, {term(0)});
      }
    }
    switch (pick(6)) {
      case 0: return Formula::lnot(formula(depth - 1));
      case 1: return Formula::imp(formula(depth - 1), formula(depth - 1));
      case 2: return Formula::land(formula(depth - 1), formula(depth - 1));
      case 3: return Formula::forall(Var{pick(3)}, formula(depth - 1));
      case 4: return Formula::datom(DotPred::L1, {term(depth - 1), term(depth - 1)});
      default: return formula(0);
    }
  }
};

}  // namespace

TEST_CASE("codes are injective and decodable on a random pool") {
  Gen gen(7491);
  std::set<Nat> seen;
  for (int i = 0; i < 300; ++i) {
    Term t = gen.term(4);
    Nat c = gc(t);
    CHECK(c > 0);
    seen.insert(c);
    auto back = decode_term(c);
    REQUIRE(back.has_value());
    CHECK(*back == t);
    CHECK_FALSE(decode_formula(c).has_value());
  }
  std::set<Term> pool_t;
  std::set<Nat> codes_f;
  for (int i = 0; i < 300; ++i) {
    Formula f = gen.formula(4);
    Nat c = gc(f);
    auto back = decode_formula(c);
    REQUIRE(back.has_value());
    CHECK(*back == f);
    CHECK_FALSE(decode_term(c).has_value());
    codes_f.insert(c);
    seen.insert(c);
  }
  // distinct expressions get distinct codes; duplicates in the pool are rare
  // but possible, so count distinct expressions instead of pool size
  std::set<std::string> texts;
  for (const auto& c : codes_f) texts.insert(to_string(*decode_formula(c)));
  CHECK(texts.size() == codes_f.size());
}

TEST_CASE("decoding rejects junk and non-canonical streams") {
  CHECK_FALSE(decode_term(Nat(0)).has_value());
  CHECK_FALSE(decode_formula(Nat(0)).has_value());
  for (long long n : {1LL, 2LL, 255LL, 256LL, 1000000007LL}) {
    decode_any(Nat(n));  // must not crash; most junk fails to decode
  }
  Nat c = gc(parse_formula("U(v0) -> T(0)"));
  CHECK(decode_formula(c).has_value());
  auto shifted = decode_formula(c + 1);
  bool collides = shifted.has_value() && *shifted == parse_formula("U(v0) -> T(0)");
  CHECK_FALSE(collides);
  CHECK_FALSE(decode_term(c * 256).has_value());  // sentinel shifted away
  CHECK_FALSE(decode_formula(c * 256).has_value());
}

TEST_CASE("quote towers stay linear in size") {
  Formula f = parse_formula("T(0)");
  Term q = gq(f);
  for (int i = 0; i < 6; ++i) q = gq(q);
  Nat c = gc(q);
  CHECK(msb(c) < 4096);  // bits; a pairing scheme would overflow memory here
  auto back = decode_term(c);
  REQUIRE(back.has_value());
  CHECK(*back == q);
}

TEST_CASE("succ of numeral never appears in codes") {
  // force a raw S-over-numeral stream and check the decoder rejects it:
  // serialize S(v0), then splice the numeral 5 in place of v0 by recoding
  Term sv = Term::succ(v(0));
  Nat ok = gc(sv);
  CHECK(decode_term(ok).has_value());
  // S(5) folds to 6 before coding, so its code is the numeral code
  CHECK(gc(Term::succ(num(5))) == gc(num(6)));
}

TEST_CASE("dotted connective evaluators agree with the syntax operations") {
  Gen gen(5512);
  for (int i = 0; i < 120; ++i) {
    Formula a = gen.formula(3);
    Formula b = gen.formula(2);
    CHECK(dot_eval(DotFn::Neg, {gc(a)}) == gc(Formula::lnot(a)));
    CHECK(dot_eval(DotFn::Imp, {gc(a), gc(b)}) == gc(Formula::imp(a, b)));
    CHECK(dot_eval(DotFn::And, {gc(a), gc(b)}) == gc(Formula::land(a, b)));
    CHECK(dot_eval(DotFn::Or, {gc(a), gc(b)}) == gc(Formula::lor(a, b)));
    CHECK(dot_eval(DotFn::All, {var_code(Var{1}), gc(a)}) ==
          gc(Formula::forall(Var{1}, a)));
    CHECK(dot_eval(DotFn::Ex, {var_code(Var{2}), gc(a)}) ==
          gc(Formula::exists(Var{2}, a)));
  }
}

TEST_CASE("dotted substitution agrees with sbt") {
  Gen gen(99021);
  for (int i = 0; i < 100; ++i) {
    Formula a = gen.formula(3);
    Term t = gen.term(3);
    if (!t.closed()) continue;
    Nat got = dot_eval(DotFn::Sbt, {gc(a), gc(t), var_code(Var{0})});
    Nat want = gc(sbt(a, t, Var{0}));
    CHECK(got == want);
  }
  // substituting for a non-free variable is the identity
  Formula f = parse_formula("forall v0 U(v0)");
  CHECK(dot_eval(DotFn::Sbt, {gc(f), gc(num(3)), var_code(Var{0})}) == gc(f));
}

TEST_CASE("quotation builders") {
  Formula f = parse_formula("K2(v0, v1)");
  CHECK(dot_eval(DotFn::Gq, {gc(f)}) == gc(gq(f)));
  CHECK(dot_eval(DotFn::Num, {Nat(7)}) == gc(num(7)));
  CHECK(dot_eval(DotFn::Gq, {Nat(7)}) == dot_eval(DotFn::Num, {Nat(7)}));
  // gq of arbitrary naturals is total: the numeral always exists
  CHECK(dot_eval(DotFn::Gq, {Nat(0)}) == gc(num(0)));

  Term s = parse_term("u(v0)");
  Term t = parse_term("S(v1)");
  CHECK(dot_eval(DotFn::QImp, {gc(s), gc(t)}) ==
        gc(Term::dot(DotFn::Imp, {s, t})));
}

TEST_CASE("atom builders") {
  Term s = parse_term("(v0 + 2)");
  Term t = parse_term("u(0)");
  CHECK(dot_eval(DotFn::EqA, {gc(s), gc(t)}) == gc(Formula::eq(s, t)));
  CHECK(dot_eval(DotFn::NeqA, {gc(s), gc(t)}) ==
        gc(Formula::lnot(Formula::eq(s, t))));
  CHECK(dot_eval(DotFn::TA, {gc(t)}) == gc(Formula::atom(PredSym::T, {t})));
  CHECK(dot_eval(DotFn::K1A, {gc(t)}) == gc(Formula::atom(PredSym::K1, {t})));
  CHECK(dot_eval(DotFn::UA, {gc(t)}) == gc(Formula::atom(PredSym::U, {t})));
  CHECK(dot_eval(DotFn::AgA, {gc(t)}) == gc(Formula::atom(PredSym::Ag, {t})));
  CHECK(dot_eval(DotFn::K2A, {gc(s), gc(t)}) ==
        gc(Formula::atom(PredSym::K2, {s, t})));
  CHECK(dot_eval(DotFn::Id, {Nat(12345)}) == Nat(12345));
}

TEST_CASE("closed-term valuation") {
  Term t = parse_term("((2 + 3) * S(6))");
  CHECK(dot_eval(DotFn::Ev, {gc(t)}) == Nat(35));
  CHECK(dot_eval(DotFn::Ev, {gc(parse_term("u(0)"))}) == 0);   // not L_PA
  CHECK(dot_eval(DotFn::Ev, {gc(parse_term("(v0 + 1)"))}) == 0);  // open
}

TEST_CASE("ill-typed input defaults to zero, strict variant throws") {
  CHECK(dot_eval(DotFn::Neg, {Nat(0)}) == 0);
  CHECK(dot_eval(DotFn::Neg, {Nat(17)}) == 0);
  CHECK(dot_eval(DotFn::Imp, {gc(parse_formula("U(0)")), Nat(4)}) == 0);
  CHECK(dot_eval(DotFn::All, {Nat(3), gc(parse_formula("U(0)"))}) == 0);
  CHECK(dot_eval(DotFn::All, {gc(num(4)), gc(parse_formula("U(0)"))}) == 0);
  CHECK(dot_eval(DotFn::Sbt, {gc(parse_formula("U(v0)")),
                              gc(parse_term("u(v2)")),  // open term
                              var_code(Var{0})}) == 0);
  CHECK_THROWS_AS(eval_dotted(DotFn::Neg, {Nat(17)}), Error);
  CHECK_THROWS_AS(eval_dotted(DotFn::Sbt, {Nat(1), Nat(2), Nat(3)}), Error);
  CHECK(eval_dotted(DotFn::Gq, {Nat(17)}) == gc(num(17)));
  CHECK_THROWS_AS(dot_eval(DotFn::Imp, {Nat(1)}), Error);  // arity
}

TEST_CASE("syntactic classification predicates") {
  CHECK(dot_holds(DotPred::L0, {gc(parse_formula("forall v0 U(v0)"))}));
  CHECK(dot_holds(DotPred::L0, {gc(parse_formula("Pr[base](.neg(0))"))}));
  CHECK_FALSE(dot_holds(DotPred::L0, {gc(parse_formula("U(v0)"))}));
  CHECK_FALSE(dot_holds(DotPred::L0, {gc(num(3))}));
  CHECK_FALSE(dot_holds(DotPred::L0, {Nat(6)}));

  CHECK(dot_holds(DotPred::L1, {gc(parse_formula("U(v2)")), var_code(Var{2})}));
  CHECK_FALSE(dot_holds(DotPred::L1, {gc(parse_formula("U(v2)")), var_code(Var{1})}));
  CHECK_FALSE(dot_holds(DotPred::L1,
                        {gc(parse_formula("K2(v1, v2)")), var_code(Var{2})}));

  CHECK(dot_holds(DotPred::Term0PA, {gc(parse_term("((2 + 2) * S(0))"))}));
  CHECK_FALSE(dot_holds(DotPred::Term0PA, {gc(parse_term("u(0)"))}));
  CHECK_FALSE(dot_holds(DotPred::Term0PA, {gc(parse_term("(v0 + 1)"))}));
  CHECK(dot_holds(DotPred::Term0L, {gc(parse_term("u(.gq(0))"))}));
  CHECK_FALSE(dot_holds(DotPred::Term0L, {gc(parse_term("u(v0)"))}));

  CHECK(dot_holds(DotPred::VarP, {var_code(Var{5})}));
  CHECK_FALSE(dot_holds(DotPred::VarP, {gc(num(5))}));

  CHECK(dot_holds(DotPred::AtomP, {gc(parse_formula("u(v0) = 0"))}));
  CHECK(dot_holds(DotPred::AtomP, {gc(parse_formula("U(3)"))}));
  CHECK(dot_holds(DotPred::AtomP, {gc(parse_formula("Ag(v1)"))}));
  CHECK_FALSE(dot_holds(DotPred::AtomP, {gc(parse_formula("T(0)"))}));
  CHECK_FALSE(dot_holds(DotPred::AtomP, {gc(parse_formula("!U(0)"))}));
}

TEST_CASE("ground evaluation over arithmetic and dotted symbols") {
  Formula f = parse_formula("U(0)");
  Term t = Term::dot(DotFn::Neg, {Term::dot(DotFn::Neg, {gq(f)})});
  auto r = try_eval_ground(t);
  REQUIRE(r.has_value());
  CHECK(*r == gc(Formula::lnot(Formula::lnot(f))));
  CHECK_FALSE(try_eval_ground(parse_term("u(0)")).has_value());
  CHECK_FALSE(try_eval_ground(parse_term(".neg(v0)")).has_value());
  CHECK(try_eval_ground(parse_term("(2 * .id(21))")) == Nat(42));
}

TEST_CASE("quote sugar uses the installed hook") {
  Formula f = parse_formula("U(0) -> T(quote(U(0)))");
  CHECK(f.sub()[1].terms()[0] == gq(parse_formula("U(0)")));
  Term nested = parse_term("quote(T(quote(0 = 0)))");
  Formula inner = parse_formula("0 = 0");
  Formula outer = Formula::atom(PredSym::T, {gq(inner)});
  CHECK(nested == gq(outer));
}

TEST_CASE("cantor pairing round trip") {
  std::mt19937 rng(31337);
  for (int i = 0; i < 200; ++i) {
    Nat a = rng() % 100000, b = rng() % 100000;
    auto [x, y] = cantor_unpair(cantor_pair(a, b));
    CHECK(x == a);
    CHECK(y == b);
  }
  CHECK(cantor_pair(0, 0) == 0);
  auto [p, q] = cantor_unpair(Nat(4));
  CHECK(cantor_pair(p, q) == 4);
}
