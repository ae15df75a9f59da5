#include <gtest/gtest.h>

#include "engel/scalar.hpp"
#include "support/random.hpp"

using namespace engel;
using namespace engel::testing;

namespace {

TablePtr ab() {
  static const TablePtr t = SymbolTable::Builder().real("a").real("b").build();
  return t;
}
Scalar S(const char* text, const TablePtr& t = mixed_table()) { return parse_scalar(text, t); }

}  // namespace

TEST(Scalar, ConjugateSum) { EXPECT_EQ(S("a + i*b") + S("a - i*b"), S("2*a")); }

TEST(Scalar, ModulusProduct) { EXPECT_EQ(S("2*b + i") * S("2*b - i"), S("4*b^2 + 1")); }

TEST(Scalar, SinSquaredReduces) {
  Scalar s = S("sina") * S("sina");
  EXPECT_EQ(s, S("1 - cosa^2"));
  for (const auto& [e, c] : s.terms()) EXPECT_LE(e[mixed_table()->index("sina")], 1);
}

TEST(Scalar, ConjugateExamples) {
  EXPECT_EQ(S("2*i*a").conjugate(), S("-2*i*a"));
  EXPECT_EQ(S("p").conjugate(), S("pbar"));
  EXPECT_EQ(S("cosa + i*sina").conjugate(), S("cosa - i*sina"));
}

TEST(Scalar, SubstituteFamilyConstant) {
  Scalar x = S("p");
  Scalar r = x.substitute({{"p", S("a + i*b")}});
  EXPECT_EQ(r, S("a + i*b"));
  EXPECT_EQ(S("pbar").substitute({{"p", S("a + i*b")}}), S("a - i*b"));
}

TEST(Scalar, IdentityBinding) {
  Scalar x = S("3*a*p - i*pbar*cosa + sina");
  EXPECT_EQ(x.substitute({}), x);
  EXPECT_EQ(x.substitute({{"a", S("a")}, {"p", S("p")}}), x);
}

TEST(Scalar, CircleParametrizationIsValid) {
  auto target = mixed_table()->extend({{"t", SymbolKind::Real, "", {}}});
  Scalar tt = Scalar::symbol(target, "t");
  Scalar one(Gauss(1), target);
  Fraction c{one - tt * tt, one + tt * tt}, s{tt.scaled(Gauss(2)), one + tt * tt};
  Fraction x;
  ASSERT_NO_THROW(x = substitute_fractions(S("cosa*sina + a"), {{"cosa", c}, {"sina", s}}, target));
  Fraction expect = Fraction{c.num * s.num, c.den * s.den} + Fraction{Scalar::symbol(target, "a"), one};
  EXPECT_TRUE((x - expect).is_zero());
  Fraction bad{tt, one};
  EXPECT_THROW(substitute_fractions(S("cosa"), {{"cosa", bad}, {"sina", bad}}, target), invalid_binding);
}

TEST(Scalar, CircleRelationViolationRejected) {
  EXPECT_THROW(S("cosa").substitute({{"cosa", S("1")}, {"sina", S("1")}}), invalid_binding);
  EXPECT_THROW(S("cosa").substitute({{"cosa", S("1")}}), invalid_binding);
  EXPECT_NO_THROW(S("cosa").substitute({{"cosa", S("3/5")}, {"sina", S("4/5")}}));
}

TEST(Scalar, NonConjugatePairBindingRejected) {
  EXPECT_THROW(S("p").substitute({{"p", S("i")}, {"pbar", S("i")}}), invalid_binding);
}

TEST(Scalar, EvalExamples) {
  EXPECT_EQ(S("4*b^2 + 1", ab()).eval(std::map<std::string, Rational>{{"b", Rational(1, 2)}}), Gauss(2));
  Gauss c = S("cosa").eval(std::map<std::string, Rational>{}, Rational(-1));
  Gauss s = S("sina").eval(std::map<std::string, Rational>{}, Rational(-1));
  EXPECT_EQ(c, Gauss(0));
  EXPECT_EQ(s, Gauss(-1));
  std::map<std::string, Rational> pt{{"a", Rational(1, 2)}, {"b", Rational(0)}};
  EXPECT_TRUE(S("-(1 - 2*a + 2*b*i)", ab()).eval(pt).is_zero());
}

TEST(Scalar, EvalUnboundSymbolIsUsageError) {
  EXPECT_THROW(S("a*b", ab()).eval(std::map<std::string, Rational>{{"a", Rational(1)}}), usage_error);
}

TEST(Scalar, IsZeroExamples) {
  Scalar x = S("a*p + 3*i");
  EXPECT_TRUE((x - x).is_zero());
  EXPECT_TRUE(S("sina^2 + cosa^2 - 1").is_zero());
  EXPECT_FALSE(S("2*i*(a + b)").is_zero());
}

TEST(Scalar, MismatchedTablesRejected) {
  auto other = SymbolTable::Builder().real("x").build();
  EXPECT_THROW(S("a") + parse_scalar("x", other), usage_error);
  EXPECT_THROW(S("a") * parse_scalar("x", other), usage_error);
}

TEST(Scalar, ParseErrorsCarryPosition) {
  try {
    S("a + * b");
    FAIL();
  } catch (const parse_error& e) {
    EXPECT_EQ(e.position(), 4u);
  }
  EXPECT_THROW(S("q"), parse_error);
  EXPECT_THROW(S("a / (a + b)"), parse_error);
  EXPECT_THROW(S("(a + b)^-1"), parse_error);
}

TEST(Scalar, LaurentMonomials) {
  Scalar x = S("a^-2*b");
  EXPECT_EQ(x * S("a^2"), S("b"));
  EXPECT_EQ(S("1/(2*a)") * S("2*a"), S("1"));
  EXPECT_EQ(S("a^-1").diff(mixed_table()->index("a")), -S("a^-2"));
}

TEST(Scalar, SymbolTableValidation) {
  EXPECT_THROW(SymbolTable::make({{"a", SymbolKind::Real, "", {}}, {"a", SymbolKind::Real, "", {}}}), usage_error);
  EXPECT_THROW(SymbolTable::make({{"p", SymbolKind::ConjugatePair, "q", {}}}), usage_error);
  EXPECT_THROW(SymbolTable::make({{"p", SymbolKind::ConjugatePair, "p", {}}}), usage_error);
  EXPECT_THROW(SymbolTable::make({{"c", SymbolKind::CircleCos, "s", {}}}), usage_error);
}

TEST(Scalar, SqrtSymbolReduces) {
  auto t = SymbolTable::Builder().sqrt("c", Rational(1, 8)).build();
  Scalar c = Scalar::symbol(t, "c");
  EXPECT_EQ(c * c, Scalar(Gauss(Rational(1, 8)), t));
  EXPECT_EQ(c.inverse() * c, Scalar(Gauss(1), t));
}

// ---------------------------------------------------------------------------
// Properties

TEST(ScalarProperty, RingAxioms) {
  Rng rng(101);
  const auto& t = mixed_table();
  for (int i = 0; i < kCases; ++i) {
    Scalar x = rand_scalar(rng, t), y = rand_scalar(rng, t), z = rand_scalar(rng, t);
    ASSERT_EQ((x + y) + z, x + (y + z));
    ASSERT_EQ((x * y) * z, x * (y * z));
    ASSERT_EQ(x + y, y + x);
    ASSERT_EQ(x * y, y * x);
    ASSERT_EQ(x * (y + z), x * y + x * z);
  }
}

TEST(ScalarProperty, ConjugationIsRingInvolution) {
  Rng rng(102);
  const auto& t = mixed_table();
  for (int i = 0; i < kCases; ++i) {
    Scalar x = rand_scalar(rng, t), y = rand_scalar(rng, t);
    ASSERT_EQ(x.conjugate().conjugate(), x);
    ASSERT_EQ((x * y).conjugate(), x.conjugate() * y.conjugate());
    ASSERT_EQ((x + y).conjugate(), x.conjugate() + y.conjugate());
  }
}

TEST(ScalarProperty, CanonicalNegation) {
  Rng rng(103);
  for (int i = 0; i < kCases; ++i) {
    Scalar x = rand_scalar(rng, mixed_table());
    ASSERT_TRUE((x + (-x)).terms().empty());
  }
}

TEST(ScalarProperty, EvalIsRingHomomorphism) {
  Rng rng(104);
  const auto& t = mixed_table();
  for (int i = 0; i < kCases; ++i) {
    Scalar x = rand_scalar(rng, t), y = rand_scalar(rng, t);
    Point p = rand_point(rng, t);
    ASSERT_EQ((x + y).eval(p.values, p.t), x.eval(p.values, p.t) + y.eval(p.values, p.t));
    ASSERT_EQ((x * y).eval(p.values, p.t), x.eval(p.values, p.t) * y.eval(p.values, p.t));
    ASSERT_EQ(x.conjugate().eval(p.values, p.t), x.eval(p.values, p.t).conj());
  }
}

TEST(ScalarProperty, EvalAfterSubstituteComposes) {
  Rng rng(105);
  const auto& t = mixed_table();
  for (int i = 0; i < kCases; ++i) {
    Scalar x = rand_scalar(rng, t);
    Scalar va = rand_scalar(rng, t, 2, 1), vp = rand_scalar(rng, t, 2, 1);
    // keep a real: a -> real combination of b only
    va = Scalar(rand_rational(rng), t) * S("b") + Scalar(rand_rational(rng), t);
    Scalar y = x.substitute({{"a", va}, {"p", vp}});
    Point pt = rand_point(rng, t);
    auto composed = pt.values;
    composed["a"] = va.eval(pt.values, pt.t);
    composed["p"] = vp.eval(pt.values, pt.t);
    composed.erase("pbar");
    ASSERT_EQ(y.eval(pt.values, pt.t), x.eval(composed, pt.t));
  }
}

TEST(ScalarProperty, ParsePrintRoundTrip) {
  Rng rng(106);
  const auto& t = mixed_table();
  for (int i = 0; i < kCases; ++i) {
    Scalar x = rand_scalar(rng, t);
    ASSERT_EQ(parse_scalar(x.str(), t), x) << x.str();
  }
}
