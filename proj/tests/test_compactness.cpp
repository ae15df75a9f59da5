#include <gtest/gtest.h>

#include "engel/compactness.hpp"
#include "engel/liealg.hpp"
#include "oracles/cubic_oracle.hpp"
#include "support/random.hpp"

using namespace engel;
using namespace engel::testing;

namespace {

TablePtr pt() { return parameter_table(); }
Scalar P(const char* s) { return parse_scalar(s, pt()); }
FamilyId fam(int n) { return FamilyId{n, {}, {}, {}}; }
FamilyId at(int n, Rational a, Rational b) { return FamilyId{n, a, b, {}}; }

Scalar factor(int n, const char* word) { return stokes_factor(family_model(fam(n)), witness_form(word, pt())); }

RealLieAlgebra realified(const FamilyId& id) {
  return realify(family_model(fam(id.n)), family_bindings(id));
}

Gauss value_at(const Scalar& s, const FamilyId& id) {
  return s.substitute(family_bindings(id), pt()).constant_term();
}

LatticeCertificate cert(long m, long n, long k = 0) {
  auto c = lattice_candidate(m, n, k, 128);
  if (!c) throw std::runtime_error("no certificate");
  return *c;
}

}  // namespace

TEST(Compactness, FirstFamilyFactor) { EXPECT_EQ(factor(1, "w1^w2^w2bar"), -P("1 - 2*a + 2*b*i")); }
TEST(Compactness, SecondFamilyFactor) { EXPECT_EQ(factor(2, "w1^w2bar^w2"), P("2*i*(a + b)")); }
TEST(Compactness, FourthFamilyFactor) { EXPECT_EQ(factor(4, "w1^w2bar^w2"), P("1 + 2*b*i")); }
TEST(Compactness, FifthFamilyFactor) { EXPECT_EQ(factor(5, "w1^w2bar^w2"), P("(1 - 2*a)*(1 + 2*b*i)")); }

TEST(Compactness, SixthFamilyFactors) {
  ObstructionReport rep = obstruction(fam(6));
  ASSERT_EQ(rep.results.size(), 2u);
  EXPECT_EQ(rep.results[0].witness, "w1bar^w2^w2bar");
  EXPECT_EQ(rep.results[1].witness, "w1^w1bar^w2bar");
  for (const auto& r : rep.results) EXPECT_TRUE(r.matches_display) << r.witness << ": " << r.factor.str();
  EXPECT_TRUE(rep.locus_verified);
}

TEST(Compactness, FactorMatchesRecomputedDerivative) {
  for (int n : {1, 2, 4, 5, 6}) {
    ObstructionReport rep = obstruction(fam(n));
    CoframeModel m = family_model(fam(n));
    for (const auto& r : rep.results) {
      Form dw = d(witness_form(r.witness, pt()), m);
      EXPECT_EQ(dw, Form::monomial(kVolume, r.factor));
    }
  }
}

TEST(Compactness, LociCertified) {
  for (int n : {1, 2, 4, 5, 6}) {
    ObstructionReport rep = obstruction(fam(n));
    EXPECT_TRUE(rep.locus_verified) << "C" << n;
    for (const auto& r : rep.results) EXPECT_TRUE(r.matches_display) << "C" << n;
  }
}

TEST(Compactness, WrongLocusRejected) {
  LocusCertificate bad{{"a - b"}, {{"0"}, {"2"}}, {{"0", "1/2"}}};
  EXPECT_FALSE(verify_locus({factor(2, "w1^w2bar^w2")}, bad, pt()));
  LocusCertificate nonpositive{{"1 - 2*a"}, {{"1"}, {"2*b"}}, {{"1", "0"}}, "b"};
  EXPECT_FALSE(verify_locus({factor(5, "w1^w2bar^w2")}, nonpositive, pt()));
}

TEST(Compactness, WitnessMustBeThreeForm) {
  EXPECT_THROW(witness_form("w1^w2", pt()), usage_error);
  EXPECT_THROW(witness_form("w1^w1^w2", pt()), usage_error);
  EXPECT_THROW(stokes_factor(family_model(fam(1)), gen_form(W1, pt())), usage_error);
}

TEST(Compactness, UnimodularExamples) {
  EXPECT_TRUE(is_unimodular(realified(at(1, Rational(1, 2), 0))));
  EXPECT_FALSE(is_unimodular(realified(at(4, 0, 0))));
  EXPECT_TRUE(is_unimodular(RealLieAlgebra(4)));
  EXPECT_TRUE(basis_3forms_closed(RealLieAlgebra(4)));
}

TEST(Compactness, FirstFamilyQuotientTypes) {
  EXPECT_EQ(c1_quotient_type(Rational(1, 2), 0), C1QuotientType::GAMMA2_COMPACT);
  EXPECT_EQ(c1_quotient_type(Rational(1, 2), 1), C1QuotientType::GAMMA3_NONCOMPACT);
  EXPECT_EQ(c1_quotient_type(0, 0), C1QuotientType::GAMMA1_NONCOMPACT);
  EXPECT_EQ(c1_quotient_type(1, 0), C1QuotientType::SPECIAL_A1B0);
  EXPECT_EQ(c1_quotient_type(1, 1), C1QuotientType::GAMMA1_NONCOMPACT);
}

TEST(Compactness, ExampleLatticeMatchesClosedForm) {
  LatticeCertificate c = cert(0, -1);
  EXPECT_EQ(cubic_text(0, -1), "x^3 - x - 1");
  auto lam = oracle::closed_form_lambda();
  EXPECT_NEAR(c.lambda_re.to_double(), static_cast<double>(lam.real()), 1e-9);
  EXPECT_NEAR(c.lambda_im.to_double(), static_cast<double>(lam.imag()), 1e-9);
  EXPECT_NEAR(c.lambda_re.to_double(), -0.662359, 1e-6);
  EXPECT_EQ(c.q_side, "gt1");
  EXPECT_NEAR(c.q.to_double(), 1.324717957244746, 1e-12);
  EXPECT_TRUE(verify_certificate(c));
}

TEST(Compactness, UnitModulusRejected) {
  std::string why;
  EXPECT_FALSE(lattice_candidate(3, 3, 0, 128, &why));
  EXPECT_NE(why.find("|lambda| = 1"), std::string::npos);
  EXPECT_FALSE(lattice_candidate(1, 1, 0, 128, &why));
  EXPECT_NE(why.find("|lambda| = 1"), std::string::npos);
}

TEST(Compactness, SmallRootAccepted) {
  LatticeCertificate c = cert(-1, 0);
  EXPECT_EQ(c.q_side, "lt1");
  EXPECT_GT(c.abs_lambda.to_double(), 1.0);
  auto roots = oracle::real_roots(-1, 0);
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_NEAR(c.q.to_double(), static_cast<double>(roots[0]), 1e-12);
  EXPECT_TRUE(verify_certificate(c));
}

TEST(Compactness, CertificateMutations) {
  LatticeCertificate c = cert(0, -1);
  LatticeCertificate bad_a = c;
  bad_a.A = companion_matrix(c.m + 1, c.n);
  EXPECT_FALSE(check_certificate(bad_a).char_poly);
  EXPECT_FALSE(verify_certificate(bad_a));
  LatticeCertificate bad_k = c;
  bad_k.k += 1;
  EXPECT_FALSE(check_certificate(bad_k).angle_relation);
  EXPECT_FALSE(verify_certificate(bad_k));
  LatticeCertificate bad_q = c;
  bad_q.q_hi = bad_q.q_lo;
  EXPECT_FALSE(verify_certificate(bad_q));
}

TEST(Compactness, LinearCoefficientRelation) {
  for (const auto& c : lattice_search(-4, 4, -4, 4, 0, 128).certificates) {
    double p = c.p.to_double(), q = c.q.to_double();
    EXPECT_NEAR(p * q + 1 / q, static_cast<double>(c.n), 1e-12);
    EXPECT_TRUE(check_certificate(c).sum_relations);
  }
}

TEST(Compactness, PrecisionFloor) { EXPECT_THROW(lattice_candidate(0, -1, 0, 32), usage_error); }

TEST(Compactness, SearchIsSortedAndPartitioned) {
  auto r = lattice_search(-2, 2, -2, 2, 0, 96);
  EXPECT_EQ(r.certificates.size() + r.rejections.size(), 25u);
  for (std::size_t i = 1; i < r.certificates.size(); ++i)
    EXPECT_LT(std::make_pair(r.certificates[i - 1].m, r.certificates[i - 1].n),
              std::make_pair(r.certificates[i].m, r.certificates[i].n));
}

// ---------------------------------------------------------------------------
// Properties

TEST(CompactnessProperty, FactorsVanishExactlyOnLoci) {
  Rng rng(601);
  for (int i = 0; i < kCases; ++i) {
    Rational a = rand_rational(rng), b = rand_rational(rng);
    if (i % 4 == 0) { a = Rational(1, 2); b = 0; }
    if (i % 4 == 1) b = -a;
    if (i % 4 == 2) a = Rational(1, 2);
    bool c1_zero = value_at(factor(1, "w1^w2^w2bar"), at(1, a, b)).is_zero();
    ASSERT_EQ(c1_zero, a == Rational(1, 2) && sgn(b) == 0);
    ASSERT_EQ(value_at(factor(2, "w1^w2bar^w2"), at(2, a, b)).is_zero(), sgn(a + b) == 0);
    ASSERT_FALSE(value_at(factor(4, "w1^w2bar^w2"), at(4, a, b)).is_zero());
    ASSERT_EQ(value_at(factor(5, "w1^w2bar^w2"), at(5, a, b)).is_zero(), a == Rational(1, 2));
  }
}

TEST(CompactnessProperty, SixthFamilyCommonZero) {
  Rng rng(602);
  ObstructionReport rep = obstruction(fam(6));
  for (int i = 0; i < kCases; ++i) {
    Rational t = i % 5 == 0 ? Rational(-1) : rand_rational(rng), b = rand_rational(rng);
    FamilyId id{6, {}, b, t};
    bool both = value_at(rep.results[0].factor, id).is_zero() && value_at(rep.results[1].factor, id).is_zero();
    ASSERT_EQ(both, t == -1) << "t=" << t << " b=" << b;
  }
}

TEST(CompactnessProperty, StokesFactorForcesNonUnimodular) {
  Rng rng(603);
  const std::vector<int> cases = {1, 2, 4, 5, 6};
  for (int i = 0; i < kCases; ++i) {
    int n = cases[i % cases.size()];
    FamilyId id = rand_family_point(rng, n);
    ObstructionReport rep = obstruction(fam(n));
    bool nonzero = false;
    for (const auto& r : rep.results) nonzero = nonzero || !value_at(r.factor, id).is_zero();
    if (nonzero) ASSERT_FALSE(is_unimodular(realified(id))) << id.name();
  }
}

TEST(CompactnessProperty, UnimodularIffBasisThreeFormsClosed) {
  Rng rng(604);
  for (int i = 0; i < kCases; ++i) {
    FamilyId id = rand_family_point(rng, 1 + i % 6);
    if (i % 10 == 0) id = at(1, Rational(1, 2), 0);
    RealLieAlgebra L = realified(id);
    if (i % 2) L = rand_invertible_change(rng, L);
    ASSERT_EQ(is_unimodular(L), basis_3forms_closed(L)) << id.name();
  }
}

TEST(CompactnessProperty, LatticeAgreesWithCubicOracle) {
  int cases = 0;
  for (long m = -6; m <= 6; ++m)
    for (long n = -6; n <= 6; ++n, ++cases) {
      auto c = lattice_candidate(m, n, 0, 128);
      auto roots = oracle::real_roots(m, n);
      bool expect = false;
      if (roots.size() == 1 && roots[0] > 0 && std::fabs(static_cast<double>(roots[0]) - 1) > 1e-12) {
        auto lam = oracle::complex_root(m, n, roots[0]);
        expect = lam && std::fabs(static_cast<double>(std::abs(*lam)) - 1) > 1e-12;
      }
      ASSERT_EQ(c.has_value(), expect) << "(" << m << ", " << n << ")";
      if (!c) continue;
      ASSERT_NEAR(c->q.to_double(), static_cast<double>(roots[0]), 1e-12);
      auto lam = *oracle::complex_root(m, n, roots[0]);
      ASSERT_NEAR(c->lambda_re.to_double(), static_cast<double>(lam.real()), 1e-9);
      ASSERT_NEAR(c->lambda_im.to_double(), static_cast<double>(lam.imag()), 1e-9);
      ASSERT_TRUE(verify_certificate(*c));
    }
  EXPECT_GE(cases, kCases);
}
