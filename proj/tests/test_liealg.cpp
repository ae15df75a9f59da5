#include <gtest/gtest.h>

#include <fstream>

#include "engel/classify.hpp"
#include "engel/liealg.hpp"
#include "oracles/lie_oracle.hpp"
#include "support/random.hpp"

using namespace engel;
using namespace engel::testing;

namespace {

FamilyId at(int n, Rational a, Rational b) { return FamilyId{n, a, b, {}}; }

RealLieAlgebra realified(const FamilyId& id, bool paper = false) {
  FamilyId sym{id.n, {}, {}, {}};
  std::optional<Matrix2> pre;
  if (paper) pre = display_basis(id.n);
  return realify(family_model(sym), family_bindings(id), pre);
}

oracle::Tensor3 tensor(const RealLieAlgebra& L) {
  oracle::Tensor3 c(L.n, std::vector<std::vector<mpq_class>>(L.n, std::vector<mpq_class>(L.n)));
  for (std::size_t i = 0; i < L.n; ++i)
    for (std::size_t j = 0; j < L.n; ++j)
      for (std::size_t k = 0; k < L.n; ++k) c[i][j][k] = L.at(i, j, k);
  return c;
}

RealLieAlgebra sl2_plus_r() {
  // H, X, Y, Z: [H,X]=2X, [H,Y]=-2Y, [X,Y]=H
  return algebra_from_brackets(4, {{1, 2, 2, 2}, {1, 3, 3, -2}, {2, 3, 1, 1}});
}

RealForm rmono(unsigned m, Rational c) { return RealForm::monomial(m, c); }

}  // namespace

TEST(LieAlg, FirstFamilySpecialCoframe) {
  CoframeModel m = instantiate(family_model(FamilyId{1, {}, {}, {}}), family_bindings(at(1, Rational(1, 2), 0)));
  RealCoframe cf = realify_coframe(transform(m, display_basis(1)));
  EXPECT_TRUE(cf.d_theta[0].is_zero());
  EXPECT_TRUE(cf.d_theta[1].is_zero());
  EXPECT_EQ(cf.d_theta[2], rmono(0b1010, -1));  // -beta^delta
  EXPECT_EQ(cf.d_theta[3], rmono(0b0110, 1));   // beta^gamma
  EXPECT_EQ(identify(realified(at(1, Rational(1, 2), 0), true)), LieType::SOLVABLE_C1_PATTERN);
}

TEST(LieAlg, SecondFamilyBrackets) {
  Rational a = 1;
  // [X2,X1]=4a X1, [X2,X4]=X3-2a X4, [X2,X3]=-2a X3-X4
  RealLieAlgebra expect = algebra_from_brackets(
      4, {{2, 1, 1, 4 * a}, {2, 4, 3, 1}, {2, 4, 4, -2 * a}, {2, 3, 3, -2 * a}, {2, 3, 4, -1}});
  ASSERT_TRUE(jacobi_check(expect));
  EXPECT_EQ(invariants(realified(at(2, 1, -1))), invariants(expect));
  EXPECT_EQ(invariants(realified(at(2, 1, -1), true)), invariants(expect));
}

TEST(LieAlg, ThirdFamilyOnParabolaIsG410) {
  EXPECT_EQ(identify(realified(at(3, 1, 1), true)), LieType::SOLVABLE_G4_10);
  EXPECT_EQ(identify(realified(at(3, 1, 1))), LieType::SOLVABLE_G4_10);
}

TEST(LieAlg, JacobiExamples) {
  EXPECT_TRUE(jacobi_check(RealLieAlgebra(4)));
  RealLieAlgebra L = realified(at(3, -1, 2));
  ASSERT_TRUE(jacobi_check(L));
  bool broken = false;
  for (std::size_t idx = 0; idx < L.c.size() && !broken; ++idx) {
    RealLieAlgebra M = L;
    std::size_t i = idx / 16, j = (idx / 4) % 4, k = idx % 4;
    if (i >= j) continue;
    M.at(i, j, k) += 1;
    M.at(j, i, k) -= 1;
    broken = !jacobi_check(M);
  }
  EXPECT_TRUE(broken);
}

TEST(LieAlg, SlTwoPlusLine) {
  RealLieAlgebra L = sl2_plus_r();
  Fingerprint f = invariants(L);
  EXPECT_EQ(f.radical_dim, 1);
  EXPECT_EQ(f.killing_rank, 3);
  EXPECT_EQ(f.killing_signature, (Inertia{2, 1, 1}));
  auto K = oracle::killing(tensor(L));
  RatMatrix Kl = killing_form(L);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(Kl(i, j), K[i][j]);
  EXPECT_EQ(identify(L), LieType::R_plus_sl2R);
}

TEST(LieAlg, AbelianFingerprint) {
  Fingerprint f = invariants(RealLieAlgebra(4));
  EXPECT_EQ(f.killing_rank, 0);
  EXPECT_EQ(f.radical_dim, 4);
  EXPECT_EQ(f.dim_center, 4);
  EXPECT_TRUE(f.unimodular);
}

TEST(LieAlg, FifthFamilyHalfIsSolvable) {
  RealLieAlgebra L = realified(at(5, Rational(1, 2), 0));
  Fingerprint f = invariants(L);
  EXPECT_EQ(f.radical_dim, 4);
  EXPECT_TRUE(f.unimodular);
  EXPECT_EQ(f, invariants(c3_minus_quarter_algebra()));
}

TEST(LieAlg, ThirdFamilyIdentification) {
  EXPECT_EQ(identify(realified(at(3, -1, 0))), LieType::R_plus_sl2R);
  EXPECT_EQ(identify(realified(at(3, 1, 0))), LieType::R_plus_su2);
  EXPECT_EQ(identify(realified(at(3, Rational(-1, 4), 1))), LieType::SOLVABLE_C3_MINUS_QUARTER_PATTERN);
}

TEST(LieAlg, InvariantsRejectNonJacobi) {
  RealLieAlgebra L = sl2_plus_r();
  L.at(0, 1, 3) += 1;
  L.at(1, 0, 3) -= 1;
  L.at(0, 3, 0) += 1;
  L.at(3, 0, 0) -= 1;
  if (!jacobi_check(L)) EXPECT_THROW(invariants(L), usage_error);
}

TEST(LieAlg, RealifyRejectsNonClosedModel) {
  CoframeModel m = from_constants(family(at(1, 0, 0)));
  m.dgen[W1BAR] = m.dgen[W1BAR] + Form::monomial(0b0011, Scalar(Gauss(0, 1), m.table));
  EXPECT_THROW(realify(m), internal_error);
}

TEST(LieAlg, NamedAlgebrasFixture) {
  std::ifstream in(std::string(ENGEL_FIXTURE_DIR) + "/named_algebras.json");
  ASSERT_TRUE(in.good());
  auto j = nlohmann::json::parse(in);
  EXPECT_EQ(Fingerprint::from_json(j.at("SOLVABLE_C3_MINUS_QUARTER_PATTERN")), invariants(c3_minus_quarter_algebra()));
  EXPECT_EQ(Fingerprint::from_json(j.at("SOLVABLE_G4_10")), invariants(g4_10_algebra()));
  EXPECT_EQ(Fingerprint::from_json(j.at("SOLVABLE_C1_PATTERN")), invariants(c1_pattern_algebra()));
}

// ---------------------------------------------------------------------------
// Properties

TEST(LieAlgProperty, IdentifyInvariantUnderBasisChange) {
  Rng rng(501);
  for (int i = 0; i < kCases; ++i) {
    RealLieAlgebra L = realified(rand_family_point(rng, 1 + i % 6));
    RealLieAlgebra M = rand_invertible_change(rng, L);
    ASSERT_TRUE(jacobi_check(M));
    ASSERT_EQ(invariants(M), invariants(L));
    ASSERT_EQ(identify(M), identify(L));
  }
}

TEST(LieAlgProperty, KillingAndTracesMatchOracle) {
  Rng rng(502);
  for (int i = 0; i < kCases; ++i) {
    RealLieAlgebra L = rand_invertible_change(rng, realified(rand_family_point(rng, 1 + i % 6)));
    auto c = tensor(L);
    auto K = oracle::killing(c);
    RatMatrix Kl = killing_form(L);
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) ASSERT_EQ(Kl(a, b), K[a][b]);
    auto s = oracle::eigen_signs(K);
    Inertia in = inertia(Kl);
    ASSERT_EQ(in.positive, s.pos);
    ASSERT_EQ(in.negative, s.neg);
    bool uni = true;
    for (const auto& t : oracle::ad_traces(c)) uni = uni && t == 0;
    ASSERT_EQ(is_unimodular(L), uni);
    ASSERT_EQ(jacobi_check(L), oracle::jacobi(c));
  }
}

TEST(LieAlgProperty, ThirdFamilyRegionGrid) {
  Rng rng(503);
  std::vector<std::pair<Rational, Rational>> pts;
  for (Rational a : {Rational(-2), Rational(-1), Rational(-1, 2), Rational(-1, 4), Rational(-1, 8), Rational(0),
                     Rational(1, 8), Rational(1, 2), Rational(1), Rational(4), Rational(5)})
    for (Rational b : {Rational(-2), Rational(-1), Rational(0), Rational(1, 3), Rational(1), Rational(2)})
      pts.push_back({a, b});
  while (pts.size() < 66 + kCases) pts.push_back({rand_rational(rng, 9, 4), rand_rational(rng, 5, 3)});
  int mismatches = 0;
  for (const auto& [a, b] : pts) {
    auto expect = c3_region_type(a, b);
    if (!expect) continue;
    LieType got = identify(realified(at(3, a, b)));
    if (got != *expect) {
      ++mismatches;
      ADD_FAILURE() << "C3 at (" << a << ", " << b << "): got " << to_string(got) << ", table says "
                    << to_string(*expect);
    }
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(LieAlgProperty, JacobiAgreesWithResidues) {
  Rng rng(504);
  for (int i = 0; i < kCases; ++i) {
    int n = 1 + i % 6;
    FamilyId id = rand_family_point(rng, n);
    EngelConstants c = family(FamilyId{n, {}, {}, {}}).substitute(family_bindings(id), parameter_table());
    if (i % 2) *c.list()[rng() % 6] += Scalar(rand_gauss(rng), parameter_table());
    CoframeModel m = from_constants(c);
    ASSERT_EQ(jacobi_check(realify(m)), d2_residues(m).all_zero()) << id.name() << " corrupted=" << i % 2;
  }
}
