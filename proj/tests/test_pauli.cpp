#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "opgrowth/errors.hpp"
#include "opgrowth/pauli.hpp"
#include "oracle.hpp"

using namespace opgrowth;

namespace {

OperatorVector ov(std::string_view s, Complex c = 1.0) { return OperatorVector::from_string(PauliString::parse(s), c); }

void expect_close(const OperatorVector& a, const OperatorVector& b, double tol = 1e-12) {
  EXPECT_LT((a - b).norm2(), tol * tol) << "operators differ";
}

}  // namespace

TEST(PauliString, ParseAndLetters) {
  auto p = PauliString::parse("XYZI");
  EXPECT_EQ(p.letter(0), Letter::X);
  EXPECT_EQ(p.letter(1), Letter::Y);
  EXPECT_EQ(p.letter(2), Letter::Z);
  EXPECT_EQ(p.letter(3), Letter::I);
  EXPECT_EQ(p.size(), 3u);
  EXPECT_EQ(p.support(), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(p.str(), "XYZI");
  EXPECT_EQ(PauliString::parse("-iZ").phase_power(), 3);
}

TEST(Mul, SingleSite) {
  auto r = mul(PauliString::parse("X"), PauliString::parse("Y"));
  EXPECT_EQ(r, PauliString::parse("iZ"));
  auto id = mul(PauliString::parse("X"), PauliString::parse("X"));
  EXPECT_EQ(id.x_mask(), 0u);
  EXPECT_EQ(id.z_mask(), 0u);
  EXPECT_EQ(id.phase_power(), 0);
}

TEST(Mul, TwoSiteAgainstDense) {
  auto p = PauliString::parse("XZ"), q = PauliString::parse("YZ");
  auto r = mul(p, q);
  EXPECT_EQ(r, PauliString::parse("iZI"));
  EXPECT_LT((oracle::string_matrix(r) - oracle::string_matrix(p) * oracle::string_matrix(q)).norm(), 1e-12);
}

TEST(Mul, DimensionMismatch) {
  EXPECT_THROW(mul(PauliString::parse("X"), PauliString::parse("XX")), DimensionError);
}

TEST(Mul, ExhaustiveAgainstDense) {
  for (std::size_t n = 1; n <= 3; ++n) {
    const std::uint64_t top = 1ULL << n;
    for (std::uint64_t a = 0; a < top * top; ++a) {
      for (std::uint64_t b = 0; b < top * top; ++b) {
        PauliString p(n, a % top, a / top), q(n, b % top, b / top);
        auto r = mul(p, q);
        ASSERT_LT((oracle::string_matrix(r) - oracle::string_matrix(p) * oracle::string_matrix(q)).norm(), 1e-12);
        ASSERT_EQ(p.commutes_with(q), !anticommute(p.key(), q.key()));
      }
    }
  }
}

TEST(Mul, Associative) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint64_t> m(0, 31);
  for (int k = 0; k < 200; ++k) {
    PauliString a(5, m(rng), m(rng), 1), b(5, m(rng), m(rng)), c(5, m(rng), m(rng), 2);
    ASSERT_EQ(mul(mul(a, b), c), mul(a, mul(b, c)));
  }
}

TEST(Commutator, Examples) {
  expect_close(commutator(ov("X"), ov("Y")), ov("Z", Complex(0, 2)));
  EXPECT_TRUE(commutator(ov("ZZI"), ov("IIX")).empty());
  expect_close(commutator(ov("ZZ"), ov("XI")), ov("YZ", Complex(0, 2)));
}

TEST(Commutator, RandomAgainstDense) {
  std::mt19937_64 rng(11);
  for (std::size_t n = 1; n <= 3; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      auto a = oracle::random_operator(n, 6, rng), b = oracle::random_operator(n, 6, rng);
      auto ma = oracle::op_matrix(a), mb = oracle::op_matrix(b);
      EXPECT_LT((oracle::op_matrix(commutator(a, b)) - (ma * mb - mb * ma)).norm(), 1e-12);
      EXPECT_LT((oracle::op_matrix(product(a, b)) - ma * mb).norm(), 1e-12);
      expect_close(commutator(a, b), -1.0 * commutator(b, a));
    }
  }
}

TEST(InnerProduct, Examples) {
  EXPECT_NEAR(std::abs(inner_product(ov("X"), ov("X")) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(inner_product(ov("X"), ov("Y"))), 0.0, 1e-15);
  auto a = ov("XXI") + ov("IIY"), b = ov("XXI") - ov("IIY");
  EXPECT_NEAR(std::abs(inner_product(a, b) / 2.0), 0.0, 1e-15);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = oracle::random_operator(3, 8, rng), y = oracle::random_operator(3, 8, rng);
    auto ref = oracle::normalized_trace_inner(oracle::op_matrix(x), oracle::op_matrix(y));
    EXPECT_LT(std::abs(inner_product(x, y) - ref), 1e-12);
  }
  EXPECT_THROW(inner_product(ov("X"), ov("XX")), DimensionError);
}

TEST(InnerProduct, OrthonormalExhaustive) {
  for (std::size_t n = 1; n <= 3; ++n) {
    const std::uint64_t top = 1ULL << n;
    for (std::uint64_t a = 0; a < top * top; ++a) {
      for (std::uint64_t b = 0; b < top * top; ++b) {
        PauliString p(n, a % top, a / top), q(n, b % top, b / top);
        auto ref = oracle::normalized_trace_inner(oracle::string_matrix(p), oracle::string_matrix(q));
        auto got = inner_product(OperatorVector::from_string(p), OperatorVector::from_string(q));
        ASSERT_LT(std::abs(got - ref), 1e-12);
        ASSERT_LT(std::abs(got - (a == b ? 1.0 : 0.0)), 1e-12);
      }
    }
  }
}

TEST(ProjectSites, Examples) {
  expect_close(project_sites(ov("XZ"), {0}), ov("XZ"));
  EXPECT_TRUE(project_sites(ov("IZ"), {0}).empty());
  EXPECT_TRUE(project_sites(ov("XZ"), {}).empty());
}

TEST(ProjectSites, PartialTraceOracle) {
  // P_i O = O - 1/2 (1_i (x) tr_i O), checked on dense 2-site matrices.
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = oracle::random_operator(2, 10, rng);
    auto m = oracle::op_matrix(a);
    // site 0 is the low tensor factor: m = sum M_{(b1 b0),(c1 c0)}
    oracle::Mat traced = oracle::Mat::Zero(4, 4);
    for (int r1 = 0; r1 < 2; ++r1)
      for (int c1 = 0; c1 < 2; ++c1) {
        Complex t = m(2 * r1 + 0, 2 * c1 + 0) + m(2 * r1 + 1, 2 * c1 + 1);
        for (int b = 0; b < 2; ++b) traced(2 * r1 + b, 2 * c1 + b) = t;
      }
    oracle::Mat expected = m - 0.5 * traced;
    EXPECT_LT((oracle::op_matrix(project_sites(a, {0})) - expected).norm(), 1e-12);
  }
}

TEST(ProjectSites, Properties) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = oracle::random_operator(5, 12, rng);
    std::vector<std::size_t> s{1, 3};
    auto p = project_sites(a, s);
    expect_close(project_sites(p, s), p);
    EXPECT_LE(p.norm2(), a.norm2() * (1 + 1e-14));
    EXPECT_LE(project_sites(a, {1}).norm2(), p.norm2() * (1 + 1e-14));
    // complement: strings with identity on all of S
    OperatorVector rest(5);
    for (const auto& [k, c] : a.terms())
      if (((k.x | k.z) & site_mask(s, 5)) == 0) rest.add(k, c);
    expect_close(p + rest, a);
  }
}

TEST(ProjectSize, Examples) {
  expect_close(project_size(ov("X"), 1), ov("X"));
  EXPECT_TRUE(project_size(ov("X"), 0).empty());
  const double r = 1 / std::sqrt(2.0);
  auto a = ov("XXI", r) + ov("IIY", r);
  expect_close(project_size(a, 2), ov("XXI", r));
  EXPECT_THROW(project_size(ov("XX"), 3), ArgumentError);
  EXPECT_TRUE(project_size(ov("XX"), 2).term_count() == 1);
}

TEST(ProjectSize, Completeness) {
  std::mt19937_64 rng(23);
  auto a = oracle::random_operator(6, 30, rng);
  OperatorVector sum(6);
  for (std::size_t s = 0; s <= 6; ++s) sum += project_size(a, s);
  expect_close(sum, a);
}

TEST(SizeDistribution, Examples) {
  auto d = size_distribution(ov("XI"));
  EXPECT_DOUBLE_EQ(d.probs[1], 1.0);
  EXPECT_DOUBLE_EQ(d.probs[0], 0.0);
  const double r = 1 / std::sqrt(2.0);
  auto e = size_distribution(ov("XXI", r) + ov("IIY", r));
  EXPECT_NEAR(e.probs[1], 0.5, 1e-15);
  EXPECT_NEAR(e.probs[2], 0.5, 1e-15);
  EXPECT_NEAR(e.total(), 1.0, 1e-15);
}

TEST(AverageSize, Examples) {
  EXPECT_DOUBLE_EQ(average_size(ov("X")), 1.0);
  const double r = 1 / std::sqrt(2.0);
  EXPECT_NEAR(average_size(ov("XXI", r) + ov("IIY", r)), 1.5, 1e-15);
  EXPECT_THROW(average_size(ov("XX", 2.0)), ArgumentError);
  EXPECT_NEAR(average_size(ov("XX", 2.0), NormPolicy::NormalizeFirst), 2.0, 1e-15);
  EXPECT_THROW(average_size(OperatorVector(3)), ArgumentError);
}

TEST(AverageSize, MatchesDistributionMean) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 1 + trial % 8;
    auto a = oracle::random_operator(n, 1 + trial % 20, rng);
    oracle::normalize(a);
    double per_site = 0;
    for (std::size_t j = 0; j < n; ++j) per_site += project_sites(a, {j}).norm2();
    EXPECT_NEAR(average_size(a), per_site, 1e-12);
    EXPECT_NEAR(average_size(a), size_distribution(a).mean(), 1e-12);
  }
}

TEST(Xpm, Examples) {
  const double r = 1 / std::sqrt(2.0);
  auto x = to_xpm(ov("X"));
  EXPECT_EQ(x.basis(), Basis::Xpm);
  EXPECT_NEAR(std::abs(x.coeff({1, 0}) - r), 0.0, 1e-15);  // X+
  EXPECT_NEAR(std::abs(x.coeff({1, 1}) - r), 0.0, 1e-15);  // X-
  auto z = to_xpm(ov("Z"));
  EXPECT_EQ(z.term_count(), 1u);
  EXPECT_NEAR(std::abs(z.coeff({0, 1}) - 1.0), 0.0, 1e-15);

  // X+ = (X + iY)/sqrt 2 as a dense matrix has unit normalized norm.
  OperatorVector plus(1, Basis::Xpm);
  plus.add(PauliKey{1, 0}, 1.0);
  auto plus_pauli = from_xpm(plus);
  auto m = oracle::op_matrix(plus_pauli);
  oracle::Mat expected = (oracle::pauli2(Letter::X) + Complex(0, 1) * oracle::pauli2(Letter::Y)) * r;
  EXPECT_LT((m - expected).norm(), 1e-14);
  EXPECT_NEAR(std::abs(oracle::normalized_trace_inner(m, m) - 1.0), 0.0, 1e-14);
}

TEST(Xpm, RoundTripAndInnerProducts) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = oracle::random_operator(4, 10, rng), b = oracle::random_operator(4, 10, rng);
    expect_close(from_xpm(to_xpm(a)), a);
    EXPECT_LT(std::abs(inner_product(to_xpm(a), to_xpm(b)) - inner_product(a, b)), 1e-12);
  }
}
