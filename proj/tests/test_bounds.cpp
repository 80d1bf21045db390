#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "opgrowth/bounds.hpp"
#include "opgrowth/errors.hpp"

using namespace opgrowth;

namespace {

// Independent oracle: smallest D0 by direct scan, inner sup on a fine grid.
int grid_D0(double a, double Mprime, double mu, int d) {
  for (int D0 = 0; D0 < 200; ++D0) {
    double best = 0.0;
    for (int i = 0; i <= 200000; ++i) {
      const double t = 1e-5 * i * (20.0 / mu);
      best = std::max(best, Mprime / (2 * mu) * std::pow(2 * mu * t + D0, d) * std::exp(-mu * t - D0 / 2.0));
    }
    if (std::sqrt(a / 8) > std::exp(-D0 / 2.0) * best) return D0;
  }
  return -1;
}

HamiltonianSpec chain_with_all_to_all(std::size_t n, double alpha, std::uint64_t seed) {
  RandomSpecOptions opt;
  opt.alpha = alpha;
  opt.duration = 1.0;
  return random_spec(build_lattice(1, n, false), opt, seed, 0);
}

}  // namespace

TEST(Mu, Examples) {
  EXPECT_NEAR(mu_constant(std::exp(2.0), 2), 151.0030, 5e-5);
  EXPECT_DOUBLE_EQ(mu_constant(1.0, 1), 18.0);
  EXPECT_NEAR(mu_constant(std::exp(2.0), 4), 302.0060, 1e-4);
  EXPECT_THROW(mu_constant(0.0, 1), ArgumentError);
}

TEST(Envelope, Examples) {
  EXPECT_NEAR(lemma1_envelope(151.0, 3, 0.0), 0.0498, 1e-4);
  EXPECT_GE(lemma1_envelope(151.0, 0, 0.2), 1.0);
  EXPECT_DOUBLE_EQ(lemma1_envelope(151.0, 0, 0.0), 1.0);
}

TEST(WeightedFunctional, Examples) {
  auto g = build_lattice(1, 5, false);
  const double b = std::exp(2.0);
  EXPECT_DOUBLE_EQ(weighted_functional(OperatorVector::single_site(5, 1, Letter::X), 1, b, g), 1.0);
  auto xx = OperatorVector::from_string(PauliString::parse("IXIXI"));
  EXPECT_NEAR(weighted_functional(xx, 1, b, g), 1.0 + std::exp(4.0), 1e-12);
  EXPECT_THROW(weighted_functional(xx * 2.0, 1, b, g), ArgumentError);
}

TEST(WeightedFunctional, MarkovStep) {
  auto g = build_lattice(2, 4, true);
  const double b = std::exp(2.0);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint64_t> bits(0, (1ULL << 16) - 1);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 50; ++trial) {
    OperatorVector a(16);
    for (int k = 0; k < 6; ++k) a.add(PauliKey{bits(rng), bits(rng)}, Complex(n01(rng), n01(rng)));
    a *= 1.0 / std::sqrt(a.norm2());
    const double F = weighted_functional(a, 0, b, g);
    for (int D = 0; D <= g.diameter(); ++D) {
      const double q = project_sites(a, shell(g, 0, D)).norm2();
      EXPECT_LE(q * std::pow(b, D), F * (1 + 1e-12));
    }
  }
}

TEST(ChooseD0, MatchesGridOracle) {
  BoundParams p;
  p.a = 0.5;
  p.d = 1;
  p.mu = 151.0;
  p.Mprime = 9.0;
  EXPECT_EQ(choose_D0(p), grid_D0(0.5, 9.0, 151.0, 1));
  for (int d : {1, 2, 3}) {
    for (double M : {9.0, 108.0, 5000.0, 1e6}) {
      p.d = d;
      p.Mprime = M;
      EXPECT_EQ(choose_D0(p), grid_D0(0.5, M, 151.0, d)) << d << " " << M;
    }
  }
}

TEST(ChooseD0, LimitsAndMonotone) {
  BoundParams p;
  p.mu = 151.0;
  p.Mprime = 1e-12;
  EXPECT_LE(choose_D0(p), 1);
  int prev = 0;
  for (double M = 1.0; M < 1e9; M *= 2) {
    p.Mprime = M;
    const int D0 = choose_D0(p);
    EXPECT_GE(D0, prev);
    prev = D0;
  }
}

TEST(GrowthBound, Exponents) {
  BoundParams p;
  p.d = 1;
  p.mu = 151.0;
  p.c1 = 3.0;
  p.N = 100;
  p.alpha = 1.0;
  auto t = theorem_lower_bound(p);
  EXPECT_NEAR(t.exponent, 1.0 / 3.0, 1e-15);
  EXPECT_FALSE(t.lr_regime);
  p.alpha = 0.5;
  EXPECT_NEAR(theorem_lower_bound(p).exponent, 0.0, 1e-15);
  p.alpha = 2.0;
  t = theorem_lower_bound(p);
  EXPECT_TRUE(t.lr_regime);
  EXPECT_NEAR(t.exponent, 1.0, 1e-15);  // N^{1/d}
}

TEST(GrowthBound, Monotone) {
  BoundParams p;
  p.d = 2;
  p.mu = 151.0;
  p.c1 = 5.0;
  double prev = 0;
  for (double alpha = 0.6; alpha < 1.5; alpha += 0.1) {
    p.alpha = alpha;
    p.N = 1000;
    const double v = theorem_lower_bound(p).value;
    EXPECT_GT(v, prev);
    prev = v;
    p.N = 2000;
    EXPECT_GT(theorem_lower_bound(p).value, v);
  }
  // closed form at d = 2
  p.alpha = 1.0;
  p.N = 1000;
  const double rhs = std::sqrt(p.a / 8) * std::sqrt(1000.0) / (6.0 * std::sqrt(5.0 * std::pow(2 * 151.0, 2)));
  EXPECT_NEAR(theorem_lower_bound(p).value, std::sqrt(rhs), 1e-15);
}

TEST(DeriveParams, Chain) {
  auto p = derive_params(build_lattice(1, 10, false), 1, 0.5, 1.0);
  EXPECT_EQ(p.k, 2);
  EXPECT_NEAR(p.mu, 9 * (1 + std::exp(2.0)) * 2, 1e-12);
  EXPECT_DOUBLE_EQ(p.c2, 2.0);
  EXPECT_DOUBLE_EQ(p.Mprime, 18 * 2 * 2.0);
  EXPECT_EQ(p.D0, choose_D0(p));
}

TEST(AllToAllBound, Examples) {
  EXPECT_NEAR(corollary3_lower_bound(9, 1.0, 0.5), std::sqrt(0.5) / 6 * 3, 1e-15);
  EXPECT_NEAR(corollary3_lower_bound(9, 1.0, 0.5), 0.3536, 1e-4);
  EXPECT_DOUBLE_EQ(corollary3_lower_bound(17, 0.5, 0.5), std::sqrt(0.5) / 6);
  // finite-N form tends to the large-N one from below
  double prev = 0;
  for (std::size_t n : {6u, 10u, 100u, 10000u, 1000000u}) {
    const double r = corollary3_rigorous_bound(n, 1.0, 0.5) / corollary3_lower_bound(n, 1.0, 0.5);
    EXPECT_LT(r, 1.0);
    EXPECT_GT(r, prev);
    prev = r;
  }
  EXPECT_GT(prev, 0.999);
}

TEST(AllToAllBound, SimulatorExceedsBound) {
  for (std::size_t n : {6u, 8u, 10u}) {
    HamiltonianSpec spec{empty_graph(n), 1.0, {uniform_J_segment(n, zz_coupling(), 20.0)}};
    add_uniform_field(spec.segments[0], n, Field{1.3, 0.0, 0.7});
    ScramblingOptions opt;
    opt.t_max = 20.0;
    auto r = scrambling_time(spec, opt);
    ASSERT_TRUE(r.reached) << n;
    EXPECT_GE(r.t_s_lower, corollary3_lower_bound(n, 1.0, 0.5)) << n;
  }
}

TEST(Duhamel, FieldsOnly) {
  HamiltonianSpec spec{build_lattice(1, 5, false), 1.0, {Segment{}}};
  add_random_fields(spec.segments[0], 5, 1.0, 4, 0);
  auto r = duhamel_split_check(spec, 2, 1, 0.7);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_NEAR(r.term1 + r.term2, 0.0, 1e-14);
  EXPECT_TRUE(r.pass);
}

TEST(Duhamel, BeyondDiameter) {
  auto spec = chain_with_all_to_all(5, 1.0, 2);
  auto r = duhamel_split_check(spec, 0, 4, 0.5);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_GE(r.term1, 0.0);
  EXPECT_GE(r.term2, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(Duhamel, ChainPlusAllToAll) {
  auto spec = chain_with_all_to_all(8, 1.0, 5);
  auto r = duhamel_split_check(spec, 0, 2, 0.5);
  EXPECT_TRUE(r.pass) << r.lhs << " " << r.term1 << " " << r.term2;
  EXPECT_GT(r.lhs, 0.0);
  EXPECT_LE(r.quad_error, 1e-8);
}

TEST(Duhamel, SegmentedSchedule) {
  RandomSpecOptions opt;
  opt.segments = 3;
  opt.duration = 0.3;
  auto spec = random_spec(build_lattice(1, 6, false), opt, 9, 0);
  for (int D : {1, 2}) {
    auto r = duhamel_split_check(spec, 1, D, 0.8);
    EXPECT_TRUE(r.pass) << D;
  }
}

TEST(Duhamel, Preconditions) {
  auto spec = chain_with_all_to_all(4, 1.0, 1);
  EXPECT_THROW(duhamel_split_check(spec, 0, 0, 0.1), ArgumentError);
  EXPECT_THROW(duhamel_split_check(spec, 9, 1, 0.1), ArgumentError);
}

TEST(LightCone, ChainKOnly) {
  auto g = build_lattice(1, 10, false);
  Segment seg = random_spec(g, RandomSpecOptions{}, 3, 1).segments[0];
  seg.J.clear();
  seg.h.clear();
  HamiltonianSpec spec{g, 1.0, {seg}};
  for (int D : {1, 2, 4}) {
    auto r = lemma1_check(spec, 0, D, 0.01);
    EXPECT_TRUE(r.pass) << D;
    EXPECT_GT(r.lhs, 0.0);
  }
  auto r0 = lemma1_check(spec, 4, 3, 0.0);
  EXPECT_EQ(r0.lhs, 0.0);
  EXPECT_NEAR(r0.functional, 1.0, 1e-14);
}

TEST(CertCsv, Format) {
  std::ostringstream os;
  write_cert_header(os);
  write_cert_row(os, {"lemma1", 10, 1.0, 3, 0.05, 0.25, 0.5, true});
  EXPECT_EQ(os.str(), "check_name,N,alpha,D,t,lhs,rhs,slack,pass\nlemma1,10,1,3,0.050000000000000003,0.25,0.5,0.25,1\n");
}
