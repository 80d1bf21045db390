#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "opgrowth/dense.hpp"
#include "opgrowth/errors.hpp"
#include "opgrowth/protocol.hpp"
#include "oracle.hpp"

using namespace opgrowth;
using std::numbers::pi;

namespace {

OperatorVector xpm_single(std::size_t n, std::size_t v, bool plus) {
  OperatorVector a(n, Basis::Xpm);
  a.add(PauliKey{1ULL << v, plus ? 0ULL : 1ULL << v}, 1.0);
  return a;
}

// exp(-i theta * sum_{a in A, b in B} Z_a Z_b) as a dense matrix
CMatrix zz_gate(std::size_t n, const std::vector<std::size_t>& A, const std::vector<std::size_t>& B, double theta) {
  OperatorVector g(n);
  for (std::size_t a : A)
    for (std::size_t b : B) g.add(mul(PauliString::single(n, a, Letter::Z), PauliString::single(n, b, Letter::Z)), 1.0);
  return (CMatrix(to_dense(g, all_sites(n))) * Complex(0, -theta)).exp();
}

CMatrix y_gate(std::size_t n, const std::vector<std::size_t>& R) {
  OperatorVector g(n);
  for (std::size_t v : R) g.add(PauliString::single(n, v, Letter::Y), 1.0);
  return (CMatrix(to_dense(g, all_sites(n))) * Complex(0, -pi / 4)).exp();
}

double dist2(const OperatorVector& a, const OperatorVector& b) { return (a - b).norm2(); }

std::vector<std::size_t> source() { return {0}; }

}  // namespace

TEST(ApplyUz, ZeroTauIsIdentity) {
  auto p = manual_plan(3, 1, 2, 0.0);
  auto a = xpm_single(3, 0, true);
  EXPECT_LT(dist2(apply_uz(1, p, a), a), 1e-30);
}

TEST(ApplyUz, QuarterTurn) {
  auto p = manual_plan(2, 1, 1, pi / 2);
  OperatorVector expect(2, Basis::Xpm);
  expect.add(PauliKey{1, 2}, Complex(0, 1));  // i X+_0 Z_1
  EXPECT_LT(dist2(apply_uz(1, p, xpm_single(2, 0, true)), expect), 1e-30);
}

TEST(ApplyUz, BalancedStringUnchanged) {
  auto p = manual_plan(5, 2, 2, 0.7);
  OperatorVector a(5, Basis::Xpm);
  a.add(PauliKey{0b111, 0b100}, 0.5);  // X+_0 X+_1 X-_2: j = 0 on R_1
  EXPECT_LT(dist2(apply_uz(2, p, a), a), 1e-30);
}

TEST(ApplyUz, DenseOracle) {
  std::mt19937_64 rng(11);
  auto p = manual_plan(5, 2, 2, 0.37);
  const std::size_t n = 5;
  // l = 1: X+_0 against dense U^dagger X+_0 U
  {
    CMatrix U = zz_gate(n, source(), p.regions[0], p.tau / 2);
    auto a = from_xpm(xpm_single(n, 0, true));
    CMatrix d = U.adjoint() * to_dense(a, all_sites(n)) * U;
    EXPECT_LT(dist2(apply_uz(1, p, a), from_dense(d, n)), 1e-26);
  }
  // l = 2: random X+- content on R_1, anything on the source
  std::uniform_int_distribution<int> pick(0, 3);
  std::normal_distribution<double> n01;
  OperatorVector a(n, Basis::Xpm);
  for (int t = 0; t < 12; ++t) {
    PauliKey k{0, 0};
    const int src = pick(rng);
    k.x |= (src & 1);
    k.z |= (src >> 1);
    for (std::size_t v : p.regions[0]) {
      const int l = pick(rng) % 3;  // I, X+, X-
      if (l == 1) k.x |= 1ULL << v;
      if (l == 2) k.x |= 1ULL << v, k.z |= 1ULL << v;
    }
    a.add(k, Complex(n01(rng), n01(rng)));
  }
  CMatrix U = zz_gate(n, p.regions[0], p.regions[1], p.tau / 2);
  CMatrix d = U.adjoint() * to_dense(from_xpm(a), all_sites(n)) * U;
  EXPECT_LT(dist2(from_xpm(apply_uz(2, p, a)), from_dense(d, n)), 1e-24);
  EXPECT_NEAR(apply_uz(2, p, a).norm2(), a.norm2(), 1e-12);
}

TEST(ApplyUz, StateErrors) {
  auto p = manual_plan(5, 2, 2, 0.3);
  OperatorVector zprev(5, Basis::Xpm);
  zprev.add(PauliKey{0, 0b10}, 1.0);  // Z on R_1
  EXPECT_THROW(apply_uz(2, p, zprev), ProtocolStateError);
  OperatorVector busy(5, Basis::Xpm);
  busy.add(PauliKey{0b1, 0b1000}, 1.0);  // Z on R_2
  EXPECT_THROW(apply_uz(2, p, busy), ProtocolStateError);
  EXPECT_THROW(apply_uz(3, p, busy), ArgumentError);
}

TEST(ApplyUy, SingleQubitImages) {
  auto p = manual_plan(2, 1, 1, 0.3);
  auto img = [&](Letter l) { return apply_uy(1, p, OperatorVector::single_site(2, 1, l)); };
  EXPECT_LT(dist2(img(Letter::Z), OperatorVector::single_site(2, 1, Letter::X)), 1e-30);
  EXPECT_LT(dist2(img(Letter::Y), OperatorVector::single_site(2, 1, Letter::Y)), 1e-30);
  EXPECT_LT(dist2(img(Letter::X), OperatorVector::single_site(2, 1, Letter::Z, -1.0)), 1e-30);
  // dense 2x2 conjugation
  CMatrix U = y_gate(2, {1});
  for (Letter l : {Letter::X, Letter::Y, Letter::Z}) {
    auto a = OperatorVector::single_site(2, 1, l);
    EXPECT_LT(dist2(img(l), from_dense(U * to_dense(a, all_sites(2)) * U.adjoint(), 2)), 1e-28);
  }
}

TEST(ApplyUy, DenseOracleRandom) {
  std::mt19937_64 rng(2);
  auto p = manual_plan(5, 2, 2, 0.3);
  std::uniform_int_distribution<std::uint64_t> bits(0, 31);
  std::normal_distribution<double> n01;
  OperatorVector a(5);
  for (int t = 0; t < 20; ++t) a.add(PauliKey{bits(rng), bits(rng)}, Complex(n01(rng), n01(rng)));
  CMatrix U = y_gate(5, p.regions[1]);
  auto expect = from_dense(U * to_dense(a, all_sites(5)) * U.adjoint(), 5);
  EXPECT_LT(dist2(apply_uy(2, p, a), expect), 1e-24);
  EXPECT_LT(dist2(from_xpm(apply_uy(2, p, to_xpm(a))), expect), 1e-24);
}

TEST(StepOneLaw, BruteForceBinomial) {
  // (s - 1) ~ Binomial(M, sin^2 tau) from dense conjugation
  for (std::size_t M = 1; M <= 4; ++M) {
    const double tau = 0.61;
    const std::size_t n = M + 1;
    auto p = manual_plan(n, 1, M, tau);
    CMatrix U = zz_gate(n, source(), p.regions[0], tau / 2);
    auto a = from_xpm(xpm_single(n, 0, true));
    auto out = from_dense(U.adjoint() * to_dense(a, all_sites(n)) * U, n);
    auto dist = size_distribution(out);
    double mean = 0;
    for (std::size_t s = 1; s <= M + 1; ++s) {
      EXPECT_NEAR(dist.probs[s], binomial_pmf(M, s - 1, std::pow(std::sin(tau), 2)), 1e-13);
      mean += s * dist.probs[s];
    }
    EXPECT_NEAR(mean, 1 + M * std::pow(std::sin(tau), 2), 1e-12);
  }
}

TEST(Exact, Examples) {
  auto full = manual_plan(3, 1, 2, pi / 2);
  EXPECT_NEAR(run_protocol_exact(full).avg_size, 3.0, 1e-12);
  auto still = manual_plan(7, 2, 3, 0.0);
  auto r = run_protocol_exact(still);
  EXPECT_NEAR(r.avg_size, 1.0, 1e-14);
  EXPECT_EQ(r.final.term_count(), 1u);
  EXPECT_THROW(run_protocol_exact(manual_plan(13, 2, 6, 0.3)), CapacityError);
}

TEST(Exact, ConfinementAndNorm) {
  auto p = manual_plan(10, 3, 3, 0.45);
  OperatorVector A(10, Basis::Xpm);
  A.add(PauliKey{1, 0}, 1.0);
  std::uint64_t allowed = 1;
  for (int l = 1; l <= 3; ++l) {
    A = apply_uz(l, p, A);
    EXPECT_NEAR(A.norm2(), 1.0, 1e-12);
    A = apply_uy(l, p, A);
    EXPECT_NEAR(A.norm2(), 1.0, 1e-12);
    for (std::size_t v : p.regions[l - 1]) allowed |= 1ULL << v;
    for (const auto& [k, c] : A.terms()) {
      EXPECT_EQ((k.x | k.z) & ~allowed, 0u);
      EXPECT_EQ(~k.x & k.z, 0u);  // no Z anywhere: only I, X+, X-
    }
  }
}

TEST(Exact, MatchesPredictor) {
  auto p = manual_plan(7, 2, 3, pi / 4);
  auto ex = run_protocol_exact(p);
  auto pr = markov_predict(p);
  ASSERT_EQ(ex.steps.size(), 2u);
  ASSERT_EQ(pr.size(), 2u);
  for (int l = 0; l < 2; ++l) {
    for (const auto& [sj, w] : ex.steps[l].joint) {
      auto it = pr[l].joint.find(sj);
      const double q = it == pr[l].joint.end() ? 0.0 : it->second;
      EXPECT_NEAR(q, w, 1e-10) << l << " " << sj.first << " " << sj.second;
    }
    for (const auto& [sj, w] : pr[l].joint) {
      if (!ex.steps[l].joint.count(sj)) EXPECT_LT(w, 1e-10);
    }
    EXPECT_NEAR(pr[l].cumulative_size_mean, ex.steps[l].cumulative_size_mean, 1e-10);
  }
  EXPECT_NEAR(pr[0].cumulative_size_mean, 1 + 3 * 0.5, 1e-12);
  EXPECT_NEAR(pr[1].cumulative_size_mean, ex.avg_size, 1e-10);
}

TEST(Exact, MatchesPredictorSweep) {
  for (double tau : {0.2, 0.9, 1.4})
    for (auto [n, g, M] : {std::tuple{9, 2, 4}, std::tuple{10, 3, 3}}) {
      auto p = manual_plan(n, g, M, tau);
      auto ex = run_protocol_exact(p);
      auto pr = markov_predict(p);
      for (int l = 0; l < g; ++l) EXPECT_NEAR(pr[l].cumulative_size_mean, ex.steps[l].cumulative_size_mean, 1e-10);
    }
}

TEST(Predictor, StepOneMeanAndImbalance) {
  for (double tau : {0.1, 0.5, 1.2}) {
    auto p = manual_plan(101, 1, 100, tau);
    EXPECT_NEAR(markov_predict(p)[0].cumulative_size_mean, 1 + 100 * std::pow(std::sin(tau), 2), 1e-9);
  }
  auto p = manual_plan(3, 1, 2, pi / 2);  // s = 2 with certainty
  auto d = markov_predict(p)[0];
  EXPECT_NEAR(d.joint.at({2, -2}), 0.25, 1e-15);
  EXPECT_NEAR(d.joint.at({2, 0}), 0.5, 1e-15);
  EXPECT_NEAR(d.joint.at({2, 2}), 0.25, 1e-15);
  for (const auto& [sj, w] : d.joint) {
    EXPECT_EQ((sj.first + sj.second) % 2, 0);
    EXPECT_LE(std::abs(sj.second), sj.first);
  }
}

TEST(Predictor, NearZeroMass) {
  // tau = pi/2: j = 2 puts sin^2(j tau) exactly on a zero
  auto p = manual_plan(5, 2, 2, pi / 2);
  auto d = markov_predict(p);
  EXPECT_EQ(d[0].near_zero_mass, 0.0);
  EXPECT_NEAR(d[1].near_zero_mass, 0.5, 1e-12);  // |j1| = 2
}

TEST(Planner, Examples) {
  PlanOverrides two;
  two.g = 2;
  auto p = plan_protocol(10000, 1.0, 0.25, two);
  EXPECT_EQ(p.g, 2);
  EXPECT_NEAR(p.tau, p.c6 * std::pow(10000.0, -0.25), 1e-15);
  EXPECT_NEAR(p.p0, std::pow(2.0, -0.25), 1e-15);
  EXPECT_EQ(default_g(0.3), 3);
  EXPECT_EQ(default_g(0.25), 3);

  auto q = plan_protocol(1000, 1.0, 0.25);
  EXPECT_EQ(q.g, 3);
  EXPECT_EQ(q.M, 333u);
  EXPECT_TRUE(s1star_check(q).holds());
  // regions are disjoint, exclude the source and fit inside N
  std::vector<int> seen(q.N, 0);
  for (const auto& r : q.regions) {
    EXPECT_EQ(r.size(), q.M);
    for (std::size_t v : r) ++seen[v];
  }
  EXPECT_EQ(seen[0], 0);
  for (int c : seen) EXPECT_LE(c, 1);
  EXPECT_NEAR(q.t_Z, q.c3 * 1000.0 * q.tau, 1e-9);
}

TEST(Planner, TailConditionHolds) {
  PlanOverrides two;
  two.g = 2;
  auto p = plan_protocol(5000, 1.0, 0.25, two);
  const std::size_t s1 = s_star_sequence(p).front();
  for (std::size_t s = s1; s <= p.M; s += 7) {
    double tail = 0;
    for (std::size_t k = 0; k <= s; ++k) {
      const double j = 2.0 * k - s;
      if (std::abs(j) > p.c4 * std::sqrt(double(s))) tail += std::exp(log_choose(s, k) - s * std::log(2.0));
    }
    EXPECT_GT(tail, p.p0) << s;
  }
  // window condition for step 1
  double w = 0;
  for (std::size_t r = s1; r <= std::min<std::size_t>(p.M, std::ceil(p.c2 * s1)); ++r)
    w += binomial_pmf(p.M, r, std::pow(std::sin(p.tau), 2));
  EXPECT_GT(w, p.p0);
}

TEST(Planner, Infeasible) {
  try {
    plan_protocol(50, 1.0, 0.25);
    FAIL();
  } catch (const PlanningError& e) {
    EXPECT_GT(e.minimum_n(), 50u);
    EXPECT_NO_THROW(plan_protocol(e.minimum_n(), 1.0, 0.25));
  }
  PlanOverrides one;
  one.g = 1;
  EXPECT_THROW(plan_protocol(10000, 1.0, 0.25, one), PlanningError);  // g < 1/(2 eps)
  EXPECT_THROW(plan_protocol(10000, 0.5, 0.25), ArgumentError);
}

TEST(Ladder, Examples) {
  auto p = manual_plan(21, 2, 10, pi / 2);
  p.c1 = 0.9;
  EXPECT_EQ(s_star_sequence(p).front(), 9u);
  PlanOverrides two;
  two.g = 2;
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    auto q = plan_protocol(n, 1.0, 0.25, two);
    auto s = s_star_sequence(q);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_LT(s[0], s[1]);
    EXPECT_GT(double(s[1]), 4 * q.c4 * q.c4 / (pi * pi) * double(s[0]) * double(s[0]));
    EXPECT_GE(double(s[1]), q.c5 * q.M);
    // the predictor's final mean clears s*_g / 2
    EXPECT_GE(markov_predict(q).back().cumulative_size_mean, s[1] / 2.0);
  }
}

TEST(Runtime, Examples) {
  auto p = manual_plan(1001, 2, 500, 0.0);
  EXPECT_DOUBLE_EQ(protocol_runtime(p), 2 * p.t_X);
  auto q = manual_plan(1001, 2, 500, 0.2);
  auto q4 = manual_plan(2001, 4, 500, 0.2);
  q4.N = q.N;
  EXPECT_NEAR(protocol_runtime(q4), 2 * protocol_runtime(q), 1e-9);
  PlanOverrides two;
  two.g = 2;
  auto fam = plan_protocol_family({1000, 1000000}, 1.0, 0.25, two);
  EXPECT_EQ(fam[0].c6, fam[1].c6);
  const double slope = std::log(protocol_runtime(fam[1]) / protocol_runtime(fam[0])) / std::log(1000.0);
  EXPECT_NEAR(slope, 0.75, 0.01);
}

TEST(ProtocolCsv, Header) {
  auto p = manual_plan(7, 2, 3, pi / 4);
  std::ostringstream os;
  write_protocol_csv(os, p, markov_predict(p));
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "step,mean_size,s_star,retained_mass,runtime");
}
