#include <gtest/gtest.h>

#include <cmath>

#include "opgrowth/dense.hpp"
#include "opgrowth/errors.hpp"
#include "opgrowth/hamiltonian.hpp"
#include "oracle.hpp"

using namespace opgrowth;

namespace {

OperatorVector ov(std::string_view s, Complex c = 1.0) { return OperatorVector::from_string(PauliString::parse(s), c); }

HamiltonianSpec single_pair(std::size_t n, std::size_t i, std::size_t j, double alpha) {
  Segment seg;
  seg.J[{i, j}] = zz_coupling();
  return HamiltonianSpec{empty_graph(n), alpha, {seg}};
}

}  // namespace

TEST(Validate, Examples) {
  auto ok = HamiltonianSpec{empty_graph(4), 1.0, {uniform_J_segment(4, zz_coupling())}};
  EXPECT_FALSE(validate(ok).has_value());

  auto bad = ok;
  bad.segments[0].J[{1, 2}][0][1] = 1.5;
  auto v = validate(bad);
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->kind, Violation::Kind::JBound);
  EXPECT_EQ(v->i, 1u);
  EXPECT_EQ(v->j, 2u);
  EXPECT_EQ(v->A, 0);
  EXPECT_EQ(v->B, 1);
  EXPECT_DOUBLE_EQ(v->value, 1.5);
  EXPECT_THROW(require_valid(bad), ConfigError);

  HamiltonianSpec chain{build_lattice(1, 4, false), 1.0, {Segment{}}};
  chain.segments[0].K[{0, 2}] = zz_coupling();
  auto nonedge = validate(chain);
  ASSERT_TRUE(nonedge.has_value());
  EXPECT_EQ(nonedge->kind, Violation::Kind::KNonEdge);

  auto self = ok;
  self.segments[0].J[{2, 2}] = zz_coupling();
  EXPECT_EQ(validate(self)->kind, Violation::Kind::SelfCoupling);

  auto dur = ok;
  dur.segments[0].duration = 0.0;
  EXPECT_EQ(validate(dur)->kind, Violation::Kind::Duration);

  auto fields = ok;
  fields.segments[0].h.resize(3);
  EXPECT_EQ(validate(fields)->kind, Violation::Kind::FieldShape);
}

TEST(Materialize, Examples) {
  auto h = materialize(single_pair(2, 0, 1, 0.0), 0);
  EXPECT_LT((h - ov("ZZ")).norm2(), 1e-28);
  EXPECT_TRUE(h.hermitian_flag());

  // every ordered pair filled: each unordered pair appears twice
  Segment all;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) all.J[{i, j}] = zz_coupling();
  auto h4 = materialize(HamiltonianSpec{empty_graph(4), 1.0, {all}}, 0);
  // independent dense construction
  oracle::Mat ref = oracle::Mat::Zero(16, 16);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      PauliString p(4, 0, (1ULL << i) | (1ULL << j));
      ref += 0.25 * 2.0 * oracle::string_matrix(p);
    }
  EXPECT_LT((to_dense(h4) - ref).norm(), 1e-12);
}

TEST(Materialize, IsingWithFields) {
  // J_ij Z_i Z_j / N^alpha + h X_i on a 3-site system
  Segment seg = uniform_J_segment(3, zz_coupling(0.7));
  add_uniform_field(seg, 3, Field{0.3, 0.0, 0.0});
  auto h = materialize(HamiltonianSpec{empty_graph(3), 1.0, {seg}}, 0);
  OperatorVector expect = ov("ZZI", 0.7 / 3) + ov("ZIZ", 0.7 / 3) + ov("IZZ", 0.7 / 3) + ov("XII", 0.3) +
                          ov("IXI", 0.3) + ov("IIX", 0.3);
  EXPECT_LT((h - expect).norm2(), 1e-28);
}

TEST(Decompose, RecomposesExactly) {
  auto g = build_lattice(1, 6, false);
  auto spec = random_spec(g, RandomSpecOptions{}, 7, 0);
  auto full = materialize(spec, 0);
  for (std::size_t v = 0; v < 6; ++v) {
    for (int D = 0; D <= 6; ++D) {
      auto r = decompose(spec, 0, v, D);
      EXPECT_LT((r.sum() - full).norm2(), 1e-26);
    }
  }
}

TEST(Decompose, Examples) {
  auto g = build_lattice(1, 6, false);
  auto spec = random_spec(g, RandomSpecOptions{}, 3, 1);
  auto r = decompose(spec, 0, 2, g.diameter());
  EXPECT_TRUE(r.gt_D.empty());
  EXPECT_TRUE(r.NL_gt.empty());
  EXPECT_TRUE(r.D.empty());

  auto r0 = decompose(spec, 0, 2, 0);
  for (const auto& [k, c] : r0.lt_D.terms()) {
    EXPECT_EQ(k.x | k.z, 1ULL << 2);  // fields on v only
  }
  EXPECT_EQ(r0.lt_D.term_count(), 3u);
  for (const auto& [k, c] : r0.D.terms()) {
    EXPECT_TRUE(((k.x | k.z) >> 2) & 1ULL);
    EXPECT_EQ(__builtin_popcountll(k.x | k.z), 2);
  }
  EXPECT_EQ(r0.D.term_count(), 2u * 9u);
}

TEST(Decompose, MatchesSupportClassifier) {
  // N=6 chain, v=0, D=2: classify each K/J/h term by its support against S_D={0,1,2}.
  auto g = build_lattice(1, 6, false);
  auto spec = random_spec(g, RandomSpecOptions{}, 11, 2);
  auto r = decompose(spec, 0, 0, 2);
  const std::uint64_t S = 0b000111;
  const auto& seg = spec.segments[0];
  const double scale = 1.0 / 6.0;
  for (const auto& [e, c] : seg.K) {
    std::uint64_t m = (1ULL << e.first) | (1ULL << e.second);
    const OperatorVector& part = (m & ~S) == 0 ? r.lt_D : (m & S) == 0 ? r.gt_D : r.D;
    PauliString p = mul(PauliString::single(6, e.first, Letter::X), PauliString::single(6, e.second, Letter::Y));
    EXPECT_NEAR(part.coeff(p.key()).real(), c[0][1], 1e-15);
  }
  for (const auto& [e, c] : seg.J) {
    std::uint64_t m = (1ULL << e.first) | (1ULL << e.second);
    const OperatorVector& part = (m & S) != 0 ? r.NL_lt : r.NL_gt;
    PauliString p = mul(PauliString::single(6, e.first, Letter::Z), PauliString::single(6, e.second, Letter::Z));
    // ZZ on a chain edge also receives the K contribution in the full sum, not in the NL part
    EXPECT_NEAR(part.coeff(p.key()).real(), c[2][2] * scale, 1e-15);
  }
  for (std::size_t i = 0; i < 6; ++i) {
    const OperatorVector& part = ((S >> i) & 1) ? r.lt_D : r.gt_D;
    EXPECT_NEAR(part.coeff(PauliString::single(6, i, Letter::Y).key()).real(), seg.h[i][1], 1e-15);
  }
}

TEST(FrobeniusNL, Examples) {
  auto g = build_lattice(1, 7, false);
  Coupling all{};
  for (auto& row : all) row.fill(1.0);
  HamiltonianSpec spec{g, 1.0, {uniform_J_segment(7, all)}};
  for (int D = 0; D <= 3; ++D) {
    const auto S = ball(g, 3, D).size();
    const double pairs = static_cast<double>(S * (S - 1) / 2 + S * (7 - S));
    const double f = frobenius_norm_NL(spec, 0, 3, D);
    EXPECT_NEAR(f * f, 9.0 * pairs / 49.0, 1e-12);
    EXPECT_LE(f * f, 9.0 * S * std::pow(7.0, 1 - 2.0));
  }
  HamiltonianSpec zero{g, 1.0, {Segment{}}};
  EXPECT_DOUBLE_EQ(frobenius_norm_NL(zero, 0, 0, 1), 0.0);
  EXPECT_NEAR(frobenius_norm_NL(single_pair(5, 1, 2, 0.0), 0, 1, 0), 1.0, 1e-15);
}

TEST(FrobeniusNL, MatchesDense) {
  auto g = build_lattice(1, 6, false);
  auto spec = random_spec(g, RandomSpecOptions{}, 5, 0);
  for (int D = 0; D <= 2; ++D) {
    auto m = to_dense(decompose(spec, 0, 1, D).NL_lt);
    EXPECT_NEAR(frobenius_norm_NL(spec, 0, 1, D), m.norm() / 8.0, 1e-10);
  }
}

TEST(OpnormHD, Examples) {
  auto g = build_lattice(1, 6, false);
  HamiltonianSpec none{g, 1.0, {uniform_J_segment(6, zz_coupling())}};
  EXPECT_DOUBLE_EQ(opnorm_bound_HD(none, 0, 0, 2), 0.0);

  Coupling all{};
  for (auto& row : all) row.fill(1.0);
  Segment seg;
  add_uniform_K(seg, g, all);
  HamiltonianSpec chain{g, 1.0, {seg}};
  EXPECT_DOUBLE_EQ(opnorm_bound_HD(chain, 0, 0, 2), 9.0);

  auto torus = build_lattice(2, 4, true);
  Segment ts;
  add_uniform_K(ts, torus, all);
  HamiltonianSpec tspec{torus, 1.0, {ts}};
  const std::size_t v = 5;
  auto S = ball(torus, v, 1);
  std::size_t cut = 0;
  for (auto [a, b] : torus.edges()) {
    const bool ia = std::find(S.begin(), S.end(), a) != S.end(), ib = std::find(S.begin(), S.end(), b) != S.end();
    cut += ia != ib;
  }
  EXPECT_EQ(cut, 12u);
  EXPECT_DOUBLE_EQ(opnorm_bound_HD(tspec, 0, v, 1), 9.0 * static_cast<double>(cut));
}

TEST(Presets, Deterministic) {
  auto a = random_pm1_J_segment(5, 42, 3, {{2, 2}, {0, 0}});
  auto b = random_pm1_J_segment(5, 42, 3, {{2, 2}, {0, 0}});
  EXPECT_EQ(a.J, b.J);
  auto c = random_pm1_J_segment(5, 42, 4, {{2, 2}, {0, 0}});
  EXPECT_NE(a.J, c.J);
  for (const auto& [ij, cpl] : a.J) EXPECT_EQ(std::abs(cpl[2][2]), 1.0);
  auto s = random_symmetric_spec(6, 1.0, 2.0, 1, 0);
  EXPECT_FALSE(validate(s).has_value());
  EXPECT_LE(max_folded_J(s.segments[0]), 1.0);
}
