#include "opgrowth/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "opgrowth/errors.hpp"
#include "opgrowth/rng.hpp"

namespace opgrowth {

double HamiltonianSpec::total_time() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

std::string Violation::message() const {
  static constexpr const char* kAxisName = "XYZ";
  std::ostringstream os;
  os << "segment " << segment << ": ";
  auto channel = [&] {
    if (A >= 0 && B >= 0) os << " channel " << kAxisName[A] << kAxisName[B];
  };
  switch (kind) {
    case Kind::Alpha: os << "alpha must be finite and >= 0, got " << value; break;
    case Kind::Duration: os << "duration must be positive, got " << value; break;
    case Kind::SiteRange: os << "coupling (" << i << "," << j << ") references a site out of range"; break;
    case Kind::SelfCoupling: os << "coupling on diagonal pair (" << i << "," << i << ")"; break;
    case Kind::JBound:
      os << "|J| > 1 at (" << i << "," << j << ")";
      channel();
      os << ", value " << value;
      break;
    case Kind::KBound:
      os << "|K| > 1 at (" << i << "," << j << ")";
      channel();
      os << ", value " << value;
      break;
    case Kind::KNonEdge: os << "K on (" << i << "," << j << ") which is not a graph edge"; break;
    case Kind::FieldShape: os << "field list has " << i << " entries for " << j << " sites"; break;
    case Kind::NonFinite:
      os << "non-finite coefficient at (" << i << "," << j << ")";
      channel();
      break;
  }
  return os.str();
}

std::optional<Violation> validate(const HamiltonianSpec& spec) {
  using K = Violation::Kind;
  const std::size_t n = spec.n_sites();
  if (!std::isfinite(spec.alpha) || spec.alpha < 0) return Violation{K::Alpha, 0, 0, 0, -1, -1, spec.alpha};
  for (std::size_t s = 0; s < spec.segments.size(); ++s) {
    const Segment& seg = spec.segments[s];
    if (!(seg.duration > 0) || !std::isfinite(seg.duration)) return Violation{K::Duration, s, 0, 0, -1, -1, seg.duration};
    auto check_pairs = [&](const std::map<SitePair, Coupling>& m, bool is_K) -> std::optional<Violation> {
      for (const auto& [ij, c] : m) {
        const auto [i, j] = ij;
        if (i >= n || j >= n) return Violation{K::SiteRange, s, i, j};
        if (i == j) return Violation{K::SelfCoupling, s, i, j};
        if (is_K && !spec.graph.has_edge(i, j)) return Violation{K::KNonEdge, s, i, j};
        for (int a = 0; a < 3; ++a) {
          for (int b = 0; b < 3; ++b) {
            const double v = c[a][b];
            if (!std::isfinite(v)) return Violation{K::NonFinite, s, i, j, a, b, v};
            if (std::abs(v) > 1.0) return Violation{is_K ? K::KBound : K::JBound, s, i, j, a, b, v};
          }
        }
      }
      return std::nullopt;
    };
    if (auto v = check_pairs(seg.J, false)) return v;
    if (auto v = check_pairs(seg.K, true)) return v;
    if (!seg.h.empty() && seg.h.size() != n) return Violation{K::FieldShape, s, seg.h.size(), n};
    for (std::size_t i = 0; i < seg.h.size(); ++i) {
      for (int a = 0; a < 3; ++a) {
        if (!std::isfinite(seg.h[i][a])) return Violation{K::NonFinite, s, i, i, a, -1, seg.h[i][a]};
      }
    }
  }
  return std::nullopt;
}

void require_valid(const HamiltonianSpec& spec) {
  if (spec.segments.empty()) throw ConfigError("Hamiltonian schedule has no segments");
  if (auto v = validate(spec)) throw ConfigError(v->message());
}

namespace {

void check_segment(const HamiltonianSpec& spec, std::size_t segment) {
  if (segment >= spec.segments.size()) throw ArgumentError("segment index out of range");
}

void add_pair(OperatorVector& out, std::size_t n, std::size_t i, std::size_t j, const Coupling& c, double scale) {
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (c[a][b] == 0.0) continue;
      PauliString p = mul(PauliString::single(n, i, kAxes[a]), PauliString::single(n, j, kAxes[b]));
      out.add(p, c[a][b] * scale);
    }
  }
}

void add_field(OperatorVector& out, std::size_t n, std::size_t i, const Field& f) {
  for (int a = 0; a < 3; ++a) {
    if (f[a] != 0.0) out.add(PauliString::single(n, i, kAxes[a]), f[a]);
  }
}

double nl_scale(const HamiltonianSpec& spec) { return std::pow(static_cast<double>(spec.n_sites()), -spec.alpha); }

void finish(OperatorVector& op) {
  op.prune();
  op.set_hermitian_flag(true);
}

}  // namespace

OperatorVector materialize(const HamiltonianSpec& spec, std::size_t segment) {
  check_segment(spec, segment);
  const Segment& seg = spec.segments[segment];
  const std::size_t n = spec.n_sites();
  OperatorVector out(n);
  const double scale = nl_scale(spec);
  for (const auto& [ij, c] : seg.J) add_pair(out, n, ij.first, ij.second, c, scale);
  for (const auto& [ij, c] : seg.K) add_pair(out, n, ij.first, ij.second, c, 1.0);
  for (std::size_t i = 0; i < seg.h.size(); ++i) add_field(out, n, i, seg.h[i]);
  finish(out);
  return out;
}

OperatorVector RegionDecomposition::sum() const { return lt_D + D + gt_D + NL_lt + NL_gt; }

RegionDecomposition decompose(const HamiltonianSpec& spec, std::size_t segment, std::size_t v, int D) {
  check_segment(spec, segment);
  if (D < 0) throw ArgumentError("decompose: D must be >= 0");
  const std::size_t n = spec.n_sites();
  const Segment& seg = spec.segments[segment];
  RegionDecomposition r{OperatorVector(n), OperatorVector(n), OperatorVector(n), OperatorVector(n), OperatorVector(n),
                        ball(spec.graph, v, D)};
  std::vector<bool> in(n, false);
  for (std::size_t x : r.ball) in[x] = true;

  const double scale = nl_scale(spec);
  for (const auto& [ij, c] : seg.J) {
    const bool touches = in[ij.first] || in[ij.second];
    add_pair(touches ? r.NL_lt : r.NL_gt, n, ij.first, ij.second, c, scale);
  }
  for (const auto& [ij, c] : seg.K) {
    const int inside = int(in[ij.first]) + int(in[ij.second]);
    add_pair(inside == 2 ? r.lt_D : inside == 1 ? r.D : r.gt_D, n, ij.first, ij.second, c, 1.0);
  }
  for (std::size_t i = 0; i < seg.h.size(); ++i) add_field(in[i] ? r.lt_D : r.gt_D, n, i, seg.h[i]);
  for (OperatorVector* p : {&r.lt_D, &r.D, &r.gt_D, &r.NL_lt, &r.NL_gt}) finish(*p);
  return r;
}

double frobenius_norm_NL(const HamiltonianSpec& spec, std::size_t segment, std::size_t v, int D) {
  return std::sqrt(decompose(spec, segment, v, D).NL_lt.norm2());
}

double opnorm_bound_HD(const HamiltonianSpec& spec, std::size_t segment, std::size_t v, int D) {
  const RegionDecomposition r = decompose(spec, segment, v, D);
  double total = 0.0;
  for (const auto& [k, c] : r.D.terms()) total += std::abs(c);
  return total;
}

double max_folded_J(const Segment& seg) {
  std::map<SitePair, Coupling> folded;
  for (const auto& [ij, c] : seg.J) {
    const bool swap = ij.first > ij.second;
    Coupling& f = folded[swap ? SitePair{ij.second, ij.first} : ij];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) (swap ? f[b][a] : f[a][b]) += c[a][b];
  }
  double best = 0.0;
  for (const auto& [ij, f] : folded)
    for (const auto& row : f)
      for (double x : row) best = std::max(best, std::abs(x));
  return best;
}

Coupling zz_coupling(double j) {
  Coupling c{};
  c[2][2] = j;
  return c;
}

Segment uniform_J_segment(std::size_t n, const Coupling& c, double duration) {
  Segment seg;
  seg.duration = duration;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) seg.J[{i, j}] = c;
  return seg;
}

Segment random_pm1_J_segment(std::size_t n, std::uint64_t seed, std::uint64_t cell,
                             const std::vector<std::pair<int, int>>& channels, double duration) {
  CounterRng rng(seed, cell);
  Segment seg;
  seg.duration = duration;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      Coupling c{};
      for (auto [a, b] : channels) c[a][b] = rng.sign();
      seg.J[{i, j}] = c;
    }
  }
  return seg;
}

void add_uniform_field(Segment& seg, std::size_t n, const Field& f) {
  seg.h.assign(n, f);
}

void add_random_fields(Segment& seg, std::size_t n, double scale, std::uint64_t seed, std::uint64_t cell) {
  CounterRng rng(seed, cell);
  seg.h.resize(n);
  for (auto& f : seg.h)
    for (double& x : f) x = rng.uniform(-scale, scale);
}

void add_uniform_K(Segment& seg, const InteractionGraph& g, const Coupling& c) {
  for (const auto& e : g.edges()) seg.K[e] = c;
}

HamiltonianSpec random_spec(const InteractionGraph& g, const RandomSpecOptions& opt, std::uint64_t seed,
                            std::uint64_t cell) {
  const std::size_t n = g.n_vertices();
  HamiltonianSpec spec{g, opt.alpha, {}};
  CounterRng rng(seed, cell);
  for (std::size_t s = 0; s < opt.segments; ++s) {
    Segment seg;
    seg.duration = opt.duration;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        Coupling& c = seg.J[{i, j}];
        for (auto& row : c)
          for (double& x : row) x = rng.uniform(-1.0, 1.0);
      }
    }
    if (opt.with_K) {
      for (const auto& e : g.edges()) {
        Coupling& c = seg.K[e];
        for (auto& row : c)
          for (double& x : row) x = rng.uniform(-1.0, 1.0);
      }
    }
    if (opt.with_fields) {
      seg.h.resize(n);
      for (auto& f : seg.h)
        for (double& x : f) x = rng.uniform(-opt.field_scale, opt.field_scale);
    }
    spec.segments.push_back(std::move(seg));
  }
  return spec;
}

HamiltonianSpec random_symmetric_spec(std::size_t n, double alpha, double field_scale, std::uint64_t seed,
                                      std::uint64_t cell) {
  CounterRng rng(seed, cell);
  Coupling c{};
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) c[a][b] = c[b][a] = rng.uniform(-1.0, 1.0);
  Field f{};
  for (double& x : f) x = rng.uniform(-field_scale, field_scale);
  Segment seg = uniform_J_segment(n, c);
  add_uniform_field(seg, n, f);
  return HamiltonianSpec{empty_graph(n), alpha, {std::move(seg)}};
}

HamiltonianSpec without_K(HamiltonianSpec spec) {
  for (auto& seg : spec.segments) seg.K.clear();
  return spec;
}

}  // namespace opgrowth
