#include "opgrowth/protocol.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "opgrowth/csv.hpp"
#include "opgrowth/errors.hpp"

namespace opgrowth {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t region_mask(const std::vector<std::size_t>& r) {
  std::uint64_t m = 0;
  for (std::size_t v : r) m |= 1ULL << v;
  return m;
}

void check_step(int l, const ProtocolPlan& p) {
  if (l < 1 || l > p.g || static_cast<std::size_t>(l) > p.regions.size()) {
    throw ArgumentError("protocol step " + std::to_string(l) + " outside 1.." + std::to_string(p.g));
  }
  if (p.N > 64) throw CapacityError("gate-level protocol on more than 64 sites", p.N, 64);
}

void fill_regions(ProtocolPlan& p) {
  p.regions.assign(static_cast<std::size_t>(p.g), {});
  for (int l = 0; l < p.g; ++l)
    for (std::size_t k = 0; k < p.M; ++k) p.regions[static_cast<std::size_t>(l)].push_back(1 + l * p.M + k);
}

void finish_plan(ProtocolPlan& p) {
  p.p0 = std::pow(2.0, -1.0 / (2.0 * p.g));
  p.t_Z = p.c3 * std::pow(static_cast<double>(p.N), p.alpha) * p.tau;
  p.K = p.g * (p.c3 * p.c6 + p.t_X);
}

double sin2(double x) {
  const double s = std::sin(x);
  return s * s;
}

std::size_t ceil_count(double x) { return static_cast<std::size_t>(std::ceil(x * (1.0 - 1e-12))); }

// letters in the X+- encoding
enum : int { kI = 0, kXp = 1, kZ = 2, kXm = 3 };  // x | z << 1
int xpm_letter(PauliKey k, std::size_t v) { return static_cast<int>(((k.x >> v) & 1ULL) | (((k.z >> v) & 1ULL) << 1)); }
PauliKey set_letter(PauliKey k, std::size_t v, int l) {
  const std::uint64_t bit = 1ULL << v;
  k.x = (k.x & ~bit) | ((l & 1) ? bit : 0);
  k.z = (k.z & ~bit) | ((l & 2) ? bit : 0);
  return k;
}

OperatorVector as_xpm(const OperatorVector& a) { return a.basis() == Basis::Xpm ? a : to_xpm(a); }
OperatorVector restore_basis(OperatorVector out, Basis b) { return b == Basis::Xpm ? out : from_xpm(out); }

std::vector<double> log_factorials(std::size_t n) {
  std::vector<double> lf(n + 1);
  for (std::size_t k = 0; k <= n; ++k) lf[k] = std::lgamma(static_cast<double>(k) + 1.0);
  return lf;
}

}  // namespace

double log_choose(double n, double k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

double binomial_pmf(std::size_t n, std::size_t k, double q) {
  if (k > n) return 0.0;
  if (q <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (q >= 1.0) return k == n ? 1.0 : 0.0;
  const double kk = static_cast<double>(k), nn = static_cast<double>(n);
  return std::exp(log_choose(nn, kk) + kk * std::log(q) + (nn - kk) * std::log1p(-q));
}

int default_g(double epsilon) {
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
  return static_cast<int>(std::ceil(1.0 / (2.0 * epsilon))) + 1;
}

ProtocolPlan manual_plan(std::size_t N, int g, std::size_t M, double tau, double alpha) {
  if (g < 1 || M < 1) throw ArgumentError("manual_plan: need g >= 1 and M >= 1");
  if (N < 1 + static_cast<std::size_t>(g) * M) throw ArgumentError("manual_plan: N < 1 + gM");
  ProtocolPlan p;
  p.N = N;
  p.g = g;
  p.M = M;
  p.tau = tau;
  p.alpha = alpha;
  p.epsilon = 1.0 / (2.0 * g);
  p.c6 = tau * std::pow(static_cast<double>(N), (g - 1) / (2.0 * g));
  fill_regions(p);
  finish_plan(p);
  return p;
}

double admissible_c4(double p0, std::size_t s_lo, std::size_t s_hi) {
  s_lo = std::max<std::size_t>(s_lo, 1);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = s_lo; s <= s_hi; ++s) {
    const double sd = static_cast<double>(s);
    // walk j* outward from the centre while P(|j| < j*) stays below 1 - p0
    std::size_t k = (s + (s & 1)) / 2;  // (s + m)/2 for the smallest m >= 0 of matching parity
    std::size_t m = s & 1;
    double term = std::exp(log_choose(sd, static_cast<double>(k)) - sd * std::log(2.0));  // P(j = m)
    double inner = 0.0;
    std::size_t jstar = m;
    while (true) {
      const double here = (m == 0 ? 1.0 : 2.0) * term;
      if (inner + here >= 1.0 - p0 || m + 2 > s) break;
      inner += here;
      term *= static_cast<double>(s - k) / static_cast<double>(k + 1);
      ++k;
      m += 2;
      jstar = m;
    }
    best = std::min(best, static_cast<double>(jstar) / std::sqrt(sd));
    if (best == 0.0) break;
  }
  return std::isfinite(best) ? best * (1.0 - 1e-12) : 0.0;
}

double minimal_c6(int g, double c1, double c4, double c5) {
  const double pi2 = kPi * kPi;
  return std::sqrt(pi2 * g / (4.0 * c1) * pi2 / (4.0 * c4 * c4) * std::pow(4.0 * c4 * c4 * c5 / (pi2 * g), 1.0 / g));
}

S1StarCheck s1star_check(const ProtocolPlan& p) {
  const double pi2 = kPi * kPi, n = static_cast<double>(p.N);
  return {4.0 / pi2 * p.c1 * n / p.g * p.tau * p.tau,
          pi2 / (4.0 * p.c4 * p.c4) * std::pow(4.0 * p.c4 * p.c4 * p.c5 * n / (pi2 * p.g), 1.0 / p.g)};
}

std::vector<std::size_t> s_star_sequence(const ProtocolPlan& p) {
  std::vector<std::size_t> s;
  const double M = static_cast<double>(p.M);
  s.push_back(ceil_count(p.c1 * M * sin2(p.tau)));
  for (int l = 2; l <= p.g; ++l) {
    s.push_back(ceil_count(M * sin2(p.c4 * std::sqrt(static_cast<double>(s.back())) * p.tau)));
  }
  return s;
}

double protocol_runtime(const ProtocolPlan& p) {
  return p.g * (p.c3 * std::pow(static_cast<double>(p.N), p.alpha) * p.tau + p.t_X);
}

namespace {

struct PlanAttempt {
  std::optional<ProtocolPlan> plan;
  std::string why;
};

PlanAttempt try_plan(std::size_t N, double alpha, double epsilon, const PlanOverrides& ov) {
  PlanAttempt out;
  ProtocolPlan p;
  p.N = N;
  p.alpha = alpha;
  p.epsilon = epsilon;
  p.g = ov.g.value_or(default_g(epsilon));
  p.c1 = ov.c1.value_or(p.c1);
  p.c3 = ov.c3.value_or(p.c3);
  p.c5 = ov.c5.value_or(p.c5);
  p.t_X = ov.t_X.value_or(p.t_X);
  if (1.0 / (2.0 * p.g) > epsilon * (1 + 1e-12)) {
    out.why = "g = " + std::to_string(p.g) + " is below 1/(2 epsilon)";
    return out;
  }
  if (N < 1 + static_cast<std::size_t>(p.g)) {
    out.why = "N too small for g regions";
    return out;
  }
  p.M = (N - 1) / static_cast<std::size_t>(p.g);
  p.p0 = std::pow(2.0, -1.0 / (2.0 * p.g));
  const double Md = static_cast<double>(p.M);
  const double tau_exp = -(p.g - 1) / (2.0 * p.g);

  auto tau_for = [&](double c4) {
    p.c6 = ov.c6.value_or(ov.c6_margin * minimal_c6(p.g, p.c1, c4, p.c5));
    return p.c6 * std::pow(static_cast<double>(N), tau_exp);
  };
  if (ov.c4) {
    p.c4 = *ov.c4;
    p.tau = tau_for(p.c4);
  } else {
    // start from the large-s limit, then shrink to the finite-s admissible value
    p.c4 = std::sqrt(2.0) * boost::math::erfc_inv(p.p0);
    for (int it = 0; it < 50; ++it) {
      p.tau = tau_for(p.c4);
      if (p.tau > kPi / 2) break;
      const std::size_t s1 = ceil_count(p.c1 * Md * sin2(p.tau));
      const double adm = admissible_c4(p.p0, s1, p.M);
      if (p.c4 <= adm) break;
      p.c4 = adm;
      if (p.c4 <= 0.0) break;
    }
  }
  if (!(p.c4 > 0.0)) {
    out.why = "no positive c4 satisfies the imbalance tail condition";
    return out;
  }
  if (p.tau > kPi / 2) {
    out.why = "tau = " + std::to_string(p.tau) + " exceeds pi/2";
    return out;
  }
  const std::size_t s1 = ceil_count(p.c1 * Md * sin2(p.tau));
  if (!ov.c4 && admissible_c4(p.p0, s1, p.M) < p.c4) {
    out.why = "c4 iteration did not settle";
    return out;
  }

  // size window of step 1
  const double q = sin2(p.tau);
  auto window_mass = [&](double c2) {
    const std::size_t hi = std::min<std::size_t>(p.M, static_cast<std::size_t>(std::ceil(c2 * static_cast<double>(s1))));
    double m = 0.0;
    for (std::size_t r = s1; r <= hi; ++r) m += binomial_pmf(p.M, r, q);
    return m;
  };
  if (ov.c2) {
    p.c2 = *ov.c2;
    if (!(window_mass(p.c2) > p.p0)) {
      out.why = "size window mass below p0 for the given c2";
      return out;
    }
  } else {
    bool found = false;
    for (int k = 0;; ++k) {
      p.c2 = 1.1 + 0.05 * k;
      if (window_mass(p.c2) > p.p0) {
        found = true;
        break;
      }
      if (p.c2 * static_cast<double>(s1) >= Md) break;
    }
    if (!found) {
      out.why = "size window mass below p0 for every c2";
      return out;
    }
  }
  fill_regions(p);
  finish_plan(p);
  if (!s1star_check(p).holds()) {
    out.why = "size ladder condition fails";
    return out;
  }
  const auto ladder = s_star_sequence(p);
  if (static_cast<double>(ladder.back()) < p.c5 * Md) {
    out.why = "final guaranteed size " + std::to_string(ladder.back()) + " below c5 M";
    return out;
  }
  out.plan = p;
  return out;
}

std::size_t search_minimum(double alpha, double epsilon, const PlanOverrides& ov) {
  std::size_t lo = 1, hi = 2;
  while (!try_plan(hi, alpha, epsilon, ov).plan) {
    lo = hi;
    if (hi > (std::size_t{1} << 40)) return 0;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (try_plan(mid, alpha, epsilon, ov).plan ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

ProtocolPlan plan_protocol(std::size_t N, double alpha, double epsilon, const PlanOverrides& ov) {
  if (!(alpha > 0.5)) throw ArgumentError("plan_protocol: alpha must exceed 1/2");
  if (!(epsilon > 0.0)) throw ArgumentError("plan_protocol: epsilon must be positive");
  if (ov.g && *ov.g < 1) throw ArgumentError("plan_protocol: g must be >= 1");
  auto a = try_plan(N, alpha, epsilon, ov);
  if (a.plan) return *a.plan;
  throw PlanningError("plan_protocol(N=" + std::to_string(N) + "): " + a.why, search_minimum(alpha, epsilon, ov));
}

std::vector<ProtocolPlan> plan_protocol_family(const std::vector<std::size_t>& Ns, double alpha, double epsilon,
                                               const PlanOverrides& ov) {
  if (Ns.empty()) return {};
  const std::size_t n_min = *std::min_element(Ns.begin(), Ns.end());
  const std::size_t n_max = *std::max_element(Ns.begin(), Ns.end());
  PlanOverrides fixed = ov;
  if (!fixed.c4) {
    const ProtocolPlan base = plan_protocol(n_min, alpha, epsilon, ov);
    const std::size_t s1 = s_star_sequence(base).front();
    fixed.c4 = std::min(base.c4, admissible_c4(base.p0, s1, (n_max - 1) / static_cast<std::size_t>(base.g)));
  }
  std::vector<ProtocolPlan> out;
  for (std::size_t n : Ns) out.push_back(plan_protocol(n, alpha, epsilon, fixed));
  return out;
}

std::size_t minimum_plan_n(double alpha, double epsilon, const PlanOverrides& ov) {
  return search_minimum(alpha, epsilon, ov);
}

OperatorVector apply_uz(int l, const ProtocolPlan& p, const OperatorVector& A) {
  check_step(l, p);
  if (A.n_sites() != p.N) throw DimensionError("apply_uz: operator size differs from plan");
  const OperatorVector in = as_xpm(A);
  const std::uint64_t prev = l == 1 ? 1ULL : region_mask(p.regions[static_cast<std::size_t>(l - 2)]);
  const auto& cur = p.regions[static_cast<std::size_t>(l - 1)];
  const std::uint64_t cur_mask = region_mask(cur);
  if (cur.size() > 24) throw CapacityError("apply_uz region expansion", cur.size(), 24);
  OperatorVector out(p.N, Basis::Xpm);
  for (const auto& [k, c] : in.terms()) {
    if ((k.x | k.z) & cur_mask) throw ProtocolStateError("apply_uz: string already acts on region " + std::to_string(l));
    if (~k.x & k.z & prev) throw ProtocolStateError("apply_uz: Z content in the control region");
    const int j = __builtin_popcountll(k.x & ~k.z & prev) - __builtin_popcountll(k.x & k.z & prev);
    const double cs = std::cos(j * p.tau), sn = std::sin(j * p.tau);
    // prod_v (cos j tau + i sin j tau Z_v)
    const std::size_t m = cur.size();
    for (std::uint64_t sub = 0; sub < (1ULL << m); ++sub) {
      const int w = __builtin_popcountll(sub);
      if (sn == 0.0 && w > 0) break;
      const Complex coef = c * std::pow(cs, static_cast<double>(m - w)) * std::pow(Complex(0, sn), w);
      if (coef == Complex{}) continue;
      std::uint64_t zbits = 0;
      for (std::size_t b = 0; b < m; ++b)
        if (sub >> b & 1ULL) zbits |= 1ULL << cur[b];
      out.add(PauliKey{k.x, k.z | zbits}, coef);
    }
  }
  return restore_basis(std::move(out), A.basis());
}

OperatorVector apply_uy(int l, const ProtocolPlan& p, const OperatorVector& A) {
  check_step(l, p);
  if (A.n_sites() != p.N) throw DimensionError("apply_uy: operator size differs from plan");
  static const double r = 1.0 / std::sqrt(2.0);
  struct Image {
    int letter;
    double coef;
  };
  // Z -> X, X -> -Z, Y -> Y, written in {I, X+, X-, Z}
  static const std::vector<Image> table[4] = {
      {{kI, 1.0}},
      {{kZ, -r}, {kXp, 0.5}, {kXm, -0.5}},
      {{kXp, r}, {kXm, r}},
      {{kZ, -r}, {kXp, -0.5}, {kXm, 0.5}},
  };
  OperatorVector cur = as_xpm(A);
  for (std::size_t v : p.regions[static_cast<std::size_t>(l - 1)]) {
    OperatorVector next(p.N, Basis::Xpm);
    for (const auto& [k, c] : cur.terms()) {
      for (const Image& im : table[xpm_letter(k, v)]) next.add(set_letter(k, v, im.letter), c * im.coef);
    }
    cur = std::move(next);
  }
  return restore_basis(std::move(cur), A.basis());
}

ExactRun run_protocol_exact(const ProtocolPlan& p, std::size_t limit) {
  if (p.N > limit) throw CapacityError("exact protocol simulation", p.N, limit);
  OperatorVector A(p.N, Basis::Xpm);
  A.add(PauliKey{1, 0}, 1.0);
  ExactRun run{A, {}, 0.0, {}};
  for (int l = 1; l <= p.g; ++l) {
    A = apply_uy(l, p, apply_uz(l, p, A));
    const std::uint64_t R = region_mask(p.regions[static_cast<std::size_t>(l - 1)]);
    StepDistribution d;
    d.size.assign(p.M + 1, 0.0);
    double mass = 0.0, mean = 0.0;
    for (const auto& [k, c] : A.terms()) {
      const double w = std::norm(c);
      const int s = __builtin_popcountll(k.x & R);
      const int j = __builtin_popcountll(k.x & ~k.z & R) - __builtin_popcountll(k.x & k.z & R);
      d.joint[{s, j}] += w;
      d.size[static_cast<std::size_t>(s)] += w;
      d.imbalance[j] += w;
      mass += w;
      mean += w * __builtin_popcountll(k.x | k.z);
    }
    d.cumulative_size_mean = mean;
    d.retained_mass = mass;
    run.steps.push_back(std::move(d));
  }
  run.sizes = size_distribution(A);
  run.avg_size = run.sizes.mean();
  run.final = std::move(A);
  return run;
}

MarkovOptions default_markov_options(const ProtocolPlan& p) {
  MarkovOptions o;
  o.joint = p.M <= 64;
  o.final_imbalance = o.joint;
  return o;
}

std::vector<StepDistribution> markov_predict(const ProtocolPlan& p) { return markov_predict(p, default_markov_options(p)); }

constexpr double kNegligibleMass = 1e-20;

std::vector<StepDistribution> markov_predict(const ProtocolPlan& p, const MarkovOptions& opt) {
  if (p.g < 1 || p.M < 1) throw ArgumentError("markov_predict: invalid plan");
  const std::size_t M = p.M;
  const double Md = static_cast<double>(M);
  const std::vector<double> lf = log_factorials(M);
  const double log2 = std::log(2.0);
  auto lchoose = [&](std::size_t n, std::size_t k) { return lf[n] - lf[k] - lf[n - k]; };

  std::map<int, double> jprev{{1, 1.0}};  // X+ on the source
  double cumulative = 1.0;
  std::vector<StepDistribution> out;
  for (int l = 1; l <= p.g; ++l) {
    StepDistribution d;
    d.size.assign(M + 1, 0.0);
    for (const auto& [j, pj] : jprev) {
      const double x = j * p.tau / kPi;
      const double nearest = std::round(x);
      if (l > 1 && nearest != 0.0 && std::abs(x - nearest) < opt.delta) d.near_zero_mass += pj;
      const double q = sin2(j * p.tau);
      if (q <= 0.0 || j == 0) {
        d.size[0] += pj;
        continue;
      }
      if (q >= 1.0) {
        d.size[M] += pj;
        continue;
      }
      const double mean = Md * q, sd = std::sqrt(Md * q * (1.0 - q));
      const std::size_t lo = static_cast<std::size_t>(std::max(0.0, std::floor(mean - opt.k_mass * sd) - 1.0));
      const std::size_t hi = static_cast<std::size_t>(std::min(Md, std::ceil(mean + opt.k_mass * sd) + 1.0));
      const double lq = std::log(q), l1q = std::log1p(-q);
      for (std::size_t r = lo; r <= hi; ++r) {
        d.size[r] += pj * std::exp(lchoose(M, r) + static_cast<double>(r) * lq + static_cast<double>(M - r) * l1q);
      }
    }
    double mass = 0.0, er = 0.0;
    for (std::size_t r = 0; r <= M; ++r) {
      mass += d.size[r];
      er += static_cast<double>(r) * d.size[r];
    }
    cumulative += er;
    d.cumulative_size_mean = cumulative;
    d.retained_mass = mass;

    const bool need_j = l < p.g || opt.final_imbalance;
    std::map<int, double> jnext;
    if (need_j || opt.joint) {
      // dense accumulator over j in [-M, M]; sizes with negligible mass are
      // skipped and show up as lost retained_mass one step later
      std::vector<double> acc(2 * M + 1, 0.0);
      for (std::size_t r = 0; r <= M; ++r) {
        const double pr = d.size[r];
        if (pr <= kNegligibleMass) continue;
        const double rd = static_cast<double>(r);
        const int half = static_cast<int>(std::min(rd, std::ceil(opt.k_mass * std::sqrt(rd)) + 2.0));
        const int ri = static_cast<int>(r);
        for (int j = -half; j <= half; ++j) {
          if (((ri + j) & 1) != 0) continue;
          const double w = pr * std::exp(lchoose(r, static_cast<std::size_t>((ri + j) / 2)) - rd * log2);
          if (opt.joint) d.joint[{ri, j}] += w;
          acc[static_cast<std::size_t>(j + static_cast<int>(M))] += w;
        }
      }
      for (std::size_t k = 0; k < acc.size(); ++k)
        if (acc[k] > 0.0) jnext.emplace_hint(jnext.end(), static_cast<int>(k) - static_cast<int>(M), acc[k]);
    }
    if (need_j) d.imbalance = jnext;
    out.push_back(std::move(d));
    jprev = std::move(jnext);
  }
  return out;
}

void write_protocol_csv(std::ostream& os, const ProtocolPlan& p, const std::vector<StepDistribution>& steps) {
  write_csv_row(os, {"step", "mean_size", "s_star", "retained_mass", "runtime"});
  const auto ladder = s_star_sequence(p);
  for (std::size_t l = 0; l < steps.size(); ++l) {
    const double runtime = static_cast<double>(l + 1) * (p.t_Z + p.t_X);
    write_csv_row(os, {std::to_string(l + 1), format_real(steps[l].cumulative_size_mean),
                       l < ladder.size() ? std::to_string(ladder[l]) : "", format_real(steps[l].retained_mass),
                       format_real(runtime)});
  }
}

}  // namespace opgrowth
