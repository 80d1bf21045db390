#include "opgrowth/bounds.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <limits>

#include "opgrowth/csv.hpp"
#include "opgrowth/errors.hpp"

namespace opgrowth {

double mu_constant(double b, int k) {
  if (!(b > 0.0) || k < 1) throw ArgumentError("mu_constant: need b > 0 and k >= 1");
  return 9.0 * (1.0 + b) * k;
}

double lemma1_envelope(double mu, int D, double t) {
  if (D < 0 || t < 0.0) throw ArgumentError("lemma1_envelope: need D >= 0 and t >= 0");
  return std::exp(mu * t - D);
}

double weighted_functional(const OperatorVector& A, std::size_t v, double b, const InteractionGraph& g) {
  if (A.n_sites() != g.n_vertices()) throw DimensionError("weighted_functional: operator and graph sizes differ");
  if (A.norm2() > 1.0 + 1e-9) throw ArgumentError("weighted_functional: operator norm exceeds 1");
  const std::size_t n = g.n_vertices();
  std::vector<double> w(n);
  for (std::size_t x = 0; x < n; ++x) {
    const int d = g.dist(v, x);
    w[x] = d == kUnreachable ? std::numeric_limits<double>::infinity() : std::pow(b, d);
  }
  double total = 0.0;
  for (const auto& [k, c] : A.terms()) {
    const double p = std::norm(c);
    if (p == 0.0) continue;
    for (std::uint64_t s = k.x | k.z; s; s &= s - 1) total += w[static_cast<std::size_t>(__builtin_ctzll(s))] * p;
  }
  return total;
}

double mprime_constant(int k, double c2) { return 18.0 * k * c2; }

BoundParams derive_params(const InteractionGraph& g, int d, double a, double alpha, double b) {
  const DimensionCertificate cert = certify_dimension(g, d);
  BoundParams p;
  p.a = a;
  p.b = b;
  p.k = std::max<int>(1, static_cast<int>(g.max_degree()));
  p.d = d;
  p.c1 = cert.c1;
  p.c2 = cert.c2;
  p.mu = mu_constant(b, p.k);
  p.Mprime = mprime_constant(p.k, p.c2);
  p.Zprime = kZprime;
  p.alpha = alpha;
  p.N = g.n_vertices();
  p.D0 = choose_D0(p);
  return p;
}

double d0_rhs(double Mprime, double mu, int d, int D0) {
  const double u = std::max(0.0, 2.0 * d - D0);  // 2 mu t at the maximum
  const double peak = std::pow(u + D0, d) * std::exp(-0.5 * u);
  return std::exp(-D0) * Mprime / (2.0 * mu) * peak;
}

int choose_D0(const BoundParams& p) {
  if (!(p.a > 0.0 && p.a < 1.0) || !(p.mu > 0.0) || p.d < 1 || p.Mprime < 0.0) {
    throw ArgumentError("choose_D0: need 0 < a < 1, mu > 0, d >= 1, M' >= 0");
  }
  const double lhs = std::sqrt(p.a / 8.0);
  for (int D0 = 0;; ++D0) {
    if (lhs > d0_rhs(p.Mprime, p.mu, p.d, D0)) return D0;
  }
}

TheoremBound theorem_lower_bound(const BoundParams& p) {
  if (p.d < 1 || !(p.mu > 0.0) || !(p.c1 > 0.0) || !(p.Zprime > 0.0)) throw ArgumentError("theorem_lower_bound: bad params");
  const double crossover = 1.0 + 1.0 / p.d;
  const bool lr = p.alpha >= crossover;
  const double alpha = lr ? crossover : p.alpha;
  const double power = 1.0 + 0.5 * p.d;
  const double rhs = std::sqrt(p.a / 8.0) * std::pow(static_cast<double>(p.N), alpha - 0.5) /
                     (p.Zprime * std::sqrt(p.c1 * std::pow(2.0 * p.mu, p.d)));
  return {std::pow(rhs, 1.0 / power), (2.0 * alpha - 1.0) / (p.d + 2.0), lr};
}

double corollary3_lower_bound(std::size_t N, double alpha, double a) {
  if (!(a > 0.0 && a < 1.0)) throw ArgumentError("corollary3_lower_bound: a must lie in (0, 1)");
  return std::sqrt(a) / 6.0 * std::pow(static_cast<double>(N), alpha - 0.5);
}

double corollary3_rigorous_bound(std::size_t N, double alpha, double a) {
  if (!(a > 0.0 && a < 1.0)) throw ArgumentError("corollary3_rigorous_bound: a must lie in (0, 1)");
  const double n = static_cast<double>(N);
  if (N < 2 || a * n <= 1.0) return 0.0;
  return std::sqrt(a * n - 1.0) * std::pow(n, alpha) / (6.0 * (n - 1.0));
}

namespace {

std::vector<std::size_t> complement(const std::vector<std::size_t>& in, std::size_t n) {
  std::vector<bool> mark(n, false);
  for (std::size_t x : in) mark[x] = true;
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < n; ++x)
    if (!mark[x]) out.push_back(x);
  return out;
}

// Segment index and local offset for an absolute time.
std::size_t segment_at(const HamiltonianSpec& spec, double t) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < spec.segments.size(); ++k) {
    acc += spec.segments[k].duration;
    if (t < acc) return k;
  }
  return spec.segments.size() - 1;
}

}  // namespace

DuhamelReport duhamel_split_check(const HamiltonianSpec& spec, std::size_t v, int D, double t,
                                  const DuhamelOptions& opt) {
  require_valid(spec);
  const std::size_t n = spec.n_sites();
  if (v >= n) throw ArgumentError("duhamel_split_check: vertex out of range");
  if (D < 1) throw ArgumentError("duhamel_split_check: D must be >= 1");
  const OperatorVector O = OperatorVector::single_site(n, v, opt.letter);

  const std::vector<std::size_t> inside = ball(spec.graph, v, D);
  const OperatorVector full = evolve_dense(spec, O, t).op;
  DuhamelReport r{};
  const auto outside = complement(inside, n);
  r.lhs = outside.empty() ? 0.0 : std::sqrt(project_sites(full, outside).norm2());

  std::vector<OperatorVector> HD, HNL;
  for (std::size_t k = 0; k < spec.segments.size(); ++k) {
    RegionDecomposition dec = decompose(spec, k, v, D);
    HD.push_back(std::move(dec.D));
    HNL.push_back(std::move(dec.NL_lt));
  }
  const Schedule restricted = restricted_schedule(spec, v, D);
  DenseEvolver ev(restricted, inside);
  const CMatrix O0 = to_dense(O, inside);

  auto integrate = [&](const std::vector<OperatorVector>& Hs) {
    auto f = [&](double s) {
      const OperatorVector os = from_dense(ev.evolve(O0, s), inside, n);
      return std::sqrt(liouvillian(Hs[segment_at(spec, s)], os).norm2());
    };
    double total = 0.0, lo = 0.0, acc = 0.0;
    for (std::size_t k = 0; k < spec.segments.size() && lo < t; ++k) {
      acc += spec.segments[k].duration;
      const double hi = std::min(acc, t);
      if (hi > lo) {
        double err = 0.0;
        total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, opt.max_depth,
                                                                               opt.quad_tol * 1e-2, &err);
        r.quad_error += err;
      }
      lo = hi;
    }
    return total;
  };
  r.term1 = integrate(HD);
  r.term2 = integrate(HNL);
  if (!(r.quad_error <= opt.quad_tol)) {
    throw IntegrationError("duhamel_split_check: quadrature error " + std::to_string(r.quad_error) + " above tolerance");
  }
  r.pass = r.lhs <= r.term1 + r.term2 + opt.quad_tol;
  return r;
}

std::vector<Lemma1Report> lemma1_scan(const HamiltonianSpec& spec, std::size_t v, int D,
                                      const std::vector<double>& times, double b, Letter letter) {
  require_valid(spec);
  const std::size_t n = spec.n_sites();
  if (v >= n) throw ArgumentError("lemma1_scan: vertex out of range");
  if (D < 0) throw ArgumentError("lemma1_scan: D must be >= 0");
  const double mu = mu_constant(b, std::max<int>(1, static_cast<int>(spec.graph.max_degree())));
  const std::vector<std::size_t> inside = ball(spec.graph, v, D);
  const std::vector<std::size_t> shell_D = shell(spec.graph, v, D);
  DenseEvolver ev(restricted_schedule(spec, v, D), inside);
  const auto mats = ev.evolve_grid(to_dense(OperatorVector::single_site(n, v, letter), inside), times);
  std::vector<Lemma1Report> out;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const OperatorVector o = from_dense(mats[i], inside, n);
    Lemma1Report r{};
    r.lhs = shell_D.empty() ? 0.0 : std::sqrt(project_sites(o, shell_D).norm2());
    r.envelope = lemma1_envelope(mu, D, times[i]);
    r.functional = weighted_functional(o, v, b, spec.graph);
    r.functional_bound = std::exp(2.0 * mu * times[i]);
    r.pass = r.lhs < r.envelope && r.functional <= r.functional_bound * (1 + 1e-12);
    out.push_back(r);
  }
  return out;
}

Lemma1Report lemma1_check(const HamiltonianSpec& spec, std::size_t v, int D, double t, double b, Letter letter) {
  return lemma1_scan(spec, v, D, {t}, b, letter).front();
}

void write_cert_header(std::ostream& os) {
  write_csv_row(os, {"check_name", "N", "alpha", "D", "t", "lhs", "rhs", "slack", "pass"});
}

void write_cert_row(std::ostream& os, const CertRow& r) {
  write_csv_row(os, {r.check, std::to_string(r.N), format_real(r.alpha), std::to_string(r.D), format_real(r.t),
                     format_real(r.lhs), format_real(r.rhs), format_real(r.slack()), r.pass ? "1" : "0"});
}

}  // namespace opgrowth
