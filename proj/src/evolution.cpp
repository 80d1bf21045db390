#include <algorithm>
#include <cmath>
#include <string>

#include "opgrowth/errors.hpp"
#include "opgrowth/evolution.hpp"

#include <Eigen/Sparse>

namespace opgrowth {

Schedule make_schedule(const HamiltonianSpec& spec) {
  Schedule s;
  s.reserve(spec.segments.size());
  for (std::size_t k = 0; k < spec.segments.size(); ++k) s.push_back({materialize(spec, k), spec.segments[k].duration});
  return s;
}

Schedule restricted_schedule(const HamiltonianSpec& spec, std::size_t v, int D) {
  Schedule s;
  s.reserve(spec.segments.size());
  for (std::size_t k = 0; k < spec.segments.size(); ++k) {
    s.push_back({decompose(spec, k, v, D).lt_D, spec.segments[k].duration});
  }
  return s;
}

double total_time(const Schedule& s) {
  double t = 0.0;
  for (const auto& seg : s) t += seg.duration;
  return t;
}

std::uint64_t schedule_support(const Schedule& s) {
  std::uint64_t m = 0;
  for (const auto& seg : s) m |= seg.H.support_mask();
  return m;
}

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::Dense: return "dense";
    case Backend::Superop: return "superop";
    case Backend::Symmetric: return "symmetric";
  }
  return "?";
}

namespace {

void check_time(double t, double total) {
  if (!(t >= 0.0)) throw ArgumentError("evolution time must be >= 0");
  if (t > total * (1 + 1e-12) + 1e-12) {
    throw ArgumentError("evolution time " + std::to_string(t) + " exceeds schedule length " + std::to_string(total));
  }
}

template <class Fn>
void walk_segments(const std::vector<double>& durations, double t, Fn&& fn) {
  double remaining = t;
  for (std::size_t k = 0; k < durations.size() && remaining > 0.0; ++k) {
    const double tau = std::min(durations[k], remaining);
    fn(k, tau);
    remaining -= tau;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// dense backend

HeisenbergPropagator::HeisenbergPropagator(const CMatrix& H) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  if (es.info() != Eigen::Success) throw IntegrationError("eigendecomposition of segment Hamiltonian failed");
  V_ = es.eigenvectors();
  E_ = es.eigenvalues();
}

CMatrix HeisenbergPropagator::rotate_eigenbasis(const CMatrix& O_eig, double t) const {
  const Eigen::Index d = O_eig.rows();
  CVector ph(d);
  for (Eigen::Index m = 0; m < d; ++m) ph(m) = std::polar(1.0, E_(m) * t);
  CMatrix out(d, d);
  for (Eigen::Index n = 0; n < d; ++n) {
    const Complex cn = std::conj(ph(n));
    for (Eigen::Index m = 0; m < d; ++m) out(m, n) = O_eig(m, n) * ph(m) * cn;
  }
  return out;
}

DenseEvolver::DenseEvolver(const Schedule& schedule, std::vector<std::size_t> sites, std::size_t dense_limit)
    : sites_(std::move(sites)), total_(opgrowth::total_time(schedule)) {
  if (sites_.size() > dense_limit) throw CapacityError("dense evolution site count", sites_.size(), dense_limit);
  props_.reserve(schedule.size());
  for (const auto& seg : schedule) {
    props_.emplace_back(to_dense(seg.H, sites_));
    durations_.push_back(seg.duration);
  }
}

CMatrix DenseEvolver::evolve(const CMatrix& O0, double t) const {
  check_time(t, total_);
  CMatrix O = O0;
  walk_segments(durations_, t, [&](std::size_t k, double tau) { O = props_[k].apply(O, tau); });
  return O;
}

std::vector<CMatrix> DenseEvolver::evolve_grid(const CMatrix& O0, const std::vector<double>& times) const {
  if (!std::is_sorted(times.begin(), times.end())) throw ArgumentError("evolve_grid: times must be ascending");
  std::vector<CMatrix> out;
  out.reserve(times.size());
  std::size_t seg = 0;
  double seg_start = 0.0;
  CMatrix at_start = O0;
  CMatrix eig;
  bool have_eig = false;
  for (double t : times) {
    check_time(t, total_);
    while (seg + 1 < durations_.size() && t > seg_start + durations_[seg]) {
      at_start = props_[seg].apply(at_start, durations_[seg]);
      seg_start += durations_[seg];
      ++seg;
      have_eig = false;
    }
    if (props_.empty()) {
      out.push_back(O0);
      continue;
    }
    if (!have_eig) {
      eig = props_[seg].to_eigenbasis(at_start);
      have_eig = true;
    }
    const double tau = std::min(std::max(0.0, t - seg_start), durations_[seg]);
    out.push_back(props_[seg].from_eigenbasis(props_[seg].rotate_eigenbasis(eig, tau)));
  }
  return out;
}

std::vector<std::size_t> active_sites(const Schedule& s, const OperatorVector& A0) {
  return mask_sites(schedule_support(s) | A0.support_mask());
}

EvolutionResult evolve_dense(const Schedule& s, const OperatorVector& A0, double t, std::size_t dense_limit) {
  if (A0.basis() != Basis::Pauli) throw ArgumentError("evolve_dense requires a Pauli-basis operator");
  for (const auto& seg : s) {
    if (seg.H.n_sites() != A0.n_sites()) throw DimensionError("evolve_dense: Hamiltonian and operator sizes differ");
  }
  auto sites = active_sites(s, A0);
  if (sites.size() > dense_limit) throw CapacityError("dense evolution site count", sites.size(), dense_limit);
  check_time(t, total_time(s));
  EvolutionResult r{OperatorVector(A0.n_sites()), Backend::Dense, {}, 0.0};
  if (t == 0.0) {
    r.op = A0;
  } else {
    DenseEvolver ev(s, sites, dense_limit);
    r.op = from_dense(ev.evolve(to_dense(A0, sites), t), sites, A0.n_sites());
    r.stats.steps = s.size();
  }
  r.op.set_hermitian_flag(A0.hermitian_flag());
  r.norm_drift = std::abs(r.op.norm2() - A0.norm2());
  return r;
}

EvolutionResult evolve_dense(const HamiltonianSpec& spec, const OperatorVector& A0, double t, std::size_t dense_limit) {
  return evolve_dense(make_schedule(spec), A0, t, dense_limit);
}

// ---------------------------------------------------------------------------
// superoperator backend

OperatorVector liouvillian(const OperatorVector& H, const OperatorVector& A) {
  if (H.n_sites() != A.n_sites()) throw DimensionError("liouvillian: site count mismatch");
  if (H.basis() != Basis::Pauli || A.basis() != Basis::Pauli) throw ArgumentError("liouvillian requires the Pauli basis");
  OperatorVector out(A.n_sites());
  for (const auto& [p, h] : H.terms()) {
    for (const auto& [q, c] : A.terms()) {
      if (!anticommute(p, q)) continue;
      out.add(PauliKey{p.x ^ q.x, p.z ^ q.z}, Complex(0, 2) * h * i_pow(product_phase(p, q)) * c);
    }
  }
  out.prune();
  return out;
}

namespace {

struct Term {
  PauliKey key;
  Complex coeff;
};

std::vector<Term> term_list(const OperatorVector& H) {
  std::vector<Term> out;
  for (const auto& [k, c] : H.sorted_terms()) out.push_back({k, c});
  return out;
}

// Coefficients indexed by x | (z << n).
class DenseCoefficients {
 public:
  explicit DenseCoefficients(std::size_t n) : n_(n) {}

  std::size_t index(PauliKey k) const { return static_cast<std::size_t>(k.x | (k.z << n_)); }
  PauliKey key(std::size_t idx) const {
    const std::uint64_t m = low_bits(n_);
    return {idx & m, (idx >> n_) & m};
  }

  CVector pack(const OperatorVector& a) const {
    CVector v = CVector::Zero(static_cast<Eigen::Index>(std::size_t{1} << (2 * n_)));
    for (const auto& [k, c] : a.terms()) v(static_cast<Eigen::Index>(index(k))) = c;
    return v;
  }

  OperatorVector unpack(const CVector& v) const {
    OperatorVector a(n_);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) >= kPruneTolerance) a.add(key(static_cast<std::size_t>(i)), v(i));
    }
    return a;
  }

  // i[H, .] as a sparse matrix on the packed coefficient vector. Only
  // anticommuting terms contribute and their phase is +-i, so for Hermitian H
  // every element is real.
  Eigen::SparseMatrix<double> generator(const std::vector<Term>& H) const {
    const std::size_t dim = std::size_t{1} << (2 * n_);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(dim * std::max<std::size_t>(1, H.size() / 2));
    for (std::size_t i = 0; i < dim; ++i) {
      const PauliKey q = key(i);
      for (const Term& t : H) {
        if (!anticommute(t.key, q)) continue;
        const PauliKey r{t.key.x ^ q.x, t.key.z ^ q.z};
        const Complex c = Complex(0, 2) * t.coeff * i_pow(product_phase(t.key, q));
        if (std::abs(c.imag()) > 1e-12 * std::abs(c)) throw ArgumentError("evolve_superop: Hamiltonian is not Hermitian");
        trip.emplace_back(static_cast<int>(index(r)), static_cast<int>(i), c.real());
      }
    }
    Eigen::SparseMatrix<double> L(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
  }

 private:
  std::size_t n_;
};

double vec_norm(const CVector& v) { return v.norm(); }
double vec_norm(const OperatorVector& v) { return std::sqrt(v.norm2()); }

// Dormand-Prince 5(4) with FSAL, absolute/relative control on the 2-norm.
template <class Vec, class F>
void dopri5(F&& f, Vec& y, double T, double tol, std::size_t max_steps, double h_init, StepStats& stats) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (T <= 0.0) return;
  double t = 0.0;
  double h = std::min(h_init, T);
  Vec k1 = f(y);
  std::size_t steps_here = 0;
  while (t < T) {
    if (steps_here++ > max_steps) throw IntegrationError("superop integration exceeded the step budget at t=" + std::to_string(t));
    if (t + h > T) h = T - t;
    Vec k2 = f(y + (h * a21) * k1);
    Vec k3 = f(y + h * (a31 * k1 + a32 * k2));
    Vec k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    Vec k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Vec k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vec y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Vec k7 = f(y_new);
    const Vec err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double scale = tol * std::max(1.0, std::max(vec_norm(y), vec_norm(y_new)));
    const double err = vec_norm(err_vec) / scale;
    if (err <= 1.0) {
      t += h;
      y = std::move(y_new);
      k1 = std::move(k7);
      ++stats.steps;
      stats.max_error = std::max(stats.max_error, err * scale);
    } else {
      ++stats.rejected;
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= factor;
    if (t < T && h < 1e-13 * std::max(1.0, T)) {
      throw IntegrationError("superop step size underflow at t=" + std::to_string(t) + " (h=" + std::to_string(h) +
                             ", error ratio " + std::to_string(err) + ")");
    }
  }
}

double coefficient_l1(const OperatorVector& H) {
  double s = 0.0;
  for (const auto& [k, c] : H.terms()) s += std::abs(c);
  return s;
}

}  // namespace

EvolutionResult evolve_superop(const Schedule& s, const OperatorVector& A0, double t, const SuperopOptions& opt) {
  if (A0.basis() != Basis::Pauli) throw ArgumentError("evolve_superop requires a Pauli-basis operator");
  const std::size_t n = A0.n_sites();
  for (const auto& seg : s) {
    if (seg.H.n_sites() != n) throw DimensionError("evolve_superop: Hamiltonian and operator sizes differ");
  }
  check_time(t, total_time(s));
  EvolutionResult r{A0, Backend::Superop, {}, 0.0};
  std::vector<double> durations;
  for (const auto& seg : s) durations.push_back(seg.duration);

  auto h0 = [&](const OperatorVector& H) { return 0.05 / std::max(1e-12, 2.0 * coefficient_l1(H)); };

  if (n <= opt.dense_limit) {
    DenseCoefficients dc(n);
    CVector y = dc.pack(A0);
    walk_segments(durations, t, [&](std::size_t k, double tau) {
      const Eigen::SparseMatrix<double> L = dc.generator(term_list(s[k].H));
      auto f = [&](const CVector& v) {
        CVector out(v.size());
        out.real() = L * v.real();
        out.imag() = L * v.imag();
        return out;
      };
      dopri5(f, y, tau, opt.tol, opt.max_steps, h0(s[k].H), r.stats);
    });
    r.op = dc.unpack(y);
  } else {
    OperatorVector y = A0;
    walk_segments(durations, t, [&](std::size_t k, double tau) {
      const OperatorVector& H = s[k].H;
      auto f = [&](const OperatorVector& v) {
        OperatorVector out = liouvillian(H, v);
        out.prune(opt.prune);
        return out;
      };
      dopri5(f, y, tau, opt.tol, opt.max_steps, h0(H), r.stats);
    });
    r.op = std::move(y);
  }
  r.op.set_hermitian_flag(A0.hermitian_flag());
  r.norm_drift = std::abs(r.op.norm2() - A0.norm2());
  return r;
}

EvolutionResult evolve_superop(const HamiltonianSpec& spec, const OperatorVector& A0, double t,
                               const SuperopOptions& opt) {
  return evolve_superop(make_schedule(spec), A0, t, opt);
}

}  // namespace opgrowth
