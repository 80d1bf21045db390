#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "opgrowth/errors.hpp"
#include "opgrowth/evolution.hpp"

namespace opgrowth {

namespace {

int letter_index(Letter l) { return static_cast<int>(l); }

// log of n! / (a! b! c! (n-a-b-c)!)
double log_multinomial(int n, int a, int b, int c) {
  return std::lgamma(n + 1.0) - std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(c + 1.0) -
         std::lgamma(n - a - b - c + 1.0);
}

struct Counts {
  int x = 0, y = 0, z = 0;
};

Counts count_letters(PauliKey k, std::uint64_t mask) {
  const std::uint64_t x = k.x & mask, z = k.z & mask;
  return {__builtin_popcountll(x & ~z), __builtin_popcountll(x & z), __builtin_popcountll(z & ~x)};
}

Letter site_letter(PauliKey k, std::size_t site) {
  return letter_from_bits((k.x >> site) & 1ULL, (k.z >> site) & 1ULL);
}

}  // namespace

bool SymmetricSector::is_symmetric(const OperatorVector& H, double tol) {
  if (H.basis() != Basis::Pauli) return false;
  const int n = static_cast<int>(H.n_sites());
  const std::uint64_t all = low_bits(H.n_sites());
  std::map<std::tuple<int, int, int>, std::pair<std::size_t, Complex>> groups;
  for (const auto& [k, c] : H.terms()) {
    const Counts cnt = count_letters(k, all);
    auto [it, fresh] = groups.try_emplace({cnt.x, cnt.y, cnt.z}, 0, c);
    if (std::abs(it->second.second - c) > tol * std::max(1.0, std::abs(c))) return false;
    ++it->second.first;
  }
  for (const auto& [sig, g] : groups) {
    const auto [x, y, z] = sig;
    const double expected = std::exp(log_multinomial(n, x, y, z));
    if (std::abs(static_cast<double>(g.first) - expected) > 0.5) return false;
  }
  return true;
}

std::size_t SymmetricSector::index(Letter source, int nx, int ny, int nz) const {
  const int m = static_cast<int>(n_);  // counts run 0..n-1
  if (nx < 0 || ny < 0 || nz < 0 || nx + ny + nz > m - 1) throw ArgumentError("orbit counts out of range");
  return static_cast<std::size_t>(lookup_[((letter_index(source) * m + nx) * m + ny) * m + nz]);
}

std::optional<SymmetricSector> SymmetricSector::build(const OperatorVector& H, double tol) {
  if (!is_symmetric(H, tol)) return std::nullopt;
  SymmetricSector sec;
  sec.n_ = H.n_sites();
  const int m = static_cast<int>(sec.n_);
  if (m < 1) throw ArgumentError("symmetric sector needs at least one site");
  sec.lookup_.assign(static_cast<std::size_t>(4 * m * m * m), -1);
  for (Letter l : {Letter::I, Letter::X, Letter::Y, Letter::Z}) {
    for (int nx = 0; nx <= m - 1; ++nx)
      for (int ny = 0; nx + ny <= m - 1; ++ny)
        for (int nz = 0; nx + ny + nz <= m - 1; ++nz) {
          sec.lookup_[((letter_index(l) * m + nx) * m + ny) * m + nz] = static_cast<int>(sec.orbits_.size());
          sec.orbits_.push_back({l, nx, ny, nz, log_multinomial(m - 1, nx, ny, nz)});
        }
  }

  const std::size_t dim = sec.orbits_.size();
  const std::uint64_t others = low_bits(sec.n_) & ~1ULL;
  sec.A_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::vector<double> column(dim);
  for (std::size_t o = 0; o < dim; ++o) {
    const Orbit& orb = sec.orbits_[o];
    // representative: source letter, then X, Y, Z blocks on sites 1, 2, ...
    PauliString rep = PauliString::single(sec.n_, 0, orb.source);
    std::size_t site = 1;
    auto put = [&](int count, Letter l) {
      for (int c = 0; c < count; ++c) rep = mul(rep, PauliString::single(sec.n_, site++, l));
    };
    put(orb.nx, Letter::X);
    put(orb.ny, Letter::Y);
    put(orb.nz, Letter::Z);
    std::fill(column.begin(), column.end(), 0.0);
    const OperatorVector image = liouvillian(H, OperatorVector::from_string(PauliString(sec.n_, rep.x_mask(), rep.z_mask())));
    for (const auto& [k, c] : image.terms()) {
      if (std::abs(c.imag()) > 1e-12 * std::max(1.0, std::abs(c))) {
        throw ArgumentError("symmetric sector: Liouvillian has a non-real matrix element");
      }
      const Counts cnt = count_letters(k, others);
      column[sec.index(site_letter(k, 0), cnt.x, cnt.y, cnt.z)] += c.real();
    }
    for (std::size_t p = 0; p < dim; ++p) {
      if (column[p] == 0.0) continue;
      sec.A_(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(o)) =
          column[p] * std::exp(0.5 * (orb.log_size - sec.orbits_[p].log_size));
    }
  }
  return sec;
}

Eigen::VectorXd SymmetricSector::source_pauli(Letter l) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim()));
  v(static_cast<Eigen::Index>(index(l, 0, 0, 0))) = 1.0;
  return v;
}

Eigen::VectorXd SymmetricSector::coordinates(const OperatorVector& A, double tol) const {
  if (A.n_sites() != n_) throw DimensionError("symmetric sector: site count mismatch");
  if (A.basis() != Basis::Pauli) throw ArgumentError("symmetric sector: Pauli basis required");
  const std::uint64_t others = low_bits(n_) & ~1ULL;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim()));
  for (const auto& [k, c] : A.terms()) {
    if (std::abs(c.imag()) > tol) throw ArgumentError("symmetric sector: complex coefficients are not supported");
    const Counts cnt = count_letters(k, others);
    const std::size_t o = index(site_letter(k, 0), cnt.x, cnt.y, cnt.z);
    v(static_cast<Eigen::Index>(o)) += c.real() * std::exp(-0.5 * orbits_[o].log_size);
  }
  if (std::abs(v.squaredNorm() - A.norm2()) > tol * std::max(1.0, A.norm2())) {
    throw ArgumentError("operator is not invariant under permutations of the non-source sites");
  }
  return v;
}

OperatorVector SymmetricSector::expand(const Eigen::VectorXd& v) const {
  if (n_ > 14) throw CapacityError("symmetric sector expansion", n_, 14);
  OperatorVector out(n_);
  for (std::size_t o = 0; o < dim(); ++o) {
    const double c = v(static_cast<Eigen::Index>(o));
    if (c == 0.0) continue;
    const Orbit& orb = orbits_[o];
    const double each = c * std::exp(-0.5 * orb.log_size);
    if (std::abs(each) < kPruneTolerance) continue;
    const PauliString src = PauliString::single(n_, 0, orb.source);
    // assign letters to sites 1..n-1 with the orbit's counts
    std::uint64_t x = src.x_mask(), z = src.z_mask();
    int left[4] = {static_cast<int>(n_) - 1 - orb.nx - orb.ny - orb.nz, orb.nx, orb.ny, orb.nz};
    auto rec = [&](auto&& self, std::size_t site) -> void {
      if (site == n_) {
        out.add(PauliKey{x, z}, each);
        return;
      }
      for (int l = 0; l < 4; ++l) {
        if (left[l] == 0) continue;
        --left[l];
        const std::uint64_t bit = 1ULL << site;
        const bool bx = l == 1 || l == 2, bz = l == 2 || l == 3;
        if (bx) x |= bit;
        if (bz) z |= bit;
        self(self, site + 1);
        x &= ~bit;
        z &= ~bit;
        ++left[l];
      }
    };
    rec(rec, 1);
  }
  out.set_hermitian_flag(true);
  return out;
}

double SymmetricSector::average_size(const Eigen::VectorXd& v) const {
  double s = 0.0;
  for (std::size_t o = 0; o < dim(); ++o) {
    const double c = v(static_cast<Eigen::Index>(o));
    s += c * c * orbits_[o].size();
  }
  return s;
}

AntisymmetricPropagator::AntisymmetricPropagator(const Eigen::MatrixXd& A) {
  Eigen::MatrixXd S = -(A * A);
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw IntegrationError("eigendecomposition of -A^2 failed");
  W_ = es.eigenvectors();
  omega_ = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  AW_ = A * W_;
}

Eigen::VectorXd AntisymmetricPropagator::apply(const Eigen::VectorXd& v, double t) const {
  const Eigen::VectorXd u = W_.transpose() * v;
  Eigen::VectorXd c(u.size()), s(u.size());
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    const double w = omega_(k), wt = w * t;
    c(k) = std::cos(wt) * u(k);
    s(k) = (std::abs(wt) < 1e-8 ? t * (1.0 - wt * wt / 6.0) : std::sin(wt) / w) * u(k);
  }
  return W_ * c + AW_ * s;
}

bool schedule_is_symmetric(const Schedule& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](const TimedHamiltonian& seg) { return SymmetricSector::is_symmetric(seg.H); });
}

SymmetricEvolver::SymmetricEvolver(const Schedule& schedule) : total_(opgrowth::total_time(schedule)) {
  if (schedule.empty()) throw ArgumentError("symmetric evolver: empty schedule");
  for (const auto& seg : schedule) {
    auto sec = SymmetricSector::build(seg.H);
    if (!sec) throw ArgumentError("symmetric evolver: segment Hamiltonian is not permutation symmetric");
    props_.emplace_back(sec->generator());
    sectors_.push_back(std::move(*sec));
    durations_.push_back(seg.duration);
  }
}

Eigen::VectorXd SymmetricEvolver::evolve(const Eigen::VectorXd& v0, double t) const {
  if (!(t >= 0.0) || t > total_ * (1 + 1e-12) + 1e-12) throw ArgumentError("symmetric evolver: time outside schedule");
  Eigen::VectorXd v = v0;
  double remaining = t;
  for (std::size_t k = 0; k < props_.size() && remaining > 0.0; ++k) {
    const double tau = std::min(durations_[k], remaining);
    v = props_[k].apply(v, tau);
    remaining -= tau;
  }
  return v;
}

EvolutionResult evolve_symmetric(const Schedule& s, const OperatorVector& A0, double t) {
  SymmetricEvolver ev(s);
  const Eigen::VectorXd v = ev.evolve(ev.sector().coordinates(A0), t);
  EvolutionResult r{ev.sector().expand(v), Backend::Symmetric, {}, 0.0};
  r.stats.steps = s.size();
  r.op.set_hermitian_flag(A0.hermitian_flag());
  r.norm_drift = std::abs(v.squaredNorm() - A0.norm2());
  return r;
}

}  // namespace opgrowth
