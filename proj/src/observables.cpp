#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "opgrowth/errors.hpp"
#include "opgrowth/evolution.hpp"

namespace opgrowth {

std::vector<OtocSample> otoc_scan(const Schedule& s, std::size_t n_sites, std::size_t i, std::size_t j,
                                  const std::vector<double>& times, std::size_t dense_limit) {
  if (i >= n_sites || j >= n_sites) throw ArgumentError("otoc: site out of range");
  auto sites = mask_sites(schedule_support(s) | (1ULL << i) | (1ULL << j));
  DenseEvolver ev(s, sites, dense_limit);
  const OperatorVector xi = OperatorVector::single_site(n_sites, i, Letter::X);
  const CMatrix xj = to_dense(OperatorVector::single_site(n_sites, j, Letter::X), sites);
  const auto evolved = ev.evolve_grid(to_dense(xi, sites), times);
  const double dim = static_cast<double>(xj.rows());
  std::vector<OtocSample> out;
  out.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const CMatrix& xt = evolved[k];
    const CMatrix c = xt * xj - xj * xt;
    const double val = (c * c).trace().real() / dim;
    const double bound = 4.0 * project_sites(from_dense(xt, sites, n_sites), {j}).norm2();
    out.push_back({times[k], val, bound});
  }
  return out;
}

double otoc(const HamiltonianSpec& spec, std::size_t i, std::size_t j, double t) {
  return otoc_scan(make_schedule(spec), spec.n_sites(), i, j, {t}).front().otoc;
}

SizeForm size_form_from_ops(const OperatorVector& ox, const OperatorVector& oy, const OperatorVector& oz) {
  return size_form_complex(ox, oy, oz).real();
}

Eigen::Matrix3cd size_form_complex(const OperatorVector& ox, const OperatorVector& oy, const OperatorVector& oz) {
  std::unordered_map<PauliKey, std::array<Complex, 3>, PauliKeyHash> joint;
  const OperatorVector* ops[3] = {&ox, &oy, &oz};
  for (int a = 0; a < 3; ++a) {
    for (const auto& [k, c] : ops[a]->terms()) joint[k][a] = c;
  }
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  for (const auto& [k, c] : joint) {
    const double size = __builtin_popcountll(k.x | k.z);
    if (size == 0) continue;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) m(a, b) += size * std::conj(c[a]) * c[b];
  }
  return m;
}

double sup_size(const SizeForm& m, SupMode mode) {
  switch (mode) {
    case SupMode::Traceless: {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
      return es.eigenvalues()(2);
    }
    case SupMode::Complex: {
      Eigen::Matrix3cd c = m.cast<Complex>();
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(0.5 * (c + c.adjoint()), Eigen::EigenvaluesOnly);
      return es.eigenvalues()(2);
    }
    case SupMode::WithIdentity: {
      // the identity has size zero and never mixes with the traceless part
      Eigen::Matrix4d w = Eigen::Matrix4d::Zero();
      w.bottomRightCorner<3, 3>() = 0.5 * (m + m.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(w, Eigen::EigenvaluesOnly);
      return es.eigenvalues()(3);
    }
  }
  return 0.0;
}

Backend choose_backend(const Schedule& s, std::size_t n_sites, std::size_t dense_limit) {
  if (schedule_is_symmetric(s)) return Backend::Symmetric;
  if (n_sites <= dense_limit) return Backend::Dense;
  return Backend::Superop;
}

SizeFormEvaluator::SizeFormEvaluator(const Schedule& s, std::size_t n_sites, Backend backend, std::size_t dense_limit)
    : schedule_(s), n_(n_sites), backend_(backend), dense_limit_(dense_limit) {
  if (backend_ == Backend::Symmetric) sym_.emplace(schedule_);
  if (backend_ == Backend::Dense && n_ > dense_limit_) throw CapacityError("dense size form", n_, dense_limit_);
  if (backend_ == Backend::Superop && n_ > kMaxSuperopSizeForm) throw CapacityError("superop size form", n_, kMaxSuperopSizeForm);
}

std::vector<SizeForm> SizeFormEvaluator::form_grid(std::size_t i, const std::vector<double>& times) const {
  if (i >= n_) throw ArgumentError("size form: source site out of range");
  std::vector<SizeForm> out;
  out.reserve(times.size());
  switch (backend_) {
    case Backend::Symmetric: {
      // every site is equivalent, so the source is taken to be site 0
      const SymmetricSector& sec = sym_->sector();
      Eigen::VectorXd sizes(static_cast<Eigen::Index>(sec.dim()));
      for (std::size_t o = 0; o < sec.dim(); ++o) sizes(static_cast<Eigen::Index>(o)) = sec.orbits()[o].size();
      const Eigen::VectorXd v0[3] = {sec.source_pauli(Letter::X), sec.source_pauli(Letter::Y), sec.source_pauli(Letter::Z)};
      for (double t : times) {
        Eigen::Matrix<double, Eigen::Dynamic, 3> V(static_cast<Eigen::Index>(sec.dim()), 3);
        for (int a = 0; a < 3; ++a) V.col(a) = sym_->evolve(v0[a], t);
        out.push_back(V.transpose() * sizes.asDiagonal() * V);
      }
      break;
    }
    case Backend::Dense: {
      auto sites = all_sites(n_);
      DenseEvolver ev(schedule_, sites, dense_limit_);
      // chunks bound the number of 2^n x 2^n matrices held at once
      constexpr std::size_t kChunk = 16;
      for (std::size_t start = 0; start < times.size(); start += kChunk) {
        const std::vector<double> part(times.begin() + static_cast<std::ptrdiff_t>(start),
                                       times.begin() + static_cast<std::ptrdiff_t>(std::min(times.size(), start + kChunk)));
        std::vector<std::vector<CMatrix>> mats;
        for (Letter l : kAxes) mats.push_back(ev.evolve_grid(to_dense(OperatorVector::single_site(n_, i, l), sites), part));
        for (std::size_t k = 0; k < part.size(); ++k) {
          out.push_back(size_form_from_ops(from_dense(mats[0][k], sites, n_), from_dense(mats[1][k], sites, n_),
                                           from_dense(mats[2][k], sites, n_)));
        }
      }
      break;
    }
    case Backend::Superop: {
      for (double t : times) {
        OperatorVector ops[3] = {OperatorVector(n_), OperatorVector(n_), OperatorVector(n_)};
        for (int a = 0; a < 3; ++a) ops[a] = evolve_superop(schedule_, OperatorVector::single_site(n_, i, kAxes[a]), t).op;
        out.push_back(size_form_from_ops(ops[0], ops[1], ops[2]));
      }
      break;
    }
  }
  return out;
}

SizeForm SizeFormEvaluator::form(std::size_t i, double t) const { return form_grid(i, {t}).front(); }

SizeForm size_quadratic_form(const HamiltonianSpec& spec, std::size_t i, double t) {
  const Schedule s = make_schedule(spec);
  return SizeFormEvaluator(s, spec.n_sites(), spec.n_sites() <= kDefaultDenseLimit ? Backend::Dense : Backend::Superop)
      .form(i, t);
}

ScramblingResult scrambling_time(const SizeFormEvaluator& eval, const ScramblingOptions& opt) {
  if (!(opt.a > 0.0 && opt.a < 1.0)) throw ArgumentError("scrambling_time: a must lie in (0, 1)");
  if (!(opt.dt > 0.0) || !(opt.t_max > 0.0)) throw ArgumentError("scrambling_time: dt and t_max must be positive");
  std::vector<std::size_t> sources = opt.sources;
  if (sources.empty()) {
    if (eval.symmetric()) {
      sources = {0};
    } else {
      for (std::size_t i = 0; i < eval.n_sites(); ++i) sources.push_back(i);
    }
  }
  if (opt.t_max > eval.total_time() * (1 + 1e-12)) throw ArgumentError("scrambling_time: t_max exceeds the schedule length");
  const double threshold = opt.a * static_cast<double>(eval.n_sites());
  ScramblingResult r;
  const std::size_t steps = static_cast<std::size_t>(std::floor(opt.t_max / opt.dt + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) r.times.push_back(static_cast<double>(k) * opt.dt);
  r.sup_sizes.assign(r.times.size(), -1.0);
  std::vector<std::size_t> argmax(r.times.size(), sources.front());
  for (std::size_t i : sources) {
    const auto forms = eval.form_grid(i, r.times);
    for (std::size_t k = 0; k < forms.size(); ++k) {
      const double s = sup_size(forms[k]);
      if (s > r.sup_sizes[k]) {
        r.sup_sizes[k] = s;
        argmax[k] = i;
      }
    }
  }
  auto sup_at = [&](double t, std::size_t& which) {
    double best = -1.0;
    for (std::size_t i : sources) {
      const double s = sup_size(eval.form(i, t));
      if (s > best) {
        best = s;
        which = i;
      }
    }
    return best;
  };
  if (r.sup_sizes.front() > threshold) {
    r.reached = true;
    r.t_s = 0.0;
    r.source = argmax.front();
    r.crossings.push_back(0.0);
  }
  const double fine = opt.dt / opt.refine_ratio;
  for (std::size_t k = 1; k < r.times.size(); ++k) {
    if (!(r.sup_sizes[k - 1] <= threshold && r.sup_sizes[k] > threshold)) continue;
    double lo = r.times[k - 1], hi = r.times[k];
    std::size_t which = argmax[k];
    while (hi - lo > fine) {
      const double mid = 0.5 * (lo + hi);
      std::size_t w = which;
      if (sup_at(mid, w) > threshold) {
        hi = mid;
        which = w;
      } else {
        lo = mid;
      }
    }
    r.crossings.push_back(hi);
    if (!r.reached) {
      r.reached = true;
      r.t_s = hi;
      r.t_s_lower = lo;
      r.source = which;
    }
  }
  return r;
}

ScramblingResult scrambling_time(const HamiltonianSpec& spec, const ScramblingOptions& opt) {
  const Schedule s = make_schedule(spec);
  return scrambling_time(SizeFormEvaluator(s, spec.n_sites(), choose_backend(s, spec.n_sites())), opt);
}

}  // namespace opgrowth
