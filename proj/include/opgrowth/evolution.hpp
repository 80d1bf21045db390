#pragma once

// Heisenberg-picture evolution of operators under a piecewise-constant
// Hamiltonian, O(t) = e^{iH_k s_k} ... e^{iH_1 s_1} O e^{-iH_1 s_1} ... e^{-iH_k s_k},
// i.e. d/dt O = i[H(t), O] with the first segment acting first.
//
// Three backends:
//   dense      exact segment exponentials on 2^n Hilbert space (n = active sites)
//   superop    adaptive Dormand-Prince integration of Pauli coefficients
//   symmetric  exact exponentials on the permutation-symmetric operator sector,
//              for Hamiltonians invariant under every site permutation

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "opgrowth/dense.hpp"
#include "opgrowth/hamiltonian.hpp"
#include "opgrowth/pauli.hpp"

namespace opgrowth {

struct TimedHamiltonian {
  OperatorVector H;
  double duration;
};
using Schedule = std::vector<TimedHamiltonian>;

Schedule make_schedule(const HamiltonianSpec& spec);
// Generator of e^{L_<D t}: only the H_<D part of each segment.
Schedule restricted_schedule(const HamiltonianSpec& spec, std::size_t v, int D);
double total_time(const Schedule& s);
std::uint64_t schedule_support(const Schedule& s);

enum class Backend { Dense, Superop, Symmetric };
std::string backend_name(Backend b);

struct StepStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  double max_error = 0.0;  // largest accepted local error estimate
};

struct EvolutionResult {
  OperatorVector op;
  Backend backend;
  StepStats stats;
  double norm_drift = 0.0;  // |norm2(op) - norm2(A0)|
};

inline constexpr double kNormTolerance = 1e-8;
inline constexpr double kDefaultOdeTol = 1e-10;
inline constexpr std::size_t kDefaultSuperopDenseLimit = 8;

// Propagator for one time-independent Hermitian matrix, via its
// eigendecomposition H = V diag(E) V^dagger.
class HeisenbergPropagator {
 public:
  explicit HeisenbergPropagator(const CMatrix& H);

  // Operator written in the eigenbasis, then conjugated by e^{iEt}.
  CMatrix to_eigenbasis(const CMatrix& O) const { return V_.adjoint() * O * V_; }
  CMatrix from_eigenbasis(const CMatrix& O) const { return V_ * O * V_.adjoint(); }
  CMatrix rotate_eigenbasis(const CMatrix& O_eig, double t) const;
  CMatrix apply(const CMatrix& O, double t) const { return from_eigenbasis(rotate_eigenbasis(to_eigenbasis(O), t)); }

 private:
  CMatrix V_;
  Eigen::VectorXd E_;
};

// Dense evolution restricted to a fixed site list. Segment propagators are
// built once and reused.
class DenseEvolver {
 public:
  DenseEvolver(const Schedule& schedule, std::vector<std::size_t> sites, std::size_t dense_limit = kDefaultDenseLimit);

  const std::vector<std::size_t>& sites() const { return sites_; }
  double total_time() const { return total_; }

  CMatrix evolve(const CMatrix& O0, double t) const;
  // times must be ascending; one matrix per time.
  std::vector<CMatrix> evolve_grid(const CMatrix& O0, const std::vector<double>& times) const;

 private:
  std::vector<std::size_t> sites_;
  std::vector<HeisenbergPropagator> props_;
  std::vector<double> durations_;
  double total_;
};

// Sites that can ever carry weight: support of H over all segments plus A0.
std::vector<std::size_t> active_sites(const Schedule& s, const OperatorVector& A0);

EvolutionResult evolve_dense(const Schedule& s, const OperatorVector& A0, double t,
                             std::size_t dense_limit = kDefaultDenseLimit);
EvolutionResult evolve_dense(const HamiltonianSpec& spec, const OperatorVector& A0, double t,
                             std::size_t dense_limit = kDefaultDenseLimit);

struct SuperopOptions {
  double tol = kDefaultOdeTol;
  std::size_t dense_limit = kDefaultSuperopDenseLimit;  // dense 4^N vector up to here, sparse above
  std::size_t max_steps = 2'000'000;
  double prune = 1e-15;  // sparse path only
};

EvolutionResult evolve_superop(const Schedule& s, const OperatorVector& A0, double t, const SuperopOptions& opt = {});
EvolutionResult evolve_superop(const HamiltonianSpec& spec, const OperatorVector& A0, double t,
                               const SuperopOptions& opt = {});

// i[H, A] in Pauli coordinates.
OperatorVector liouvillian(const OperatorVector& H, const OperatorVector& A);

// Operator sector spanned by sums over permutations of sites other than a
// source site. Orbits are labelled by the source letter and the counts of X,
// Y, Z on the remaining n-1 sites; basis vectors are normalized orbit sums.
class SymmetricSector {
 public:
  struct Orbit {
    Letter source;
    int nx, ny, nz;
    double log_size;  // log of the number of strings in the orbit
    int size() const { return (source == Letter::I ? 0 : 1) + nx + ny + nz; }
  };

  // Returns nullopt unless H is invariant under every permutation of sites.
  static std::optional<SymmetricSector> build(const OperatorVector& H, double tol = 1e-12);
  static bool is_symmetric(const OperatorVector& H, double tol = 1e-12);

  std::size_t n_sites() const { return n_; }
  std::size_t dim() const { return orbits_.size(); }
  const std::vector<Orbit>& orbits() const { return orbits_; }
  const Eigen::MatrixXd& generator() const { return A_; }  // real antisymmetric

  // Coordinates of a single-site Pauli on the source site (site 0).
  Eigen::VectorXd source_pauli(Letter l) const;
  // Projection of a general operator; throws unless it is sector-invariant.
  Eigen::VectorXd coordinates(const OperatorVector& A, double tol = 1e-12) const;
  OperatorVector expand(const Eigen::VectorXd& v) const;
  std::size_t index(Letter source, int nx, int ny, int nz) const;
  double average_size(const Eigen::VectorXd& v) const;

 private:
  std::size_t n_ = 0;
  std::vector<Orbit> orbits_;
  std::vector<int> lookup_;
  Eigen::MatrixXd A_;
};

// e^{A t} for a real antisymmetric A via the eigendecomposition of -A^2.
class AntisymmetricPropagator {
 public:
  explicit AntisymmetricPropagator(const Eigen::MatrixXd& A);
  Eigen::VectorXd apply(const Eigen::VectorXd& v, double t) const;

 private:
  Eigen::MatrixXd W_;
  Eigen::MatrixXd AW_;
  Eigen::VectorXd omega_;
};

class SymmetricEvolver {
 public:
  // Throws ArgumentError if any segment is not permutation symmetric.
  explicit SymmetricEvolver(const Schedule& schedule);
  const SymmetricSector& sector() const { return sectors_.front(); }
  Eigen::VectorXd evolve(const Eigen::VectorXd& v0, double t) const;
  double total_time() const { return total_; }

 private:
  std::vector<SymmetricSector> sectors_;
  std::vector<AntisymmetricPropagator> props_;
  std::vector<double> durations_;
  double total_;
};

bool schedule_is_symmetric(const Schedule& s);

EvolutionResult evolve_symmetric(const Schedule& s, const OperatorVector& A0, double t);

// 2^-N tr([X_i(t), X_j]^2), computed from the dense evolved matrix.
struct OtocSample {
  double t;
  double otoc;
  double bound;  // 4 (X_i(t)|P_j|X_i(t))
};
double otoc(const HamiltonianSpec& spec, std::size_t i, std::size_t j, double t);
std::vector<OtocSample> otoc_scan(const Schedule& s, std::size_t n_sites, std::size_t i, std::size_t j,
                                  const std::vector<double>& times, std::size_t dense_limit = kDefaultDenseLimit);

enum class SupMode { Traceless, Complex, WithIdentity };

// M_AB = sum_j (X^A_i(t)|P_j|X^B_i(t)) for A,B in {X,Y,Z}.
using SizeForm = Eigen::Matrix3d;
double sup_size(const SizeForm& m, SupMode mode = SupMode::Traceless);

inline constexpr std::size_t kMaxSuperopSizeForm = 12;

// Evaluates size forms at arbitrary times with one backend.
class SizeFormEvaluator {
 public:
  SizeFormEvaluator(const Schedule& s, std::size_t n_sites, Backend backend,
                    std::size_t dense_limit = kDefaultDenseLimit);
  Backend backend() const { return backend_; }
  std::size_t n_sites() const { return n_; }
  bool symmetric() const { return sym_.has_value(); }
  double total_time() const { return opgrowth::total_time(schedule_); }

  SizeForm form(std::size_t i, double t) const;
  std::vector<SizeForm> form_grid(std::size_t i, const std::vector<double>& times) const;

 private:
  Schedule schedule_;
  std::size_t n_;
  Backend backend_;
  std::size_t dense_limit_;
  std::optional<SymmetricEvolver> sym_;
};

// Size form from Pauli coefficient vectors of X_i(t), Y_i(t), Z_i(t).
SizeForm size_form_from_ops(const OperatorVector& ox, const OperatorVector& oy, const OperatorVector& oz);
// Complex-coefficient version: Hermitian, equal to the real form when the
// coefficients are real.
Eigen::Matrix3cd size_form_complex(const OperatorVector& ox, const OperatorVector& oy, const OperatorVector& oz);

SizeForm size_quadratic_form(const HamiltonianSpec& spec, std::size_t i, double t);

struct ScramblingOptions {
  double a = 0.5;
  double t_max = 10.0;
  double dt = 0.05;
  double refine_ratio = 100.0;  // bisection stops at dt / refine_ratio
  std::vector<std::size_t> sources;  // empty: all sites (or site 0 if symmetric)
};

struct ScramblingResult {
  bool reached = false;
  double t_s = 0.0;        // first refined time above aN
  double t_s_lower = 0.0;  // last refined time at or below aN; t_s - t_s_lower <= dt / refine_ratio
  std::size_t source = 0;
  std::vector<double> crossings;  // every upward crossing of aN, refined
  std::vector<double> times;
  std::vector<double> sup_sizes;  // max over sources on the grid
};

ScramblingResult scrambling_time(const SizeFormEvaluator& eval, const ScramblingOptions& opt);
ScramblingResult scrambling_time(const HamiltonianSpec& spec, const ScramblingOptions& opt);

// Picks the symmetric backend when available, dense up to the dense limit,
// superop otherwise.
Backend choose_backend(const Schedule& s, std::size_t n_sites, std::size_t dense_limit = kDefaultDenseLimit);

}  // namespace opgrowth
