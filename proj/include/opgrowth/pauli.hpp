#pragma once

// Pauli strings on up to 64 qubits and sparse linear combinations of them.
//
// A string is stored as two bit masks: bit i of x_mask is set iff site i
// carries X or Y, bit i of z_mask iff it carries Z or Y. The global factor is
// i^phase_power. OperatorVector keys are always phase-free; phases are folded
// into the complex coefficient on insertion.
//
// Operator space carries the normalized trace inner product
// (A|B) = 2^-N tr(A^dagger B), under which Hermitian Pauli strings are
// orthonormal. OperatorVector coefficients are coordinates in that basis, so
// norms and inner products never touch a 2^N matrix.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace opgrowth {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxSites = 64;
inline constexpr double kPruneTolerance = 1e-14;

enum class Letter : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

// Site letters of the protocol basis {1, X+, X-, Z} with sqrt(2) X^+- = X +- iY.
// They reuse the (x, z) bit encoding: X+ = (1,0), X- = (1,1), Z = (0,1).
enum class XpmLetter : std::uint8_t { I = 0, Plus = 1, Minus = 2, Z = 3 };

struct PauliKey {
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  friend bool operator==(const PauliKey&, const PauliKey&) = default;
  friend auto operator<=>(const PauliKey&, const PauliKey&) = default;
};

struct PauliKeyHash {
  std::size_t operator()(const PauliKey& k) const noexcept {
    std::uint64_t h = k.x * 0x9E3779B97F4A7C15ULL ^ (k.z + 0x632BE59BD9B4E019ULL + (k.x << 6) + (k.x >> 2));
    h ^= h >> 31;
    h *= 0xBF58476D1CE4E5B9ULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

inline std::uint64_t low_bits(std::size_t n) { return n >= 64 ? ~0ULL : ((1ULL << n) - 1ULL); }

inline Letter letter_from_bits(bool x, bool z) {
  if (x && z) return Letter::Y;
  if (x) return Letter::X;
  if (z) return Letter::Z;
  return Letter::I;
}

// Exponent k such that sigma_p sigma_q = i^k sigma_{p xor q} for phase-free
// Hermitian strings.
int product_phase(PauliKey p, PauliKey q);

inline bool anticommute(PauliKey p, PauliKey q) {
  return (__builtin_popcountll((p.x & q.z) ^ (p.z & q.x)) & 1) != 0;
}

inline Complex i_pow(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

class PauliString {
 public:
  explicit PauliString(std::size_t n_sites);
  PauliString(std::size_t n_sites, std::uint64_t x_mask, std::uint64_t z_mask, int phase_power = 0);

  // Letters listed site 0 first, e.g. "XIZ"; an optional "+", "-", "i" or "-i"
  // prefix sets the phase.
  static PauliString parse(std::string_view text);
  static PauliString single(std::size_t n_sites, std::size_t site, Letter letter);

  std::size_t n_sites() const { return n_sites_; }
  std::uint64_t x_mask() const { return x_; }
  std::uint64_t z_mask() const { return z_; }
  int phase_power() const { return phase_; }
  PauliKey key() const { return {x_, z_}; }
  Complex phase() const { return i_pow(phase_); }

  Letter letter(std::size_t site) const;
  std::size_t size() const { return static_cast<std::size_t>(__builtin_popcountll(x_ | z_)); }
  std::vector<std::size_t> support() const;
  bool commutes_with(const PauliString& other) const;
  std::string str() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  std::size_t n_sites_;
  std::uint64_t x_;
  std::uint64_t z_;
  int phase_;
};

PauliString mul(const PauliString& p, const PauliString& q);

enum class Basis { Pauli, Xpm };

class OperatorVector {
 public:
  using Map = std::unordered_map<PauliKey, Complex, PauliKeyHash>;

  explicit OperatorVector(std::size_t n_sites, Basis basis = Basis::Pauli);

  static OperatorVector from_string(const PauliString& p, Complex coeff = 1.0);
  static OperatorVector single_site(std::size_t n_sites, std::size_t site, Letter letter, Complex coeff = 1.0);
  static OperatorVector identity(std::size_t n_sites);

  std::size_t n_sites() const { return n_sites_; }
  Basis basis() const { return basis_; }

  // Hermiticity is a tracked flag; is_hermitian() checks it from coefficients.
  bool hermitian_flag() const { return hermitian_; }
  void set_hermitian_flag(bool h) { hermitian_ = h; }
  bool is_hermitian(double tol = 1e-12) const;

  void add(PauliKey key, Complex coeff);
  void add(const PauliString& p, Complex coeff);

  Complex coeff(PauliKey key) const;
  std::size_t term_count() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const Map& terms() const { return terms_; }
  std::vector<std::pair<PauliKey, Complex>> sorted_terms() const;

  double norm2() const;
  std::uint64_t support_mask() const;
  void prune(double tol = kPruneTolerance);

  OperatorVector& operator+=(const OperatorVector& other);
  OperatorVector& operator-=(const OperatorVector& other);
  OperatorVector& operator*=(Complex s);

  friend OperatorVector operator+(OperatorVector a, const OperatorVector& b) { return a += b; }
  friend OperatorVector operator-(OperatorVector a, const OperatorVector& b) { return a -= b; }
  friend OperatorVector operator*(Complex s, OperatorVector a) { return a *= s; }
  friend OperatorVector operator*(OperatorVector a, Complex s) { return a *= s; }

 private:
  void check_compatible(const OperatorVector& other, const char* op) const;

  std::size_t n_sites_;
  Basis basis_;
  bool hermitian_ = false;
  Map terms_;
};

struct SizeDistribution {
  std::vector<double> probs;  // probs[s] = (A|Q_s|A), s = 0..n_sites

  double total() const;
  double mean() const;
};

enum class NormPolicy { RequireNormalized, NormalizeFirst };

OperatorVector product(const OperatorVector& a, const OperatorVector& b);
OperatorVector commutator(const OperatorVector& a, const OperatorVector& b);
Complex inner_product(const OperatorVector& a, const OperatorVector& b);

std::uint64_t site_mask(const std::vector<std::size_t>& sites, std::size_t n_sites);

// P_S: strings acting non-trivially on at least one site of S.
OperatorVector project_sites(const OperatorVector& a, const std::vector<std::size_t>& sites);
OperatorVector project_sites_mask(const OperatorVector& a, std::uint64_t mask);
// Q_s: strings of size exactly s.
OperatorVector project_size(const OperatorVector& a, std::size_t s);

SizeDistribution size_distribution(const OperatorVector& a);
double average_size(const OperatorVector& a, NormPolicy policy = NormPolicy::RequireNormalized);

OperatorVector to_xpm(const OperatorVector& a);
OperatorVector from_xpm(const OperatorVector& a);

}  // namespace opgrowth
