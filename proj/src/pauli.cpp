#include "opgrowth/pauli.hpp"

#include <algorithm>
#include <cmath>

#include "opgrowth/errors.hpp"

namespace opgrowth {

namespace {

void check_sites(std::size_t n) {
  if (n == 0 || n > kMaxSites) {
    throw ArgumentError("n_sites must be in [1, 64], got " + std::to_string(n));
  }
}

int popcount(std::uint64_t v) { return __builtin_popcountll(v); }

}  // namespace

int product_phase(PauliKey p, PauliKey q) {
  const std::uint64_t py = p.x & p.z, px = p.x & ~p.z, pz = ~p.x & p.z;
  const std::uint64_t qy = q.x & q.z, qx = q.x & ~q.z, qz = ~q.x & q.z;
  // XY = iZ, YZ = iX, ZX = iY and the reversed orders carry -i.
  const int plus = popcount((px & qy) | (py & qz) | (pz & qx));
  const int minus = popcount((py & qx) | (pz & qy) | (px & qz));
  return ((plus - minus) % 4 + 4) % 4;
}

PauliString::PauliString(std::size_t n_sites) : PauliString(n_sites, 0, 0, 0) {}

PauliString::PauliString(std::size_t n_sites, std::uint64_t x_mask, std::uint64_t z_mask, int phase_power)
    : n_sites_(n_sites), x_(x_mask), z_(z_mask), phase_(((phase_power % 4) + 4) % 4) {
  check_sites(n_sites);
  if (((x_ | z_) & ~low_bits(n_sites)) != 0) {
    throw ArgumentError("Pauli masks exceed n_sites");
  }
}

PauliString PauliString::parse(std::string_view text) {
  int phase = 0;
  if (text.starts_with("-i")) {
    phase = 3;
    text.remove_prefix(2);
  } else if (text.starts_with("+i") || text.starts_with("i")) {
    phase = 1;
    text.remove_prefix(text.front() == 'i' ? 1 : 2);
  } else if (text.starts_with("-")) {
    phase = 2;
    text.remove_prefix(1);
  } else if (text.starts_with("+")) {
    text.remove_prefix(1);
  }
  std::uint64_t x = 0, z = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const std::uint64_t bit = 1ULL << i;
    switch (text[i]) {
      case 'I': case '_': case '1': break;
      case 'X': x |= bit; break;
      case 'Y': x |= bit; z |= bit; break;
      case 'Z': z |= bit; break;
      default: throw ArgumentError("bad Pauli letter '" + std::string(1, text[i]) + "'");
    }
  }
  return PauliString(text.size(), x, z, phase);
}

PauliString PauliString::single(std::size_t n_sites, std::size_t site, Letter letter) {
  if (site >= n_sites) throw ArgumentError("site index out of range");
  const std::uint64_t bit = 1ULL << site;
  const bool x = letter == Letter::X || letter == Letter::Y;
  const bool z = letter == Letter::Z || letter == Letter::Y;
  return PauliString(n_sites, x ? bit : 0, z ? bit : 0, 0);
}

Letter PauliString::letter(std::size_t site) const {
  return letter_from_bits((x_ >> site) & 1ULL, (z_ >> site) & 1ULL);
}

std::vector<std::size_t> PauliString::support() const {
  std::vector<std::size_t> out;
  for (std::uint64_t m = x_ | z_; m != 0; m &= m - 1) {
    out.push_back(static_cast<std::size_t>(__builtin_ctzll(m)));
  }
  return out;
}

bool PauliString::commutes_with(const PauliString& other) const {
  if (other.n_sites_ != n_sites_) throw DimensionError("commutes_with: site count mismatch");
  return !anticommute(key(), other.key());
}

std::string PauliString::str() const {
  static constexpr const char* kPhase[] = {"", "i", "-", "-i"};
  std::string out = kPhase[phase_];
  for (std::size_t i = 0; i < n_sites_; ++i) {
    out += "IXYZ"[static_cast<int>(letter(i))];
  }
  return out;
}

PauliString mul(const PauliString& p, const PauliString& q) {
  if (p.n_sites() != q.n_sites()) throw DimensionError("mul: site count mismatch");
  const int k = p.phase_power() + q.phase_power() + product_phase(p.key(), q.key());
  return PauliString(p.n_sites(), p.x_mask() ^ q.x_mask(), p.z_mask() ^ q.z_mask(), k);
}

// ---------------------------------------------------------------------------

OperatorVector::OperatorVector(std::size_t n_sites, Basis basis) : n_sites_(n_sites), basis_(basis) {
  check_sites(n_sites);
}

OperatorVector OperatorVector::from_string(const PauliString& p, Complex coeff) {
  OperatorVector v(p.n_sites());
  v.add(p, coeff);
  v.hermitian_ = v.is_hermitian();
  return v;
}

OperatorVector OperatorVector::single_site(std::size_t n_sites, std::size_t site, Letter letter, Complex coeff) {
  return from_string(PauliString::single(n_sites, site, letter), coeff);
}

OperatorVector OperatorVector::identity(std::size_t n_sites) {
  OperatorVector v(n_sites);
  v.add(PauliKey{}, 1.0);
  v.hermitian_ = true;
  return v;
}

bool OperatorVector::is_hermitian(double tol) const {
  if (basis_ != Basis::Pauli) return false;
  return std::all_of(terms_.begin(), terms_.end(), [tol](const auto& kv) { return std::abs(kv.second.imag()) <= tol; });
}

void OperatorVector::add(PauliKey key, Complex coeff) {
  if (((key.x | key.z) & ~low_bits(n_sites_)) != 0) throw DimensionError("add: key exceeds n_sites");
  terms_[key] += coeff;
}

void OperatorVector::add(const PauliString& p, Complex coeff) {
  if (p.n_sites() != n_sites_) throw DimensionError("add: site count mismatch");
  terms_[p.key()] += coeff * p.phase();
}

Complex OperatorVector::coeff(PauliKey key) const {
  auto it = terms_.find(key);
  return it == terms_.end() ? Complex{} : it->second;
}

std::vector<std::pair<PauliKey, Complex>> OperatorVector::sorted_terms() const {
  std::vector<std::pair<PauliKey, Complex>> out(terms_.begin(), terms_.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

double OperatorVector::norm2() const {
  double s = 0.0;
  for (const auto& [k, c] : terms_) s += std::norm(c);
  return s;
}

std::uint64_t OperatorVector::support_mask() const {
  std::uint64_t m = 0;
  for (const auto& [k, c] : terms_) m |= k.x | k.z;
  return m;
}

void OperatorVector::prune(double tol) {
  std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) < tol; });
}

void OperatorVector::check_compatible(const OperatorVector& other, const char* op) const {
  if (other.n_sites_ != n_sites_) throw DimensionError(std::string(op) + ": site count mismatch");
  if (other.basis_ != basis_) throw DimensionError(std::string(op) + ": basis mismatch");
}

OperatorVector& OperatorVector::operator+=(const OperatorVector& other) {
  check_compatible(other, "operator+=");
  for (const auto& [k, c] : other.terms_) terms_[k] += c;
  hermitian_ = hermitian_ && other.hermitian_;
  prune();
  return *this;
}

OperatorVector& OperatorVector::operator-=(const OperatorVector& other) {
  check_compatible(other, "operator-=");
  for (const auto& [k, c] : other.terms_) terms_[k] -= c;
  hermitian_ = hermitian_ && other.hermitian_;
  prune();
  return *this;
}

OperatorVector& OperatorVector::operator*=(Complex s) {
  for (auto& [k, c] : terms_) c *= s;
  if (s.imag() != 0.0) hermitian_ = false;
  prune();
  return *this;
}

double SizeDistribution::total() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

double SizeDistribution::mean() const {
  double s = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) s += static_cast<double>(k) * probs[k];
  return s;
}

// ---------------------------------------------------------------------------

namespace {

void require_pauli(const OperatorVector& a, const char* op) {
  if (a.basis() != Basis::Pauli) throw ArgumentError(std::string(op) + " requires the Pauli basis");
}

void require_same(const OperatorVector& a, const OperatorVector& b, const char* op) {
  if (a.n_sites() != b.n_sites()) throw DimensionError(std::string(op) + ": site count mismatch");
  if (a.basis() != b.basis()) throw DimensionError(std::string(op) + ": basis mismatch");
}

}  // namespace

OperatorVector product(const OperatorVector& a, const OperatorVector& b) {
  require_same(a, b, "product");
  require_pauli(a, "product");
  OperatorVector out(a.n_sites());
  for (const auto& [ka, ca] : a.terms()) {
    for (const auto& [kb, cb] : b.terms()) {
      out.add(PauliKey{ka.x ^ kb.x, ka.z ^ kb.z}, ca * cb * i_pow(product_phase(ka, kb)));
    }
  }
  out.prune();
  return out;
}

OperatorVector commutator(const OperatorVector& a, const OperatorVector& b) {
  require_same(a, b, "commutator");
  require_pauli(a, "commutator");
  OperatorVector out(a.n_sites());
  for (const auto& [ka, ca] : a.terms()) {
    for (const auto& [kb, cb] : b.terms()) {
      if (!anticommute(ka, kb)) continue;
      out.add(PauliKey{ka.x ^ kb.x, ka.z ^ kb.z}, 2.0 * ca * cb * i_pow(product_phase(ka, kb)));
    }
  }
  out.prune();
  return out;
}

Complex inner_product(const OperatorVector& a, const OperatorVector& b) {
  require_same(a, b, "inner_product");
  Complex s{};
  if (a.term_count() <= b.term_count()) {
    for (const auto& [k, ca] : a.terms()) s += std::conj(ca) * b.coeff(k);
  } else {
    for (const auto& [k, cb] : b.terms()) s += std::conj(a.coeff(k)) * cb;
  }
  return s;
}

std::uint64_t site_mask(const std::vector<std::size_t>& sites, std::size_t n_sites) {
  std::uint64_t m = 0;
  for (std::size_t s : sites) {
    if (s >= n_sites) throw ArgumentError("site index " + std::to_string(s) + " out of range");
    m |= 1ULL << s;
  }
  return m;
}

OperatorVector project_sites_mask(const OperatorVector& a, std::uint64_t mask) {
  OperatorVector out(a.n_sites(), a.basis());
  for (const auto& [k, c] : a.terms()) {
    if (((k.x | k.z) & mask) != 0) out.add(k, c);
  }
  out.set_hermitian_flag(a.hermitian_flag());
  return out;
}

OperatorVector project_sites(const OperatorVector& a, const std::vector<std::size_t>& sites) {
  return project_sites_mask(a, site_mask(sites, a.n_sites()));
}

OperatorVector project_size(const OperatorVector& a, std::size_t s) {
  if (s > a.n_sites()) throw ArgumentError("project_size: s exceeds n_sites");
  OperatorVector out(a.n_sites(), a.basis());
  for (const auto& [k, c] : a.terms()) {
    if (static_cast<std::size_t>(popcount(k.x | k.z)) == s) out.add(k, c);
  }
  out.set_hermitian_flag(a.hermitian_flag());
  return out;
}

SizeDistribution size_distribution(const OperatorVector& a) {
  SizeDistribution d;
  d.probs.assign(a.n_sites() + 1, 0.0);
  for (const auto& [k, c] : a.terms()) d.probs[popcount(k.x | k.z)] += std::norm(c);
  return d;
}

double average_size(const OperatorVector& a, NormPolicy policy) {
  const double n2 = a.norm2();
  if (policy == NormPolicy::RequireNormalized && std::abs(n2 - 1.0) > 1e-10) {
    throw ArgumentError("average_size: operator is not normalized (norm^2 = " + std::to_string(n2) + ")");
  }
  if (n2 == 0.0) throw ArgumentError("average_size: zero operator");
  // Sum over sites j of (A|P_j|A), accumulated site by site.
  std::vector<double> per_site(a.n_sites(), 0.0);
  for (const auto& [k, c] : a.terms()) {
    const double w = std::norm(c);
    for (std::uint64_t m = k.x | k.z; m != 0; m &= m - 1) per_site[__builtin_ctzll(m)] += w;
  }
  double s = 0.0;
  for (double v : per_site) s += v;
  return policy == NormPolicy::NormalizeFirst ? s / n2 : s;
}

namespace {

// Sites with x set carry one of two letters; the z bit picks the second one
// (Y in the Pauli basis, X- in the protocol basis). table[in][out] is the
// single-site expansion coefficient.
OperatorVector change_basis(const OperatorVector& a, Basis target, const Complex (&table)[2][2]) {
  OperatorVector out(a.n_sites(), target);
  for (const auto& [k, c] : a.terms()) {
    const std::uint64_t x = k.x;
    const std::uint64_t z_rest = k.z & ~x;
    std::uint64_t sub = 0;
    while (true) {
      Complex coeff = c;
      for (std::uint64_t m = x; m != 0; m &= m - 1) {
        const std::uint64_t bit = m & (~m + 1);
        coeff *= table[(k.z & bit) ? 1 : 0][(sub & bit) ? 1 : 0];
      }
      out.add(PauliKey{x, z_rest | sub}, coeff);
      if (sub == x) break;
      sub = (sub - x) & x;
    }
  }
  out.prune();
  return out;
}

}  // namespace

OperatorVector to_xpm(const OperatorVector& a) {
  require_pauli(a, "to_xpm");
  const double r = 1.0 / std::sqrt(2.0);
  // X = (X+ + X-)/sqrt2, Y = -i (X+ - X-)/sqrt2
  static const Complex table[2][2] = {{Complex(r, 0), Complex(r, 0)}, {Complex(0, -r), Complex(0, r)}};
  return change_basis(a, Basis::Xpm, table);
}

OperatorVector from_xpm(const OperatorVector& a) {
  if (a.basis() != Basis::Xpm) throw ArgumentError("from_xpm requires the X+- basis");
  const double r = 1.0 / std::sqrt(2.0);
  // X+ = (X + iY)/sqrt2, X- = (X - iY)/sqrt2
  static const Complex table[2][2] = {{Complex(r, 0), Complex(0, r)}, {Complex(r, 0), Complex(0, -r)}};
  OperatorVector out = change_basis(a, Basis::Pauli, table);
  out.set_hermitian_flag(out.is_hermitian());
  return out;
}

}  // namespace opgrowth
