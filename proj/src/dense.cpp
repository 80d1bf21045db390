#include "opgrowth/dense.hpp"

#include <string>

#include "opgrowth/errors.hpp"

namespace opgrowth {

std::uint64_t compress_mask(std::uint64_t global, const std::vector<std::size_t>& sites) {
  std::uint64_t out = 0;
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if ((global >> sites[k]) & 1ULL) out |= 1ULL << k;
  }
  return out;
}

std::uint64_t expand_mask(std::uint64_t local, const std::vector<std::size_t>& sites) {
  std::uint64_t out = 0;
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if ((local >> k) & 1ULL) out |= 1ULL << sites[k];
  }
  return out;
}

std::vector<std::size_t> all_sites(std::size_t n) {
  std::vector<std::size_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

std::vector<std::size_t> mask_sites(std::uint64_t mask) {
  std::vector<std::size_t> s;
  for (; mask != 0; mask &= mask - 1) s.push_back(static_cast<std::size_t>(__builtin_ctzll(mask)));
  return s;
}

namespace {

void check_dense_size(std::size_t n) {
  if (n > 14) throw CapacityError("dense operator conversion", n, 14);
}

// In-place Walsh-Hadamard transform along a strided column of length 2^n.
void walsh_hadamard(std::vector<Complex>& v) {
  const std::size_t len = v.size();
  for (std::size_t h = 1; h < len; h <<= 1) {
    for (std::size_t i = 0; i < len; i += h << 1) {
      for (std::size_t j = i; j < i + h; ++j) {
        const Complex a = v[j], b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
    }
  }
}

}  // namespace

// sigma_{x,z} = i^{|x&z|} X^x Z^z has entries (n ^ x, n) = i^{|x&z|} (-1)^{z.n}.
CMatrix to_dense(const OperatorVector& op, const std::vector<std::size_t>& sites) {
  if (op.basis() != Basis::Pauli) throw ArgumentError("to_dense requires the Pauli basis");
  const std::size_t n = sites.size();
  check_dense_size(n);
  const std::uint64_t allowed = expand_mask(low_bits(n), sites);
  const std::size_t dim = std::size_t{1} << n;
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));

  if (op.term_count() * 4 < dim) {
    for (const auto& [k, c] : op.terms()) {
      if (((k.x | k.z) & ~allowed) != 0) throw DimensionError("to_dense: operator acts outside the site list");
      const std::uint64_t x = compress_mask(k.x, sites), z = compress_mask(k.z, sites);
      const Complex base = c * i_pow(__builtin_popcountll(x & z));
      for (std::size_t col = 0; col < dim; ++col) {
        const bool odd = __builtin_popcountll(z & col) & 1;
        m(static_cast<Eigen::Index>(col ^ x), static_cast<Eigen::Index>(col)) += odd ? -base : base;
      }
    }
    return m;
  }

  // Dense input: for each x, the z-coefficients transform to one diagonal.
  std::vector<std::vector<Complex>> by_x(dim);
  for (const auto& [k, c] : op.terms()) {
    if (((k.x | k.z) & ~allowed) != 0) throw DimensionError("to_dense: operator acts outside the site list");
    const std::uint64_t x = compress_mask(k.x, sites), z = compress_mask(k.z, sites);
    auto& v = by_x[x];
    if (v.empty()) v.assign(dim, Complex{});
    v[z] += c * i_pow(__builtin_popcountll(x & z));
  }
  for (std::size_t x = 0; x < dim; ++x) {
    auto& v = by_x[x];
    if (v.empty()) continue;
    walsh_hadamard(v);
    for (std::size_t col = 0; col < dim; ++col) {
      m(static_cast<Eigen::Index>(col ^ x), static_cast<Eigen::Index>(col)) += v[col];
    }
  }
  return m;
}

CMatrix to_dense(const OperatorVector& op) { return to_dense(op, all_sites(op.n_sites())); }

// c_{x,z} = 2^-n (-i)^{|x&z|} sum_n (-1)^{z.n} M(n ^ x, n)
OperatorVector from_dense(const CMatrix& m, const std::vector<std::size_t>& sites, std::size_t n_sites,
                          double prune_tol) {
  const std::size_t n = sites.size();
  check_dense_size(n);
  const std::size_t dim = std::size_t{1} << n;
  if (static_cast<std::size_t>(m.rows()) != dim || static_cast<std::size_t>(m.cols()) != dim) {
    throw DimensionError("from_dense: matrix dimension does not match 2^" + std::to_string(n));
  }
  OperatorVector out(n_sites);
  const double scale = 1.0 / static_cast<double>(dim);
  std::vector<Complex> v(dim);
  for (std::size_t x = 0; x < dim; ++x) {
    for (std::size_t col = 0; col < dim; ++col) {
      v[col] = m(static_cast<Eigen::Index>(col ^ x), static_cast<Eigen::Index>(col));
    }
    walsh_hadamard(v);
    const std::uint64_t gx = expand_mask(x, sites);
    for (std::size_t z = 0; z < dim; ++z) {
      const Complex c = v[z] * scale * i_pow(-__builtin_popcountll(x & z));
      if (std::abs(c) >= prune_tol) out.add(PauliKey{gx, expand_mask(z, sites)}, c);
    }
  }
  out.set_hermitian_flag(out.is_hermitian());
  return out;
}

OperatorVector from_dense(const CMatrix& m, std::size_t n_sites) {
  return from_dense(m, all_sites(n_sites), n_sites);
}

}  // namespace opgrowth
