#pragma once

// Independent dense reference built from Kronecker products of 2x2 matrices.
// Site 0 is the least significant tensor factor.

#include <Eigen/Dense>
#include <random>

#include "opgrowth/pauli.hpp"

namespace oracle {

using opgrowth::Complex;
using Mat = Eigen::MatrixXcd;

inline Mat pauli2(opgrowth::Letter l) {
  Mat m(2, 2);
  const Complex i(0, 1);
  switch (l) {
    case opgrowth::Letter::I: m << 1, 0, 0, 1; break;
    case opgrowth::Letter::X: m << 0, 1, 1, 0; break;
    case opgrowth::Letter::Y: m << 0, -i, i, 0; break;
    case opgrowth::Letter::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

inline Mat string_matrix(const opgrowth::PauliString& p) {
  Mat m = Mat::Identity(1, 1);
  for (std::size_t s = p.n_sites(); s-- > 0;) m = kron(m, pauli2(p.letter(s)));
  return p.phase() * m;
}

inline Mat op_matrix(const opgrowth::OperatorVector& a) {
  const auto dim = Eigen::Index{1} << a.n_sites();
  Mat m = Mat::Zero(dim, dim);
  for (const auto& [k, c] : a.terms()) m += c * string_matrix(opgrowth::PauliString(a.n_sites(), k.x, k.z));
  return m;
}

inline Complex normalized_trace_inner(const Mat& a, const Mat& b) {
  return (a.adjoint() * b).trace() / static_cast<double>(a.rows());
}

inline opgrowth::OperatorVector random_operator(std::size_t n, std::size_t terms, std::mt19937_64& rng,
                                                bool hermitian = false) {
  std::uniform_int_distribution<std::uint64_t> mask(0, opgrowth::low_bits(n));
  std::normal_distribution<double> gauss;
  opgrowth::OperatorVector a(n);
  for (std::size_t t = 0; t < terms; ++t) {
    const Complex c = hermitian ? Complex(gauss(rng), 0) : Complex(gauss(rng), gauss(rng));
    a.add(opgrowth::PauliKey{mask(rng), mask(rng)}, c);
  }
  a.set_hermitian_flag(hermitian);
  return a;
}

inline void normalize(opgrowth::OperatorVector& a) { a *= 1.0 / std::sqrt(a.norm2()); }

}  // namespace oracle
