#pragma once

// Conversions between sparse Pauli coordinates and 2^n x 2^n matrices.
// Basis index bit k is the computational state of site k.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "opgrowth/pauli.hpp"

namespace opgrowth {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr std::size_t kDefaultDenseLimit = 12;

// Sites are relabelled: local site k is global site sites[k].
std::uint64_t compress_mask(std::uint64_t global, const std::vector<std::size_t>& sites);
std::uint64_t expand_mask(std::uint64_t local, const std::vector<std::size_t>& sites);

// Dense matrix of `op` restricted to `sites`; strings touching other sites are
// an error. Pauli basis only.
CMatrix to_dense(const OperatorVector& op, const std::vector<std::size_t>& sites);
CMatrix to_dense(const OperatorVector& op);

// Pauli coordinates of a dense matrix on `sites`, embedded into n_sites.
OperatorVector from_dense(const CMatrix& m, const std::vector<std::size_t>& sites, std::size_t n_sites,
                          double prune_tol = kPruneTolerance);
OperatorVector from_dense(const CMatrix& m, std::size_t n_sites);

std::vector<std::size_t> all_sites(std::size_t n);
std::vector<std::size_t> mask_sites(std::uint64_t mask);

}  // namespace opgrowth
