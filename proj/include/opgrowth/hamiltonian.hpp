#pragma once

// Two-body Hamiltonians with all-to-all couplings J (scaled by N^-alpha), graph
// couplings K on edges and single-site fields h, as a piecewise-constant
// schedule of segments.
//
// J and K are stored per ordered pair (i, j): J[(i,j)][A][B] multiplies
// X^A_i X^B_j. Materializing folds (i,j) and (j,i) into one Pauli string, so a
// preset that fills every ordered pair counts each unordered pair twice.
// The presets below fill only i < j.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opgrowth/graph.hpp"
#include "opgrowth/pauli.hpp"

namespace opgrowth {

using Coupling = std::array<std::array<double, 3>, 3>;  // [A][B], A,B in {X,Y,Z}
using Field = std::array<double, 3>;
using SitePair = std::pair<std::size_t, std::size_t>;

inline constexpr Letter kAxes[3] = {Letter::X, Letter::Y, Letter::Z};

struct Segment {
  double duration = 1.0;
  std::map<SitePair, Coupling> J;
  std::map<SitePair, Coupling> K;  // keys must be graph edges (either orientation)
  std::vector<Field> h;            // empty, or one entry per site
};

struct HamiltonianSpec {
  InteractionGraph graph;
  double alpha = 1.0;
  std::vector<Segment> segments;

  std::size_t n_sites() const { return graph.n_vertices(); }
  double total_time() const;
};

struct Violation {
  enum class Kind { Alpha, Duration, SiteRange, SelfCoupling, JBound, KBound, KNonEdge, FieldShape, NonFinite };
  Kind kind;
  std::size_t segment = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  int A = -1;
  int B = -1;
  double value = 0.0;

  std::string message() const;
};

// First violated hypothesis in schedule order, or nullopt when the spec is valid.
std::optional<Violation> validate(const HamiltonianSpec& spec);
// Throws ConfigError carrying the violation message.
void require_valid(const HamiltonianSpec& spec);

// Full Pauli sum for one segment. Hermitian flag set.
OperatorVector materialize(const HamiltonianSpec& spec, std::size_t segment);

struct RegionDecomposition {
  OperatorVector lt_D;    // K inside S_D plus fields on S_D
  OperatorVector D;       // K edges leaving S_D
  OperatorVector gt_D;    // K and fields entirely outside S_D
  OperatorVector NL_lt;   // J pairs touching S_D
  OperatorVector NL_gt;   // J pairs outside S_D
  std::vector<std::size_t> ball;

  OperatorVector sum() const;
};

RegionDecomposition decompose(const HamiltonianSpec& spec, std::size_t segment, std::size_t v, int D);

// Frobenius norm ||H_<NL||_2 in the normalized inner product.
double frobenius_norm_NL(const HamiltonianSpec& spec, std::size_t segment, std::size_t v, int D);
// Triangle-inequality bound sum |c| over the strings of H_D.
double opnorm_bound_HD(const HamiltonianSpec& spec, std::size_t segment, std::size_t v, int D);

// Largest |J_ij^AB + J_ji^BA| over pairs; equals 1 for the uniform presets.
double max_folded_J(const Segment& seg);

// Presets. Couplings fill unordered pairs i < j (or graph edges) once.
Segment uniform_J_segment(std::size_t n, const Coupling& c, double duration = 1.0);
Coupling zz_coupling(double j = 1.0);
// J^AB_ij = +-1 with independent fair signs on the channels in `channels`.
Segment random_pm1_J_segment(std::size_t n, std::uint64_t seed, std::uint64_t cell,
                             const std::vector<std::pair<int, int>>& channels, double duration = 1.0);
void add_uniform_field(Segment& seg, std::size_t n, const Field& f);
void add_random_fields(Segment& seg, std::size_t n, double scale, std::uint64_t seed, std::uint64_t cell);
void add_uniform_K(Segment& seg, const InteractionGraph& g, const Coupling& c);

struct RandomSpecOptions {
  double alpha = 1.0;
  std::size_t segments = 1;
  double duration = 1.0;
  bool with_K = true;
  bool with_fields = true;
  double field_scale = 1.0;
};

// Generic valid instance: J and K entries uniform in [-1,1] on all channels,
// fields uniform in [-scale, scale].
HamiltonianSpec random_spec(const InteractionGraph& g, const RandomSpecOptions& opt, std::uint64_t seed,
                            std::uint64_t cell);

// Permutation-symmetric instance with K = 0: one symmetric coupling matrix
// with entries in [-1,1] shared by all pairs, and one field vector with
// entries in [-field_scale, field_scale] shared by all sites.
HamiltonianSpec random_symmetric_spec(std::size_t n, double alpha, double field_scale, std::uint64_t seed,
                                      std::uint64_t cell);

// Same couplings, with every K term removed and every J term kept.
HamiltonianSpec without_K(HamiltonianSpec spec);

}  // namespace opgrowth
