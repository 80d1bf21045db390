#pragma once

// Gate protocol that grows X+_0 into an operator of size O(M) in g rounds of
// ZZ spreading (U_Z) and Y rotations (U_Y) over regions R_1..R_g, together
// with its planner and an exact Markov chain for sizes and X+/X- imbalances.

#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "opgrowth/pauli.hpp"

namespace opgrowth {

struct ProtocolPlan {
  std::size_t N = 0;
  int g = 1;
  std::size_t M = 0;
  double tau = 0.0;
  std::vector<std::vector<std::size_t>> regions;  // R_1..R_g; vertex 0 is the source
  double alpha = 1.0;
  double epsilon = 0.25;
  double c1 = 0.9, c2 = 1.1, c3 = 1.0, c4 = 0.0, c5 = 0.1, c6 = 0.0;
  double p0 = 0.0;
  double t_X = 1.0;
  double t_Z = 0.0;  // c3 N^alpha tau
  double K = 0.0;    // runtime <= K N^{alpha+epsilon-1/2}
};

struct PlanOverrides {
  std::optional<int> g;
  std::optional<double> c1, c2, c3, c4, c5, c6, t_X;
  double c6_margin = 1.1;  // applied to the minimal c6
};

// Regions R_l = {1 + (l-1)M, ..., lM}; constants are defaults, c6 matches tau.
ProtocolPlan manual_plan(std::size_t N, int g, std::size_t M, double tau, double alpha = 1.0);

ProtocolPlan plan_protocol(std::size_t N, double alpha, double epsilon, const PlanOverrides& ov = {});
// One set of constants for several N: c4 is fixed by the smallest N, whose
// admissible s range contains those of the larger ones.
std::vector<ProtocolPlan> plan_protocol_family(const std::vector<std::size_t>& Ns, double alpha, double epsilon,
                                               const PlanOverrides& ov = {});
// Smallest N accepted by plan_protocol (exponential then binary search).
std::size_t minimum_plan_n(double alpha, double epsilon, const PlanOverrides& ov = {});

int default_g(double epsilon);

// Largest c4 with p0 < P(|j| > c4 sqrt(s)) for every s in [s_lo, s_hi], j the
// imbalance of s fair +-1 draws.
double admissible_c4(double p0, std::size_t s_lo, std::size_t s_hi);
// Minimal c6 of tau = c6 N^{-(g-1)/2g} from the corrected size-ladder condition.
double minimal_c6(int g, double c1, double c4, double c5);
// Both sides of the condition; holds when lhs >= rhs.
struct S1StarCheck {
  double lhs;  // (4/pi^2) c1 (N/g) tau^2, a lower bound on c1 M sin^2 tau
  double rhs;  // (pi^2 / 4c4^2) (4 c4^2 c5 N / (pi^2 g))^{1/g}
  bool holds() const { return lhs >= rhs; }
};
S1StarCheck s1star_check(const ProtocolPlan& p);

// Gates act on operators in the X+- basis (Pauli-basis input is converted).
OperatorVector apply_uz(int l, const ProtocolPlan& p, const OperatorVector& A);
OperatorVector apply_uy(int l, const ProtocolPlan& p, const OperatorVector& A);

inline constexpr std::size_t kExactProtocolLimit = 12;

// Joint law of (s, j): s = number of X+- in R_l, j = #X+ - #X- there.
struct StepDistribution {
  std::map<std::pair<int, int>, double> joint;
  std::vector<double> size;  // marginal of s, index s = 0..M
  std::map<int, double> imbalance;
  double cumulative_size_mean = 0.0;  // E[total size] after the step
  double retained_mass = 1.0;
  double near_zero_mass = 0.0;  // mass of j_{l-1} with j tau/pi within delta of a nonzero integer
};

struct ExactRun {
  OperatorVector final;  // X+- basis
  SizeDistribution sizes;
  double avg_size;
  std::vector<StepDistribution> steps;
};
ExactRun run_protocol_exact(const ProtocolPlan& p, std::size_t limit = kExactProtocolLimit);

struct MarkovOptions {
  double k_mass = 12.0;         // window half-width in standard deviations
  bool joint = true;            // fill StepDistribution::joint
  bool final_imbalance = true;  // imbalance law of the last step
  double delta = 1e-3;
};
// Large plans keep only marginals.
MarkovOptions default_markov_options(const ProtocolPlan& p);
std::vector<StepDistribution> markov_predict(const ProtocolPlan& p, const MarkovOptions& opt);
std::vector<StepDistribution> markov_predict(const ProtocolPlan& p);

// log C(n, k) and the binomial pmf evaluated in log space.
double log_choose(double n, double k);
double binomial_pmf(std::size_t n, std::size_t k, double q);

std::vector<std::size_t> s_star_sequence(const ProtocolPlan& p);
double protocol_runtime(const ProtocolPlan& p);

void write_protocol_csv(std::ostream& os, const ProtocolPlan& p, const std::vector<StepDistribution>& steps);

}  // namespace opgrowth
