#pragma once

// Constants and envelopes of the lower-bound argument, plus numerical
// certification of each inequality against the simulator.

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "opgrowth/evolution.hpp"
#include "opgrowth/graph.hpp"
#include "opgrowth/hamiltonian.hpp"

namespace opgrowth {

inline const double kDefaultB = std::exp(2.0);

struct BoundParams {
  double a = 0.5;
  double b = kDefaultB;
  int k = 1;       // maximum vertex degree
  int d = 1;
  double c1 = 1.0, c2 = 1.0;
  double mu = 0.0;
  int D0 = 0;
  double Zprime = 6.0;
  double Mprime = 0.0;
  double alpha = 1.0;
  std::size_t N = 1;
};

double mu_constant(double b, int k);
double lemma1_envelope(double mu, int D, double t);

// Sum over vertices of b^{d_x} (A|P_x|A), d_x the graph distance from v.
double weighted_functional(const OperatorVector& A, std::size_t v, double b, const InteractionGraph& g);

// M' = 2 * 9 * k * c2: 2||H_D|| with at most k c2 D^{d-1} boundary edges of
// nine channels each. Z' = 2 * 3 from 2t ||H_<NL||_2 <= 2t * 3 sqrt(|S_D|) N^{1/2-alpha}.
double mprime_constant(int k, double c2);
inline constexpr double kZprime = 6.0;

// Fills k, c1, c2, mu, Mprime, Zprime and D0 from the graph.
BoundParams derive_params(const InteractionGraph& g, int d, double a, double alpha, double b = kDefaultB);

// e^{-D0/2} sup_t (M'/2mu)(2 mu t + D0)^d e^{-mu t - D0/2}; the sup sits at
// 2 mu t = max(0, 2d - D0).
double d0_rhs(double Mprime, double mu, int d, int D0);
int choose_D0(const BoundParams& p);

struct TheoremBound {
  double value;     // lower bound on t_s
  double exponent;  // of N
  bool lr_regime;   // alpha >= 1 + 1/d: the N^{1/d} regime
};
TheoremBound theorem_lower_bound(const BoundParams& p);

// (sqrt(a)/6) N^{alpha-1/2}, the large-N form.
double corollary3_lower_bound(std::size_t N, double alpha, double a);
// Finite-N form of the same chain: aN < 1 + 36 t^2 (N-1)^2 N^{-2alpha}.
double corollary3_rigorous_bound(std::size_t N, double alpha, double a);

struct DuhamelReport {
  double lhs, term1, term2;
  double quad_error;
  bool pass;
};

struct DuhamelOptions {
  Letter letter = Letter::X;
  double quad_tol = 1e-8;
  unsigned max_depth = 20;
};

// lhs = ||P_{bar S_D} O_v(t)||_2 from the full evolution; term1, term2 the two
// integrals of the triangle-inequality split with the restricted generator.
DuhamelReport duhamel_split_check(const HamiltonianSpec& spec, std::size_t v, int D, double t,
                                  const DuhamelOptions& opt = {});

struct Lemma1Report {
  double lhs;                 // ||P_{Q_D} e^{L_<D t} O_v||_2
  double envelope;            // e^{mu t - D}
  double functional;          // (O_v(t)|F|O_v(t))
  double functional_bound;    // e^{2 mu t}
  bool pass;                  // lhs < envelope and functional <= bound
};

Lemma1Report lemma1_check(const HamiltonianSpec& spec, std::size_t v, int D, double t, double b = kDefaultB,
                          Letter letter = Letter::X);
// One evolver, many times.
std::vector<Lemma1Report> lemma1_scan(const HamiltonianSpec& spec, std::size_t v, int D,
                                      const std::vector<double>& times, double b = kDefaultB,
                                      Letter letter = Letter::X);

struct CertRow {
  std::string check;
  std::size_t N;
  double alpha;
  int D;
  double t;
  double lhs, rhs;
  double slack() const { return rhs - lhs; }
  bool pass;
};

void write_cert_header(std::ostream& os);
void write_cert_row(std::ostream& os, const CertRow& r);

}  // namespace opgrowth
