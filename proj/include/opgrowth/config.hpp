#pragma once

// Experiment configuration, read from JSON. Unknown keys are rejected so a
// typo cannot silently fall back to a default.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "opgrowth/hamiltonian.hpp"

namespace opgrowth {

enum class Mode { Otoc, Scramble, Certify, Protocol, Sweep, GraphCert };
std::string mode_name(Mode m);
std::optional<Mode> parse_mode(const std::string& s);

struct GraphConfig {
  std::string kind = "chain";  // chain, lattice, complete, empty, edges
  int d = 1;
  int L = 0;                   // lattice side; 0 means "from N"
  bool periodic = false;
  std::string path;            // edge list, kind = edges
};

// How a HamiltonianSpec is produced for a given (N, alpha, instance).
struct ModelConfig {
  std::string preset = "random";  // random, random_symmetric, zz_pair, uniform_zz, explicit
  GraphConfig graph;
  std::size_t N = 6;
  double alpha = 1.0;
  double J = 1.0;                  // zz_pair, uniform_zz
  Field field{0.0, 0.0, 0.0};      // uniform_zz
  bool with_K = true;
  bool with_fields = true;
  double field_scale = 1.0;
  std::size_t segments = 1;
  std::optional<double> duration;  // per segment; default covers the requested times
  nlohmann::json spec;             // explicit
};

struct CertifyConfig {
  std::size_t N = 6;
  std::vector<double> alphas{0.5, 1.0};
  std::size_t specs = 10;
  std::vector<double> otoc_times;     // default 0, 0.25, ..., 4.75
  std::vector<int> D{1, 2, 3};
  std::vector<double> duhamel_times{0.1, 0.5, 1.0};
  std::vector<double> lemma1_times;   // default 0, 0.005, ..., 0.05
  std::size_t operators = 200;        // average-size identity
  std::vector<std::string> checks{"otoc", "average_size", "duhamel", "lemma1"};
  std::optional<double> b;            // light-cone weight base, default e^2
  double slack = 1e-9;
  double quad_tol = 1e-8;
};

struct ProtocolConfig {
  std::vector<std::size_t> N{1000, 10000, 100000, 1000000};
  double alpha = 1.0;
  double epsilon = 0.25;
  bool family = true;  // shared constants across N
  double slope_tol = 0.05;
  std::optional<int> g;
  std::optional<double> c1, c2, c3, c4, c5, c6, t_X;
  // Small plan run through both the exact simulation and the predictor.
  struct Exact {
    std::size_t N = 7;
    int g = 2;
    std::size_t M = 3;
    double tau = 0.78539816339744831;  // pi/4
    double tol = 1e-10;
  };
  std::optional<Exact> exact;
};

struct GraphCertConfig {
  GraphConfig graph{"lattice", 1, 8, false, ""};
  std::optional<double> c1, c2;  // claimed constants to verify
};

struct ExperimentConfig {
  Mode mode = Mode::Sweep;
  std::uint64_t seed = 0;
  std::string out;  // empty: resolved by the caller
  unsigned jobs = 1;
  ModelConfig model;

  // grid
  std::vector<std::size_t> N;
  std::vector<double> alpha;
  std::size_t instances = 1;
  std::vector<double> times;
  double a = 0.5;
  double t_max = 20.0;
  double dt = 0.05;
  double refine_ratio = 100.0;

  std::size_t otoc_i = 0, otoc_j = 1;
  CertifyConfig certify;
  ProtocolConfig protocol;
  GraphCertConfig graph_cert;

  nlohmann::json source;  // the document as read
};

// Time grid {start, stop, step} (stop inclusive) or an explicit list.
std::vector<double> expand_times(double start, double stop, double step);

// Defaults for a mode when no file is given.
ExperimentConfig default_config(Mode mode);

// Throws ConfigError with "line L, column C" for syntax errors and the JSON
// path of the field for type or range errors. `mode` fills in a missing
// "mode" key; a conflicting one is an error.
ExperimentConfig parse_config(const std::string& text, std::optional<Mode> mode = std::nullopt);
ExperimentConfig load_config(const std::string& path, std::optional<Mode> mode = std::nullopt);

// Cross-field checks (non-empty grid, a in (0,1), ...).
void validate_config(const ExperimentConfig& c);

// Resolved configuration, echoed in the manifest.
nlohmann::json to_json(const ExperimentConfig& c);

HamiltonianSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const HamiltonianSpec& s);

InteractionGraph build_graph(const GraphConfig& g, std::size_t N);

// The spec of one sweep cell. Randomness is keyed by (seed, cell).
HamiltonianSpec build_model(const ModelConfig& m, std::size_t N, double alpha, double duration, std::uint64_t seed,
                            std::uint64_t cell);

// Stream index of a sweep cell, stable when other cells are added or removed.
std::uint64_t cell_key(std::size_t N, double alpha, std::size_t instance);

}  // namespace opgrowth
