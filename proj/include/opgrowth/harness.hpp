#pragma once

// Runs one experiment: writes <out>/<mode>.csv (plus extra tables for some
// modes) and <out>/manifest.json.
//
// Exit status: 0 all checks pass, 1 a certification failed, 2 bad config or
// usage, 3 runtime failure (capacity, integration) with no certification
// failure.

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "opgrowth/config.hpp"

namespace opgrowth {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCertFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

inline constexpr const char* kOutEnv = "OPGROWTH_OUT";
inline constexpr const char* kVersion = "0.1.0";

struct RunResult {
  int exit_code = kExitOk;
  std::vector<std::string> files;  // written, relative to the output directory
  nlohmann::json summary;          // also in the manifest
};

// Output directory: explicit value, else $OPGROWTH_OUT, else "results".
std::string resolve_out_dir(const std::string& explicit_out);

RunResult run(const ExperimentConfig& c, std::ostream& log);

// Index-ordered parallel map; f(k) runs on one of `jobs` threads and its
// result lands in slot k whatever the completion order.
template <class T>
std::vector<T> parallel_map(std::size_t n, unsigned jobs, const std::function<T(std::size_t)>& f);

// One sweep row per (N, alpha, instance).
struct SweepRow {
  std::size_t N;
  double alpha;
  std::uint64_t seed;
  std::size_t instance;
  std::string backend;
  std::string status;  // ok, not_reached, error: ...
  double t_s = 0.0, t_s_lower = 0.0;
  double cor3 = 0.0, cor3_rigorous = 0.0;
  double theorem = 0.0, theorem_exponent = 0.0;
  std::optional<bool> pass_cor3;  // empty when K != 0 and the bound does not apply
  std::optional<bool> pass_theorem;  // empty when the bound could not be formed
};
void write_sweep_header(std::ostream& os);
void write_sweep_row(std::ostream& os, const SweepRow& r);
std::vector<SweepRow> run_sweep(const ExperimentConfig& c);

}  // namespace opgrowth

#include "opgrowth/parallel.inl"
