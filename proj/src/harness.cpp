#include "opgrowth/harness.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "opgrowth/bounds.hpp"
#include "opgrowth/csv.hpp"
#include "opgrowth/errors.hpp"
#include "opgrowth/evolution.hpp"
#include "opgrowth/protocol.hpp"
#include "opgrowth/rng.hpp"

namespace opgrowth {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kOtocSlack = 1e-9;
constexpr double kClosedFormTol = 1e-10;
constexpr double kSizeIdentityTol = 1e-12;
constexpr double kStepOneTol = 1e-12;

std::string flag(bool b) { return b ? "1" : "0"; }
std::string flag(const std::optional<bool>& b) { return b ? flag(*b) : "na"; }

class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }
  std::ofstream open(const std::string& name) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + (dir_ / name).string() + "'");
    files_.push_back(name);
    return f;
  }
  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

bool has_K(const HamiltonianSpec& s) {
  for (const auto& seg : s.segments)
    for (const auto& [e, c] : seg.K)
      for (const auto& row : c)
        for (double x : row)
          if (x != 0.0) return true;
  return false;
}

// ---------------------------------------------------------------- otoc

void run_otoc(const ExperimentConfig& c, Output& out, RunResult& res) {
  const std::size_t N = c.model.preset == "zz_pair" ? 2 : c.model.N;
  const HamiltonianSpec spec = build_model(c.model, N, c.model.alpha, c.times.back(), c.seed, cell_key(N, c.model.alpha, 0));
  if (spec.total_time() < c.times.back()) throw ConfigError("model: schedule is shorter than the last requested time");
  if (c.otoc_i >= spec.n_sites() || c.otoc_j >= spec.n_sites()) throw ConfigError("otoc: site out of range");
  const auto samples = otoc_scan(make_schedule(spec), spec.n_sites(), c.otoc_i, c.otoc_j, c.times);
  const bool closed = c.model.preset == "zz_pair" && c.otoc_i != c.otoc_j;
  const double J_eff = c.model.J * std::pow(2.0, -spec.alpha);

  auto f = out.open("otoc.csv");
  std::vector<std::string> header{"t", "otoc", "bound", "slack", "pass"};
  if (closed) header.insert(header.end(), {"closed_form", "closed_form_error"});
  write_csv_row(f, header);
  double min_slack = INFINITY, max_err = 0.0;
  bool all = true;
  for (const auto& s : samples) {
    const double slack = s.bound - std::abs(s.otoc);
    bool pass = slack >= -kOtocSlack;
    std::vector<std::string> row{format_real(s.t), format_real(s.otoc), format_real(s.bound), format_real(slack), ""};
    if (closed) {
      const double cf = -4.0 * std::pow(std::sin(2.0 * J_eff * s.t), 2);
      const double err = std::abs(s.otoc - cf);
      pass = pass && err <= kClosedFormTol;
      max_err = std::max(max_err, err);
      row.push_back(format_real(cf));
      row.push_back(format_real(err));
    }
    row[4] = flag(pass);
    write_csv_row(f, row);
    min_slack = std::min(min_slack, slack);
    all = all && pass;
  }
  res.summary["min_slack"] = min_slack;
  res.summary["N"] = spec.n_sites();
  if (closed) res.summary["max_closed_form_error"] = max_err;
  res.summary["constants"] = {{"otoc_slack", kOtocSlack}, {"closed_form_tol", kClosedFormTol}, {"J_eff", J_eff}};
  res.summary["spec"] = spec_to_json(spec);
  res.summary["pass"] = all;
  if (!all) res.exit_code = kExitCertFailed;
}

// ---------------------------------------------------------------- scramble

ScramblingOptions scrambling_options(const ExperimentConfig& c) {
  ScramblingOptions o;
  o.a = c.a;
  o.t_max = c.t_max;
  o.dt = c.dt;
  o.refine_ratio = c.refine_ratio;
  return o;
}

void run_scramble(const ExperimentConfig& c, Output& out, RunResult& res) {
  const std::size_t N = c.model.preset == "zz_pair" ? 2 : c.model.N;
  const HamiltonianSpec spec = build_model(c.model, N, c.model.alpha, c.t_max, c.seed, cell_key(N, c.model.alpha, 0));
  const Schedule s = make_schedule(spec);
  const Backend b = choose_backend(s, spec.n_sites());
  const auto r = scrambling_time(SizeFormEvaluator(s, spec.n_sites(), b), scrambling_options(c));
  auto f = out.open("scramble.csv");
  write_csv_row(f, {"t", "sup_size", "threshold"});
  const double threshold = c.a * static_cast<double>(spec.n_sites());
  for (std::size_t k = 0; k < r.times.size(); ++k)
    write_csv_row(f, {format_real(r.times[k]), format_real(r.sup_sizes[k]), format_real(threshold)});
  res.summary = {{"N", spec.n_sites()},
                 {"backend", backend_name(b)},
                 {"reached", r.reached},
                 {"t_s", r.t_s},
                 {"t_s_lower", r.t_s_lower},
                 {"source", r.source},
                 {"crossings", r.crossings},
                 {"corollary3_bound", corollary3_lower_bound(spec.n_sites(), spec.alpha, c.a)},
                 {"corollary3_rigorous_bound", corollary3_rigorous_bound(spec.n_sites(), spec.alpha, c.a)},
                 {"has_K", has_K(spec)},
                 {"spec", spec_to_json(spec)}};
}

// ---------------------------------------------------------------- certify

RandomSpecOptions chain_options(double alpha, double duration) { return RandomSpecOptions{alpha, 1, duration, true, true, 1.0}; }

void certify_otoc(const ExperimentConfig& c, std::vector<CertRow>& rows) {
  const auto& ce = c.certify;
  const InteractionGraph g = build_lattice(1, static_cast<int>(ce.N), false);
  for (double alpha : ce.alphas) {
    for (std::size_t s = 0; s < ce.specs; ++s) {
      const auto spec = random_spec(g, chain_options(alpha, ce.otoc_times.back()), c.seed, cell_key(ce.N, alpha, s));
      const std::size_t i = 0, j = ce.N - 1 - s % (ce.N - 1);
      for (const auto& x : otoc_scan(make_schedule(spec), ce.N, i, j, ce.otoc_times)) {
        CertRow r{"otoc", ce.N, alpha, g.dist(i, j), x.t, std::abs(x.otoc), x.bound, false};
        r.pass = r.slack() >= -ce.slack;
        rows.push_back(r);
      }
    }
  }
}

void certify_average_size(const ExperimentConfig& c, std::vector<CertRow>& rows) {
  const auto& ce = c.certify;
  const std::size_t n = std::min<std::size_t>(ce.N, 16);
  for (std::size_t k = 0; k < ce.operators; ++k) {
    CounterRng rng(c.seed, cell_key(n, -1.0, k));
    OperatorVector A(n);
    const std::size_t terms = 1 + rng.next_u64() % 24;
    for (std::size_t t = 0; t < terms; ++t) {
      const std::uint64_t mask = low_bits(n);
      A.add(PauliKey{rng.next_u64() & mask, rng.next_u64() & mask}, Complex(rng.uniform(-1, 1), rng.uniform(-1, 1)));
    }
    if (A.norm2() == 0.0) continue;
    A *= 1.0 / std::sqrt(A.norm2());
    double lhs = 0.0;
    for (std::size_t j = 0; j < n; ++j) lhs += project_sites(A, {j}).norm2();
    const double rhs = size_distribution(A).mean();
    rows.push_back({"average_size", n, 0.0, 0, 0.0, lhs, rhs, std::abs(lhs - rhs) <= kSizeIdentityTol * std::max(1.0, rhs)});
  }
}

void certify_duhamel(const ExperimentConfig& c, std::vector<CertRow>& rows) {
  const auto& ce = c.certify;
  const InteractionGraph g = build_lattice(1, static_cast<int>(ce.N), false);
  double t_end = 0.0;
  for (double t : ce.duhamel_times) t_end = std::max(t_end, t);
  DuhamelOptions opt;
  opt.quad_tol = ce.quad_tol;
  for (double alpha : ce.alphas) {
    const auto spec = random_spec(g, chain_options(alpha, t_end), c.seed, cell_key(ce.N, alpha, 1u << 20));
    for (int D : ce.D)
      for (double t : ce.duhamel_times) {
        const auto r = duhamel_split_check(spec, 0, D, t, opt);
        CertRow row{"duhamel", ce.N, alpha, D, t, r.lhs, r.term1 + r.term2, false};
        row.pass = row.lhs <= row.rhs + ce.quad_tol;
        rows.push_back(row);
      }
  }
}

HamiltonianSpec k_only_chain(std::size_t N, double duration, std::uint64_t seed) {
  RandomSpecOptions opt{1.0, 1, duration, true, false, 0.0};
  auto spec = random_spec(build_lattice(1, static_cast<int>(N), false), opt, seed, cell_key(N, 0.0, 1u << 21));
  for (auto& seg : spec.segments) seg.J.clear();
  return spec;
}

void certify_lemma1(const ExperimentConfig& c, std::vector<CertRow>& rows, double b) {
  const auto& ce = c.certify;
  const auto spec = k_only_chain(ce.N, std::max(ce.lemma1_times.back(), 1e-9), c.seed);
  const int D_max = std::min(6, spec.graph.diameter());
  for (int D = 1; D <= D_max; ++D) {
    const auto reps = lemma1_scan(spec, 0, D, ce.lemma1_times, b);
    for (std::size_t k = 0; k < reps.size(); ++k) {
      const double t = ce.lemma1_times[k];
      const auto& r = reps[k];
      rows.push_back({"lemma1_envelope", ce.N, spec.alpha, D, t, r.lhs, r.envelope, r.lhs < r.envelope});
      rows.push_back({"lemma1_functional", ce.N, spec.alpha, D, t, r.functional, r.functional_bound,
                      r.functional <= r.functional_bound * (1 + 1e-12)});
    }
  }
}

void run_certify(const ExperimentConfig& c, Output& out, RunResult& res, std::ostream& log) {
  const auto& ce = c.certify;
  const double b = ce.b ? *ce.b : kDefaultB;
  // checks are independent; each is one parallel task
  const auto blocks = parallel_map<std::vector<CertRow>>(ce.checks.size(), c.jobs, [&](std::size_t k) {
    std::vector<CertRow> rows;
    const std::string& name = ce.checks[k];
    if (name == "otoc") certify_otoc(c, rows);
    if (name == "average_size") certify_average_size(c, rows);
    if (name == "duhamel") certify_duhamel(c, rows);
    if (name == "lemma1") certify_lemma1(c, rows, b);
    return rows;
  });
  auto f = out.open("certify.csv");
  write_cert_header(f);
  json per = json::object();
  bool all = true;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    std::size_t failed = 0;
    double worst = INFINITY;
    for (const auto& r : blocks[k]) {
      write_cert_row(f, r);
      failed += r.pass ? 0 : 1;
      worst = std::min(worst, r.slack());
    }
    per[ce.checks[k]] = {{"rows", blocks[k].size()}, {"failed", failed}, {"min_slack", worst}};
    log << ce.checks[k] << ": " << blocks[k].size() - failed << "/" << blocks[k].size() << " pass\n";
    all = all && failed == 0;
  }
  const int k_deg = 1;
  res.summary = {{"checks", per},
                 {"pass", all},
                 {"constants",
                  {{"b", b},
                   {"mu", mu_constant(b, k_deg)},
                   {"k", k_deg},
                   {"otoc_slack", ce.slack},
                   {"quad_tol", ce.quad_tol},
                   {"average_size_tol", kSizeIdentityTol}}}};
  if (!all) res.exit_code = kExitCertFailed;
}

// ---------------------------------------------------------------- protocol

PlanOverrides overrides(const ProtocolConfig& p) {
  PlanOverrides ov;
  ov.g = p.g;
  ov.c1 = p.c1;
  ov.c2 = p.c2;
  ov.c3 = p.c3;
  ov.c4 = p.c4;
  ov.c5 = p.c5;
  ov.c6 = p.c6;
  ov.t_X = p.t_X;
  return ov;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

json plan_json(const ProtocolPlan& p) {
  return {{"N", p.N},   {"g", p.g},   {"M", p.M},   {"tau", p.tau}, {"c1", p.c1}, {"c2", p.c2},   {"c3", p.c3},
          {"c4", p.c4}, {"c5", p.c5}, {"c6", p.c6}, {"p0", p.p0},   {"t_X", p.t_X}, {"t_Z", p.t_Z}, {"K", p.K}};
}

bool run_protocol_exact_check(const ProtocolConfig::Exact& e, double alpha, Output& out, json& summary) {
  const ProtocolPlan p = manual_plan(e.N, e.g, e.M, e.tau, alpha);
  const ExactRun ex = run_protocol_exact(p);
  const auto pr = markov_predict(p);
  auto f = out.open("protocol_exact.csv");
  write_csv_row(f, {"step", "s", "j", "exact", "markov", "abs_diff"});
  double worst = 0.0;
  for (std::size_t l = 0; l < ex.steps.size(); ++l) {
    std::map<std::pair<int, int>, std::pair<double, double>> both;
    for (const auto& [sj, w] : ex.steps[l].joint) both[sj].first = w;
    for (const auto& [sj, w] : pr[l].joint) both[sj].second = w;
    for (const auto& [sj, w] : both) {
      const double d = std::abs(w.first - w.second);
      worst = std::max(worst, d);
      write_csv_row(f, {std::to_string(l + 1), std::to_string(sj.first), std::to_string(sj.second), format_real(w.first),
                        format_real(w.second), format_real(d)});
    }
  }
  const double step1 = 1.0 + static_cast<double>(e.M) * std::pow(std::sin(e.tau), 2);
  const double step1_err = std::abs(ex.steps.front().cumulative_size_mean - step1);
  const bool pass = worst <= e.tol && step1_err <= kStepOneTol;
  summary["exact"] = {{"plan", plan_json(p)},
                      {"max_abs_diff", worst},
                      {"tol", e.tol},
                      {"step1_mean", ex.steps.front().cumulative_size_mean},
                      {"step1_expected", step1},
                      {"step1_tol", kStepOneTol},
                      {"avg_size", ex.avg_size},
                      {"pass", pass}};
  return pass;
}

void run_protocol(const ExperimentConfig& c, Output& out, RunResult& res, std::ostream& log) {
  const auto& pc = c.protocol;
  const PlanOverrides ov = overrides(pc);
  std::vector<ProtocolPlan> plans;
  if (pc.family) {
    plans = plan_protocol_family(pc.N, pc.alpha, pc.epsilon, ov);
  } else {
    for (std::size_t n : pc.N) plans.push_back(plan_protocol(n, pc.alpha, pc.epsilon, ov));
  }
  const auto preds = parallel_map<std::vector<StepDistribution>>(
      plans.size(), c.jobs, [&](std::size_t k) { return markov_predict(plans[k]); });

  const double exponent = pc.alpha + pc.epsilon - 0.5;
  auto f = out.open("protocol.csv");
  write_csv_row(f, {"N", "g", "M", "tau", "c4", "c5", "c6", "K", "s_star_final", "final_mean", "c5M", "retained_mass",
                    "runtime", "runtime_scaled", "pass"});
  auto steps = out.open("protocol_steps.csv");
  write_csv_row(steps, {"N", "step", "mean_size", "s_star", "retained_mass", "near_zero_mass"});
  bool all = true;
  std::vector<double> xs, ys;
  json plan_list = json::array();
  for (std::size_t k = 0; k < plans.size(); ++k) {
    const auto& p = plans[k];
    const auto& d = preds[k];
    const auto ladder = s_star_sequence(p);
    const double final_mean = d.back().cumulative_size_mean;
    const double c5M = p.c5 * static_cast<double>(p.M);
    const double rt = protocol_runtime(p);
    const bool pass = final_mean >= c5M;
    all = all && pass;
    xs.push_back(static_cast<double>(p.N));
    ys.push_back(rt);
    write_csv_row(f, {std::to_string(p.N), std::to_string(p.g), std::to_string(p.M), format_real(p.tau), format_real(p.c4),
                      format_real(p.c5), format_real(p.c6), format_real(p.K), std::to_string(ladder.back()),
                      format_real(final_mean), format_real(c5M), format_real(d.back().retained_mass), format_real(rt),
                      format_real(rt / std::pow(static_cast<double>(p.N), exponent)), flag(pass)});
    for (std::size_t l = 0; l < d.size(); ++l) {
      write_csv_row(steps, {std::to_string(p.N), std::to_string(l + 1), format_real(d[l].cumulative_size_mean),
                            std::to_string(ladder[l]), format_real(d[l].retained_mass), format_real(d[l].near_zero_mass)});
    }
    plan_list.push_back(plan_json(p));
  }
  res.summary["plans"] = plan_list;
  res.summary["exponent"] = exponent;
  if (xs.size() >= 2) {
    // tau = c6 N^{-(g-1)/2g} makes the runtime grow as N^{alpha-(g-1)/2g},
    // which may not exceed the alpha + epsilon - 1/2 of the bound
    const int g = plans.front().g;
    const double predicted = pc.alpha - (g - 1.0) / (2.0 * g);
    const double slope = loglog_slope(xs, ys);
    const bool ok = std::abs(slope - predicted) <= pc.slope_tol && slope <= exponent + pc.slope_tol;
    res.summary["runtime_slope"] = slope;
    res.summary["predicted_slope"] = predicted;
    res.summary["slope_tol"] = pc.slope_tol;
    res.summary["slope_pass"] = ok;
    log << "runtime slope " << format_real(slope) << " (plan " << predicted << ", bound " << exponent << ")\n";
    all = all && ok;
  }
  if (pc.exact) all = run_protocol_exact_check(*pc.exact, pc.alpha, out, res.summary) && all;
  res.summary["pass"] = all;
  if (!all) res.exit_code = kExitCertFailed;
}

// ---------------------------------------------------------------- graph-cert

void run_graph_cert(const ExperimentConfig& c, Output& out, RunResult& res) {
  const GraphConfig& gc = c.graph_cert.graph;
  std::size_t N = 0;
  if (gc.kind != "edges") {
    if (gc.L < 1) throw ConfigError("graph_cert.graph.L: required");
    N = gc.kind == "lattice" ? static_cast<std::size_t>(std::lround(std::pow(gc.L, gc.d))) : static_cast<std::size_t>(gc.L);
  }
  const InteractionGraph g = build_graph(gc, N);
  const int d = gc.d;
  const DimensionCertificate cert = certify_dimension(g, d);
  const double c1 = c.graph_cert.c1 ? *c.graph_cert.c1 : cert.c1;
  const double c2 = c.graph_cert.c2 ? *c.graph_cert.c2 : cert.c2;
  const std::size_t n = g.n_vertices();
  const int D_max = cert.D_max;
  std::vector<std::size_t> max_ball(D_max + 1, 0), max_shell(D_max + 1, 0);
  std::vector<std::size_t> hist(D_max + 1);
  for (std::size_t v = 0; v < n; ++v) {
    std::fill(hist.begin(), hist.end(), 0);
    for (std::size_t u = 0; u < n; ++u) {
      const int r = g.dist(v, u);
      if (r <= D_max) ++hist[r];
    }
    std::size_t cum = 0;
    for (int D = 0; D <= D_max; ++D) {
      cum += hist[D];
      max_ball[D] = std::max(max_ball[D], cum);
      max_shell[D] = std::max(max_shell[D], hist[D]);
    }
  }
  auto f = out.open("graph_cert.csv");
  write_csv_row(f, {"D", "max_ball", "c1_D^d", "max_shell", "c2_D^(d-1)", "pass"});
  bool all = true;
  for (int D = std::max(1, cert.D_min); D <= D_max; ++D) {
    const double bb = c1 * std::pow(D, d), sb = c2 * std::pow(D, d - 1);
    const bool pass = max_ball[D] <= bb * (1 + 1e-12) && max_shell[D] <= sb * (1 + 1e-12);
    all = all && pass;
    write_csv_row(f, {std::to_string(D), std::to_string(max_ball[D]), format_real(bb), std::to_string(max_shell[D]),
                      format_real(sb), flag(pass)});
  }
  json summary = {{"N", n},          {"edges", g.edges().size()}, {"d", d},        {"connected", g.connected()},
                  {"max_degree", g.max_degree()}, {"c1", c1},     {"c2", c2},      {"derived_c1", cert.c1},
                  {"derived_c2", cert.c2},        {"D_min", cert.D_min},           {"D_max", cert.D_max},
                  {"pass", all}};
  if (c1 > 0.0) {
    BoundParams p = derive_params(g, d, c.a, c.model.alpha);
    summary["bound_params"] = {{"a", p.a},   {"b", p.b},         {"k", p.k},           {"mu", p.mu},
                               {"D0", p.D0}, {"Mprime", p.Mprime}, {"Zprime", p.Zprime}};
  }
  res.summary = summary;
  if (!all) res.exit_code = kExitCertFailed;
}

// An edgeless graph (K = 0) meets the volume bounds with c1 = 1, c2 = 0 in
// any dimension.
BoundParams sweep_params(const InteractionGraph& g, int d, double a, double alpha) {
  if (!g.edges().empty()) return derive_params(g, d, a, alpha);
  BoundParams p;
  p.a = a;
  p.d = d;
  p.c1 = 1.0;
  p.c2 = 0.0;
  p.mu = mu_constant(p.b, p.k);
  p.Mprime = 0.0;
  p.alpha = alpha;
  p.N = g.n_vertices();
  p.D0 = choose_D0(p);
  return p;
}

void write_manifest(const ExperimentConfig& c, const Output& out, const RunResult& res, double wall, const std::string& error) {
  json m;
  m["tool"] = "opgrowth";
  m["version"] = kVersion;
  m["mode"] = mode_name(c.mode);
  m["config"] = to_json(c);
  if (!c.source.is_null()) m["config_source"] = c.source;
  m["versions"] = {{"compiler", __VERSION__},
                   {"cxx", __cplusplus},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"boost", BOOST_LIB_VERSION},
                   {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  m["wall_time_s"] = wall;
  m["exit_code"] = res.exit_code;
  m["files"] = res.files;
  m["summary"] = res.summary;
  if (!error.empty()) m["error"] = error;
  std::ofstream f(out.dir() / "manifest.json", std::ios::binary);
  f << m.dump(2) << '\n';
}

}  // namespace

// ---------------------------------------------------------------- sweep

void write_sweep_header(std::ostream& os) {
  write_csv_row(os, {"N", "alpha", "seed", "instance", "backend", "status", "t_s", "t_s_lower", "cor3_bound",
                     "cor3_rigorous", "theorem_bound", "theorem_exponent", "pass_cor3", "pass_theorem"});
}

void write_sweep_row(std::ostream& os, const SweepRow& r) {
  const bool ok = r.status == "ok" || r.status == "not_reached";
  auto num = [&](double x) { return ok ? format_real(x) : std::string(); };
  write_csv_row(os, {std::to_string(r.N), format_real(r.alpha), std::to_string(r.seed), std::to_string(r.instance), r.backend,
                     csv_text(r.status), num(r.t_s), num(r.t_s_lower), format_real(r.cor3), format_real(r.cor3_rigorous),
                     r.pass_theorem ? format_real(r.theorem) : "", r.pass_theorem ? format_real(r.theorem_exponent) : "",
                     ok ? flag(r.pass_cor3) : "0", ok ? flag(r.pass_theorem) : "0"});
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& c) {
  struct Cell {
    std::size_t N;
    double alpha;
    std::size_t instance;
  };
  std::vector<Cell> cells;
  const std::vector<double> alphas = c.alpha.empty() ? std::vector<double>{c.model.alpha} : c.alpha;
  for (std::size_t N : c.N)
    for (double alpha : alphas)
      for (std::size_t k = 0; k < c.instances; ++k) cells.push_back({N, alpha, k});

  return parallel_map<SweepRow>(cells.size(), c.jobs, [&](std::size_t idx) {
    const Cell& cell = cells[idx];
    SweepRow row;
    row.N = cell.N;
    row.alpha = cell.alpha;
    row.seed = c.seed;
    row.instance = cell.instance;
    row.status = "ok";
    row.cor3 = corollary3_lower_bound(cell.N, cell.alpha, c.a);
    row.cor3_rigorous = corollary3_rigorous_bound(cell.N, cell.alpha, c.a);
    try {
      const HamiltonianSpec spec = build_model(c.model, cell.N, cell.alpha, c.t_max, c.seed, cell_key(cell.N, cell.alpha, cell.instance));
      const Schedule s = make_schedule(spec);
      const Backend b = choose_backend(s, spec.n_sites());
      row.backend = backend_name(b);
      const auto r = scrambling_time(SizeFormEvaluator(s, spec.n_sites(), b), scrambling_options(c));
      // the true t_s lies in (t_s_lower, t_s]; unreached means t_s > t_max
      const double certified = r.reached ? r.t_s_lower : c.t_max;
      row.status = r.reached ? "ok" : "not_reached";
      row.t_s = r.reached ? r.t_s : c.t_max;
      row.t_s_lower = r.reached ? r.t_s_lower : c.t_max;
      if (!has_K(spec)) row.pass_cor3 = certified >= row.cor3;
      try {
        const TheoremBound tb = theorem_lower_bound(sweep_params(spec.graph, c.model.graph.d, c.a, cell.alpha));
        row.theorem = tb.value;
        row.theorem_exponent = tb.exponent;
        row.pass_theorem = certified >= tb.value;
      } catch (const Error&) {
        // bound not formed (e.g. disconnected graph with edges); t_s is kept
      }
    } catch (const CapacityError& e) {
      row.status = "error: N=" + std::to_string(cell.N) + ": " + e.what();
    } catch (const Error& e) {
      row.status = std::string("error: ") + e.what();
    }
    return row;
  });
}

std::string resolve_out_dir(const std::string& explicit_out) {
  if (!explicit_out.empty()) return explicit_out;
  if (const char* env = std::getenv(kOutEnv); env && *env) return env;
  return "results";
}

RunResult run(const ExperimentConfig& c, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  Output out(resolve_out_dir(c.out));
  RunResult res;
  std::string error;
  try {
    switch (c.mode) {
      case Mode::Otoc: run_otoc(c, out, res); break;
      case Mode::Scramble: run_scramble(c, out, res); break;
      case Mode::Certify: run_certify(c, out, res, log); break;
      case Mode::Protocol: run_protocol(c, out, res, log); break;
      case Mode::GraphCert: run_graph_cert(c, out, res); break;
      case Mode::Sweep: {
        const auto rows = run_sweep(c);
        auto f = out.open("sweep.csv");
        write_sweep_header(f);
        std::size_t failed = 0, errors = 0;
        for (const auto& r : rows) {
          write_sweep_row(f, r);
          const bool err = r.status.rfind("error", 0) == 0;
          errors += err ? 1 : 0;
          const bool cor3_ok = r.pass_cor3.value_or(true);
          failed += !err && (!cor3_ok || !r.pass_theorem.value_or(true)) ? 1 : 0;
        }
        res.summary = {{"cells", rows.size()},
                       {"failed", failed},
                       {"errors", errors},
                       {"constants",
                        {{"a", c.a}, {"t_max", c.t_max}, {"dt", c.dt}, {"refine_ratio", c.refine_ratio}, {"b", kDefaultB},
                         {"bound_D", c.model.graph.d}}}};
        log << "sweep: " << rows.size() << " cells, " << failed << " failed, " << errors << " errors\n";
        if (failed) res.exit_code = kExitCertFailed;
        else if (errors) res.exit_code = kExitRuntime;
        break;
      }
    }
  } catch (const ConfigError& e) {
    error = e.what();
    res.exit_code = kExitConfig;
  } catch (const PlanningError& e) {
    error = std::string(e.what()) + " (smallest feasible N is " + std::to_string(e.minimum_n()) + ")";
    res.exit_code = kExitRuntime;
  } catch (const CapacityError& e) {
    error = std::string("N=") + std::to_string(e.requested()) + ": " + e.what();
    res.exit_code = kExitRuntime;
  } catch (const Error& e) {
    error = e.what();
    res.exit_code = kExitRuntime;
  }
  if (!error.empty()) log << "error: " << error << '\n';
  res.files = out.files();
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(c, out, res, wall, error);
  res.files.push_back("manifest.json");
  return res;
}

}  // namespace opgrowth
