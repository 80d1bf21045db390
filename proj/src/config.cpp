#include "opgrowth/config.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "opgrowth/errors.hpp"
#include "opgrowth/rng.hpp"

namespace opgrowth {

using nlohmann::json;

namespace {

const char* type_name(const json& j) { return j.type_name(); }

// Object reader that tracks its JSON path and which keys were consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, std::string("expected an object, got ") + type_name(j_));
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError((path.empty() ? std::string("<root>") : path) + ": " + what);
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }
  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (has(key)) out = convert<T>(j_.at(key), at(key));
  }
  template <class T>
  void get(const std::string& key, std::optional<T>& out) {
    if (has(key)) out = convert<T>(j_.at(key), at(key));
  }
  Reader child(const std::string& key) {
    used_.insert(key);
    return Reader(j_.at(key), at(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail(at(it.key()), "unknown key");
    }
  }

  template <class T>
  static T convert(const json& v, const std::string& path);

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <>
double Reader::convert<double>(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, std::string("expected a number, got ") + type_name(v));
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

template <>
bool Reader::convert<bool>(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, std::string("expected true or false, got ") + type_name(v));
  return v.get<bool>();
}

template <>
std::string Reader::convert<std::string>(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, std::string("expected a string, got ") + type_name(v));
  return v.get<std::string>();
}

template <>
std::uint64_t Reader::convert<std::uint64_t>(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) fail(path, "must be non-negative");
  fail(path, std::string("expected an integer, got ") + type_name(v));
}

template <>
int Reader::convert<int>(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, std::string("expected an integer, got ") + type_name(v));
  const auto x = v.get<std::int64_t>();
  if (x < -1000000000 || x > 1000000000) fail(path, "out of range");
  return static_cast<int>(x);
}

template <>
unsigned Reader::convert<unsigned>(const json& v, const std::string& path) {
  const std::uint64_t x = convert<std::uint64_t>(v, path);
  if (x > 4096) fail(path, "out of range");
  return static_cast<unsigned>(x);
}

template <class T>
std::vector<T> convert_list(const json& v, const std::string& path) {
  if (!v.is_array()) Reader::fail(path, std::string("expected a list, got ") + type_name(v));
  std::vector<T> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(Reader::convert<T>(v[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

template <>
std::vector<double> Reader::convert<std::vector<double>>(const json& v, const std::string& path) {
  return convert_list<double>(v, path);
}
template <>
std::vector<std::uint64_t> Reader::convert<std::vector<std::uint64_t>>(const json& v, const std::string& path) {
  return convert_list<std::uint64_t>(v, path);
}
template <>
std::vector<int> Reader::convert<std::vector<int>>(const json& v, const std::string& path) {
  return convert_list<int>(v, path);
}
template <>
std::vector<std::string> Reader::convert<std::vector<std::string>>(const json& v, const std::string& path) {
  return convert_list<std::string>(v, path);
}

template <>
Field Reader::convert<Field>(const json& v, const std::string& path) {
  const auto xs = convert_list<double>(v, path);
  if (xs.size() != 3) fail(path, "expected three numbers [x, y, z]");
  return {xs[0], xs[1], xs[2]};
}

// A list of times, or {"start", "stop", "step"}.
std::vector<double> read_times(const json& v, const std::string& path) {
  if (v.is_array()) return convert_list<double>(v, path);
  Reader r(v, path);
  double start = 0.0, stop = 0.0, step = 0.0;
  if (!r.has("stop") || !r.has("step")) Reader::fail(path, "time grid needs \"stop\" and \"step\"");
  r.get("start", start);
  r.get("stop", stop);
  r.get("step", step);
  r.finish();
  if (!(step > 0.0)) Reader::fail(path + ".step", "must be positive");
  if (stop < start) Reader::fail(path + ".stop", "must not be below start");
  return expand_times(start, stop, step);
}

int axis_index(char c, const std::string& path) {
  switch (c) {
    case 'X': return 0;
    case 'Y': return 1;
    case 'Z': return 2;
  }
  Reader::fail(path, std::string("unknown axis '") + c + "'");
}

// [[xx, xy, xz], [yx, ...], ...] or {"ZZ": 1.0, "XY": 0.5}
Coupling read_coupling(const json& v, const std::string& path) {
  Coupling c{};
  if (v.is_array()) {
    if (v.size() != 3) Reader::fail(path, "expected a 3x3 matrix");
    for (int a = 0; a < 3; ++a) {
      const auto row = convert_list<double>(v[a], path + "[" + std::to_string(a) + "]");
      if (row.size() != 3) Reader::fail(path + "[" + std::to_string(a) + "]", "expected three entries");
      for (int b = 0; b < 3; ++b) c[a][b] = row[b];
    }
    return c;
  }
  if (!v.is_object()) Reader::fail(path, "expected a 3x3 matrix or an object like {\"ZZ\": 1}");
  for (auto it = v.begin(); it != v.end(); ++it) {
    const std::string k = it.key();
    if (k.size() != 2) Reader::fail(path + "." + k, "channel must be two letters such as ZZ");
    c[axis_index(k[0], path + "." + k)][axis_index(k[1], path + "." + k)] = Reader::convert<double>(*it, path + "." + k);
  }
  return c;
}

std::map<SitePair, Coupling> read_pairs(const json& v, const std::string& path) {
  if (!v.is_array()) Reader::fail(path, "expected a list of {\"i\", \"j\", \"c\"}");
  std::map<SitePair, Coupling> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string p = path + "[" + std::to_string(k) + "]";
    Reader r(v[k], p);
    std::uint64_t i = 0, j = 0;
    if (!r.has("i") || !r.has("j") || !r.has("c")) Reader::fail(p, "needs \"i\", \"j\" and \"c\"");
    r.get("i", i);
    r.get("j", j);
    const Coupling c = read_coupling(r.raw("c"), p + ".c");
    r.finish();
    if (!out.emplace(SitePair{i, j}, c).second) Reader::fail(p, "duplicate pair");
  }
  return out;
}

void read_graph(Reader r, GraphConfig& g) {
  r.get("kind", g.kind);
  r.get("d", g.d);
  r.get("L", g.L);
  r.get("periodic", g.periodic);
  r.get("path", g.path);
  r.finish();
  static const std::set<std::string> kinds{"chain", "lattice", "complete", "empty", "edges"};
  if (!kinds.count(g.kind)) Reader::fail(r.at("kind"), "unknown graph kind '" + g.kind + "'");
  if (g.d < 1) Reader::fail(r.at("d"), "must be at least 1");
  if (g.L < 0) Reader::fail(r.at("L"), "must be non-negative");
  if (g.kind == "edges" && g.path.empty()) Reader::fail(r.at("path"), "required for kind \"edges\"");
}

void read_model(Reader r, ModelConfig& m) {
  r.get("preset", m.preset);
  if (r.has("graph")) read_graph(r.child("graph"), m.graph);
  r.get("N", m.N);
  r.get("alpha", m.alpha);
  r.get("J", m.J);
  r.get("field", m.field);
  r.get("with_K", m.with_K);
  r.get("with_fields", m.with_fields);
  r.get("field_scale", m.field_scale);
  r.get("segments", m.segments);
  r.get("duration", m.duration);
  if (r.has("spec")) m.spec = r.raw("spec");
  r.finish();
  static const std::set<std::string> presets{"random", "random_symmetric", "zz_pair", "uniform_zz", "explicit"};
  if (!presets.count(m.preset)) Reader::fail(r.at("preset"), "unknown preset '" + m.preset + "'");
  if (m.preset == "explicit" && m.spec.is_null()) Reader::fail(r.at("spec"), "required for preset \"explicit\"");
  if (m.segments < 1) Reader::fail(r.at("segments"), "must be at least 1");
  if (m.duration && !(*m.duration > 0.0)) Reader::fail(r.at("duration"), "must be positive");
  if (m.field_scale < 0.0) Reader::fail(r.at("field_scale"), "must be non-negative");
}

void read_certify(Reader r, CertifyConfig& c) {
  r.get("N", c.N);
  r.get("alphas", c.alphas);
  r.get("specs", c.specs);
  if (r.has("otoc_times")) c.otoc_times = read_times(r.raw("otoc_times"), r.at("otoc_times"));
  r.get("D", c.D);
  if (r.has("duhamel_times")) c.duhamel_times = read_times(r.raw("duhamel_times"), r.at("duhamel_times"));
  if (r.has("lemma1_times")) c.lemma1_times = read_times(r.raw("lemma1_times"), r.at("lemma1_times"));
  r.get("operators", c.operators);
  r.get("checks", c.checks);
  r.get("b", c.b);
  r.get("slack", c.slack);
  r.get("quad_tol", c.quad_tol);
  r.finish();
  static const std::set<std::string> known{"otoc", "average_size", "duhamel", "lemma1"};
  for (const auto& k : c.checks)
    if (!known.count(k)) Reader::fail(r.at("checks"), "unknown check '" + k + "'");
  for (int D : c.D)
    if (D < 0) Reader::fail(r.at("D"), "distances must be non-negative");
}

void read_protocol(Reader r, ProtocolConfig& p) {
  r.get("N", p.N);
  r.get("alpha", p.alpha);
  r.get("epsilon", p.epsilon);
  r.get("family", p.family);
  r.get("slope_tol", p.slope_tol);
  r.get("g", p.g);
  r.get("c1", p.c1);
  r.get("c2", p.c2);
  r.get("c3", p.c3);
  r.get("c4", p.c4);
  r.get("c5", p.c5);
  r.get("c6", p.c6);
  r.get("t_X", p.t_X);
  if (r.has("exact")) {
    const json& e = r.raw("exact");
    if (e.is_null() || (e.is_boolean() && !e.get<bool>())) {
      p.exact.reset();
    } else {
      ProtocolConfig::Exact x;
      Reader er(e, r.at("exact"));
      er.get("N", x.N);
      er.get("g", x.g);
      er.get("M", x.M);
      er.get("tau", x.tau);
      er.get("tol", x.tol);
      er.finish();
      p.exact = x;
    }
  }
  r.finish();
}

std::size_t line_of(const std::string& text, std::size_t byte, std::size_t& column) {
  std::size_t line = 1, last = 0;
  for (std::size_t k = 0; k < std::min(byte, text.size()); ++k) {
    if (text[k] == '\n') {
      ++line;
      last = k + 1;
    }
  }
  column = byte >= last ? byte - last : 0;
  return line;
}

}  // namespace

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::Otoc: return "otoc";
    case Mode::Scramble: return "scramble";
    case Mode::Certify: return "certify";
    case Mode::Protocol: return "protocol";
    case Mode::Sweep: return "sweep";
    case Mode::GraphCert: return "graph-cert";
  }
  return "?";
}

std::optional<Mode> parse_mode(const std::string& s) {
  for (Mode m : {Mode::Otoc, Mode::Scramble, Mode::Certify, Mode::Protocol, Mode::Sweep, Mode::GraphCert})
    if (mode_name(m) == s) return m;
  return std::nullopt;
}

std::vector<double> expand_times(double start, double stop, double step) {
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) out.push_back(start + static_cast<double>(k) * step);
  return out;
}

ExperimentConfig default_config(Mode mode) {
  ExperimentConfig c;
  c.mode = mode;
  c.certify.otoc_times = expand_times(0.0, 4.75, 0.25);
  c.certify.lemma1_times = expand_times(0.0, 0.05, 0.005);
  switch (mode) {
    case Mode::Otoc:
      c.model.preset = "zz_pair";
      c.model.N = 2;
      c.model.alpha = 0.0;
      c.times = expand_times(0.0, 2.0, 0.05);
      break;
    case Mode::Scramble:
      c.model.preset = "random_symmetric";
      c.model.N = 8;
      break;
    case Mode::Sweep:
      c.model.preset = "random_symmetric";
      c.N = {6, 8, 10};
      c.alpha = {1.0};
      c.instances = 3;
      break;
    case Mode::Protocol:
      c.protocol.g = 2;
      c.protocol.exact = ProtocolConfig::Exact{};
      break;
    case Mode::Certify:
    case Mode::GraphCert:
      break;
  }
  return c;
}

ExperimentConfig parse_config(const std::string& text, std::optional<Mode> mode) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    std::size_t col = 0;
    const std::size_t line = line_of(text, e.byte == 0 ? 0 : e.byte - 1, col);
    std::string what = e.what();
    const auto cut = what.find("syntax error");
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col + 1) + ": " +
                      (cut == std::string::npos ? what : what.substr(cut)));
  }
  Reader r(doc, "");
  std::optional<Mode> declared;
  if (r.has("mode")) {
    const auto s = Reader::convert<std::string>(r.raw("mode"), "mode");
    declared = parse_mode(s);
    if (!declared) Reader::fail("mode", "unknown mode '" + s + "'");
  }
  if (mode && declared && *mode != *declared) {
    Reader::fail("mode", "config is for '" + mode_name(*declared) + "' but the command is '" + mode_name(*mode) + "'");
  }
  if (!mode && !declared) Reader::fail("mode", "missing");
  ExperimentConfig c = default_config(mode ? *mode : *declared);

  r.get("seed", c.seed);
  r.get("out", c.out);
  r.get("jobs", c.jobs);
  if (r.has("model")) read_model(r.child("model"), c.model);
  if (r.has("grid")) {
    Reader g = r.child("grid");
    g.get("N", c.N);
    g.get("alpha", c.alpha);
    g.get("instances", c.instances);
    if (g.has("times")) c.times = read_times(g.raw("times"), g.at("times"));
    g.get("a", c.a);
    g.get("t_max", c.t_max);
    g.get("dt", c.dt);
    g.get("refine_ratio", c.refine_ratio);
    g.finish();
  }
  if (r.has("otoc")) {
    Reader o = r.child("otoc");
    o.get("i", c.otoc_i);
    o.get("j", c.otoc_j);
    o.finish();
  }
  if (r.has("certify")) read_certify(r.child("certify"), c.certify);
  if (r.has("protocol")) read_protocol(r.child("protocol"), c.protocol);
  if (r.has("graph_cert")) {
    Reader g = r.child("graph_cert");
    if (g.has("graph")) read_graph(g.child("graph"), c.graph_cert.graph);
    g.get("c1", c.graph_cert.c1);
    g.get("c2", c.graph_cert.c2);
    g.finish();
  }
  r.finish();
  c.source = doc;
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path, std::optional<Mode> mode) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), mode);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void validate_config(const ExperimentConfig& c) {
  auto fail = [](const std::string& path, const std::string& what) { Reader::fail(path, what); };
  if (c.jobs < 1) fail("jobs", "must be at least 1");
  if (!(c.a > 0.0 && c.a < 1.0)) fail("grid.a", "must lie in (0, 1)");
  if (!(c.dt > 0.0)) fail("grid.dt", "must be positive");
  if (!(c.t_max > 0.0)) fail("grid.t_max", "must be positive");
  if (!(c.refine_ratio >= 1.0)) fail("grid.refine_ratio", "must be at least 1");
  for (std::size_t k = 0; k < c.times.size(); ++k) {
    if (c.times[k] < 0.0) fail("grid.times", "times must be non-negative");
    if (k > 0 && c.times[k] < c.times[k - 1]) fail("grid.times", "times must be ascending");
  }
  switch (c.mode) {
    case Mode::Sweep:
      if (c.N.empty()) fail("grid.N", "empty grid");
      if (c.instances < 1) fail("grid.instances", "must be at least 1");
      for (std::size_t n : c.N)
        if (n < 2) fail("grid.N", "every N must be at least 2");
      break;
    case Mode::Otoc:
      if (c.times.empty()) fail("grid.times", "empty grid");
      if (c.model.preset != "explicit" && (c.otoc_i >= c.model.N || c.otoc_j >= c.model.N)) {
        fail("otoc", "sites must be below model.N = " + std::to_string(c.model.N));
      }
      break;
    case Mode::Scramble:
      if (c.model.N < 2 && c.model.preset != "explicit") fail("model.N", "must be at least 2");
      break;
    case Mode::Certify:
      if (c.certify.N < 2) fail("certify.N", "must be at least 2");
      if (c.certify.alphas.empty()) fail("certify.alphas", "empty grid");
      break;
    case Mode::Protocol:
      if (c.protocol.N.empty()) fail("protocol.N", "empty grid");
      if (!(c.protocol.alpha > 0.5)) fail("protocol.alpha", "must exceed 1/2");
      if (!(c.protocol.epsilon > 0.0 && c.protocol.epsilon <= 0.5)) fail("protocol.epsilon", "must lie in (0, 1/2]");
      if (c.protocol.g && *c.protocol.g < 1) fail("protocol.g", "must be at least 1");
      if (c.protocol.exact) {
        const auto& e = *c.protocol.exact;
        if (e.g < 1 || e.M < 1) fail("protocol.exact", "g and M must be at least 1");
        if (1 + static_cast<std::size_t>(e.g) * e.M > e.N) fail("protocol.exact", "N must be at least 1 + gM");
      }
      break;
    case Mode::GraphCert:
      break;
  }
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["mode"] = mode_name(c.mode);
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["jobs"] = c.jobs;
  const auto& m = c.model;
  j["model"] = {{"preset", m.preset},
                {"graph", {{"kind", m.graph.kind}, {"d", m.graph.d}, {"L", m.graph.L}, {"periodic", m.graph.periodic}}},
                {"N", m.N},
                {"alpha", m.alpha},
                {"J", m.J},
                {"field", m.field},
                {"with_K", m.with_K},
                {"with_fields", m.with_fields},
                {"field_scale", m.field_scale},
                {"segments", m.segments}};
  if (!m.graph.path.empty()) j["model"]["graph"]["path"] = m.graph.path;
  if (m.duration) j["model"]["duration"] = *m.duration;
  if (!m.spec.is_null()) j["model"]["spec"] = m.spec;
  j["grid"] = {{"N", c.N},         {"alpha", c.alpha}, {"instances", c.instances}, {"times", c.times},
               {"a", c.a},         {"t_max", c.t_max}, {"dt", c.dt},               {"refine_ratio", c.refine_ratio}};
  j["otoc"] = {{"i", c.otoc_i}, {"j", c.otoc_j}};
  const auto& ce = c.certify;
  j["certify"] = {{"N", ce.N},
                  {"alphas", ce.alphas},
                  {"specs", ce.specs},
                  {"otoc_times", ce.otoc_times},
                  {"D", ce.D},
                  {"duhamel_times", ce.duhamel_times},
                  {"lemma1_times", ce.lemma1_times},
                  {"operators", ce.operators},
                  {"checks", ce.checks},
                  {"slack", ce.slack},
                  {"quad_tol", ce.quad_tol}};
  if (ce.b) j["certify"]["b"] = *ce.b;
  const auto& p = c.protocol;
  j["protocol"] = {{"N", p.N},           {"alpha", p.alpha},        {"epsilon", p.epsilon},
                   {"family", p.family}, {"slope_tol", p.slope_tol}};
  auto opt = [&](const char* k, const std::optional<double>& v) {
    if (v) j["protocol"][k] = *v;
  };
  if (p.g) j["protocol"]["g"] = *p.g;
  opt("c1", p.c1);
  opt("c2", p.c2);
  opt("c3", p.c3);
  opt("c4", p.c4);
  opt("c5", p.c5);
  opt("c6", p.c6);
  opt("t_X", p.t_X);
  if (p.exact) {
    j["protocol"]["exact"] = {{"N", p.exact->N}, {"g", p.exact->g}, {"M", p.exact->M}, {"tau", p.exact->tau},
                              {"tol", p.exact->tol}};
  }
  const auto& gc = c.graph_cert;
  j["graph_cert"] = {{"graph",
                      {{"kind", gc.graph.kind}, {"d", gc.graph.d}, {"L", gc.graph.L}, {"periodic", gc.graph.periodic}}}};
  if (!gc.graph.path.empty()) j["graph_cert"]["graph"]["path"] = gc.graph.path;
  if (gc.c1) j["graph_cert"]["c1"] = *gc.c1;
  if (gc.c2) j["graph_cert"]["c2"] = *gc.c2;
  return j;
}

HamiltonianSpec spec_from_json(const json& j) {
  Reader r(j, "model.spec");
  if (!r.has("graph")) Reader::fail("model.spec", "needs \"graph\"");
  Reader g = r.child("graph");
  std::uint64_t n = 0;
  if (!g.has("N")) Reader::fail("model.spec.graph", "needs \"N\"");
  g.get("N", n);
  std::vector<Edge> edges;
  std::string kind = "edges";
  g.get("kind", kind);
  if (g.has("edges")) {
    const json& e = g.raw("edges");
    if (!e.is_array()) Reader::fail("model.spec.graph.edges", "expected a list of [u, v]");
    for (std::size_t k = 0; k < e.size(); ++k) {
      const auto uv = convert_list<std::uint64_t>(e[k], "model.spec.graph.edges[" + std::to_string(k) + "]");
      if (uv.size() != 2) Reader::fail("model.spec.graph.edges[" + std::to_string(k) + "]", "expected [u, v]");
      edges.emplace_back(uv[0], uv[1]);
    }
  }
  g.finish();
  HamiltonianSpec spec{empty_graph(1), 1.0, {}};
  try {
    if (kind == "edges") {
      spec.graph = InteractionGraph(n, edges);
    } else {
      GraphConfig gc;
      gc.kind = kind;
      spec.graph = build_graph(gc, n);
    }
  } catch (const ArgumentError& e) {
    Reader::fail("model.spec.graph", e.what());
  }
  r.get("alpha", spec.alpha);
  if (!r.has("segments")) Reader::fail("model.spec", "needs \"segments\"");
  const json& segs = r.raw("segments");
  if (!segs.is_array() || segs.empty()) Reader::fail("model.spec.segments", "expected a non-empty list");
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const std::string p = "model.spec.segments[" + std::to_string(k) + "]";
    Reader s(segs[k], p);
    Segment seg;
    s.get("duration", seg.duration);
    if (s.has("J")) seg.J = read_pairs(s.raw("J"), p + ".J");
    if (s.has("K")) seg.K = read_pairs(s.raw("K"), p + ".K");
    if (s.has("h")) {
      const json& h = s.raw("h");
      if (!h.is_array()) Reader::fail(p + ".h", "expected one [x, y, z] per site");
      for (std::size_t v = 0; v < h.size(); ++v)
        seg.h.push_back(Reader::convert<Field>(h[v], p + ".h[" + std::to_string(v) + "]"));
    }
    s.finish();
    spec.segments.push_back(std::move(seg));
  }
  r.finish();
  try {
    require_valid(spec);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("model.spec: ") + e.what());
  }
  return spec;
}

json spec_to_json(const HamiltonianSpec& s) {
  json j;
  json edges = json::array();
  for (const auto& [u, v] : s.graph.edges()) edges.push_back({u, v});
  j["graph"] = {{"N", s.n_sites()}, {"edges", edges}};
  j["alpha"] = s.alpha;
  auto pairs = [](const std::map<SitePair, Coupling>& m) {
    json out = json::array();
    for (const auto& [ij, c] : m) out.push_back({{"i", ij.first}, {"j", ij.second}, {"c", c}});
    return out;
  };
  j["segments"] = json::array();
  for (const auto& seg : s.segments) {
    json js{{"duration", seg.duration}, {"J", pairs(seg.J)}, {"K", pairs(seg.K)}};
    if (!seg.h.empty()) js["h"] = seg.h;
    j["segments"].push_back(js);
  }
  return j;
}

InteractionGraph build_graph(const GraphConfig& g, std::size_t N) {
  if (g.kind == "chain") return build_lattice(1, static_cast<int>(N), g.periodic);
  if (g.kind == "complete") return complete_graph(N);
  if (g.kind == "empty") return empty_graph(N);
  if (g.kind == "lattice") {
    int L = g.L;
    if (L == 0) {
      L = static_cast<int>(std::lround(std::pow(static_cast<double>(N), 1.0 / g.d)));
      if (std::lround(std::pow(L, g.d)) != static_cast<long>(N)) {
        throw ConfigError("graph: N = " + std::to_string(N) + " is not a " + std::to_string(g.d) + "-th power");
      }
    }
    return build_lattice(g.d, L, g.periodic);
  }
  if (g.kind == "edges") {
    std::ifstream in(g.path);
    if (!in) throw ConfigError("graph: cannot open edge list '" + g.path + "'");
    InteractionGraph out = read_edge_list(in);
    if (N != 0 && out.n_vertices() != N) {
      throw ConfigError("graph: edge list has " + std::to_string(out.n_vertices()) + " vertices, expected " +
                        std::to_string(N));
    }
    return out;
  }
  throw ConfigError("graph: unknown kind '" + g.kind + "'");
}

HamiltonianSpec build_model(const ModelConfig& m, std::size_t N, double alpha, double duration, std::uint64_t seed,
                            std::uint64_t cell) {
  const double per_segment = m.duration ? *m.duration : duration / static_cast<double>(m.segments);
  HamiltonianSpec spec{empty_graph(1), alpha, {}};
  if (m.preset == "explicit") {
    spec = spec_from_json(m.spec);
  } else if (m.preset == "random") {
    RandomSpecOptions opt{alpha, m.segments, per_segment, m.with_K, m.with_fields, m.field_scale};
    spec = random_spec(build_graph(m.graph, N), opt, seed, cell);
  } else if (m.preset == "random_symmetric") {
    spec = random_symmetric_spec(N, alpha, m.with_fields ? m.field_scale : 0.0, seed, cell);
    spec.segments.front().duration = per_segment;
    if (!m.with_fields) spec.segments.front().h.clear();
    for (std::size_t k = 1; k < m.segments; ++k) {
      Segment s = random_symmetric_spec(N, alpha, m.with_fields ? m.field_scale : 0.0, seed, cell + k).segments.front();
      s.duration = per_segment;
      if (!m.with_fields) s.h.clear();
      spec.segments.push_back(std::move(s));
    }
  } else if (m.preset == "zz_pair") {
    if (N != 2) throw ConfigError("model: preset zz_pair has N = 2, got " + std::to_string(N));
    Segment seg;
    seg.duration = m.duration ? *m.duration : duration;
    seg.J[{0, 1}] = zz_coupling(m.J);
    spec = HamiltonianSpec{empty_graph(2), alpha, {seg}};
  } else if (m.preset == "uniform_zz") {
    Segment seg = uniform_J_segment(N, zz_coupling(m.J), m.duration ? *m.duration : duration);
    if (m.field != Field{0.0, 0.0, 0.0}) add_uniform_field(seg, N, m.field);
    spec = HamiltonianSpec{empty_graph(N), alpha, {seg}};
  } else {
    throw ConfigError("model: unknown preset '" + m.preset + "'");
  }
  require_valid(spec);
  return spec;
}

std::uint64_t cell_key(std::size_t N, double alpha, std::size_t instance) {
  return splitmix64(splitmix64(splitmix64(N) ^ std::bit_cast<std::uint64_t>(alpha)) ^ instance);
}

}  // namespace opgrowth
