#include "opgrowth/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <string>

#include "opgrowth/errors.hpp"

namespace opgrowth {

InteractionGraph::InteractionGraph(std::size_t n_vertices, std::vector<Edge> edges)
    : n_(n_vertices), adj_(n_vertices) {
  if (n_ == 0) throw ArgumentError("graph needs at least one vertex");
  std::set<Edge> seen;
  for (auto [u, v] : edges) {
    if (u >= n_ || v >= n_) throw ArgumentError("edge endpoint out of range");
    if (u == v) throw ArgumentError("self-loop at vertex " + std::to_string(u));
    if (u > v) std::swap(u, v);
    if (!seen.insert({u, v}).second) {
      throw ArgumentError("duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
    }
  }
  edges_.assign(seen.begin(), seen.end());
  for (auto [u, v] : edges_) {
    adj_[u].push_back(v);
    adj_[v].push_back(u);
  }
  for (auto& a : adj_) {
    std::sort(a.begin(), a.end());
    max_degree_ = std::max(max_degree_, a.size());
  }

  dist_.assign(n_ * n_, kUnreachable);
  std::vector<std::size_t> queue;
  queue.reserve(n_);
  for (std::size_t s = 0; s < n_; ++s) {
    int* row = dist_.data() + s * n_;
    row[s] = 0;
    queue.clear();
    queue.push_back(s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t u = queue[head];
      for (std::size_t w : adj_[u]) {
        if (row[w] == kUnreachable) {
          row[w] = row[u] + 1;
          queue.push_back(w);
        }
      }
    }
  }
}

bool InteractionGraph::has_edge(std::size_t u, std::size_t v) const {
  if (u >= n_ || v >= n_) return false;
  const auto& a = adj_[u];
  return std::binary_search(a.begin(), a.end(), v);
}

bool InteractionGraph::connected() const {
  return std::none_of(dist_.begin(), dist_.begin() + static_cast<std::ptrdiff_t>(n_),
                      [](int d) { return d == kUnreachable; });
}

int InteractionGraph::diameter() const {
  int best = 0;
  for (int d : dist_) {
    if (d == kUnreachable) return kUnreachable;
    best = std::max(best, d);
  }
  return best;
}

InteractionGraph build_lattice(int d, int L, bool periodic, std::size_t max_vertices) {
  if (d < 1 || d > 3) throw ArgumentError("lattice dimension must be 1, 2 or 3");
  if (L < 2) throw ArgumentError("lattice side must be at least 2");
  const double total = std::pow(static_cast<double>(L), d);
  if (total > static_cast<double>(max_vertices)) {
    throw CapacityError("lattice size", static_cast<std::size_t>(total), max_vertices);
  }
  const std::size_t n = static_cast<std::size_t>(total);
  std::set<Edge> edges;
  std::vector<int> coord(static_cast<std::size_t>(d));
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t rem = v;
    for (int a = 0; a < d; ++a) {
      coord[static_cast<std::size_t>(a)] = static_cast<int>(rem % static_cast<std::size_t>(L));
      rem /= static_cast<std::size_t>(L);
    }
    std::size_t stride = 1;
    for (int a = 0; a < d; ++a) {
      const int c = coord[static_cast<std::size_t>(a)];
      int next = c + 1;
      if (next == L) next = periodic ? 0 : -1;
      if (next >= 0 && next != c) {
        const std::size_t w = v + static_cast<std::size_t>(next - c) * stride;
        edges.insert({std::min(v, w), std::max(v, w)});
      }
      stride *= static_cast<std::size_t>(L);
    }
  }
  return InteractionGraph(n, std::vector<Edge>(edges.begin(), edges.end()));
}

InteractionGraph complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  }
  return InteractionGraph(n, std::move(edges));
}

InteractionGraph empty_graph(std::size_t n) { return InteractionGraph(n, {}); }

std::vector<std::size_t> ball(const InteractionGraph& g, std::size_t v, int D) {
  if (v >= g.n_vertices()) throw ArgumentError("ball: vertex out of range");
  std::vector<std::size_t> out;
  if (D < 0) return out;
  for (std::size_t x = 0; x < g.n_vertices(); ++x) {
    if (g.dist(v, x) <= D) out.push_back(x);
  }
  return out;
}

std::vector<std::size_t> shell(const InteractionGraph& g, std::size_t v, int D) {
  if (v >= g.n_vertices()) throw ArgumentError("shell: vertex out of range");
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < g.n_vertices(); ++x) {
    if (g.dist(v, x) == D) out.push_back(x);
  }
  return out;
}

DimensionCertificate certify_dimension(const InteractionGraph& g, int d) {
  if (d < 1) throw ArgumentError("certify_dimension: d must be positive");
  const int diam = g.diameter();
  if (diam == kUnreachable) throw CertificationError("certify_dimension: graph is disconnected");
  DimensionCertificate cert;
  cert.d = d;
  cert.D_max = std::max(1, diam);
  const std::size_t n = g.n_vertices();
  std::vector<std::size_t> shell_count(static_cast<std::size_t>(cert.D_max) + 1);
  for (std::size_t v = 0; v < n; ++v) {
    std::fill(shell_count.begin(), shell_count.end(), 0);
    for (std::size_t x = 0; x < n; ++x) shell_count[static_cast<std::size_t>(g.dist(v, x))]++;
    std::size_t cumulative = shell_count[0];
    for (int D = 1; D <= cert.D_max; ++D) {
      const std::size_t q = shell_count[static_cast<std::size_t>(D)];
      cumulative += q;
      cert.c1 = std::max(cert.c1, static_cast<double>(cumulative) / std::pow(D, d));
      cert.c2 = std::max(cert.c2, static_cast<double>(q) / std::pow(D, d - 1));
    }
  }
  return cert;
}

InteractionGraph read_edge_list(std::istream& in, std::size_t max_vertices) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t n = 0;
  bool have_n = false;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (!have_n) {
      if (!(ls >> n) || n == 0) throw ConfigError("edge list line " + std::to_string(line_no) + ": expected vertex count");
      if (n > max_vertices) throw CapacityError("edge list vertex count", n, max_vertices);
      have_n = true;
      continue;
    }
    std::size_t u = 0, v = 0;
    if (!(ls >> u >> v)) throw ConfigError("edge list line " + std::to_string(line_no) + ": expected 'u v'");
    edges.emplace_back(u, v);
  }
  if (!have_n) throw ConfigError("edge list is empty");
  try {
    return InteractionGraph(n, std::move(edges));
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("edge list: ") + e.what());
  }
}

void write_edge_list(std::ostream& out, const InteractionGraph& g) {
  out << g.n_vertices() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

}  // namespace opgrowth
