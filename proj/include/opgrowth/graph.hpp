#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

namespace opgrowth {

using Edge = std::pair<std::size_t, std::size_t>;  // always first < second

inline constexpr std::size_t kDefaultMaxVertices = 4096;
inline constexpr int kUnreachable = std::numeric_limits<int>::max();

// Unweighted interaction graph with a cached all-pairs distance table.
class InteractionGraph {
 public:
  InteractionGraph(std::size_t n_vertices, std::vector<Edge> edges);

  std::size_t n_vertices() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return adj_.at(v); }
  bool has_edge(std::size_t u, std::size_t v) const;
  std::size_t max_degree() const { return max_degree_; }

  // Edge-count distance; kUnreachable between components.
  int dist(std::size_t u, std::size_t v) const { return dist_[u * n_ + v]; }
  bool connected() const;
  int diameter() const;

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> dist_;
  std::size_t max_degree_ = 0;
};

// Hypercubic lattice of side L in d dimensions with nearest-neighbour edges.
InteractionGraph build_lattice(int d, int L, bool periodic, std::size_t max_vertices = kDefaultMaxVertices);
InteractionGraph complete_graph(std::size_t n);
InteractionGraph empty_graph(std::size_t n);

// S_D: vertices within distance D of v, ascending.
std::vector<std::size_t> ball(const InteractionGraph& g, std::size_t v, int D);
// Q_D = S_D \ S_{D-1}.
std::vector<std::size_t> shell(const InteractionGraph& g, std::size_t v, int D);

struct DimensionCertificate {
  int d = 1;
  double c1 = 0.0;
  double c2 = 0.0;
  int D_min = 1;
  int D_max = 1;
};

// Smallest c1, c2 with |S_D| <= c1 D^d and |Q_D| <= c2 D^{d-1} for every vertex
// and D in [1, max(1, diameter)]. D = 0 is excluded since |S_0| = 1.
DimensionCertificate certify_dimension(const InteractionGraph& g, int d);

// "N" on the first line, then one "u v" pair per line.
InteractionGraph read_edge_list(std::istream& in, std::size_t max_vertices = kDefaultMaxVertices);
void write_edge_list(std::ostream& out, const InteractionGraph& g);

}  // namespace opgrowth
