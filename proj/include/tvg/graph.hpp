#ifndef TVG_GRAPH_HPP
#define TVG_GRAPH_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tvg {

// Unordered vertex pair, stored with first < second.
using Edge = std::pair<int, int>;

inline Edge make_edge(int i, int j) { return i < j ? Edge{i, j} : Edge{j, i}; }

// Loop-less undirected graph on vertices 0..n-1.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int n) : n_(n) {}
  Graph(int n, const std::vector<Edge>& edges);

  int n() const { return n_; }
  int m() const { return static_cast<int>(edges_.size()); }
  const std::set<Edge>& edges() const { return edges_; }

  bool has_edge(int i, int j) const { return edges_.count(make_edge(i, j)) > 0; }
  void add_edge(int i, int j);
  void remove_edge(int i, int j);
  // Adds the edge if absent, removes it if present.
  void toggle_edge(int i, int j);

  std::vector<std::vector<int>> adjacency() const;

  bool is_connected() const;
  // BFS distances from s; unreachable vertices get -1.
  std::vector<int> bfs_distances(int s) const;
  // Max over all pairs of BFS distances; requires connectivity.
  int diameter() const;
  int max_degree() const;

  // Shortest path from s to t as a vertex list, chosen deterministically:
  // predecessor of each vertex is its lowest-index neighbor one BFS layer
  // closer to s. Empty if unreachable.
  std::vector<int> shortest_path(int s, int t) const;

  bool operator==(const Graph& other) const {
    return n_ == other.n_ && edges_ == other.edges_;
  }

 private:
  void check_pair(int i, int j) const;

  int n_ = 0;
  std::set<Edge> edges_;
};

// Graph with positive edge weights keyed exactly by the edge set.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  explicit WeightedGraph(const Graph& g);  // unit weights
  WeightedGraph(const Graph& g, const std::map<Edge, double>& weights);

  const Graph& graph() const { return graph_; }
  int n() const { return graph_.n(); }
  const std::map<Edge, double>& weights() const { return weights_; }
  double weight(int i, int j) const;
  void set_weight(int i, int j, double w);

  // Max over vertices of the incident weight sum.
  double max_weighted_degree() const;

 private:
  Graph graph_;
  std::map<Edge, double> weights_;
};

// |E1 symmetric-difference E2|. Throws on vertex-count mismatch.
int edge_difference(const Graph& g1, const Graph& g2);

// Text format: first line "n m", then m lines "i j [w]" (0-based, weight
// defaults to 1.0). Lines starting with '#' are comments.
WeightedGraph read_graph(std::istream& in);
WeightedGraph read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const WeightedGraph& g);
void write_graph_file(const std::string& path, const WeightedGraph& g);

}  // namespace tvg

#endif  // TVG_GRAPH_HPP
