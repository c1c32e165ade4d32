#include "tvg/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tvg {

void Graph::check_pair(int i, int j) const {
  if (i == j) throw std::invalid_argument("graph: self-loop (" + std::to_string(i) + ")");
  if (i < 0 || j < 0 || i >= n_ || j >= n_)
    throw std::invalid_argument("graph: vertex index out of range");
}

Graph::Graph(int n, const std::vector<Edge>& edges) : n_(n) {
  if (n <= 0) throw std::invalid_argument("graph: vertex count must be positive");
  for (const auto& [i, j] : edges) add_edge(i, j);
}

void Graph::add_edge(int i, int j) {
  check_pair(i, j);
  if (!edges_.insert(make_edge(i, j)).second)
    throw std::invalid_argument("graph: duplicate edge");
}

void Graph::remove_edge(int i, int j) {
  check_pair(i, j);
  if (edges_.erase(make_edge(i, j)) == 0)
    throw std::invalid_argument("graph: removing absent edge");
}

void Graph::toggle_edge(int i, int j) {
  check_pair(i, j);
  Edge e = make_edge(i, j);
  if (!edges_.insert(e).second) edges_.erase(e);
}

std::vector<std::vector<int>> Graph::adjacency() const {
  std::vector<std::vector<int>> adj(n_);
  for (const auto& [i, j] : edges_) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());
  return adj;
}

std::vector<int> Graph::bfs_distances(int s) const {
  if (s < 0 || s >= n_) throw std::invalid_argument("bfs: source out of range");
  auto adj = adjacency();
  std::vector<int> dist(n_, -1);
  std::deque<int> queue{s};
  dist[s] = 0;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int u : adj[v]) {
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

bool Graph::is_connected() const {
  if (n_ == 0) return false;
  auto dist = bfs_distances(0);
  return std::find(dist.begin(), dist.end(), -1) == dist.end();
}

int Graph::diameter() const {
  int d = 0;
  for (int s = 0; s < n_; ++s) {
    auto dist = bfs_distances(s);
    for (int v = 0; v < n_; ++v) {
      if (dist[v] < 0) throw std::invalid_argument("diameter: graph is disconnected");
      d = std::max(d, dist[v]);
    }
  }
  return d;
}

int Graph::max_degree() const {
  std::vector<int> deg(n_, 0);
  for (const auto& [i, j] : edges_) {
    ++deg[i];
    ++deg[j];
  }
  return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
}

std::vector<int> Graph::shortest_path(int s, int t) const {
  auto dist = bfs_distances(s);
  if (t < 0 || t >= n_) throw std::invalid_argument("shortest_path: target out of range");
  if (dist[t] < 0) return {};
  auto adj = adjacency();
  std::vector<int> path{t};
  int v = t;
  while (v != s) {
    int pred = -1;
    for (int u : adj[v]) {  // adjacency is sorted, so the first hit is lowest
      if (dist[u] == dist[v] - 1) {
        pred = u;
        break;
      }
    }
    path.push_back(pred);
    v = pred;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

WeightedGraph::WeightedGraph(const Graph& g) : graph_(g) {
  for (const auto& e : g.edges()) weights_[e] = 1.0;
}

WeightedGraph::WeightedGraph(const Graph& g, const std::map<Edge, double>& weights)
    : graph_(g), weights_(weights) {
  if (weights_.size() != g.edges().size())
    throw std::invalid_argument("weighted graph: weights must be keyed exactly by the edge set");
  for (const auto& [e, w] : weights_) {
    if (!g.has_edge(e.first, e.second))
      throw std::invalid_argument("weighted graph: weight on absent edge");
    if (!(w > 0)) throw std::invalid_argument("weighted graph: weights must be positive");
  }
}

double WeightedGraph::weight(int i, int j) const {
  auto it = weights_.find(make_edge(i, j));
  if (it == weights_.end()) throw std::invalid_argument("weight: absent edge");
  return it->second;
}

void WeightedGraph::set_weight(int i, int j, double w) {
  if (!(w > 0)) throw std::invalid_argument("set_weight: weights must be positive");
  auto it = weights_.find(make_edge(i, j));
  if (it == weights_.end()) throw std::invalid_argument("set_weight: absent edge");
  it->second = w;
}

double WeightedGraph::max_weighted_degree() const {
  std::vector<double> deg(n(), 0.0);
  for (const auto& [e, w] : weights_) {
    deg[e.first] += w;
    deg[e.second] += w;
  }
  return deg.empty() ? 0.0 : *std::max_element(deg.begin(), deg.end());
}

int edge_difference(const Graph& g1, const Graph& g2) {
  if (g1.n() != g2.n())
    throw std::invalid_argument("edge_difference: vertex-count mismatch");
  int diff = 0;
  for (const auto& e : g1.edges()) diff += g2.edges().count(e) == 0;
  for (const auto& e : g2.edges()) diff += g1.edges().count(e) == 0;
  return diff;
}

WeightedGraph read_graph(std::istream& in) {
  std::string line;
  auto next_data_line = [&](std::string& out) {
    while (std::getline(in, line)) {
      auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      out = line;
      return true;
    }
    return false;
  };

  std::string header;
  if (!next_data_line(header)) throw std::invalid_argument("graph file: empty input");
  std::istringstream hs(header);
  int n = 0, m = 0;
  if (!(hs >> n >> m)) throw std::invalid_argument("graph file: bad header, expected 'n m'");

  Graph g(n);
  std::map<Edge, double> weights;
  for (int k = 0; k < m; ++k) {
    std::string row;
    if (!next_data_line(row)) throw std::invalid_argument("graph file: fewer edge lines than declared");
    std::istringstream rs(row);
    int i = 0, j = 0;
    double w = 1.0;
    if (!(rs >> i >> j)) throw std::invalid_argument("graph file: bad edge line '" + row + "'");
    rs >> w;
    g.add_edge(i, j);
    weights[make_edge(i, j)] = w;
  }
  return WeightedGraph(g, weights);
}

WeightedGraph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("graph file: cannot open " + path);
  return read_graph(in);
}

void write_graph(std::ostream& out, const WeightedGraph& g) {
  out << g.n() << " " << g.graph().m() << "\n";
  char buf[64];
  for (const auto& [e, w] : g.weights()) {
    std::snprintf(buf, sizeof(buf), "%.17g", w);
    out << e.first << " " << e.second << " " << buf << "\n";
  }
}

void write_graph_file(const std::string& path, const WeightedGraph& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("graph file: cannot write " + path);
  write_graph(out, g);
}

}  // namespace tvg
