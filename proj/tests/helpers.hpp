#ifndef TVG_TEST_HELPERS_HPP
#define TVG_TEST_HELPERS_HPP

#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "tvg/graph.hpp"
#include "tvg/spectral.hpp"

namespace tvgtest {

// Union-find component count; independent of the library's BFS machinery.
inline int component_count(const tvg::Graph& g) {
  std::vector<int> parent(g.n());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& [i, j] : g.edges()) parent[find(i)] = find(j);
  int count = 0;
  for (int v = 0; v < g.n(); ++v) count += find(v) == v;
  return count;
}

// Erdos-Renyi graph; may be disconnected.
inline tvg::Graph random_graph(int n, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  tvg::Graph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng) < p) g.add_edge(i, j);
  return g;
}

// Random spanning tree (random attachment) plus `extra` random chords.
inline tvg::Graph random_connected_graph(int n, int extra, std::mt19937_64& rng) {
  tvg::Graph g(n);
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> pick(0, v - 1);
    g.add_edge(v, pick(rng));
  }
  std::uniform_int_distribution<int> any(0, n - 1);
  for (int e = 0; e < extra; ++e) {
    int i = any(rng), j = any(rng);
    if (i != j && !g.has_edge(i, j)) g.add_edge(i, j);
  }
  return g;
}

inline tvg::WeightedGraph random_weights(const tvg::Graph& g, std::mt19937_64& rng,
                                         double lo = 0.1, double hi = 3.0) {
  std::uniform_real_distribution<double> w(lo, hi);
  std::map<tvg::Edge, double> weights;
  for (const auto& e : g.edges()) weights[e] = w(rng);
  return tvg::WeightedGraph(g, weights);
}

// Central finite differences of a scalar field.
inline tvg::Vector fd_gradient(const std::function<double(const tvg::Vector&)>& f,
                               const tvg::Vector& x, double h = 1e-6) {
  tvg::Vector g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    tvg::Vector hi = x, lo = x;
    hi(i) += h;
    lo(i) -= h;
    g(i) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

inline tvg::Vector random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  tvg::Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = normal(rng);
  return x;
}

}  // namespace tvgtest

#endif  // TVG_TEST_HELPERS_HPP
