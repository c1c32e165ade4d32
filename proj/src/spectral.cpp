#include "tvg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tvg {

GossipMatrix build_laplacian(const WeightedGraph& g) {
  const int n = g.n();
  Matrix L = Matrix::Zero(n, n);
  for (const auto& [e, w] : g.weights()) {
    L(e.first, e.first) += w;
    L(e.second, e.second) += w;
    L(e.first, e.second) -= w;
    L(e.second, e.first) -= w;
  }
  return L;
}

Matrix mini_laplacian(int n, int i, int j) {
  if (i == j) throw std::invalid_argument("mini_laplacian: i == j");
  if (i < 0 || j < 0 || i >= n || j >= n)
    throw std::invalid_argument("mini_laplacian: index out of range");
  Matrix l = Matrix::Zero(n, n);
  l(i, i) = 1.0;
  l(j, j) = 1.0;
  l(i, j) = -1.0;
  l(j, i) = -1.0;
  return l;
}

Vector symmetric_eigenvalues(const Matrix& W) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(W, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("symmetric_eigenvalues: eigensolver failed");
  return solver.eigenvalues();
}

double operator_norm(const Matrix& W) {
  Vector ev = symmetric_eigenvalues(W);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

GossipDiagnostic validate_gossip(const Matrix& W, const Graph& g) {
  const int n = g.n();
  if (W.rows() != n || W.cols() != n)
    throw std::invalid_argument("validate_gossip: dimension mismatch");

  const double scale = W.cwiseAbs().maxCoeff();
  const double sym_tol = 1e-12 * std::max(1.0, scale);
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > sym_tol)
    return {false, "matrix is not symmetric"};

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!g.has_edge(i, j) && W(i, j) != 0.0)
        return {false, "nonzero entry outside the edge set"};

  Vector ev = symmetric_eigenvalues(W);
  const double lambda_top = std::max(std::abs(ev(0)), std::abs(ev(n - 1)));
  const double zero_tol = kZeroEigenRatio * lambda_top;

  Vector ones_image = W * Vector::Ones(n);
  if (ones_image.norm() > zero_tol * std::sqrt(double(n)) + 1e-300)
    return {false, "ones vector is not in the kernel"};

  int kernel_dim = 0;
  for (int i = 0; i < n; ++i)
    if (std::abs(ev(i)) <= zero_tol) ++kernel_dim;
  if (kernel_dim != 1)
    return {false, "kernel dimension is " + std::to_string(kernel_dim) + ", expected 1"};

  return {true, ""};
}

SpectralSummary spectral_summary(const GossipMatrix& W) {
  Vector ev = symmetric_eigenvalues(W);
  const int n = static_cast<int>(ev.size());
  SpectralSummary s;
  s.lambda_max = ev(n - 1);
  const double zero_tol = kZeroEigenRatio * std::max(std::abs(ev(0)), std::abs(s.lambda_max));
  int kernel_dim = 0;
  s.lambda_min_plus = 0.0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(ev(i)) <= zero_tol) {
      ++kernel_dim;
    } else if (s.lambda_min_plus == 0.0 && ev(i) > zero_tol) {
      s.lambda_min_plus = ev(i);
    }
  }
  if (kernel_dim != 1 || ev(0) < -zero_tol)
    throw std::invalid_argument("spectral_summary: matrix is not PSD with a 1-dimensional kernel");
  s.chi = s.lambda_max / s.lambda_min_plus;
  return s;
}

double gershgorin_bound(const WeightedGraph& g) { return 2.0 * g.max_weighted_degree(); }

WeightedGraph shortest_path_weighting(const Graph& g) {
  if (!g.is_connected())
    throw std::invalid_argument("shortest_path_weighting: graph is disconnected");
  const int n = g.n();
  auto adj = g.adjacency();
  std::map<Edge, double> weights;

  // One BFS per source; paths to all higher-index targets follow the
  // lowest-index-predecessor chains.
  for (int s = 0; s < n; ++s) {
    auto dist = g.bfs_distances(s);
    std::vector<int> pred(n, -1);
    for (int v = 0; v < n; ++v) {
      if (v == s) continue;
      for (int u : adj[v]) {  // sorted, first hit is lowest index
        if (dist[u] == dist[v] - 1) {
          pred[v] = u;
          break;
        }
      }
    }
    for (int t = s + 1; t < n; ++t) {
      for (int v = t; v != s; v = pred[v]) weights[make_edge(v, pred[v])] += 1.0;
    }
  }
  return WeightedGraph(g, weights);
}

namespace {

// Lowest lexicographic edge whose removal keeps the graph connected; falls
// back to the overall lowest edge when the graph is a tree.
Edge pick_tunable_edge(const Graph& g) {
  for (const auto& e : g.edges()) {
    Graph trial = g;
    trial.remove_edge(e.first, e.second);
    if (trial.is_connected()) return e;
  }
  return *g.edges().begin();
}

double chi_with_factor(const WeightedGraph& g, const Edge& e, double base_weight, double factor) {
  WeightedGraph trial = g;
  trial.set_weight(e.first, e.second, base_weight * factor);
  try {
    return spectral_summary(build_laplacian(trial)).chi;
  } catch (const std::invalid_argument&) {
    // The edge weight is so small the kernel looks 2-dimensional: chi has
    // left the representable range upward.
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

WeightedGraph retune_chi(const WeightedGraph& g, double chi_target) {
  if (!g.graph().is_connected())
    throw std::invalid_argument("retune_chi: graph is disconnected");
  const double chi0 = spectral_summary(build_laplacian(g)).chi;
  constexpr double rel_tol = 1e-6;
  if (chi_target < chi0 * (1.0 - rel_tol))
    throw std::invalid_argument("retune_chi: chi_target below current chi");
  if (std::abs(chi0 - chi_target) <= rel_tol * chi_target) return g;

  const Edge e = pick_tunable_edge(g.graph());
  const double base_weight = g.weight(e.first, e.second);
  constexpr double kFloorFactor = 1e-12;

  double lo = std::log(kFloorFactor), hi = 0.0;  // bisect in log(factor)
  if (chi_with_factor(g, e, base_weight, kFloorFactor) < chi_target)
    throw std::runtime_error("retune_chi: chi_target unreachable within weight factor [1e-12, 1]");

  double factor = 1.0;
  for (int iter = 0; iter < 64; ++iter) {
    double mid = 0.5 * (lo + hi);
    factor = std::exp(mid);
    double chi = chi_with_factor(g, e, base_weight, factor);
    if (std::abs(chi - chi_target) <= rel_tol * chi_target) break;
    if (chi < chi_target)
      hi = mid;  // shrink the weight further
    else
      lo = mid;
  }
  WeightedGraph tuned = g;
  tuned.set_weight(e.first, e.second, base_weight * factor);
  const double chi = spectral_summary(build_laplacian(tuned)).chi;
  if (std::abs(chi - chi_target) > rel_tol * chi_target)
    throw std::runtime_error("retune_chi: bisection did not reach the requested tolerance");
  return tuned;
}

}  // namespace tvg
