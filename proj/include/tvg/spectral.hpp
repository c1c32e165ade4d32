#ifndef TVG_SPECTRAL_HPP
#define TVG_SPECTRAL_HPP

#include <Eigen/Dense>
#include <string>

#include "tvg/graph.hpp"

namespace tvg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetric matrix respecting the sparsity of a graph whose kernel is the
// consensus line span{1}. Laplacians of connected weighted graphs qualify.
using GossipMatrix = Matrix;

// Eigenvalues at or below kZeroEigenRatio * lambda_max count as kernel.
inline constexpr double kZeroEigenRatio = 1e-9;

struct SpectralSummary {
  double lambda_max = 0.0;
  double lambda_min_plus = 0.0;
  double chi = 1.0;
};

struct GossipDiagnostic {
  bool ok = false;
  std::string violation;  // empty when ok
};

// Weighted Laplacian: diagonal = incident weight sums, off-diagonal -a_ij.
GossipMatrix build_laplacian(const WeightedGraph& g);

// Laplacian of the single edge (i, j) embedded in dimension n. Rank 1, norm 2.
Matrix mini_laplacian(int n, int i, int j);

// Checks the gossip-matrix conditions against a declared graph: symmetry,
// sparsity outside the edge set, and kernel equal to span{1}.
GossipDiagnostic validate_gossip(const Matrix& W, const Graph& g);

// Eigenvalues in ascending order (dense symmetric solve).
Vector symmetric_eigenvalues(const Matrix& W);

// Operator norm of a symmetric matrix.
double operator_norm(const Matrix& W);

// lambda_max, smallest positive eigenvalue and their ratio. Throws if the
// numerical kernel dimension is not 1.
SpectralSummary spectral_summary(const GossipMatrix& W);

// 2 * d_max(g); upper bound for lambda_max of the Laplacian by Gershgorin.
double gershgorin_bound(const WeightedGraph& g);

// Weighting of a connected graph where each edge weight counts the chosen
// BFS shortest paths (one per unordered vertex pair) traversing it. The
// resulting Laplacian satisfies lambda_min_plus >= n/D and chi <= 2 n D.
WeightedGraph shortest_path_weighting(const Graph& g);

// Scales one edge weight by a bisection-found factor in [1e-12, 1] until the
// Laplacian's chi matches chi_target to 1e-6 relative. The edge is the lowest
// lexicographic one whose removal keeps the graph connected, or the lowest
// lexicographic edge overall when every edge is a bridge.
WeightedGraph retune_chi(const WeightedGraph& g, double chi_target);

}  // namespace tvg

#endif  // TVG_SPECTRAL_HPP
