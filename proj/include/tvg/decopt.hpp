#ifndef TVG_DECOPT_HPP
#define TVG_DECOPT_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "tvg/consensus.hpp"

namespace tvg {

// Per-node objective with known strong-convexity and smoothness moduli of the
// global average it belongs to.
struct LocalObjective {
  int dim = 0;
  double mu = 0.0;
  double L = 0.0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
};

double average_value(const std::vector<LocalObjective>& objectives, const Vector& x);
Vector average_grad(const std::vector<LocalObjective>& objectives, const Vector& x);

// Spectral constants of the gossip sequence consumed by the schedule.
struct ChainConstants {
  double lambda_max = 0.0;
  double lambda_min_plus = 0.0;
  double chi = 1.0;
  double rho = 0.0;
  int tau = 1;
};

ChainConstants chain_constants(const MarkovGraphChain& chain);

struct DecoptParams {
  double gamma = 0.0;         // 1/L
  double eta_momentum = 0.0;  // (sqrt(L) - sqrt(mu)) / (sqrt(L) + sqrt(mu))
  long N = 0;                 // outer iterations
  long T = 0;                 // inner consensus iterations per outer step
};

// gamma = 1/L, eta from the condition number; N = ceil(sqrt(L/mu) ln(c0/eps));
// T = ceil(c_T tau (sqrt(chi) + rho^2/lambda_min^2) ln(1/eps_inner)) with
// eps_inner = eps^2 and calibration constant c_T = 4.
DecoptParams derive_outer_params(double mu, double L, double epsilon, double c0,
                                 const ChainConstants& cc);

// Per-node iterates; rows are nodes, columns are coordinates.
struct NodeState {
  Matrix x, y;

  static NodeState init(int n, const Vector& x0);
};

// One outer accelerated step: local gradients, T inner consensus iterations
// on the stacked gradients, then x <- y - gamma v, y <- x + eta (x - x_prev).
// Returns the communications consumed.
std::uint64_t outer_step(NodeState& state, const std::vector<LocalObjective>& objectives,
                         const DecoptParams& dp, const ConsensusParams& cp, GossipSource& src,
                         std::mt19937_64& rng);

struct DecoptTraceRow {
  long k = 0;
  std::uint64_t comms = 0;
  double gap = 0.0;            // f(mean of nodes) - f*
  double consensus_err = 0.0;  // max_i ||x_i - mean||
};

using DecoptTrace = std::vector<DecoptTraceRow>;

struct DecoptResult {
  DecoptTrace trace;
  NodeState state;
  double f_star = 0.0;
};

DecoptResult run_decopt(const std::vector<LocalObjective>& objectives, GossipSource& src,
                        const DecoptParams& dp, const ConsensusParams& cp, const Vector& x0,
                        std::uint64_t seed);

// Accelerated gradient descent on the average objective; the trusted oracle
// for f* and for trajectory comparisons.
struct AgdResult {
  Vector x;
  std::vector<Vector> trajectory;  // x_k including the start
  long iterations = 0;
};

AgdResult centralized_agd(const std::vector<LocalObjective>& objectives, const Vector& x0,
                          double gamma, double eta, double grad_tol, long max_iter);

// Decentralized gradient descent baseline: one communication per iteration,
// x_i <- sum_j (I - W_k/lambda_cap)_ij x_j - gamma grad f_i(x_i).
struct GossipGradientRow {
  long k = 0;  // communication rounds
  double dist2 = 0.0;
};
std::vector<GossipGradientRow> run_gossip_gradient(const std::vector<LocalObjective>& objectives,
                                                   GossipSource& src, double lambda_cap,
                                                   double gamma, long rounds, const Vector& x0,
                                                   const Vector& x_star);

// Random strongly convex quadratics f_i = (1/2) x^T A_i x + b_i^T x whose
// average Hessian has spectrum exactly inside [mu, L] (extremes attained).
std::vector<LocalObjective> random_quadratic_suite(int n, int dim, double mu, double L,
                                                   std::uint64_t seed);

// f_i(x) = (1/2) ||x - c_i||^2; the average is minimized at mean(c_i).
std::vector<LocalObjective> shifted_identity_suite(const std::vector<Vector>& centers);

}  // namespace tvg

#endif  // TVG_DECOPT_HPP
