#ifndef TVG_CONSENSUS_HPP
#define TVG_CONSENSUS_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "tvg/markov.hpp"
#include "tvg/spectral.hpp"

namespace tvg {

// Step size and momentum schedule for the accelerated consensus iteration.
struct ConsensusParams {
  double gamma = 0.0;
  double p = 0.25;
  double beta = 0.0;
  double eta = 0.0;
  double theta = 0.0;
  int M = 2;       // batch-doubling cap
  int B = 1;       // base batch
  int b = 1;       // batch knob, b = tau in the tuned regime
  long N = 0;      // iteration budget

  void validate(double lambda_max, double lambda_min_plus, double rho, int tau) const;
};

// Momentum schedule from a given step size:
//   beta = sqrt(4 p^2 lambda_min gamma / 3), eta = sqrt(12 / (lambda_min gamma)),
//   theta = (p/eta - 1) / (beta p / eta - 1),
//   M = max{2, ceil(sqrt((1 + 2/beta) / 4))}, B = ceil(b log2 M).
ConsensusParams consensus_params_from_gamma(double gamma, double lambda_min_plus, int b, long N);

// Step size from the spectral constants,
//   gamma = min{ 3/(4 lambda_max), lambda_min^3 / [1800 rho^2 (tau/b + tau^2/b^2)]^2 },
// then the schedule above.
ConsensusParams derive_consensus_params(double lambda_max, double lambda_min_plus, double rho,
                                        int tau, int b, long N);

// Iterates of the accelerated consensus run. Columns are independent scalar
// consensus problems sharing one J_k stream; the scalar case is one column.
struct ConsensusState {
  Matrix x, x_f, x_g;
  std::uint64_t T = 0;  // cumulative communications
  long k = 0;

  static ConsensusState init(const Matrix& x0) { return {x0, x0, x0, 0, 0}; }
};

struct MlmcDraw {
  Matrix g;
  int J = 0;
  std::uint64_t pulls = 0;  // 2^J * B gossip rounds consumed
};

// Multilevel Monte Carlo gradient estimate at x_g: draws J with
// P(J = j) = 2^-j (j >= 1), pulls 2^J * B consecutive gossip matrices,
// forms prefix means g_j over the first 2^j B pulls and returns
// g_0 + 2^J (g_J - g_{J-1}) when 2^J <= M, else g_0.
MlmcDraw mlmc_gradient(const Matrix& x_g, GossipSource& src, const ConsensusParams& params,
                       std::mt19937_64& rng);

// One iteration of the accelerated consensus recursion: extrapolate x_g,
// estimate the gradient, descend into x_f and recombine into x.
void consensus_step(ConsensusState& state, GossipSource& src, const ConsensusParams& params,
                    std::mt19937_64& rng);

// r(x) = (1/2) x^T W x so that the gossip product W x is exactly the gradient
// field the MLMC estimator is unbiased for.
double r_value(const GossipMatrix& W_tilde, const Vector& x);
Vector r_grad(const GossipMatrix& W_tilde, const Vector& x);

struct ConsensusTraceRow {
  long k = 0;
  std::uint64_t T = 0;
  double dist2 = 0.0;      // ||x - x*||^2
  double r_gap = 0.0;      // r(x_f) - r(x*)
  double potential = 0.0;  // dist2 + (24 / lambda_min) r_gap
};

using ConsensusTrace = std::vector<ConsensusTraceRow>;

// N steps of the consensus iteration on a scalar per node; the convergence
// potential dist2 + (24/lambda_min) r_gap is tracked against x* = mean(x0).
ConsensusTrace run_consensus(const Vector& x0, MarkovGraphChain& chain,
                             const ConsensusParams& params, std::uint64_t seed);

// Generic inner driver used by the outer optimization loop: T iterations on a
// matrix payload; returns the final x iterate and communication count.
struct InnerConsensusResult {
  Matrix x;
  std::uint64_t communications = 0;
};
InnerConsensusResult run_inner_consensus(const Matrix& x0, GossipSource& src,
                                         const ConsensusParams& params, long iterations,
                                         std::mt19937_64& rng);

struct GossipTraceRow {
  long k = 0;
  double dist2 = 0.0;
};

// Baseline comparator: x <- (I - W/lambda_max(W_tilde)) x per communication.
std::vector<GossipTraceRow> plain_gossip(const Vector& x0, MarkovGraphChain& chain, long steps);

}  // namespace tvg

#endif  // TVG_CONSENSUS_HPP
