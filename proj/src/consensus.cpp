#include "tvg/consensus.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "tvg/rng.hpp"

namespace tvg {

void ConsensusParams::validate(double lambda_max, double lambda_min_plus, double rho,
                               int tau) const {
  if (!(gamma > 0)) throw std::invalid_argument("consensus params: gamma must be positive");
  if (p != 0.25) throw std::invalid_argument("consensus params: p must be 1/4");
  if (!(beta > 0 && beta <= 1)) throw std::invalid_argument("consensus params: beta outside (0, 1]");
  if (!(eta >= 1)) throw std::invalid_argument("consensus params: eta must be >= 1");
  if (!(theta > 0 && theta < 1))
    throw std::invalid_argument("consensus params: theta outside (0, 1)");
  if (M < 2) throw std::invalid_argument("consensus params: M must be >= 2");
  if (B < 1 || b < 1) throw std::invalid_argument("consensus params: B and b must be >= 1");
  if (B != static_cast<int>(std::ceil(b * std::log2(double(M)))))
    throw std::invalid_argument("consensus params: B != ceil(b log2 M)");
  const double noise_cap =
      rho > 0 ? std::pow(lambda_min_plus, 3) /
                    std::pow(1800.0 * rho * rho *
                                 (double(tau) / b + double(tau) * tau / (double(b) * b)),
                             2)
              : std::numeric_limits<double>::infinity();
  const double cap = std::min(3.0 / (4.0 * lambda_max), noise_cap);
  if (gamma > cap * (1.0 + 1e-12))
    throw std::invalid_argument("consensus params: gamma above the admissible interval");
}

ConsensusParams consensus_params_from_gamma(double gamma, double lambda_min_plus, int b, long N) {
  if (!(gamma > 0) || !(lambda_min_plus > 0))
    throw std::invalid_argument("consensus params: nonpositive inputs");
  if (b < 1) throw std::invalid_argument("consensus params: b must be >= 1");
  ConsensusParams cp;
  cp.gamma = gamma;
  cp.p = 0.25;
  cp.beta = std::sqrt(4.0 * cp.p * cp.p * lambda_min_plus * gamma / 3.0);
  cp.eta = std::sqrt(12.0 / (lambda_min_plus * gamma));
  cp.theta = (cp.p / cp.eta - 1.0) / (cp.beta * cp.p / cp.eta - 1.0);
  cp.M = std::max(2, static_cast<int>(std::ceil(std::sqrt(0.25 * (1.0 + 2.0 / cp.beta)))));
  cp.b = b;
  cp.B = static_cast<int>(std::ceil(b * std::log2(double(cp.M))));
  cp.N = N;
  return cp;
}

ConsensusParams derive_consensus_params(double lambda_max, double lambda_min_plus, double rho,
                                        int tau, int b, long N) {
  if (!(lambda_max > 0) || !(lambda_min_plus > 0) || rho < 0)
    throw std::invalid_argument("consensus params: nonpositive spectral inputs");
  if (tau < 1 || b < 1) throw std::invalid_argument("consensus params: tau and b must be >= 1");
  double gamma = 3.0 / (4.0 * lambda_max);
  if (rho > 0) {
    const double mix = double(tau) / b + double(tau) * tau / (double(b) * b);
    gamma = std::min(gamma, std::pow(lambda_min_plus, 3) /
                                std::pow(1800.0 * rho * rho * mix, 2));
  }
  return consensus_params_from_gamma(gamma, lambda_min_plus, b, N);
}

namespace {

// J ~ Geom(1/2) on {1, 2, ...}: P(J = j) = 2^-j. Clamped at 26 so a single
// draw cannot request an absurd batch; the clipped mass is 2^-26.
int draw_level(std::mt19937_64& rng) {
  const std::uint64_t u = rng();
  const int j = 1 + (u == 0 ? 63 : std::countr_zero(u));
  return std::min(j, 26);
}

}  // namespace

MlmcDraw mlmc_gradient(const Matrix& x_g, GossipSource& src, const ConsensusParams& params,
                       std::mt19937_64& rng) {
  MlmcDraw draw;
  draw.J = draw_level(rng);
  const std::uint64_t B = static_cast<std::uint64_t>(params.B);
  draw.pulls = (std::uint64_t{1} << draw.J) * B;
  const bool corrected = (std::uint64_t{1} << draw.J) <= static_cast<std::uint64_t>(params.M);

  Matrix sum = Matrix::Zero(x_g.rows(), x_g.cols());
  Matrix g0 = sum, g_prev = sum, g_top = sum;
  for (std::uint64_t i = 1; i <= draw.pulls; ++i) {
    sum += src.next() * x_g;
    if (i == B) g0 = sum / double(B);
    if (corrected) {
      if (i == (draw.pulls >> 1)) g_prev = sum / double(draw.pulls >> 1);
      if (i == draw.pulls) g_top = sum / double(draw.pulls);
    }
  }
  draw.g = g0;
  if (corrected) draw.g += std::ldexp(1.0, draw.J) * (g_top - g_prev);
  return draw;
}

void consensus_step(ConsensusState& state, GossipSource& src, const ConsensusParams& params,
                    std::mt19937_64& rng) {
  state.x_g = params.theta * state.x_f + (1.0 - params.theta) * state.x;
  MlmcDraw draw = mlmc_gradient(state.x_g, src, params, rng);
  Matrix x_f_next = state.x_g - params.p * params.gamma * draw.g;
  state.x = params.eta * x_f_next + (params.p - params.eta) * state.x_f +
            (1.0 - params.p) * (1.0 - params.beta) * state.x +
            (1.0 - params.p) * params.beta * state.x_g;
  state.x_f = std::move(x_f_next);
  state.T += draw.pulls;
  ++state.k;
}

double r_value(const GossipMatrix& W_tilde, const Vector& x) {
  return 0.5 * x.dot(W_tilde * x);
}

Vector r_grad(const GossipMatrix& W_tilde, const Vector& x) { return W_tilde * x; }

ConsensusTrace run_consensus(const Vector& x0, MarkovGraphChain& chain,
                             const ConsensusParams& params, std::uint64_t seed) {
  const GossipMatrix W_tilde = mean_gossip(chain.family());
  const double lambda_min = spectral_summary(W_tilde).lambda_min_plus;
  const Vector x_star = Vector::Constant(x0.size(), x0.mean());

  auto rng = make_rng(seed, "consensus-jk");
  ConsensusState state = ConsensusState::init(x0);

  ConsensusTrace trace;
  auto record = [&]() {
    ConsensusTraceRow row;
    row.k = state.k;
    row.T = state.T;
    row.dist2 = (state.x.col(0) - x_star).squaredNorm();
    row.r_gap = r_value(W_tilde, state.x_f.col(0));  // r(x*) = 0
    row.potential = row.dist2 + 24.0 / lambda_min * row.r_gap;
    trace.push_back(row);
  };
  record();
  for (long k = 0; k < params.N; ++k) {
    consensus_step(state, chain, params, rng);
    record();
  }
  return trace;
}

InnerConsensusResult run_inner_consensus(const Matrix& x0, GossipSource& src,
                                         const ConsensusParams& params, long iterations,
                                         std::mt19937_64& rng) {
  ConsensusState state = ConsensusState::init(x0);
  for (long k = 0; k < iterations; ++k) consensus_step(state, src, params, rng);
  return {state.x, state.T};
}

std::vector<GossipTraceRow> plain_gossip(const Vector& x0, MarkovGraphChain& chain, long steps) {
  const double lambda_max = spectral_summary(mean_gossip(chain.family())).lambda_max;
  const Vector x_star = Vector::Constant(x0.size(), x0.mean());
  Vector x = x0;
  std::vector<GossipTraceRow> trace{{0, (x - x_star).squaredNorm()}};
  for (long k = 1; k <= steps; ++k) {
    x -= (chain.next() * x) / lambda_max;
    trace.push_back({k, (x - x_star).squaredNorm()});
  }
  return trace;
}

}  // namespace tvg
