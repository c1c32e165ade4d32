#include "tvg/decopt.hpp"

#include <cmath>
#include <stdexcept>

#include "tvg/rng.hpp"

namespace tvg {

double average_value(const std::vector<LocalObjective>& objectives, const Vector& x) {
  double v = 0.0;
  for (const auto& f : objectives) v += f.value(x);
  return v / double(objectives.size());
}

Vector average_grad(const std::vector<LocalObjective>& objectives, const Vector& x) {
  Vector g = Vector::Zero(x.size());
  for (const auto& f : objectives) g += f.grad(x);
  return g / double(objectives.size());
}

ChainConstants chain_constants(const MarkovGraphChain& chain) {
  ChainConstants cc;
  const SpectralSummary s = spectral_summary(mean_gossip(chain.family()));
  cc.lambda_max = s.lambda_max;
  cc.lambda_min_plus = s.lambda_min_plus;
  cc.chi = s.chi;
  cc.rho = rho_bound(chain.family());
  cc.tau = chain.tau();
  return cc;
}

DecoptParams derive_outer_params(double mu, double L, double epsilon, double c0,
                                 const ChainConstants& cc) {
  if (!(mu > 0) || mu > L) throw std::invalid_argument("decopt params: need 0 < mu <= L");
  if (!(epsilon > 0) || !(c0 > 0))
    throw std::invalid_argument("decopt params: epsilon and c0 must be positive");
  DecoptParams dp;
  dp.gamma = 1.0 / L;
  dp.eta_momentum = (std::sqrt(L) - std::sqrt(mu)) / (std::sqrt(L) + std::sqrt(mu));
  dp.N = static_cast<long>(std::ceil(std::sqrt(L / mu) * std::log(std::max(c0 / epsilon, 1.001))));
  const double eps_inner = epsilon * epsilon;
  constexpr double c_T = 4.0;
  const double lam2 = cc.lambda_min_plus * cc.lambda_min_plus;
  dp.T = static_cast<long>(std::ceil(c_T * cc.tau *
                                     (std::sqrt(cc.chi) + cc.rho * cc.rho / lam2) *
                                     std::log(1.0 / eps_inner)));
  dp.T = std::max<long>(dp.T, 1);
  return dp;
}

NodeState NodeState::init(int n, const Vector& x0) {
  NodeState s;
  s.x = x0.transpose().replicate(n, 1);
  s.y = s.x;
  return s;
}

std::uint64_t outer_step(NodeState& state, const std::vector<LocalObjective>& objectives,
                         const DecoptParams& dp, const ConsensusParams& cp, GossipSource& src,
                         std::mt19937_64& rng) {
  const int n = static_cast<int>(objectives.size());
  const int d = objectives.front().dim;
  Matrix grads(n, d);
  for (int i = 0; i < n; ++i) grads.row(i) = objectives[i].grad(state.y.row(i).transpose());

  InnerConsensusResult inner = run_inner_consensus(grads, src, cp, dp.T, rng);

  Matrix x_next = state.y - dp.gamma * inner.x;
  state.y = x_next + dp.eta_momentum * (x_next - state.x);
  state.x = std::move(x_next);
  return inner.communications;
}

DecoptResult run_decopt(const std::vector<LocalObjective>& objectives, GossipSource& src,
                        const DecoptParams& dp, const ConsensusParams& cp, const Vector& x0,
                        std::uint64_t seed) {
  const int n = static_cast<int>(objectives.size());
  const double mu = objectives.front().mu;
  const double L = objectives.front().L;

  AgdResult oracle = centralized_agd(objectives, x0, 1.0 / L,
                                     (std::sqrt(L) - std::sqrt(mu)) / (std::sqrt(L) + std::sqrt(mu)),
                                     1e-12, 200000);
  const double f_star = average_value(objectives, oracle.x);

  auto rng = make_rng(seed, "decopt-inner");
  NodeState state = NodeState::init(n, x0);

  DecoptResult result;
  result.f_star = f_star;
  std::uint64_t comms = 0;
  auto record = [&](long k) {
    Vector mean = state.x.colwise().mean().transpose();
    double err = 0.0;
    for (int i = 0; i < n; ++i)
      err = std::max(err, (state.x.row(i).transpose() - mean).norm());
    result.trace.push_back({k, comms, average_value(objectives, mean) - f_star, err});
  };
  record(0);
  for (long k = 1; k <= dp.N; ++k) {
    comms += outer_step(state, objectives, dp, cp, src, rng);
    record(k);
  }
  result.state = std::move(state);
  return result;
}

AgdResult centralized_agd(const std::vector<LocalObjective>& objectives, const Vector& x0,
                          double gamma, double eta, double grad_tol, long max_iter) {
  AgdResult res;
  Vector x = x0, y = x0;
  res.trajectory.push_back(x);
  for (long k = 0; k < max_iter; ++k) {
    Vector g = average_grad(objectives, y);
    if (g.norm() <= grad_tol) break;
    Vector x_next = y - gamma * g;
    y = x_next + eta * (x_next - x);
    x = std::move(x_next);
    res.trajectory.push_back(x);
    ++res.iterations;
  }
  res.x = x;
  return res;
}

std::vector<GossipGradientRow> run_gossip_gradient(const std::vector<LocalObjective>& objectives,
                                                   GossipSource& src, double lambda_cap,
                                                   double gamma, long rounds, const Vector& x0,
                                                   const Vector& x_star) {
  const int n = static_cast<int>(objectives.size());
  Matrix X = x0.transpose().replicate(n, 1);
  std::vector<GossipGradientRow> trace;
  auto record = [&](long k) {
    Vector mean = X.colwise().mean().transpose();
    trace.push_back({k, (mean - x_star).squaredNorm()});
  };
  record(0);
  Matrix grads(n, static_cast<int>(x0.size()));
  for (long k = 1; k <= rounds; ++k) {
    for (int i = 0; i < n; ++i) grads.row(i) = objectives[i].grad(X.row(i).transpose());
    X -= (src.next() * X) / lambda_cap + gamma * grads;
    record(k);
  }
  return trace;
}

std::vector<LocalObjective> random_quadratic_suite(int n, int dim, double mu, double L,
                                                   std::uint64_t seed) {
  if (n < 1 || dim < 1) throw std::invalid_argument("quadratic suite: bad sizes");
  if (!(mu > 0) || !(L >= mu)) throw std::invalid_argument("quadratic suite: need 0 < mu <= L");
  auto rng = make_rng(seed, "quadratic-suite");
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<Matrix> A(n);
  Matrix mean_A = Matrix::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    Matrix G(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) G(r, c) = normal(rng);
    A[i] = G.transpose() * G / double(dim);
    mean_A += A[i] / double(n);
  }
  // Affine spectrum correction so the average Hessian hits [mu, L] exactly.
  Vector ev = symmetric_eigenvalues(mean_A);
  const double lo = ev(0), hi = ev(ev.size() - 1);
  double alpha = 0.0, delta = mu;
  if (dim > 1 && hi > lo) {
    alpha = (L - mu) / (hi - lo);
    delta = mu - alpha * lo;
  } else {
    alpha = L / std::max(hi, 1e-300);
    delta = 0.0;
  }
  std::vector<LocalObjective> suite(n);
  for (int i = 0; i < n; ++i) {
    Matrix Ai = alpha * A[i] + delta * Matrix::Identity(dim, dim);
    Vector bi(dim);
    for (int r = 0; r < dim; ++r) bi(r) = normal(rng);
    suite[i].dim = dim;
    suite[i].mu = mu;
    suite[i].L = L;
    suite[i].value = [Ai, bi](const Vector& x) { return 0.5 * x.dot(Ai * x) + bi.dot(x); };
    suite[i].grad = [Ai, bi](const Vector& x) { return (Ai * x + bi).eval(); };
  }
  return suite;
}

std::vector<LocalObjective> shifted_identity_suite(const std::vector<Vector>& centers) {
  std::vector<LocalObjective> suite(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const Vector& c = centers[i];
    suite[i].dim = static_cast<int>(c.size());
    suite[i].mu = 1.0;
    suite[i].L = 1.0;
    suite[i].value = [c](const Vector& x) { return 0.5 * (x - c).squaredNorm(); };
    suite[i].grad = [c](const Vector& x) { return (x - c).eval(); };
  }
  return suite;
}

}  // namespace tvg
