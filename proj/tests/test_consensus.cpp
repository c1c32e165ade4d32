#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "tvg/consensus.hpp"
#include "tvg/rng.hpp"

using namespace tvg;

namespace {

Graph complete(int n) {
  Graph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
  return g;
}

// Two complete graphs with one perturbed edge weight: small rho, known mean.
GraphFamily perturbed_pair(int n, double bump) {
  Graph k = complete(n);
  WeightedGraph a(k);
  WeightedGraph b(k);
  b.set_weight(0, 1, 1.0 + bump);
  GraphFamily f;
  f.members = {a, b};
  f.pi = Vector::Constant(2, 0.5);
  return f;
}

GraphFamily single_member(const WeightedGraph& g) {
  GraphFamily f;
  f.members = {g};
  f.pi = Vector::Constant(1, 1.0);
  return f;
}

// Logs every matrix served so tests can recompute estimator pieces.
class RecordingSource : public GossipSource {
 public:
  explicit RecordingSource(GossipSource& inner) : inner_(inner) {}
  const GossipMatrix& next() override {
    const GossipMatrix& W = inner_.next();
    log.push_back(W);
    return W;
  }
  int dimension() const override { return inner_.dimension(); }
  std::vector<GossipMatrix> log;

 private:
  GossipSource& inner_;
};

}  // namespace

TEST_CASE("derive_consensus_params: hand-evaluated formula chain at gamma = 3") {
  // lambda_max = 1/4 makes the first min-term equal 3; rho = 0 keeps it active.
  ConsensusParams cp = derive_consensus_params(0.25, 1.0, 0.0, 1, 5, 100);
  CHECK(cp.gamma == doctest::Approx(3.0));
  CHECK(cp.beta == doctest::Approx(0.5));
  CHECK(cp.eta == doctest::Approx(2.0));
  CHECK(cp.theta == doctest::Approx(14.0 / 15.0));
  CHECK(cp.M == 2);
  CHECK(cp.B == 5);
  CHECK_THROWS_AS(derive_consensus_params(-1.0, 1.0, 0.0, 1, 1, 1), std::invalid_argument);
}

TEST_CASE("derive_consensus_params: noiseless limit gamma = 3/(4 lambda_max)") {
  ConsensusParams cp = derive_consensus_params(2.0, 1.0, 0.0, 1, 1, 10);
  CHECK(cp.gamma == doctest::Approx(3.0 / 8.0));
}

TEST_CASE("derived momentum parameters stay in range over a random sweep") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double lambda_min = 0.01 + 10.0 * u(rng);
    const double lambda_max = lambda_min * (1.0 + 50.0 * u(rng));
    const double rho = 5.0 * u(rng);
    const int tau = 1 + int(rng() % 4);
    ConsensusParams cp = derive_consensus_params(lambda_max, lambda_min, rho, tau, tau, 10);
    CHECK(cp.beta > 0.0);
    CHECK(cp.beta <= 1.0);
    CHECK(cp.eta >= 1.0);
    CHECK(cp.p / cp.eta < 1.0);
    CHECK(cp.beta * cp.p / cp.eta < 1.0);
    CHECK(cp.theta > 0.0);
    CHECK(cp.theta < 1.0);
    CHECK_NOTHROW(cp.validate(lambda_max, lambda_min, rho, tau));
  }
}

TEST_CASE("mlmc_gradient: batch accounting and the level-capped branch") {
  GraphFamily f = perturbed_pair(6, 0.5);
  MarkovGraphChain chain(f, lazy_uniform_kernel(f.pi, 0.25), 1, 3);
  ConsensusParams cp = consensus_params_from_gamma(0.01, 6.0, 1, 1);
  REQUIRE(cp.M >= 2);

  auto rng = make_rng(17, "test-mlmc");
  std::mt19937_64 x_rng(4);
  const Vector x = tvgtest::random_vector(6, x_rng);

  bool saw_capped = false, saw_corrected = false;
  for (int draw = 0; draw < 64; ++draw) {
    RecordingSource rec(chain);
    MlmcDraw d = mlmc_gradient(x, rec, cp, rng);
    REQUIRE(d.pulls == (std::uint64_t{1} << d.J) * cp.B);
    REQUIRE(rec.log.size() == d.pulls);

    Matrix g0 = Matrix::Zero(6, 1);
    for (int i = 0; i < cp.B; ++i) g0 += rec.log[i] * x;
    g0 /= double(cp.B);
    if ((1 << d.J) > cp.M) {
      saw_capped = true;
      CHECK((d.g - g0).cwiseAbs().maxCoeff() == 0.0);  // g = g_0 exactly
    } else {
      saw_corrected = true;
      Matrix top = Matrix::Zero(6, 1), prev = Matrix::Zero(6, 1);
      for (std::uint64_t i = 0; i < d.pulls; ++i) top += rec.log[i] * x;
      for (std::uint64_t i = 0; i < d.pulls / 2; ++i) prev += rec.log[i] * x;
      Matrix expected = g0 + std::ldexp(1.0, d.J) * (top / double(d.pulls) -
                                                     prev / double(d.pulls / 2));
      CHECK((d.g - expected).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  CHECK(saw_capped);
  CHECK(saw_corrected);
}

TEST_CASE("mlmc_gradient: constant family always returns W x") {
  WeightedGraph k5(complete(5));
  GraphFamily f = single_member(k5);
  MarkovGraphChain chain(f, Matrix::Constant(1, 1, 1.0), 1, 0);
  const Matrix W = build_laplacian(k5);
  ConsensusParams cp = consensus_params_from_gamma(0.05, 5.0, 1, 1);
  auto rng = make_rng(5, "test-mlmc-const");
  std::mt19937_64 x_rng(6);
  for (int draw = 0; draw < 32; ++draw) {
    const Vector x = tvgtest::random_vector(5, x_rng);
    MlmcDraw d = mlmc_gradient(x, chain, cp, rng);
    CHECK((d.g - W * x).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("mlmc_gradient: Monte Carlo mean matches the top-level batch mean") {
  // Sticky kernel and a fixed start state so the batch levels have different
  // means: the telescoping is tested, not just overall unbiasedness.
  GraphFamily f = perturbed_pair(5, 1.0);
  Matrix kernel(2, 2);
  kernel << 0.9, 0.1, 0.1, 0.9;
  ConsensusParams cp = consensus_params_from_gamma(0.01, 5.0, 1, 1);
  std::mt19937_64 x_rng(8);
  const Vector x = tvgtest::random_vector(5, x_rng);

  // Exact E[g_{floor(log2 M)} | start]: prefix mean over kernel powers.
  const int top = 1 << static_cast<int>(std::log2(double(cp.M)));
  std::vector<Matrix> laplacians{build_laplacian(f.members[0]), build_laplacian(f.members[1])};
  Vector occupancy = Vector::Unit(2, 0);
  Matrix expected_W = Matrix::Zero(5, 5);
  for (int i = 1; i <= top * cp.B; ++i) {
    occupancy = kernel.transpose() * occupancy;
    expected_W += occupancy(0) * laplacians[0] + occupancy(1) * laplacians[1];
  }
  const Vector expected = (expected_W / double(top * cp.B)) * x;

  const int draws = 40000;
  auto rng = make_rng(99, "test-mlmc-mc");
  Matrix sum = Matrix::Zero(5, 1), sum_sq = Matrix::Zero(5, 1);
  int kept = 0;
  for (std::uint64_t seed = 0; kept < draws; ++seed) {
    MarkovGraphChain chain(f, kernel, 1, 1000003ull * seed + 17);
    if (chain.state() != 0) continue;  // condition on the fixed start
    MlmcDraw d = mlmc_gradient(x, chain, cp, rng);
    sum += d.g;
    sum_sq += d.g.cwiseProduct(d.g);
    ++kept;
  }
  for (int i = 0; i < 5; ++i) {
    const double mean = sum(i, 0) / draws;
    const double var = sum_sq(i, 0) / draws - mean * mean;
    const double sigma = std::sqrt(std::max(var, 0.0) / draws);
    // Zero-variance components are exact up to summation rounding over the
    // draw loop, hence the scaled absolute allowance.
    CHECK(std::abs(mean - expected(i)) <= 3.0 * sigma + 1e-9 * (1.0 + std::abs(expected(i))));
  }

  // The levels really do have different means here, so the check above
  // distinguishes the telescoped estimator from a first-batch-only one.
  Vector occ = Vector::Unit(2, 0);
  Matrix first_level = Matrix::Zero(5, 5);
  for (int i = 1; i <= cp.B; ++i) {
    occ = kernel.transpose() * occ;
    first_level += occ(0) * laplacians[0] + occ(1) * laplacians[1];
  }
  const Vector g0_mean = (first_level / double(cp.B)) * x;
  CHECK((g0_mean - expected).norm() > 1e-2);
}

TEST_CASE("consensus_step: consensual start is a fixed point") {
  GraphFamily f = perturbed_pair(6, 0.5);
  MarkovGraphChain chain(f, lazy_uniform_kernel(f.pi, 0.25), 1, 21);
  SpectralSummary s = spectral_summary(mean_gossip(f));
  ConsensusParams cp = derive_consensus_params(s.lambda_max, s.lambda_min_plus,
                                               rho_bound(f), 1, 1, 10);
  ConsensusState state = ConsensusState::init(Vector::Constant(6, 3.25));
  auto rng = make_rng(2, "fixed-point");
  for (int k = 0; k < 10; ++k) {
    consensus_step(state, chain, cp, rng);
    CHECK((state.x.array() - 3.25).abs().maxCoeff() == 0.0);
    CHECK((state.x_f.array() - 3.25).abs().maxCoeff() == 0.0);
    CHECK((state.x_g.array() - 3.25).abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("consensus_step: means of x, x_f, x_g are conserved") {
  GraphFamily f = perturbed_pair(8, 0.3);
  MarkovGraphChain chain(f, lazy_uniform_kernel(f.pi, 0.25), 1, 33);
  SpectralSummary s = spectral_summary(mean_gossip(f));
  ConsensusParams cp = derive_consensus_params(s.lambda_max, s.lambda_min_plus,
                                               rho_bound(f), 1, 1, 10);
  std::mt19937_64 x_rng(9);
  const Vector x0 = tvgtest::random_vector(8, x_rng, 2.0);
  const double mean0 = x0.mean();
  ConsensusState state = ConsensusState::init(x0);
  auto rng = make_rng(3, "mean-conservation");
  const double tol = 1e-10 * (1.0 + std::abs(mean0));
  for (int k = 0; k < 500; ++k) {
    consensus_step(state, chain, cp, rng);
    CHECK(std::abs(state.x.col(0).mean() - mean0) <= tol);
    CHECK(std::abs(state.x_f.col(0).mean() - mean0) <= tol);
    CHECK(std::abs(state.x_g.col(0).mean() - mean0) <= tol);
  }
}

TEST_CASE("run_consensus: N = 0 leaves only the initial row") {
  GraphFamily f = perturbed_pair(4, 0.2);
  MarkovGraphChain chain(f, lazy_uniform_kernel(f.pi, 0.25), 1, 0);
  SpectralSummary s = spectral_summary(mean_gossip(f));
  ConsensusParams cp = derive_consensus_params(s.lambda_max, s.lambda_min_plus,
                                               rho_bound(f), 1, 1, 0);
  std::mt19937_64 x_rng(10);
  ConsensusTrace trace = run_consensus(tvgtest::random_vector(4, x_rng), chain, cp, 1);
  REQUIRE(trace.size() == 1);
  CHECK(trace[0].k == 0);
  CHECK(trace[0].T == 0);
}

TEST_CASE("run_consensus: seed-averaged potential decreases monotonically") {
  WeightedGraph k6(complete(6));
  GraphFamily f = single_member(k6);
  SpectralSummary s = spectral_summary(mean_gossip(f));
  ConsensusParams cp = derive_consensus_params(s.lambda_max, s.lambda_min_plus, 0.0, 1, 1, 40);

  std::vector<double> avg(41, 0.0);
  const int seeds = 100;
  for (int seed = 0; seed < seeds; ++seed) {
    MarkovGraphChain chain(f, Matrix::Constant(1, 1, 1.0), 1, seed);
    auto x_rng = make_rng(seed, "x0");
    ConsensusTrace trace = run_consensus(tvgtest::random_vector(6, x_rng), chain, cp, seed);
    for (std::size_t k = 0; k < trace.size(); ++k) avg[k] += trace[k].potential / seeds;
  }
  for (std::size_t k = 1; k < avg.size(); ++k) CHECK(avg[k] <= avg[k - 1] * (1.0 + 1e-9));
}

TEST_CASE("run_consensus: log-potential slope meets the contraction bound") {
  GraphFamily f = perturbed_pair(8, 0.2);
  SpectralSummary s = spectral_summary(mean_gossip(f));
  const double rho = rho_bound(f);
  const long N = 150;
  ConsensusParams cp = derive_consensus_params(s.lambda_max, s.lambda_min_plus, rho, 1, 1, N);
  const Matrix kernel = lazy_uniform_kernel(f.pi, 0.25);

  const int seeds = 60;
  std::vector<double> avg(N + 1, 0.0);
  for (int seed = 0; seed < seeds; ++seed) {
    MarkovGraphChain chain(f, kernel, 1, 5000 + seed);
    auto x_rng = make_rng(seed, "x0-slope");
    ConsensusTrace trace = run_consensus(tvgtest::random_vector(8, x_rng), chain, cp, seed);
    for (std::size_t k = 0; k < trace.size(); ++k) avg[k] += trace[k].potential / seeds;
  }
  // Least-squares slope of log(avg potential) over iterations 5..N.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (long k = 5; k <= N; ++k) {
    const double y = std::log(avg[k]);
    sx += k;
    sy += y;
    sxx += double(k) * k;
    sxy += k * y;
    ++count;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  const double bound = std::log(1.0 - std::sqrt(cp.p * cp.p * s.lambda_min_plus * cp.gamma / 3.0));
  CHECK(slope <= bound + 0.05);
}

TEST_CASE("r_value and r_grad") {
  GraphFamily f = perturbed_pair(6, 0.4);
  const Matrix W = mean_gossip(f);

  CHECK(r_value(W, Vector::Constant(6, 2.5)) == doctest::Approx(0.0));
  CHECK(r_grad(W, Vector::Constant(6, 2.5)).cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::SelfAdjointEigenSolver<Matrix> es(W);
  const Vector v = es.eigenvectors().col(5);
  const double lambda = es.eigenvalues()(5);
  CHECK(r_value(W, v) == doctest::Approx(0.5 * lambda * v.squaredNorm()).epsilon(1e-10));

  std::mt19937_64 rng(12);
  for (int probe = 0; probe < 20; ++probe) {
    const Vector x = tvgtest::random_vector(6, rng);
    const Vector g = r_grad(W, x);
    const Vector fd = tvgtest::fd_gradient([&](const Vector& z) { return r_value(W, z); }, x);
    CHECK((g - fd).norm() <= 1e-6 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("restricted strong convexity along the equal-sum hyperplane") {
  GraphFamily f = perturbed_pair(7, 0.25);
  const Matrix W = mean_gossip(f);
  const double lambda_min = spectral_summary(W).lambda_min_plus;
  std::mt19937_64 rng(13);
  for (int pair = 0; pair < 100; ++pair) {
    Vector x = tvgtest::random_vector(7, rng);
    Vector y = tvgtest::random_vector(7, rng);
    y.array() += (x.sum() - y.sum()) / 7.0;  // equalize coordinate sums
    const double lhs = r_value(W, y);
    const double rhs =
        r_value(W, x) + r_grad(W, x).dot(y - x) + 0.5 * lambda_min * (x - y).squaredNorm();
    CHECK(lhs >= rhs - 1e-9);
  }
}

TEST_CASE("estimator noise bound ||W x - W_tilde x|| <= rho ||x - x*||") {
  GraphFamily f = perturbed_pair(6, 0.6);
  const Matrix W_tilde = mean_gossip(f);
  const double rho = rho_bound(f);
  std::mt19937_64 rng(14);
  for (int probe = 0; probe < 100; ++probe) {
    const Vector x = tvgtest::random_vector(6, rng, 3.0);
    const Vector x_star = Vector::Constant(6, x.mean());
    for (const auto& member : f.members) {
      const Matrix W = build_laplacian(member);
      CHECK((W * x - W_tilde * x).norm() <= rho * (x - x_star).norm() + 1e-10);
    }
  }
}

TEST_CASE("communication accounting and shared-seed J consistency") {
  GraphFamily f = perturbed_pair(5, 0.3);
  SpectralSummary s = spectral_summary(mean_gossip(f));
  ConsensusParams cp = derive_consensus_params(s.lambda_max, s.lambda_min_plus,
                                               rho_bound(f), 1, 2, 60);
  const Matrix kernel = lazy_uniform_kernel(f.pi, 0.25);
  std::mt19937_64 x_rng(15);
  const Vector x0 = tvgtest::random_vector(5, x_rng);

  MarkovGraphChain chain_a(f, kernel, 1, 7);
  ConsensusTrace a = run_consensus(x0, chain_a, cp, 99);
  MarkovGraphChain chain_b(f, kernel, 1, 8);  // different graph stream, same J seed
  ConsensusTrace b = run_consensus(x0, chain_b, cp, 99);

  std::uint64_t total = 0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    const std::uint64_t delta = a[k].T - a[k - 1].T;
    CHECK(delta % cp.B == 0);
    const std::uint64_t levels = delta / cp.B;
    CHECK((levels & (levels - 1)) == 0);  // one power-of-two batch per iteration
    CHECK(levels >= 2);                   // J >= 1
    total += delta;
    CHECK(b[k].T == a[k].T);  // J_k stream depends only on the shared seed
  }
  CHECK(a.back().T == total);
}

TEST_CASE("plain_gossip: fixed point, contraction factor, mean preservation") {
  WeightedGraph k5(complete(5));
  GraphFamily f = single_member(k5);
  MarkovGraphChain chain(f, Matrix::Constant(1, 1, 1.0), 1, 0);

  auto flat = plain_gossip(Vector::Constant(5, 1.5), chain, 10);
  for (const auto& row : flat) CHECK(row.dist2 == 0.0);

  // Constant connected chain: per-step contraction <= 1 - lambda_min/lambda_max.
  SpectralSummary s = spectral_summary(mean_gossip(f));
  const double factor = 1.0 - s.lambda_min_plus / s.lambda_max;
  std::mt19937_64 x_rng(16);
  const Vector x0 = tvgtest::random_vector(5, x_rng);
  MarkovGraphChain chain2(f, Matrix::Constant(1, 1, 1.0), 1, 0);
  auto trace = plain_gossip(x0, chain2, 20);
  for (std::size_t k = 1; k < trace.size(); ++k)
    CHECK(trace[k].dist2 <= factor * factor * trace[k - 1].dist2 + 1e-18);

  // Mean preservation on a varying chain.
  GraphFamily pair = perturbed_pair(5, 0.4);
  MarkovGraphChain chain3(pair, lazy_uniform_kernel(pair.pi, 0.25), 1, 5);
  const Vector y0 = tvgtest::random_vector(5, x_rng);
  Vector y = y0;
  const double lam = spectral_summary(mean_gossip(pair)).lambda_max;
  for (int kk = 0; kk < 50; ++kk) y -= chain3.next() * y / lam;
  CHECK(std::abs(y.mean() - y0.mean()) <= 1e-12);
}

TEST_CASE("params validation rejects a degenerate theta") {
  ConsensusParams cp = derive_consensus_params(2.0, 1.0, 0.0, 1, 1, 10);
  ConsensusParams broken = cp;
  broken.theta = 1.0;
  CHECK_THROWS_AS(broken.validate(2.0, 1.0, 0.0, 1), std::invalid_argument);
  CHECK_NOTHROW(cp.validate(2.0, 1.0, 0.0, 1));
}
