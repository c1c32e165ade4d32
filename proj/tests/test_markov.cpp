#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "tvg/markov.hpp"
#include "tvg/rng.hpp"

using namespace tvg;

namespace {

GraphFamily two_member_family() {
  // Unit-weight K4 and K4 minus one edge; pi = (1/2, 1/2).
  Graph k4(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  Graph k4m = k4;
  k4m.remove_edge(0, 1);
  GraphFamily family;
  family.members = {WeightedGraph(k4), WeightedGraph(k4m)};
  family.pi = Vector::Constant(2, 0.5);
  return family;
}

}  // namespace

TEST_CASE("family validation") {
  GraphFamily f = two_member_family();
  CHECK_NOTHROW(f.validate());

  GraphFamily bad = f;
  bad.pi = Vector::Constant(2, 0.4);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  GraphFamily disconnected = f;
  disconnected.members[0] = WeightedGraph(Graph(4, {{0, 1}, {2, 3}}));
  CHECK_THROWS_AS(disconnected.validate(), std::invalid_argument);
}

TEST_CASE("mean_gossip: single member and one-edge average") {
  GraphFamily f = two_member_family();
  GraphFamily single;
  single.members = {f.members[0]};
  single.pi = Vector::Constant(1, 1.0);
  CHECK((mean_gossip(single) - build_laplacian(f.members[0])).cwiseAbs().maxCoeff() == 0.0);

  // Two unit graphs differing in one edge: that edge appears at weight 1/2.
  Matrix W = mean_gossip(f);
  Graph k4 = f.members[0].graph();
  WeightedGraph half(k4, {{{0, 1}, 0.5},
                          {{0, 2}, 1.0},
                          {{0, 3}, 1.0},
                          {{1, 2}, 1.0},
                          {{1, 3}, 1.0},
                          {{2, 3}, 1.0}});
  CHECK((W - build_laplacian(half)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("rho_bound: single member zero; one-edge pair gives exactly 1") {
  GraphFamily single;
  single.members = {two_member_family().members[0]};
  single.pi = Vector::Constant(1, 1.0);
  CHECK(rho_bound(single) == 0.0);

  // ||W_i - W_mean|| = ||l_e|| / 2 = 1 for a half-half one-edge difference.
  CHECK(rho_bound(two_member_family()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("step_chain: degenerate and deterministic kernels") {
  GraphFamily f = two_member_family();

  GraphFamily single;
  single.members = {f.members[0]};
  single.pi = Vector::Constant(1, 1.0);
  MarkovGraphChain constant(single, Matrix::Constant(1, 1, 1.0), 1, 5);
  const Matrix W0 = constant.step();
  for (int k = 0; k < 10; ++k) CHECK((constant.step() - W0).cwiseAbs().maxCoeff() == 0.0);

  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  MarkovGraphChain alternating(f, swap, 1, 9);
  int state = alternating.state();
  for (int k = 0; k < 8; ++k) {
    alternating.step();
    CHECK(alternating.state() == 1 - state);
    state = alternating.state();
  }
  CHECK_FALSE(alternating.is_primitive());
}

TEST_CASE("step_chain: empirical visit frequencies approach pi") {
  Graph base(3, {{0, 1}, {1, 2}});
  Graph with_chord = base;
  with_chord.add_edge(0, 2);
  Graph other = base;
  other.remove_edge(1, 2);
  other.add_edge(0, 2);
  GraphFamily f;
  f.members = {WeightedGraph(base), WeightedGraph(with_chord), WeightedGraph(other)};
  f.pi = Vector::Constant(3, 1.0 / 3.0);

  MarkovGraphChain chain(f, lazy_uniform_kernel(f.pi, 0.5), 2, 123);
  CHECK(chain.is_primitive());
  const int steps = 100000;
  Vector counts = Vector::Zero(3);
  for (int k = 0; k < steps; ++k) {
    chain.step();
    counts(chain.state()) += 1.0;
  }
  // Lazy-uniform kernel has one-step autocorrelation p, so the asymptotic
  // variance of the visit frequency is the iid one times (1+p)/(1-p).
  const double mixing = std::sqrt((1.0 + 0.5) / (1.0 - 0.5));
  for (int i = 0; i < 3; ++i) {
    const double p = f.pi(i);
    const double sigma = mixing * std::sqrt(p * (1 - p) / steps);
    CHECK(std::abs(counts(i) / steps - p) <= 3.0 * sigma);
  }
}

TEST_CASE("unbiasedness: empirical mean of step outputs approaches mean_gossip") {
  GraphFamily f = two_member_family();
  MarkovGraphChain chain(f, lazy_uniform_kernel(f.pi, 0.25), 1, 77);
  Matrix W_tilde = mean_gossip(f);
  Matrix sum = Matrix::Zero(4, 4);
  const int steps = 100000;
  for (int k = 0; k < steps; ++k) sum += chain.step();
  CHECK(((sum / steps) - W_tilde).cwiseAbs().maxCoeff() <=
        0.02 * W_tilde.cwiseAbs().maxCoeff());

  // Random 5-member family, operator-norm version of the same oracle.
  std::mt19937_64 rng(55);
  Graph base = tvgtest::random_connected_graph(7, 8, rng);
  GraphFamily five = edge_toggle(base, 2, 5, 2024);
  MarkovGraphChain chain5(five, lazy_uniform_kernel(five.pi, 0.25), 1, 78);
  Matrix W5 = mean_gossip(five);
  Matrix sum5 = Matrix::Zero(7, 7);
  for (int k = 0; k < steps; ++k) sum5 += chain5.step();
  CHECK(operator_norm(sum5 / steps - W5) <= 0.01 * operator_norm(W5));
}

TEST_CASE("chain validation: stationarity and row sums") {
  GraphFamily f = two_member_family();
  Matrix bad_rows(2, 2);
  bad_rows << 0.5, 0.4, 0.5, 0.5;
  CHECK_THROWS_AS(MarkovGraphChain(f, bad_rows, 1, 0), std::invalid_argument);

  Matrix not_stationary(2, 2);
  not_stationary << 0.9, 0.1, 0.5, 0.5;  // stationary dist is (5/6, 1/6), not pi
  CHECK_THROWS_AS(MarkovGraphChain(f, not_stationary, 1, 0), std::invalid_argument);

  CHECK_NOTHROW(MarkovGraphChain(f, lazy_uniform_kernel(f.pi, 0.3), 1, 0));
}

TEST_CASE("determinism: identical seeds give identical state sequences") {
  GraphFamily f = two_member_family();
  MarkovGraphChain a(f, lazy_uniform_kernel(f.pi, 0.5), 1, 42);
  MarkovGraphChain b(f, lazy_uniform_kernel(f.pi, 0.5), 1, 42);
  CHECK(a.state() == b.state());
  for (int k = 0; k < 200; ++k) {
    a.step();
    b.step();
    CHECK(a.state() == b.state());
  }
}

TEST_CASE("mixing_diagnostic: extremes and monotonicity") {
  GraphFamily f = two_member_family();
  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  MarkovGraphChain cycle(f, swap, 1, 0);
  CHECK(cycle.mixing_diagnostic(1).delta == doctest::Approx(1.0));  // never mixes

  MarkovGraphChain onestep(f, lazy_uniform_kernel(f.pi, 0.0), 1, 0);
  CHECK(onestep.mixing_diagnostic(1).delta == doctest::Approx(0.0));
  CHECK(onestep.mixing_diagnostic(1).consistent);

  // Lazy walk on a 4-member ring: Delta(Q^m) nonincreasing in m.
  Graph base(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  std::vector<WeightedGraph> members;
  for (int k = 0; k < 4; ++k) {
    Graph g = base;
    g.add_edge(k, (k + 2) % 4);
    members.push_back(WeightedGraph(g));
  }
  GraphFamily ring = ring_of_graphs(members);
  MarkovGraphChain chain(ring, lazy_ring_kernel(4), 4, 0);
  double prev = 1.0;
  for (int m = 1; m <= 20; ++m) {
    const double delta = chain.mixing_diagnostic(m).delta;
    CHECK(delta <= prev + 1e-12);
    prev = delta;
  }
}

TEST_CASE("mixing_diagnostic: flags a tau that is too optimistic") {
  GraphFamily f = two_member_family();
  // Delta(Q^m) = p^m for the lazy-uniform kernel; tau = 1 needs p <= 1/4.
  MarkovGraphChain sluggish(f, lazy_uniform_kernel(f.pi, 0.5), 1, 0);
  CHECK(sluggish.mixing_diagnostic(1).delta == doctest::Approx(0.5));
  CHECK_FALSE(sluggish.mixing_diagnostic(1).consistent);
  CHECK_FALSE(sluggish.mixing_diagnostic(4).consistent);  // 2^-4 > 4^-4

  MarkovGraphChain honest(f, lazy_uniform_kernel(f.pi, 0.5), 2, 0);
  for (int m = 1; m <= 10; ++m) CHECK(honest.mixing_diagnostic(m).consistent);
}

TEST_CASE("edge_toggle: pairwise differences and rho <= 2 delta") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 5 + int(rng() % 10);
    Graph base = tvgtest::random_connected_graph(n, n, rng);
    const int delta = 1 + int(rng() % 3);
    GraphFamily f = edge_toggle(base, delta, 4 + int(rng() % 5), rng());
    f.validate();
    for (int i = 0; i < f.size(); ++i)
      for (int j = i + 1; j < f.size(); ++j)
        CHECK(edge_difference(f.members[i].graph(), f.members[j].graph()) <= delta);
    CHECK(rho_bound(f) <= 2.0 * delta + 1e-9);
  }
}

TEST_CASE("family file round-trip") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "tvg_family_test";
  fs::create_directories(dir);

  GraphFamily f = two_member_family();
  write_graph_file((dir / "g0.txt").string(), f.members[0]);
  write_graph_file((dir / "g1.txt").string(), f.members[1]);
  {
    std::ofstream out(dir / "family.txt");
    out << "# test family\n";
    out << "member g0.txt\nmember g1.txt\n";
    out << "pi 0.5 0.5\n";
    out << "kernel lazy-uniform p=0.25\n";
    out << "tau 1\nseed 99\n";
  }
  FamilySpec back = read_family_file((dir / "family.txt").string());
  CHECK(back.family.size() == 2);
  CHECK(back.tau == 1);
  CHECK(back.seed == 99);
  CHECK((back.kernel - lazy_uniform_kernel(f.pi, 0.25)).cwiseAbs().maxCoeff() <= 1e-15);
  MarkovGraphChain chain = back.make_chain();
  CHECK(chain.dimension() == 4);

  // Explicit-matrix kernel writes and reads back bit-exactly.
  FamilySpec spec;
  spec.family = f;
  spec.kernel = lazy_uniform_kernel(f.pi, 0.25);
  spec.tau = 3;
  spec.seed = 7;
  write_family_file((dir / "family2.txt").string(), spec, {"g0.txt", "g1.txt"});
  FamilySpec again = read_family_file((dir / "family2.txt").string());
  CHECK((again.kernel - spec.kernel).cwiseAbs().maxCoeff() == 0.0);
  CHECK(again.tau == 3);

  fs::remove_all(dir);
}
