#ifndef TVG_MARKOV_HPP
#define TVG_MARKOV_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tvg/graph.hpp"
#include "tvg/spectral.hpp"

namespace tvg {

// One communication round per call; implementations own their randomness.
class GossipSource {
 public:
  virtual ~GossipSource() = default;
  virtual const GossipMatrix& next() = 0;
  virtual int dimension() const = 0;
};

// Finite set of connected weighted graphs over a common vertex set, with a
// stationary probability vector over the members.
struct GraphFamily {
  std::vector<WeightedGraph> members;
  Vector pi;

  int n() const { return members.empty() ? 0 : members.front().n(); }
  int size() const { return static_cast<int>(members.size()); }
  // Throws std::invalid_argument if any invariant fails.
  void validate() const;
  Graph union_graph() const;
};

// pi-weighted average of member Laplacians; validated as a gossip matrix
// against the union graph.
GossipMatrix mean_gossip(const GraphFamily& family);

// Max over members of the operator norm of W_i - mean_gossip.
double rho_bound(const GraphFamily& family);

struct MixingDiagnostic {
  double delta = 0.0;  // sup over state pairs of TV distance of m-step rows
  bool consistent = false;  // delta <= (1/4)^floor(m/tau)
};

// Markov chain over family members with a row-stochastic kernel for which pi
// is stationary. The chain starts from a pi-distributed draw.
class MarkovGraphChain : public GossipSource {
 public:
  MarkovGraphChain(GraphFamily family, Matrix kernel, int tau, std::uint64_t seed);

  const GraphFamily& family() const { return family_; }
  const Matrix& kernel() const { return kernel_; }
  int tau() const { return tau_; }
  int state() const { return state_; }

  // Advances the state by one kernel-distributed transition and returns the
  // Laplacian of the new member. Deterministic given seed and call count.
  const GossipMatrix& step();

  // True if Q^m has all-positive entries for some m (irreducible + aperiodic).
  bool is_primitive() const;

  // Exact Delta(Q^m) from dense kernel powers, checked against the
  // (1/4)^floor(m/tau) decay the configured tau promises.
  MixingDiagnostic mixing_diagnostic(int m) const;

  // GossipSource interface.
  const GossipMatrix& next() override { return step(); }
  int dimension() const override { return family_.n(); }

 private:
  int sample_index(const Vector& probabilities);

  GraphFamily family_;
  Matrix kernel_;
  int tau_;
  int state_ = 0;
  std::mt19937_64 rng_;
  std::vector<GossipMatrix> laplacians_;
};

// Members are the base graph with nested prefixes of up to `delta` edge
// toggles, so any two members differ in at most `delta` edges and the family
// satisfies rho <= 2*delta with unit weights. Toggles that disconnect the
// graph are rejected and redrawn.
GraphFamily edge_toggle(const Graph& base, int delta, int count, std::uint64_t seed);

// Explicit member list with uniform pi; pairs with lazy_ring_kernel.
GraphFamily ring_of_graphs(const std::vector<WeightedGraph>& members);

// Lazy nearest-neighbor walk on the member ring: stay 1/2, step 1/4 each way.
Matrix lazy_ring_kernel(int size);

// Q = p*I + (1-p) * ones * pi^T; pi-stationary for any pi.
Matrix lazy_uniform_kernel(const Vector& pi, double p);

// Family description file: member graph paths (relative to the file), pi,
// kernel ("lazy-uniform p=..." | "lazy-ring" | "matrix" + rows), tau, seed.
struct FamilySpec {
  GraphFamily family;
  Matrix kernel;
  int tau = 1;
  std::uint64_t seed = 0;

  MarkovGraphChain make_chain() const { return MarkovGraphChain(family, kernel, tau, seed); }
  MarkovGraphChain make_chain(std::uint64_t seed_override) const {
    return MarkovGraphChain(family, kernel, tau, seed_override);
  }
};

FamilySpec read_family_file(const std::string& path);
void write_family_file(const std::string& path, const FamilySpec& spec,
                       const std::vector<std::string>& member_paths);

}  // namespace tvg

#endif  // TVG_MARKOV_HPP
