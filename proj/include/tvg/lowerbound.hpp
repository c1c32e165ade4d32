#ifndef TVG_LOWERBOUND_HPP
#define TVG_LOWERBOUND_HPP

#include <cstdint>
#include <vector>

#include "tvg/decopt.hpp"
#include "tvg/graph.hpp"
#include "tvg/markov.hpp"
#include "tvg/spectral.hpp"

namespace tvg {

enum class VertexRole { LeftCenter, RightCenter, Connector, LeftLeaf, RightLeaf };
enum class Mark { V1, V2, Unmarked };

// Two stars with a and b leaves joined through one connector adjacent to both
// centers: 2n+3 vertices (ids: 0 left center, 1 right center, then leaves),
// a+b+2 edges, a+b = 2n. The floor(n/2) lowest leaf ids on each side carry
// the V1/V2 marks and never change partition.
struct TwoStarGraph {
  int n_param = 0;
  int a = 0;  // left leaf count
  int b = 0;  // right leaf count
  std::vector<VertexRole> roles;
  std::vector<Mark> marks;

  int vertex_count() const { return 2 * n_param + 3; }
  int connector() const;
  Graph graph() const;
};

TwoStarGraph build_two_star(int n_param, int a, int b);

// Information-transfer time of one phase: t = 2n - 2 floor(n/2).
int phase_length(int n_param);

// Deterministic two-edge-per-round graph sequence: Phase 1 moves unmarked
// leaves left to right one per step, Phase 2 mirrors back. Each element's
// gossip matrix is the shortest-path weighting retuned to a common chi.
class CounterexampleSequence {
 public:
  explicit CounterexampleSequence(int n_param, double chi_target = 0.0);

  const TwoStarGraph& current() const { return cur_; }
  int phase() const { return phase_; }
  int step_in_phase() const { return step_in_phase_; }
  long step_index() const { return step_index_; }
  double chi_target() const { return chi_target_; }

  struct StepChange {
    Edge removed;
    Edge added;
  };
  // Advances one element; returns the edge pair that changed.
  StepChange phase_step();

  // Shortest-path weighting of the current element retuned to chi_target.
  WeightedGraph weighted_current() const;
  GossipMatrix gossip_current() const;

 private:
  int n_param_;
  int phase_ = 1;
  int step_in_phase_ = 0;
  long step_index_ = 0;
  double chi_target_;
  TwoStarGraph cur_;
};

// Max chi of the shortest-path weighting over one full period.
double max_period_chi(int n_param);

// GossipSource adapter: next() returns the current element's retuned gossip
// matrix and advances the sequence; lambda_cap() bounds every element's
// lambda_max over a period.
class CounterexampleSource : public GossipSource {
 public:
  explicit CounterexampleSource(int n_param, double chi_target);
  const GossipMatrix& next() override;
  int dimension() const override { return seq_.current().vertex_count(); }
  const CounterexampleSequence& sequence() const { return seq_; }
  // Period-average gossip matrix and worst deviation from it.
  const GossipMatrix& period_mean() const { return period_mean_; }
  double period_rho() const { return period_rho_; }
  double lambda_cap() const { return lambda_cap_; }

 private:
  CounterexampleSequence seq_;
  GossipMatrix current_;
  GossipMatrix period_mean_;
  double period_rho_ = 0.0;
  double lambda_cap_ = 0.0;
};

enum class FunctionRole { V1, V2, Other };

// Vertex functions on R^{m_max}: a mu/(2n)||x||^2 well everywhere, V1 adds
// the odd-to-even difference chain, V2 adds the (x_1 - 1)^2 source and the
// even-to-odd chain, each scaled by (L - mu)/(4 floor(n/2)).
struct WorstCaseFunction {
  FunctionRole role = FunctionRole::Other;
  int n_param = 0;
  double mu = 0.0;
  double L = 0.0;
  int m_max = 0;  // truncation dimension, even, >= 4

  double value(const Vector& x) const;
  Vector grad(const Vector& x) const;
  LocalObjective to_local_objective() const;
};

// One LocalObjective per vertex of the counterexample, roles taken from the
// marks of a TwoStarGraph with the given n_param.
std::vector<LocalObjective> worstcase_suite(int n_param, double mu, double L, int m_max);

// Condition number of the average of the vertex functions; governs the
// geometric decay of the global minimizer.
double worstcase_global_kappa(int n_param, double mu, double L);

// Exact minimizer of the truncated average objective (tridiagonal solve).
Vector worstcase_global_minimizer(int n_param, double mu, double L, int m_max);

// x*_k = ((sqrt(kappa_g) - 1)/(sqrt(kappa_g) + 1))^k, k = 1..m_max.
Vector closed_form_solution(double kappa_g, int m_max);

// Per-node sets of coordinate indices that may hold nonzero values.
struct SpanState {
  std::vector<std::vector<bool>> known;  // known[node][coord-1]

  static SpanState empty(int nodes, int coord_cap);
  bool anyone_holds(int coord) const;
};

// Local computation: V1 nodes extend held odd coords by one, V2 nodes extend
// held even coords by one and always acquire coord 1, others are unchanged.
void span_local_step(SpanState& span, const std::vector<Mark>& marks);

// Communication: every node's set becomes the union over its closed
// neighborhood in the given graph.
void span_comm_step(SpanState& span, const Graph& graph);

struct FirstNonzero {
  long l_m = -1;  // -1 means "> horizon"
  long bound = 0; // (m-1) t + m
};

// Simulates the span model along the counterexample sequence under the
// schedule local, comm, local, comm, ... (one comm per graph change, free
// local computation between rounds) and returns the first time step at which
// any node can hold coordinate m.
FirstNonzero first_nonzero_time(int n_param, int m, long horizon = 0);

// (1 - 4 sqrt(mu/L))^(72 k / (7 chi) + 2) * dist0. Requires chi >= 56 and
// L > 16 mu > 0.
double theoretical_floor(double k, double chi, double mu, double L, double dist0);

// Largest chi_0 = 8(2n+3), n >= 2, with chi_0 <= chi.
double chi0_below(double chi);

struct KappaRelations {
  double kappa_l = 0.0;        // local condition number of the V-role functions
  double kappa_g_lower = 0.0;  // (kappa_l - 1)/4 + 1
};

KappaRelations kappa_relations(double mu, double L, int n_param);

}  // namespace tvg

#endif  // TVG_LOWERBOUND_HPP
