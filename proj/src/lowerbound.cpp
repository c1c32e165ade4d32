#include "tvg/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tvg {

int TwoStarGraph::connector() const {
  for (int v = 0; v < vertex_count(); ++v)
    if (roles[v] == VertexRole::Connector) return v;
  throw std::logic_error("two-star: no connector");
}

Graph TwoStarGraph::graph() const {
  Graph g(vertex_count());
  for (int v = 2; v < vertex_count(); ++v) {
    switch (roles[v]) {
      case VertexRole::LeftLeaf:
        g.add_edge(0, v);
        break;
      case VertexRole::RightLeaf:
        g.add_edge(1, v);
        break;
      case VertexRole::Connector:
        g.add_edge(0, v);
        g.add_edge(1, v);
        break;
      default:
        throw std::logic_error("two-star: center role on a leaf id");
    }
  }
  return g;
}

TwoStarGraph build_two_star(int n_param, int a, int b) {
  if (n_param < 2) throw std::invalid_argument("two-star: n must be >= 2");
  if (a + b != 2 * n_param) throw std::invalid_argument("two-star: a + b must equal 2n");
  const int m = n_param / 2;
  if (a < m || b < m)
    throw std::invalid_argument("two-star: insufficient leaves to host the marked sets");

  TwoStarGraph t;
  t.n_param = n_param;
  t.a = a;
  t.b = b;
  const int total = t.vertex_count();
  t.roles.assign(total, VertexRole::LeftLeaf);
  t.marks.assign(total, Mark::Unmarked);
  t.roles[0] = VertexRole::LeftCenter;
  t.roles[1] = VertexRole::RightCenter;
  for (int v = 2; v < 2 + m; ++v) t.marks[v] = Mark::V1;
  for (int v = 2 + m; v < 2 + 2 * m; ++v) t.marks[v] = Mark::V2;

  // Marked leaves sit on their home side; unmarked ids fill the remaining
  // left slots, then the right slots, and the last one is the connector.
  for (int v = 2; v < 2 + m; ++v) t.roles[v] = VertexRole::LeftLeaf;
  for (int v = 2 + m; v < 2 + 2 * m; ++v) t.roles[v] = VertexRole::RightLeaf;
  int left_needed = a - m, right_needed = b - m;
  for (int v = 2 + 2 * m; v < total; ++v) {
    if (left_needed > 0) {
      t.roles[v] = VertexRole::LeftLeaf;
      --left_needed;
    } else if (right_needed > 0) {
      t.roles[v] = VertexRole::RightLeaf;
      --right_needed;
    } else {
      t.roles[v] = VertexRole::Connector;
    }
  }
  return t;
}

int phase_length(int n_param) { return 2 * n_param - 2 * (n_param / 2); }

CounterexampleSequence::CounterexampleSequence(int n_param, double chi_target)
    : n_param_(n_param), chi_target_(chi_target) {
  const int m = n_param / 2;
  cur_ = build_two_star(n_param, 2 * n_param - m, m);
  if (chi_target_ <= 0.0) chi_target_ = max_period_chi(n_param);
}

CounterexampleSequence::StepChange CounterexampleSequence::phase_step() {
  const int m = n_param_ / 2;
  const int v = cur_.connector();
  const bool left_to_right = phase_ == 1;

  int u = -1;
  const VertexRole donor = left_to_right ? VertexRole::LeftLeaf : VertexRole::RightLeaf;
  for (int w = 2; w < cur_.vertex_count(); ++w) {
    if (cur_.roles[w] == donor && cur_.marks[w] == Mark::Unmarked) {
      u = w;
      break;
    }
  }
  if (u < 0) throw std::logic_error("phase_step: no unmarked leaf available");

  StepChange change;
  if (left_to_right) {
    cur_.roles[v] = VertexRole::RightLeaf;  // loses the edge to the left center
    cur_.roles[u] = VertexRole::Connector;  // gains the edge to the right center
    change.removed = make_edge(v, 0);
    change.added = make_edge(u, 1);
    --cur_.a;
    ++cur_.b;
  } else {
    cur_.roles[v] = VertexRole::LeftLeaf;
    cur_.roles[u] = VertexRole::Connector;
    change.removed = make_edge(v, 1);
    change.added = make_edge(u, 0);
    ++cur_.a;
    --cur_.b;
  }
  ++step_index_;
  ++step_in_phase_;
  if (left_to_right && cur_.a == m) {
    phase_ = 2;
    step_in_phase_ = 0;
  } else if (!left_to_right && cur_.a == 2 * n_param_ - m) {
    phase_ = 1;
    step_in_phase_ = 0;
  }
  return change;
}

WeightedGraph CounterexampleSequence::weighted_current() const {
  return retune_chi(shortest_path_weighting(cur_.graph()), chi_target_);
}

GossipMatrix CounterexampleSequence::gossip_current() const {
  return build_laplacian(weighted_current());
}

double max_period_chi(int n_param) {
  CounterexampleSequence seq(n_param, 1.0);  // placeholder target, not used here
  double chi = 0.0;
  const int period = 2 * phase_length(n_param);
  for (int k = 0; k < period; ++k) {
    WeightedGraph w = shortest_path_weighting(seq.current().graph());
    chi = std::max(chi, spectral_summary(build_laplacian(w)).chi);
    seq.phase_step();
  }
  return chi;
}

CounterexampleSource::CounterexampleSource(int n_param, double chi_target)
    : seq_(n_param, chi_target) {
  const int period = 2 * phase_length(n_param);
  const int n = seq_.current().vertex_count();
  // One dry period to fix the mean, the deviation bound and lambda_cap.
  CounterexampleSequence probe(n_param, seq_.chi_target());
  std::vector<GossipMatrix> mats;
  period_mean_ = Matrix::Zero(n, n);
  for (int k = 0; k < period; ++k) {
    mats.push_back(probe.gossip_current());
    period_mean_ += mats.back();
    probe.phase_step();
  }
  period_mean_ /= double(period);
  for (const auto& W : mats) {
    period_rho_ = std::max(period_rho_, operator_norm(W - period_mean_));
    lambda_cap_ = std::max(lambda_cap_, symmetric_eigenvalues(W)(n - 1));
  }
}

const GossipMatrix& CounterexampleSource::next() {
  current_ = seq_.gossip_current();
  seq_.phase_step();
  return current_;
}

namespace {

double chain_terms_v1(const Vector& x, Vector* grad, double coeff) {
  // sum over (x_{2k-1} - x_{2k})^2, 1-based pairs (1,2), (3,4), ...
  const int d = static_cast<int>(x.size());
  double v = 0.0;
  for (int first = 1; first + 1 <= d; first += 2) {
    const double diff = x(first - 1) - x(first);
    v += coeff * diff * diff;
    if (grad) {
      (*grad)(first - 1) += 2.0 * coeff * diff;
      (*grad)(first) -= 2.0 * coeff * diff;
    }
  }
  return v;
}

double chain_terms_v2(const Vector& x, Vector* grad, double coeff) {
  // (x_1 - 1)^2 plus sum over (x_{2k} - x_{2k+1})^2, pairs (2,3), (4,5), ...
  const int d = static_cast<int>(x.size());
  const double source = x(0) - 1.0;
  double v = coeff * source * source;
  if (grad) (*grad)(0) += 2.0 * coeff * source;
  for (int first = 2; first + 1 <= d; first += 2) {
    const double diff = x(first - 1) - x(first);
    v += coeff * diff * diff;
    if (grad) {
      (*grad)(first - 1) += 2.0 * coeff * diff;
      (*grad)(first) -= 2.0 * coeff * diff;
    }
  }
  return v;
}

}  // namespace

double WorstCaseFunction::value(const Vector& x) const {
  if (static_cast<int>(x.size()) != m_max)
    throw std::invalid_argument("worst-case function: dimension mismatch");
  const double quad = mu / (2.0 * n_param) * x.squaredNorm();
  const int marked = n_param / 2;
  const double coeff = (L - mu) / (4.0 * marked);
  switch (role) {
    case FunctionRole::V1:
      return quad + chain_terms_v1(x, nullptr, coeff);
    case FunctionRole::V2:
      return quad + chain_terms_v2(x, nullptr, coeff);
    default:
      return quad;
  }
}

Vector WorstCaseFunction::grad(const Vector& x) const {
  if (static_cast<int>(x.size()) != m_max)
    throw std::invalid_argument("worst-case function: dimension mismatch");
  Vector g = mu / double(n_param) * x;
  const int marked = n_param / 2;
  const double coeff = (L - mu) / (4.0 * marked);
  if (role == FunctionRole::V1) chain_terms_v1(x, &g, coeff);
  if (role == FunctionRole::V2) chain_terms_v2(x, &g, coeff);
  return g;
}

LocalObjective WorstCaseFunction::to_local_objective() const {
  LocalObjective f;
  f.dim = m_max;
  f.mu = mu;
  f.L = L;
  WorstCaseFunction self = *this;
  f.value = [self](const Vector& x) { return self.value(x); };
  f.grad = [self](const Vector& x) { return self.grad(x); };
  return f;
}

std::vector<LocalObjective> worstcase_suite(int n_param, double mu, double L, int m_max) {
  if (m_max < 4 || m_max % 2 != 0)
    throw std::invalid_argument("worst-case suite: m_max must be even and >= 4");
  const int m = n_param / 2;
  TwoStarGraph t = build_two_star(n_param, 2 * n_param - m, m);
  std::vector<LocalObjective> suite;
  suite.reserve(t.vertex_count());
  for (int v = 0; v < t.vertex_count(); ++v) {
    WorstCaseFunction f;
    f.n_param = n_param;
    f.mu = mu;
    f.L = L;
    f.m_max = m_max;
    f.role = t.marks[v] == Mark::V1   ? FunctionRole::V1
             : t.marks[v] == Mark::V2 ? FunctionRole::V2
                                      : FunctionRole::Other;
    suite.push_back(f.to_local_objective());
  }
  return suite;
}

double worstcase_global_kappa(int n_param, double mu, double L) {
  // Average objective: (mu/2n)||x||^2 + (L-mu)/(4 agents) [(x_1-1)^2 + chain].
  // Its stationarity recursion x_{k+1} + x_{k-1} = (2 + muhat/s) x_k with
  // muhat = mu/n and s = (L-mu)/(2 agents) has the geometric solution q^k,
  // q = (sqrt(kappa)-1)/(sqrt(kappa)+1), exactly when kappa = 1 + 4s/muhat.
  const int agents = 2 * n_param + 3;
  return 1.0 + 2.0 * n_param * (L - mu) / (double(agents) * mu);
}

Vector worstcase_global_minimizer(int n_param, double mu, double L, int m_max) {
  const int agents = 2 * n_param + 3;
  const double half_chain = (L - mu) / (2.0 * agents);  // coefficient of e1 e1^T + path
  Matrix H = (mu / n_param) * Matrix::Identity(m_max, m_max);
  H(0, 0) += half_chain;
  for (int i = 0; i + 1 < m_max; ++i) {
    H(i, i) += half_chain;
    H(i + 1, i + 1) += half_chain;
    H(i, i + 1) -= half_chain;
    H(i + 1, i) -= half_chain;
  }
  Vector c = Vector::Zero(m_max);
  c(0) = half_chain;
  return H.ldlt().solve(c);
}

Vector closed_form_solution(double kappa_g, int m_max) {
  if (!(kappa_g > 1.0)) throw std::invalid_argument("closed_form_solution: kappa_g must exceed 1");
  const double q = (std::sqrt(kappa_g) - 1.0) / (std::sqrt(kappa_g) + 1.0);
  Vector x(m_max);
  double p = 1.0;
  for (int k = 0; k < m_max; ++k) {
    p *= q;
    x(k) = p;
  }
  return x;
}

SpanState SpanState::empty(int nodes, int coord_cap) {
  SpanState s;
  s.known.assign(nodes, std::vector<bool>(coord_cap, false));
  return s;
}

bool SpanState::anyone_holds(int coord) const {
  for (const auto& node : known)
    if (node[coord - 1]) return true;
  return false;
}

void span_local_step(SpanState& span, const std::vector<Mark>& marks) {
  const int cap = static_cast<int>(span.known.front().size());
  for (std::size_t v = 0; v < span.known.size(); ++v) {
    if (marks[v] == Mark::Unmarked) continue;
    std::vector<bool> next = span.known[v];
    if (marks[v] == Mark::V2) next[0] = true;  // gradient of (x_1 - 1)^2 at any point
    for (int c = 1; c <= cap; ++c) {
      if (!span.known[v][c - 1]) continue;
      const bool odd = c % 2 == 1;
      if ((marks[v] == Mark::V1 && odd) || (marks[v] == Mark::V2 && !odd))
        if (c + 1 <= cap) next[c] = true;
    }
    span.known[v] = std::move(next);
  }
}

void span_comm_step(SpanState& span, const Graph& graph) {
  auto adj = graph.adjacency();
  std::vector<std::vector<bool>> next = span.known;
  for (int v = 0; v < graph.n(); ++v)
    for (int u : adj[v])
      for (std::size_t c = 0; c < span.known[u].size(); ++c)
        if (span.known[u][c]) next[v][c] = true;
  span.known = std::move(next);
}

FirstNonzero first_nonzero_time(int n_param, int m, long horizon) {
  const int t = phase_length(n_param);
  FirstNonzero result;
  result.bound = static_cast<long>(m - 1) * t + m;
  if (horizon <= 0) horizon = 4 * (result.bound + t) + 16;

  CounterexampleSequence seq(n_param, 1.0);  // structure only; weights unused
  SpanState span = SpanState::empty(seq.current().vertex_count(), m);
  const std::vector<Mark> marks = seq.current().marks;

  for (long k = 1; k <= horizon; ++k) {
    if (k % 2 == 1) {
      span_local_step(span, marks);
    } else {
      span_comm_step(span, seq.current().graph());
      seq.phase_step();
    }
    if (span.anyone_holds(m)) {
      result.l_m = k;
      return result;
    }
  }
  return result;  // l_m = -1: not reached within the horizon
}

double theoretical_floor(double k, double chi, double mu, double L, double dist0) {
  if (!(chi >= 56.0)) throw std::invalid_argument("theoretical_floor: chi must be >= 56");
  if (!(mu > 0) || !(L > 16.0 * mu))
    throw std::invalid_argument("theoretical_floor: need L > 16 mu > 0");
  const double base = 1.0 - 4.0 * std::sqrt(mu / L);
  return std::pow(base, 72.0 * k / (7.0 * chi) + 2.0) * dist0;
}

double chi0_below(double chi) {
  if (chi < 56.0) throw std::invalid_argument("chi0_below: chi must be >= 56");
  const double steps = std::floor((chi - 56.0) / 16.0);
  return 56.0 + 16.0 * steps;
}

KappaRelations kappa_relations(double mu, double L, int n_param) {
  if (!(mu > 0) || !(L >= mu)) throw std::invalid_argument("kappa_relations: need 0 < mu <= L");
  if (n_param < 2) throw std::invalid_argument("kappa_relations: n must be >= 2");
  const int marked = n_param / 2;
  KappaRelations rel;
  rel.kappa_l = ((L - mu) / marked + mu / n_param) / (mu / n_param);
  rel.kappa_g_lower = (rel.kappa_l - 1.0) / 4.0 + 1.0;
  return rel;
}

}  // namespace tvg
