#include "tvg/markov.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tvg/rng.hpp"

namespace tvg {

void GraphFamily::validate() const {
  if (members.empty()) throw std::invalid_argument("family: no members");
  if (pi.size() != size()) throw std::invalid_argument("family: pi size mismatch");
  const int n0 = members.front().n();
  double sum = 0.0;
  for (int i = 0; i < size(); ++i) {
    if (members[i].n() != n0) throw std::invalid_argument("family: members disagree on n");
    if (!members[i].graph().is_connected())
      throw std::invalid_argument("family: member " + std::to_string(i) + " is disconnected");
    if (pi(i) < 0) throw std::invalid_argument("family: negative pi entry");
    sum += pi(i);
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("family: pi does not sum to 1");
}

Graph GraphFamily::union_graph() const {
  Graph u(n());
  for (const auto& member : members)
    for (const auto& [i, j] : member.graph().edges())
      if (!u.has_edge(i, j)) u.add_edge(i, j);
  return u;
}

GossipMatrix mean_gossip(const GraphFamily& family) {
  family.validate();
  Matrix W = Matrix::Zero(family.n(), family.n());
  for (int i = 0; i < family.size(); ++i)
    W += family.pi(i) * build_laplacian(family.members[i]);
  auto diag = validate_gossip(W, family.union_graph());
  if (!diag.ok)
    throw std::invalid_argument("mean_gossip: mean fails gossip validation: " + diag.violation);
  return W;
}

double rho_bound(const GraphFamily& family) {
  Matrix W = mean_gossip(family);
  double rho = 0.0;
  for (const auto& member : family.members)
    rho = std::max(rho, operator_norm(build_laplacian(member) - W));
  return rho;
}

MarkovGraphChain::MarkovGraphChain(GraphFamily family, Matrix kernel, int tau, std::uint64_t seed)
    : family_(std::move(family)),
      kernel_(std::move(kernel)),
      tau_(tau),
      rng_(make_rng(seed, "markov-chain")) {
  family_.validate();
  const int k = family_.size();
  if (kernel_.rows() != k || kernel_.cols() != k)
    throw std::invalid_argument("chain: kernel dimension mismatch");
  if (tau_ < 1) throw std::invalid_argument("chain: tau must be >= 1");
  for (int i = 0; i < k; ++i) {
    double row = 0.0;
    for (int j = 0; j < k; ++j) {
      if (kernel_(i, j) < 0) throw std::invalid_argument("chain: negative kernel entry");
      row += kernel_(i, j);
    }
    if (std::abs(row - 1.0) > 1e-12)
      throw std::invalid_argument("chain: kernel row " + std::to_string(i) + " does not sum to 1");
  }
  Vector piQ = kernel_.transpose() * family_.pi;
  if ((piQ - family_.pi).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("chain: pi is not stationary for the kernel");

  laplacians_.reserve(k);
  for (const auto& member : family_.members) laplacians_.push_back(build_laplacian(member));

  state_ = sample_index(family_.pi);  // stationary start
}

int MarkovGraphChain::sample_index(const Vector& probabilities) {
  const double u = uniform01(rng_);
  double acc = 0.0;
  for (int i = 0; i < probabilities.size(); ++i) {
    acc += probabilities(i);
    if (u < acc) return i;
  }
  return static_cast<int>(probabilities.size()) - 1;
}

const GossipMatrix& MarkovGraphChain::step() {
  state_ = sample_index(kernel_.row(state_).transpose());
  return laplacians_[state_];
}

bool MarkovGraphChain::is_primitive() const {
  const int k = family_.size();
  Matrix power = Matrix::Identity(k, k);
  const int limit = std::max(2, k * k + 1);
  for (int m = 1; m <= limit; ++m) {
    power = power * kernel_;
    if ((power.array() > 0).all()) return true;
  }
  return false;
}

MixingDiagnostic MarkovGraphChain::mixing_diagnostic(int m) const {
  const int k = family_.size();
  if (k > 1000) throw std::invalid_argument("mixing_diagnostic: family too large for dense powers");
  if (m < 1) throw std::invalid_argument("mixing_diagnostic: m must be >= 1");
  Matrix power = Matrix::Identity(k, k);
  for (int s = 0; s < m; ++s) power = power * kernel_;
  MixingDiagnostic diag;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      diag.delta = std::max(diag.delta, 0.5 * (power.row(i) - power.row(j)).cwiseAbs().sum());
  diag.consistent = diag.delta <= std::pow(0.25, m / tau_) + 1e-12;
  return diag;
}

GraphFamily edge_toggle(const Graph& base, int delta, int count, std::uint64_t seed) {
  if (!base.is_connected()) throw std::invalid_argument("edge_toggle: base must be connected");
  if (delta < 1 || count < 1) throw std::invalid_argument("edge_toggle: delta and count must be >= 1");
  auto rng = make_rng(seed, "edge-toggle");
  const int n = base.n();

  // Nested toggle prefixes keep every pairwise edge difference <= delta.
  std::vector<Graph> prefix{base};
  std::set<Edge> toggled;
  int attempts = 0;
  while (static_cast<int>(prefix.size()) <= delta) {
    if (++attempts > 20000) throw std::runtime_error("edge_toggle: could not extend toggle chain");
    int i = static_cast<int>(uniform01(rng) * n);
    int j = static_cast<int>(uniform01(rng) * n);
    if (i == j) continue;
    Edge e = make_edge(i, j);
    if (toggled.count(e)) continue;  // toggling an edge twice would unnest the chain
    Graph trial = prefix.back();
    trial.toggle_edge(i, j);
    if (!trial.is_connected()) continue;
    toggled.insert(e);
    prefix.push_back(trial);
  }

  GraphFamily family;
  for (int c = 0; c < count; ++c) {
    int depth = static_cast<int>(uniform01(rng) * (delta + 1));
    family.members.emplace_back(prefix[std::min(depth, delta)]);
  }
  family.pi = Vector::Constant(count, 1.0 / count);
  family.validate();
  return family;
}

GraphFamily ring_of_graphs(const std::vector<WeightedGraph>& members) {
  GraphFamily family;
  family.members = members;
  family.pi = Vector::Constant(static_cast<int>(members.size()),
                               1.0 / static_cast<double>(members.size()));
  family.validate();
  return family;
}

Matrix lazy_ring_kernel(int size) {
  if (size < 1) throw std::invalid_argument("lazy_ring_kernel: empty ring");
  Matrix Q = Matrix::Zero(size, size);
  if (size == 1) {
    Q(0, 0) = 1.0;
    return Q;
  }
  for (int i = 0; i < size; ++i) {
    Q(i, i) += 0.5;
    Q(i, (i + 1) % size) += 0.25;
    Q(i, (i + size - 1) % size) += 0.25;
  }
  return Q;
}

Matrix lazy_uniform_kernel(const Vector& pi, double p) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("lazy_uniform_kernel: p must be in [0, 1)");
  const int k = static_cast<int>(pi.size());
  Matrix Q = p * Matrix::Identity(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) Q(i, j) += (1.0 - p) * pi(j);
  return Q;
}

namespace {

std::vector<std::string> family_data_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    if (auto cr = line.find('\r'); cr != std::string::npos) line.erase(cr);
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

FamilySpec read_family_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("family file: cannot open " + path);
  const auto dir = std::filesystem::path(path).parent_path();
  auto lines = family_data_lines(in);

  FamilySpec spec;
  std::vector<std::string> member_paths;
  std::string kernel_kind;
  double lazy_p = 0.5;
  std::vector<std::string> matrix_rows;
  bool in_matrix = false;

  for (const auto& line : lines) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (in_matrix && (key.find_first_not_of("0123456789.+-eE") == std::string::npos)) {
      matrix_rows.push_back(line);
      continue;
    }
    in_matrix = false;
    if (key == "member") {
      std::string p;
      ls >> p;
      member_paths.push_back(p);
    } else if (key == "pi") {
      std::vector<double> entries;
      double v;
      while (ls >> v) entries.push_back(v);
      spec.family.pi = Eigen::Map<Vector>(entries.data(), static_cast<int>(entries.size()));
    } else if (key == "kernel") {
      ls >> kernel_kind;
      if (kernel_kind == "lazy-uniform") {
        std::string arg;
        ls >> arg;
        if (arg.rfind("p=", 0) != 0)
          throw std::invalid_argument("family file: lazy-uniform expects p=<value>");
        lazy_p = std::stod(arg.substr(2));
      } else if (kernel_kind == "matrix") {
        in_matrix = true;
      } else if (kernel_kind != "lazy-ring") {
        throw std::invalid_argument("family file: unknown kernel kind '" + kernel_kind + "'");
      }
    } else if (key == "tau") {
      ls >> spec.tau;
    } else if (key == "seed") {
      ls >> spec.seed;
    } else {
      throw std::invalid_argument("family file: unknown key '" + key + "'");
    }
  }

  if (member_paths.empty()) throw std::invalid_argument("family file: no members");
  for (const auto& p : member_paths) {
    std::filesystem::path full =
        std::filesystem::path(p).is_absolute() ? std::filesystem::path(p) : dir / p;
    spec.family.members.push_back(read_graph_file(full.string()));
  }
  const int k = static_cast<int>(member_paths.size());
  if (spec.family.pi.size() == 0) spec.family.pi = Vector::Constant(k, 1.0 / k);

  if (kernel_kind == "lazy-uniform" || kernel_kind.empty()) {
    spec.kernel = lazy_uniform_kernel(spec.family.pi, kernel_kind.empty() ? 0.5 : lazy_p);
  } else if (kernel_kind == "lazy-ring") {
    spec.kernel = lazy_ring_kernel(k);
  } else {
    if (static_cast<int>(matrix_rows.size()) != k)
      throw std::invalid_argument("family file: kernel matrix needs one row per member");
    spec.kernel = Matrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      std::istringstream rs(matrix_rows[i]);
      for (int j = 0; j < k; ++j)
        if (!(rs >> spec.kernel(i, j)))
          throw std::invalid_argument("family file: short kernel matrix row");
    }
  }
  spec.family.validate();
  return spec;
}

void write_family_file(const std::string& path, const FamilySpec& spec,
                       const std::vector<std::string>& member_paths) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("family file: cannot write " + path);
  out << "# gossip family\n";
  for (const auto& p : member_paths) out << "member " << p << "\n";
  out << "pi";
  char buf[64];
  for (int i = 0; i < spec.family.pi.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", spec.family.pi(i));
    out << " " << buf;
  }
  out << "\nkernel matrix\n";
  for (int i = 0; i < spec.kernel.rows(); ++i) {
    for (int j = 0; j < spec.kernel.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", spec.kernel(i, j));
      out << (j ? " " : "") << buf;
    }
    out << "\n";
  }
  out << "tau " << spec.tau << "\n";
  out << "seed " << spec.seed << "\n";
}

}  // namespace tvg
