#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qg/numeric.hpp"

namespace qg::graph {

struct Bond {
  int u = 0;  // 0-based endpoints, u != v
  int v = 0;
  double length = 1.0;
  double flux = 0.0;  // directed u->v; the reversal carries -flux
};

/// Metric graph: simple (no loops or parallel bonds) and connected.
/// Directed bonds are indexed 0..2B-1: bond b runs u->v as index b and
/// v->u as index b + B, so reverse(d) = (d + B) % 2B.
class Graph {
 public:
  Graph(int num_vertices, std::vector<Bond> bonds)
      : num_vertices_(num_vertices), bonds_(std::move(bonds)) {
    if (num_vertices_ < 1) throw std::invalid_argument("Graph: need at least one vertex");
    std::vector<std::vector<bool>> seen(num_vertices_,
                                        std::vector<bool>(num_vertices_, false));
    neighbors_.assign(num_vertices_, {});
    for (const Bond& b : bonds_) {
      if (b.u < 0 || b.u >= num_vertices_ || b.v < 0 || b.v >= num_vertices_)
        throw std::invalid_argument("Graph: bond endpoint out of range");
      if (b.u == b.v) throw std::invalid_argument("Graph: self-loops not allowed");
      if (seen[b.u][b.v]) throw std::invalid_argument("Graph: parallel bond");
      if (!(b.length > 0)) throw std::invalid_argument("Graph: bond length must be positive");
      seen[b.u][b.v] = seen[b.v][b.u] = true;
      neighbors_[b.u].push_back(b.v);
      neighbors_[b.v].push_back(b.u);
    }
    for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
    // connectivity
    std::vector<bool> visited(num_vertices_, false);
    std::vector<int> stack{0};
    visited[0] = true;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : neighbors_[v])
        if (!visited[w]) {
          visited[w] = true;
          stack.push_back(w);
        }
    }
    for (bool v : visited)
      if (!v) throw std::invalid_argument("Graph: not connected");
  }

  int num_vertices() const { return num_vertices_; }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  int num_directed() const { return 2 * num_bonds(); }
  const std::vector<Bond>& bonds() const { return bonds_; }

  int valency(int vertex) const {
    return static_cast<int>(neighbors_.at(vertex).size());
  }
  const std::vector<int>& neighbors(int vertex) const { return neighbors_.at(vertex); }

  int tail(int d) const {  // vertex the directed bond leaves
    const Bond& b = bonds_.at(d % num_bonds());
    return d < num_bonds() ? b.u : b.v;
  }
  int head(int d) const {  // vertex the directed bond enters
    const Bond& b = bonds_.at(d % num_bonds());
    return d < num_bonds() ? b.v : b.u;
  }
  int reverse(int d) const { return (d + num_bonds()) % num_directed(); }

  double length(int d) const { return bonds_.at(d % num_bonds()).length; }
  double flux(int d) const {
    const Bond& b = bonds_.at(d % num_bonds());
    return d < num_bonds() ? b.flux : -b.flux;
  }

  /// Position of neighbor `other` in the sorted neighbor list of `vertex`;
  /// this is the row/column that vertex-scattering matrices use.
  int neighbor_index(int vertex, int other) const {
    const auto& nb = neighbors_.at(vertex);
    const auto it = std::lower_bound(nb.begin(), nb.end(), other);
    if (it == nb.end() || *it != other)
      throw std::invalid_argument("Graph: vertices not adjacent");
    return static_cast<int>(it - nb.begin());
  }

 private:
  int num_vertices_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<int>> neighbors_;
};

/// Fully connected graph on V vertices, unit lengths, zero fluxes.
inline Graph complete_graph(int num_vertices) {
  if (num_vertices < 2)
    throw std::invalid_argument("complete_graph: need at least 2 vertices");
  std::vector<Bond> bonds;
  for (int u = 0; u < num_vertices; ++u)
    for (int v = u + 1; v < num_vertices; ++v) bonds.push_back({u, v, 1.0, 0.0});
  return Graph(num_vertices, std::move(bonds));
}

/// Text format: first line "V B", then B lines "i j L A" with 1-based
/// vertex indices, bond length L > 0 and flux A.
inline Graph parse_graph(std::istream& in) {
  int num_vertices = 0;
  int num_bonds = 0;
  if (!(in >> num_vertices >> num_bonds))
    throw std::invalid_argument("parse_graph: malformed header, expected 'V B'");
  std::vector<Bond> bonds;
  for (int i = 0; i < num_bonds; ++i) {
    int u = 0, v = 0;
    double length = 0, flux = 0;
    if (!(in >> u >> v >> length >> flux))
      throw std::invalid_argument("parse_graph: malformed bond line " + std::to_string(i + 1));
    bonds.push_back({u - 1, v - 1, length, flux});
  }
  return Graph(num_vertices, std::move(bonds));
}

inline Graph parse_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("parse_graph_file: cannot open " + path);
  return parse_graph(in);
}

/// Neumann vertex-scattering matrix: entries 2/v - delta. Orthogonal for
/// every valency.
inline Eigen::MatrixXd neumann_vertex_matrix(int valency) {
  if (valency < 1) throw std::invalid_argument("neumann_vertex_matrix: valency >= 1");
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(valency, valency, 2.0 / valency);
  m.diagonal().array() -= 1.0;
  return m;
}

/// Geometric phases phi_d = (k + A_d) L_b per directed bond. With all
/// fluxes zero, phi_d equals the phase of the reversed bond.
inline Eigen::VectorXd geometric_phases(const Graph& g, double k) {
  Eigen::VectorXd phi(g.num_directed());
  for (int d = 0; d < g.num_directed(); ++d) phi[d] = (k + g.flux(d)) * g.length(d);
  return phi;
}

struct BondScattering {
  Eigen::MatrixXcd matrix;  // 2B x 2B, unitary
  Eigen::VectorXd phases;   // per directed bond
};

inline double unitarity_defect(const Eigen::MatrixXcd& m) {
  const Eigen::MatrixXcd delta =
      m.adjoint() * m - Eigen::MatrixXcd::Identity(m.rows(), m.cols());
  return delta.cwiseAbs().maxCoeff();
}

/// S_{(i,j),(l,m)} = delta_{jl} e^{i phi_(i,j)} sigma^{(j)}_{i,m}: entry
/// (row d, col d') is nonzero only when d' leaves the vertex d enters.
/// Vertex matrices are indexed by sorted neighbor order and must be unitary
/// with dimension equal to the valency.
inline BondScattering assemble_bond_scattering(
    const Graph& g, const Eigen::VectorXd& phases,
    const std::vector<Eigen::MatrixXcd>& vertex_matrices) {
  const int dim = g.num_directed();
  if (phases.size() != dim)
    throw std::invalid_argument("assemble_bond_scattering: phase vector has wrong length");
  if (static_cast<int>(vertex_matrices.size()) != g.num_vertices())
    throw std::invalid_argument("assemble_bond_scattering: need one matrix per vertex");
  for (int v = 0; v < g.num_vertices(); ++v) {
    const auto& m = vertex_matrices[v];
    if (m.rows() != g.valency(v) || m.cols() != g.valency(v))
      throw std::invalid_argument("assemble_bond_scattering: vertex matrix dimension mismatch");
    if (unitarity_defect(m) > 1e-12)
      throw std::invalid_argument("assemble_bond_scattering: vertex matrix not unitary");
  }
  const std::complex<double> i(0.0, 1.0);
  BondScattering out;
  out.phases = phases;
  out.matrix = Eigen::MatrixXcd::Zero(dim, dim);
  for (int d = 0; d < dim; ++d) {
    const int j = g.head(d);
    const std::complex<double> phase = std::exp(i * phases[d]);
    const int row_idx = g.neighbor_index(j, g.tail(d));
    for (int dp = 0; dp < dim; ++dp) {
      if (g.tail(dp) != j) continue;
      out.matrix(d, dp) =
          phase * vertex_matrices[j](row_idx, g.neighbor_index(j, g.head(dp)));
    }
  }
  if (unitarity_defect(out.matrix) > 1e-12)
    throw std::runtime_error("assemble_bond_scattering: assembled matrix not unitary");
  return out;
}

/// Classical (doubly stochastic) evolution operator U_{dd'} = |S_{dd'}|^2.
inline Eigen::MatrixXd classical_operator(const Eigen::MatrixXcd& s) {
  return s.cwiseAbs2();
}

inline double classical_trace(const Eigen::MatrixXd& u, int n) {
  if (n < 1) throw std::invalid_argument("classical_trace: n >= 1");
  Eigen::MatrixXd p = u;
  for (int k = 1; k < n; ++k) p = p * u;
  return p.trace();
}

inline std::complex<double> quantum_trace(const Eigen::MatrixXcd& s, int n) {
  if (n < 1) throw std::invalid_argument("quantum_trace: n >= 1");
  Eigen::MatrixXcd p = s;
  for (int k = 1; k < n; ++k) p = p * s;
  return p.trace();
}

/// Phase-ensemble view of a bond-scattering matrix:
///   S(phi) = diag(e^{i phi_d}) * structure,   phi_d = phi[phase_group[d]].
/// beta = 2 gives every directed bond its own phase; beta = 1 ties the two
/// directions of each bond together.
struct PhasedSystem {
  Eigen::MatrixXcd structure;
  std::vector<int> phase_group;  // directed bond -> free phase index
  std::vector<int> bond_group;   // directed bond -> undirected bond index
  int free_phases = 0;
  int beta = 2;

  int dim() const { return static_cast<int>(structure.rows()); }

  Eigen::MatrixXcd scattering(const std::vector<double>& phases) const {
    if (static_cast<int>(phases.size()) != free_phases)
      throw std::invalid_argument("PhasedSystem: wrong number of phases");
    const std::complex<double> i(0.0, 1.0);
    Eigen::MatrixXcd s = structure;
    for (int d = 0; d < dim(); ++d)
      s.row(d) *= std::exp(i * phases[phase_group[d]]);
    return s;
  }
};

/// Neumann-vertex ensemble for a graph.
inline PhasedSystem phased_system(const Graph& g, int beta) {
  if (beta != 1 && beta != 2)
    throw std::invalid_argument("phased_system: beta must be 1 or 2");
  std::vector<Eigen::MatrixXcd> sigmas;
  sigmas.reserve(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v)
    sigmas.push_back(neumann_vertex_matrix(g.valency(v)).cast<std::complex<double>>());
  const BondScattering s =
      assemble_bond_scattering(g, Eigen::VectorXd::Zero(g.num_directed()), sigmas);
  PhasedSystem sys;
  sys.structure = s.matrix;
  sys.beta = beta;
  sys.phase_group.resize(g.num_directed());
  sys.bond_group.resize(g.num_directed());
  for (int d = 0; d < g.num_directed(); ++d) {
    sys.phase_group[d] = beta == 2 ? d : d % g.num_bonds();
    sys.bond_group[d] = d % g.num_bonds();
  }
  sys.free_phases = beta == 2 ? g.num_directed() : g.num_bonds();
  return sys;
}

/// The single-loop graph as a phase ensemble (two directed bonds, broken
/// time reversal, so always two free phases).
inline PhasedSystem ring_system(double eta) {
  if (!(eta >= 0.0 && eta <= kPi / 2))
    throw std::invalid_argument("ring_system: eta outside [0, pi/2]");
  const std::complex<double> i(0.0, 1.0);
  PhasedSystem sys;
  sys.structure.resize(2, 2);
  sys.structure << std::cos(eta), i * std::sin(eta), i * std::sin(eta), std::cos(eta);
  sys.phase_group = {0, 1};
  sys.bond_group = {0, 0};
  sys.free_phases = 2;
  sys.beta = 2;
  return sys;
}

struct McEstimate {
  double estimate = 0;
  double std_error = 0;
};

/// Monte Carlo average of |tr S^n|^2 / 2B over the phase torus for every
/// n in 1..n_max, all orders sharing the same phase draws. Fully determined
/// by (seed, samples); sample i uses counter positions i*P..i*P+P-1.
inline std::vector<McEstimate> mc_form_factor_sweep(const PhasedSystem& sys,
                                                    int n_max, long long samples,
                                                    std::uint64_t seed) {
  if (n_max < 1) throw std::invalid_argument("mc_form_factor_sweep: n_max >= 1");
  if (samples < 100) throw std::invalid_argument("mc_form_factor_sweep: samples >= 100");
  const int dim = sys.dim();
  const int P = sys.free_phases;
  std::vector<double> sum(n_max + 1, 0.0), sum_sq(n_max + 1, 0.0);
  std::vector<double> phases(P);
  std::vector<std::complex<double>> powers(dim);
  for (long long i = 0; i < samples; ++i) {
    for (int p = 0; p < P; ++p)
      phases[p] = 2 * kPi * uniform_at(seed, static_cast<std::uint64_t>(i) * P + p);
    const Eigen::MatrixXcd s = sys.scattering(phases);
    if (dim <= 4) {
      Eigen::MatrixXcd acc = s;
      for (int n = 1; n <= n_max; ++n) {
        const double x = std::norm(acc.trace()) / dim;
        sum[n] += x;
        sum_sq[n] += x * x;
        if (n < n_max) acc = acc * s;
      }
    } else {
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(s, false);
      const auto& eig = solver.eigenvalues();
      for (int d = 0; d < dim; ++d) powers[d] = eig[d];
      for (int n = 1; n <= n_max; ++n) {
        std::complex<double> tr(0.0, 0.0);
        for (int d = 0; d < dim; ++d) tr += powers[d];
        const double x = std::norm(tr) / dim;
        sum[n] += x;
        sum_sq[n] += x * x;
        if (n < n_max)
          for (int d = 0; d < dim; ++d) powers[d] *= eig[d];
      }
    }
  }
  std::vector<McEstimate> out(n_max + 1);
  for (int n = 1; n <= n_max; ++n) {
    const double mean = sum[n] / samples;
    const double var = std::max(0.0, sum_sq[n] / samples - mean * mean);
    out[n] = {mean, std::sqrt(var / (samples - 1))};
  }
  return out;
}

inline McEstimate mc_form_factor(const PhasedSystem& sys, int n, long long samples,
                                 std::uint64_t seed) {
  return mc_form_factor_sweep(sys, n, samples, seed).at(n);
}

/// Exact phase average of |tr S^n|^2 / 2B on a uniform grid. |tr S^n|^2 is a
/// trigonometric polynomial of degree <= n in each free phase, so n+1 points
/// per phase integrate it exactly; denser grids must not change the result.
inline double quadrature_form_factor(const PhasedSystem& sys, int n,
                                     int points_per_phase = -1) {
  if (n < 1) throw std::invalid_argument("quadrature_form_factor: n >= 1");
  const int P = sys.free_phases;
  if (P > 3)
    throw std::invalid_argument(
        "quadrature_form_factor: more than 3 free phases, grid would be huge");
  const int points = points_per_phase < 0 ? n + 1 : points_per_phase;
  if (points < n + 1)
    throw std::invalid_argument("quadrature_form_factor: grid too coarse to be exact");
  const int dim = sys.dim();
  std::vector<double> phases(P, 0.0);
  std::vector<int> idx(P, 0);
  double acc = 0.0;
  long long total = 1;
  for (int p = 0; p < P; ++p) total *= points;
  for (long long cell = 0; cell < total; ++cell) {
    long long rest = cell;
    for (int p = 0; p < P; ++p) {
      idx[p] = static_cast<int>(rest % points);
      rest /= points;
      phases[p] = 2 * kPi * idx[p] / points;
    }
    const Eigen::MatrixXcd s = sys.scattering(phases);
    Eigen::MatrixXcd powm = s;
    for (int k = 1; k < n; ++k) powm = powm * s;
    acc += std::norm(powm.trace());
  }
  return acc / static_cast<double>(total) / dim;
}

/// Orbit family: traversal counts per directed bond (beta = 2) or per
/// undirected bond (beta = 1), plus the coherent structure-amplitude sum and
/// the number of rooted orbits that realise it.
struct FamilyEntry {
  std::complex<double> amplitude;
  long long orbit_count = 0;
};

struct FamilyTable {
  int beta = 2;
  int dim = 0;  // 2B
  int n = 0;
  std::map<std::vector<int>, FamilyEntry> families;
};

/// Enumerates every rooted closed walk of length n on the directed-bond
/// structure (cyclic shifts are distinct walks) and accumulates the product
/// of vertex-matrix factors into the walk's family bucket. Phases are not
/// included: all orbits of a family share them.
inline FamilyTable enumerate_families(const PhasedSystem& sys, int n,
                                      double walk_budget = 1e7) {
  if (n < 1) throw std::invalid_argument("enumerate_families: n >= 1");
  const int dim = sys.dim();
  std::vector<std::vector<int>> succ(dim);
  for (int d = 0; d < dim; ++d)
    for (int dn = 0; dn < dim; ++dn)
      if (std::abs(sys.structure(dn, d)) > 1e-14) succ[d].push_back(dn);
  size_t max_deg = 1;
  for (const auto& s : succ) max_deg = std::max(max_deg, s.size());
  if (dim * std::pow(static_cast<double>(max_deg), n - 1) > walk_budget)
    throw std::length_error("enumerate_families: walk count exceeds budget");

  FamilyTable table;
  table.beta = sys.beta;
  table.dim = dim;
  table.n = n;

  std::vector<int> counts(dim, 0);
  std::vector<int> path(n, 0);
  for (int start = 0; start < dim; ++start) {
    path[0] = start;
    counts[start] = 1;
    // depth-first over extensions; amp carries the factors of steps made
    auto dfs = [&](auto&& self, int depth, std::complex<double> amp) -> void {
      const int cur = path[depth - 1];
      if (depth == n) {
        const std::complex<double> closing = sys.structure(start, cur);
        if (std::abs(closing) <= 1e-14) return;
        std::vector<int> key;
        if (sys.beta == 2) {
          key = counts;
        } else {
          key.assign(dim / 2, 0);
          for (int d = 0; d < dim; ++d) key[sys.bond_group[d]] += counts[d];
        }
        FamilyEntry& fe = table.families[key];
        fe.amplitude += amp * closing;
        fe.orbit_count += 1;
        return;
      }
      for (int next : succ[cur]) {
        path[depth] = next;
        ++counts[next];
        self(self, depth + 1, amp * sys.structure(next, cur));
        --counts[next];
      }
    };
    dfs(dfs, 1, std::complex<double>(1.0, 0.0));
    counts[start] = 0;
  }
  return table;
}

/// (1/2B) sum over families of |coherent amplitude|^2.
inline double famsum_form_factor(const FamilyTable& table) {
  double acc = 0.0;
  for (const auto& [key, entry] : table.families) acc += std::norm(entry.amplitude);
  return acc / table.dim;
}

/// Necessary (not sufficient) existence test for a family key.
/// beta = 2: directed in-flow equals out-flow at every vertex.
/// beta = 1: the total traversal count of adjacent bonds is even at every
/// vertex. A key whose support splits into disconnected pieces can pass and
/// still admit no single closed orbit.
inline bool family_feasibility(const Graph& g, const std::vector<int>& key, int beta) {
  if (beta == 2) {
    if (static_cast<int>(key.size()) != g.num_directed())
      throw std::invalid_argument("family_feasibility: key length must be 2B");
    for (int v = 0; v < g.num_vertices(); ++v) {
      long long out = 0, in = 0;
      for (int d = 0; d < g.num_directed(); ++d) {
        if (key[d] < 0) throw std::invalid_argument("family_feasibility: negative count");
        if (g.tail(d) == v) out += key[d];
        if (g.head(d) == v) in += key[d];
      }
      if (out != in) return false;
    }
    return true;
  }
  if (beta == 1) {
    if (static_cast<int>(key.size()) != g.num_bonds())
      throw std::invalid_argument("family_feasibility: key length must be B");
    for (int v = 0; v < g.num_vertices(); ++v) {
      long long total = 0;
      for (int b = 0; b < g.num_bonds(); ++b) {
        if (key[b] < 0) throw std::invalid_argument("family_feasibility: negative count");
        if (g.bonds()[b].u == v || g.bonds()[b].v == v) total += key[b];
      }
      if (total % 2 != 0) return false;
    }
    return true;
  }
  throw std::invalid_argument("family_feasibility: beta must be 1 or 2");
}

/// Random-matrix reference curves for the form factor at scaled time
/// tau = n/2B. beta = 2: CUE ramp min(tau,1). beta = 1: COE.
inline double rmt_reference(double tau, int beta) {
  if (!(tau >= 0)) throw std::invalid_argument("rmt_reference: tau >= 0");
  if (beta == 2) return std::min(tau, 1.0);
  if (beta == 1) {
    if (tau == 0.0) return 0.0;
    if (tau <= 1.0) return 2 * tau - tau * std::log(1 + 2 * tau);
    return 2 - tau * std::log((2 * tau + 1) / (2 * tau - 1));
  }
  throw std::invalid_argument("rmt_reference: beta must be 1 or 2");
}

}  // namespace qg::graph
