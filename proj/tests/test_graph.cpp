#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <sstream>

#include "qg/graph.hpp"
#include "qg/numeric.hpp"
#include "qg/ring.hpp"

using qg::kPi;
namespace graph = qg::graph;
namespace ring = qg::ring;

namespace {

graph::Graph single_bond() { return graph::Graph(2, {{0, 1, 1.0, 0.0}}); }

graph::Graph path4() {
  return graph::Graph(4, {{0, 1, 1.0, 0.0}, {1, 2, 1.0, 0.0}, {2, 3, 1.0, 0.0}});
}

// random connected simple graph: a random spanning tree plus extra bonds
graph::Graph random_graph(std::uint64_t seed, int max_vertices = 6) {
  const int v = 2 + static_cast<int>(qg::splitmix64_at(seed, 0) % (max_vertices - 1));
  std::vector<graph::Bond> bonds;
  std::vector<std::pair<int, int>> present;
  for (int i = 1; i < v; ++i) {
    const int j = static_cast<int>(qg::splitmix64_at(seed, i) % i);
    bonds.push_back({j, i, 0.5 + qg::uniform_at(seed, 100 + i),
                     qg::uniform_at(seed, 200 + i) - 0.5});
    present.push_back({j, i});
  }
  for (int a = 0; a < v; ++a)
    for (int b = a + 1; b < v; ++b) {
      bool have = false;
      for (auto [x, y] : present)
        if ((x == a && y == b) || (x == b && y == a)) have = true;
      if (!have && qg::uniform_at(seed, 300 + a * 17 + b) < 0.4) {
        bonds.push_back({a, b, 0.5 + qg::uniform_at(seed, 400 + a * 17 + b),
                         qg::uniform_at(seed, 500 + a * 17 + b) - 0.5});
        present.push_back({a, b});
      }
    }
  return graph::Graph(v, std::move(bonds));
}

std::vector<double> random_phases(int count, std::uint64_t seed) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = 2 * kPi * qg::uniform_at(seed, 900 + i);
  return out;
}

}  // namespace

TEST_CASE("neumann vertex matrices") {
  CHECK(graph::neumann_vertex_matrix(1)(0, 0) == Catch::Approx(1.0));
  const Eigen::MatrixXd v2 = graph::neumann_vertex_matrix(2);
  CHECK(v2(0, 0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(v2(0, 1) == Catch::Approx(1.0));
  const Eigen::MatrixXd v3 = graph::neumann_vertex_matrix(3);
  CHECK(v3(0, 0) == Catch::Approx(-1.0 / 3));
  CHECK(v3(1, 2) == Catch::Approx(2.0 / 3));
  for (int v = 1; v <= 8; ++v) {
    const Eigen::MatrixXd m = graph::neumann_vertex_matrix(v);
    REQUIRE((m * m.transpose() - Eigen::MatrixXd::Identity(v, v)).cwiseAbs().maxCoeff() <
            1e-12);
  }
}

TEST_CASE("graph validation") {
  CHECK_THROWS_AS(graph::Graph(2, {{0, 0, 1.0, 0.0}}), std::invalid_argument);  // loop
  CHECK_THROWS_AS(graph::Graph(2, {{0, 1, 1.0, 0.0}, {1, 0, 1.0, 0.0}}),
                  std::invalid_argument);  // parallel
  CHECK_THROWS_AS(graph::Graph(3, {{0, 1, 1.0, 0.0}}), std::invalid_argument);  // split
  CHECK_THROWS_AS(graph::Graph(2, {{0, 1, 0.0, 0.0}}), std::invalid_argument);  // length
  CHECK_THROWS_AS(graph::Graph(2, {{0, 2, 1.0, 0.0}}), std::invalid_argument);  // range
  const graph::Graph g = path4();
  CHECK(g.num_bonds() == 3);
  CHECK(g.num_directed() == 6);
  CHECK(g.valency(1) == 2);
  CHECK(g.tail(0) == 0);
  CHECK(g.head(0) == 1);
  CHECK(g.tail(g.reverse(0)) == 1);
  CHECK(g.reverse(g.reverse(2)) == 2);
}

TEST_CASE("graph file parsing") {
  std::istringstream in("3 2\n1 2 1.5 0.0\n2 3 2.0 -0.25\n");
  const graph::Graph g = graph::parse_graph(in);
  CHECK(g.num_vertices() == 3);
  CHECK(g.bonds()[1].flux == Catch::Approx(-0.25));
  std::istringstream bad_header("x");
  CHECK_THROWS_AS(graph::parse_graph(bad_header), std::invalid_argument);
  std::istringstream bad_line("2 1\n1 2 1.0\n");
  CHECK_THROWS_AS(graph::parse_graph(bad_line), std::invalid_argument);
  CHECK_THROWS_AS(graph::parse_graph_file("/nonexistent/file"), std::invalid_argument);
}

TEST_CASE("geometric phases") {
  const graph::Graph g(2, {{0, 1, 2.0, 0.25}});
  const Eigen::VectorXd phi = graph::geometric_phases(g, 1.5);
  CHECK(phi[0] == Catch::Approx(3.5));   // (1.5 + 0.25) * 2
  CHECK(phi[1] == Catch::Approx(2.5));   // (1.5 - 0.25) * 2
  const graph::Graph flat(3, {{0, 1, 1.0, 0.0}, {1, 2, 0.5, 0.0}});
  const Eigen::VectorXd sym = graph::geometric_phases(flat, 0.8);
  for (int d = 0; d < flat.num_directed(); ++d)
    CHECK(sym[d] == Catch::Approx(sym[flat.reverse(d)]));
  CHECK(graph::geometric_phases(flat, 0.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bond scattering assembly") {
  const graph::Graph g = single_bond();
  std::vector<Eigen::MatrixXcd> sigmas{
      graph::neumann_vertex_matrix(1).cast<std::complex<double>>(),
      graph::neumann_vertex_matrix(1).cast<std::complex<double>>()};
  Eigen::VectorXd phases(2);
  phases << 0.7, -0.2;
  const graph::BondScattering s = graph::assemble_bond_scattering(g, phases, sigmas);
  CHECK(std::abs(s.matrix(0, 0)) < 1e-15);
  CHECK(std::abs(s.matrix(1, 1)) < 1e-15);
  CHECK(std::abs(s.matrix(0, 1) - std::exp(std::complex<double>(0, 0.7))) < 1e-14);
  CHECK(std::abs(s.matrix(1, 0) - std::exp(std::complex<double>(0, -0.2))) < 1e-14);

  Eigen::VectorXd short_phases(1);
  CHECK_THROWS_AS(graph::assemble_bond_scattering(g, short_phases, sigmas),
                  std::invalid_argument);
  std::vector<Eigen::MatrixXcd> bad = sigmas;
  bad[0] *= 2.0;
  CHECK_THROWS_AS(graph::assemble_bond_scattering(g, phases, bad), std::invalid_argument);
}

TEST_CASE("assembled matrices are unitary across a random corpus") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const graph::Graph g = random_graph(seed);
    std::vector<Eigen::MatrixXcd> sigmas;
    for (int v = 0; v < g.num_vertices(); ++v)
      sigmas.push_back(graph::neumann_vertex_matrix(g.valency(v)).cast<std::complex<double>>());
    Eigen::VectorXd phases(g.num_directed());
    for (int d = 0; d < g.num_directed(); ++d)
      phases[d] = 2 * kPi * qg::uniform_at(seed, 700 + d);
    const graph::BondScattering s = graph::assemble_bond_scattering(g, phases, sigmas);
    CAPTURE(seed, g.num_vertices(), g.num_bonds());
    REQUIRE(graph::unitarity_defect(s.matrix) < 1e-12);
    const Eigen::MatrixXd u = graph::classical_operator(s.matrix);
    for (int i = 0; i < u.rows(); ++i) {
      REQUIRE(u.row(i).sum() == Catch::Approx(1.0).margin(1e-12));
      REQUIRE(u.col(i).sum() == Catch::Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("complete graph structure") {
  const graph::Graph k3 = graph::complete_graph(3);
  const graph::PhasedSystem sys = graph::phased_system(k3, 2);
  CHECK(sys.dim() == 6);
  // entries vanish unless the column bond feeds the row bond; the number of
  // connected slots per row is the valency (2 here; the valency-2 Neumann
  // backscatter amplitude happens to be zero on top of that)
  for (int d = 0; d < 6; ++d) {
    int connected = 0;
    for (int dp = 0; dp < 6; ++dp) {
      if (k3.tail(dp) == k3.head(d))
        ++connected;
      else
        CHECK(std::abs(sys.structure(d, dp)) == 0.0);
    }
    CHECK(connected == 2);
  }
}

TEST_CASE("classical operator") {
  const graph::PhasedSystem sys = graph::ring_system(0.6);
  const Eigen::MatrixXd u = graph::classical_operator(sys.structure);
  const double c2 = std::cos(0.6) * std::cos(0.6);
  CHECK(u(0, 0) == Catch::Approx(c2));
  CHECK(u(0, 1) == Catch::Approx(1 - c2));
  for (int n = 1; n <= 8; ++n)
    CHECK(graph::classical_trace(u, n) ==
          Catch::Approx(ring::classical_return_exact(n, 0.6)).margin(1e-12));

  const graph::PhasedSystem k4 = graph::phased_system(graph::complete_graph(4), 2);
  const Eigen::MatrixXd u4 = graph::classical_operator(k4.structure);
  for (int i = 0; i < u4.rows(); ++i) {
    CHECK(u4.row(i).sum() == Catch::Approx(1.0).margin(1e-12));
    CHECK(u4.col(i).sum() == Catch::Approx(1.0).margin(1e-12));
    CHECK(u4(i, i) >= 0.0);
  }
  // the Perron eigenvalue 1 dominates: tr U^n tends to 1 on a connected
  // aperiodic graph
  CHECK(graph::classical_trace(u4, 300) == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("quantum traces") {
  const graph::Graph g = random_graph(77);
  const graph::PhasedSystem sys = graph::phased_system(g, 2);
  const Eigen::MatrixXcd s = sys.scattering(random_phases(sys.free_phases, 78));
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(s, false);
  for (int n = 1; n <= 6; ++n) {
    std::complex<double> from_eigs(0, 0);
    for (int i = 0; i < s.rows(); ++i)
      from_eigs += std::pow(solver.eigenvalues()[i], n);
    CAPTURE(n);
    REQUIRE(std::abs(graph::quantum_trace(s, n) - from_eigs) < 1e-10);
    REQUIRE(std::abs(graph::quantum_trace(s, n)) <= s.rows() + 1e-12);
  }
  // ring cross-check against the family expansion
  const graph::PhasedSystem rs = graph::ring_system(kPi / 4);
  const std::vector<double> phi{1.1, -0.4};
  for (int n = 1; n <= 10; ++n)
    REQUIRE(std::abs(graph::quantum_trace(rs.scattering(phi), n) -
                     ring::trace_from_families(n, phi[0], phi[1])) < 1e-10);
}

TEST_CASE("exact quadrature of the phase average") {
  const graph::PhasedSystem rs = graph::ring_system(kPi / 4);
  for (int n = 1; n <= 10; ++n) {
    CAPTURE(n);
    REQUIRE(graph::quadrature_form_factor(rs, n) ==
            Catch::Approx(qg::to_double(ring::form_factor_exact(n))).margin(1e-10));
  }
  // grid denser than the minimal exact one must not move the value
  CHECK(graph::quadrature_form_factor(rs, 5) ==
        Catch::Approx(graph::quadrature_form_factor(rs, 5, 12)).margin(1e-12));
  CHECK_THROWS_AS(graph::quadrature_form_factor(rs, 5, 3), std::invalid_argument);

  const graph::PhasedSystem sb = graph::phased_system(single_bond(), 1);
  CHECK(sb.free_phases == 1);
  for (int n = 1; n <= 10; ++n) {
    // tr S^n is 2 e^{i n phi} for even n, zero for odd n
    const double expect = (n % 2 == 0) ? 2.0 : 0.0;
    REQUIRE(graph::quadrature_form_factor(sb, n) == Catch::Approx(expect).margin(1e-12));
  }

  CHECK_THROWS_AS(
      graph::quadrature_form_factor(graph::phased_system(graph::complete_graph(4), 2), 3),
      std::invalid_argument);
}

TEST_CASE("monte carlo estimates") {
  const graph::PhasedSystem rs = graph::ring_system(kPi / 4);
  const graph::McEstimate a = graph::mc_form_factor(rs, 2, 20000, 42);
  const graph::McEstimate b = graph::mc_form_factor(rs, 2, 20000, 42);
  CHECK(a.estimate == b.estimate);  // determinism
  CHECK(a.std_error > 0);
  CHECK(std::abs(a.estimate - 0.75) < 4 * a.std_error);
  CHECK(a.estimate >= 0.0);
  CHECK(a.estimate <= rs.dim());
  CHECK_THROWS_AS(graph::mc_form_factor(rs, 2, 50, 42), std::invalid_argument);
  CHECK_THROWS_AS(graph::phased_system(graph::complete_graph(3), 3), std::invalid_argument);

  // eigenvalue path (dim > 4) agrees with the exact quadrature within errors
  const graph::PhasedSystem k4 = graph::phased_system(graph::complete_graph(4), 2);
  const auto sweep = graph::mc_form_factor_sweep(k4, 3, 4000, 9);
  CHECK(sweep[3].estimate >= 0.0);
  CHECK(sweep[3].std_error > 0.0);
}

TEST_CASE("family enumeration on the ring") {
  const graph::PhasedSystem rs = graph::ring_system(kPi / 4);
  const graph::FamilyTable t5 = graph::enumerate_families(rs, 5);
  CHECK(t5.families.size() == 6);
  CHECK(t5.families.at({2, 3}).orbit_count == 10);
  CHECK(t5.families.at({0, 5}).orbit_count == 1);

  const graph::FamilyTable t2 = graph::enumerate_families(rs, 2);
  CHECK(t2.families.at({0, 2}).amplitude.real() == Catch::Approx(0.5));
  CHECK(t2.families.at({1, 1}).amplitude.real() == Catch::Approx(-1.0));
  CHECK(t2.families.at({2, 0}).amplitude.real() == Catch::Approx(0.5));

  for (int n = 1; n <= 8; ++n) {
    CAPTURE(n);
    REQUIRE(graph::famsum_form_factor(graph::enumerate_families(rs, n)) ==
            Catch::Approx(qg::to_double(ring::form_factor_exact(n))).margin(1e-10));
  }
}

TEST_CASE("family enumeration on graphs") {
  // single bond, beta = 1: only even-length bounce walks exist
  const graph::PhasedSystem sb = graph::phased_system(single_bond(), 1);
  const graph::FamilyTable t4 = graph::enumerate_families(sb, 4);
  CHECK(t4.families.size() == 1);
  CHECK(t4.families.at({4}).orbit_count == 2);
  CHECK(graph::famsum_form_factor(t4) == Catch::Approx(2.0));
  CHECK(graph::enumerate_families(sb, 3).families.empty());
  CHECK(graph::famsum_form_factor(graph::enumerate_families(sb, 3)) == 0.0);

  // fully connected on three vertices: no closed 2-walks at all, so both the
  // family sum and the phase average vanish identically
  const graph::Graph k3 = graph::complete_graph(3);
  const graph::FamilyTable empty2 = graph::enumerate_families(graph::phased_system(k3, 2), 2);
  CHECK(empty2.families.empty());
  CHECK(graph::famsum_form_factor(empty2) == 0.0);
  const auto mc2 = graph::mc_form_factor(graph::phased_system(k3, 2), 2, 1000, 3);
  CHECK(mc2.estimate < 1e-20);  // eigenvalue roundoff only

  // deterministic 3-cycles
  const graph::FamilyTable f2 = graph::enumerate_families(graph::phased_system(k3, 2), 3);
  CHECK(f2.families.size() == 2);
  CHECK(graph::famsum_form_factor(f2) == Catch::Approx(3.0));
  const graph::FamilyTable f1 = graph::enumerate_families(graph::phased_system(k3, 1), 3);
  CHECK(f1.families.size() == 1);
  CHECK(graph::famsum_form_factor(f1) == Catch::Approx(6.0));
  // cross-check against Monte Carlo (too many phases for the exact grid)
  const auto mc = graph::mc_form_factor(graph::phased_system(k3, 2), 3, 20000, 5);
  CHECK(std::abs(mc.estimate - 3.0) < 4 * mc.std_error);

  CHECK_THROWS_AS(graph::enumerate_families(graph::phased_system(graph::complete_graph(5), 2), 20),
                  std::length_error);
}

TEST_CASE("family feasibility conditions") {
  const graph::Graph sb = single_bond();
  CHECK_FALSE(graph::family_feasibility(sb, {1, 0}, 2));
  CHECK(graph::family_feasibility(sb, {2, 2}, 2));
  CHECK_THROWS_AS(graph::family_feasibility(sb, {1, 0, 0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(graph::family_feasibility(sb, {1, 0}, 3), std::invalid_argument);

  // every enumerated family is feasible; on the path graph with Neumann
  // conditions the valency-2 vertices are transparent, so the shortest
  // closed walks are the full round trips of length 6
  const graph::Graph p4 = path4();
  for (const int beta : {1, 2}) {
    const graph::FamilyTable t = graph::enumerate_families(graph::phased_system(p4, beta), 6);
    CHECK_FALSE(t.families.empty());
    for (const auto& [key, entry] : t.families) REQUIRE(graph::family_feasibility(p4, key, beta));
  }

  // disconnected support: passes the balance conditions yet no single closed
  // walk realises it (composite key on the two end bonds of the path)
  const std::vector<int> composite_b1{2, 0, 4};
  CHECK(graph::family_feasibility(p4, composite_b1, 1));
  const graph::FamilyTable t1 = graph::enumerate_families(graph::phased_system(p4, 1), 6);
  CHECK(t1.families.find(composite_b1) == t1.families.end());
  const std::vector<int> composite_b2{1, 0, 2, 1, 0, 2};
  CHECK(graph::family_feasibility(p4, composite_b2, 2));
  const graph::FamilyTable t2 = graph::enumerate_families(graph::phased_system(p4, 2), 6);
  CHECK(t2.families.find(composite_b2) == t2.families.end());
}

TEST_CASE("random matrix reference curves") {
  CHECK(graph::rmt_reference(1.5, 2) == 1.0);
  CHECK(graph::rmt_reference(0.5, 2) == 0.5);
  CHECK(graph::rmt_reference(1e-9, 1) < 1e-8);
  const double below = graph::rmt_reference(1.0, 1);
  CHECK(below == Catch::Approx(2.0 - std::log(3.0)));
  CHECK(graph::rmt_reference(1.0 + 1e-12, 1) == Catch::Approx(below).margin(1e-9));
  CHECK(graph::rmt_reference(2.0, 1) == Catch::Approx(2.0 - 2.0 * std::log(5.0 / 3.0)));
  CHECK_THROWS_AS(graph::rmt_reference(0.5, 3), std::invalid_argument);
  CHECK_THROWS_AS(graph::rmt_reference(-0.1, 2), std::invalid_argument);
}
