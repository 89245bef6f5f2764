#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rlcsim/statespace.hpp"
#include "support/circuits.hpp"

using namespace rlcsim;
using Catch::Approx;

namespace {
const PhysicalConstants kNat = PhysicalConstants::natural();
}

TEST_CASE("fig. 3 assembly reproduces the printed matrices") {
    auto m = build_model(testing::fig3_spec({.R1 = 2.0, .R2 = 4.0}), kNat);
    REQUIRE(m.n_C == 2);
    REQUIRE(m.n_L == 1);
    REQUIRE(m.n_Rl == 2);
    REQUIRE(m.n_Rt == 0);

    Eigen::MatrixXd mc(3, 3);
    mc << 0, 0, 1, 0, 0, 1, -1, -1, 0;
    CHECK(m.Mc.isApprox(mc, 0.0));
    Eigen::MatrixXd md(2, 3);
    md << -1, 0, 0, 0, -1, 0;
    CHECK(m.Md.isApprox(md, 0.0));
    Eigen::MatrixXd a(3, 3);
    a << -0.5, 0, 1, 0, -0.25, 1, -1, -1, 0;
    CHECK(m.A.isApprox(a, 1e-15));
    CHECK(m.alpha.isApprox(Eigen::Vector2d(0.5, 0.25).asDiagonal().toDenseMatrix(), 1e-15));

    // D_1 = diag(1/R1,0,0), D_2 = diag(0,1/R2,0)
    Eigen::MatrixXd d1 = m.noise_cols.col(0) * m.noise_cols.col(0).transpose();
    Eigen::MatrixXd d2 = m.noise_cols.col(1) * m.noise_cols.col(1).transpose();
    CHECK(d1.isApprox(Eigen::Vector3d(0.5, 0, 0).asDiagonal().toDenseMatrix(), 1e-15));
    CHECK(d2.isApprox(Eigen::Vector3d(0, 0.25, 0).asDiagonal().toDenseMatrix(), 1e-15));
}

TEST_CASE("a circuit without resistors has A = Mc and zero diffusion") {
    auto m = build_model(parse_netlist("V1 1 0 V=1\nC1 1 2 C=1\nL1 2 0 L=1\n"), kNat);
    CHECK(m.A.isApprox(m.Mc, 0.0));
    CHECK(m.diffusion.isZero());
}

TEST_CASE("structural identities hold on random circuits") {
    std::mt19937_64 rng(314159);
    for (int i = 0; i < 100; ++i) {
        auto spec = testing::random_circuit(rng);
        auto m = build_model(spec, kNat);  // assemble() itself enforces 1e-12
        const Eigen::MatrixXd alpha_s = 0.5 * (m.alpha + m.alpha.transpose());
        const Eigen::MatrixXd lhs = m.alpha * m.Rdiag.asDiagonal() * m.alpha.transpose();
        REQUIRE((lhs - alpha_s).cwiseAbs().maxCoeff() <=
                1e-12 * std::max(1.0, alpha_s.cwiseAbs().maxCoeff()));
        Eigen::MatrixXd dsum = Eigen::MatrixXd::Zero(m.n(), m.n());
        for (int r = 0; r < m.n_R; ++r)
            dsum += m.noise_cols.col(r) * m.noise_cols.col(r).transpose();
        REQUIRE((dsum + 0.5 * (m.A + m.A.transpose())).cwiseAbs().maxCoeff() <=
                1e-12 * std::max(1.0, m.A.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("alpha^T Pi_r R alpha is diagonal whenever Q_RR = 0") {
    std::mt19937_64 rng(2718);
    int tested = 0;
    while (tested < 40) {
        auto spec = testing::random_circuit(rng);
        auto topo = analyze_topology(spec);
        if (!topo.thermo.consistent()) continue;
        auto m = assemble(spec, topo, kNat);
        for (int r = 0; r < m.n_R; ++r) {
            Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(m.n_R, m.n_R);
            pi(r, r) = 1.0;
            Eigen::MatrixXd blk =
                m.alpha.transpose() * pi * m.Rdiag.asDiagonal().toDenseMatrix() * m.alpha;
            REQUIRE((blk - Eigen::MatrixXd(blk.diagonal().asDiagonal())).cwiseAbs().maxCoeff() <=
                    1e-14 * std::max(1.0, blk.cwiseAbs().maxCoeff()));
        }
        ++tested;
    }
}

TEST_CASE("hamiltonian of the driven fig. 3 circuit") {
    testing::Fig3Params p;
    p.dC = 0.5;
    p.theta = M_PI / 2;
    p.wd = 2.0;
    auto m = build_model(testing::fig3_spec(p), kNat);
    const double t = 0.37;
    const double c1 = 1.0 + 0.5 * std::cos(2.0 * t);
    const double c2 = 1.0 + 0.5 * std::cos(2.0 * t + M_PI / 2);
    auto h = m.hamiltonian_at(t);
    CHECK(h(0, 0) == Approx(1.0 / c1).epsilon(1e-14));
    CHECK(h(1, 1) == Approx(1.0 / c2).epsilon(1e-14));
    CHECK(h(2, 2) == Approx(1.0).epsilon(1e-14));
    CHECK(h(0, 1) == 0.0);

    // Analytic dH/dt against central differences.
    const double eps = 1e-6;
    auto hdot = m.hamiltonian_dot_at(t);
    auto fd = ((m.hamiltonian_at(t + eps) - m.hamiltonian_at(t - eps)) / (2 * eps)).eval();
    CHECK((hdot - fd).cwiseAbs().maxCoeff() < 1e-7);

    SECTION("undriven model returns a constant hamiltonian and zero derivative") {
        auto m0 = build_model(testing::fig3_spec({}), kNat);
        CHECK(m0.hamiltonian_at(0.0).isApprox(m0.hamiltonian_at(17.3), 0.0));
        CHECK(m0.hamiltonian_dot_at(5.0).isZero());
    }

    SECTION("positivity guard") {
        auto bad = m;
        bad.cap_drive[0]->harmonics[0].amplitude = 1.5;  // C1(t) dips below zero
        CHECK_THROWS_AS(bad.hamiltonian_at(M_PI / 2.0), ModelError);
    }
}

TEST_CASE("energy") {
    auto m = build_model(parse_netlist("C1 1 0 C=1\nR1 1 0 R=1 T=300\n"), kNat);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    CHECK(m.energy(zero, 0.0) == 0.0);
    Eigen::VectorXd q1 = Eigen::VectorXd::Ones(1);
    CHECK(m.energy(q1, 0.0) == Approx(0.5));

    std::mt19937_64 rng(5);
    auto spec = testing::random_circuit(rng);
    auto m2 = build_model(spec, kNat);
    Eigen::VectorXd x = Eigen::VectorXd::Random(m2.n());
    const Eigen::VectorXd q = x.head(m2.n_C), phi = x.tail(m2.n_L);
    double expected = 0.0;
    for (int i = 0; i < m2.n_C; ++i) expected += 0.5 * q(i) * q(i) / m2.cap_base(i);
    if (m2.n_L > 0)
        expected += 0.5 * phi.dot(m2.ind_base.llt().solve(phi));
    CHECK(m2.energy(x, 0.0) == Approx(expected).epsilon(1e-12));
}

TEST_CASE("resistor port solve") {
    SECTION("zero state and sources give a zero port vector") {
        auto m = build_model(testing::fig3_spec({}), kNat);
        Eigen::VectorXd port = resistor_port_solve(m, Eigen::VectorXd::Zero(3), 0.0);
        CHECK(port.isZero());
    }
    SECTION("fig. 3: link resistor currents are q_i/(R_i C_i)") {
        auto m = build_model(testing::fig3_spec({.R1 = 2.0, .R2 = 5.0, .C = 0.5}), kNat);
        Eigen::VectorXd x(3);
        x << 0.3, -0.7, 0.2;
        Eigen::VectorXd port = resistor_port_solve(m, x, 0.0);
        REQUIRE(port.size() == 2);
        CHECK(port(0) == Approx(0.3 / (2.0 * 0.5)).epsilon(1e-14));
        CHECK(port(1) == Approx(-0.7 / (5.0 * 0.5)).epsilon(1e-14));
    }
    SECTION("voltage source across a resistor obeys Ohm's law") {
        auto m = build_model(parse_netlist("V1 1 0 V=3\nR1 1 0 R=2 T=300\n"), kNat);
        REQUIRE(m.n() == 0);
        Eigen::VectorXd port = resistor_port_solve(m, Eigen::VectorXd(), 0.0);
        REQUIRE(port.size() == 1);
        CHECK(std::abs(port(0)) == Approx(1.5).epsilon(1e-14));
    }
}

TEST_CASE("tree choice does not affect the physics") {
    // Same circuit, two elements swapped in file order: the tie-break picks a
    // different normal tree (R3 vs R4 as twig), the dynamics must not change.
    auto spec_a = parse_netlist(testing::fig1_netlist());
    std::string swapped = testing::fig1_netlist();
    auto pos4 = swapped.find("R4 1 0 R=1.0 T=310\n");
    auto pos3 = swapped.find("R3 1 5 R=1.0 T=280\n");
    REQUIRE(pos4 < pos3);
    std::string line4 = swapped.substr(pos4, 19);
    swapped.erase(pos4, 19);
    swapped.insert(swapped.find("L1"), line4);
    auto spec_b = parse_netlist(swapped);

    auto ta = analyze_topology(spec_a);
    auto tb = analyze_topology(spec_b);
    auto twig_names = [](const Topology& t) {
        std::vector<std::string> names;
        for (int e : t.tree.twigs) names.push_back(t.graph.edges[e].name);
        return names;
    };
    CHECK(twig_names(ta) != twig_names(tb));  // genuinely different trees

    auto ma = assemble(spec_a, ta, kNat);
    auto mb = assemble(spec_b, tb, kNat);
    const Eigen::MatrixXd ah_a = ma.A * ma.hamiltonian_at(0.0);
    const Eigen::MatrixXd ah_b = mb.A * mb.hamiltonian_at(0.0);
    CHECK((ah_a - ah_b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((ma.diffusion - mb.diffusion).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mutual inductance enters the inductance matrix") {
    auto spec = parse_netlist(
        "V1 1 0 V=1\n"
        "R1 1 2 R=1 T=300\n"
        "L1 2 0 L=2\n"
        "L2 3 0 L=3\n"
        "R2 3 0 R=2 T=300\n"
        "R3 1 3 R=5 T=400\n"
        "K K1 L1 L2 M=1.5\n");
    auto m = build_model(spec, kNat);
    REQUIRE(m.n_L == 2);
    Eigen::MatrixXd l(2, 2);
    l << 2, 1.5, 1.5, 3;
    CHECK(m.ind_base.isApprox(l, 0.0));
    CHECK(m.hamiltonian_at(0.0).bottomRightCorner(2, 2).isApprox(
        l.inverse(), 1e-12));
}
