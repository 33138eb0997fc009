#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "hybridgrid/matrixops.hpp"

using namespace hybridgrid;
using namespace hybridgrid::testing;

TEST_CASE("assemble: two buses, one line") {
    NetworkModel m;
    m.buses = {make_bus(1, BusKind::AcSlack), make_bus(2, BusKind::AcPQ)};
    m.branches.push_back(make_line(1, 2, Complex{0.0, -5.0}));
    auto y = assemble_ybus(m);
    CHECK(y.at(1, 1) == Complex{0.0, -5.0});
    CHECK(y.at(2, 2) == Complex{0.0, -5.0});
    CHECK(y.at(1, 2) == Complex{0.0, 5.0});
    CHECK(y.at(2, 1) == Complex{0.0, 5.0});
}

TEST_CASE("assemble: line plus shift transformer sums stamps") {
    NetworkModel m;
    m.buses = {make_bus(1, BusKind::AcSlack), make_bus(2, BusKind::AcPQ)};
    m.branches.push_back(make_line(1, 2, Complex{0.0, -5.0}));
    Branch t;
    t.kind = BranchKind::ShiftTransformer;
    t.from = 1;
    t.to = 2;
    t.series_admittance = Complex{1.0, 0.0};
    t.ratio = std::polar(1.0, deg2rad(30.0));
    m.branches.push_back(t);

    auto y = assemble_ybus(m);
    Complex expect01 = Complex{0.0, 5.0} - std::polar(1.0, deg2rad(-30.0));
    Complex expect10 = Complex{0.0, 5.0} - std::polar(1.0, deg2rad(30.0));
    CHECK(std::abs(y.at(1, 2) - expect01) < 1e-14);
    CHECK(std::abs(y.at(2, 1) - expect10) < 1e-14);
    CHECK(std::abs(y.at(1, 1) - Complex{1.0, -5.0}) < 1e-14);
}

TEST_CASE("assemble: converter coupling carries the case-study magnitudes") {
    NetworkModel m;
    m.buses = {make_bus(1, BusKind::AcSlack), make_bus(2, BusKind::CouplingAcSide),
               make_bus(3, BusKind::ReflectedDc)};
    m.branches.push_back(make_line(1, 2, Complex{2.0, -10.0}));
    m.branches.push_back(make_shunt(3, Complex{0.0, -1.0}));
    attach_converter(m, make_converter(2, 3, 0.1508, 29.0));

    auto y = assemble_ybus(m);
    CHECK(std::abs(y.at(2, 3)) == doctest::Approx(6.6313).epsilon(1e-3));
    CHECK(std::abs(y.at(3, 2)) == doctest::Approx(3.215).epsilon(1e-3));
}

TEST_CASE("assembly is order independent") {
    std::mt19937 rng(3);
    NetworkModel m = random_hybrid_network(rng);
    auto reference = assemble_ybus(m).dense();

    std::mt19937 shuffle_rng(99);
    const double scale = reference.cwiseAbs().maxCoeff();
    for (int trial = 0; trial < 5; ++trial) {
        NetworkModel p = m;
        std::shuffle(p.branches.begin(), p.branches.end(), shuffle_rng);
        // Summation order may differ, so allow rounding at the last few bits.
        CHECK((assemble_ybus(p).dense() - reference).cwiseAbs().maxCoeff() < 1e-13 * scale);
    }
}

TEST_CASE("assembly without transformers or converters is symmetric") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        NetworkModel m = random_ac_network(rng, 12);
        auto y = assemble_ybus(m).dense();
        CHECK((y - y.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("assembly rejects a floating bus") {
    NetworkModel m;
    m.buses = {make_bus(1, BusKind::AcSlack), make_bus(2, BusKind::AcPQ),
               make_bus(3, BusKind::AcPQ)};
    m.branches.push_back(make_line(1, 2, Complex{1.0, -5.0}));
    CHECK_THROWS_WITH_AS(assemble_ybus(m), doctest::Contains("floating bus 3"), ModelError);
}

TEST_CASE("thevenin: scalar reciprocal") {
    NetworkModel m;
    m.buses = {make_bus(1, BusKind::AcSlack)};
    m.branches.push_back(make_shunt(1, Complex{0.0, -1.0}));
    auto tv = thevenin(assemble_ybus(m), 1);
    CHECK(std::abs(tv.z_kk - Complex{0.0, 1.0}) < 1e-14);
}

TEST_CASE("thevenin: 2x2 adjugate check") {
    NetworkModel m;
    m.buses = {make_bus(1, BusKind::AcSlack), make_bus(2, BusKind::AcPQ)};
    m.branches.push_back(make_line(1, 2, Complex{0.0, -1.0}));
    m.branches.push_back(make_shunt(1, Complex{0.0, -1.0}));
    m.branches.push_back(make_shunt(2, Complex{0.0, -1.0}));
    // Y = [[-2j, j], [j, -2j]], inverse = [[2j/3, j/3], [j/3, 2j/3]].
    auto y = assemble_ybus(m);
    auto tv1 = thevenin(y, 1);
    CHECK(std::abs(tv1.z_kk - Complex{0.0, 2.0 / 3.0}) < 1e-12);
    CHECK(std::abs(tv1.column(1) - Complex{0.0, 1.0 / 3.0}) < 1e-12);
}

TEST_CASE("solve_linear residual bound on random systems") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        std::uniform_int_distribution<int> size(2, 50);
        NetworkModel m = random_ac_network(rng, size(rng));
        auto y = assemble_ybus(m);
        Eigen::VectorXcd rhs(y.order());
        std::uniform_real_distribution<double> val(-1.0, 1.0);
        for (int i = 0; i < y.order(); ++i) rhs(i) = Complex{val(rng), val(rng)};

        Eigen::VectorXcd x = solve_linear(y, rhs);
        double residual = (y.dense() * x - rhs).cwiseAbs().maxCoeff();
        CHECK(residual < 1e-10 * rhs.cwiseAbs().maxCoeff());
    }

    NetworkModel tiny;
    tiny.buses = {make_bus(1, BusKind::AcSlack)};
    tiny.branches.push_back(make_shunt(1, Complex{2.0, 0.0}));
    auto y = assemble_ybus(tiny);
    Eigen::VectorXcd e0 = Eigen::VectorXcd::Ones(1);
    CHECK(std::abs(solve_linear(y, e0)(0) - Complex{0.5, 0.0}) < 1e-15);
    Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(1);
    CHECK(std::abs(solve_linear(y, zero)(0)) == 0.0);
}

TEST_CASE("impedance columns invert the admittance matrix") {
    std::mt19937 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> size(2, 50);
        NetworkModel m = random_ac_network(rng, size(rng));
        auto y = assemble_ybus(m);
        YbusSolver solver(y);
        Eigen::MatrixXcd z(y.order(), y.order());
        for (int k = 0; k < y.order(); ++k) z.col(k) = solver.thevenin(y.bus_at(k)).column;
        double err = (y.dense() * z - Eigen::MatrixXcd::Identity(y.order(), y.order()))
                         .cwiseAbs()
                         .maxCoeff();
        CHECK(err < 1e-9);
    }
}

TEST_CASE("repeated thevenin calls are bitwise identical") {
    std::mt19937 rng(61);
    NetworkModel m = random_ac_network(rng, 15);
    YbusSolver solver(assemble_ybus(m));
    auto a = solver.thevenin(7);
    auto b = solver.thevenin(7);
    CHECK(a.z_kk == b.z_kk);
    CHECK(a.column == b.column);
}

TEST_CASE("singular matrix names the pivot bus") {
    NetworkModel m;
    m.buses = {make_bus(1, BusKind::AcSlack), make_bus(2, BusKind::AcPQ)};
    // Ungrounded two-bus network: the Laplacian is singular.
    m.branches.push_back(make_line(1, 2, Complex{1.0, -5.0}));
    auto y = assemble_ybus(m);
    CHECK_THROWS_AS(YbusSolver{y}, SingularMatrixError);
}
