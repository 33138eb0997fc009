#include "hybridgrid/coupling.hpp"

#include <cmath>

namespace hybridgrid {

namespace {

constexpr double kSingularSin = 1e-9;
constexpr Complex kImagUnit{0.0, 1.0};

void check_reactance(double X) {
    if (X <= 0.0) throw ModelError("coupling reactance must be positive");
}

}  // namespace

CurrentSplit converter_node_current(double v1, double v2, double X, double delta) {
    check_reactance(X);
    double i_dc = v1 * std::sin(delta) / X;
    double i_c = -(v1 * std::cos(delta) - v2) / X;
    return {i_dc, i_c};
}

Eigen::Matrix2cd build_b_matrix(double X, double delta) {
    check_reactance(X);
    double s = std::sin(delta);
    if (std::abs(s) < kSingularSin)
        throw SingularAngleError("coupling block singular: sin(delta) = " + std::to_string(s));
    Eigen::Matrix2cd b;
    b << Complex{0.0, 0.0}, std::polar(X / s, delta),
         X / kImagUnit, X * std::cos(delta) / s - X / kImagUnit;
    return b;
}

BbBlock build_bb_block(double X, double delta) {
    Eigen::Matrix2cd source = build_b_matrix(X, delta);
    // source has the form [[0, b], [c, d]]; adjugate inversion.
    const Complex b = source(0, 1), c = source(1, 0), d = source(1, 1);
    Eigen::Matrix2cd inv;
    inv << -d / (b * c), 1.0 / c,
           1.0 / b, Complex{0.0, 0.0};
    return {inv, source, X, delta};
}

BbBlock build_bb_block(const ConverterCoupling& cv) {
    return build_bb_block(cv.reactance, cv.delta);
}

std::array<StampEntry, 4> stamp_bb(const BbBlock& block, int ac_bus, int reflected_bus) {
    if (ac_bus == reflected_bus) throw ModelError("coupling stamp: distinct buses required");
    // Row 0 of the block is the current drawn from the ac bus; row 1 is the
    // current the converter delivers into the reflected bus. In the nodal
    // convention (bus-leaving currents) the delivered row enters negated,
    // which is also what keeps the block's active power balanced.
    return {{{ac_bus, ac_bus, block.matrix(0, 0)},
             {ac_bus, reflected_bus, block.matrix(0, 1)},
             {reflected_bus, ac_bus, -block.matrix(1, 0)},
             {reflected_bus, reflected_bus, -block.matrix(1, 1)}}};
}

}  // namespace hybridgrid
