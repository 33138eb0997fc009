#pragma once

#include <Eigen/Dense>
#include <array>

#include "hybridgrid/netmodel.hpp"

namespace hybridgrid {

class SingularAngleError : public ModelError {
  public:
    explicit SingularAngleError(const std::string& what) : ModelError(what) {}
};

// Split of the converter current across the coupling reactance: a real part
// carrying the dc power and a reactive part.
struct CurrentSplit {
    double i_dc = 0.0;
    double i_c = 0.0;
};

// I1 = (V1 angle delta - V2) / jX, split into I_dc = V1 sin(delta)/X and
// I_c = -(V1 cos(delta) - V2)/X. Magnitudes only; both components are real.
CurrentSplit converter_node_current(double v1, double v2, double X, double delta);

// Impedance-form source matrix mapping [I1, I_dc] to [V1, V2]:
//   [[ 0, (X angle delta)/sin(delta) ], [ X/j, X/tan(delta) - X/j ]]
// Throws SingularAngleError when |sin(delta)| < 1e-9.
Eigen::Matrix2cd build_b_matrix(double X, double delta);

// The 2x2 admittance-like coupling block between a converter's real ac node
// and its reflected dc node: the inverse of the source matrix.
struct BbBlock {
    Eigen::Matrix2cd matrix;  // B^{-1}, the stampable block
    Eigen::Matrix2cd source;  // B, kept so the inversion can be asserted
    double reactance = 0.0;
    double delta = 0.0;
};

BbBlock build_bb_block(double X, double delta);

BbBlock build_bb_block(const ConverterCoupling& c);

struct StampEntry {
    int row_bus = 0;
    int col_bus = 0;
    Complex value{0.0, 0.0};
};

// Addresses the four block entries to (ac_bus, reflected_bus) positions.
// The two buses must be distinct.
std::array<StampEntry, 4> stamp_bb(const BbBlock& block, int ac_bus, int reflected_bus);

}  // namespace hybridgrid
