#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "hybridgrid/netmodel.hpp"

namespace hybridgrid {

// A dc quantity carried into the phasor domain. Voltages share one common
// angle theta per dc zone, currents one common angle gamma.
struct ReflectedPhasor {
    double magnitude = 0.0;  // pu
    double angle = 0.0;      // rad

    Complex value() const { return std::polar(magnitude, angle); }
};

// V = alpha * v_dc at the common angle, alpha = 0.612 * Ma.
ReflectedPhasor reflect_dc_voltage(double v_dc, double Ma, double theta);

// I = beta * i_dc at the common angle, beta = 1 / alpha.
ReflectedPhasor reflect_dc_current(double i_dc, double Ma, double gamma);

// 2x2 admittance block of an ideal phase-shift transformer with series
// admittance y and complex ratio a = |a| angle theta_a:
//   [[ y, -y/a ], [ -y/a*, y/|a|^2 ]]
Eigen::Matrix2cd stamp_shift_transformer(Complex y, Complex a);

// Per-converter transformer angles that bring every reflected voltage to the
// common angle: theta_a,k = theta_k - common_theta.
std::vector<double> solve_shift_angles(const std::vector<double>& converter_ac_angles,
                                       double common_theta);

// Block partition of a dc zone's admittance: boundary buses (converter
// connected) first, interior buses second. Interior injections are zero.
struct DcPartition {
    Eigen::MatrixXcd boundary_self;      // Y1, m x m
    Eigen::MatrixXcd boundary_interior;  // Y2, m x (n-m)
    Eigen::MatrixXcd interior_boundary;  // Y3, (n-m) x m
    Eigen::MatrixXcd interior_self;      // Y4, (n-m) x (n-m)
    Eigen::VectorXcd boundary_voltages;  // V1
};

// V2 = -Y4^{-1} Y3 V1. Throws ModelError naming the floating interior row
// when Y4 is singular.
Eigen::VectorXcd eliminate_dc_interior(const DcPartition& p);

// Each dc zone must carry at least one shunt element so reactive current has
// a path in the reflected network. Returns one diagnostic per violating zone.
std::vector<Diagnostic> validate_reactive_element(const NetworkModel& m);

}  // namespace hybridgrid
