#include "hybridgrid/reflect.hpp"

#include <algorithm>
#include <cmath>

#include "hybridgrid/matrixops.hpp"

namespace hybridgrid {

namespace {

void check_modulation(double Ma) {
    if (Ma <= 0.0 || Ma > 1.0)
        throw ModelError("modulation factor must lie in (0, 1], got " + std::to_string(Ma));
}

}  // namespace

ReflectedPhasor reflect_dc_voltage(double v_dc, double Ma, double theta) {
    check_modulation(Ma);
    if (v_dc < 0.0) throw ModelError("dc voltage must be non-negative");
    return {kAlphaPerModulation * Ma * v_dc, theta};
}

ReflectedPhasor reflect_dc_current(double i_dc, double Ma, double gamma) {
    check_modulation(Ma);
    return {i_dc / (kAlphaPerModulation * Ma), gamma};
}

Eigen::Matrix2cd stamp_shift_transformer(Complex y, Complex a) {
    if (y == Complex{0.0, 0.0}) throw ModelError("transformer series admittance is zero");
    if (a == Complex{0.0, 0.0}) throw ModelError("transformer ratio is zero");
    Eigen::Matrix2cd block;
    block << y, -y / a,
             -y / std::conj(a), y / std::norm(a);
    return block;
}

std::vector<double> solve_shift_angles(const std::vector<double>& converter_ac_angles,
                                       double common_theta) {
    std::vector<double> out;
    out.reserve(converter_ac_angles.size());
    for (double theta_k : converter_ac_angles) out.push_back(theta_k - common_theta);
    return out;
}

Eigen::VectorXcd eliminate_dc_interior(const DcPartition& p) {
    const auto interior = p.interior_self.rows();
    if (interior == 0) return Eigen::VectorXcd(0);
    if (p.interior_self.cols() != interior || p.interior_boundary.rows() != interior ||
        p.interior_boundary.cols() != p.boundary_voltages.size())
        throw ModelError("inconsistent dc partition dimensions");

    DenseLu<Complex> lu = [&] {
        try {
            return DenseLu<Complex>::compute(p.interior_self);
        } catch (const SingularMatrixError& e) {
            throw ModelError("floating dc interior bus at partition row " +
                             std::to_string(e.pivot_row()));
        }
    }();
    return -lu.solve(p.interior_boundary * p.boundary_voltages);
}

std::vector<Diagnostic> validate_reactive_element(const NetworkModel& m) {
    std::vector<Diagnostic> out;
    for (const auto& zone : m.dc_zones()) {
        bool has_shunt = std::any_of(m.branches.begin(), m.branches.end(), [&](const Branch& b) {
            return b.kind == BranchKind::Shunt &&
                   std::find(zone.begin(), zone.end(), b.from) != zone.end();
        });
        if (!has_shunt)
            out.push_back({"missing-reactive-element",
                           "dc zone at bus " + std::to_string(zone.front()) +
                               " needs at least one shunt impedance for reactive flow"});
    }
    return out;
}

}  // namespace hybridgrid
