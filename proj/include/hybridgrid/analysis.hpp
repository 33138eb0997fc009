#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "hybridgrid/matrixops.hpp"
#include "hybridgrid/netmodel.hpp"

namespace hybridgrid {

enum class PrefaultProfile {
    Flat,    // 1 angle 0 everywhere, loads and shunt capacitors dropped
    Solved,  // power-flow solution as the pre-fault state
};

struct FaultResult {
    int bus = 0;
    Complex z_kk{0.0, 0.0};
    Complex fault_current_pu{0.0, 0.0};
    std::optional<double> fault_current_a;       // only with an explicit current base
    Eigen::VectorXcd post_fault_voltages;        // aligned with model bus order
};

struct PowerFlowResult {
    Eigen::VectorXcd voltages;  // aligned with model bus order
    int iterations = 0;
    double final_mismatch = 0.0;
    std::vector<double> mismatch_trace;  // max mismatch per iteration
    bool converged = false;
};

class ConvergenceError : public ModelError {
  public:
    ConvergenceError(const std::string& what, PowerFlowResult partial)
        : ModelError(what), partial_(std::move(partial)) {}
    const PowerFlowResult& partial() const { return partial_; }

  private:
    PowerFlowResult partial_;
};

FaultResult symmetrical_fault(const NetworkModel& m, int bus_id,
                              PrefaultProfile prefault = PrefaultProfile::Flat);

// One shared factorization across all buses; entries match per-bus calls
// bitwise.
std::vector<FaultResult> fault_sweep(const NetworkModel& m,
                                     PrefaultProfile prefault = PrefaultProfile::Flat);

// Polar-form Newton-Raphson on the unified admittance matrix. Reflected-dc
// and dc-load buses are held at zero reactive injection; dc sources behave
// like PV buses.
PowerFlowResult newton_raphson_powerflow(const NetworkModel& m, double tol = 1e-8,
                                         int max_iter = 50);

namespace detail {
// Same solver without the single-slack restriction; any number of fixed
// voltage sources is allowed. The sequential oracle leans on this.
PowerFlowResult nr_core(const NetworkModel& m, double tol, int max_iter);
}  // namespace detail

// Active-power loss summed branch by branch from the solved voltages.
double total_branch_losses(const NetworkModel& m, const Eigen::VectorXcd& voltages);

// Complex injection at every bus implied by the solved voltages.
Eigen::VectorXcd bus_injections(const NetworkModel& m, const Eigen::VectorXcd& voltages);

}  // namespace hybridgrid
