#include "hybridgrid/analysis.hpp"

#include <cmath>

#include "hybridgrid/coupling.hpp"
#include "hybridgrid/reflect.hpp"

namespace hybridgrid {

namespace {

bool magnitude_fixed(BusKind k) {
    return k == BusKind::AcSlack || k == BusKind::AcPV || k == BusKind::DcSource;
}

bool has_reactive_equation(BusKind k) {
    // Q is specified at PQ-style buses; dc-side buses specify it as zero.
    return k == BusKind::AcPQ || k == BusKind::CouplingAcSide || k == BusKind::DcLoad ||
           k == BusKind::ReflectedDc;
}

FaultResult fault_at(const NetworkModel& m, const YbusSolver& solver,
                     const Eigen::VectorXcd& v_pre, int bus_id) {
    TheveninView tv = solver.thevenin(bus_id);
    const int k = solver.matrix().row_of(bus_id);
    Complex i_f = v_pre(k) / tv.z_kk;
    FaultResult r;
    r.bus = bus_id;
    r.z_kk = tv.z_kk;
    r.fault_current_pu = i_f;
    r.post_fault_voltages = v_pre - tv.column * i_f;
    if (m.bases.current_a) r.fault_current_a = std::abs(i_f) * *m.bases.current_a;
    return r;
}

struct FaultContext {
    YbusSolver solver;
    Eigen::VectorXcd v_pre;
};

FaultContext make_fault_context(const NetworkModel& m, PrefaultProfile prefault) {
    if (m.buses.empty()) throw ModelError("empty network");
    if (prefault == PrefaultProfile::Flat) {
        AssemblyOptions opts;
        opts.drop_capacitive_shunts = true;
        YbusSolver solver(assemble_ybus(m, opts));
        Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(m.bus_count());
        return {std::move(solver), std::move(ones)};
    }
    PowerFlowResult pf = newton_raphson_powerflow(m);
    YbusSolver solver(assemble_ybus(m));
    return {std::move(solver), pf.voltages};
}

}  // namespace

FaultResult symmetrical_fault(const NetworkModel& m, int bus_id, PrefaultProfile prefault) {
    FaultContext ctx = make_fault_context(m, prefault);
    return fault_at(m, ctx.solver, ctx.v_pre, bus_id);
}

std::vector<FaultResult> fault_sweep(const NetworkModel& m, PrefaultProfile prefault) {
    FaultContext ctx = make_fault_context(m, prefault);
    std::vector<FaultResult> out;
    out.reserve(m.buses.size());
    for (const auto& b : m.buses) out.push_back(fault_at(m, ctx.solver, ctx.v_pre, b.id));
    return out;
}

PowerFlowResult newton_raphson_powerflow(const NetworkModel& m, double tol, int max_iter) {
    int slack_count = 0;
    for (const auto& b : m.buses)
        if (b.kind == BusKind::AcSlack) ++slack_count;
    if (slack_count != 1)
        throw ModelError("power flow requires exactly one slack bus, found " +
                         std::to_string(slack_count));
    return detail::nr_core(m, tol, max_iter);
}

PowerFlowResult detail::nr_core(const NetworkModel& m, double tol, int max_iter) {
    if (tol <= 0.0) throw ModelError("tolerance must be positive");
    if (!m.has_slack()) throw ModelError("power flow requires a slack bus");

    const int n = m.bus_count();
    Eigen::MatrixXcd y = assemble_ybus(m).dense();

    // Variable layout: angles for every non-slack bus, then magnitudes for
    // every magnitude-free bus. Equations mirror it: dP then dQ.
    std::vector<int> angle_var(n, -1), mag_var(n, -1);
    int nv = 0;
    for (int i = 0; i < n; ++i)
        if (m.buses[i].kind != BusKind::AcSlack) angle_var[i] = nv++;
    for (int i = 0; i < n; ++i)
        if (!magnitude_fixed(m.buses[i].kind)) mag_var[i] = nv++;

    Eigen::VectorXd vm(n), va = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        vm(i) = magnitude_fixed(m.buses[i].kind) ? m.buses[i].voltage_setpoint : 1.0;
        if (m.buses[i].kind == BusKind::AcSlack) va(i) = m.buses[i].angle_setpoint;
    }

    auto injections = [&](Eigen::VectorXd& p, Eigen::VectorXd& q) {
        for (int i = 0; i < n; ++i) {
            Complex acc{0.0, 0.0};
            for (int k = 0; k < n; ++k)
                acc += y(i, k) * std::polar(vm(k), va(k));
            Complex s = std::polar(vm(i), va(i)) * std::conj(acc);
            p(i) = s.real();
            q(i) = s.imag();
        }
    };

    PowerFlowResult result;
    Eigen::VectorXd p(n), q(n);
    for (int iter = 0; iter <= max_iter; ++iter) {
        injections(p, q);

        Eigen::VectorXd mismatch = Eigen::VectorXd::Zero(nv);
        double max_mismatch = 0.0;
        for (int i = 0; i < n; ++i) {
            if (angle_var[i] >= 0) {
                double dp = m.buses[i].p_injection - p(i);
                mismatch(angle_var[i]) = dp;
                max_mismatch = std::max(max_mismatch, std::abs(dp));
            }
            if (mag_var[i] >= 0 && has_reactive_equation(m.buses[i].kind)) {
                double q_spec = is_dc_kind(m.buses[i].kind) ? 0.0 : m.buses[i].q_injection;
                double dq = q_spec - q(i);
                mismatch(mag_var[i]) = dq;
                max_mismatch = std::max(max_mismatch, std::abs(dq));
            }
        }
        result.mismatch_trace.push_back(max_mismatch);
        result.final_mismatch = max_mismatch;
        result.iterations = iter;
        if (max_mismatch < tol) {
            result.converged = true;
            break;
        }
        if (iter == max_iter) break;

        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(nv, nv);
        for (int i = 0; i < n; ++i) {
            const double vi = vm(i);
            for (int k = 0; k < n; ++k) {
                const double g = y(i, k).real(), b = y(i, k).imag();
                if (g == 0.0 && b == 0.0 && i != k) continue;
                const double tik = va(i) - va(k);
                const double ct = std::cos(tik), st = std::sin(tik);
                double dp_dth, dp_dv, dq_dth, dq_dv;
                if (i == k) {
                    dp_dth = -q(i) - b * vi * vi;
                    dp_dv = p(i) / vi + g * vi;
                    dq_dth = p(i) - g * vi * vi;
                    dq_dv = q(i) / vi - b * vi;
                } else {
                    const double vk = vm(k);
                    dp_dth = vi * vk * (g * st - b * ct);
                    dp_dv = vi * (g * ct + b * st);
                    dq_dth = -vi * vk * (g * ct + b * st);
                    dq_dv = vi * (g * st - b * ct);
                }
                if (angle_var[i] >= 0 && angle_var[k] >= 0) jac(angle_var[i], angle_var[k]) += dp_dth;
                if (angle_var[i] >= 0 && mag_var[k] >= 0) jac(angle_var[i], mag_var[k]) += dp_dv;
                if (mag_var[i] >= 0 && angle_var[k] >= 0) jac(mag_var[i], angle_var[k]) += dq_dth;
                if (mag_var[i] >= 0 && mag_var[k] >= 0) jac(mag_var[i], mag_var[k]) += dq_dv;
            }
        }

        Eigen::VectorXd step;
        try {
            step = DenseLu<double>::compute(jac).solve(mismatch);
        } catch (const SingularMatrixError& e) {
            int var = e.pivot_row();
            int bus_id = -1;
            for (int i = 0; i < n; ++i)
                if (angle_var[i] == var || mag_var[i] == var) bus_id = m.buses[i].id;
            throw ConvergenceError("singular Jacobian at iteration " + std::to_string(iter) +
                                       " near bus " + std::to_string(bus_id),
                                   result);
        }
        // Cap the step length, keeping the Newton direction: far from the
        // solution a raw step can leave the convergence basin entirely.
        double max_step = 0.0;
        for (int i = 0; i < nv; ++i) max_step = std::max(max_step, std::abs(step(i)));
        const double scale = max_step > 0.5 ? 0.5 / max_step : 1.0;
        for (int i = 0; i < n; ++i) {
            if (angle_var[i] >= 0) va(i) += scale * step(angle_var[i]);
            if (mag_var[i] >= 0) {
                vm(i) += scale * step(mag_var[i]);
                vm(i) = std::max(vm(i), 0.05);  // keep magnitudes off the singular origin
            }
        }
    }

    result.voltages.resize(n);
    for (int i = 0; i < n; ++i) result.voltages(i) = std::polar(vm(i), va(i));
    if (!result.converged)
        throw ConvergenceError("power flow did not converge in " + std::to_string(max_iter) +
                                   " iterations (mismatch " +
                                   std::to_string(result.final_mismatch) + ")",
                               result);
    return result;
}

Eigen::VectorXcd bus_injections(const NetworkModel& m, const Eigen::VectorXcd& voltages) {
    Eigen::MatrixXcd y = assemble_ybus(m).dense();
    Eigen::VectorXcd currents = y * voltages;
    return voltages.cwiseProduct(currents.conjugate());
}

double total_branch_losses(const NetworkModel& m, const Eigen::VectorXcd& voltages) {
    AdmittanceMatrix y = assemble_ybus(m);
    auto v_of = [&](int bus_id) { return voltages(y.row_of(bus_id)); };

    double loss = 0.0;
    for (const auto& br : m.branches) {
        switch (br.kind) {
            case BranchKind::Line: {
                Complex diff = v_of(br.from) - v_of(br.to);
                loss += (diff * std::conj(br.series_admittance * diff)).real();
                break;
            }
            case BranchKind::Shunt: {
                Complex v = v_of(br.from);
                loss += (v * std::conj(br.shunt_admittance * v)).real();
                break;
            }
            case BranchKind::ShiftTransformer: {
                Eigen::Matrix2cd blk = stamp_shift_transformer(br.series_admittance, br.ratio);
                Eigen::Vector2cd v{v_of(br.from), v_of(br.to)};
                Eigen::Vector2cd i = blk * v;
                loss += (v(0) * std::conj(i(0)) + v(1) * std::conj(i(1))).real();
                break;
            }
            case BranchKind::BbCoupling: {
                const auto& cv = m.converters.at(br.converter);
                auto entries = stamp_bb(build_bb_block(cv), cv.ac_bus, cv.reflected_bus);
                Eigen::Vector2cd v{v_of(cv.ac_bus), v_of(cv.reflected_bus)};
                Complex i0 = entries[0].value * v(0) + entries[1].value * v(1);
                Complex i1 = entries[2].value * v(0) + entries[3].value * v(1);
                loss += (v(0) * std::conj(i0) + v(1) * std::conj(i1)).real();
                break;
            }
        }
    }
    return loss;
}

}  // namespace hybridgrid
