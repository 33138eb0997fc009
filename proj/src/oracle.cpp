#include "hybridgrid/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hybridgrid/coupling.hpp"
#include "hybridgrid/matrixops.hpp"
#include "hybridgrid/reflect.hpp"

namespace hybridgrid {

std::vector<Complex> dense_oracle_solve(std::vector<std::vector<Complex>> a,
                                        std::vector<Complex> rhs) {
    const size_t n = a.size();
    if (rhs.size() != n) throw ModelError("oracle solve: dimension mismatch");
    for (const auto& row : a)
        if (row.size() != n) throw ModelError("oracle solve: matrix not square");

    // Forward elimination on the augmented system.
    for (size_t k = 0; k < n; ++k) {
        size_t pivot = k;
        for (size_t r = k + 1; r < n; ++r)
            if (std::abs(a[r][k]) > std::abs(a[pivot][k])) pivot = r;
        if (std::abs(a[pivot][k]) < 1e-12)
            throw ModelError("oracle solve: singular matrix at column " + std::to_string(k));
        std::swap(a[k], a[pivot]);
        std::swap(rhs[k], rhs[pivot]);
        for (size_t r = k + 1; r < n; ++r) {
            Complex f = a[r][k] / a[k][k];
            for (size_t c = k; c < n; ++c) a[r][c] -= f * a[k][c];
            rhs[r] -= f * rhs[k];
        }
    }
    std::vector<Complex> x(n);
    for (size_t i = n; i-- > 0;) {
        Complex acc = rhs[i];
        for (size_t j = i + 1; j < n; ++j) acc -= a[i][j] * x[j];
        x[i] = acc / a[i][i];
    }
    return x;
}


SequentialResult sequential_hybrid_powerflow(const NetworkModel& m, double tol, int max_iter) {
    if (tol <= 0.0) throw ModelError("tolerance must be positive");
    const long fact_before = factorization_count();
    auto t0 = std::chrono::steady_clock::now();

    SequentialResult out;
    out.bench.method = "sequential";

    bool any_dc = std::any_of(m.buses.begin(), m.buses.end(),
                              [](const Bus& b) { return is_dc_kind(b.kind); });
    if (!any_dc) {
        // Degenerates to a single plain ac run.
        out.flow = newton_raphson_powerflow(m, tol, max_iter);
        out.rounds = 0;
        out.bench.nr_iterations = out.flow.iterations;
        out.bench.factorizations = factorization_count() - fact_before;
        out.bench.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }

    // The ac subproblem: ac buses and branches, each converter replaced by a
    // reactance branch to a source bus pinned at the reflected dc voltage.
    std::vector<BbBlock> blocks;
    for (const auto& cv : m.converters) blocks.push_back(build_bb_block(cv));

    int next_id = 0;
    for (const auto& b : m.buses) next_id = std::max(next_id, b.id);
    ++next_id;

    NetworkModel ac;
    ac.bases = m.bases;
    for (const auto& b : m.buses)
        if (is_ac_kind(b.kind)) ac.buses.push_back(b);
    for (const auto& br : m.branches) {
        if (br.kind == BranchKind::BbCoupling) continue;
        const Bus* f = m.find_bus(br.from);
        const Bus* t = m.find_bus(br.to);
        if (f && t && is_ac_kind(f->kind) && is_ac_kind(t->kind)) ac.branches.push_back(br);
    }
    std::vector<int> source_bus_ids;
    for (size_t k = 0; k < m.converters.size(); ++k) {
        const auto& cv = m.converters[k];
        Bus src;
        src.id = next_id++;
        src.kind = BusKind::AcSlack;
        src.voltage_setpoint = 1.0;
        ac.buses.push_back(src);
        source_bus_ids.push_back(src.id);

        Branch link;
        link.kind = BranchKind::Line;
        link.from = cv.ac_bus;
        link.to = src.id;
        link.series_admittance = -blocks[k].matrix(0, 1);
        ac.branches.push_back(link);

        Complex residual = blocks[k].matrix(0, 0) + blocks[k].matrix(0, 1);
        if (std::abs(residual) > 1e-14) {
            Branch sh;
            sh.kind = BranchKind::Shunt;
            sh.from = sh.to = cv.ac_bus;
            sh.shunt_admittance = residual;
            ac.branches.push_back(sh);
        }
    }

    // The dc subproblem: dc buses and branches, each converter fed from a
    // fictitious terminal pinned at the ac-side coupling voltage. Its rows
    // coincide with the corresponding rows of the full network, so the
    // exchange fixed point is the full solution.
    NetworkModel dcm;
    dcm.bases = m.bases;
    for (const auto& b : m.buses)
        if (is_dc_kind(b.kind)) dcm.buses.push_back(b);
    for (const auto& br : m.branches) {
        if (br.kind == BranchKind::BbCoupling) continue;
        const Bus* f = m.find_bus(br.from);
        const Bus* t = m.find_bus(br.to);
        if (f && t && is_dc_kind(f->kind) && is_dc_kind(t->kind)) dcm.branches.push_back(br);
    }
    std::vector<int> terminal_bus_ids;
    for (const auto& cv : m.converters) {
        Bus term;
        term.id = next_id++;
        term.kind = BusKind::AcSlack;
        term.voltage_setpoint = 1.0;
        dcm.buses.push_back(term);
        terminal_bus_ids.push_back(term.id);

        ConverterCoupling pinned = cv;
        pinned.ac_bus = term.id;
        Branch br;
        br.kind = BranchKind::BbCoupling;
        br.from = term.id;
        br.to = cv.reflected_bus;
        br.converter = static_cast<int>(dcm.converters.size());
        dcm.converters.push_back(pinned);
        dcm.branches.push_back(br);
    }

    // Exchange state, indexed over the dc buses in model order.
    std::vector<int> dc_bus_ids;
    for (const auto& b : m.buses)
        if (is_dc_kind(b.kind)) dc_bus_ids.push_back(b.id);
    const int nd = static_cast<int>(dc_bus_ids.size());
    std::unordered_map<int, int> dc_row;
    for (int i = 0; i < nd; ++i) dc_row[dc_bus_ids[i]] = i;
    Eigen::VectorXcd v_dc = Eigen::VectorXcd::Ones(nd);
    for (int i = 0; i < nd; ++i) {
        const Bus* b = m.find_bus(dc_bus_ids[i]);
        if (b->kind == BusKind::DcSource) v_dc(i) = Complex{b->voltage_setpoint, 0.0};
    }

    Eigen::VectorXcd v_ac_coupling = Eigen::VectorXcd::Ones(m.converters.size());
    int total_nr_iterations = 0;
    double prev_change = 1e30;
    int growth_streak = 0;
    bool settled = false;

    const int max_rounds = std::max(max_iter, 8);
    for (int round = 0; round < max_rounds; ++round) {
        // ac step: pin each converter source at the current reflected voltage.
        for (size_t k = 0; k < m.converters.size(); ++k) {
            Complex v2 = v_dc(dc_row[m.converters[k].reflected_bus]);
            for (auto& b : ac.buses)
                if (b.id == source_bus_ids[k]) {
                    b.voltage_setpoint = std::abs(v2);
                    b.angle_setpoint = std::arg(v2);
                }
        }
        PowerFlowResult ac_flow = detail::nr_core(ac, tol, max_iter);
        total_nr_iterations += ac_flow.iterations;

        Eigen::VectorXcd v1(m.converters.size());
        for (size_t k = 0; k < m.converters.size(); ++k)
            v1(k) = ac_flow.voltages(ac.bus_row(m.converters[k].ac_bus));

        // dc step: pin each converter terminal at the ac-side voltage and
        // solve the dc subnetwork, constant-power loads included.
        for (size_t k = 0; k < m.converters.size(); ++k) {
            for (auto& b : dcm.buses)
                if (b.id == terminal_bus_ids[k]) {
                    b.voltage_setpoint = std::abs(v1(k));
                    b.angle_setpoint = std::arg(v1(k));
                }
        }
        PowerFlowResult dc_flow = detail::nr_core(dcm, tol, max_iter);
        total_nr_iterations += dc_flow.iterations;
        for (int i = 0; i < nd; ++i) v_dc(i) = dc_flow.voltages(dcm.bus_row(dc_bus_ids[i]));

        double change = 0.0;
        for (size_t k = 0; k < m.converters.size(); ++k)
            change = std::max(change, std::abs(v1(k) - v_ac_coupling(k)));
        v_ac_coupling = v1;

        out.rounds = round + 1;
        if (round > 0 && change < tol) {
            out.flow = ac_flow;
            settled = true;
            break;
        }
        if (change > prev_change) {
            if (++growth_streak >= 5)
                throw ModelError("sequential solver oscillating: boundary change " +
                                 std::to_string(change) + " after " + std::to_string(round + 1) +
                                 " rounds");
        } else {
            growth_streak = 0;
        }
        prev_change = change;
        out.flow = ac_flow;
    }
    if (!settled)
        throw ConvergenceError("sequential solver: boundary exchange did not settle in " +
                                   std::to_string(max_rounds) + " rounds",
                               out.flow);

    // Re-express the result on the original bus set, dc buses included.
    PowerFlowResult merged;
    merged.iterations = total_nr_iterations;
    merged.converged = true;
    merged.final_mismatch = out.flow.final_mismatch;
    merged.mismatch_trace = out.flow.mismatch_trace;
    merged.voltages.resize(m.bus_count());
    for (int i = 0; i < m.bus_count(); ++i) {
        const Bus& b = m.buses[i];
        if (is_ac_kind(b.kind))
            merged.voltages(i) = out.flow.voltages(ac.bus_row(b.id));
        else
            merged.voltages(i) = v_dc(dc_row[b.id]);
    }
    out.flow = std::move(merged);

    out.bench.nr_iterations = total_nr_iterations;
    out.bench.factorizations = factorization_count() - fact_before;
    out.bench.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::vector<ComparisonEntry> verify_model(const NetworkModel& m, double tol) {
    std::vector<ComparisonEntry> out;
    auto push = [&](std::string quantity, double unified, double oracle, double pass_tol) {
        ComparisonEntry e;
        e.quantity = std::move(quantity);
        e.unified = unified;
        e.oracle = oracle;
        e.abs_deviation = std::abs(unified - oracle);
        e.rel_deviation = e.abs_deviation / std::max(std::abs(oracle), 1e-12);
        e.pass = e.abs_deviation <= pass_tol;
        out.push_back(e);
    };

    // Impedance columns vs the independent elimination path.
    AdmittanceMatrix y = assemble_ybus(m);
    Eigen::MatrixXcd yd = y.dense();
    const int n = y.order();
    std::vector<std::vector<Complex>> a(n, std::vector<Complex>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[i][j] = yd(i, j);
    YbusSolver solver(y);
    for (int k = 0; k < n; ++k) {
        std::vector<Complex> rhs(n, Complex{0.0, 0.0});
        rhs[k] = Complex{1.0, 0.0};
        std::vector<Complex> z = dense_oracle_solve(a, rhs);
        TheveninView tv = solver.thevenin(y.bus_at(k));
        push("Z_kk at bus " + std::to_string(y.bus_at(k)), std::abs(tv.z_kk), std::abs(z[k]),
             1e-9);
    }

    // Unified vs sequential coupling-bus voltages.
    if (!m.converters.empty()) {
        PowerFlowResult unified = newton_raphson_powerflow(m);
        SequentialResult seq = sequential_hybrid_powerflow(m);
        for (const auto& cv : m.converters) {
            int r = m.bus_row(cv.ac_bus);
            push("|V| at coupling bus " + std::to_string(cv.ac_bus),
                 std::abs(unified.voltages(r)), std::abs(seq.flow.voltages(r)), tol);
        }
    }
    return out;
}

BenchPair bench_compare(const NetworkModel& m, int repetitions) {
    BenchPair pair;
    pair.unified.method = "unified";
    pair.sequential.method = "sequential";
    if (repetitions < 1) repetitions = 1;

    try {
        std::vector<double> t_uni, t_seq;
        for (int r = 0; r < repetitions; ++r) {
            long f0 = factorization_count();
            auto t0 = std::chrono::steady_clock::now();
            PowerFlowResult uni = newton_raphson_powerflow(m);
            t_uni.push_back(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            pair.unified.nr_iterations = uni.iterations;
            pair.unified.factorizations = factorization_count() - f0;

            SequentialResult seq = sequential_hybrid_powerflow(m);
            t_seq.push_back(seq.bench.wall_seconds);
            pair.sequential.nr_iterations = seq.bench.nr_iterations;
            pair.sequential.factorizations = seq.bench.factorizations;
        }
        auto median = [](std::vector<double>& v) {
            std::sort(v.begin(), v.end());
            return v[v.size() / 2];
        };
        pair.unified.wall_seconds = median(t_uni);
        pair.sequential.wall_seconds = median(t_seq);
        pair.comparable = true;
    } catch (const ModelError& e) {
        pair.comparable = false;
        pair.note = e.what();
    }
    return pair;
}

}  // namespace hybridgrid
