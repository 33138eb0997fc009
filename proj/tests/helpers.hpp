#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "hybridgrid/netmodel.hpp"

namespace hybridgrid::testing {

inline Bus make_bus(int id, BusKind kind, double p = 0.0, double q = 0.0, double v = 1.0) {
    Bus b;
    b.id = id;
    b.kind = kind;
    b.p_injection = p;
    b.q_injection = q;
    b.voltage_setpoint = v;
    return b;
}

inline Branch make_line(int from, int to, Complex y) {
    Branch br;
    br.kind = BranchKind::Line;
    br.from = from;
    br.to = to;
    br.series_admittance = y;
    return br;
}

inline Branch make_shunt(int bus, Complex y) {
    Branch br;
    br.kind = BranchKind::Shunt;
    br.from = br.to = bus;
    br.shunt_admittance = y;
    return br;
}

inline ConverterCoupling make_converter(int ac_bus, int reflected_bus, double X,
                                        double delta_deg, double Ma = 1.0) {
    ConverterCoupling c;
    c.ac_bus = ac_bus;
    c.reflected_bus = reflected_bus;
    c.reactance = X;
    c.delta = deg2rad(delta_deg);
    c.shift_angle = deg2rad(delta_deg);
    c.modulation = Ma;
    return c;
}

inline void attach_converter(NetworkModel& m, const ConverterCoupling& c) {
    Branch br;
    br.kind = BranchKind::BbCoupling;
    br.from = c.ac_bus;
    br.to = c.reflected_bus;
    br.converter = static_cast<int>(m.converters.size());
    m.converters.push_back(c);
    m.branches.push_back(br);
}

// Connected ac network: bus 1 slack, the rest PQ, spanning tree plus a few
// chords, inductive generator shunt at the slack so the matrix is grounded.
inline NetworkModel random_ac_network(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> res(0.005, 0.03), rea(0.02, 0.1);
    std::uniform_real_distribution<double> load(0.0, 0.15);
    std::uniform_int_distribution<int> pick(1, std::max(1, n - 1));

    NetworkModel m;
    m.bases = {1e6, 480.0, 750.0, std::nullopt};
    m.buses.push_back(make_bus(1, BusKind::AcSlack));
    for (int i = 2; i <= n; ++i)
        m.buses.push_back(make_bus(i, BusKind::AcPQ, -load(rng), -load(rng) * 0.3));

    auto line_y = [&] {
        Complex z{res(rng), rea(rng)};
        return Complex{1.0, 0.0} / z;
    };
    for (int i = 2; i <= n; ++i) {
        std::uniform_int_distribution<int> parent(1, i - 1);
        m.branches.push_back(make_line(parent(rng), i, line_y()));
    }
    for (int extra = 0; extra < n / 3; ++extra) {
        int a = pick(rng), b = pick(rng) + 1;
        if (a != b) m.branches.push_back(make_line(a, b, line_y()));
    }
    m.branches.push_back(make_shunt(1, Complex{0.5, -8.0}));
    return m;
}

// Hybrid grid: ac core plus one dc zone behind `n_conv` converters. The fixed
// converter angle pins the transfer near sin(delta)/X, so each landing bus
// carries a matching load and the ac core is stiffened to ship that power.
inline NetworkModel random_hybrid_network(std::mt19937& rng, int n_ac = 4, int n_conv = 2,
                                          int n_dc = 3) {
    std::uniform_real_distribution<double> delta_deg(15.0, 40.0);
    std::uniform_real_distribution<double> dc_g(15.0, 30.0);
    std::uniform_real_distribution<double> dc_load(0.02, 0.1);
    std::uniform_real_distribution<double> load_frac(0.65, 0.8);
    const double X = 0.1508;

    NetworkModel m = random_ac_network(rng, n_ac);
    for (auto& br : m.branches)
        if (br.kind == BranchKind::Line) br.series_admittance *= 8.0;
    int next = n_ac + 1;

    std::vector<int> coupling_buses;
    for (int k = 0; k < n_conv; ++k) {
        int id = next++;
        m.buses.push_back(make_bus(id, BusKind::CouplingAcSide));
        std::uniform_int_distribution<int> host(1, n_ac);
        m.branches.push_back(make_line(host(rng), id, Complex{16.0, -80.0}));
        coupling_buses.push_back(id);
    }

    std::vector<double> deltas;
    for (int k = 0; k < n_conv; ++k) deltas.push_back(delta_deg(rng));

    std::vector<int> dc_buses;
    for (int k = 0; k < n_dc; ++k) {
        int id = next++;
        double p;
        if (k < n_conv)
            p = -load_frac(rng) * std::sin(deg2rad(deltas[k])) / X;
        else
            p = -dc_load(rng);
        m.buses.push_back(make_bus(id, BusKind::ReflectedDc, p));
        dc_buses.push_back(id);
    }
    for (int k = 1; k < n_dc; ++k) {
        std::uniform_int_distribution<int> parent(0, k - 1);
        m.branches.push_back(make_line(dc_buses[parent(rng)], dc_buses[k],
                                       Complex{dc_g(rng), 0.0}));
    }
    m.branches.push_back(make_shunt(dc_buses.back(), Complex{0.0, -0.3}));

    for (int k = 0; k < n_conv; ++k)
        attach_converter(m, make_converter(coupling_buses[k], dc_buses[k], X, deltas[k]));
    return m;
}

// Random connected dc-zone admittance for elimination checks: conductive
// branches plus a grounding shunt so the full matrix is nonsingular.
inline Eigen::MatrixXcd random_dc_zone_matrix(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> g(0.5, 5.0);
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        std::uniform_int_distribution<int> parent(0, i - 1);
        int p = parent(rng);
        Complex ya{g(rng), 0.0};
        y(i, i) += ya;
        y(p, p) += ya;
        y(i, p) -= ya;
        y(p, i) -= ya;
    }
    std::uniform_int_distribution<int> chords(0, n / 2);
    int extra = chords(rng);
    for (int e = 0; e < extra; ++e) {
        std::uniform_int_distribution<int> pick(0, n - 1);
        int a = pick(rng), b = pick(rng);
        if (a == b) continue;
        Complex ya{g(rng), 0.0};
        y(a, a) += ya;
        y(b, b) += ya;
        y(a, b) -= ya;
        y(b, a) -= ya;
    }
    y(n - 1, n - 1) += Complex{0.0, -1.0};
    return y;
}

inline NetworkModel canonical_grid() {
    return parse_network_file(std::string(HYBRIDGRID_DATA_DIR) +
                              "/three_converter_microgrid.json");
}

}  // namespace hybridgrid::testing
