#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hybridgrid {

using Complex = std::complex<double>;

// Voltage reflection factor per unit of modulation index: alpha = 0.612 * Ma.
inline constexpr double kAlphaPerModulation = 0.612;

constexpr double deg2rad(double deg) { return deg * 3.14159265358979323846 / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / 3.14159265358979323846; }

class ModelError : public std::runtime_error {
  public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public ModelError {
  public:
    explicit ParseError(const std::string& what) : ModelError(what) {}
};

enum class BusKind {
    AcSlack,
    AcPV,
    AcPQ,
    DcSource,
    DcLoad,
    CouplingAcSide,
    ReflectedDc,
};

bool is_dc_kind(BusKind k);
bool is_ac_kind(BusKind k);
std::string to_string(BusKind k);
BusKind bus_kind_from_string(const std::string& s);

struct Bus {
    int id = 0;
    BusKind kind = BusKind::AcPQ;
    double voltage_setpoint = 1.0;  // pu, meaningful for slack / PV / DcSource
    double angle_setpoint = 0.0;    // rad, slack only
    double p_injection = 0.0;       // pu, generation positive
    double q_injection = 0.0;       // pu, ac kinds only
};

enum class BranchKind {
    Line,
    ShiftTransformer,
    BbCoupling,
    Shunt,
};

std::string to_string(BranchKind k);

struct Branch {
    BranchKind kind = BranchKind::Line;
    int from = 0;
    int to = 0;
    Complex series_admittance{0.0, 0.0};  // Line / ShiftTransformer
    Complex ratio{1.0, 0.0};              // ShiftTransformer, |a| angle theta_a
    int converter = -1;                   // BbCoupling: index into converters
    Complex shunt_admittance{0.0, 0.0};   // Shunt (from == to)
};

struct ConverterCoupling {
    int ac_bus = 0;
    int reflected_bus = 0;
    double modulation = 1.0;  // Ma, 0 < Ma <= 1
    double reactance = 0.1;   // X, pu, > 0
    double delta = 0.0;       // rad, coupling angle across X
    double shift_angle = 0.0; // rad, phase-shift transformer angle theta_a

    double alpha() const { return kAlphaPerModulation * modulation; }
    double beta() const { return 1.0 / alpha(); }
};

// Base quantities for one zone. All solver-facing values are pu; ampere or
// volt outputs exist only through explicit denormalization against these.
struct PerUnitBases {
    double power_va = 1.0;
    double voltage_ac_v = 1.0;
    double voltage_dc_v = 1.0;
    // Fault currents in amperes are reported only when a current base is
    // supplied explicitly; it is not derived from the other bases.
    std::optional<double> current_a;
};

struct Diagnostic {
    std::string code;     // stable machine-readable tag
    std::string message;  // names the offending bus / branch / zone
};

struct NetworkModel {
    PerUnitBases bases;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<ConverterCoupling> converters;

    int bus_count() const { return static_cast<int>(buses.size()); }
    const Bus* find_bus(int id) const;
    int bus_row(int id) const;  // row index in assembly order; throws on unknown id
    bool has_slack() const;

    // Connected components of dc-kind buses, linked by Line/Shunt branches.
    std::vector<std::vector<int>> dc_zones() const;
};

NetworkModel parse_network(const std::string& text);
NetworkModel parse_network_file(const std::string& path);
std::string serialize_network(const NetworkModel& m);

// Structural validation plus the reactive-element check from `reflect`.
// Empty result means the model is analysis-ready.
std::vector<Diagnostic> validate_model(const NetworkModel& m);

// Throws ModelError listing the first diagnostics when validation fails.
void require_valid(const NetworkModel& m);

double denormalize_current(double pu, const PerUnitBases& bases);
double normalize_current(double amperes, const PerUnitBases& bases);
double denormalize_power(double pu, const PerUnitBases& bases);
double normalize_power(double watts, const PerUnitBases& bases);

}  // namespace hybridgrid
