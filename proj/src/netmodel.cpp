#include "hybridgrid/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hybridgrid/reflect.hpp"

namespace hybridgrid {

using nlohmann::json;

bool is_dc_kind(BusKind k) {
    return k == BusKind::DcSource || k == BusKind::DcLoad || k == BusKind::ReflectedDc;
}

bool is_ac_kind(BusKind k) { return !is_dc_kind(k); }

std::string to_string(BusKind k) {
    switch (k) {
        case BusKind::AcSlack: return "ac_slack";
        case BusKind::AcPV: return "ac_pv";
        case BusKind::AcPQ: return "ac_pq";
        case BusKind::DcSource: return "dc_source";
        case BusKind::DcLoad: return "dc_load";
        case BusKind::CouplingAcSide: return "coupling_ac";
        case BusKind::ReflectedDc: return "reflected_dc";
    }
    return "?";
}

BusKind bus_kind_from_string(const std::string& s) {
    static const std::map<std::string, BusKind> table = {
        {"ac_slack", BusKind::AcSlack},   {"ac_pv", BusKind::AcPV},
        {"ac_pq", BusKind::AcPQ},         {"dc_source", BusKind::DcSource},
        {"dc_load", BusKind::DcLoad},     {"coupling_ac", BusKind::CouplingAcSide},
        {"reflected_dc", BusKind::ReflectedDc},
    };
    auto it = table.find(s);
    if (it == table.end()) throw ParseError("unknown bus kind '" + s + "'");
    return it->second;
}

std::string to_string(BranchKind k) {
    switch (k) {
        case BranchKind::Line: return "line";
        case BranchKind::ShiftTransformer: return "shift_transformer";
        case BranchKind::BbCoupling: return "bb_coupling";
        case BranchKind::Shunt: return "shunt";
    }
    return "?";
}

const Bus* NetworkModel::find_bus(int id) const {
    for (const auto& b : buses)
        if (b.id == id) return &b;
    return nullptr;
}

int NetworkModel::bus_row(int id) const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    throw ModelError("unknown bus " + std::to_string(id));
}

bool NetworkModel::has_slack() const {
    return std::any_of(buses.begin(), buses.end(),
                       [](const Bus& b) { return b.kind == BusKind::AcSlack; });
}

std::vector<std::vector<int>> NetworkModel::dc_zones() const {
    std::map<int, int> component;  // dc bus id -> component label
    for (const auto& b : buses)
        if (is_dc_kind(b.kind)) component[b.id] = b.id;

    auto root = [&](int id) {
        while (component[id] != id) id = component[id];
        return id;
    };
    for (const auto& br : branches) {
        if (br.kind != BranchKind::Line) continue;
        if (!component.count(br.from) || !component.count(br.to)) continue;
        int a = root(br.from), b = root(br.to);
        if (a != b) component[std::max(a, b)] = std::min(a, b);
    }

    std::map<int, std::vector<int>> zones;
    for (const auto& [id, _] : component) zones[root(id)].push_back(id);
    std::vector<std::vector<int>> out;
    for (auto& [_, members] : zones) out.push_back(std::move(members));
    return out;
}

namespace {

Complex parse_complex(const json& j, const std::string& field) {
    if (!j.is_object() || !j.contains("re") || !j.contains("im"))
        throw ParseError("field '" + field + "' must be {\"re\":..., \"im\":...}");
    return {j.at("re").get<double>(), j.at("im").get<double>()};
}

json complex_to_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

double require_number(const json& j, const std::string& ctx, const std::string& key) {
    if (!j.contains(key)) throw ParseError(ctx + ": missing field '" + key + "'");
    if (!j.at(key).is_number()) throw ParseError(ctx + ": field '" + key + "' must be a number");
    return j.at(key).get<double>();
}

}  // namespace

NetworkModel parse_network(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }

    NetworkModel m;
    if (!doc.contains("bases")) throw ParseError("missing top-level 'bases'");
    const auto& jb = doc.at("bases");
    m.bases.power_va = require_number(jb, "bases", "power_va");
    m.bases.voltage_ac_v = require_number(jb, "bases", "voltage_ac_v");
    m.bases.voltage_dc_v = require_number(jb, "bases", "voltage_dc_v");
    if (jb.contains("current_a")) m.bases.current_a = jb.at("current_a").get<double>();
    if (m.bases.power_va <= 0 || m.bases.voltage_ac_v <= 0 || m.bases.voltage_dc_v <= 0 ||
        (m.bases.current_a && *m.bases.current_a <= 0))
        throw ParseError("bases: base quantities must be strictly positive");

    if (!doc.contains("buses") || !doc.at("buses").is_array())
        throw ParseError("missing top-level 'buses' array");
    for (const auto& j : doc.at("buses")) {
        Bus b;
        b.id = static_cast<int>(require_number(j, "bus", "id"));
        if (!j.contains("kind")) throw ParseError("bus " + std::to_string(b.id) + ": missing 'kind'");
        b.kind = bus_kind_from_string(j.at("kind").get<std::string>());
        if (j.contains("voltage_setpoint")) b.voltage_setpoint = j.at("voltage_setpoint").get<double>();
        if (j.contains("p")) b.p_injection = j.at("p").get<double>();
        if (j.contains("q")) b.q_injection = j.at("q").get<double>();
        m.buses.push_back(b);
    }

    if (doc.contains("branches")) {
        for (const auto& j : doc.at("branches")) {
            Branch br;
            std::string kind = j.value("kind", "line");
            if (kind == "line") {
                br.kind = BranchKind::Line;
                br.from = static_cast<int>(require_number(j, "line branch", "from"));
                br.to = static_cast<int>(require_number(j, "line branch", "to"));
                br.series_admittance = parse_complex(j.at("y"), "y");
            } else if (kind == "shift_transformer") {
                br.kind = BranchKind::ShiftTransformer;
                br.from = static_cast<int>(require_number(j, "transformer branch", "from"));
                br.to = static_cast<int>(require_number(j, "transformer branch", "to"));
                br.series_admittance = parse_complex(j.at("y"), "y");
                double mag = j.value("ratio_mag", 1.0);
                double ang = deg2rad(j.value("ratio_angle_deg", 0.0));
                if (mag == 0.0) throw ParseError("transformer branch: zero ratio");
                br.ratio = std::polar(mag, ang);
            } else if (kind == "shunt") {
                br.kind = BranchKind::Shunt;
                br.from = br.to = static_cast<int>(require_number(j, "shunt branch", "bus"));
                br.shunt_admittance = parse_complex(j.at("y"), "y");
            } else {
                throw ParseError("unknown branch kind '" + kind + "'");
            }
            m.branches.push_back(br);
        }
    }

    if (doc.contains("converters")) {
        int idx = 0;
        for (const auto& j : doc.at("converters")) {
            ConverterCoupling c;
            std::string ctx = "converter " + std::to_string(idx);
            c.ac_bus = static_cast<int>(require_number(j, ctx, "ac_bus"));
            c.reflected_bus = static_cast<int>(require_number(j, ctx, "reflected_bus"));
            c.modulation = j.value("modulation", 1.0);
            c.reactance = require_number(j, ctx, "reactance");
            c.delta = deg2rad(require_number(j, ctx, "delta_deg"));
            c.shift_angle = deg2rad(j.value("shift_angle_deg", 0.0));
            m.converters.push_back(c);

            // Couplings also appear as branches so assembly is one fold.
            Branch br;
            br.kind = BranchKind::BbCoupling;
            br.from = c.ac_bus;
            br.to = c.reflected_bus;
            br.converter = idx++;
            m.branches.push_back(br);
        }
    }

    // Hard structural errors surface at parse time.
    std::set<int> ids;
    for (const auto& b : m.buses)
        if (!ids.insert(b.id).second) throw ParseError("duplicate bus id " + std::to_string(b.id));
    auto check_ref = [&](int id, const std::string& ctx) {
        if (!ids.count(id))
            throw ParseError(ctx + ": dangling bus reference " + std::to_string(id));
    };
    for (size_t i = 0; i < m.branches.size(); ++i) {
        check_ref(m.branches[i].from, "branch " + std::to_string(i));
        check_ref(m.branches[i].to, "branch " + std::to_string(i));
    }
    for (size_t i = 0; i < m.converters.size(); ++i) {
        check_ref(m.converters[i].ac_bus, "converter " + std::to_string(i));
        check_ref(m.converters[i].reflected_bus, "converter " + std::to_string(i));
    }
    return m;
}

NetworkModel parse_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_network(ss.str());
}

std::string serialize_network(const NetworkModel& m) {
    json doc;
    doc["bases"] = {{"power_va", m.bases.power_va},
                    {"voltage_ac_v", m.bases.voltage_ac_v},
                    {"voltage_dc_v", m.bases.voltage_dc_v}};
    if (m.bases.current_a) doc["bases"]["current_a"] = *m.bases.current_a;

    doc["buses"] = json::array();
    for (const auto& b : m.buses) {
        doc["buses"].push_back({{"id", b.id},
                                {"kind", to_string(b.kind)},
                                {"voltage_setpoint", b.voltage_setpoint},
                                {"p", b.p_injection},
                                {"q", b.q_injection}});
    }

    doc["branches"] = json::array();
    for (const auto& br : m.branches) {
        switch (br.kind) {
            case BranchKind::Line:
                doc["branches"].push_back({{"kind", "line"},
                                           {"from", br.from},
                                           {"to", br.to},
                                           {"y", complex_to_json(br.series_admittance)}});
                break;
            case BranchKind::ShiftTransformer:
                doc["branches"].push_back({{"kind", "shift_transformer"},
                                           {"from", br.from},
                                           {"to", br.to},
                                           {"y", complex_to_json(br.series_admittance)},
                                           {"ratio_mag", std::abs(br.ratio)},
                                           {"ratio_angle_deg", rad2deg(std::arg(br.ratio))}});
                break;
            case BranchKind::Shunt:
                doc["branches"].push_back({{"kind", "shunt"},
                                           {"bus", br.from},
                                           {"y", complex_to_json(br.shunt_admittance)}});
                break;
            case BranchKind::BbCoupling:
                break;  // regenerated from the converter list on parse
        }
    }

    doc["converters"] = json::array();
    for (const auto& c : m.converters) {
        doc["converters"].push_back({{"ac_bus", c.ac_bus},
                                     {"reflected_bus", c.reflected_bus},
                                     {"modulation", c.modulation},
                                     {"reactance", c.reactance},
                                     {"delta_deg", rad2deg(c.delta)},
                                     {"shift_angle_deg", rad2deg(c.shift_angle)}});
    }
    return doc.dump(2);
}

std::vector<Diagnostic> validate_model(const NetworkModel& m) {
    std::vector<Diagnostic> out;
    auto add = [&](std::string code, std::string msg) {
        out.push_back({std::move(code), std::move(msg)});
    };

    std::set<int> ids;
    int slack_count = 0;
    for (const auto& b : m.buses) {
        if (!ids.insert(b.id).second)
            add("duplicate-id", "duplicate bus id " + std::to_string(b.id));
        if (b.kind == BusKind::AcSlack) ++slack_count;
        if (is_dc_kind(b.kind) && b.q_injection != 0.0)
            add("dc-reactive", "bus " + std::to_string(b.id) +
                                  ": dc-side buses carry zero reactive injection");
        if ((b.kind == BusKind::AcSlack || b.kind == BusKind::AcPV ||
             b.kind == BusKind::DcSource) &&
            b.voltage_setpoint <= 0.0)
            add("bad-setpoint",
                "bus " + std::to_string(b.id) + ": voltage setpoint must be positive");
    }
    if (slack_count > 1) add("multiple-slack", "multiple slack buses declared");

    for (size_t i = 0; i < m.branches.size(); ++i) {
        const auto& br = m.branches[i];
        std::string ctx = "branch " + std::to_string(i);
        if (!ids.count(br.from))
            add("dangling-bus", ctx + ": dangling bus reference " + std::to_string(br.from));
        if (br.to != br.from && !ids.count(br.to))
            add("dangling-bus", ctx + ": dangling bus reference " + std::to_string(br.to));
    }

    for (size_t i = 0; i < m.converters.size(); ++i) {
        const auto& c = m.converters[i];
        std::string ctx = "converter " + std::to_string(i);
        if (!ids.count(c.ac_bus))
            add("dangling-bus", ctx + ": dangling bus reference " + std::to_string(c.ac_bus));
        if (!ids.count(c.reflected_bus))
            add("dangling-bus",
                ctx + ": dangling bus reference " + std::to_string(c.reflected_bus));
        if (c.ac_bus == c.reflected_bus)
            add("self-coupling", ctx + ": ac and reflected buses must differ");
        if (c.modulation <= 0.0 || c.modulation > 1.0)
            add("bad-modulation", ctx + ": modulation must lie in (0, 1]");
        if (c.reactance <= 0.0) add("bad-reactance", ctx + ": coupling reactance must be positive");
        if (std::abs(std::sin(c.delta)) < 1e-9)
            add("singular-angle", ctx + ": sin(delta) vanishes, coupling block singular");
        const Bus* ref = m.find_bus(c.reflected_bus);
        if (ref && !is_dc_kind(ref->kind))
            add("bad-coupling", ctx + ": reflected bus " + std::to_string(c.reflected_bus) +
                                    " is not a dc-kind bus");
    }

    // Every dc zone must reach the ac network through a converter.
    for (const auto& zone : m.dc_zones()) {
        bool coupled = false;
        for (const auto& c : m.converters)
            if (std::find(zone.begin(), zone.end(), c.reflected_bus) != zone.end())
                coupled = true;
        if (!coupled)
            add("isolated-dc-zone",
                "dc zone at bus " + std::to_string(zone.front()) + " has no converter coupling");
    }

    for (auto& d : validate_reactive_element(m)) out.push_back(std::move(d));
    return out;
}

void require_valid(const NetworkModel& m) {
    auto diags = validate_model(m);
    if (diags.empty()) return;
    std::string msg = "model validation failed:";
    for (const auto& d : diags) msg += "\n  [" + d.code + "] " + d.message;
    throw ModelError(msg);
}

double denormalize_current(double pu, const PerUnitBases& bases) {
    if (!bases.current_a) throw ModelError("no current base supplied");
    return pu * *bases.current_a;
}

double normalize_current(double amperes, const PerUnitBases& bases) {
    if (!bases.current_a) throw ModelError("no current base supplied");
    return amperes / *bases.current_a;
}

double denormalize_power(double pu, const PerUnitBases& bases) { return pu * bases.power_va; }

double normalize_power(double watts, const PerUnitBases& bases) { return watts / bases.power_va; }

}  // namespace hybridgrid
