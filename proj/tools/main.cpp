#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hybridgrid/analysis.hpp"
#include "hybridgrid/matrixops.hpp"
#include "hybridgrid/netmodel.hpp"
#include "hybridgrid/oracle.hpp"

using nlohmann::json;
using namespace hybridgrid;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDiagnostic = 1;
constexpr int kExitSolverFailure = 2;

json complex_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json voltages_json(const NetworkModel& m, const Eigen::VectorXcd& v) {
    json arr = json::array();
    for (int i = 0; i < m.bus_count(); ++i) {
        arr.push_back({{"bus", m.buses[i].id},
                       {"magnitude", std::abs(v(i))},
                       {"angle_deg", rad2deg(std::arg(v(i)))},
                       {"re", v(i).real()},
                       {"im", v(i).imag()}});
    }
    return arr;
}

json fault_json(const NetworkModel& m, const FaultResult& r) {
    json out{{"bus", r.bus},
             {"z_kk", complex_json(r.z_kk)},
             {"fault_current_pu", complex_json(r.fault_current_pu)},
             {"fault_current_magnitude_pu", std::abs(r.fault_current_pu)},
             {"post_fault_voltages", voltages_json(m, r.post_fault_voltages)}};
    if (r.fault_current_a) out["fault_current_a"] = *r.fault_current_a;
    return out;
}

void emit(const json& report, const std::string& format, const std::string& out_path) {
    std::string text;
    if (format == "json") {
        text = report.dump(2) + "\n";
    } else if (format == "table" || format == "csv") {
        const char sep = format == "csv" ? ',' : '\t';
        std::ostringstream os;
        // Flatten one level: arrays of objects become rows.
        std::function<void(const std::string&, const json&)> walk = [&](const std::string& prefix,
                                                                        const json& node) {
            if (node.is_array()) {
                for (const auto& item : node) walk(prefix, item);
            } else if (node.is_object()) {
                for (auto it = node.begin(); it != node.end(); ++it) {
                    if (it.value().is_structured())
                        walk(prefix.empty() ? it.key() : prefix + "." + it.key(), it.value());
                    else
                        os << (prefix.empty() ? it.key() : prefix + "." + it.key()) << sep
                           << it.value().dump() << "\n";
                }
            } else {
                os << prefix << sep << node.dump() << "\n";
            }
        };
        walk("", report);
        text = os.str();
    }
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out_path);
        if (!f) throw ModelError("cannot write '" + out_path + "'");
        f << text;
    }
}

json diagnostics_json(const std::vector<Diagnostic>& diags) {
    json arr = json::array();
    for (const auto& d : diags) arr.push_back({{"code", d.code}, {"message", d.message}});
    return arr;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steady-state analysis for hybrid ac-dc microgrids"};
    app.require_subcommand(1);
    app.fallthrough();  // shared flags may appear after the subcommand name

    std::string input, format = "json", out_path;
    int fault_bus = -1;
    double tol = 1e-8;
    int max_iter = 50;
    std::string prefault = "flat";
    int reps = 10;

    app.add_option("--input", input, "network description file")->required();
    app.add_option("--format", format, "output format")
        ->check(CLI::IsMember({"table", "json", "csv"}));
    app.add_option("--out", out_path, "write report to a file instead of stdout");
    app.add_option("--tol", tol, "convergence tolerance, pu")->check(CLI::PositiveNumber);
    app.add_option("--max-iter", max_iter, "iteration cap")->check(CLI::PositiveNumber);

    auto* cmd_pf = app.add_subcommand("powerflow", "unified Newton-Raphson power flow");
    auto* cmd_fault = app.add_subcommand("fault", "symmetrical fault at one bus");
    cmd_fault->add_option("--bus", fault_bus, "fault bus id")->required();
    cmd_fault->add_option("--prefault", prefault, "pre-fault profile")
        ->check(CLI::IsMember({"flat", "solved"}));
    auto* cmd_sweep = app.add_subcommand("fault-sweep", "symmetrical fault at every bus");
    cmd_sweep->add_option("--prefault", prefault, "pre-fault profile")
        ->check(CLI::IsMember({"flat", "solved"}));
    auto* cmd_export = app.add_subcommand("export-ybus", "emit the assembled admittance matrix");
    auto* cmd_verify = app.add_subcommand("verify", "cross-check against independent oracles");
    auto* cmd_bench = app.add_subcommand("bench", "compare unified vs sequential solvers");
    cmd_bench->add_option("--repetitions", reps, "timing repetitions")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        NetworkModel m = parse_network_file(input);
        auto diags = validate_model(m);
        if (!diags.empty()) {
            emit(json{{"status", "invalid"}, {"diagnostics", diagnostics_json(diags)}}, format,
                 out_path);
            return kExitDiagnostic;
        }
        PrefaultProfile profile =
            prefault == "solved" ? PrefaultProfile::Solved : PrefaultProfile::Flat;

        if (*cmd_pf) {
            PowerFlowResult r = newton_raphson_powerflow(m, tol, max_iter);
            emit(json{{"status", "converged"},
                      {"iterations", r.iterations},
                      {"final_mismatch", r.final_mismatch},
                      {"mismatch_trace", r.mismatch_trace},
                      {"voltages", voltages_json(m, r.voltages)}},
                 format, out_path);
        } else if (*cmd_fault) {
            if (!m.find_bus(fault_bus)) {
                emit(json{{"status", "invalid"},
                          {"diagnostics",
                           json::array({{{"code", "unknown-bus"},
                                         {"message", "unknown bus " +
                                                         std::to_string(fault_bus)}}})}},
                     format, out_path);
                return kExitDiagnostic;
            }
            emit(fault_json(m, symmetrical_fault(m, fault_bus, profile)), format, out_path);
        } else if (*cmd_sweep) {
            json arr = json::array();
            for (const auto& r : fault_sweep(m, profile)) arr.push_back(fault_json(m, r));
            emit(json{{"faults", arr}}, format, out_path);
        } else if (*cmd_export) {
            AdmittanceMatrix y = assemble_ybus(m);
            json triplets = json::array();
            for (const auto& [rc, v] : y.triplets())
                triplets.push_back({{"row", rc.first},
                                    {"col", rc.second},
                                    {"re", v.real()},
                                    {"im", v.imag()}});
            json out{{"order", y.order()}, {"bus_ids", y.bus_ids()}, {"triplets", triplets}};
            if (y.order() <= 20) {
                Eigen::MatrixXcd d = y.dense();
                json dense = json::array();
                for (int i = 0; i < y.order(); ++i) {
                    json row = json::array();
                    for (int j = 0; j < y.order(); ++j) row.push_back(complex_json(d(i, j)));
                    dense.push_back(row);
                }
                out["dense"] = dense;
            }
            emit(out, format, out_path);
        } else if (*cmd_verify) {
            auto entries = verify_model(m);
            json arr = json::array();
            bool all_pass = true;
            for (const auto& e : entries) {
                all_pass = all_pass && e.pass;
                arr.push_back({{"quantity", e.quantity},
                               {"unified", e.unified},
                               {"oracle", e.oracle},
                               {"abs_deviation", e.abs_deviation},
                               {"rel_deviation", e.rel_deviation},
                               {"pass", e.pass}});
            }
            emit(json{{"all_pass", all_pass}, {"comparisons", arr}}, format, out_path);
            if (!all_pass) return kExitSolverFailure;
        } else if (*cmd_bench) {
            BenchPair p = bench_compare(m, reps);
            auto rec = [](const BenchRecord& r) {
                return json{{"method", r.method},
                            {"wall_seconds", r.wall_seconds},
                            {"nr_iterations", r.nr_iterations},
                            {"factorizations", r.factorizations}};
            };
            json out{{"comparable", p.comparable},
                     {"unified", rec(p.unified)},
                     {"sequential", rec(p.sequential)}};
            if (!p.note.empty()) out["note"] = p.note;
            emit(out, format, out_path);
            if (!p.comparable) return kExitSolverFailure;
        }
        return kExitOk;
    } catch (const ParseError& e) {
        emit(json{{"status", "error"}, {"error", e.what()}}, format, out_path);
        return kExitDiagnostic;
    } catch (const ConvergenceError& e) {
        emit(json{{"status", "not-converged"}, {"error", e.what()}}, format, out_path);
        return kExitSolverFailure;
    } catch (const ModelError& e) {
        emit(json{{"status", "error"}, {"error", e.what()}}, format, out_path);
        return kExitSolverFailure;
    }
}
