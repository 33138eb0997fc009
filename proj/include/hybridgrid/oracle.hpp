#pragma once

#include <string>
#include <vector>

#include "hybridgrid/analysis.hpp"
#include "hybridgrid/netmodel.hpp"

namespace hybridgrid {

// Textbook Gaussian elimination on plain containers. Shares no factorization
// code with matrixops; exists purely as an independent check.
std::vector<Complex> dense_oracle_solve(std::vector<std::vector<Complex>> a,
                                        std::vector<Complex> rhs);

struct BenchRecord {
    std::string method;       // "unified" | "sequential"
    double wall_seconds = 0.0;
    int nr_iterations = 0;
    long factorizations = 0;
};

struct SequentialResult {
    PowerFlowResult flow;   // voltages aligned with model bus order
    BenchRecord bench;
    int rounds = 0;         // ac/dc exchange rounds
};

// Conventional alternating solver: ac Newton-Raphson with converter
// injections frozen, then a dc-side solve with ac boundary voltages frozen,
// until the exchanged boundary quantities settle. The dc zones are solved in
// their reflected coordinates but never enter the ac Jacobian.
SequentialResult sequential_hybrid_powerflow(const NetworkModel& m, double tol = 1e-8,
                                             int max_iter = 50);

struct ComparisonEntry {
    std::string quantity;
    double unified = 0.0;
    double oracle = 0.0;
    double abs_deviation = 0.0;
    double rel_deviation = 0.0;  // denominator max(|oracle|, 1e-12)
    bool pass = false;
};

// Cross-checks on one model: impedance columns vs the dense oracle, and
// unified vs sequential coupling-bus voltages.
std::vector<ComparisonEntry> verify_model(const NetworkModel& m, double tol = 1e-4);

struct BenchPair {
    BenchRecord unified;
    BenchRecord sequential;
    bool comparable = false;  // false when either solver failed
    std::string note;
};

BenchPair bench_compare(const NetworkModel& m, int repetitions);

}  // namespace hybridgrid
