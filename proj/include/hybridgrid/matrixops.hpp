#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <vector>

#include "hybridgrid/netmodel.hpp"

namespace hybridgrid {

class SingularMatrixError : public ModelError {
  public:
    SingularMatrixError(const std::string& what, int pivot_row)
        : ModelError(what), pivot_row_(pivot_row) {}
    int pivot_row() const { return pivot_row_; }

  private:
    int pivot_row_;
};

// Nodal admittance matrix with a bus-id <-> row bijection. Entries are kept
// as an ordered triplet map so assembly order never changes the result.
class AdmittanceMatrix {
  public:
    explicit AdmittanceMatrix(std::vector<int> bus_ids);

    int order() const { return static_cast<int>(row_to_bus_.size()); }
    int row_of(int bus_id) const;
    int bus_at(int row) const { return row_to_bus_.at(row); }
    const std::vector<int>& bus_ids() const { return row_to_bus_; }

    void add(int bus_row_id, int bus_col_id, Complex value);
    Complex at(int bus_row_id, int bus_col_id) const;

    const std::map<std::pair<int, int>, Complex>& triplets() const { return entries_; }
    Eigen::MatrixXcd dense() const;

  private:
    std::vector<int> row_to_bus_;
    std::unordered_map<int, int> bus_to_row_;
    std::map<std::pair<int, int>, Complex> entries_;  // (row, col) -> value
};

struct AssemblyOptions {
    // Drop capacitive shunt branches (Im y > 0), the pre-fault simplification.
    bool drop_capacitive_shunts = false;
};

// Sum of all Line, Shunt, ShiftTransformer and converter-coupling stamps.
// Rows follow the model's bus order. Throws ModelError on a floating bus.
AdmittanceMatrix assemble_ybus(const NetworkModel& m, const AssemblyOptions& opts = {});

// Total factorizations performed since process start, across complex and
// real solves. Used by the benchmark comparison.
long factorization_count();
void bump_factorization_count();

// Dense LU with partial pivoting; pivot magnitudes below 1e-12 raise
// SingularMatrixError carrying the zero-pivot row.
template <typename Scalar>
class DenseLu {
  public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    static DenseLu compute(const Matrix& a);
    Vector solve(const Vector& rhs) const;
    int order() const { return static_cast<int>(lu_.rows()); }

  private:
    Matrix lu_;
    std::vector<int> perm_;
};

extern template class DenseLu<double>;
extern template class DenseLu<Complex>;

struct TheveninView {
    int bus = 0;
    Complex z_kk{0.0, 0.0};
    Eigen::VectorXcd column;  // column of the impedance matrix, in row order
};

// One factorization of an assembled matrix, reused across thevenin and
// linear solves. Immutable once built; safe to share across threads.
class YbusSolver {
  public:
    explicit YbusSolver(const AdmittanceMatrix& y);

    TheveninView thevenin(int bus_id) const;
    Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;
    const AdmittanceMatrix& matrix() const { return y_; }

  private:
    AdmittanceMatrix y_;
    DenseLu<Complex> lu_;
};

TheveninView thevenin(const AdmittanceMatrix& y, int bus_id);
Eigen::VectorXcd solve_linear(const AdmittanceMatrix& y, const Eigen::VectorXcd& rhs);

}  // namespace hybridgrid
