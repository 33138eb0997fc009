#include "hybridgrid/matrixops.hpp"

#include <atomic>
#include <cmath>

#include "hybridgrid/coupling.hpp"
#include "hybridgrid/reflect.hpp"

namespace hybridgrid {

namespace {
std::atomic<long> g_factorizations{0};
constexpr double kPivotThreshold = 1e-12;
}  // namespace

long factorization_count() { return g_factorizations.load(); }
void bump_factorization_count() { ++g_factorizations; }

AdmittanceMatrix::AdmittanceMatrix(std::vector<int> bus_ids) : row_to_bus_(std::move(bus_ids)) {
    for (size_t i = 0; i < row_to_bus_.size(); ++i)
        bus_to_row_[row_to_bus_[i]] = static_cast<int>(i);
}

int AdmittanceMatrix::row_of(int bus_id) const {
    auto it = bus_to_row_.find(bus_id);
    if (it == bus_to_row_.end())
        throw ModelError("unknown bus " + std::to_string(bus_id));
    return it->second;
}

void AdmittanceMatrix::add(int bus_row_id, int bus_col_id, Complex value) {
    entries_[{row_of(bus_row_id), row_of(bus_col_id)}] += value;
}

Complex AdmittanceMatrix::at(int bus_row_id, int bus_col_id) const {
    auto it = entries_.find({row_of(bus_row_id), row_of(bus_col_id)});
    return it == entries_.end() ? Complex{0.0, 0.0} : it->second;
}

Eigen::MatrixXcd AdmittanceMatrix::dense() const {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(order(), order());
    for (const auto& [rc, v] : entries_) a(rc.first, rc.second) += v;
    return a;
}

AdmittanceMatrix assemble_ybus(const NetworkModel& m, const AssemblyOptions& opts) {
    std::vector<int> ids;
    ids.reserve(m.buses.size());
    for (const auto& b : m.buses) ids.push_back(b.id);
    AdmittanceMatrix y(std::move(ids));

    for (const auto& br : m.branches) {
        switch (br.kind) {
            case BranchKind::Line: {
                Complex ya = br.series_admittance;
                y.add(br.from, br.from, ya);
                y.add(br.to, br.to, ya);
                y.add(br.from, br.to, -ya);
                y.add(br.to, br.from, -ya);
                break;
            }
            case BranchKind::Shunt: {
                if (opts.drop_capacitive_shunts && br.shunt_admittance.imag() > 0.0) break;
                y.add(br.from, br.from, br.shunt_admittance);
                break;
            }
            case BranchKind::ShiftTransformer: {
                Eigen::Matrix2cd block = stamp_shift_transformer(br.series_admittance, br.ratio);
                y.add(br.from, br.from, block(0, 0));
                y.add(br.from, br.to, block(0, 1));
                y.add(br.to, br.from, block(1, 0));
                y.add(br.to, br.to, block(1, 1));
                break;
            }
            case BranchKind::BbCoupling: {
                const auto& cv = m.converters.at(br.converter);
                for (const auto& e : stamp_bb(build_bb_block(cv), cv.ac_bus, cv.reflected_bus))
                    y.add(e.row_bus, e.col_bus, e.value);
                break;
            }
        }
    }

    // A bus the fold never touched has no electrical connection at all.
    std::vector<bool> touched(m.buses.size(), false);
    for (const auto& [rc, v] : y.triplets())
        if (v != Complex{0.0, 0.0}) touched[rc.first] = true;
    for (size_t i = 0; i < touched.size(); ++i)
        if (!touched[i])
            throw ModelError("floating bus " + std::to_string(m.buses[i].id) +
                             " (all-zero admittance row)");
    return y;
}

template <typename Scalar>
DenseLu<Scalar> DenseLu<Scalar>::compute(const Matrix& a) {
    if (a.rows() != a.cols()) throw ModelError("LU requires a square matrix");
    DenseLu<Scalar> f;
    f.lu_ = a;
    const int n = static_cast<int>(a.rows());
    f.perm_.resize(n);
    for (int i = 0; i < n; ++i) f.perm_[i] = i;

    for (int k = 0; k < n; ++k) {
        int pivot = k;
        double best = std::abs(f.lu_(k, k));
        for (int r = k + 1; r < n; ++r) {
            double mag = std::abs(f.lu_(r, k));
            if (mag > best) {
                best = mag;
                pivot = r;
            }
        }
        if (best < kPivotThreshold)
            throw SingularMatrixError("singular matrix: zero pivot at row " + std::to_string(k),
                                      k);
        if (pivot != k) {
            f.lu_.row(k).swap(f.lu_.row(pivot));
            std::swap(f.perm_[k], f.perm_[pivot]);
        }
        for (int r = k + 1; r < n; ++r) {
            Scalar factor = f.lu_(r, k) / f.lu_(k, k);
            f.lu_(r, k) = factor;
            for (int c = k + 1; c < n; ++c) f.lu_(r, c) -= factor * f.lu_(k, c);
        }
    }
    bump_factorization_count();
    return f;
}

template <typename Scalar>
typename DenseLu<Scalar>::Vector DenseLu<Scalar>::solve(const Vector& rhs) const {
    const int n = order();
    if (rhs.size() != n) throw ModelError("solve: dimension mismatch");
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = rhs(perm_[i]);
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) x(i) -= lu_(i, j) * x(j);
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) x(i) -= lu_(i, j) * x(j);
        x(i) /= lu_(i, i);
    }
    return x;
}

template class DenseLu<double>;
template class DenseLu<Complex>;

YbusSolver::YbusSolver(const AdmittanceMatrix& y)
    : y_(y), lu_([&] {
          try {
              return DenseLu<Complex>::compute(y.dense());
          } catch (const SingularMatrixError& e) {
              throw SingularMatrixError("singular admittance matrix: zero pivot near bus " +
                                            std::to_string(y.bus_at(e.pivot_row())),
                                        e.pivot_row());
          }
      }()) {}

TheveninView YbusSolver::thevenin(int bus_id) const {
    const int k = y_.row_of(bus_id);
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(y_.order());
    e(k) = Complex{1.0, 0.0};
    Eigen::VectorXcd column = lu_.solve(e);
    return {bus_id, column(k), std::move(column)};
}

Eigen::VectorXcd YbusSolver::solve(const Eigen::VectorXcd& rhs) const { return lu_.solve(rhs); }

TheveninView thevenin(const AdmittanceMatrix& y, int bus_id) {
    return YbusSolver(y).thevenin(bus_id);
}

Eigen::VectorXcd solve_linear(const AdmittanceMatrix& y, const Eigen::VectorXcd& rhs) {
    if (rhs.size() != y.order()) throw ModelError("solve_linear: dimension mismatch");
    return YbusSolver(y).solve(rhs);
}

}  // namespace hybridgrid
