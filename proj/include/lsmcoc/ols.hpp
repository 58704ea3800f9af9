#pragma once
// Ordinary least squares through column-pivoted Householder QR: equal to the
// normal-equations solution whenever X'X is invertible, but numerically stable
// near collinearity. Columns are equilibrated to unit norm before factoring,
// so the 1e-10 rank cutoff measures each column against its own scale; raw
// basis columns can differ by nine orders of magnitude (an intercept next to
// count-times-fund-cubed products), and a cutoff relative to the largest raw
// pivot would discard genuinely informative small columns.
//
// Two entry points share one factorization. ols_fit rejects a deficient
// design with the dependent columns named. OlsSolver::solve instead prunes
// them: dependent columns get exact zero coefficients, so the fitted surface
// is still the projection onto the design's column space. The recursion needs
// the pruning form because several of the prescribed bases are exactly
// collinear at early time steps (a GARCH variance that is still an affine
// function of the lagged level, deep out-of-the-money strikes that no sampled
// path reaches), which is a property of the model, not an input error.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace lsmcoc {

inline constexpr double kOlsRankTolerance = 1e-10;

struct DesignMatrix {
    Eigen::MatrixXd x;                // rows = observations, cols = features
    std::vector<std::string> labels;  // one per column, used in diagnostics
};

class OlsSolver {
public:
    explicit OlsSolver(const DesignMatrix& design, double tolerance = kOlsRankTolerance) {
        rows_ = static_cast<std::size_t>(design.x.rows());
        cols_ = static_cast<std::size_t>(design.x.cols());
        if (cols_ == 0 || rows_ == 0) throw std::invalid_argument("ols_fit: empty design matrix");
        if (!design.labels.empty() && design.labels.size() != cols_)
            throw std::invalid_argument("ols_fit: label count does not match column count");
        if (rows_ < cols_)
            throw std::invalid_argument("ols_fit: fewer observations (" + std::to_string(rows_) +
                                        ") than features (" + std::to_string(cols_) + ")");
        if (!design.x.allFinite()) throw NumericalError("ols_fit: non-finite design entry");

        scale_.resize(cols_);
        Eigen::MatrixXd scaled = design.x;
        for (std::size_t j = 0; j < cols_; ++j) {
            auto jj = static_cast<Eigen::Index>(j);
            double norm = scaled.col(jj).norm();
            scale_[j] = norm == 0.0 ? 1.0 : norm;  // zero columns stay zero and get pruned
            scaled.col(jj) /= scale_[j];
        }
        qr_.compute(scaled);
        qr_.setThreshold(tolerance);
        const auto rank = static_cast<std::size_t>(qr_.rank());
        const auto& perm = qr_.colsPermutation().indices();
        for (std::size_t j = rank; j < cols_; ++j) {
            auto col = static_cast<std::size_t>(perm[static_cast<Eigen::Index>(j)]);
            dropped_.push_back(col < design.labels.size() ? design.labels[col]
                                                          : "#" + std::to_string(col));
        }
    }

    std::size_t rank() const { return static_cast<std::size_t>(qr_.rank()); }
    bool full_rank() const { return dropped_.empty(); }

    // Labels of the columns beyond the numerical rank, in pivot order.
    const std::vector<std::string>& dropped() const { return dropped_; }

    void require_full_rank() const {
        if (dropped_.empty()) return;
        std::string msg = "ols_fit: design matrix is rank-deficient (rank " +
                          std::to_string(rank()) + " of " + std::to_string(cols_) +
                          "); dependent columns:";
        for (const auto& name : dropped_) msg += " " + name;
        throw RankDeficiencyError(msg, dropped_);
    }

    // Least-squares coefficients; dependent columns receive exact zeros.
    std::vector<double> solve(std::span<const double> y) const {
        if (y.size() != rows_)
            throw std::invalid_argument("ols_fit: target length does not match row count");
        for (double v : y)
            if (!std::isfinite(v)) throw NumericalError("ols_fit: non-finite target value");
        Eigen::Map<const Eigen::VectorXd> ym(y.data(), static_cast<Eigen::Index>(rows_));
        Eigen::VectorXd beta = qr_.solve(ym);
        std::vector<double> out(cols_);
        for (std::size_t j = 0; j < cols_; ++j)
            out[j] = beta[static_cast<Eigen::Index>(j)] / scale_[j];
        return out;
    }

private:
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> scale_;
    std::vector<std::string> dropped_;
};

inline std::vector<double> ols_fit(const DesignMatrix& design, std::span<const double> y) {
    OlsSolver solver(design);
    solver.require_full_rank();
    return solver.solve(y);
}

inline double predict(std::span<const double> beta, std::span<const double> features) {
    if (beta.size() != features.size())
        throw std::invalid_argument("predict: coefficient/feature length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) acc += beta[i] * features[i];
    return acc;
}

}  // namespace lsmcoc
