#include "clsim/solvers.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <sstream>

#include "clsim/errors.hpp"

namespace clsim {

namespace {

// Pivoted QR: a column whose |R_kk| falls below this fraction of |R_00| is
// treated as dependent.
constexpr double kQrPivotTolerance = 1e-10;

void check_shapes(const Eigen::MatrixXd& rows, const Eigen::VectorXd& responses) {
    if (rows.rows() != responses.size()) {
        std::ostringstream msg;
        msg << "design has " << rows.rows() << " rows but " << responses.size() << " responses";
        throw ValidationError(msg.str());
    }
}

}  // namespace

Eigen::VectorXd fit_min_norm(const Eigen::MatrixXd& rows, const Eigen::VectorXd& responses,
                             const Eigen::VectorXd& w_prev, double& condition) {
    check_shapes(rows, responses);
    const Eigen::Index m = rows.rows();
    const Eigen::Index p = rows.cols();
    if (w_prev.size() != p) throw ValidationError("previous parameter has the wrong dimension");
    if (m > p) {
        std::ostringstream msg;
        msg << "minimum-norm fit needs at most as many rows as parameters (m=" << m << ", p=" << p
            << ")";
        throw ValidationError(msg.str());
    }
    if (m == 0) {
        condition = 1.0;
        return w_prev;
    }

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(rows);
    const double trace = gram.diagonal().sum();

    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(gram);
    const double floor = kGramPivotTolerance * trace / static_cast<double>(m);
    double min_pivot = std::numeric_limits<double>::infinity();
    double max_pivot = 0.0;
    if (llt.info() == Eigen::Success) {
        const Eigen::VectorXd pivots = llt.matrixLLT().diagonal().array().square();
        min_pivot = pivots.minCoeff();
        max_pivot = pivots.maxCoeff();
    }
    if (llt.info() != Eigen::Success || !(min_pivot > floor)) {
        const double cond = (llt.info() == Eigen::Success && min_pivot > 0.0)
                                ? max_pivot / min_pivot
                                : std::numeric_limits<double>::infinity();
        std::ostringstream msg;
        msg << "Gram matrix is numerically singular (m=" << m << ", p=" << p
            << ", condition estimate " << cond << ")";
        throw RankDeficiencyError(msg.str(), cond);
    }
    const double rcond = llt.rcond();
    condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();

    const Eigen::VectorXd residual = responses - rows * w_prev;
    const Eigen::VectorXd coeffs = llt.solve(residual);
    return w_prev + rows.transpose() * coeffs;
}

Eigen::VectorXd fit_min_norm(const Eigen::MatrixXd& rows, const Eigen::VectorXd& responses,
                             const Eigen::VectorXd& w_prev) {
    double condition = 0.0;
    return fit_min_norm(rows, responses, w_prev, condition);
}

Eigen::VectorXd fit_least_squares(const Eigen::MatrixXd& rows, const Eigen::VectorXd& responses,
                                  double& condition) {
    check_shapes(rows, responses);
    const Eigen::Index m = rows.rows();
    const Eigen::Index p = rows.cols();
    if (m < p) {
        std::ostringstream msg;
        msg << "least-squares fit needs at least as many rows as parameters (m=" << m
            << ", p=" << p << ")";
        throw ValidationError(msg.str());
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(rows);
    const auto diag = qr.matrixR().diagonal().cwiseAbs();
    const double top = p > 0 ? diag(0) : 1.0;
    const double bottom = p > 0 ? diag(p - 1) : 1.0;
    condition = bottom > 0.0 ? top / bottom : std::numeric_limits<double>::infinity();
    if (!(bottom > kQrPivotTolerance * top)) {
        std::ostringstream msg;
        msg << "design matrix is not full column rank (m=" << m << ", p=" << p
            << ", condition estimate " << condition << ")";
        throw RankDeficiencyError(msg.str(), condition);
    }
    return qr.solve(responses);
}

Eigen::VectorXd fit_least_squares(const Eigen::MatrixXd& rows, const Eigen::VectorXd& responses) {
    double condition = 0.0;
    return fit_least_squares(rows, responses, condition);
}

}  // namespace clsim
