#pragma once

#include <Eigen/Dense>

namespace clsim {

/// Relative pivot floor for the Gram factorization: a pivot below
/// kGramPivotTolerance * trace / m counts as singular.
inline constexpr double kGramPivotTolerance = 1e-12;

/// Minimum-distance interpolant: argmin ||w - w_prev|| subject to A w = b,
/// with the m < p rows of A stacked samples. Computed as
/// w_prev + A^T c where (A A^T) c = b - A w_prev, via a Cholesky factor.
/// Throws RankDeficiencyError when the Gram matrix is numerically singular.
Eigen::VectorXd fit_min_norm(const Eigen::MatrixXd& rows, const Eigen::VectorXd& responses,
                             const Eigen::VectorXd& w_prev);

/// Same as fit_min_norm, also reporting the Gram condition estimate.
Eigen::VectorXd fit_min_norm(const Eigen::MatrixXd& rows, const Eigen::VectorXd& responses,
                             const Eigen::VectorXd& w_prev, double& condition);

/// Ordinary least squares for m > p via column-pivoted Householder QR.
/// Throws RankDeficiencyError when A is not numerically full column rank.
Eigen::VectorXd fit_least_squares(const Eigen::MatrixXd& rows, const Eigen::VectorXd& responses);

Eigen::VectorXd fit_least_squares(const Eigen::MatrixXd& rows, const Eigen::VectorXd& responses,
                                  double& condition);

}  // namespace clsim
