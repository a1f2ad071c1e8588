#include "clsim/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "clsim/errors.hpp"

namespace clsim {

namespace {

constexpr double kPsdTolerance = 1e-9;
constexpr double kPivotTolerance = 1e-10;
constexpr double kRankTolerance = 1e-10;

// Shared-direction geometry: all norms equal and all off-diagonal distances
// equal, with distance at most twice the norm (sin^2 theta <= 1).
bool is_uniform(const TaskGeometry& geom) {
    const int t = geom.task_count();
    const double r2 = geom.sq_norms(0);
    const double scale = std::max(1.0, r2);
    for (int i = 0; i < t; ++i) {
        if (std::abs(geom.sq_norms(i) - r2) > 1e-12 * scale) return false;
    }
    if (t < 2) return true;
    const double d = geom.sq_dists(0, 1);
    for (int i = 0; i < t; ++i) {
        for (int j = 0; j < t; ++j) {
            if (i != j && std::abs(geom.sq_dists(i, j) - d) > 1e-12 * scale) return false;
        }
    }
    return d <= 2.0 * r2 * (1.0 + 1e-12);
}

}  // namespace

std::string_view to_string(GeometryMode mode) {
    switch (mode) {
        case GeometryMode::identical: return "identical";
        case GeometryMode::orthogonal: return "orthogonal";
        case GeometryMode::angle: return "angle";
        case GeometryMode::explicit_matrix: return "explicit";
    }
    return "?";
}

GeometryMode parse_geometry_mode(std::string_view text) {
    if (text == "identical" || text == "same") return GeometryMode::identical;
    if (text == "orthogonal" || text == "orth") return GeometryMode::orthogonal;
    if (text == "angle") return GeometryMode::angle;
    if (text == "explicit") return GeometryMode::explicit_matrix;
    throw ValidationError("unknown geometry mode '" + std::string(text) + "'");
}

Eigen::MatrixXd TaskGeometry::gram() const {
    const int t = task_count();
    Eigen::MatrixXd g(t, t);
    for (int i = 0; i < t; ++i) {
        for (int j = 0; j < t; ++j) {
            g(i, j) = 0.5 * (sq_norms(i) + sq_norms(j) - sq_dists(i, j));
        }
    }
    return g;
}

TaskGeometry TaskGeometry::prefix(int t) const {
    return {sq_norms.head(t), sq_dists.topLeftCorner(t, t)};
}

TaskGeometry TaskGeometry::scaled(double factor) const {
    return {sq_norms * factor, sq_dists * factor};
}

void validate_geometry(const TaskGeometry& geom) {
    const int t = geom.task_count();
    if (t < 1) throw ValidationError("geometry needs at least one task");
    if (geom.sq_dists.rows() != t || geom.sq_dists.cols() != t) {
        std::ostringstream msg;
        msg << "distance matrix is " << geom.sq_dists.rows() << "x" << geom.sq_dists.cols()
            << " but there are " << t << " norms";
        throw ValidationError(msg.str());
    }
    if (!geom.sq_norms.allFinite() || !geom.sq_dists.allFinite()) {
        throw ValidationError("geometry contains non-finite entries");
    }
    if ((geom.sq_norms.array() < 0.0).any() || (geom.sq_dists.array() < 0.0).any()) {
        throw ValidationError("squared norms and distances must be nonnegative");
    }
    for (int i = 0; i < t; ++i) {
        if (geom.sq_dists(i, i) != 0.0) {
            throw ValidationError("distance matrix must have a zero diagonal");
        }
        for (int j = 0; j < i; ++j) {
            if (geom.sq_dists(i, j) != geom.sq_dists(j, i)) {
                throw ValidationError("distance matrix must be symmetric");
            }
        }
    }
    const Eigen::MatrixXd g = geom.gram();
    const double max_entry = std::max(g.cwiseAbs().maxCoeff(), geom.sq_dists.maxCoeff());
    const double smallest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g, Eigen::EigenvaluesOnly)
                                .eigenvalues()
                                .minCoeff();
    if (smallest < -kPsdTolerance * max_entry) {
        std::ostringstream msg;
        msg << "geometry is not Euclidean-realizable: implied inner-product matrix has eigenvalue "
            << smallest;
        throw ValidationError(msg.str());
    }
}

TaskGeometry make_identical(int task_count) {
    if (task_count < 1) throw ValidationError("task count must be positive");
    return {Eigen::VectorXd::Ones(task_count), Eigen::MatrixXd::Zero(task_count, task_count)};
}

TaskGeometry make_orthogonal(int task_count) {
    return make_angle(task_count, M_PI / 2.0);
}

TaskGeometry make_angle(int task_count, double theta_radians) {
    if (task_count < 1) throw ValidationError("task count must be positive");
    if (!(theta_radians >= 0.0 && theta_radians <= M_PI / 2.0 + 1e-15)) {
        throw ValidationError("angle must lie in [0, 90] degrees");
    }
    const double s = std::sin(theta_radians);
    TaskGeometry g{Eigen::VectorXd::Ones(task_count),
                   Eigen::MatrixXd::Constant(task_count, task_count, 2.0 * s * s)};
    g.sq_dists.diagonal().setZero();
    return g;
}

TaskGeometry make_explicit(Eigen::VectorXd sq_norms, Eigen::MatrixXd sq_dists) {
    TaskGeometry g{std::move(sq_norms), std::move(sq_dists)};
    validate_geometry(g);
    return g;
}

TaskGeometry make_geometry(const GeometrySpec& spec, int task_count) {
    switch (spec.mode) {
        case GeometryMode::identical: return make_identical(task_count);
        case GeometryMode::orthogonal: return make_orthogonal(task_count);
        case GeometryMode::angle: return make_angle(task_count, spec.theta_degrees * M_PI / 180.0);
        case GeometryMode::explicit_matrix: {
            if (spec.sq_norms.size() != task_count) {
                std::ostringstream msg;
                msg << "explicit geometry lists " << spec.sq_norms.size() << " norms for "
                    << task_count << " tasks";
                throw ValidationError(msg.str());
            }
            return make_explicit(spec.sq_norms, spec.sq_dists);
        }
    }
    throw ValidationError("unknown geometry mode");
}

int geometry_rank(const TaskGeometry& geom) {
    const Eigen::MatrixXd g = geom.gram();
    const Eigen::VectorXd ev =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g, Eigen::EigenvaluesOnly).eigenvalues();
    const double top = std::max(ev.maxCoeff(), 0.0);
    if (top == 0.0) return 0;
    return static_cast<int>((ev.array() > kRankTolerance * top).count());
}

int min_dimension(const TaskGeometry& geom) {
    if (is_uniform(geom)) return geom.task_count() + 1;
    return std::max(1, geometry_rank(geom));
}

Eigen::MatrixXd random_orthonormal_frame(int dimension, int columns, Rng& rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd q(dimension, columns);
    for (int k = 0; k < columns; ++k) {
        for (;;) {
            Eigen::VectorXd v(dimension);
            for (int i = 0; i < dimension; ++i) v(i) = normal(rng);
            const double original = v.norm();
            // two passes of classical Gram-Schmidt
            for (int pass = 0; pass < 2; ++pass) {
                for (int j = 0; j < k; ++j) v -= q.col(j).dot(v) * q.col(j);
            }
            const double residual = v.norm();
            if (residual > kPivotTolerance * original) {
                q.col(k) = v / residual;
                break;
            }
        }
    }
    return q;
}

TaskVectors realize_vectors(const TaskGeometry& geom, int dimension, Rng& rng) {
    validate_geometry(geom);
    const int t = geom.task_count();
    const int need = min_dimension(geom);
    if (dimension < need) {
        std::ostringstream msg;
        msg << "dimension " << dimension << " is too small for this geometry; need p >= " << need;
        throw DimensionError(msg.str(), need);
    }

    TaskVectors out{Eigen::MatrixXd(dimension, t)};
    if (is_uniform(geom)) {
        const double r = std::sqrt(geom.sq_norms(0));
        double sin_theta = 0.0;
        if (t > 1 && r > 0.0) {
            sin_theta = std::min(1.0, std::sqrt(geom.sq_dists(0, 1) / (2.0 * r * r)));
        }
        const double cos_theta = std::sqrt(std::max(0.0, 1.0 - sin_theta * sin_theta));
        const Eigen::MatrixXd frame = random_orthonormal_frame(dimension, t + 1, rng);
        for (int k = 0; k < t; ++k) {
            out.vectors.col(k) = r * (cos_theta * frame.col(0) + sin_theta * frame.col(k + 1));
        }
        return out;
    }

    // General case: factor the Gram matrix and embed the factor in a random frame.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(geom.gram());
    const int rank = geometry_rank(geom);
    const Eigen::MatrixXd frame = random_orthonormal_frame(dimension, rank, rng);
    Eigen::MatrixXd factor(rank, t);  // factor^T factor = gram
    for (int k = 0; k < rank; ++k) {
        const int idx = t - 1 - k;  // eigenvalues ascend
        const double lam = std::max(eig.eigenvalues()(idx), 0.0);
        factor.row(k) = std::sqrt(lam) * eig.eigenvectors().col(idx).transpose();
    }
    out.vectors = frame * factor;
    return out;
}

TaskGeometry measure_geometry(const TaskVectors& vecs) {
    const int t = vecs.task_count();
    TaskGeometry g{Eigen::VectorXd(t), Eigen::MatrixXd::Zero(t, t)};
    for (int i = 0; i < t; ++i) {
        g.sq_norms(i) = vecs.vectors.col(i).squaredNorm();
        for (int j = 0; j < i; ++j) {
            const double d = (vecs.vectors.col(i) - vecs.vectors.col(j)).squaredNorm();
            g.sq_dists(i, j) = d;
            g.sq_dists(j, i) = d;
        }
    }
    return g;
}

}  // namespace clsim
