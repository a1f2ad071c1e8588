#include <doctest.h>

#include <cmath>

#include "clsim/errors.hpp"
#include "clsim/metrics.hpp"

using namespace clsim;

namespace {

Trajectory trajectory(std::initializer_list<Eigen::VectorXd> snaps) {
    Trajectory t;
    for (const auto& s : snaps) t.snapshots.push_back(s);
    return t;
}

Eigen::VectorXd v2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("adaptation examples") {
    const TaskVectors vecs{Eigen::MatrixXd::Identity(2, 1)};
    CHECK(adaptation_error(trajectory({v2(1, 0)}), vecs, 1) == 0.0);
    CHECK(adaptation_error(trajectory({v2(0, 0)}), vecs, 1) == 1.0);
    CHECK(adaptation_error(trajectory({v2(2, 0)}), vecs, 1) == 1.0);
}

TEST_CASE("generalization examples") {
    const TaskVectors orth{Eigen::MatrixXd::Identity(2, 2)};
    const auto traj = trajectory({v2(0.3, 0.1), v2(0, 0)});
    CHECK(generalization_error(traj, orth, 1) == adaptation_error(traj, orth, 1));
    CHECK(generalization_error(traj, orth, 2) == 1.0);

    TaskVectors same{Eigen::MatrixXd::Zero(2, 2)};
    same.vectors.row(0).setOnes();
    CHECK(generalization_error(trajectory({v2(1, 0), v2(1, 0)}), same, 2) == 0.0);
}

TEST_CASE("memory examples") {
    TaskVectors same{Eigen::MatrixXd::Zero(2, 3)};
    same.vectors.row(0).setOnes();
    const auto flat = trajectory({v2(0.5, 0.5), v2(0.5, 0.5), v2(0.5, 0.5)});
    CHECK(memory_error(flat, same, 3) == 0.0);

    const TaskVectors orth{Eigen::MatrixXd::Identity(2, 2)};
    const double r = std::sqrt(0.3);
    CHECK(memory_error(trajectory({v2(1, 0), v2(1 + r, 0)}), orth, 2) == doctest::Approx(0.3));
    // task 1 is fit better after task 2 than it was at the time
    CHECK(memory_error(trajectory({v2(0, 0), v2(0.9, 0)}), orth, 2) < 0.0);
    CHECK_THROWS_AS(memory_error(flat, same, 1), UndefinedMetricError);
}

TEST_CASE("compute_errors agrees with the per-metric functions (property)") {
    Rng rng = make_rng(9);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
        const int t = 1 + trial % 5;
        const int p = 7;
        TaskVectors vecs{Eigen::MatrixXd(p, t)};
        Trajectory traj;
        for (int i = 0; i < vecs.vectors.size(); ++i) vecs.vectors.data()[i] = normal(rng);
        for (int k = 0; k < t; ++k) {
            Eigen::VectorXd w(p);
            for (int i = 0; i < p; ++i) w(i) = normal(rng);
            traj.snapshots.push_back(w);
        }
        const ErrorReport r = compute_errors(traj, vecs);
        for (int k = 1; k <= t; ++k) {
            const double a = adaptation_error(traj, vecs, k);
            const double g = generalization_error(traj, vecs, k);
            CHECK(std::abs(r.adaptation(k - 1) - a) <= 1e-12 * (1 + a));
            CHECK(std::abs(r.generalization(k - 1) - g) <= 1e-12 * (1 + g));
            CHECK(r.adaptation(k - 1) == r.estimation_errors(k - 1, k - 1));
            if (k == 1) {
                CHECK(std::isnan(r.memory(0)));
                continue;
            }
            const double m = memory_error(traj, vecs, k);
            CHECK(std::abs(r.memory(k - 1) - m) <= 1e-12 * (1 + std::abs(m)));
            double lhs = 0.0;
            for (int i = 0; i < k - 1; ++i) {
                lhs += r.estimation_errors(k - 1, i) - r.estimation_errors(i, i);
            }
            CHECK(std::abs((k - 1) * r.memory(k - 1) - lhs) <= 1e-12 * (1 + std::abs(lhs)));
        }
    }
}

TEST_CASE("task index range") {
    const TaskVectors vecs{Eigen::MatrixXd::Identity(2, 1)};
    const auto traj = trajectory({v2(0, 0)});
    CHECK_THROWS_AS(adaptation_error(traj, vecs, 0), ValidationError);
    CHECK_THROWS_AS(adaptation_error(traj, vecs, 2), ValidationError);
}
