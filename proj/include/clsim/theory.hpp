#pragma once

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

#include "clsim/geometry.hpp"
#include "clsim/regime.hpp"

namespace clsim {

/// Problem sizes for the closed forms. `tasks` is the horizon T being
/// evaluated; the geometry must cover at least that many tasks.
struct TheoryInput {
    int tasks = 1;
    int samples = 1;
    int dimension = 1;
    int rehearsal = 0;
    double sigma = 0.0;
};

/// Deliberate defects, used to check that the verification suite notices a
/// wrong formula. Never set outside of self-tests.
enum class TheoryMutation {
    none,
    lambda_without_rehearsal,  // lambda = (p - n) / p
    flipped_memory_noise,      // m_noise enters with the wrong sign
};

/// A closed-form expectation split into its named terms.
struct TheoryBreakdown {
    double total = 0.0;
    std::map<std::string, double> terms;
    double lambda = 0.0;
    Regime regime = Regime::Boundary;
    Eigen::MatrixXd u;  // memory only: u(k, j) for k < j, zero elsewhere

    double term(const std::string& name) const { return terms.at(name); }
};

/// (p - n - s) / p.
double contraction(int dimension, int samples, int rehearsal);

TheoryBreakdown theory_adaptation(const TheoryInput& in, const TaskGeometry& geom,
                                  TheoryMutation mutation = TheoryMutation::none);
/// Throws UndefinedMetricError for T = 1.
TheoryBreakdown theory_memory(const TheoryInput& in, const TaskGeometry& geom,
                              TheoryMutation mutation = TheoryMutation::none);
TheoryBreakdown theory_generalization(const TheoryInput& in, const TaskGeometry& geom,
                                      TheoryMutation mutation = TheoryMutation::none);

struct TwoTaskExpectations {
    double adaptation = 0.0;
    double memory = 0.0;
    double generalization = 0.0;
    Regime regime = Regime::Boundary;
};

/// Direct T = 2 forms, written independently of the general evaluators.
TwoTaskExpectations theory_two_task(int samples, int dimension, int rehearsal, double sigma,
                                    double sq_norm1, double sq_norm2, double sq_dist);

struct CurvePoint {
    int rehearsal;
    double value;
};

struct Extremum {
    int argmin = 0;
    std::vector<CurvePoint> curve;
};

/// Integer grid scan of the expected adaptation error over s in [0, p-n-2].
/// Ties go to the smallest s. Throws RangeError when p <= n + 2.
Extremum find_adaptation_turning_point(int tasks, int samples, int dimension, double sigma,
                                       const TaskGeometry& geom);

/// Integer grid scan of the two-task expected memory error over s in
/// [0, p-n-2]. Ties go to the smallest s. Throws RangeError when p <= n + 2.
Extremum find_memory_floor(int samples, int dimension, double sigma, double sq_norm1,
                           double sq_norm2, double sq_dist);

}  // namespace clsim
