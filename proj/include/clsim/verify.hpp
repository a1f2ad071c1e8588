#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "clsim/montecarlo.hpp"

namespace clsim {

enum class VerifySuite { quick, full };

VerifySuite parse_verify_suite(std::string_view text);

struct VerifyCell {
    int config_index = 0;
    std::string config;  // short description
    Metric metric = Metric::A;
    int task = 1;
    double mean = 0.0;
    double stderr_ = 0.0;
    double theory = 0.0;
    double z = 0.0;
    bool ok = true;
};

struct VerifyReport {
    std::vector<VerifyCell> cells;
    int failures = 0;
    int allowed_failures = 0;
    bool passed = true;

    const VerifyCell& worst() const;
};

/// The configurations a suite runs. Only settings where the closed forms are
/// exact expectations are drawn: identical task optima (any common norm), or
/// no rehearsal with arbitrary angle geometry. Always iid-fresh + padded.
std::vector<ExperimentSpec> verify_configs(VerifySuite suite);

/// Runs the agreement suite: a cell passes when |mean - theory| is within
/// 3 standard errors. The suite passes when at most ceil(1%) of cells fail.
VerifyReport run_verify(VerifySuite suite, const RunOptions& options);

void print_report(const VerifyReport& report, std::ostream& out);

}  // namespace clsim
