#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "clsim/montecarlo.hpp"

namespace clsim {

inline constexpr const char* kCsvHeader = "axis_value,metric,task,mean,stderr,theory,regime,reps,seed";

/// Shortest-exact decimal text with 17 significant digits, independent of
/// the C++ or C locale.
std::string format_double(double value);

/// Parses text written by format_double (or any plain decimal). Throws
/// ValidationError on trailing garbage.
double parse_double(const std::string& text);

void write_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

/// Reads rows written by write_csv. Skipped rows come back with `skipped`
/// set and no reason.
std::vector<AggregateRow> read_csv(std::istream& in);

/// Line chart of one metric at one task index against the swept axis:
/// empirical means with +-1 stderr bars and the closed-form curve. Skipped
/// axis values break both lines. The x axis is log10 for p sweeps.
std::string render_svg(const std::vector<AggregateRow>& rows, Metric metric, int task,
                       SweepAxis axis, const std::string& title);

}  // namespace clsim
