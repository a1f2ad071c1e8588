#include "clsim/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "clsim/errors.hpp"

namespace clsim {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw ValidationError("not a number: '" + text + "'");
    }
    return value;
}

namespace {

std::string optional_text(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{};
}

Regime parse_regime(const std::string& text) {
    if (text == "Overparameterized") return Regime::Overparameterized;
    if (text == "Underparameterized") return Regime::Underparameterized;
    if (text == "Boundary") return Regime::Boundary;
    throw ValidationError("unknown regime '" + text + "'");
}

Metric parse_metric(const std::string& text) {
    if (text == "A") return Metric::A;
    if (text == "M") return Metric::M;
    if (text == "G") return Metric::G;
    throw ValidationError("unknown metric '" + text + "'");
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        out << optional_text(r.axis_value) << ',';
        if (r.skipped) {
            out << ",,,,," << to_string(r.regime);
        } else {
            out << to_string(r.metric) << ',' << r.task << ',' << format_double(r.mean) << ','
                << format_double(r.stderr_) << ',' << optional_text(r.theory) << ','
                << to_string(r.regime);
        }
        out << ',' << r.replications << ',' << r.master_seed << '\n';
    }
}

std::vector<AggregateRow> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw ValidationError("CSV header does not match the expected schema");
    }
    std::vector<AggregateRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 9) throw ValidationError("CSV row has " + std::to_string(f.size()) + " fields");
        AggregateRow r;
        if (!f[0].empty()) r.axis_value = parse_double(f[0]);
        r.skipped = f[1].empty();
        if (!r.skipped) {
            r.metric = parse_metric(f[1]);
            r.task = std::stoi(f[2]);
            r.mean = parse_double(f[3]);
            r.stderr_ = parse_double(f[4]);
            if (!f[5].empty()) r.theory = parse_double(f[5]);
        }
        r.regime = parse_regime(f[6]);
        r.replications = std::stoi(f[7]);
        r.master_seed = std::stoull(f[8]);
        rows.push_back(r);
    }
    return rows;
}

namespace {

struct Point {
    double x;
    double mean;
    double err;
    std::optional<double> theory;
};

// Either a plotted point or a gap.
using Slot = std::optional<Point>;

std::string num(double v) {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s.setf(std::ios::fixed);
    s.precision(2);
    s << v;
    return s.str();
}

std::string tick_label(double v) {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s.precision(4);
    s << v;
    return s.str();
}

}  // namespace

std::string render_svg(const std::vector<AggregateRow>& rows, Metric metric, int task,
                       SweepAxis axis, const std::string& title) {
    const bool log_x = axis == SweepAxis::p;
    std::vector<Slot> slots;
    for (const auto& r : rows) {
        if (!r.axis_value) continue;
        if (r.skipped) {
            slots.emplace_back(std::nullopt);
        } else if (r.metric == metric && r.task == task) {
            double x = *r.axis_value;
            if (log_x) x = std::log10(std::max(x, 1e-300));
            slots.emplace_back(Point{x, r.mean, r.stderr_, r.theory});
        }
    }

    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const auto& s : slots) {
        if (!s) continue;
        xmin = std::min(xmin, s->x);
        xmax = std::max(xmax, s->x);
        ymin = std::min(ymin, s->mean - s->err);
        ymax = std::max(ymax, s->mean + s->err);
        if (s->theory) {
            ymin = std::min(ymin, *s->theory);
            ymax = std::max(ymax, *s->theory);
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    if (xmax - xmin <= 0.0) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax - ymin <= 0.0) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

    std::ostringstream svg;
    svg.imbue(std::locale::classic());
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title
        << "</text>\n";
    svg << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        svg << "<text x=\"" << num(px(xv)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
            << tick_label(log_x ? std::pow(10.0, xv) : xv) << "</text>\n";
        svg << "<text x=\"" << L - 6 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">"
            << tick_label(yv) << "</text>\n";
    }
    svg << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
        << to_string(axis) << (log_x ? " (log scale)" : "") << "</text>\n";
    svg << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
        << ")\" text-anchor=\"middle\">" << to_string(metric) << " at t=" << task << "</text>\n";

    // theory curve, broken at gaps and at points without a closed form
    std::string path;
    bool pen = false;
    for (const auto& s : slots) {
        if (!s || !s->theory) {
            pen = false;
            continue;
        }
        path += (pen ? " L " : " M ") + num(px(s->x)) + " " + num(py(*s->theory));
        pen = true;
    }
    if (!path.empty()) {
        svg << "<path d=\"" << path << "\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\"/>\n";
    }
    path.clear();
    pen = false;
    for (const auto& s : slots) {
        if (!s) {
            pen = false;
            continue;
        }
        path += (pen ? " L " : " M ") + num(px(s->x)) + " " + num(py(s->mean));
        pen = true;
    }
    if (!path.empty()) {
        svg << "<path d=\"" << path
            << "\" fill=\"none\" stroke=\"#2c3e50\" stroke-dasharray=\"4 3\"/>\n";
    }
    for (const auto& s : slots) {
        if (!s) continue;
        const double x = px(s->x);
        svg << "<line x1=\"" << num(x) << "\" y1=\"" << num(py(s->mean - s->err)) << "\" x2=\""
            << num(x) << "\" y2=\"" << num(py(s->mean + s->err)) << "\" stroke=\"#2c3e50\"/>\n";
        svg << "<circle cx=\"" << num(x) << "\" cy=\"" << num(py(s->mean))
            << "\" r=\"3\" fill=\"#2c3e50\"/>\n";
    }
    svg << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 4
        << "\" text-anchor=\"end\" fill=\"#c0392b\">closed form</text>\n";
    svg << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 20
        << "\" text-anchor=\"end\" fill=\"#2c3e50\">simulation (mean +- stderr)</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace clsim
