// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "clsim/cli.hpp"
#include "clsim/montecarlo.hpp"
#include "clsim/solvers.hpp"
#include "clsim/theory.hpp"
#include "clsim/trainer.hpp"

using namespace clsim;

namespace {

// Tolerances
constexpr double kStderrBand = 3.0;
constexpr double kIdentityRel = 1e-12;
constexpr double kConstraintRel = 1e-8;
constexpr double kInvarianceAbs = 1e-10;
constexpr double kAc1Seconds = 60.0;
constexpr double kAc3Seconds = 1.0;
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int worker_threads() {
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::string fmt(double x, int digits = 6) {
    std::ostringstream s;
    s.precision(digits);
    s << x;
    return s.str();
}

bool rel_close(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

ExperimentSpec experiment(int T, int n, int p, int s, double sigma, const GeometrySpec& g, int reps) {
    ExperimentSpec e;
    e.config.tasks = T;
    e.config.samples = n;
    e.config.dimension = p;
    e.config.rehearsal = s;
    e.config.sigma = sigma;
    e.geometry = g;
    e.config.geometry = make_geometry(g, T);
    e.replications = reps;
    e.master_seed = kSeed;
    return e;
}

GeometrySpec mode(GeometryMode m, double theta = 0.0) { return {m, theta, {}, {}}; }

GeometrySpec two_task(double n1, double n2, double d) {
    GeometrySpec g{GeometryMode::explicit_matrix, 0.0, Eigen::VectorXd(2), Eigen::MatrixXd(2, 2)};
    g.sq_norms << n1, n2;
    g.sq_dists << 0.0, d, d, 0.0;
    return g;
}

TaskGeometry random_geometry(int T, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> scale(0.1, 2.0);
    Eigen::MatrixXd v(T + 2, T);
    for (int i = 0; i < v.size(); ++i) v.data()[i] = normal(rng);
    for (int k = 0; k < T; ++k) v.col(k) *= scale(rng) / std::sqrt(double(T + 2));
    return measure_geometry(TaskVectors{v});
}

double z_score(const AggregateRow& r) {
    const double diff = r.mean - *r.theory;
    if (r.stderr_ == 0.0) return std::abs(diff) <= 1e-12 ? 0.0 : INFINITY;
    return diff / r.stderr_;
}

// Every row with a closed form must sit within the stderr band.
Outcome agreement(const std::vector<AggregateRow>& rows, std::vector<std::string>& lines) {
    Outcome o;
    int bad = 0, cells = 0;
    for (const auto& r : rows) {
        if (!r.theory) continue;
        ++cells;
        const double z = z_score(r);
        const bool ok = std::abs(z) <= kStderrBand;
        if (!ok) ++bad;
        lines.push_back(std::string(to_string(r.metric)) + " t=" + std::to_string(r.task) +
                        "  mean " + fmt(r.mean) + " +- " + fmt(r.stderr_, 3) + "  theory " +
                        fmt(*r.theory) + "  z " + fmt(z, 3) + (ok ? "" : "  <-- outside"));
    }
    o.pass = bad == 0;
    o.detail = std::to_string(cells - bad) + "/" + std::to_string(cells) + " cells within " +
               fmt(kStderrBand) + " stderr";
    return o;
}

Outcome ac1(std::vector<std::string>& lines) {
    const auto start = Clock::now();
    const auto spec = experiment(3, 30, 120, 12, 0.1, mode(GeometryMode::angle, 30.0), 500);
    const auto rows = run_replications(spec, {worker_threads()});
    const double secs = seconds_since(start);
    Outcome o = agreement(rows, lines);
    o.pass = o.pass && secs <= kAc1Seconds;
    o.detail += ", " + fmt(secs, 3) + " s";
    if (!o.pass) {
        // Control run: the same configuration without rehearsal, where
        // buffer rows cannot pull the fit toward earlier optima.
        auto control = spec;
        control.config.rehearsal = 0;
        std::vector<std::string> ctl;
        const Outcome c = agreement(run_replications(control, {worker_threads()}), ctl);
        lines.push_back("analysis: the closed forms treat every stacked row as if it came from the");
        lines.push_back("current task's optimum. With dissimilar tasks (30 deg) and s > 0 the");
        lines.push_back("rehearsal rows carry w_i* != w_t*, so the fit is biased toward earlier");
        lines.push_back("optima and A sits above the prediction. Control with s = 0 on the same");
        lines.push_back("geometry and seed: " + c.detail + ".");
    }
    return o;
}

Outcome ac2(std::vector<std::string>& lines) {
    const auto spec = experiment(3, 60, 40, 30, 0.5, mode(GeometryMode::identical), 500);
    const auto rows = run_replications(spec, {worker_threads()});
    Outcome o = agreement(rows, lines);
    const double a3 = *theory_value(spec.config, Metric::A, 3);
    const bool exact = rel_close(a3, 10.0 / 49.0, 1e-14);
    o.pass = o.pass && exact;
    o.detail += ", closed-form A = " + fmt(a3, 8) + (exact ? " (= 10/49)" : " (expected 10/49)");
    return o;
}

Outcome ac3(std::vector<std::string>&) {
    const auto start = Clock::now();
    const auto e = find_adaptation_turning_point(8, 1000, 3000, 0.02, make_identical(8));
    const double secs = seconds_since(start);
    Outcome o;
    o.pass = e.argmin >= 850 && e.argmin <= 1150 && secs < kAc3Seconds;
    o.detail = "s* = " + std::to_string(e.argmin) + " (band [850, 1150]), " + fmt(secs, 3) + " s";
    return o;
}

Outcome ac4(std::vector<std::string>&) {
    std::mt19937_64 rng(kSeed);
    std::uniform_int_distribution<int> samples(1, 300), margin(2, 800);
    std::uniform_real_distribution<double> sigma(0.0, 2.0);
    int checked = 0, bad = 0;
    double worst = 0.0;
    while (checked < 100) {
        const int n = samples(rng);
        const int s = samples(rng) - 1;
        const int p = checked % 2 == 0 ? n + s + margin(rng) : n + s - margin(rng);
        if (p < 1 || classify_regime(p, n, s) == Regime::Boundary) continue;
        const double sg = sigma(rng);
        const TaskGeometry g = random_geometry(2, rng);
        const auto two = theory_two_task(n, p, s, sg, g.sq_norms(0), g.sq_norms(1), g.sq_dists(0, 1));
        const TheoryInput in{2, n, p, s, sg};
        const double pairs[3][2] = {{two.adaptation, theory_adaptation(in, g).total},
                                    {two.memory, theory_memory(in, g).total},
                                    {two.generalization, theory_generalization(in, g).total}};
        for (const auto& pr : pairs) {
            const double rel = std::abs(pr[0] - pr[1]) / std::max(1.0, std::abs(pr[1]));
            worst = std::max(worst, rel);
            if (!rel_close(pr[0], pr[1], kIdentityRel)) ++bad;
        }
        ++checked;
    }
    return {bad == 0, "100 configs x 3 metrics, worst relative gap " + fmt(worst, 3)};
}

Outcome ac5(std::vector<std::string>& lines) {
    Outcome o;
    const auto e = find_memory_floor(100, 2000, 0.01, 1.0, 1.0, 0.01);
    const int k = e.argmin;
    bool shape = k > 0 && k + 1 < static_cast<int>(e.curve.size());
    for (int i = 1; i < static_cast<int>(e.curve.size()) && shape; ++i) {
        const double d = e.curve[i].value - e.curve[i - 1].value;
        shape = i <= k ? d < 0.0 : d > 0.0;
    }
    const bool band = k >= 860 && k <= 920;

    const std::vector<int> grid{0, 270, 540, 890, 1150, 1400, 1650, 1890};
    SweepSpec sweep{experiment(2, 100, 2000, 0, 0.01, two_task(1, 1, 0.01), 200), SweepAxis::s, {}};
    for (int s : grid) sweep.values.push_back(s);
    const auto rows = run_sweep(sweep, {worker_threads()});
    std::vector<const AggregateRow*> m;
    for (const auto& r : rows) {
        if (!r.skipped && r.metric == Metric::M && r.task == 2) m.push_back(&r);
    }
    if (m.size() != grid.size()) return {false, "memory rows missing from the sweep"};
    for (std::size_t i = 0; i < m.size(); ++i) {
        lines.push_back("s=" + std::to_string(grid[i]) + "  M mean " + fmt(m[i]->mean) + " +- " +
                        fmt(m[i]->stderr_, 3) + "  theory " + fmt(*m[i]->theory));
    }
    const auto* lo = m[3];  // s = 890, nearest the closed-form minimizer
    auto above = [&](const AggregateRow* end) {
        const double gap = end->mean - lo->mean;
        return gap > kStderrBand * std::hypot(end->stderr_, lo->stderr_);
    };
    const bool mc = above(m.front()) && above(m.back());
    o.pass = shape && band && mc;
    o.detail = "closed-form s* = " + std::to_string(k) + (shape ? ", strictly down then up" : ", shape broken") +
               (mc ? "; simulated endpoints above the floor beyond 3 stderr"
                   : "; simulated ordering not resolved");
    return o;
}

enum class Trend { decreasing, increasing, down_then_up };

bool follows(const std::vector<double>& v, Trend t) {
    if (v.size() < 2) return false;
    int changes = 0;
    int prev = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const double d = v[i] - v[i - 1];
        const int sign = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
        if (sign == 0) return false;
        if (prev != 0 && sign != prev) ++changes;
        if (i == 1 && t == Trend::down_then_up && sign > 0) return false;
        prev = sign;
    }
    switch (t) {
        case Trend::decreasing: return changes == 0 && prev < 0;
        case Trend::increasing: return changes == 0 && prev > 0;
        case Trend::down_then_up: return changes == 1 && prev > 0;
    }
    return false;
}

Outcome ac6(std::vector<std::string>& lines) {
    constexpr int T = 8, n = 1000;
    constexpr double sigma = 0.02;
    constexpr int reps = 5;
    struct Panel {
        std::string name;
        Metric metric;
        int p;
        GeometryMode geom;
        Trend trend;
        int s_max;
        std::vector<int> mc_points;
    };
    const std::vector<Panel> panels{
        {"A vs s, p=3000, identical (overparameterized)", Metric::A, 3000, GeometryMode::identical,
         Trend::down_then_up, 3000 - n - 2, {0, 1000, 1900}},
        {"A vs s, p=900, identical (underparameterized)", Metric::A, 900, GeometryMode::identical,
         Trend::decreasing, 3000, {0, 500, 1000}},
        {"G vs s, p=3000, orthogonal (overparameterized)", Metric::G, 3000, GeometryMode::orthogonal,
         Trend::increasing, 3000 - n - 2, {0, 1000, 1900}},
        {"G vs s, p=900, orthogonal (underparameterized)", Metric::G, 900, GeometryMode::orthogonal,
         Trend::decreasing, 3000, {0, 500, 1000}},
    };
    Outcome o;
    int shapes_ok = 0, cells = 0, cells_ok = 0;
    for (const auto& panel : panels) {
        const TaskGeometry geom = make_geometry(mode(panel.geom), T);
        std::vector<double> curve;
        for (int s = 0; s <= panel.s_max; ++s) {
            const TheoryInput in{T, n, panel.p, s, sigma};
            curve.push_back(panel.metric == Metric::A ? theory_adaptation(in, geom).total
                                                      : theory_generalization(in, geom).total);
        }
        const bool shape = follows(curve, panel.trend);
        shapes_ok += shape;
        lines.push_back(panel.name + ": closed-form shape " + (shape ? "ok" : "WRONG"));

        SweepSpec sweep{experiment(T, n, panel.p, 0, sigma, mode(panel.geom), reps), SweepAxis::s, {}};
        for (int s : panel.mc_points) sweep.values.push_back(s);
        for (const auto& r : run_sweep(sweep, {worker_threads()})) {
            if (r.skipped || r.metric != panel.metric || r.task != T || !r.theory) continue;
            ++cells;
            const double z = z_score(r);
            const bool ok = std::abs(z) <= kStderrBand;
            cells_ok += ok;
            lines.push_back("    s=" + fmt(*r.axis_value) + "  mean " + fmt(r.mean) + " +- " +
                            fmt(r.stderr_, 3) + "  theory " + fmt(*r.theory) + "  z " + fmt(z, 3) +
                            (ok ? "" : "  <-- outside"));
        }
    }
    o.pass = shapes_ok == static_cast<int>(panels.size()) && cells_ok == cells;
    o.detail = std::to_string(shapes_ok) + "/" + std::to_string(panels.size()) +
               " closed-form shapes, " + std::to_string(cells_ok) + "/" + std::to_string(cells) +
               " simulated points within 3 stderr (R=" + std::to_string(reps) + ")";
    if (cells_ok != cells) {
        lines.push_back("analysis: points outside the band are dissimilar-task runs with s > 0,");
        lines.push_back("where rehearsal rows bias the fit toward earlier optima (see AC1).");
    }
    return o;
}

Outcome ac7(std::vector<std::string>&) {
    std::mt19937_64 rng(kSeed);
    std::normal_distribution<double> normal;
    auto gaussian = [&](int r, int c) {
        Eigen::MatrixXd a(r, c);
        for (int i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
        return a;
    };
    int constraint_bad = 0, perturb_bad = 0, invariance_bad = 0;
    double worst_residual = 0.0, worst_shift = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
        const int p = 10 + inst % 71;
        const int m = 1 + (inst * 7) % (p - 2);
        const Eigen::MatrixXd a = gaussian(m, p);
        const Eigen::VectorXd b = gaussian(m, 1);
        const Eigen::VectorXd prev = gaussian(p, 1);
        const Eigen::VectorXd w = fit_min_norm(a, b, prev);
        const double residual = (a * w - b).norm() / (1.0 + b.norm());
        worst_residual = std::max(worst_residual, residual);
        constraint_bad += residual > kConstraintRel;
        const double base = (w - prev).norm();
        const Eigen::MatrixXd gram = a * a.transpose();
        for (int k = 0; k < 20; ++k) {
            // random direction projected onto the null space of A
            const Eigen::VectorXd r = gaussian(p, 1);
            Eigen::VectorXd z = r - a.transpose() * gram.ldlt().solve(a * r);
            z *= std::exp(normal(rng)) / z.norm();
            perturb_bad += !((w + z - prev).norm() > base);
        }

        const int q = 3 + inst % 20;
        const int rows = q + 2 + (inst * 3) % 40;
        const Eigen::MatrixXd big = gaussian(rows, q);
        const Eigen::VectorXd y = gaussian(rows, 1);
        double cond = 0.0;
        const Eigen::VectorXd w1 = fit_step(big, y, gaussian(q, 1), false, cond);
        const Eigen::VectorXd w2 = fit_step(big, y, 100.0 * gaussian(q, 1), false, cond);
        worst_shift = std::max(worst_shift, (w1 - w2).norm());
        invariance_bad += (w1 - w2).norm() > kInvarianceAbs;
    }
    return {constraint_bad == 0 && perturb_bad == 0 && invariance_bad == 0,
            "worst constraint residual " + fmt(worst_residual, 3) + ", " +
                std::to_string(4000 - perturb_bad) + "/4000 perturbations farther, worst prev-shift " +
                fmt(worst_shift, 3)};
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

Outcome ac8(std::vector<std::string>&) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "clsim_acceptance";
    fs::create_directories(dir);
    const std::vector<std::vector<std::string>> commands{
        {"simulate", "--T", "3", "--n", "30", "--p", "120", "--s", "12", "--sigma", "0.1", "--mode",
         "angle", "--theta", "30", "--reps", "40", "--seed", "7"},
        {"sweep", "--axis", "s", "--values", "0,6,12", "--T", "3", "--n", "30", "--p", "120",
         "--sigma", "0.1", "--reps", "16", "--seed", "7"},
    };
    int compared = 0, differ = 0;
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::string reference;
        int run_index = 0;
        for (const char* threads : {"1", "1", "2", "8"}) {
            const fs::path out = dir / ("run_" + std::to_string(c) + "_" + std::to_string(run_index++) + ".csv");
            auto args = commands[c];
            args.insert(args.end(), {"--threads", threads, "--out", out.string()});
            std::ostringstream sink, err;
            if (cli::run(args, sink, err) != cli::kExitOk) return {false, "run failed: " + err.str()};
            const std::string bytes = slurp(out);
            if (reference.empty()) {
                reference = bytes;
            } else {
                ++compared;
                differ += bytes != reference;
            }
        }
    }
    return {differ == 0, std::to_string(compared - differ) + "/" + std::to_string(compared) +
                             " repeat/thread variants byte-identical"};
}

Outcome ac9(std::vector<std::string>&) {
    std::mt19937_64 rng(kSeed + 9);
    std::uniform_int_distribution<int> tasks(1, 6), samples(1, 60), margin(2, 120);
    std::uniform_real_distribution<double> sigma(0.0, 1.0);
    int checked = 0, bad = 0;
    while (checked < 50) {
        const int T = tasks(rng);
        const int n = samples(rng);
        const int s = samples(rng) - 1;
        const int p = checked % 2 == 0 ? n + s + margin(rng) : n + s - margin(rng);
        if (p < 1 || classify_regime(p, n, s) == Regime::Boundary) continue;
        const double sg = sigma(rng);
        const TaskGeometry g = random_geometry(T, rng);
        const TaskGeometry g4 = g.scaled(4.0);
        const TheoryInput in{T, n, p, s, sg};
        const TheoryInput in2{T, n, p, s, 2.0 * sg};
        bad += !rel_close(theory_adaptation(in2, g4).total, 4.0 * theory_adaptation(in, g).total, kIdentityRel);
        bad += !rel_close(theory_generalization(in2, g4).total, 4.0 * theory_generalization(in, g).total,
                          kIdentityRel);
        if (T >= 2) {
            bad += !rel_close(theory_memory(in2, g4).total, 4.0 * theory_memory(in, g).total, kIdentityRel);
        }
        ++checked;
    }
    return {bad == 0, "50 configs, " + std::to_string(bad) + " totals off by more than 1e-12"};
}

Outcome ac10(std::vector<std::string>& lines) {
    auto verify = [&](const char* mutation) {
        std::ostringstream out, err;
        const std::string threads = std::to_string(worker_threads());
        const int code =
            cli::run({"verify", "--suite", "quick", "--threads", threads, "--mutation", mutation}, out, err);
        lines.push_back(std::string("mutation ") + mutation + " -> exit " + std::to_string(code));
        return code;
    };
    const int clean = verify("none");
    const int lam = verify("lambda");
    const int noise = verify("mnoise");
    const bool pass = clean == cli::kExitOk && lam == cli::kExitVerifyFailed &&
                      noise == cli::kExitVerifyFailed;
    return {pass, "clean " + std::to_string(clean) + ", lambda " + std::to_string(lam) + ", m_noise " +
                      std::to_string(noise) + " (want 0, 5, 5)"};
}

}  // namespace

int main() {
    struct Criterion {
        const char* id;
        const char* title;
        std::function<Outcome(std::vector<std::string>&)> run;
    };
    const std::vector<Criterion> criteria{
        {"AC1", "overparameterized agreement, T=3 n=30 s=12 p=120 theta=30", ac1},
        {"AC2", "underparameterized agreement, T=3 n=60 s=30 p=40", ac2},
        {"AC3", "adaptation turning point, T=8 n=1000 p=3000", ac3},
        {"AC4", "two-task special forms", ac4},
        {"AC5", "memory floor shape and simulated ordering", ac5},
        {"AC6", "full-scale qualitative shapes", ac6},
        {"AC7", "solver properties", ac7},
        {"AC8", "CSV determinism across repeats and threads", ac8},
        {"AC9", "degree-2 homogeneity", ac9},
        {"AC10", "verify suite catches broken formulas", ac10},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        std::vector<std::string> lines;
        Outcome o;
        const auto start = Clock::now();
        try {
            o = c.run(lines);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << c.id << (o.pass ? " PASS " : " FAIL ") << c.title << " :: " << o.detail << "  ["
                  << fmt(seconds_since(start), 3) << " s]\n";
        for (const auto& l : lines) std::cout << "    " << l << '\n';
        std::cout.flush();
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
    return failed == 0 ? 0 : 1;
}
