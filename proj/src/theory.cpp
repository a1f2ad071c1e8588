#include "clsim/theory.hpp"

#include <sstream>
#include <vector>

#include "clsim/errors.hpp"

namespace clsim {

namespace {

// Kahan-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double y = x - carry_;
        const double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

double total_of(const std::map<std::string, double>& terms) {
    CompensatedSum s;
    for (const auto& [name, value] : terms) s.add(value);
    return s.value();
}

void check_input(const TheoryInput& in, const TaskGeometry& geom) {
    std::ostringstream msg;
    if (in.tasks < 1) msg << "T must be at least 1";
    else if (in.samples < 1) msg << "n must be at least 1";
    else if (in.dimension < 1) msg << "p must be at least 1";
    else if (in.rehearsal < 0) msg << "s must be nonnegative";
    else if (!(in.sigma >= 0.0)) msg << "sigma must be nonnegative";
    else if (geom.task_count() < in.tasks) {
        msg << "geometry covers " << geom.task_count() << " tasks, need " << in.tasks;
    }
    if (!msg.str().empty()) throw ValidationError(msg.str());
}

Regime require_defined(const TheoryInput& in) {
    const Regime regime = classify_regime(in.dimension, in.samples, in.rehearsal);
    if (regime == Regime::Boundary) {
        std::ostringstream msg;
        msg << "closed forms are undefined at the boundary regime (p=" << in.dimension
            << ", n+s=" << in.samples + in.rehearsal << ")";
        throw UndefinedTheoryError(msg.str());
    }
    return regime;
}

// Everything the overparameterized branches share.
struct OverCommon {
    double lambda;
    double ratio;  // (n + s) / p = 1 - lambda
    double noise;  // p sigma^2 / (p - n - s - 1)
    std::vector<double> pow;  // lambda^0 .. lambda^T
};

OverCommon over_common(const TheoryInput& in, TheoryMutation mutation) {
    const double p = in.dimension;
    const double m = static_cast<double>(in.samples) + in.rehearsal;
    OverCommon c;
    c.lambda = mutation == TheoryMutation::lambda_without_rehearsal ? (p - in.samples) / p
                                                                     : (p - m) / p;
    c.ratio = 1.0 - c.lambda;
    c.noise = p * in.sigma * in.sigma / (p - m - 1.0);
    c.pow.resize(in.tasks + 1);
    c.pow[0] = 1.0;
    for (int k = 1; k <= in.tasks; ++k) c.pow[k] = c.pow[k - 1] * c.lambda;
    return c;
}

double under_noise(const TheoryInput& in) {
    const double p = in.dimension;
    const double m = static_cast<double>(in.samples) + in.rehearsal;
    return p * in.sigma * in.sigma / (m - p - 1.0);
}

}  // namespace

double contraction(int dimension, int samples, int rehearsal) {
    return (static_cast<double>(dimension) - samples - rehearsal) / dimension;
}

TheoryBreakdown theory_adaptation(const TheoryInput& in, const TaskGeometry& geom,
                                  TheoryMutation mutation) {
    check_input(in, geom);
    TheoryBreakdown out;
    out.regime = require_defined(in);
    out.lambda = contraction(in.dimension, in.samples, in.rehearsal);
    const int T = in.tasks;

    if (out.regime == Regime::Underparameterized) {
        out.terms["a_noise"] = under_noise(in);
    } else {
        const OverCommon c = over_common(in, mutation);
        out.lambda = c.lambda;
        CompensatedSum a1;
        for (int k = 1; k <= T; ++k) {
            a1.add(c.pow[T - k] * c.ratio * geom.sq_dists(k - 1, T - 1));
        }
        out.terms["decay"] = c.pow[T] * geom.sq_norms(T - 1);
        out.terms["term_A1"] = a1.value();
        out.terms["a_noise"] = (1.0 - c.pow[T]) * c.noise;
    }
    out.total = total_of(out.terms);
    return out;
}

TheoryBreakdown theory_memory(const TheoryInput& in, const TaskGeometry& geom,
                              TheoryMutation mutation) {
    check_input(in, geom);
    if (in.tasks < 2) throw UndefinedMetricError("memory error needs at least two tasks");
    TheoryBreakdown out;
    out.regime = require_defined(in);
    out.lambda = contraction(in.dimension, in.samples, in.rehearsal);
    const int T = in.tasks;
    const double scale = 1.0 / (T - 1);

    if (out.regime == Regime::Underparameterized) {
        CompensatedSum d;
        for (int k = 1; k < T; ++k) d.add(geom.sq_dists(T - 1, k - 1));
        out.terms["distance"] = scale * d.value();
    } else {
        const OverCommon c = over_common(in, mutation);
        out.lambda = c.lambda;
        out.u = Eigen::MatrixXd::Zero(T, T);
        CompensatedSum m1;
        for (int k = 1; k < T; ++k) {
            for (int j = k + 1; j <= T; ++j) {
                const double u = c.pow[T - k] - c.pow[j - k] + c.pow[T - j];
                out.u(k - 1, j - 1) = u;
                m1.add(c.ratio * u * geom.sq_dists(j - 1, k - 1));
            }
        }
        CompensatedSum m2;
        CompensatedSum noise;
        for (int i = 1; i < T; ++i) {
            m2.add((c.pow[T] - c.pow[i]) * geom.sq_norms(i - 1));
            noise.add(c.noise * (c.pow[i] - c.pow[T]));
        }
        const double sign = mutation == TheoryMutation::flipped_memory_noise ? -1.0 : 1.0;
        out.terms["term_M1"] = scale * m1.value();
        out.terms["term_M2"] = scale * m2.value();
        out.terms["m_noise"] = sign * scale * noise.value();
    }
    out.total = total_of(out.terms);
    return out;
}

TheoryBreakdown theory_generalization(const TheoryInput& in, const TaskGeometry& geom,
                                      TheoryMutation mutation) {
    check_input(in, geom);
    TheoryBreakdown out;
    out.regime = require_defined(in);
    out.lambda = contraction(in.dimension, in.samples, in.rehearsal);
    const int T = in.tasks;
    const double scale = 1.0 / T;

    if (out.regime == Regime::Underparameterized) {
        CompensatedSum d;
        for (int k = 1; k <= T; ++k) d.add(geom.sq_dists(T - 1, k - 1));
        out.terms["distance"] = scale * d.value();
        out.terms["g_noise"] = under_noise(in);
    } else {
        const OverCommon c = over_common(in, mutation);
        out.lambda = c.lambda;
        CompensatedSum g1;
        CompensatedSum g2;
        for (int k = 1; k <= T; ++k) {
            for (int j = 1; j <= T; ++j) {
                g1.add(c.ratio * c.pow[T - k] * geom.sq_dists(k - 1, j - 1));
            }
            g2.add(c.pow[T] * geom.sq_norms(k - 1));
        }
        out.terms["term_G1"] = scale * g1.value();
        out.terms["term_G2"] = scale * g2.value();
        out.terms["g_noise"] = c.noise * (1.0 - c.pow[T]);
    }
    out.total = total_of(out.terms);
    return out;
}

TwoTaskExpectations theory_two_task(int samples, int dimension, int rehearsal, double sigma,
                                    double sq_norm1, double sq_norm2, double sq_dist) {
    if (samples < 1 || dimension < 1 || rehearsal < 0 || !(sigma >= 0.0)) {
        throw ValidationError("invalid two-task configuration");
    }
    TwoTaskExpectations out;
    out.regime = classify_regime(dimension, samples, rehearsal);
    if (out.regime == Regime::Boundary) {
        throw UndefinedTheoryError("closed forms are undefined at the boundary regime");
    }
    const double p = dimension;
    const double m = static_cast<double>(samples) + rehearsal;
    const double var = sigma * sigma;

    if (out.regime == Regime::Underparameterized) {
        const double noise = p * var / (m - p - 1.0);
        out.adaptation = noise;
        out.memory = sq_dist;
        out.generalization = 0.5 * sq_dist + noise;
        return out;
    }
    const double lam = (p - m) / p;
    const double lam2 = lam * lam;
    out.adaptation = lam2 * sq_norm2 + lam * (m / p) * sq_dist + (1.0 - lam2) * p * var / (p - m - 1.0);
    out.memory = -m * (p - m) / (p * p) * sq_norm1 + (m / p) * sq_dist +
                 m * (p - m) * var / ((p - m - 1.0) * p);
    out.generalization = 0.5 * (1.0 - lam2) * sq_dist + 0.5 * lam2 * (sq_norm1 + sq_norm2) +
                         p * var * (1.0 - lam2) / (p - m - 1.0);
    return out;
}

namespace {

void check_range(int samples, int dimension) {
    if (dimension <= samples + 2) {
        std::ostringstream msg;
        msg << "no overparameterized rehearsal range: need p > n + 2 (p=" << dimension
            << ", n=" << samples << ")";
        throw RangeError(msg.str());
    }
}

int argmin(const std::vector<CurvePoint>& curve) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i].value < curve[best].value) best = i;
    }
    return curve[best].rehearsal;
}

}  // namespace

Extremum find_adaptation_turning_point(int tasks, int samples, int dimension, double sigma,
                                       const TaskGeometry& geom) {
    check_range(samples, dimension);
    Extremum out;
    const int last = dimension - samples - 2;
    out.curve.reserve(last + 1);
    for (int s = 0; s <= last; ++s) {
        const TheoryInput in{tasks, samples, dimension, s, sigma};
        out.curve.push_back({s, theory_adaptation(in, geom).total});
    }
    out.argmin = argmin(out.curve);
    return out;
}

Extremum find_memory_floor(int samples, int dimension, double sigma, double sq_norm1,
                           double sq_norm2, double sq_dist) {
    check_range(samples, dimension);
    Extremum out;
    const int last = dimension - samples - 2;
    out.curve.reserve(last + 1);
    for (int s = 0; s <= last; ++s) {
        out.curve.push_back(
            {s, theory_two_task(samples, dimension, s, sigma, sq_norm1, sq_norm2, sq_dist).memory});
    }
    out.argmin = argmin(out.curve);
    return out;
}

}  // namespace clsim
