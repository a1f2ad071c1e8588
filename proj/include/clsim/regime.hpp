#pragma once

#include <string_view>

namespace clsim {

enum class Regime { Overparameterized, Underparameterized, Boundary };

/// Overparameterized iff p > m + 1, underparameterized iff m > p + 1.
constexpr Regime classify_samples(int dimension, long long samples) noexcept {
    if (dimension > samples + 1) return Regime::Overparameterized;
    if (samples > dimension + 1) return Regime::Underparameterized;
    return Regime::Boundary;
}

constexpr Regime classify_regime(int dimension, int samples, int rehearsal) noexcept {
    return classify_samples(dimension, static_cast<long long>(samples) + rehearsal);
}

std::string_view to_string(Regime regime);

}  // namespace clsim
