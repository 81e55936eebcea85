#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace ehdn {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Bad or inconsistent input data (instance files, parameter files, CLI values).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A model that cannot be built or solved as posed (infeasible risk target,
/// non-PSD covariance, structural dispatch infeasibility, ...).
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Optimization backend failure (iteration/node limits, numerical breakdown).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename... Args>
[[noreturn]] void fail_data(fmt::format_string<Args...> f, Args&&... args) {
    throw DataError(fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
[[noreturn]] void fail_model(fmt::format_string<Args...> f, Args&&... args) {
    throw ModelError(fmt::format(f, std::forward<Args>(args)...));
}

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

/// Standard normal CDF.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline bool nearly_equal(double a, double b, double rel = 1e-9, double abs = 1e-12) {
    return std::fabs(a - b) <= std::max(abs, rel * std::max(std::fabs(a), std::fabs(b)));
}

}  // namespace ehdn
