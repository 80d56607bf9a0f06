#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace sbe {

/// Every grid step, tolerance and cap used by the verification suites.
/// Tests and the CLI read these values instead of hard-coding their own.
struct VerificationConfig {
    // Stein kernel grids
    double stein_x_min = -5.0;
    double stein_x_max = 5.0;
    double stein_w_min = -10.0;
    double stein_w_max = 10.0;
    double stein_step = 0.01;
    double stein_residual_tol = 1e-12;
    double stein_bound_slack = 1e-12;
    double helping_x_min = 1.0;
    double helping_x_max = 10.0;
    double helping_x_step = 0.05;
    double helping_w_min = -10.0;
    double helping_w_max = 30.0;
    double helping_w_step = 0.01;
    double fd_step = 1e-5;
    double fd_tol = 1e-6;
    double fd_gap = 1e-3;  // distance from w = x excluded from the finite-difference check

    // enumeration and cost caps
    std::uint64_t enumeration_cap = 2'000'000;
    std::uint64_t kernel_call_cap = 10'000'000;

    // Monte Carlo
    std::size_t min_reps = 1000;
    std::size_t chunk_size = 1024;

    // sup_x grid: {0, step, ..., linear_max} plus log points up to log_max
    double sup_grid_step = 0.05;
    double sup_grid_linear_max = 10.0;
    double sup_grid_log_max = 40.0;
    std::size_t sup_grid_log_points = 20;

    // U-statistic identities
    double identity_rel_tol = 1e-10;

    // calibration
    double calibration_headroom = 1.1;
    double max_calibration_drift = 2.0;

    // scaling study
    std::vector<std::size_t> scaling_n_grid{25, 50, 100, 200, 400};
    std::size_t scaling_reps = 200'000;
    double scaling_max_spread = 3.0;
    double scaling_se_slack = 2.0;
};

inline const VerificationConfig& default_config() {
    static const VerificationConfig cfg{};
    return cfg;
}

/// {0, step, ..., linear_max} followed by log-spaced points in (linear_max, log_max].
/// `density` multiplies the number of points (used by the refinement check).
inline std::vector<double> sup_x_grid(const VerificationConfig& cfg, std::size_t density = 1, double grid_max = 0.0) {
    std::vector<double> xs;
    const double log_max = grid_max > 0 ? grid_max : cfg.sup_grid_log_max;
    const double lin_max = std::min(cfg.sup_grid_linear_max, log_max);
    const double step = cfg.sup_grid_step / static_cast<double>(density);
    const auto count = static_cast<std::size_t>(lin_max / step + 0.5);
    for (std::size_t k = 0; k <= count; ++k) xs.push_back(static_cast<double>(k) * step);
    if (log_max > lin_max) {
        const std::size_t pts = cfg.sup_grid_log_points * density;
        const double a = std::log(lin_max);
        const double b = std::log(log_max);
        for (std::size_t k = 1; k <= pts; ++k)
            xs.push_back(std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(pts)));
    }
    return xs;
}

}  // namespace sbe
