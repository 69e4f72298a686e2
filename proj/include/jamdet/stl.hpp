#pragma once

// Loess smoothing and STL (seasonal-trend decomposition based on Loess).
//
// The decomposition follows the classic Cleveland et al. inner/outer loop:
// cycle-subseries smoothing, a low-pass filter (moving averages of length
// period, period and 3 followed by Loess), and trend smoothing of the
// deseasonalized series. Loess windows truncate at the series edges, and
// `jump` > 1 evaluates the fit every `jump` points with linear interpolation
// in between.

#include <cstddef>
#include <span>
#include <vector>

namespace jamdet {

struct LoessParams {
    std::size_t span = 3;
    int degree = 1;  // 0: local constant, 1: local linear
    std::size_t jump = 1;
    // empty, or one weight in [0, 1] per input point
    std::span<const double> robustness_weights;
};

/// Smoothed value of every point. Throws ConfigError on invalid params and
/// DomainError on non-finite input.
std::vector<double> loess_smooth(std::span<const double> series, const LoessParams& params);

/// Local fit evaluated at an arbitrary (possibly fractional or out-of-range)
/// 0-based position using the window [left, right] (inclusive). Returns false
/// when every weight in the window is zero.
bool loess_fit_at(std::span<const double> series, std::size_t span, int degree, double position, std::size_t left,
                  std::size_t right, std::span<const double> robustness_weights, double& value);

struct StlParams {
    std::size_t period = 1024;
    std::size_t seasonal_span = 0;  // 0: periodic, spans every cycle-subseries point
    std::size_t trend_span = 0;     // 0: smallest odd >= 1.5 * period
    std::size_t lowpass_span = 0;   // 0: smallest odd >= period
    int seasonal_degree = 0;
    int trend_degree = 1;
    int lowpass_degree = 1;
    std::size_t seasonal_jump = 1;
    std::size_t trend_jump = 1;
    std::size_t lowpass_jump = 1;
    int inner_iterations = 2;
    int outer_iterations = 0;

    /// Copy with defaults filled in for a series of length n.
    StlParams resolved(std::size_t n) const;
};

/// Throws ConfigError for invalid parameters or a series shorter than two periods.
void validate(const StlParams& params, std::size_t series_length);

struct StlDecomposition {
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> residual;
    std::vector<double> robustness_weights;
};

StlDecomposition stl_decompose(std::span<const double> series, const StlParams& params);

/// trend + seasonal: the part of the signal explained by the decomposition.
std::vector<double> reconstruct(const StlDecomposition& decomposition);

/// sqrt(mean((original - reconstructed)^2)). Throws DomainError on length mismatch or empty input.
double reconstruction_rmse(std::span<const double> original, std::span<const double> reconstructed);

}  // namespace jamdet
