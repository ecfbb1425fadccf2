#pragma once

// Hurst exponent estimation from a raw series by three methods:
//  - R/S analysis: non-overlapping subseries per window size, mean rescaled
//    range per window, OLS slope of log(R/S) on log(window).
//  - Rescaled-range regression: fixed block starts, ranges of mean-adjusted
//    partial sums at a schedule of lags, OLS slope of log(mean R/S) on
//    log(lag).
//  - Local Whittle: semiparametric minimization of the profiled Whittle
//    objective against the spectral template c * lambda^{1-2H} over the
//    lowest m Fourier frequencies of the periodogram.
//
// Estimates falling outside (0,1) are reported as-is with a warning flag,
// never clamped here; the mortality pipeline applies its own model clamp.

#include <cmath>
#include <complex>
#include <cstddef>
#include <ostream>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "errors.hpp"

namespace fracmort {

enum class hurst_method { rs_analysis, rescaled_range, local_whittle };

inline const char* to_string(hurst_method m) {
    switch (m) {
        case hurst_method::rs_analysis: return "rs-analysis";
        case hurst_method::rescaled_range: return "rescaled-range";
        default: return "local-whittle";
    }
}

inline hurst_method hurst_method_from_string(const std::string& name) {
    if (name == "rs-analysis" || name == "rs") return hurst_method::rs_analysis;
    if (name == "rescaled-range" || name == "rr") return hurst_method::rescaled_range;
    if (name == "local-whittle" || name == "whittle") return hurst_method::local_whittle;
    throw invalid_argument_error("hurst", "unknown Hurst estimation method '" + name + "'");
}

struct HurstEstimate {
    hurst_method method = hurst_method::rs_analysis;
    double value = 0.0;
    std::size_t n_points = 0;    // regression point count, or bandwidth m for Whittle
    std::vector<std::pair<double, double>> diagnostics;   // (scale, statistic)
    bool out_of_range = false;   // true when value falls outside (0,1)
    double significance = 0.0;   // 1/sqrt(series length) slope-error heuristic
};

// Power-of-two window/lag schedule: 8, 16, ... up to floor(length/2).
inline std::vector<std::size_t> default_window_sizes(std::size_t length) {
    std::vector<std::size_t> sizes;
    for (std::size_t n = 8; n <= length / 2; n <<= 1) sizes.push_back(n);
    return sizes;
}

namespace detail {

inline double ols_slope(const std::vector<std::pair<double, double>>& points) {
    const double n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : points) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [x, y] : points) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    return sxy / sxx;
}

inline bool negligible_sd(double sd, double mean) {
    return !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
}

inline HurstEstimate regression_estimate(hurst_method method,
                                         std::vector<std::pair<double, double>> scale_stats,
                                         std::size_t series_length) {
    if (scale_stats.size() < 2)
        throw insufficient_data_error(
            "hurst", "fewer than 2 usable scales survive; series too short or degenerate");
    std::vector<std::pair<double, double>> log_points;
    log_points.reserve(scale_stats.size());
    for (const auto& [scale, stat] : scale_stats)
        log_points.emplace_back(std::log(scale), std::log(stat));
    HurstEstimate est;
    est.method = method;
    est.value = ols_slope(log_points);
    est.n_points = scale_stats.size();
    est.diagnostics = std::move(scale_stats);
    est.out_of_range = !(est.value > 0.0 && est.value < 1.0);
    est.significance = 1.0 / std::sqrt(static_cast<double>(series_length));
    return est;
}

} // namespace detail

// R/S analysis: split the series into d = floor(L/n) non-overlapping
// subseries per window size n (n >= 8, d >= 2), compute the range of the
// mean-adjusted cumulative sum over each subseries divided by its population
// standard deviation, average over subseries, regress on log n.
inline HurstEstimate estimate_rs_analysis(const std::vector<double>& series,
                                          std::vector<std::size_t> window_sizes = {}) {
    const std::size_t length = series.size();
    if (length < 16)
        throw insufficient_data_error("hurst", "R/S analysis requires at least 16 observations");
    if (window_sizes.empty()) window_sizes = default_window_sizes(length);

    std::vector<std::pair<double, double>> scale_stats;
    for (std::size_t n : window_sizes) {
        const std::size_t d = n > 0 ? length / n : 0;
        if (n < 8 || d < 2) continue;
        double total = 0.0;
        std::size_t used = 0;
        for (std::size_t m = 0; m < d; ++m) {
            const double* block = series.data() + m * n;
            double mean = 0.0;
            for (std::size_t k = 0; k < n; ++k) mean += block[k];
            mean /= static_cast<double>(n);
            double cum = 0.0, mx = -1e300, mn = 1e300, sq = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                cum += block[k] - mean;
                mx = std::max(mx, cum);
                mn = std::min(mn, cum);
                sq += (block[k] - mean) * (block[k] - mean);
            }
            const double sd = std::sqrt(sq / static_cast<double>(n));
            if (detail::negligible_sd(sd, mean)) continue;
            total += (mx - mn) / sd;
            ++used;
        }
        if (used == 0) continue;
        scale_stats.emplace_back(static_cast<double>(n), total / static_cast<double>(used));
    }
    return detail::regression_estimate(hurst_method::rs_analysis, std::move(scale_stats), length);
}

// Rescaled-range regression over fixed block starts: K = max(2, min(64, N/4))
// starts spaced floor(N/K) apart; at each lag r the range of the
// mean-adjusted partial sums (with the zero anchor included) over the block
// standard deviation is averaged over all starts with start + r <= N.
inline HurstEstimate estimate_rescaled_range(const std::vector<double>& series,
                                             std::vector<std::size_t> lags = {}) {
    const std::size_t length = series.size();
    if (length < 16)
        throw insufficient_data_error(
            "hurst", "rescaled-range estimation requires at least 16 observations");
    if (lags.empty()) lags = default_window_sizes(length);

    const std::size_t blocks = std::max<std::size_t>(2, std::min<std::size_t>(64, length / 4));
    const std::size_t spacing = length / blocks;

    std::vector<std::pair<double, double>> scale_stats;
    for (std::size_t r : lags) {
        if (r < 2 || r > length) continue;
        double total = 0.0;
        std::size_t used = 0;
        for (std::size_t b = 0; b < blocks; ++b) {
            const std::size_t start = b * spacing;
            if (start + r > length) break;
            const double* block = series.data() + start;
            double mean = 0.0, sq = 0.0;
            for (std::size_t k = 0; k < r; ++k) {
                mean += block[k];
                sq += block[k] * block[k];
            }
            mean /= static_cast<double>(r);
            const double var = sq / static_cast<double>(r) - mean * mean;
            const double sd = std::sqrt(std::max(var, 0.0));
            if (detail::negligible_sd(sd, mean)) continue;
            double cum = 0.0, mx = 0.0, mn = 0.0;   // zero anchor W(start, r) = 0
            for (std::size_t k = 0; k < r; ++k) {
                cum += block[k] - mean;
                mx = std::max(mx, cum);
                mn = std::min(mn, cum);
            }
            total += (mx - mn) / sd;
            ++used;
        }
        if (used == 0) continue;
        scale_stats.emplace_back(static_cast<double>(r), total / static_cast<double>(used));
    }
    return detail::regression_estimate(hurst_method::rescaled_range, std::move(scale_stats),
                                       length);
}

// Periodogram I(lambda_j) = |sum_t X_t e^{i lambda_j t}|^2 / (2 pi N) at the
// Fourier frequencies lambda_j = 2 pi j / N, j = 1..floor(N/2).
inline std::vector<std::pair<double, double>> periodogram(const std::vector<double>& series) {
    const std::size_t n = series.size();
    if (n < 2)
        throw invalid_argument_error("hurst", "periodogram requires at least 2 observations");
    thread_local Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, series);
    const double two_pi = 6.283185307179586476925286766559;
    std::vector<std::pair<double, double>> result;
    result.reserve(n / 2);
    for (std::size_t j = 1; j <= n / 2; ++j) {
        const double freq = two_pi * static_cast<double>(j) / static_cast<double>(n);
        result.emplace_back(freq, std::norm(spectrum[j]) / (two_pi * static_cast<double>(n)));
    }
    return result;
}

// Local Whittle estimator on the lowest m Fourier frequencies.  The scale c
// of the template c * lambda^{1-2H} is profiled out analytically; the
// remaining one-dimensional objective in H is minimized by golden-section
// search over (0.01, 0.99) to tolerance 1e-6.
inline HurstEstimate estimate_local_whittle(const std::vector<double>& series,
                                            std::size_t bandwidth_m = 0) {
    const std::size_t n = series.size();
    const bool auto_bandwidth = bandwidth_m == 0;
    if (auto_bandwidth && n >= 2)
        bandwidth_m = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), 0.65)));
    if (n < 2 || bandwidth_m > n / 2 || bandwidth_m < 2) {
        if (auto_bandwidth)
            throw insufficient_data_error(
                "hurst", "series too short for local Whittle estimation");
        throw invalid_argument_error(
            "hurst", "local Whittle bandwidth must satisfy 2 <= m <= floor(N/2)");
    }

    const auto spectrum = periodogram(series);
    std::vector<double> freqs(bandwidth_m), powers(bandwidth_m);
    bool any_power = false;
    double mean_log_freq = 0.0;
    for (std::size_t j = 0; j < bandwidth_m; ++j) {
        freqs[j] = spectrum[j].first;
        powers[j] = spectrum[j].second;
        any_power = any_power || powers[j] > 0.0;
        mean_log_freq += std::log(freqs[j]);
    }
    mean_log_freq /= static_cast<double>(bandwidth_m);
    if (!any_power)
        throw insufficient_data_error(
            "hurst", "periodogram vanishes at all low frequencies (constant input)");

    auto objective = [&](double h) {
        double mean_scaled = 0.0;
        for (std::size_t j = 0; j < bandwidth_m; ++j)
            mean_scaled += powers[j] * std::pow(freqs[j], 2.0 * h - 1.0);
        mean_scaled /= static_cast<double>(bandwidth_m);
        return std::log(mean_scaled) + (1.0 - 2.0 * h) * mean_log_freq;
    };

    double lo = 0.01, hi = 0.99;
    const double ratio = 0.61803398874989484820;
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = objective(x1);
    double f2 = objective(x2);
    if (!std::isfinite(f1) || !std::isfinite(f2))
        throw numerical_degeneracy_error("hurst", "local Whittle objective is not finite");
    while (hi - lo > 1e-6) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = objective(x2);
        }
        if (!std::isfinite(f1) || !std::isfinite(f2))
            throw numerical_degeneracy_error("hurst", "local Whittle objective is not finite");
    }

    HurstEstimate est;
    est.method = hurst_method::local_whittle;
    est.value = 0.5 * (lo + hi);
    est.n_points = bandwidth_m;
    est.out_of_range = !(est.value > 0.0 && est.value < 1.0);
    est.significance = 1.0 / std::sqrt(static_cast<double>(n));
    return est;
}

// Dispatch on the method enum; defaults for every method-specific knob.
inline HurstEstimate estimate_hurst(const std::vector<double>& series, hurst_method method) {
    switch (method) {
        case hurst_method::rs_analysis: return estimate_rs_analysis(series);
        case hurst_method::rescaled_range: return estimate_rescaled_range(series);
        case hurst_method::local_whittle: return estimate_local_whittle(series);
    }
    throw invalid_argument_error("hurst", "unknown estimation method");
}

// CSV layout for log-log regression plots: header `scale,statistic`.
inline void write_diagnostics_csv(const HurstEstimate& est, std::ostream& os) {
    os << "scale,statistic\n";
    char buf[64];
    for (const auto& [scale, stat] : est.diagnostics) {
        std::snprintf(buf, sizeof buf, "%.17g", scale);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", stat);
        os << buf << '\n';
    }
}

} // namespace fracmort
