#pragma once

// Log-hazard mortality model driven by a mean-reverting fractional noise:
//
//   h(t) = h0 * exp(alpha0 * t + alpha1 * Y_t),
//
// with Y a fractional Ornstein-Uhlenbeck process started at 0 and
// alpha1 = T^{-H} for a fit window spanning T years.  Fitting recovers
// (h0, alpha0) by least squares pinned at the first observation, estimates H
// on the log-residuals, and calibrates (sigma, lambda) with the
// filter-variation estimators.  Forecast bands and survival probabilities
// are plain Monte Carlo over simulated hazard paths.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "fou.hpp"
#include "hurst.hpp"
#include "qgv.hpp"

namespace fracmort {

enum class Sex { female, male, total };

inline const char* to_string(Sex s) {
    switch (s) {
        case Sex::female: return "female";
        case Sex::male: return "male";
        case Sex::total: return "total";
    }
    return "total";
}

inline char sex_letter(Sex s) {
    switch (s) {
        case Sex::female: return 'F';
        case Sex::male: return 'M';
        case Sex::total: return 'T';
    }
    return 'T';
}

inline Sex sex_from_string(const std::string& text) {
    if (text == "F" || text == "f" || text == "Female" || text == "female") return Sex::female;
    if (text == "M" || text == "m" || text == "Male" || text == "male") return Sex::male;
    if (text == "T" || text == "t" || text == "Total" || text == "total") return Sex::total;
    throw invalid_argument_error("mortality", "unknown sex selector '" + text + "'");
}

// One age-specific calendar-year series of observed central death rates.
struct CohortSeries {
    int age = 0;
    Sex sex = Sex::total;
    std::vector<int> years;
    std::vector<double> rates;

    void validate() const {
        if (years.size() != rates.size())
            throw invalid_argument_error("mortality", "years and rates lengths differ");
        if (years.empty())
            throw invalid_argument_error("mortality", "series is empty");
        for (std::size_t i = 1; i < years.size(); ++i)
            if (years[i] != years[i - 1] + 1)
                throw invalid_argument_error(
                    "mortality", "years must be strictly increasing and contiguous");
        for (double r : rates)
            if (!(r > 0.0) || !std::isfinite(r))
                throw invalid_argument_error("mortality", "rates must be positive and finite");
    }
};

struct MortalityModel {
    double h0 = 0.0;
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    HurstIndex hurst = HurstIndex(0.5);
    double sigma = 0.0;
    double lambda = 0.0;
    double horizon_t = 0.0;                 // observation count of the fit window
    std::pair<int, int> fit_window{0, 0};   // first and last calendar year

    // Diagnostics carried along from fitting.
    hurst_method hurst_method_used = hurst_method::rescaled_range;
    double hurst_raw = 0.0;        // regression estimate before clamping
    double qgv_h_hat = 0.0;        // filter-ratio H, reported alongside
    std::string filter_used;
    bool outside_validity = false;
    std::vector<std::string> warnings;

    void validate() const {
        if (!(h0 > 0.0) || !std::isfinite(h0))
            throw invalid_argument_error("mortality", "model h0 must be > 0");
        if (!std::isfinite(alpha0))
            throw invalid_argument_error("mortality", "model alpha0 must be finite");
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw invalid_argument_error("mortality", "model sigma must be > 0");
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw invalid_argument_error("mortality", "model lambda must be > 0");
        if (!(horizon_t > 0.0))
            throw invalid_argument_error("mortality", "model horizon must be > 0");
        if (hurst.value() < 0.5)
            throw invalid_argument_error("mortality", "model requires H in [0.5, 1)");
        if (std::abs(alpha1 * std::pow(horizon_t, hurst.value()) - 1.0) > 1e-12)
            throw invalid_argument_error("mortality", "alpha1 must equal horizon^{-H}");
    }
};

// Pathwise mean and confidence band of simulated hazard rates.
struct ForecastBand {
    std::vector<int> years;
    std::vector<double> mean;
    std::vector<double> lower;
    std::vector<double> upper;
    std::size_t n_paths = 0;
    double coverage = 0.955;
};

// Least squares for the drift with the intercept pinned at the first
// observation: alpha0 = (sum_t t ln h(t) - ln h(0) sum_t t) / sum_t t^2,
// with t = 0..T.  Returns (h0, alpha0) where h0 is the observed first rate.
inline std::pair<double, double> fit_alpha0(const CohortSeries& series) {
    series.validate();
    if (series.rates.size() < 2)
        throw invalid_argument_error("mortality",
                                     "drift fitting needs at least 2 observations");
    const double log_h0 = std::log(series.rates.front());
    double st = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < series.rates.size(); ++i) {
        const double t = static_cast<double>(i);
        st += t;
        stt += t * t;
        sty += t * std::log(series.rates[i]);
    }
    return {series.rates.front(), (sty - log_h0 * st) / stt};
}

// Detrended log-rates: Y_t = ln h(t) - ln h0 - alpha0 t.  Y_0 = 0 exactly
// when h0 is the first observed rate.
inline std::vector<double> residuals(const CohortSeries& series, double h0, double alpha0) {
    series.validate();
    if (!(h0 > 0.0))
        throw invalid_argument_error("mortality", "h0 must be > 0");
    const double log_h0 = std::log(h0);
    std::vector<double> out(series.rates.size());
    for (std::size_t i = 0; i < series.rates.size(); ++i)
        out[i] = std::log(series.rates[i]) - log_h0 - alpha0 * static_cast<double>(i);
    return out;
}

// Full calibration chain: drift, then (sigma, lambda) from the filter
// variation of the residuals, then H from the chosen regression estimator.
// The model constrains H to [0.5, 1); estimates outside are clamped with a
// warning rather than rejected.  Both H estimates (regression and
// filter-ratio) are kept on the model for inspection.
inline MortalityModel fit_model(const CohortSeries& series,
                                hurst_method method = hurst_method::rescaled_range,
                                const Filter& filter = classical_filter(2)) {
    series.validate();
    if (series.rates.size() < 16)
        throw insufficient_data_error("mortality",
                                      "model fitting needs at least 16 observations");

    MortalityModel model;
    const auto [h0, alpha0] = fit_alpha0(series);
    model.h0 = h0;
    model.alpha0 = alpha0;
    const auto resid = residuals(series, h0, alpha0);

    // Noise-free input leaves residuals at round-off scale (~1e-15 on the log
    // scale); any real stochastic component sits orders of magnitude above
    // 1e-10.  Catch the flat case here so the failure names the actual
    // problem instead of whatever downstream estimator trips first.
    double max_abs_resid = 0.0;
    for (double r : resid) max_abs_resid = std::max(max_abs_resid, std::abs(r));
    if (max_abs_resid < 1e-10)
        throw insufficient_variation_error(
            "mortality", "residual series is numerically flat; nothing stochastic to fit");

    const auto q = estimate_all(resid, filter, 1.0, true);
    model.sigma = q.sigma_hat;
    if (!q.lambda_hat)
        throw numerical_degeneracy_error(
            "mortality", "lambda unavailable: filter-ratio H fell outside (0,1)");
    model.lambda = *q.lambda_hat;
    model.qgv_h_hat = q.h_hat;
    model.filter_used = q.filter_used;
    model.outside_validity = q.outside_validity;
    model.warnings = q.warnings;

    const auto hr = estimate_hurst(resid, method);
    model.hurst_method_used = method;
    model.hurst_raw = hr.value;
    double h = hr.value;
    if (h < 0.5) {
        h = 0.5;
        model.warnings.push_back("H estimate below 0.5; clamped to 0.5 (model range [0.5, 1))");
    } else if (h > 0.99) {
        h = 0.99;
        model.warnings.push_back("H estimate at or above 1; clamped to 0.99 (model range [0.5, 1))");
    }
    model.hurst = HurstIndex(h);

    model.horizon_t = static_cast<double>(series.rates.size());
    model.alpha1 = std::pow(model.horizon_t, -model.hurst.value());
    model.fit_window = {series.years.front(), series.years.back()};
    model.validate();
    return model;
}

namespace detail {

// Linear-interpolation sample quantile on sorted data (the common "type 7"
// convention): index h = (n-1)p.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double w = h - std::floor(h);
    return sorted[lo] + w * (sorted[hi] - sorted[lo]);
}

} // namespace detail

// Monte Carlo forecast of hazard rates on the annual grid t = 0..n_years,
// calendar-labelled from the first fit year.  Path p uses seed + p, so bands
// are bit-reproducible for a given (model, seed, n_paths).  The band is
// mean +- 2 sd at the default 0.955 coverage; any other coverage, or the
// explicit flag, switches to empirical pathwise quantiles.
inline ForecastBand forecast(const MortalityModel& model, std::size_t n_years,
                             std::size_t n_paths, std::uint64_t seed,
                             double coverage = 0.955, bool quantile_bands = false) {
    model.validate();
    if (n_years < 1)
        throw invalid_argument_error("mortality", "forecast needs n_years >= 1");
    if (n_paths < 1)
        throw invalid_argument_error("mortality", "forecast needs n_paths >= 1");
    if (!(coverage > 0.0 && coverage < 1.0))
        throw invalid_argument_error("mortality", "coverage must lie in (0,1)");

    const std::size_t n_points = n_years + 1;
    const FouParams params(model.lambda, model.sigma, model.hurst, 1.0);
    std::vector<std::vector<double>> hazard(n_points, std::vector<double>(n_paths));
    for (std::size_t p = 0; p < n_paths; ++p) {
        const auto path = simulate_fou(params, n_years, seed + p);
        for (std::size_t i = 0; i < n_points; ++i)
            hazard[i][p] = model.h0 * std::exp(model.alpha0 * static_cast<double>(i) +
                                               model.alpha1 * path.values[i]);
    }

    ForecastBand band;
    band.n_paths = n_paths;
    band.coverage = coverage;
    band.years.resize(n_points);
    band.mean.resize(n_points);
    band.lower.resize(n_points);
    band.upper.resize(n_points);
    const bool two_sigma = !quantile_bands && std::abs(coverage - 0.955) < 1e-12;
    const double denom = static_cast<double>(n_paths);
    for (std::size_t i = 0; i < n_points; ++i) {
        band.years[i] = model.fit_window.first + static_cast<int>(i);
        auto& row = hazard[i];
        double mean = 0.0;
        for (double v : row) mean += v;
        mean /= denom;
        band.mean[i] = mean;
        double lo, hi;
        if (two_sigma) {
            double ss = 0.0;
            for (double v : row) ss += (v - mean) * (v - mean);
            const double sd = std::sqrt(ss / denom);
            lo = mean - 2.0 * sd;
            hi = mean + 2.0 * sd;
        } else {
            std::sort(row.begin(), row.end());
            lo = detail::quantile_sorted(row, 0.5 * (1.0 - coverage));
            hi = detail::quantile_sorted(row, 0.5 * (1.0 + coverage));
        }
        band.lower[i] = std::max(lo, DBL_MIN);
        band.upper[i] = hi;
    }
    return band;
}

// S(t, horizon) = E[exp(-int_t^horizon h(u) du)] by Monte Carlo with a
// monthly trapezoid rule.  Conditioning on the path history is approximated
// by restarting the noise at y_start (the fitted residual at t); for t = 0
// the exact unconditional case is y_start = 0.  Returns the estimate and its
// Monte Carlo standard error.
inline std::pair<double, double> survival_probability(const MortalityModel& model, double t,
                                                      double horizon, std::size_t n_paths,
                                                      std::uint64_t seed,
                                                      double y_start = 0.0) {
    model.validate();
    if (!(t >= 0.0))
        throw invalid_argument_error("mortality", "survival needs t >= 0");
    if (!(horizon > t))
        throw invalid_argument_error("mortality", "survival needs horizon > t");
    if (n_paths < 1)
        throw invalid_argument_error("mortality", "survival needs n_paths >= 1");

    const double span = horizon - t;
    const std::size_t n = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(span * 12.0)));
    const double mesh = span / static_cast<double>(n);
    const FouParams params(model.lambda, model.sigma, model.hurst, mesh);

    std::vector<double> survived(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        const auto driving = generate_fgn(model.hurst, n, mesh, seed + p);
        const auto y = detail::fou_recursion(params, driving.increments, y_start);
        double integral = 0.0;
        for (std::size_t j = 0; j <= n; ++j) {
            const double u = t + static_cast<double>(j) * mesh;
            const double h = model.h0 * std::exp(model.alpha0 * u + model.alpha1 * y[j]);
            integral += (j == 0 || j == n) ? 0.5 * h : h;
        }
        integral *= mesh;
        survived[p] = std::exp(-integral);
    }

    double mean = 0.0;
    for (double v : survived) mean += v;
    mean /= static_cast<double>(n_paths);
    double se = 0.0;
    if (n_paths > 1) {
        double ss = 0.0;
        for (double v : survived) ss += (v - mean) * (v - mean);
        se = std::sqrt(ss / static_cast<double>(n_paths - 1)) /
             std::sqrt(static_cast<double>(n_paths));
    }
    return {mean, se};
}

inline void write_json(const MortalityModel& model, std::ostream& os) {
    nlohmann::ordered_json j;
    j["h0"] = model.h0;
    j["alpha0"] = model.alpha0;
    j["alpha1"] = model.alpha1;
    j["hurst"] = model.hurst.value();
    j["sigma"] = model.sigma;
    j["lambda"] = model.lambda;
    j["horizon_t"] = model.horizon_t;
    j["fit_window"] = {model.fit_window.first, model.fit_window.second};
    j["hurst_method"] = to_string(model.hurst_method_used);
    j["hurst_raw"] = model.hurst_raw;
    j["qgv_h_hat"] = model.qgv_h_hat;
    j["filter"] = model.filter_used;
    j["outside_validity"] = model.outside_validity;
    j["warnings"] = model.warnings;
    os << j.dump(2) << '\n';
}

inline MortalityModel read_model_json(std::istream& is) {
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("mortality", std::string("model JSON unreadable: ") + e.what());
    }
    try {
        MortalityModel model;
        model.h0 = j.at("h0").get<double>();
        model.alpha0 = j.at("alpha0").get<double>();
        model.alpha1 = j.at("alpha1").get<double>();
        model.hurst = HurstIndex(j.at("hurst").get<double>());
        model.sigma = j.at("sigma").get<double>();
        model.lambda = j.at("lambda").get<double>();
        model.horizon_t = j.at("horizon_t").get<double>();
        model.fit_window = {j.at("fit_window").at(0).get<int>(),
                            j.at("fit_window").at(1).get<int>()};
        model.hurst_method_used = hurst_method_from_string(j.at("hurst_method").get<std::string>());
        model.hurst_raw = j.value("hurst_raw", 0.0);
        model.qgv_h_hat = j.value("qgv_h_hat", 0.0);
        model.filter_used = j.value("filter", std::string());
        model.outside_validity = j.value("outside_validity", false);
        model.warnings = j.value("warnings", std::vector<std::string>{});
        model.validate();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("mortality", std::string("model JSON malformed: ") + e.what());
    }
}

inline void write_csv(const ForecastBand& band, std::ostream& os) {
    os << "year,mean,lower,upper\n";
    char buf[96];
    for (std::size_t i = 0; i < band.years.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g", band.years[i], band.mean[i],
                      band.lower[i], band.upper[i]);
        os << buf << '\n';
    }
}

} // namespace fracmort
