#pragma once

// Generalized quadratic variation (GQV) estimators for a discretely observed
// fractional Ornstein-Uhlenbeck path: the filter-ratio estimator for H, the
// filtered-variance estimator for sigma, and the second-moment estimator for
// lambda.
//
// A filter of order L annihilates polynomials of degree < L.  The variation
// ratio between a filter and its dilation identifies H; the mean squared
// filter output identifies sigma through
//   E[(sum_k a_k B^H_{(i+k)Delta})^2] = -(sigma^2 Delta^{2H}/2)
//                                        * sum_{k,l} a_k a_l |k-l|^{2H};
// and the empirical second moment identifies lambda through the stationary
// variance sigma^2 Gamma(2H+1)/(2 lambda^{2H}).

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace fracmort {

class Filter {
public:
    // Validates the moment conditions: sum a_k k^j = 0 for j < order,
    // sum a_k k^order != 0, and the alternating-sign normalization
    // |sum (-1)^{1-k} a_k| = 1 (both sign conventions occur in standard
    // filter families and the variation statistics are sign-invariant).
    Filter(std::vector<double> coefficients, std::string name)
        : Filter(std::move(coefficients), std::move(name), true) {}

    const std::vector<double>& coefficients() const noexcept { return coefficients_; }
    std::size_t order() const noexcept { return order_; }
    const std::string& name() const noexcept { return name_; }
    std::size_t length() const noexcept { return coefficients_.size(); }

private:
    // Dilation moves every coefficient to an even index, which turns the
    // alternating sum into the plain coefficient sum (zero by the moment
    // condition), so dilated filters skip the normalization requirement.
    Filter(std::vector<double> coefficients, std::string name, bool require_normalization)
        : coefficients_(std::move(coefficients)), name_(std::move(name)) {
        if (coefficients_.size() < 2)
            throw invalid_argument_error("qgv", "a filter needs at least 2 coefficients");
        constexpr double tol = 1e-10;
        order_ = 0;
        while (true) {
            double moment = 0.0, magnitude = 0.0;
            for (std::size_t k = 0; k < coefficients_.size(); ++k) {
                const double weight = std::pow(static_cast<double>(k), static_cast<double>(order_));
                moment += coefficients_[k] * weight;
                magnitude += std::abs(coefficients_[k]) * weight;
            }
            if (std::abs(moment) > tol * std::max(1.0, magnitude)) break;
            ++order_;
            if (order_ > coefficients_.size()) break;
        }
        if (order_ < 1)
            throw invalid_argument_error("qgv", "filter does not annihilate constants");
        if (require_normalization) {
            double normalization = 0.0;
            for (std::size_t k = 0; k < coefficients_.size(); ++k)
                normalization += (k % 2 == 0 ? -1.0 : 1.0) * coefficients_[k];
            if (std::abs(std::abs(normalization) - 1.0) > tol)
                throw invalid_argument_error(
                    "qgv", "filter is not normalized: |sum (-1)^{1-k} a_k| must equal 1");
        }
    }

    friend Filter dilate_filter(const Filter& f);

    std::vector<double> coefficients_;
    std::string name_;
    std::size_t order_ = 0;
};

// Binomial difference filter a_k = (-1)^{1-k} C(K,k) / 2^K, order exactly K.
// K >= 2 is required because the ratio estimator needs filter order >= 2.
inline Filter classical_filter(int k_order) {
    if (k_order < 2)
        throw invalid_argument_error("qgv", "classical filter requires K >= 2");
    std::vector<double> coeffs(static_cast<std::size_t>(k_order) + 1);
    const double denom = std::pow(2.0, static_cast<double>(k_order));
    double binom = 1.0;
    for (int k = 0; k <= k_order; ++k) {
        coeffs[static_cast<std::size_t>(k)] = (k % 2 == 0 ? -1.0 : 1.0) * binom / denom;
        binom = binom * static_cast<double>(k_order - k) / static_cast<double>(k + 1);
    }
    return Filter(std::move(coeffs), "classical-k" + std::to_string(k_order));
}

// The 4-tap Daubechies wavelet filter scaled by 1/sqrt(2); order 2.
inline Filter daubechies_filter() {
    const double inv_sqrt2 = 0.70710678118654752440;
    std::vector<double> coeffs = {
        0.48296291314453 * inv_sqrt2,
        -0.8365163037378 * inv_sqrt2,
        0.22414386804201 * inv_sqrt2,
        0.12940952255126 * inv_sqrt2,
    };
    return Filter(std::move(coeffs), "daubechies4");
}

// Dilation: spread the coefficients to even indices.  Doubles the effective
// sampling scale while preserving the filter order.
inline Filter dilate_filter(const Filter& f) {
    std::vector<double> coeffs(2 * f.length() - 1, 0.0);
    for (std::size_t k = 0; k < f.length(); ++k) coeffs[2 * k] = f.coefficients()[k];
    return Filter(std::move(coeffs), f.name() + "-dilated", false);
}

// V_{N,a} = sum over all positions i of (sum_k a_k X_{i+k})^2.
inline double quadratic_variation(const std::vector<double>& samples, const Filter& f) {
    if (samples.size() < f.length())
        throw invalid_argument_error(
            "qgv", "sample count must be at least the filter length");
    const auto& a = f.coefficients();
    double total = 0.0;
    for (std::size_t i = 0; i + f.length() <= samples.size(); ++i) {
        double out = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) out += a[k] * samples[i + k];
        total += out * out;
    }
    return total;
}

// H from the dilation ratio and sigma from the mean squared filter output.
inline std::pair<double, double> estimate_h_sigma(const std::vector<double>& samples,
                                                  const Filter& f, double mesh) {
    if (!(mesh > 0.0))
        throw invalid_argument_error("qgv", "mesh must be > 0");
    if (samples.size() < 2 * f.length() + 1)
        throw invalid_argument_error(
            "qgv", "H/sigma estimation requires at least 2*filter length + 1 samples");

    const double variation = quadratic_variation(samples, f);
    if (variation == 0.0)
        throw insufficient_variation_error(
            "qgv", "quadratic variation is zero; input has no usable variation");
    const double dilated_variation = quadratic_variation(samples, dilate_filter(f));
    const double h_hat = 0.5 * std::log2(dilated_variation / variation);

    const std::size_t positions = samples.size() - f.length() + 1;
    const double mean_square = variation / static_cast<double>(positions);
    const auto& a = f.coefficients();
    double weight_sum = 0.0;   // sum_{k != l} a_k a_l |k-l|^{2H}, with 0^{2H} = 0
    for (std::size_t k = 0; k < a.size(); ++k)
        for (std::size_t l = 0; l < a.size(); ++l)
            if (k != l)
                weight_sum += a[k] * a[l]
                            * std::pow(std::abs(static_cast<double>(k) - static_cast<double>(l)),
                                       2.0 * h_hat);
    const double radicand =
        -2.0 * mean_square / (weight_sum * std::pow(mesh, 2.0 * h_hat));
    if (!(radicand > 0.0))
        throw filter_inconsistency_error(
            "qgv", "nonpositive radicand in the sigma estimator; filter and data disagree");
    return {h_hat, std::sqrt(radicand)};
}

// lambda from the empirical second moment and the stationary variance level:
// lambda_hat = (2 mu2 / (sigma^2 Gamma(2H+1)))^{-1/(2H)}.
inline std::pair<double, double> estimate_lambda(const std::vector<double>& samples,
                                                 double h_hat, double sigma_hat) {
    if (!(h_hat > 0.0 && h_hat < 1.0))
        throw invalid_argument_error("qgv", "lambda estimation requires H in (0,1)");
    if (!(sigma_hat > 0.0))
        throw invalid_argument_error("qgv", "lambda estimation requires sigma > 0");
    if (samples.empty())
        throw invalid_argument_error("qgv", "lambda estimation requires samples");
    double mu2 = 0.0;
    for (double x : samples) mu2 += x * x;
    mu2 /= static_cast<double>(samples.size());
    if (mu2 == 0.0)
        throw insufficient_variation_error("qgv", "second moment is zero");
    const double ratio = 2.0 * mu2 / (sigma_hat * sigma_hat * std::tgamma(2.0 * h_hat + 1.0));
    return {std::pow(ratio, -1.0 / (2.0 * h_hat)), mu2};
}

struct QgvEstimates {
    double h_hat = 0.0;
    double sigma_hat = 0.0;
    std::optional<double> lambda_hat;   // absent when H is outside (0,1)
    double mu2_hat = 0.0;
    std::string filter_used;
    bool outside_validity = false;   // H outside (1/2, 3/4): lambda theory does not cover it
    std::vector<std::string> warnings;
};

// Full estimation chain.  The lambda step is theoretically covered only for
// H in (1/2, 3/4); outside that range it is still computed when `force` is
// set (flagged `outside_validity`), skipped otherwise.
inline QgvEstimates estimate_all(const std::vector<double>& samples, const Filter& f,
                                 double mesh, bool force_lambda = false) {
    QgvEstimates est;
    est.filter_used = f.name();
    const auto [h_hat, sigma_hat] = estimate_h_sigma(samples, f, mesh);
    est.h_hat = h_hat;
    est.sigma_hat = sigma_hat;
    double mu2 = 0.0;
    for (double x : samples) mu2 += x * x;
    est.mu2_hat = mu2 / static_cast<double>(samples.size());
    const bool in_validity = h_hat > 0.5 && h_hat < 0.75;
    est.outside_validity = !in_validity;
    if (!in_validity)
        est.warnings.push_back(
            "estimated H is outside (0.5, 0.75); lambda consistency theory does not apply");
    if (h_hat > 0.0 && h_hat < 1.0 && (in_validity || force_lambda)) {
        auto [lambda_hat, mu2_hat] = estimate_lambda(samples, h_hat, sigma_hat);
        est.lambda_hat = lambda_hat;
        est.mu2_hat = mu2_hat;
    } else if (h_hat <= 0.0 || h_hat >= 1.0) {
        est.warnings.push_back("estimated H is outside (0,1); lambda estimate withheld");
    }
    return est;
}

} // namespace fracmort
