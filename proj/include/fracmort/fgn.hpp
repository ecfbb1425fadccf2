#pragma once

// Exact sampling of fractional Gaussian noise (fGN) and fractional Brownian
// motion (fBm), plus the closed-form covariances.
//
// The generator uses circulant embedding (Davies-Harte): embed the n-point
// fGN covariance in a circulant matrix of power-of-two size M >= 2n, whose
// eigenvalues are the FFT of its first row.  The embedding of a stationary
// fGN stretch is nonnegative definite, so the sample is exact (up to
// floating-point roundoff), which matters because estimator tests treat this
// generator as their oracle.  If roundoff drives an eigenvalue below -1e-10
// the generator falls back to a dense Cholesky factorization.

#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "errors.hpp"
#include "rng.hpp"

namespace fracmort {

class HurstIndex {
public:
    explicit HurstIndex(double value) : value_(value) {
        if (!(value > 0.0) || !(value < 1.0))
            throw invalid_argument_error("fgn", "Hurst index must lie strictly between 0 and 1");
    }

    double value() const noexcept { return value_; }

    friend bool operator==(HurstIndex a, HurstIndex b) noexcept { return a.value_ == b.value_; }

private:
    double value_;
};

enum class fgn_method { automatic, circulant_embedding, cholesky };

struct FgnPath {
    HurstIndex hurst;
    double mesh = 1.0;
    std::vector<double> increments;   // X_n, length n
    std::vector<double> cumulative;   // B^H at grid points, length n + 1, starts at 0
    std::uint64_t seed = 0;
    fgn_method method_used = fgn_method::circulant_embedding;
};

// E[B^H_t B^H_s] = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
inline double fbm_covariance(HurstIndex h, double t, double s) {
    if (t < 0.0 || s < 0.0)
        throw invalid_argument_error("fgn", "fBm covariance requires t, s >= 0");
    const double two_h = 2.0 * h.value();
    return 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

// Autocovariance of unit-variance fGN at lag n:
// rho(n) = ((n+1)^{2H} + |n-1|^{2H} - 2 n^{2H}) / 2.
inline double fgn_autocovariance(HurstIndex h, std::int64_t n) {
    if (n < 0)
        throw invalid_argument_error("fgn", "fGN autocovariance requires lag n >= 0");
    if (n == 0) return 1.0;
    const double two_h = 2.0 * h.value();
    const double nd = static_cast<double>(n);
    return 0.5 * (std::pow(nd + 1.0, two_h) + std::pow(std::abs(nd - 1.0), two_h)
                  - 2.0 * std::pow(nd, two_h));
}

namespace detail {

// Unit-mesh, unit-variance fGN of length n by circulant embedding.
// Returns false if an embedding eigenvalue is below -1e-10 (caller then
// falls back to Cholesky); eigenvalues in [-1e-10, 0] are clamped to 0.
inline bool sample_fgn_circulant(HurstIndex h, std::size_t n, rng::engine& gen,
                                 std::vector<double>& out) {
    std::size_t m = 1;
    while (m < 2 * n) m <<= 1;

    std::vector<double> first_row(m);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t lag = std::min(j, m - j);
        first_row[j] = fgn_autocovariance(h, static_cast<std::int64_t>(lag));
    }

    thread_local Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, first_row);

    std::vector<double> eigenvalues(m);
    for (std::size_t j = 0; j < m; ++j) {
        double ev = spectrum[j].real();
        if (ev < -1e-10) return false;
        eigenvalues[j] = ev < 0.0 ? 0.0 : ev;
    }

    std::vector<std::complex<double>> weights(m);
    const std::size_t half = m / 2;
    weights[0] = std::sqrt(eigenvalues[0]) * gen.next_normal();
    weights[half] = std::sqrt(eigenvalues[half]) * gen.next_normal();
    for (std::size_t j = 1; j < half; ++j) {
        const double scale = std::sqrt(0.5 * eigenvalues[j]);
        const double re = gen.next_normal();
        const double im = gen.next_normal();
        weights[j] = std::complex<double>(scale * re, scale * im);
        weights[m - j] = std::conj(weights[j]);
    }

    std::vector<std::complex<double>> transformed;
    fft.fwd(transformed, weights);

    const double norm = 1.0 / std::sqrt(static_cast<double>(m));
    out.resize(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = transformed[k].real() * norm;
    return true;
}

// Dense Cholesky sampling of the n x n Toeplitz fGN covariance.  O(n^3);
// only used when the embedding degenerates or when requested explicitly.
inline void sample_fgn_cholesky(HurstIndex h, std::size_t n, rng::engine& gen,
                                std::vector<double>& out) {
    Eigen::MatrixXd cov(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = fgn_autocovariance(h, static_cast<std::int64_t>(i - j));
            cov(i, j) = v;
            cov(j, i) = v;
        }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw numerical_degeneracy_error(
            "fgn", "fGN covariance matrix is not positive definite under Cholesky fallback");
    Eigen::VectorXd z(n);
    for (std::size_t i = 0; i < n; ++i) z(i) = gen.next_normal();
    Eigen::VectorXd x = llt.matrixL() * z;
    out.assign(x.data(), x.data() + n);
}

} // namespace detail

// Sample n fGN increments (and the cumulative fBm path) on a regular mesh.
// Increments have covariance mesh^{2H} * rho(k); deterministic per seed.
inline FgnPath generate_fgn(HurstIndex h, std::size_t n, double mesh, std::uint64_t seed,
                            fgn_method method = fgn_method::automatic) {
    if (n < 1)
        throw invalid_argument_error("fgn", "fGN generation requires n >= 1");
    if (!(mesh > 0.0))
        throw invalid_argument_error("fgn", "fGN generation requires mesh > 0");

    rng::engine gen(seed);
    std::vector<double> unit;
    fgn_method used = method;
    if (method == fgn_method::cholesky) {
        detail::sample_fgn_cholesky(h, n, gen, unit);
    } else {
        if (detail::sample_fgn_circulant(h, n, gen, unit)) {
            used = fgn_method::circulant_embedding;
        } else if (method == fgn_method::circulant_embedding) {
            throw numerical_degeneracy_error(
                "fgn", "circulant embedding produced an eigenvalue below -1e-10");
        } else {
            rng::engine fresh(seed);
            detail::sample_fgn_cholesky(h, n, fresh, unit);
            used = fgn_method::cholesky;
        }
    }

    FgnPath path{h, mesh, {}, {}, seed, used};
    const double scale = std::pow(mesh, h.value());
    path.cumulative.resize(n + 1);
    path.cumulative[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        path.cumulative[k + 1] = path.cumulative[k] + unit[k] * scale;
    // Recover increments from the stored cumulative path so that
    // cumulative[k+1] - cumulative[k] == increments[k] holds bit-exactly.
    path.increments.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        path.increments[k] = path.cumulative[k + 1] - path.cumulative[k];
    return path;
}

// CSV layout: header `t,b_h,x`; one row per grid point; x is empty on row 0.
inline void write_csv(const FgnPath& path, std::ostream& os) {
    os << "t,b_h,x\n";
    char buf[64];
    for (std::size_t i = 0; i < path.cumulative.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(i) * path.mesh);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", path.cumulative[i]);
        os << buf << ',';
        if (i > 0) {
            std::snprintf(buf, sizeof buf, "%.17g", path.increments[i - 1]);
            os << buf;
        }
        os << '\n';
    }
}

} // namespace fracmort
