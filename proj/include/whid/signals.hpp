#pragma once

// Discrete-time primitives: FIR filters, delay lines, the memoryless
// polynomial nonlinearity, sinc helpers and band-limited noise.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "whid/rng.hpp"

namespace whid {

using Signal = std::vector<double>;

inline bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

/// sin(x)/x with sinc(0) = 1. Small arguments use the Taylor branch.
inline double sinc(double x) {
    if (std::abs(x) < 1e-8) {
        return 1.0 - x * x / 6.0;
    }
    return std::sin(x) / x;
}

/// sin(pi x)/(pi x): unit zero crossings, passband |Omega| < pi for sinc(m/Q) -> pi/Q.
inline double normalized_sinc(double x) { return sinc(std::numbers::pi * x); }

/// Causal real FIR filter. coeffs()[m] multiplies the input delayed by m samples.
class FirFilter {
public:
    FirFilter() = default;

    explicit FirFilter(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
        if (!all_finite(coeffs_)) {
            throw std::invalid_argument("FirFilter: coefficients must be finite");
        }
    }

    FirFilter(std::initializer_list<double> coeffs) : FirFilter(std::vector<double>(coeffs)) {}

    static FirFilter zeros(std::size_t taps) { return FirFilter(std::vector<double>(taps, 0.0)); }

    /// Kronecker delta at tap `at`.
    static FirFilter delta(std::size_t taps, std::size_t at = 0) {
        if (at >= taps) {
            throw std::invalid_argument("FirFilter::delta: tap index out of range");
        }
        std::vector<double> c(taps, 0.0);
        c[at] = 1.0;
        return FirFilter(std::move(c));
    }

    std::size_t size() const noexcept { return coeffs_.size(); }
    bool empty() const noexcept { return coeffs_.empty(); }

    double operator[](std::size_t m) const { return coeffs_[m]; }
    double& operator[](std::size_t m) { return coeffs_[m]; }

    std::span<const double> coeffs() const noexcept { return coeffs_; }
    std::span<double> coeffs() noexcept { return coeffs_; }
    const std::vector<double>& vector() const noexcept { return coeffs_; }

    double energy() const {
        return std::inner_product(coeffs_.begin(), coeffs_.end(), coeffs_.begin(), 0.0);
    }

    FirFilter scaled(double factor) const {
        std::vector<double> c = coeffs_;
        for (double& v : c) v *= factor;
        return FirFilter(std::move(c));
    }

    /// Copy truncated or zero-padded to `taps`.
    FirFilter resized(std::size_t taps) const {
        std::vector<double> c = coeffs_;
        c.resize(taps, 0.0);
        return FirFilter(std::move(c));
    }

    friend bool operator==(const FirFilter&, const FirFilter&) = default;

private:
    std::vector<double> coeffs_;
};

/// Fixed-length delay line, most recent sample first. window()[k] is the
/// sample pushed k calls ago; unfilled slots read as zero.
class DelayLine {
public:
    DelayLine() = default;
    explicit DelayLine(std::size_t length) : length_(length), buffer_(2 * length, 0.0) {}

    std::size_t size() const noexcept { return length_; }

    void push(double sample) {
        if (length_ == 0) return;
        head_ = (head_ == 0 ? length_ : head_) - 1;
        buffer_[head_] = sample;
        buffer_[head_ + length_] = sample;
    }

    std::span<const double> window() const noexcept {
        return {buffer_.data() + head_, length_};
    }

    double operator[](std::size_t k) const { return buffer_[head_ + k]; }

    void clear() {
        std::fill(buffer_.begin(), buffer_.end(), 0.0);
        head_ = 0;
    }

private:
    std::size_t length_{0};
    std::size_t head_{0};
    // Every sample is stored twice so window() is always contiguous.
    std::vector<double> buffer_;
};

/// Sum over m of coeffs[m] * history[m]; history is most-recent-first.
inline double fir_apply(const FirFilter& filter, std::span<const double> history) {
    if (history.size() < filter.size()) {
        throw std::invalid_argument("fir_apply: history shorter than filter");
    }
    double acc = 0.0;
    for (std::size_t m = 0; m < filter.size(); ++m) {
        acc += filter[m] * history[m];
    }
    return acc;
}

/// Full linear convolution, output length a.size() + b.size() - 1.
inline FirFilter convolve(const FirFilter& a, const FirFilter& b) {
    if (a.empty() || b.empty()) return FirFilter{};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return FirFilter(std::move(out));
}

/// Streams a whole signal through a filter with zero initial state.
inline Signal filter_signal(const FirFilter& filter, std::span<const double> input) {
    Signal out(input.size(), 0.0);
    for (std::size_t n = 0; n < input.size(); ++n) {
        const std::size_t reach = std::min(filter.size(), n + 1);
        double acc = 0.0;
        for (std::size_t m = 0; m < reach; ++m) {
            acc += filter[m] * input[n - m];
        }
        out[n] = acc;
    }
    return out;
}

/// Memoryless polynomial s = sum_{q=1..Q} a_q y^q. No constant term.
class PolynomialNonlinearity {
public:
    PolynomialNonlinearity() = default;

    /// coeffs[i] holds a_{i+1}.
    explicit PolynomialNonlinearity(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
        trim();
        if (coeffs_.empty()) {
            throw std::invalid_argument("PolynomialNonlinearity: degree must be at least 1");
        }
        if (!all_finite(coeffs_)) {
            throw std::invalid_argument("PolynomialNonlinearity: coefficients must be finite");
        }
    }

    /// Sparse form, order -> a_q. Orders must be >= 1.
    static PolynomialNonlinearity from_orders(const std::map<int, double>& terms) {
        int degree = 0;
        for (const auto& [q, a] : terms) {
            if (q < 1) {
                throw std::invalid_argument("PolynomialNonlinearity: order " + std::to_string(q) +
                                            " is not allowed (orders start at 1)");
            }
            if (a != 0.0) degree = std::max(degree, q);
        }
        std::vector<double> c(static_cast<std::size_t>(degree), 0.0);
        for (const auto& [q, a] : terms) {
            if (q <= degree) c[static_cast<std::size_t>(q - 1)] = a;
        }
        return PolynomialNonlinearity(std::move(c));
    }

    static PolynomialNonlinearity identity() { return PolynomialNonlinearity({1.0}); }

    int degree() const noexcept { return static_cast<int>(coeffs_.size()); }

    /// a_q, zero beyond the degree.
    double coefficient(int q) const {
        if (q < 1 || q > degree()) return 0.0;
        return coeffs_[static_cast<std::size_t>(q - 1)];
    }

    std::span<const double> coeffs() const noexcept { return coeffs_; }

    /// Orders q with a_q != 0, ascending.
    std::vector<int> active_orders() const {
        std::vector<int> out;
        for (int q = 1; q <= degree(); ++q) {
            if (coefficient(q) != 0.0) out.push_back(q);
        }
        return out;
    }

    bool has_nonlinear_term() const {
        for (int q = 2; q <= degree(); ++q) {
            if (coefficient(q) != 0.0) return true;
        }
        return false;
    }

    bool is_identity() const { return degree() == 1 && coeffs_[0] == 1.0; }

    std::map<int, double> to_orders() const {
        std::map<int, double> out;
        for (int q : active_orders()) out[q] = coefficient(q);
        return out;
    }

    friend bool operator==(const PolynomialNonlinearity&, const PolynomialNonlinearity&) = default;

private:
    void trim() {
        while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
    }

    std::vector<double> coeffs_;
};

/// sum_q a_q y^q (Horner).
inline double apply_polynomial(const PolynomialNonlinearity& nl, double y) {
    const auto a = nl.coeffs();
    double acc = 0.0;
    for (std::size_t i = a.size(); i-- > 0;) {
        acc = (acc + a[i]) * y;
    }
    return acc;
}

/// d/dy of apply_polynomial: sum_q q a_q y^(q-1), the q = 1 term being a_1.
inline double polynomial_slope(const PolynomialNonlinearity& nl, double y) {
    const auto a = nl.coeffs();
    double acc = 0.0;
    for (std::size_t i = a.size(); i-- > 0;) {
        acc = acc * y + static_cast<double>(i + 1) * a[i];
    }
    return acc;
}

/// Returns the filter scaled to unit energy.
inline FirFilter normalize_unit_energy(const FirFilter& filter) {
    const double e = filter.energy();
    if (!(e > 0.0)) {
        throw std::domain_error("normalize_unit_energy: filter has zero energy");
    }
    return filter.scaled(1.0 / std::sqrt(e));
}

/// Band-limited reconstruction sum_n coeffs[n] sinc(pi (t - n)).
inline double sinc_interpolate(const FirFilter& filter, double t) {
    double acc = 0.0;
    for (std::size_t n = 0; n < filter.size(); ++n) {
        const double d = t - static_cast<double>(n);
        acc += filter[n] * sinc(std::numbers::pi * d);
    }
    return acc;
}

/// Samples L(m + shift) for m in [0, taps). A positive shift advances the
/// response.
inline FirFilter sinc_shift(const FirFilter& filter, double shift, std::size_t taps) {
    std::vector<double> out(taps);
    for (std::size_t m = 0; m < taps; ++m) {
        out[m] = sinc_interpolate(filter, static_cast<double>(m) + shift);
    }
    return FirFilter(std::move(out));
}

/// Parameters of the oversampled input x[n] = sum_m x0[n-m] k[m] with
/// k[m] = gain * sinc(m / Q) for m in [-half_width, half_width).
struct NoiseSpec {
    double variance{10.0};
    int oversample_factor{3};
    int half_width{128};
    /// Kernel gain; 0 selects 1 / (2 half_width).
    double gain{0.0};

    double effective_gain() const {
        return gain != 0.0 ? gain : 1.0 / (2.0 * static_cast<double>(half_width));
    }
};

/// Streaming generator of band-limited Gaussian noise.
class OversampledNoiseSource {
public:
    OversampledNoiseSource(const NoiseSpec& spec, std::uint64_t seed)
        : rng_(seed), stddev_(std::sqrt(spec.variance)) {
        if (!(spec.variance > 0.0)) {
            throw std::invalid_argument("noise: variance must be positive");
        }
        if (spec.oversample_factor < 1) {
            throw std::invalid_argument("noise: oversample factor must be >= 1");
        }
        if (spec.half_width < 1) {
            throw std::invalid_argument("noise: half width must be >= 1");
        }
        const double gain = spec.effective_gain();
        const int hw = spec.half_width;
        // The output lags the newest draw by hw samples, so kernel_[k]
        // (delay k from the newest draw) is tap m = k - hw.
        kernel_.resize(static_cast<std::size_t>(2 * hw));
        for (int k = 0; k < 2 * hw; ++k) {
            const int m = k - hw;
            kernel_[static_cast<std::size_t>(k)] =
                gain * normalized_sinc(static_cast<double>(m) / spec.oversample_factor);
        }
        white_ = DelayLine(kernel_.size());
        for (std::size_t k = 0; k + 1 < kernel_.size(); ++k) {
            white_.push(stddev_ * rng_.gaussian());
        }
    }

    double next() {
        white_.push(stddev_ * rng_.gaussian());
        const auto w = white_.window();
        double acc = 0.0;
        for (std::size_t k = 0; k < kernel_.size(); ++k) {
            acc += kernel_[k] * w[k];
        }
        return acc;
    }

    std::span<const double> kernel() const noexcept { return kernel_; }

private:
    Rng rng_;
    double stddev_;
    std::vector<double> kernel_;
    DelayLine white_;
};

/// `count` samples of band-limited noise (white Gaussian of the given
/// variance, shaped by the truncated sinc kernel).
inline Signal generate_oversampled_noise(std::size_t count, double variance, int oversample_factor,
                                         int half_width, std::uint64_t seed) {
    if (count == 0) {
        throw std::invalid_argument("generate_oversampled_noise: count must be positive");
    }
    OversampledNoiseSource source(NoiseSpec{variance, oversample_factor, half_width, 0.0}, seed);
    Signal out(count);
    for (double& v : out) v = source.next();
    return out;
}

} // namespace whid
