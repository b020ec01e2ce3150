#pragma once

// Adaptive Wiener-Hammerstein estimator: L_hat -> known polynomial -> O_hat,
// adapted by stochastic gradient descent on the instantaneous squared error
// e[n] = z_hat[n] - z[n].

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "whid/signals.hpp"

namespace whid {

/// Exponential moving average of e^2.
class MseTracker {
public:
    explicit MseTracker(double decay = 0.999) : decay_(decay) {
        if (!(decay > 0.0 && decay < 1.0)) {
            throw std::invalid_argument("MseTracker: decay must lie in (0, 1)");
        }
    }

    void update(double squared_error) { ema_ = decay_ * ema_ + (1.0 - decay_) * squared_error; }

    double value() const noexcept { return ema_; }
    double decay() const noexcept { return decay_; }

    std::optional<double> db() const {
        if (ema_ > 0.0) return 10.0 * std::log10(ema_);
        return std::nullopt;
    }

private:
    double ema_{0.0};
    double decay_;
};

struct StepReport {
    double error;
    double z_hat;
    /// 10 log10 of the smoothed squared error; empty while it is exactly zero.
    std::optional<double> mse_db;
};

/// Thrown when the error or a coefficient leaves the overflow guard.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::uint64_t step, const std::string& what)
        : std::runtime_error("estimator diverged at step " + std::to_string(step) + ": " + what),
          step_(step) {}

    std::uint64_t step() const noexcept { return step_; }

private:
    std::uint64_t step_;
};

struct EstimatorOptions {
    double beta{0.1};
    double ema_decay{0.999};
    /// Samples processed before the first coefficient update; negative
    /// selects N_L + N_O.
    long warmup{-1};
    double divergence_guard{1e12};
};

/// L_hat[m] = O_hat[m] = delta_{m,0}.
struct KroneckerInit {
    FirFilter L_hat;
    FirFilter O_hat;
};

inline KroneckerInit init_kronecker(std::size_t taps_L, std::size_t taps_O) {
    if (taps_L < 1 || taps_O < 1) {
        throw std::invalid_argument("init_kronecker: lengths must be >= 1");
    }
    return {FirFilter::delta(taps_L), FirFilter::delta(taps_O)};
}

class Estimator {
public:
    Estimator(FirFilter L_hat, FirFilter O_hat, PolynomialNonlinearity nonlinearity,
              EstimatorOptions options = {})
        : L_hat_(std::move(L_hat)),
          O_hat_(std::move(O_hat)),
          nonlinearity_(std::move(nonlinearity)),
          options_(options),
          history_x_(L_hat_.size() + O_hat_.size() - 1),
          history_yhat_(O_hat_.size()),
          history_shat_(O_hat_.size()),
          mse_(options.ema_decay),
          grad_L_(L_hat_.size(), 0.0),
          grad_O_(O_hat_.size(), 0.0),
          slope_terms_(O_hat_.size(), 0.0) {
        if (L_hat_.empty() || O_hat_.empty()) {
            throw std::invalid_argument("Estimator: filters must have at least one tap");
        }
        if (!(options_.beta >= 0.0) || !std::isfinite(options_.beta)) {
            throw std::invalid_argument("Estimator: beta must be finite and non-negative");
        }
        warmup_ = options_.warmup < 0 ? L_hat_.size() + O_hat_.size()
                                      : static_cast<std::uint64_t>(options_.warmup);
    }

    static Estimator kronecker(std::size_t taps_L, std::size_t taps_O,
                               PolynomialNonlinearity nonlinearity, EstimatorOptions options = {}) {
        auto init = init_kronecker(taps_L, taps_O);
        return Estimator(std::move(init.L_hat), std::move(init.O_hat), std::move(nonlinearity),
                         options);
    }

    /// Pushes x[n] and returns z_hat[n] with the current coefficients.
    double predict(double x) {
        history_x_.push(x);
        const double y_hat = fir_apply(L_hat_, history_x_.window());
        history_yhat_.push(y_hat);
        history_shat_.push(apply_polynomial(nonlinearity_, y_hat));
        last_z_hat_ = fir_apply(O_hat_, history_shat_.window());
        return last_z_hat_;
    }

    /// d(e^2)/dL_hat[m] = 2 e sum_r O_hat[r] slope(y_hat[n-r]) x[n-r-m].
    const std::vector<double>& gradient_L(double error) {
        const auto yhat = history_yhat_.window();
        for (std::size_t r = 0; r < O_hat_.size(); ++r) {
            slope_terms_[r] = O_hat_[r] * polynomial_slope(nonlinearity_, yhat[r]);
        }
        const auto x = history_x_.window();
        for (std::size_t m = 0; m < L_hat_.size(); ++m) {
            double acc = 0.0;
            for (std::size_t r = 0; r < O_hat_.size(); ++r) {
                acc += slope_terms_[r] * x[r + m];
            }
            grad_L_[m] = 2.0 * error * acc;
        }
        return grad_L_;
    }

    /// d(e^2)/dO_hat[m] = 2 e s_hat[n-m].
    const std::vector<double>& gradient_O(double error) {
        const auto shat = history_shat_.window();
        for (std::size_t m = 0; m < O_hat_.size(); ++m) {
            grad_O_[m] = 2.0 * error * shat[m];
        }
        return grad_O_;
    }

    /// One LMS iteration on the sample pair (x[n], z[n]).
    StepReport step(double x, double z) {
        const double z_hat = predict(x);
        const double error = z_hat - z;
        ++samples_;
        if (!std::isfinite(error) || std::abs(error) > options_.divergence_guard) {
            throw DivergenceError(samples_, "error magnitude out of range");
        }
        mse_.update(error * error);

        if (samples_ > warmup_ && options_.beta > 0.0 && error != 0.0) {
            // Both gradients use the coefficients that produced z_hat.
            gradient_L(error);
            gradient_O(error);
            apply_update(L_hat_, grad_L_);
            apply_update(O_hat_, grad_O_);
        }
        return {error, z_hat, mse_.db()};
    }

    const FirFilter& L_hat() const noexcept { return L_hat_; }
    const FirFilter& O_hat() const noexcept { return O_hat_; }
    const PolynomialNonlinearity& nonlinearity() const noexcept { return nonlinearity_; }
    const EstimatorOptions& options() const noexcept { return options_; }
    const MseTracker& mse() const noexcept { return mse_; }
    std::uint64_t samples() const noexcept { return samples_; }
    std::uint64_t warmup() const noexcept { return warmup_; }
    double last_prediction() const noexcept { return last_z_hat_; }

    /// Most-recent-first histories, for instrumentation and oracle checks.
    std::span<const double> history_x() const noexcept { return history_x_.window(); }
    std::span<const double> history_y_hat() const noexcept { return history_yhat_.window(); }
    std::span<const double> history_s_hat() const noexcept { return history_shat_.window(); }

private:
    void apply_update(FirFilter& filter, const std::vector<double>& gradient) {
        auto c = filter.coeffs();
        for (std::size_t m = 0; m < c.size(); ++m) {
            c[m] -= options_.beta * gradient[m];
            if (!std::isfinite(c[m]) || std::abs(c[m]) > options_.divergence_guard) {
                throw DivergenceError(samples_, "coefficient magnitude out of range");
            }
        }
    }

    FirFilter L_hat_;
    FirFilter O_hat_;
    PolynomialNonlinearity nonlinearity_;
    EstimatorOptions options_;
    DelayLine history_x_;
    DelayLine history_yhat_;
    DelayLine history_shat_;
    MseTracker mse_;
    std::vector<double> grad_L_;
    std::vector<double> grad_O_;
    std::vector<double> slope_terms_;
    std::uint64_t samples_{0};
    std::uint64_t warmup_{0};
    double last_z_hat_{0.0};
};

/// Linear-only estimator (no nonlinearity between L_hat and O_hat).
inline Estimator make_linear_estimator(FirFilter L_hat, FirFilter O_hat,
                                       EstimatorOptions options = {}) {
    return Estimator(std::move(L_hat), std::move(O_hat), PolynomialNonlinearity::identity(),
                     options);
}

/// LMS step of the linear-only chain; identical to Estimator::step with a_1 = 1.
inline StepReport lms_linear_step(Estimator& estimator, double x, double z) {
    if (!estimator.nonlinearity().is_identity()) {
        throw std::invalid_argument("lms_linear_step: estimator is not linear-only");
    }
    return estimator.step(x, z);
}

} // namespace whid
