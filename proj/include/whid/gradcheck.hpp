#pragma once

// Randomized agreement check between the estimator's analytic gradients and
// central finite differences of the instantaneous squared error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "whid/estimator.hpp"
#include "whid/oracle.hpp"
#include "whid/rng.hpp"

namespace whid {

struct GradCheckOptions {
    int trials{100};
    std::uint64_t seed{2024};
    int max_taps_L{6};
    int max_taps_O{4};
    int max_degree{3};
    double rel_tolerance{1e-5};
    double abs_floor{1e-10};
    double fd_step{1e-6};
};

struct GradCheckSummary {
    int trials{0};
    int failures{0};
    /// Worst |analytic - numeric| / max(|numeric|, abs_floor) seen.
    double worst_relative_error{0.0};

    bool passed() const noexcept { return failures == 0 && trials > 0; }
};

/// Relative gradient error with an absolute floor on the denominator.
inline double gradient_relative_error(double analytic, double numeric, double abs_floor) {
    const double diff = std::abs(analytic - numeric);
    if (diff <= abs_floor) return 0.0;
    return diff / std::max(std::abs(numeric), abs_floor);
}

inline GradCheckSummary run_gradient_check(const GradCheckOptions& options = {}) {
    Rng rng(options.seed);
    auto pick = [&](int lo, int hi) {
        return lo + static_cast<int>(rng.next() % static_cast<std::uint64_t>(hi - lo + 1));
    };
    GradCheckSummary summary;
    for (int trial = 0; trial < options.trials; ++trial) {
        const int taps_L = pick(1, options.max_taps_L);
        const int taps_O = pick(1, options.max_taps_O);
        const int degree = pick(1, options.max_degree);

        std::vector<double> poly(static_cast<std::size_t>(degree));
        for (double& a : poly) a = rng.uniform(-2.0, 2.0);
        std::vector<double> L(static_cast<std::size_t>(taps_L));
        std::vector<double> O(static_cast<std::size_t>(taps_O));
        for (double& v : L) v = rng.uniform(-1.0, 1.0);
        for (double& v : O) v = rng.uniform(-1.0, 1.0);

        // Frozen snapshot: beta = 0 so histories follow fixed coefficients.
        Estimator est(FirFilter(L), FirFilter(O), PolynomialNonlinearity(poly),
                      EstimatorOptions{0.0, 0.999, -1, 1e12});
        const int history = taps_L + taps_O - 1 + pick(0, 4);
        std::vector<double> xs(static_cast<std::size_t>(history));
        for (double& v : xs) v = rng.uniform(-1.0, 1.0);
        for (double v : xs) est.predict(v);
        const double z = rng.uniform(-1.0, 1.0);
        const double error = est.last_prediction() - z;

        oracle::CascadeSnapshot snap;
        snap.L_hat = L;
        snap.O_hat = O;
        for (int q = 1; q <= degree; ++q) snap.poly[q] = poly[static_cast<std::size_t>(q - 1)];
        snap.x_history.assign(est.history_x().begin(), est.history_x().end());
        snap.z = z;

        const oracle::FiniteDiffSpec fd{options.fd_step};
        const auto gL = est.gradient_L(error);
        const auto gO = est.gradient_O(error);
        const auto nL = oracle::finite_diff_gradient(snap, oracle::Target::L, fd);
        const auto nO = oracle::finite_diff_gradient(snap, oracle::Target::O, fd);

        double worst = 0.0;
        for (std::size_t m = 0; m < gL.size(); ++m) {
            worst = std::max(worst, gradient_relative_error(gL[m], nL[m], options.abs_floor));
        }
        for (std::size_t m = 0; m < gO.size(); ++m) {
            worst = std::max(worst, gradient_relative_error(gO[m], nO[m], options.abs_floor));
        }
        summary.worst_relative_error = std::max(summary.worst_relative_error, worst);
        ++summary.trials;
        if (worst > options.rel_tolerance) ++summary.failures;
    }
    return summary;
}

} // namespace whid
