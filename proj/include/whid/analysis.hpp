#pragma once

// Frequency-domain verification of converged estimates: spectra, the
// stationary relations between estimated and true channels, recovery of
// the residual scale/shift ambiguity, and mean-power rescaling.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "whid/rng.hpp"
#include "whid/signals.hpp"

namespace whid {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// Frequency response sampled on a grid of Omega in [-pi, pi).
struct Spectrum {
    std::vector<double> omega;
    std::vector<Complex> values;

    std::size_t size() const noexcept { return omega.size(); }
};

/// Uniform grid -pi + 2 pi k / K, k = 0..K-1.
inline std::vector<double> frequency_grid(std::size_t grid_size) {
    std::vector<double> grid(grid_size);
    for (std::size_t k = 0; k < grid_size; ++k) {
        grid[k] = -kPi + 2.0 * kPi * static_cast<double>(k) / static_cast<double>(grid_size);
    }
    return grid;
}

/// sum_n f[n] e^{-j Omega n}, evaluated as a polynomial in e^{-j Omega}.
inline Complex frequency_response(const FirFilter& filter, double omega) {
    const Complex w = std::polar(1.0, -omega);
    Complex acc{0.0, 0.0};
    for (std::size_t n = filter.size(); n-- > 0;) {
        acc = acc * w + filter[n];
    }
    return acc;
}

inline Spectrum dtft_eval(const FirFilter& filter, std::size_t grid_size) {
    if (grid_size < 2) {
        throw std::invalid_argument("dtft_eval: grid size must be >= 2");
    }
    Spectrum s{frequency_grid(grid_size), {}};
    s.values.reserve(grid_size);
    for (double w : s.omega) s.values.push_back(frequency_response(filter, w));
    return s;
}

/// 10 log10 |v|^2, floored at -300 dB.
inline double mag2_db(Complex v) {
    const double p = std::norm(v);
    return p > 1e-30 ? 10.0 * std::log10(p) : -300.0;
}

struct ProductRelationOptions {
    /// Grid points count only where |L O| >= band_threshold * max |L O|.
    double band_threshold{0.01};
    std::size_t grid_size{1024};
    /// Grid points count only where |Omega| < omega_limit (the excited band).
    double omega_limit{kPi};
};

/// Max relative deviation |L_e O_e - L O| / |L O| over the significant grid
/// points. The linear chain at e = 0 drives this to zero without
/// identifying either factor.
inline double check_product_relation(const FirFilter& L_true, const FirFilter& O_true,
                                     const FirFilter& L_est, const FirFilter& O_est,
                                     const ProductRelationOptions& options = {}) {
    const auto grid = frequency_grid(options.grid_size);
    std::vector<Complex> truth(grid.size());
    double peak = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        truth[k] = frequency_response(L_true, grid[k]) * frequency_response(O_true, grid[k]);
        if (std::abs(grid[k]) < options.omega_limit) peak = std::max(peak, std::abs(truth[k]));
    }
    double worst = 0.0;
    std::size_t counted = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (std::abs(grid[k]) >= options.omega_limit) continue;
        const double mag = std::abs(truth[k]);
        if (mag < options.band_threshold * peak || mag == 0.0) continue;
        const Complex est = frequency_response(L_est, grid[k]) * frequency_response(O_est, grid[k]);
        worst = std::max(worst, std::abs(est - truth[k]) / mag);
        ++counted;
    }
    if (counted == 0) {
        throw std::domain_error("check_product_relation: no grid point passes the band threshold");
    }
    return worst;
}

struct MultifreqOptions {
    std::size_t sample_count{1000};
    /// Input band is |Omega_i| < pi / oversample_factor; 0 selects the
    /// polynomial degree.
    int oversample_factor{0};
    /// Tuples count only where |rhs| >= magnitude_floor * max |rhs| for that order.
    double magnitude_floor{0.01};
    std::uint64_t seed{0x5eed};
};

/// Max relative residual of
///   O_e(sum Omega_i) prod L_e(Omega_i) = O(sum Omega_i) prod L(Omega_i)
/// over random in-band tuples, for every order q with a_q != 0.
inline double check_multifreq_relation(const FirFilter& L_true, const FirFilter& O_true,
                                       const FirFilter& L_est, const FirFilter& O_est,
                                       const PolynomialNonlinearity& nonlinearity,
                                       const MultifreqOptions& options = {}) {
    const int factor =
        options.oversample_factor > 0 ? options.oversample_factor : nonlinearity.degree();
    const double band = kPi / static_cast<double>(factor);
    Rng rng(options.seed);
    double worst = 0.0;
    for (int q : nonlinearity.active_orders()) {
        std::vector<Complex> lhs(options.sample_count);
        std::vector<Complex> rhs(options.sample_count);
        double peak = 0.0;
        for (std::size_t t = 0; t < options.sample_count; ++t) {
            Complex prod_true{1.0, 0.0};
            Complex prod_est{1.0, 0.0};
            double total = 0.0;
            for (int i = 0; i < q; ++i) {
                const double w = rng.uniform(-band, band);
                total += w;
                prod_true *= frequency_response(L_true, w);
                prod_est *= frequency_response(L_est, w);
            }
            rhs[t] = frequency_response(O_true, total) * prod_true;
            lhs[t] = frequency_response(O_est, total) * prod_est;
            peak = std::max(peak, std::abs(rhs[t]));
        }
        for (std::size_t t = 0; t < options.sample_count; ++t) {
            const double mag = std::abs(rhs[t]);
            if (mag == 0.0 || mag < options.magnitude_floor * peak) continue;
            worst = std::max(worst, std::abs(lhs[t] - rhs[t]) / mag);
        }
    }
    return worst;
}

/// Estimate relates to truth as L_est[m] = alpha_B L(m + tau) and
/// O_est[m] = alpha_A O(m - tau).
struct AmbiguityEstimate {
    double tau{0.0};
    double alpha_B{1.0};
    std::optional<double> alpha_A;
    /// Normalized residual energy of the fit on the estimated channel.
    double residual{0.0};
};

struct ScaleFit {
    double alpha;
    double residual;
};

/// Least-squares alpha for estimate ~ alpha * reference(. + shift), both
/// compared on the estimate's taps.
inline ScaleFit fit_scale_at_shift(const FirFilter& reference, const FirFilter& estimate,
                                   double shift) {
    const FirFilter shifted = sinc_shift(reference, shift, estimate.size());
    double cross = 0.0;
    double ref_energy = 0.0;
    for (std::size_t m = 0; m < estimate.size(); ++m) {
        cross += estimate[m] * shifted[m];
        ref_energy += shifted[m] * shifted[m];
    }
    const double est_energy = estimate.energy();
    if (!(ref_energy > 0.0) || !(est_energy > 0.0)) {
        throw std::domain_error("fit_scale_at_shift: degenerate filters");
    }
    const double alpha = cross / ref_energy;
    // ||e - alpha r||^2 = ||e||^2 - cross^2 / ||r||^2
    const double residual = std::max(0.0, est_energy - cross * alpha) / est_energy;
    return {alpha, residual};
}

namespace detail {

// Grid search over tau with a parabolic refinement around the best node.
template <typename ResidualAt>
double search_shift(double range, double resolution, ResidualAt&& residual_at) {
    if (!(resolution > 0.0) || !(range >= 0.0)) {
        throw std::invalid_argument("shift search: range must be >= 0 and resolution > 0");
    }
    const auto steps = static_cast<long>(std::llround(2.0 * range / resolution));
    std::vector<double> res(static_cast<std::size_t>(steps + 1));
    long best = 0;
    for (long k = 0; k <= steps; ++k) {
        res[static_cast<std::size_t>(k)] = residual_at(-range + resolution * static_cast<double>(k));
        if (res[static_cast<std::size_t>(k)] < res[static_cast<std::size_t>(best)]) best = k;
    }
    double tau = -range + resolution * static_cast<double>(best);
    if (best > 0 && best < steps) {
        const double r0 = res[static_cast<std::size_t>(best - 1)];
        const double r1 = res[static_cast<std::size_t>(best)];
        const double r2 = res[static_cast<std::size_t>(best + 1)];
        const double curvature = r0 - 2.0 * r1 + r2;
        if (curvature > 0.0) {
            const double offset = std::clamp(0.5 * (r0 - r2) / curvature, -1.0, 1.0);
            const double refined = tau + offset * resolution;
            if (residual_at(refined) < r1) tau = refined;
        }
    }
    return tau;
}

} // namespace detail

/// Grid-searches tau in [-range, range] and fits the scale alpha_B on the
/// time samples of the estimate.
inline AmbiguityEstimate estimate_ambiguity(const FirFilter& L_true, const FirFilter& L_est,
                                            double tau_range = 1.0, double tau_resolution = 0.01) {
    if (!(L_true.energy() > 0.0) || !(L_est.energy() > 0.0)) {
        throw std::domain_error("estimate_ambiguity: zero filter");
    }
    const double tau = detail::search_shift(tau_range, tau_resolution, [&](double t) {
        return fit_scale_at_shift(L_true, L_est, t).residual;
    });
    const ScaleFit fit = fit_scale_at_shift(L_true, L_est, tau);
    return {tau, fit.alpha, std::nullopt, fit.residual};
}

/// As above, plus alpha_A from the observation pair at the opposite shift.
inline AmbiguityEstimate estimate_ambiguity(const FirFilter& L_true, const FirFilter& L_est,
                                            const FirFilter& O_true, const FirFilter& O_est,
                                            double tau_range = 1.0, double tau_resolution = 0.01) {
    AmbiguityEstimate out = estimate_ambiguity(L_true, L_est, tau_range, tau_resolution);
    if (!(O_true.energy() > 0.0) || !(O_est.energy() > 0.0)) {
        throw std::domain_error("estimate_ambiguity: zero filter");
    }
    out.alpha_A = fit_scale_at_shift(O_true, O_est, -out.tau).alpha;
    return out;
}

/// Spectra of a reference/estimate pair restricted to |Omega| < band.
struct BandSpectra {
    std::vector<double> omega;
    std::vector<Complex> reference;
    std::vector<Complex> estimate;
};

inline BandSpectra band_spectra(const FirFilter& reference, const FirFilter& estimate, double band,
                                std::size_t grid_size) {
    BandSpectra out;
    for (double w : frequency_grid(grid_size)) {
        if (std::abs(w) >= band) continue;
        out.omega.push_back(w);
        out.reference.push_back(frequency_response(reference, w));
        out.estimate.push_back(frequency_response(estimate, w));
    }
    if (out.omega.empty()) {
        throw std::invalid_argument("band_spectra: band contains no grid point");
    }
    return out;
}

/// Scale fit of estimate ~ alpha e^{j tau Omega} reference over the band.
inline ScaleFit fit_scale_at_shift_inband(const BandSpectra& s, double shift) {
    double cross = 0.0;
    double ref_energy = 0.0;
    double est_energy = 0.0;
    for (std::size_t k = 0; k < s.omega.size(); ++k) {
        const Complex r = s.reference[k] * std::polar(1.0, shift * s.omega[k]);
        cross += (s.estimate[k] * std::conj(r)).real();
        ref_energy += std::norm(r);
        est_energy += std::norm(s.estimate[k]);
    }
    if (!(ref_energy > 0.0) || !(est_energy > 0.0)) {
        throw std::domain_error("fit_scale_at_shift_inband: degenerate spectra");
    }
    const double alpha = cross / ref_energy;
    return {alpha, std::max(0.0, est_energy - cross * alpha) / est_energy};
}

/// Ambiguity recovered from the band |Omega| < band only. The input never
/// excites frequencies outside its band, so estimates carry no information
/// there; this is the fit to use for converged runs.
inline AmbiguityEstimate estimate_ambiguity_inband(const FirFilter& L_true, const FirFilter& L_est,
                                                   const FirFilter& O_true, const FirFilter& O_est,
                                                   double band_L, double band_O,
                                                   double tau_range = 1.0,
                                                   double tau_resolution = 0.01,
                                                   std::size_t grid_size = 1024) {
    const BandSpectra sL = band_spectra(L_true, L_est, band_L, grid_size);
    const double tau = detail::search_shift(tau_range, tau_resolution, [&](double t) {
        return fit_scale_at_shift_inband(sL, t).residual;
    });
    const ScaleFit fitL = fit_scale_at_shift_inband(sL, tau);
    const BandSpectra sO = band_spectra(O_true, O_est, band_O, grid_size);
    const ScaleFit fitO = fit_scale_at_shift_inband(sO, -tau);
    return {tau, fitL.alpha, fitO.alpha, fitL.residual};
}

/// Minimum input length accepted by power_rescale.
inline constexpr std::size_t kMinPowerSamples = 10000;

/// Scales L_est so that filtering `input` through it yields mean power
/// `target_power` (the measured E{y^2} of the true channel output).
inline FirFilter power_rescale(const FirFilter& L_est, std::span<const double> input,
                               double target_power) {
    if (!(target_power > 0.0)) {
        throw std::invalid_argument("power_rescale: target power must be positive");
    }
    if (input.size() < kMinPowerSamples || input.size() <= L_est.size()) {
        throw std::invalid_argument("power_rescale: input too short for a stable power estimate");
    }
    const Signal y_hat = filter_signal(L_est, input);
    double acc = 0.0;
    // Skip the zero-state transient.
    for (std::size_t n = L_est.size(); n < y_hat.size(); ++n) acc += y_hat[n] * y_hat[n];
    const double power = acc / static_cast<double>(y_hat.size() - L_est.size());
    if (!(power > 0.0)) {
        throw std::domain_error("power_rescale: estimated output power is zero");
    }
    return L_est.scaled(std::sqrt(target_power / power));
}

/// Undoes L_est[m] = alpha L(m + tau): returns L_est(m - tau) / alpha.
inline FirFilter compensate(const FirFilter& L_est, const AmbiguityEstimate& ambiguity,
                            std::size_t taps) {
    if (ambiguity.alpha_B == 0.0) {
        throw std::domain_error("compensate: zero scale");
    }
    return sinc_shift(L_est, -ambiguity.tau, taps).scaled(1.0 / ambiguity.alpha_B);
}

inline constexpr double kMisalignmentFloorDb = -120.0;

/// 10 log10(||compensated L_est - L_true||^2 / ||L_true||^2), floored at -120 dB.
inline double misalignment_db(const FirFilter& L_true, const FirFilter& L_est,
                              const AmbiguityEstimate& compensation = {}) {
    const std::size_t taps = std::max(L_true.size(), L_est.size());
    const FirFilter fixed =
        (compensation.tau == 0.0) ? L_est.resized(taps).scaled(1.0 / compensation.alpha_B)
                                  : compensate(L_est, compensation, taps);
    const FirFilter truth = L_true.resized(taps);
    double err = 0.0;
    for (std::size_t m = 0; m < taps; ++m) {
        const double d = fixed[m] - truth[m];
        err += d * d;
    }
    const double ref = truth.energy();
    if (!(ref > 0.0)) {
        throw std::domain_error("misalignment_db: reference has zero energy");
    }
    if (err == 0.0) return kMisalignmentFloorDb;
    return std::max(kMisalignmentFloorDb, 10.0 * std::log10(err / ref));
}

/// Misalignment measured over |Omega| < band only, after compensation.
inline double misalignment_db_inband(const FirFilter& L_true, const FirFilter& L_est,
                                     const AmbiguityEstimate& compensation, double band,
                                     std::size_t grid_size = 1024) {
    const BandSpectra s = band_spectra(L_true, L_est, band, grid_size);
    double err = 0.0;
    double ref = 0.0;
    for (std::size_t k = 0; k < s.omega.size(); ++k) {
        const Complex fixed = s.estimate[k] * std::polar(1.0 / compensation.alpha_B,
                                                         -compensation.tau * s.omega[k]);
        err += std::norm(fixed - s.reference[k]);
        ref += std::norm(s.reference[k]);
    }
    if (!(ref > 0.0)) {
        throw std::domain_error("misalignment_db_inband: reference has no energy in band");
    }
    if (err == 0.0) return kMisalignmentFloorDb;
    return std::max(kMisalignmentFloorDb, 10.0 * std::log10(err / ref));
}

} // namespace whid
