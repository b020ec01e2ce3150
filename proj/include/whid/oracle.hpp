#pragma once

// Brute-force references for tests and acceptance. Nothing here calls into
// the fast paths it is used to check: polynomials are summed with std::pow,
// convolutions are nested loops over plain vectors, the DTFT is a literal
// term-by-term sum.

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace whid::oracle {

enum class Target { L, O };

struct FiniteDiffSpec {
    double step{1e-6};
};

/// Frozen cascade and the data needed to recompute e[n] from scratch.
struct CascadeSnapshot {
    std::vector<double> L_hat;
    std::vector<double> O_hat;
    std::map<int, double> poly;
    /// x[n - k] at index k; needs at least N_L + N_O - 1 entries.
    std::vector<double> x_history;
    double z{0.0};
};

inline double poly_eval(const std::map<int, double>& poly, double y) {
    double acc = 0.0;
    for (const auto& [q, a] : poly) acc += a * std::pow(y, q);
    return acc;
}

/// e[n] = z_hat[n] - z[n] with every y_hat[n - r] recomputed from the
/// snapshot coefficients.
inline double recompute_error(const CascadeSnapshot& s) {
    if (s.x_history.size() + 1 < s.L_hat.size() + s.O_hat.size()) {
        throw std::invalid_argument("recompute_error: x history too short");
    }
    double z_hat = 0.0;
    for (std::size_t r = 0; r < s.O_hat.size(); ++r) {
        double y_hat = 0.0;
        for (std::size_t u = 0; u < s.L_hat.size(); ++u) {
            y_hat += s.L_hat[u] * s.x_history[r + u];
        }
        z_hat += s.O_hat[r] * poly_eval(s.poly, y_hat);
    }
    return z_hat - s.z;
}

/// Central difference of e^2 with respect to one tap.
inline double finite_diff_gradient(const CascadeSnapshot& snapshot, Target target, std::size_t tap,
                                   const FiniteDiffSpec& spec = {}) {
    if (!(spec.step > 0.0)) {
        throw std::invalid_argument("finite_diff_gradient: step must be positive");
    }
    CascadeSnapshot probe = snapshot;
    std::vector<double>& coeffs = target == Target::L ? probe.L_hat : probe.O_hat;
    if (tap >= coeffs.size()) {
        throw std::out_of_range("finite_diff_gradient: tap index out of range");
    }
    const double base = coeffs[tap];
    coeffs[tap] = base + spec.step;
    const double e_plus = recompute_error(probe);
    coeffs[tap] = base - spec.step;
    const double e_minus = recompute_error(probe);
    return (e_plus * e_plus - e_minus * e_minus) / (2.0 * spec.step);
}

/// Full gradient vector for one filter.
inline std::vector<double> finite_diff_gradient(const CascadeSnapshot& snapshot, Target target,
                                                const FiniteDiffSpec& spec = {}) {
    const std::size_t n = target == Target::L ? snapshot.L_hat.size() : snapshot.O_hat.size();
    std::vector<double> out(n);
    for (std::size_t m = 0; m < n; ++m) out[m] = finite_diff_gradient(snapshot, target, m, spec);
    return out;
}

/// z[n] = sum_m O[m] sum_q a_q (sum_r L[r] x[n-m-r])^q, zero initial state.
inline std::vector<double> brute_force_cascade(std::span<const double> L,
                                               const std::map<int, double>& poly,
                                               std::span<const double> O,
                                               std::span<const double> x) {
    const long n_samples = static_cast<long>(x.size());
    std::vector<double> z(x.size(), 0.0);
    for (long n = 0; n < n_samples; ++n) {
        double acc = 0.0;
        for (long m = 0; m < static_cast<long>(O.size()); ++m) {
            double y = 0.0;
            for (long r = 0; r < static_cast<long>(L.size()); ++r) {
                const long idx = n - m - r;
                if (idx >= 0) y += L[static_cast<std::size_t>(r)] * x[static_cast<std::size_t>(idx)];
            }
            acc += O[static_cast<std::size_t>(m)] * poly_eval(poly, y);
        }
        z[static_cast<std::size_t>(n)] = acc;
    }
    return z;
}

/// sum_n f[n] exp(-j omega n), one term at a time.
inline std::complex<double> direct_dtft(std::span<const double> filter, double omega) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t n = 0; n < filter.size(); ++n) {
        acc += filter[n] * std::exp(std::complex<double>(0.0, -omega * static_cast<double>(n)));
    }
    return acc;
}

} // namespace whid::oracle
