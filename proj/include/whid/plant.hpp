#pragma once

// Ground-truth Wiener-Hammerstein cascade x -> L -> y -> poly -> s -> O -> z.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "whid/rng.hpp"
#include "whid/signals.hpp"

namespace whid {

/// Channel of interest:
///   L[m] ~ (1/4 + sin(r k) + sin(3 r k / 2)) exp(-25 k / N),  k = m + 1,
/// normalized to unit energy. Tap 0 holds the k = 1 sample so the channel
/// is causal with L[0] != 0.
inline FirFilter make_interest_channel(int taps, double r) {
    if (taps < 1) {
        throw std::invalid_argument("make_interest_channel: N must be >= 1");
    }
    std::vector<double> c(static_cast<std::size_t>(taps));
    const double n = static_cast<double>(taps);
    for (int m = 0; m < taps; ++m) {
        const double k = static_cast<double>(m + 1);
        c[static_cast<std::size_t>(m)] =
            (0.25 + std::sin(r * k) + std::sin(1.5 * r * k)) * std::exp(-25.0 * k / n);
    }
    return normalize_unit_energy(FirFilter(std::move(c)));
}

/// Observation channel O[m] ~ sinc(B m) + exp(-2 B m) / 2 for m = 0..N-1,
/// unit energy. sinc here is the unit-zero-crossing form sin(pi x)/(pi x),
/// the same convention as the input oversampling kernel.
inline FirFilter make_observation_channel(int taps, double bandwidth) {
    if (taps < 1) {
        throw std::invalid_argument("make_observation_channel: N must be >= 1");
    }
    if (!(bandwidth > 0.0)) {
        throw std::invalid_argument("make_observation_channel: B must be positive");
    }
    std::vector<double> c(static_cast<std::size_t>(taps));
    for (int m = 0; m < taps; ++m) {
        const double bm = bandwidth * static_cast<double>(m);
        c[static_cast<std::size_t>(m)] = normalized_sinc(bm) + 0.5 * std::exp(-2.0 * bm);
    }
    return normalize_unit_energy(FirFilter(std::move(c)));
}

struct PlantConfig {
    FirFilter channel_L;
    FirFilter channel_O;
    PolynomialNonlinearity nonlinearity;
    /// Standard deviation of additive Gaussian noise on z. Zero disables it.
    double measurement_noise_std{0.0};
    std::uint64_t noise_seed{0};
};

struct PlantSample {
    double y;
    double s;
    double z;
};

/// Checks the structural requirements of a plant: finite, non-empty,
/// unit-energy channels and, when asked, nonzero instantaneous taps.
inline void validate_plant(const PlantConfig& cfg, bool require_not_delayed) {
    if (cfg.channel_L.empty() || cfg.channel_O.empty()) {
        throw std::invalid_argument("plant: channels must have at least one tap");
    }
    for (const auto* f : {&cfg.channel_L, &cfg.channel_O}) {
        if (std::abs(f->energy() - 1.0) > 1e-9) {
            throw std::invalid_argument("plant: channels must have unit energy");
        }
    }
    if (require_not_delayed && (cfg.channel_L[0] == 0.0 || cfg.channel_O[0] == 0.0)) {
        throw std::invalid_argument("plant: channels must be not delayed (tap 0 nonzero)");
    }
    if (cfg.measurement_noise_std < 0.0) {
        throw std::invalid_argument("plant: measurement noise must be non-negative");
    }
}

class Plant {
public:
    explicit Plant(PlantConfig config)
        : config_(std::move(config)),
          history_x_(config_.channel_L.size()),
          history_s_(config_.channel_O.size()) {
        if (config_.measurement_noise_std > 0.0) {
            noise_.emplace(config_.noise_seed);
        }
    }

    PlantSample step(double x) {
        history_x_.push(x);
        const double y = fir_apply(config_.channel_L, history_x_.window());
        const double s = apply_polynomial(config_.nonlinearity, y);
        history_s_.push(s);
        double z = fir_apply(config_.channel_O, history_s_.window());
        if (noise_) {
            z += config_.measurement_noise_std * noise_->gaussian();
        }
        return {y, s, z};
    }

    const PlantConfig& config() const noexcept { return config_; }

    void reset() {
        history_x_.clear();
        history_s_.clear();
        if (noise_) noise_.emplace(config_.noise_seed);
    }

private:
    PlantConfig config_;
    DelayLine history_x_;
    DelayLine history_s_;
    std::optional<Rng> noise_;
};

} // namespace whid
