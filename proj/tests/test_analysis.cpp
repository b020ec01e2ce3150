#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "synthetic.hpp"
#include "whid/analysis.hpp"
#include "whid/oracle.hpp"
#include "whid/plant.hpp"
#include "whid/rng.hpp"

using namespace whid;

namespace {

const auto kReference = PolynomialNonlinearity::from_orders({{2, 1.0}, {3, -2.0}});

FirFilter random_filter(Rng& rng, std::size_t taps) {
    std::vector<double> c(taps);
    for (double& v : c) v = rng.uniform(-1.0, 1.0);
    return FirFilter(std::move(c));
}

} // namespace

TEST(Dtft, ImpulseIsFlat) {
    const auto s = dtft_eval(FirFilter::delta(1), 64);
    ASSERT_EQ(s.size(), 64u);
    for (const auto& v : s.values) {
        EXPECT_NEAR(v.real(), 1.0, 1e-15);
        EXPECT_NEAR(v.imag(), 0.0, 1e-15);
    }
}

TEST(Dtft, UnitDelay) {
    const auto s = dtft_eval(FirFilter::delta(2, 1), 64);
    for (std::size_t k = 0; k < s.size(); ++k) {
        EXPECT_NEAR(std::abs(s.values[k]), 1.0, 1e-14);
        EXPECT_NEAR(std::abs(s.values[k] - std::polar(1.0, -s.omega[k])), 0.0, 1e-14);
    }
}

TEST(Dtft, GridCoversHalfOpenInterval) {
    const auto grid = frequency_grid(16);
    EXPECT_DOUBLE_EQ(grid.front(), -kPi);
    EXPECT_LT(grid.back(), kPi);
    EXPECT_THROW(dtft_eval(FirFilter{1.0}, 1), std::invalid_argument);
}

TEST(Dtft, MatchesDirectSumOracle) {
    Rng rng(1);
    const auto f = random_filter(rng, 8);
    const auto s = dtft_eval(f, 16);
    for (std::size_t k = 0; k < s.size(); ++k) {
        EXPECT_LE(std::abs(s.values[k] - oracle::direct_dtft(f.vector(), s.omega[k])), 1e-12);
    }
    const auto L = make_interest_channel(256, 0.4);
    const auto sL = dtft_eval(L, 1024);
    for (std::size_t k = 0; k < sL.size(); ++k) {
        EXPECT_LE(std::abs(sL.values[k] - oracle::direct_dtft(L.vector(), sL.omega[k])), 1e-12);
    }
}

TEST(Dtft, ConjugateSymmetry) {
    Rng rng(2);
    const auto f = random_filter(rng, 33);
    const auto s = dtft_eval(f, 128);
    // omega[k] and omega[K - k] are negatives of each other for k >= 1.
    for (std::size_t k = 1; k < s.size(); ++k) {
        EXPECT_LE(std::abs(s.values[k] - std::conj(s.values[s.size() - k])), 1e-10);
    }
}

TEST(ProductRelation, IdenticalPair) {
    const auto L = make_interest_channel(32, 0.4);
    const auto O = make_observation_channel(32, 0.125);
    EXPECT_LE(check_product_relation(L, O, L, O), 1e-12);
}

TEST(ProductRelation, ReciprocalScaling) {
    const auto L = make_interest_channel(32, 0.4);
    const auto O = make_observation_channel(32, 0.125);
    EXPECT_LE(check_product_relation(L, O, L.scaled(2.0), O.scaled(0.5)), 1e-10);
}

TEST(ProductRelation, DetectsMismatch) {
    const auto L = make_interest_channel(32, 0.4);
    const auto O = make_observation_channel(32, 0.125);
    EXPECT_GT(check_product_relation(L, O, FirFilter::delta(32), O), 0.1);
}

TEST(ProductRelation, EmptyBandRejected) {
    const auto L = make_interest_channel(8, 0.4);
    const auto O = make_observation_channel(8, 0.125);
    ProductRelationOptions opts;
    opts.band_threshold = 2.0;
    EXPECT_THROW(check_product_relation(L, O, L, O, opts), std::domain_error);
}

TEST(MultifreqRelation, ExactMatch) {
    const auto L = make_interest_channel(64, 0.4);
    const auto O = make_observation_channel(64, 0.125);
    EXPECT_LE(check_multifreq_relation(L, O, L, O, kReference), 1e-12);
}

TEST(MultifreqRelation, ShiftedPairSatisfiesRelation) {
    for (double tau : {-1.0, -0.5, 0.3, 0.75, 1.0}) {
        const auto p = synthetic::make_shifted_pair(64, 0.4, 0.125, tau);
        EXPECT_LE(check_multifreq_relation(p.L_true, p.O_true, p.L_est, p.O_est, kReference), 1e-6)
            << "tau=" << tau;
    }
}

TEST(MultifreqRelation, QuadraticScaleFamily) {
    // With a single active order q, alpha_A alpha_B^q = 1 leaves the relation intact.
    const auto quad = PolynomialNonlinearity::from_orders({{2, 1.0}});
    const auto p = synthetic::make_shifted_pair(64, 0.4, 0.125, 0.3, 2.0, 0.25);
    EXPECT_LE(check_multifreq_relation(p.L_true, p.O_true, p.L_est, p.O_est, quad), 1e-6);
    EXPECT_GT(check_multifreq_relation(p.L_true, p.O_true, p.L_est, p.O_est, kReference), 0.1);
}

TEST(MultifreqRelation, PerturbedCoefficientDetected) {
    const auto L = make_interest_channel(64, 0.4);
    const auto O = make_observation_channel(64, 0.125);
    std::vector<double> c = L.vector();
    c[3] *= 1.1;
    EXPECT_GT(check_multifreq_relation(L, O, FirFilter(c), O, kReference), 1e-3);
}

TEST(EstimateAmbiguity, ExactMatch) {
    const auto L = make_interest_channel(64, 0.4);
    const auto a = estimate_ambiguity(L, L);
    EXPECT_NEAR(a.tau, 0.0, 1e-12);
    EXPECT_NEAR(a.alpha_B, 1.0, 1e-12);
    EXPECT_NEAR(a.residual, 0.0, 1e-12);
}

TEST(EstimateAmbiguity, PureScaling) {
    const auto L = make_interest_channel(64, 0.4);
    const auto a = estimate_ambiguity(L, L.scaled(0.5));
    EXPECT_NEAR(a.tau, 0.0, 1e-12);
    EXPECT_NEAR(a.alpha_B, 0.5, 1e-12);
}

TEST(EstimateAmbiguity, RoundTrips) {
    for (double tau : {-0.5, -0.25, 0.0, 0.25, 0.5}) {
        for (double alpha : {0.5, 1.0, 2.0}) {
            const auto p = synthetic::make_shifted_pair(64, 0.4, 0.125, tau, alpha, 1.0 / alpha);
            const auto a = estimate_ambiguity(p.L_true, p.L_est, p.O_true, p.O_est, 1.0, 0.01);
            EXPECT_NEAR(a.tau, tau, 0.01) << "tau=" << tau << " alpha=" << alpha;
            EXPECT_NEAR(a.alpha_B, alpha, 1e-3 * alpha) << "tau=" << tau << " alpha=" << alpha;
            ASSERT_TRUE(a.alpha_A.has_value());
            EXPECT_NEAR(*a.alpha_A, 1.0 / alpha, 1e-3 / alpha);
        }
    }
}

TEST(EstimateAmbiguity, ShiftOfInterestChannel) {
    const auto L = make_interest_channel(64, 0.4);
    const auto shifted = sinc_shift(L, 0.25, L.size());
    const auto a = estimate_ambiguity(L, shifted);
    EXPECT_NEAR(a.tau, 0.25, 0.01);
    EXPECT_NEAR(a.alpha_B, 1.0, 1e-3);
}

TEST(EstimateAmbiguity, InBandAgreesOnExactFamily) {
    const auto p = synthetic::make_shifted_pair(64, 0.4, 0.125, -0.4, 1.5, 1.0 / 2.25);
    const auto a = estimate_ambiguity_inband(p.L_true, p.L_est, p.O_true, p.O_est, kPi / 3.0, kPi);
    EXPECT_NEAR(a.tau, -0.4, 0.01);
    EXPECT_NEAR(a.alpha_B, 1.5, 1e-3);
    EXPECT_NEAR(*a.alpha_A, 1.0 / 2.25, 1e-3);
}

TEST(EstimateAmbiguity, InBandIgnoresOutOfBandContent) {
    const auto L = make_interest_channel(64, 0.4);
    const auto O = make_observation_channel(64, 0.125);
    // Add a high-pass component, (1 - z^-1)^8, which is negligible in band.
    FirFilter hp{1.0};
    for (int i = 0; i < 8; ++i) hp = convolve(hp, FirFilter{1.0, -1.0});
    std::vector<double> c = L.vector();
    for (std::size_t m = 0; m < hp.size(); ++m) c[m] += 0.3 * hp[m] / std::sqrt(hp.energy());
    const FirFilter smeared(c);
    const auto a = estimate_ambiguity_inband(L, smeared.scaled(1.2), O, O, kPi / 8.0, kPi);
    EXPECT_NEAR(a.tau, 0.0, 0.02);
    EXPECT_NEAR(a.alpha_B, 1.2, 0.02);
}

TEST(EstimateAmbiguity, RejectsZeroFilters) {
    const auto L = make_interest_channel(8, 0.4);
    EXPECT_THROW(estimate_ambiguity(L, FirFilter::zeros(8)), std::domain_error);
    EXPECT_THROW(estimate_ambiguity(FirFilter::zeros(8), L), std::domain_error);
}

TEST(PowerRescale, RecoversScale) {
    const auto L = make_interest_channel(64, 0.4);
    const Signal x = generate_oversampled_noise(100000, 10.0, 3, 32, 21);
    const Signal y = filter_signal(L, x);
    double power = 0.0;
    for (std::size_t n = L.size(); n < y.size(); ++n) power += y[n] * y[n];
    power /= static_cast<double>(y.size() - L.size());

    const Signal probe = generate_oversampled_noise(100000, 10.0, 3, 32, 22);
    const auto fixed = power_rescale(L.scaled(2.0), probe, power);
    EXPECT_NEAR(std::sqrt(fixed.energy() / L.energy()), 1.0, 0.02);
    const auto same = power_rescale(L, probe, power);
    EXPECT_NEAR(same[0] / L[0], 1.0, 0.02);
}

TEST(PowerRescale, Errors) {
    const auto L = make_interest_channel(8, 0.4);
    const Signal x = generate_oversampled_noise(20000, 1.0, 3, 8, 1);
    EXPECT_THROW(power_rescale(L, x, 0.0), std::invalid_argument);
    EXPECT_THROW(power_rescale(L, Signal(100, 1.0), 1.0), std::invalid_argument);
    EXPECT_THROW(power_rescale(FirFilter::zeros(8), x, 1.0), std::domain_error);
}

TEST(Misalignment, ExactMatchFloored) {
    const auto L = make_interest_channel(64, 0.4);
    EXPECT_LE(misalignment_db(L, L), -120.0);
}

TEST(Misalignment, TenPercentImpulse) {
    const auto L = make_interest_channel(64, 0.4);
    std::vector<double> c = L.vector();
    c[0] += 0.1;
    EXPECT_NEAR(misalignment_db(L, FirFilter(c)), -20.0, 1e-9);
}

TEST(Misalignment, CompensationRoundTrip) {
    const auto base = synthetic::make_shifted_pair(64, 0.4, 0.125, 0.0);
    Rng rng(3);
    const auto error = synthetic::smooth_and_pad(random_filter(rng, 64), 6, 96).scaled(0.1);
    std::vector<double> c = base.L_true.vector();
    for (std::size_t m = 0; m < c.size(); ++m) c[m] += error[m];
    const FirFilter noisy(c);
    const double plain = misalignment_db(base.L_true, noisy);

    const double tau = 0.35;
    const double alpha = 1.7;
    const auto transformed = sinc_shift(noisy, tau, noisy.size()).scaled(alpha);
    const AmbiguityEstimate comp{tau, alpha, std::nullopt, 0.0};
    EXPECT_NEAR(misalignment_db(base.L_true, transformed, comp), plain, 1e-6);
}

TEST(Misalignment, InBandMatchesTimeDomainForBandlimitedError) {
    const auto L = make_interest_channel(64, 0.4);
    EXPECT_LE(misalignment_db_inband(L, L, {}, kPi / 3.0), -120.0);
    EXPECT_NEAR(misalignment_db_inband(L, L.scaled(1.1), {}, kPi / 3.0), -20.0, 1e-9);
}
