#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>

#include "mimoee/channel.hpp"
#include "mimoee/rng.hpp"

using namespace mimoee;

TEST_CASE("sample_channel is deterministic and rejects bad dims") {
    const ChannelMatrix a = sample_channel(2, 2, 42);
    const ChannelMatrix b = sample_channel(2, 2, 42);
    CHECK(a == b);
    CHECK(sample_channel(2, 2, 43) != a);
    CHECK_THROWS_AS(sample_channel(0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_channel(1, 0, 1), std::invalid_argument);
}

TEST_CASE("entries are CN(0,1): mean, variance, |h|^2 exponential") {
    const int draws = 100000;
    std::complex<double> mean = 0.0;
    double var = 0.0;
    for (int i = 0; i < draws; ++i) {
        const ChannelMatrix h = sample_channel(4, 4, derive_stream(7, i));
        mean += h.sum();
        var += h.squaredNorm();
    }
    const double n = static_cast<double>(draws) * 16;
    mean /= n;
    var /= n;
    CHECK(std::abs(mean) < 3.0 / std::sqrt(n));
    CHECK(var > 0.99);
    CHECK(var < 1.01);

    // |h|^2 for a SISO draw is Exp(1): mean 1, Pr[> 1] = 1/e.
    double h2_mean = 0.0;
    int above = 0;
    for (int i = 0; i < draws; ++i) {
        const double h2 =
            std::norm(sample_channel(1, 1, derive_stream(11, i))(0, 0));
        h2_mean += h2;
        if (h2 > 1.0) ++above;
    }
    h2_mean /= draws;
    CHECK(h2_mean == doctest::Approx(1.0).epsilon(0.02));
    CHECK(static_cast<double>(above) / draws ==
          doctest::Approx(std::exp(-1.0)).epsilon(0.02));
}

TEST_CASE("estimation_error_variance formula and edge cases") {
    CHECK(estimation_error_variance(0.0, 4, 4) == 1.0);
    CHECK(estimation_error_variance(1.0, 4, 2) == doctest::Approx(1.0 / 3.0));
    CHECK(estimation_error_variance(1e12, 4, 4) < 1e-11);
    CHECK_THROWS_WITH_AS(estimation_error_variance(1.0, 3, 4),
                         doctest::Contains("training too short"),
                         std::invalid_argument);
    CHECK_THROWS_AS(estimation_error_variance(-0.5, 4, 4),
                    std::invalid_argument);
}

TEST_CASE("simulate_estimate decomposition statistics") {
    const double rho = 1.0;
    const int t_s = 4, m = 2, n = 2;
    const double err_var = estimation_error_variance(rho, t_s, m);
    const int draws = 50000;
    double err_power = 0.0, est_power = 0.0, true_power = 0.0;
    std::complex<double> cross = 0.0;
    for (int i = 0; i < draws; ++i) {
        const auto [h, est] = simulate_estimate(m, n, rho, t_s,
                                                derive_stream(3, i));
        CHECK(est.error_variance == err_var);
        CHECK(est.training_symbols == t_s);
        const ChannelMatrix delta = h - est.estimate;
        err_power += delta.squaredNorm();
        est_power += est.estimate.squaredNorm();
        true_power += h.squaredNorm();
        cross += (est.estimate.conjugate().array() * delta.array()).sum();
    }
    const double entries = static_cast<double>(draws) * m * n;
    CHECK(err_power / entries == doctest::Approx(err_var).epsilon(0.02));
    CHECK(est_power / entries == doctest::Approx(1.0 - err_var).epsilon(0.02));
    CHECK(true_power / entries == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(cross) / entries < 3.0 / std::sqrt(entries));
}

TEST_CASE("simulate_estimate approaches perfect CSI at huge SNR") {
    const auto [h, est] = simulate_estimate(2, 2, 1e12, 4, 5);
    CHECK((h - est.estimate).norm() < 1e-4);
    CHECK(est.error_variance < 1e-11);
}

TEST_CASE("normalized estimate rescales to unit variance") {
    const auto [h, est] = simulate_estimate(2, 2, 2.0, 4, 9);
    const ChannelMatrix tilde = est.normalized();
    const double scale = std::sqrt(1.0 - est.error_variance);
    CHECK((tilde * scale - est.estimate).norm() < 1e-14);
    ChannelEstimate hopeless{ChannelMatrix::Zero(2, 2), 1.0, 4};
    CHECK_THROWS_AS(hopeless.normalized(), std::domain_error);
}

TEST_CASE("effective SNR values and limits") {
    CHECK(effective_snr(0.0, 1.0) == 0.0);
    CHECK(effective_snr(1.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(effective_snr(2.0, 1e9) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK_THROWS_AS(effective_snr(-1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(effective_snr(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("training only loses information and monotonicity holds") {
    Rng rng(17);
    for (int i = 0; i < 1000; ++i) {
        const double rho = std::exp(6.0 * rng.uniform() - 3.0);
        const double tau = std::exp(6.0 * rng.uniform() - 3.0);
        const double re = effective_snr(rho, tau);
        CHECK(re > 0.0);
        CHECK(re < rho);
        CHECK(effective_snr(rho * 1.01, tau) > re);
        CHECK(effective_snr(rho, tau * 1.01) > re);
    }
}

TEST_CASE("snr_from_effective inverts effective_snr") {
    CHECK(snr_from_effective(0.0, 1.0) == 0.0);
    CHECK(snr_from_effective(1.0 / 3.0, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(snr_from_effective(-1.0, 1.0), std::invalid_argument);

    Rng rng(23);
    for (int i = 0; i < 1000; ++i) {
        const double x = std::exp(10.0 * rng.uniform() - 5.0);
        const double tau = std::exp(6.0 * rng.uniform() - 3.0);
        const double rho = snr_from_effective(x, tau);
        CHECK(effective_snr(rho, tau) == doctest::Approx(x).epsilon(1e-10));
    }
}

namespace {

double central_diff(const std::function<double(double)>& f, double x) {
    const double h = 1e-6 * std::max(1.0, std::abs(x));
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

} // namespace

TEST_CASE("analytic derivatives match central differences") {
    CHECK(d_effective_snr_d_rho(0.0, 1.0) == 0.0);
    CHECK(d_effective_snr_d_tau(1.0, 1.0) ==
          doctest::Approx(2.0 / 9.0).epsilon(1e-14));

    Rng rng(31);
    for (int i = 0; i < 1000; ++i) {
        const double rho = std::exp(6.0 * rng.uniform() - 3.0);
        const double tau = std::exp(6.0 * rng.uniform() - 3.0);
        const double fd_rho =
            central_diff([&](double r) { return effective_snr(r, tau); }, rho);
        const double fd_tau =
            central_diff([&](double t) { return effective_snr(rho, t); }, tau);
        CHECK(d_effective_snr_d_rho(rho, tau) ==
              doctest::Approx(fd_rho).epsilon(1e-6));
        CHECK(d_effective_snr_d_tau(rho, tau) ==
              doctest::Approx(fd_tau).epsilon(1e-6));
    }
}
