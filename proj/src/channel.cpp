#include "mimoee/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "mimoee/rng.hpp"

namespace mimoee {

namespace {

void check_dims(int num_tx, int num_rx) {
    if (num_tx < 1)
        throw std::invalid_argument("sample_channel: num_tx must be >= 1");
    if (num_rx < 1)
        throw std::invalid_argument("sample_channel: num_rx must be >= 1");
}

ChannelMatrix sample_cn(int num_tx, int num_rx, double stddev, Rng& rng) {
    ChannelMatrix h(num_rx, num_tx);
    for (int r = 0; r < num_rx; ++r)
        for (int c = 0; c < num_tx; ++c)
            h(r, c) = stddev * rng.complex_gaussian();
    return h;
}

} // namespace

ChannelMatrix sample_channel(int num_tx, int num_rx, std::uint64_t seed) {
    check_dims(num_tx, num_rx);
    Rng rng(seed);
    return sample_cn(num_tx, num_rx, 1.0, rng);
}

double estimation_error_variance(double rho, int t_s, int num_tx) {
    if (rho < 0.0)
        throw std::invalid_argument("estimation_error_variance: rho must be >= 0");
    if (num_tx < 1)
        throw std::invalid_argument("estimation_error_variance: num_tx must be >= 1");
    if (t_s < num_tx)
        throw std::invalid_argument(
            "estimation_error_variance: training too short, t_s must be >= M "
            "(one pilot measurement per transmit antenna)");
    return 1.0 / (1.0 + rho * static_cast<double>(t_s) / num_tx);
}

ChannelMatrix ChannelEstimate::normalized() const {
    const double signal_var = 1.0 - error_variance;
    if (signal_var <= 0.0)
        throw std::domain_error(
            "ChannelEstimate::normalized: estimate carries no signal "
            "(error variance is 1)");
    return estimate / std::sqrt(signal_var);
}

std::pair<ChannelMatrix, ChannelEstimate>
simulate_estimate(int num_tx, int num_rx, double rho, int t_s,
                  std::uint64_t seed) {
    check_dims(num_tx, num_rx);
    const double err_var = estimation_error_variance(rho, t_s, num_tx);
    Rng rng(seed);
    ChannelMatrix h_hat = sample_cn(num_tx, num_rx, std::sqrt(1.0 - err_var), rng);
    ChannelMatrix delta = sample_cn(num_tx, num_rx, std::sqrt(err_var), rng);
    ChannelEstimate est{h_hat, err_var, t_s};
    return {h_hat + delta, std::move(est)};
}

double effective_snr(double rho, double tau) {
    if (rho < 0.0)
        throw std::invalid_argument("effective_snr: rho must be >= 0");
    if (tau <= 0.0)
        throw std::invalid_argument("effective_snr: tau must be > 0");
    return tau * rho * rho / (1.0 + rho + tau * rho);
}

double snr_from_effective(double rho_eff, double tau) {
    if (rho_eff < 0.0)
        throw std::invalid_argument("snr_from_effective: rho_eff must be >= 0");
    if (tau <= 0.0)
        throw std::invalid_argument("snr_from_effective: tau must be > 0");
    if (rho_eff == 0.0) return 0.0;
    const double p = 1.0 + tau;
    const double disc = rho_eff * rho_eff * p * p + 4.0 * tau * rho_eff;
    return (rho_eff * p + std::sqrt(disc)) / (2.0 * tau);
}

double d_effective_snr_d_rho(double rho, double tau) {
    if (rho < 0.0)
        throw std::invalid_argument("d_effective_snr_d_rho: rho must be >= 0");
    if (tau <= 0.0)
        throw std::invalid_argument("d_effective_snr_d_rho: tau must be > 0");
    const double den = 1.0 + rho * (1.0 + tau);
    return tau * rho * (rho * (1.0 + tau) + 2.0) / (den * den);
}

double d_effective_snr_d_tau(double rho, double tau) {
    if (rho < 0.0)
        throw std::invalid_argument("d_effective_snr_d_tau: rho must be >= 0");
    if (tau <= 0.0)
        throw std::invalid_argument("d_effective_snr_d_tau: tau must be > 0");
    const double den = 1.0 + rho * (1.0 + tau);
    return rho * rho * (rho + 1.0) / (den * den);
}

} // namespace mimoee
