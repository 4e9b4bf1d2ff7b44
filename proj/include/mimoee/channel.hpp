#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

namespace mimoee {

using ChannelMatrix = Eigen::MatrixXcd;

/// N x M matrix of i.i.d. CN(0,1) fading coefficients, deterministic in seed.
ChannelMatrix sample_channel(int num_tx, int num_rx, std::uint64_t seed);

/// Variance of the channel estimation error after t_s orthogonal pilot
/// symbols at SNR rho: sigma_E^2 = 1 / (1 + rho * t_s / M).
/// Requires t_s >= M (as many pilot measurements as unknowns per row).
double estimation_error_variance(double rho, int t_s, int num_tx);

/// Channel estimate together with the estimation-error variance it was
/// built with. Estimate entries have per-entry variance 1 - error_variance.
struct ChannelEstimate {
    ChannelMatrix estimate;   // H_hat
    double error_variance;    // sigma_E^2 in (0, 1]
    int training_symbols;     // t_s

    /// Unit-variance rescaled estimate used by the effective-SNR
    /// equivalence model. Estimate must carry nonzero signal.
    ChannelMatrix normalized() const;
};

/// Draws a true channel H and an estimate H_hat such that H = H_hat + dH with
/// H_hat ~ CN(0, 1 - sigma_E^2) and dH ~ CN(0, sigma_E^2), independent.
std::pair<ChannelMatrix, ChannelEstimate>
simulate_estimate(int num_tx, int num_rx, double rho, int t_s, std::uint64_t seed);

/// Effective SNR of a trained link: rho_eff = tau*rho^2 / (1 + rho + tau*rho),
/// tau = t_s / M. Always strictly below rho for finite tau.
double effective_snr(double rho, double tau);

/// Exact inverse of effective_snr at fixed tau (positive root of the
/// quadratic tau*rho^2 - rho_eff*(1+tau)*rho - rho_eff = 0).
double snr_from_effective(double rho_eff, double tau);

/// d rho_eff / d rho = tau*rho*(rho*(1+tau)+2) / (1+rho*(1+tau))^2.
double d_effective_snr_d_rho(double rho, double tau);

/// d rho_eff / d tau = rho^2*(rho+1) / (1+rho*(1+tau))^2.
double d_effective_snr_d_tau(double rho, double tau);

} // namespace mimoee
