#pragma once

#include <Eigen/Dense>

#include "mimoee/channel.hpp"

namespace mimoee {

/// H = U * diag(singular_values) * V^H, singular values sorted descending.
struct SvdFactors {
    Eigen::MatrixXcd u;
    Eigen::VectorXd singular_values;
    Eigen::MatrixXcd v;
};

SvdFactors svd(const ChannelMatrix& h);

/// Water-filling weights over the channel eigenmodes plus the water level mu.
/// weights sum to the power budget; inactive modes get exactly zero.
struct PowerAllocation {
    Eigen::VectorXd weights;
    double water_level = 0.0;
};

/// Maximizes sum_i log2(1 + mode_snr * d_squared[i] * s_i) subject to
/// sum s_i = total_power, s_i >= 0. Active-set iteration on
/// s_i = (mu - 1/(mode_snr * d_i^2))^+ ; exact in at most K passes.
/// The MIMO pipeline calls this with mode_snr = rho_eff / M, total_power = M.
PowerAllocation waterfill(const Eigen::VectorXd& d_squared, double mode_snr,
                          double total_power);

/// Mutual information log2|I + P/(M sigma2) H Q H^H| in bits per channel use,
/// computed through the eigenvalues of the Hermitian Gram matrix.
double mutual_info_csitr(double power, const Eigen::MatrixXcd& q,
                         const ChannelMatrix& h, double sigma2);

/// Diagonalized form sum_i log2(1 + (rho_eff/M) d_i^2 s_i); equals
/// mutual_info_csitr at the same channel with rho replaced by rho_eff.
double mutual_info_icsitr(double rho_eff, const Eigen::VectorXd& weights,
                          const Eigen::VectorXd& d_squared, int num_tx);

/// No-CSIT bound log2|I + (rho_eff/M) H_hat H_hat^H| (uniform Q = I_M).
double mutual_info_icsir(double rho_eff, const ChannelMatrix& h_hat);

/// Q = V diag(weights, 0..) V^H; trace equals the allocation budget.
Eigen::MatrixXcd precoding_matrix(const SvdFactors& factors,
                                  const PowerAllocation& alloc);

} // namespace mimoee
