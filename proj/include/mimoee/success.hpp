#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

namespace mimoee {

/// Transmission success probability; std_error is 0 for closed forms.
struct SuccessProb {
    double value = 0.0;
    double std_error = 0.0;
};

/// Tail probability of the standard normal, Q(x) = 1 - Phi(x).
double q_function(double x);

/// Regularized lower incomplete gamma P(a,x) = gamma(a,x)/Gamma(a), a>0, x>=0.
double regularized_lower_gamma(double a, double x);

/// Complement Q(a,x) = 1 - P(a,x), evaluated without cancellation in the tail.
double regularized_upper_gamma(double a, double x);

/// Wilson score interval for a binomial proportion (z = 1.96 by default).
std::pair<double, double> wilson_interval(long successes, long trials,
                                          double z = 1.96);

/// Finite-block Gaussian approximation:
/// F_L = Q( (xi - mutual_info) / sqrt(2 rho / ((1+rho) L)) ).
SuccessProb f_L_gaussian(double mutual_info, double xi, int block_length,
                         double rho);

/// ARQ-style approximation F_L(delta) = Q(-T * delta), delta = I - xi.
SuccessProb f_L_arq(double delta, double block_duration);

/// SISO Rayleigh success exp(-(2^xi - 1)/rho_eff); exact for |h|^2 ~ Exp(1).
SuccessProb success_siso_closed(double rho_eff, double xi);

/// MISO (M transmit, 1 receive) success with uniform allocation:
/// Pr[ log2(1 + (rho_eff/M)||h||^2) >= xi ] = Q_gamma(M, M(2^xi-1)/rho_eff).
SuccessProb success_miso(double rho_eff, int num_tx, double xi);

/// Exact 2x2 success Pr[(1+c l1)(1+c l2) >= 2^xi], c = rho_eff/2, integrated
/// over the complex-Wishart eigenvalue density (deterministic quadrature).
SuccessProb success_mimo22(double rho_eff, double xi);

/// Closed-form dispatch: min(M,N) == 1 -> regularized-gamma form,
/// M == N == 2 -> quadrature. Throws otherwise.
SuccessProb success_closed_form(int num_tx, int num_rx, double rho_eff,
                                double xi);

/// Leading large-deviation exponent of ln Pr[I >= xi] for deep outage:
/// -(M/rho_eff) * min_{1<=k<=min(M,N)} k (2^(xi/k) - 1).
/// Equals ln success_siso_closed exactly for M = 1. Used only to rank
/// candidates when Monte Carlo cannot resolve the tail.
double log_success_tail(int num_tx, int num_rx, double rho_eff, double xi);

/// Per-sample rho_eff thresholds for the no-CSIT success indicator,
/// drawn once with common random numbers. success(rho_eff) is then a
/// nondecreasing step function of rho_eff, identical across any number of
/// evaluations, and smooth surrogates share the same draws.
class OutageSampler {
  public:
    OutageSampler(int num_tx, int num_rx, double xi, int samples,
                  std::uint64_t seed);

    /// Fraction of draws with mutual_info_icsir >= xi, with binomial std error.
    SuccessProb success(double rho_eff) const;

    /// Gaussian-kernel smoothed estimate of the same curve (log-threshold
    /// domain, Silverman bandwidth). Monotone and C-infinity; used to locate
    /// argmax positions, never reported as the success value itself.
    double kernel_success(double rho_eff) const;

    /// Sorted rho_eff values where the step curve jumps.
    const std::vector<double>& thresholds() const { return thresholds_; }

    int samples() const { return static_cast<int>(thresholds_.size()); }
    int num_tx() const { return num_tx_; }
    int num_rx() const { return num_rx_; }
    double xi() const { return xi_; }

  private:
    int num_tx_;
    int num_rx_;
    double xi_;
    std::vector<double> thresholds_;     // sorted, may hold +inf entries
    std::vector<double> log_thresholds_; // finite entries only
    double bandwidth_ = 0.0;
};

/// Monte-Carlo success estimate; deterministic given (seed, samples) and
/// independent of caller threading (single sequential stream per call).
SuccessProb success_mc(int num_tx, int num_rx, double rho_eff, double xi,
                       int samples, std::uint64_t seed);

} // namespace mimoee
