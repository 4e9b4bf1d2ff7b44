#pragma once

#include <functional>
#include <vector>

#include "mimoee/efficiency.hpp"

namespace mimoee {

struct Bracket {
    double lo = 1e-6;
    double hi = 10.0;
    double rel_tol = 1e-6;
};

struct OptimumReport {
    double argmax = 0.0;
    double value = 0.0;
    double first_order_residual = 0.0; // dimensionless; 0 when not applicable
    int evaluations = 0;
    bool boundary_hit = false;
    bool non_unimodal_detected = false;
    bool foc_bracketed = false; // a first-order-condition root was found
    double foc_argmax = 0.0;    // that root (when foc_bracketed)
};

/// Golden-section search in log domain with a 64-point pre-scan; flags
/// boundary and multi-peak cases instead of failing.
OptimumReport maximize_unimodal(const std::function<double(double)>& f,
                                const Bracket& bracket);

/// P* of nu_T(P, Q_WF(P), H_hat) over (0, P_max]; water-filling re-solved at
/// every P. first_order_residual = |dF_L/dP (P*+b/a) - F_L| / F_L by central
/// differences.
OptimumReport optimal_power_csitr(const ChannelEstimate& estimate,
                                  const SystemConfig& cfg,
                                  FlFlavor flavor = FlFlavor::gaussian);

/// Same objective evaluated on the squared singular values of the
/// unit-variance channel directly.
OptimumReport optimal_power_csitr(const Eigen::VectorXd& d_squared,
                                  const SystemConfig& cfg,
                                  FlFlavor flavor = FlFlavor::gaussian);

/// P* of nu_R(P). Closed-form sources with min(M,N)=1 cross-check the search
/// against the first-order-condition root (bisection on
/// (rho + b/(a sigma')) dlnf/drho_eff * drho_eff/drho = 1). Monte-Carlo
/// sources locate P* on the kernel-smoothed common-random-number curve.
OptimumReport optimal_power_nocsit(const SystemConfig& cfg,
                                   const SuccessSource& source);

struct TrainingReport {
    int t_s_star = 0;
    double p_star = 0.0;          // inner optimal power at t_s_star (0 if fixed-P)
    double nu_star = 0.0;
    std::vector<double> nu_per_t_s; // indexed from t_s = M
    bool concave_ok = true;        // discrete second differences <= tol
    bool used_tail = false;        // deep-outage tail ranking was needed
    SuccessProb success_at_star;
};

/// Joint optimum: for each feasible t_s solve for P*, then take the integer
/// argmax of nu_R(P*(t_s), t_s). The power-optimized sequence is concave in
/// t_s; second differences are checked (<= 1e-9 * peak) and flagged when
/// violated.
TrainingReport optimal_training(const SystemConfig& cfg,
                                const SuccessSource& source);

/// Fixed-power variant, argmax over t_s of nu_R(P, t_s). When Monte Carlo
/// resolves no candidate (all successes zero), candidates are ranked by the
/// deep-outage tail score instead and the report is flagged.
TrainingReport optimal_training_fixed_power(double power,
                                            const SystemConfig& cfg,
                                            const SuccessSource& source);

struct AntennaChoice {
    int num_tx = 0;
    int t_s = 0;
    double nu = 0.0;
    SuccessProb success;
    bool used_tail = false;
    bool feasible = false;
};

struct AntennaReport {
    AntennaChoice best;
    std::vector<AntennaChoice> per_m;
};

/// Joint argmax over M in [1, m_max] and t_s in [M, T_s-1] at fixed power.
/// Uses the per-antenna power model a*P + M*b0 when cfg.b0 is set.
AntennaReport optimal_antennas_at_power(double power, const SystemConfig& cfg,
                                        int m_max, const SuccessSource& source);

struct SisoLowSnrRoot {
    double x = 0.0;        // root of (1/sqrt(pi)) (L+x) e^{-x^2} = Q(x)
    double residual = 0.0; // equation value at the returned root
    double snr_ratio = 0.0; // rho* |h|^2 / xi = L / (L + x)
};

/// Low-SNR finite-block SISO constant; depends only on the code length L.
SisoLowSnrRoot siso_lowsnr_root(int block_length);

/// P* of the infinite-block efficiency I_CSITR(P, Q_WF(P)) / (aP + b);
/// golden search cross-checked against the stationarity root
/// dI/dP (aP+b) - a I = 0 with the analytic water-level derivative
/// dI/dP = 1 / (c mu sigma2 ln 2), c = P/(M sigma2).
OptimumReport optimal_power_infinite_block(const Eigen::VectorXd& d_squared,
                                           const SystemConfig& cfg);

/// Grid witness of quasi-concavity: exactly one rise->fall switch on the
/// sampled curve, allowing per-point slack |tol[i]| (0 for closed forms,
/// propagated MC noise otherwise). Requires an interior peak.
bool unimodal_on_grid(const std::vector<double>& values,
                      const std::vector<double>& tol);

} // namespace mimoee
