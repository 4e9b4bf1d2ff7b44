#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>

#include "mimoee/channel.hpp"
#include "mimoee/precoding.hpp"
#include "mimoee/success.hpp"

namespace mimoee {

/// Affine consumed-power model: a*P + b, or a*P + M*b0 per antenna.
struct PowerModel {
    double a = 1.0;                      // RF chain efficiency factor
    double b = 0.0;                      // fixed consumption, watts
    std::optional<double> per_antenna_b0; // watts per transmit antenna
};

double consumed_power(double power, const PowerModel& model, int num_tx);

/// All scalar system parameters. Symbol counts internally; seconds appear
/// only through S_d at reporting boundaries.
struct SystemConfig {
    int M = 4;            // transmit antennas
    int N = 4;            // receive antennas
    int T_s = 55;         // coherence block, symbols
    int t_s = 4;          // training, symbols (M <= t_s < T_s)
    int t_f_s = 0;        // feedback, symbols (CSITR only)
    double S_d = 15e-6;   // symbol duration, seconds
    int L = 100;          // code length, symbols
    double R = 1600.0;    // rate, bit/s
    double R0 = 100.0;    // bandwidth-like normalizer, Hz
    double xi = 16.0;     // spectral efficiency, = R/R0
    double a = 1.0;
    double b = 0.0;                      // watts
    std::optional<double> b0;            // per-antenna fixed cost, watts
    double sigma2 = 1e-3; // effective noise power sigma' = sigma^2/L, watts
    double P_max = 10.0;  // watts

    double tau() const { return static_cast<double>(t_s) / M; }
    PowerModel power_model() const { return {a, b, b0}; }
    double goodput_factor_csitr() const {
        return 1.0 - static_cast<double>(t_s + t_f_s) / T_s;
    }
    double goodput_factor_nocsit() const {
        return 1.0 - static_cast<double>(t_s) / T_s;
    }

    /// Throws std::invalid_argument naming the violated field.
    void validate() const;
};

enum class FlFlavor { gaussian, arq };

struct EfficiencyResult {
    double power = 0.0;        // radiated power P, watts
    int t_s = 0;
    int num_tx = 0;
    SuccessProb success;
    double nu = 0.0;           // bits per joule
    double goodput = 0.0;      // bit/s after training/feedback overhead
    double consumed = 0.0;     // watts
};

/// Energy efficiency with imperfect CSITR:
/// nu_T = R (1-(t_s+t_f)/T_s) F_L[I_ICSITR - xi] / consumed(P).
/// d_squared are the squared singular values of the unit-variance channel
/// estimate; alloc is the power allocation in use (water-filled or uniform).
EfficiencyResult nu_T(double power, const PowerAllocation& alloc,
                      const Eigen::VectorXd& d_squared,
                      const SystemConfig& cfg, FlFlavor flavor);

/// nu_T with the allocation re-water-filled at this power's effective SNR.
EfficiencyResult nu_T_waterfilled(double power,
                                  const Eigen::VectorXd& d_squared,
                                  const SystemConfig& cfg, FlFlavor flavor);

/// How nu_R obtains Pr[I_ICSIR >= xi]. Closed form covers min(M,N)=1 and 2x2;
/// Monte Carlo uses a cached common-random-number sampler per (M,N,xi).
class SuccessSource {
  public:
    static SuccessSource closed_form();
    static SuccessSource monte_carlo(int samples, std::uint64_t seed);

    SuccessProb eval(int num_tx, int num_rx, double rho_eff, double xi) const;

    /// Sampler backing the MC estimate (nullptr for closed forms).
    const OutageSampler* sampler(int num_tx, int num_rx, double xi) const;

    bool is_monte_carlo() const { return monte_carlo_; }
    int samples() const { return samples_; }
    std::uint64_t seed() const { return seed_; }

  private:
    SuccessSource() = default;
    bool monte_carlo_ = false;
    int samples_ = 0;
    std::uint64_t seed_ = 0;
    struct Key {
        int m, n;
        std::uint64_t xi_bits;
        bool operator<(const Key& o) const {
            return std::tie(m, n, xi_bits) < std::tie(o.m, o.n, o.xi_bits);
        }
    };
    mutable std::map<Key, std::shared_ptr<OutageSampler>> cache_;
    mutable std::shared_ptr<std::mutex> mutex_ = std::make_shared<std::mutex>();
};

/// Energy efficiency without CSIT:
/// nu_R = R (1-t_s/T_s) Pr[I_ICSIR(rho_eff) >= xi] / consumed(P).
EfficiencyResult nu_R(double power, const SystemConfig& cfg,
                      const SuccessSource& source);

} // namespace mimoee
