#include "mimoee/efficiency.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "mimoee/rng.hpp"

namespace mimoee {

double consumed_power(double power, const PowerModel& model, int num_tx) {
    if (power < 0.0)
        throw std::invalid_argument("consumed_power: power must be >= 0");
    if (model.per_antenna_b0)
        return model.a * power + num_tx * (*model.per_antenna_b0);
    return model.a * power + model.b;
}

void SystemConfig::validate() const {
    auto fail = [](const std::string& what) {
        throw std::invalid_argument("SystemConfig: " + what);
    };
    if (M < 1) fail("M must be >= 1");
    if (N < 1) fail("N must be >= 1");
    if (t_s < M)
        fail("t_s must be >= M (at least one pilot symbol per transmit "
             "antenna)");
    if (t_f_s < 0) fail("t_f_s must be >= 0");
    if (t_s + t_f_s >= T_s) fail("t_s + t_f_s must be < T_s");
    if (S_d <= 0.0) fail("S_d must be > 0");
    if (L < 1) fail("L must be >= 1");
    if (R <= 0.0) fail("R must be > 0");
    if (R0 <= 0.0) fail("R0 must be > 0");
    if (xi < 0.0) fail("xi must be >= 0");
    if (std::abs(xi - R / R0) > 1e-9 * std::max(1.0, xi))
        fail("xi must equal R / R0");
    if (a <= 0.0) fail("a must be > 0");
    if (b < 0.0) fail("b must be >= 0");
    if (b0 && *b0 < 0.0) fail("b0 must be >= 0");
    if (sigma2 <= 0.0) fail("sigma2 must be > 0");
    if (P_max <= 0.0) fail("P_max must be > 0");
}

namespace {

void check_power(double power, const SystemConfig& cfg, const char* who) {
    if (power <= 0.0)
        throw std::invalid_argument(std::string(who) + ": power must be > 0");
    if (power > cfg.P_max * (1.0 + 1e-12))
        throw std::invalid_argument(std::string(who) +
                                    ": power exceeds P_max");
}

SuccessProb apply_flavor(double mutual_info, double rho,
                         const SystemConfig& cfg, FlFlavor flavor) {
    if (flavor == FlFlavor::gaussian)
        return f_L_gaussian(mutual_info, cfg.xi, cfg.L, rho);
    return f_L_arq(mutual_info - cfg.xi, cfg.T_s * cfg.S_d);
}

} // namespace

EfficiencyResult nu_T(double power, const PowerAllocation& alloc,
                      const Eigen::VectorXd& d_squared,
                      const SystemConfig& cfg, FlFlavor flavor) {
    check_power(power, cfg, "nu_T");
    const double rho = power / cfg.sigma2;
    const double rho_eff = effective_snr(rho, cfg.tau());
    const double info = mutual_info_icsitr(rho_eff, alloc.weights, d_squared,
                                           cfg.M);
    const SuccessProb fl = apply_flavor(info, rho, cfg, flavor);
    EfficiencyResult out;
    out.power = power;
    out.t_s = cfg.t_s;
    out.num_tx = cfg.M;
    out.success = fl;
    out.goodput = cfg.R * cfg.goodput_factor_csitr();
    out.consumed = consumed_power(power, cfg.power_model(), cfg.M);
    out.nu = out.goodput * fl.value / out.consumed;
    return out;
}

EfficiencyResult nu_T_waterfilled(double power,
                                  const Eigen::VectorXd& d_squared,
                                  const SystemConfig& cfg, FlFlavor flavor) {
    check_power(power, cfg, "nu_T");
    const double rho = power / cfg.sigma2;
    const double rho_eff = effective_snr(rho, cfg.tau());
    const PowerAllocation alloc =
        waterfill(d_squared, rho_eff / cfg.M, static_cast<double>(cfg.M));
    return nu_T(power, alloc, d_squared, cfg, flavor);
}

SuccessSource SuccessSource::closed_form() { return SuccessSource(); }

SuccessSource SuccessSource::monte_carlo(int samples, std::uint64_t seed) {
    if (samples < 1)
        throw std::invalid_argument("SuccessSource: samples must be >= 1");
    SuccessSource src;
    src.monte_carlo_ = true;
    src.samples_ = samples;
    src.seed_ = seed;
    return src;
}

const OutageSampler* SuccessSource::sampler(int num_tx, int num_rx,
                                            double xi) const {
    if (!monte_carlo_) return nullptr;
    std::uint64_t xi_bits;
    static_assert(sizeof(xi_bits) == sizeof(xi));
    std::memcpy(&xi_bits, &xi, sizeof(xi));
    const Key key{num_tx, num_rx, xi_bits};
    std::lock_guard<std::mutex> lock(*mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        // Stream derived from (seed, M, N, xi) so every curve has its own
        // reproducible draws, independent of evaluation order.
        const std::uint64_t stream = derive_stream(
            derive_stream(seed_, (static_cast<std::uint64_t>(num_tx) << 32) |
                                     static_cast<std::uint64_t>(num_rx)),
            xi_bits);
        it = cache_
                 .emplace(key, std::make_shared<OutageSampler>(
                                   num_tx, num_rx, xi, samples_, stream))
                 .first;
    }
    return it->second.get();
}

SuccessProb SuccessSource::eval(int num_tx, int num_rx, double rho_eff,
                                double xi) const {
    if (!monte_carlo_)
        return success_closed_form(num_tx, num_rx, rho_eff, xi);
    return sampler(num_tx, num_rx, xi)->success(rho_eff);
}

EfficiencyResult nu_R(double power, const SystemConfig& cfg,
                      const SuccessSource& source) {
    check_power(power, cfg, "nu_R");
    const double rho = power / cfg.sigma2;
    const double rho_eff = effective_snr(rho, cfg.tau());
    const SuccessProb s = source.eval(cfg.M, cfg.N, rho_eff, cfg.xi);
    EfficiencyResult out;
    out.power = power;
    out.t_s = cfg.t_s;
    out.num_tx = cfg.M;
    out.success = s;
    out.goodput = cfg.R * cfg.goodput_factor_nocsit();
    out.consumed = consumed_power(power, cfg.power_model(), cfg.M);
    out.nu = out.goodput * s.value / out.consumed;
    return out;
}

} // namespace mimoee
