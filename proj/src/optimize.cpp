#include "mimoee/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mimoee {

namespace {

constexpr int kPreScanPoints = 64;
constexpr double kGolden = 0.6180339887498949;

struct Scan {
    std::vector<double> x;
    std::vector<double> y;
    int best = 0;
    int local_maxima = 0;
};

Scan pre_scan(const std::function<double(double)>& f, double lo, double hi,
              int* evals) {
    Scan scan;
    scan.x.resize(kPreScanPoints);
    scan.y.resize(kPreScanPoints);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < kPreScanPoints; ++i) {
        scan.x[i] = std::exp(llo + (lhi - llo) * i / (kPreScanPoints - 1));
        scan.y[i] = f(scan.x[i]);
        ++*evals;
        if (!std::isfinite(scan.y[i]))
            throw std::runtime_error("maximize_unimodal: non-finite value at x=" +
                                     std::to_string(scan.x[i]));
        if (scan.y[i] > scan.y[scan.best]) scan.best = i;
    }
    for (int i = 1; i + 1 < kPreScanPoints; ++i)
        if (scan.y[i] > scan.y[i - 1] && scan.y[i] > scan.y[i + 1])
            ++scan.local_maxima;
    return scan;
}

} // namespace

OptimumReport maximize_unimodal(const std::function<double(double)>& f,
                                const Bracket& bracket) {
    if (!(bracket.lo > 0.0) || !(bracket.hi > bracket.lo))
        throw std::invalid_argument("maximize_unimodal: need 0 < lo < hi");
    if (!(bracket.rel_tol > 0.0))
        throw std::invalid_argument("maximize_unimodal: rel_tol must be > 0");

    OptimumReport report;
    const Scan scan = pre_scan(f, bracket.lo, bracket.hi, &report.evaluations);
    report.non_unimodal_detected = scan.local_maxima >= 2;
    report.boundary_hit =
        scan.best == 0 || scan.best == kPreScanPoints - 1;

    double lo = std::log(scan.x[std::max(0, scan.best - 1)]);
    double hi = std::log(scan.x[std::min(kPreScanPoints - 1, scan.best + 1)]);
    auto eval = [&](double lx) {
        ++report.evaluations;
        const double y = f(std::exp(lx));
        if (!std::isfinite(y))
            throw std::runtime_error(
                "maximize_unimodal: non-finite value at x=" +
                std::to_string(std::exp(lx)));
        return y;
    };
    double c = hi - kGolden * (hi - lo);
    double d = lo + kGolden * (hi - lo);
    double fc = eval(c), fd = eval(d);
    const double tol = std::log1p(bracket.rel_tol);
    while (hi - lo > tol) {
        if (fc > fd) {
            hi = d; d = c; fd = fc;
            c = hi - kGolden * (hi - lo);
            fc = eval(c);
        } else {
            lo = c; c = d; fc = fd;
            d = lo + kGolden * (hi - lo);
            fd = eval(d);
        }
    }
    const double lx = 0.5 * (lo + hi);
    report.argmax = std::exp(lx);
    report.value = f(report.argmax);
    ++report.evaluations;

    // Normalized first-order residual |d f / d ln x| / |f| at the argmax.
    const double h = std::max(1e-7, 0.5 * tol);
    const double slope = (f(std::exp(lx + h)) - f(std::exp(lx - h))) / (2.0 * h);
    report.evaluations += 2;
    report.first_order_residual =
        report.value != 0.0 ? std::abs(slope / report.value) : std::abs(slope);
    return report;
}

OptimumReport optimal_power_csitr(const Eigen::VectorXd& d_squared,
                                  const SystemConfig& cfg, FlFlavor flavor) {
    cfg.validate();
    auto nu = [&](double p) {
        return nu_T_waterfilled(p, d_squared, cfg, flavor).nu;
    };
    Bracket bracket{std::min(1e-6, cfg.P_max * 1e-3), cfg.P_max, 1e-7};
    OptimumReport report = maximize_unimodal(nu, bracket);

    // Residual of the stationarity condition dF_L/dP (P + b_eff/a) = F_L,
    // F_L by central differences around the reported argmax.
    const double p = report.argmax;
    const double h = std::max(1e-6 * p, 1e-9);
    auto fl = [&](double pw) {
        return nu_T_waterfilled(pw, d_squared, cfg, flavor).success.value;
    };
    const double f0 = fl(p);
    const double dfdp = (fl(p + h) - fl(std::max(p - h, 1e-300))) / (2.0 * h);
    const double b_eff = consumed_power(0.0, cfg.power_model(), cfg.M);
    report.evaluations += 3;
    if (f0 > 0.0)
        report.first_order_residual =
            std::abs(dfdp * (p + b_eff / cfg.a) - f0) / f0;
    return report;
}

OptimumReport optimal_power_csitr(const ChannelEstimate& estimate,
                                  const SystemConfig& cfg, FlFlavor flavor) {
    const SvdFactors factors = svd(estimate.normalized());
    const Eigen::VectorXd d2 =
        factors.singular_values.array().square().matrix();
    return optimal_power_csitr(d2, cfg, flavor);
}

namespace {

/// d ln f / d rho_eff for the regularized-gamma closed forms (min(M,N)=1):
/// f = Q_gamma(K, z), z = M (2^xi - 1)/rho_eff, K = max(M,N).
/// The ratio p(K,z)/Q(K,z) is computed from the finite Poisson sums, so the
/// e^{-z} factors cancel and no tail underflow occurs.
double dlnf_gamma_form(int num_tx, int num_rx, double rho_eff, double xi) {
    const int shape = std::max(num_tx, num_rx);
    const double gamma_term = num_tx * (std::exp2(xi) - 1.0);
    const double z = gamma_term / rho_eff;
    if (z > 1e15) // deep tail: the k = K-1 term dominates the sum
        return gamma_term / (rho_eff * rho_eff);
    double term = 1.0; // z^0/0!
    double sum = term;
    for (int k = 1; k < shape; ++k) {
        term *= z / k;
        sum += term;
    }
    const double ratio = term / sum; // z^{K-1}/(K-1)! over the partial sum
    return ratio * gamma_term / (rho_eff * rho_eff);
}

struct FocResult {
    bool bracketed = false;
    double rho = 0.0;
    double residual = 0.0;
};

/// Root of (rho + beta) * dlnf(rho_eff) * drho_eff/drho = 1 over log-rho.
FocResult solve_power_foc(const SystemConfig& cfg, double beta,
                          double rho_lo, double rho_hi) {
    auto h = [&](double rho) {
        const double re = effective_snr(rho, cfg.tau());
        if (re <= 0.0) return 1e6; // below any resolvable response: treat as +
        const double v =
            (rho + beta) * dlnf_gamma_form(cfg.M, cfg.N, re, cfg.xi) *
                d_effective_snr_d_rho(rho, cfg.tau()) -
            1.0;
        // Overflow can only come from the positive product in the deep tail.
        return std::isfinite(v) ? v : 1e12;
    };
    const double llo = std::log(rho_lo), lhi = std::log(rho_hi);
    double prev_x = rho_lo, prev_y = h(rho_lo);
    FocResult out;
    for (int i = 1; i < 256; ++i) {
        const double x = std::exp(llo + (lhi - llo) * i / 255.0);
        const double y = h(x);
        if (std::isfinite(prev_y) && std::isfinite(y) &&
            ((prev_y > 0.0) != (y > 0.0))) {
            double a = prev_x, b = x;
            double fa = prev_y;
            for (int it = 0; it < 200; ++it) {
                const double mid = std::sqrt(a * b); // log-domain midpoint
                const double fm = h(mid);
                if ((fm > 0.0) == (fa > 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            out.bracketed = true;
            out.rho = std::sqrt(a * b);
            out.residual = std::abs(h(out.rho));
            return out;
        }
        prev_x = x;
        prev_y = y;
    }
    return out;
}

} // namespace

OptimumReport optimal_power_nocsit(const SystemConfig& cfg,
                                   const SuccessSource& source) {
    cfg.validate();
    const Bracket bracket{std::min(1e-6, cfg.P_max * 1e-3), cfg.P_max, 1e-7};
    const double b_eff = consumed_power(0.0, cfg.power_model(), cfg.M);

    if (source.is_monte_carlo()) {
        // Locate the argmax on the kernel-smoothed common-random-number
        // curve (the raw step curve pins the argmax to jump points); report
        // the raw estimate at that power.
        const OutageSampler* sampler = source.sampler(cfg.M, cfg.N, cfg.xi);
        auto smooth_nu = [&](double p) {
            const double re = effective_snr(p / cfg.sigma2, cfg.tau());
            return cfg.R * cfg.goodput_factor_nocsit() *
                   sampler->kernel_success(re) /
                   consumed_power(p, cfg.power_model(), cfg.M);
        };
        OptimumReport report = maximize_unimodal(smooth_nu, bracket);
        report.value = nu_R(report.argmax, cfg, source).nu;
        report.first_order_residual = 0.0;
        return report;
    }

    auto nu = [&](double p) { return nu_R(p, cfg, source).nu; };
    const double tol = std::min(cfg.M, cfg.N) == 1 ? 1e-7 : 1e-8;
    OptimumReport report =
        maximize_unimodal(nu, {bracket.lo, bracket.hi, tol});

    if (std::min(cfg.M, cfg.N) == 1) {
        const FocResult foc =
            solve_power_foc(cfg, b_eff / (cfg.a * cfg.sigma2),
                            bracket.lo / cfg.sigma2, bracket.hi / cfg.sigma2);
        // argmax stays the search result; the root is reported alongside so
        // the two routes can be compared.
        if (foc.bracketed) {
            report.foc_bracketed = true;
            report.foc_argmax = foc.rho * cfg.sigma2;
            report.first_order_residual = foc.residual;
        }
    }
    return report;
}

namespace {

int max_training_symbols(const SystemConfig& cfg) {
    return cfg.T_s - 1 - cfg.t_f_s;
}

/// Log-domain score used when no candidate's success is resolvable:
/// ln goodput + leading outage exponent - ln consumed power.
double tail_score(double power, const SystemConfig& cfg) {
    const double re = effective_snr(power / cfg.sigma2, cfg.tau());
    return std::log(cfg.R * cfg.goodput_factor_nocsit()) +
           log_success_tail(cfg.M, cfg.N, re, cfg.xi) -
           std::log(consumed_power(power, cfg.power_model(), cfg.M));
}

void check_concavity(TrainingReport* report) {
    const auto& nu = report->nu_per_t_s;
    double peak = 0.0;
    for (double v : nu) peak = std::max(peak, v);
    for (std::size_t i = 1; i + 1 < nu.size(); ++i) {
        const double d2 = nu[i + 1] + nu[i - 1] - 2.0 * nu[i];
        if (d2 > 1e-9 * peak) {
            report->concave_ok = false;
            return;
        }
    }
}

} // namespace

TrainingReport optimal_training(const SystemConfig& cfg,
                                const SuccessSource& source) {
    cfg.validate();
    const int t_lo = cfg.M, t_hi = max_training_symbols(cfg);
    if (t_lo > t_hi)
        throw std::invalid_argument("optimal_training: no feasible t_s");
    TrainingReport report;
    double best = -1.0;
    for (int t = t_lo; t <= t_hi; ++t) {
        SystemConfig c = cfg;
        c.t_s = t;
        const OptimumReport inner = optimal_power_nocsit(c, source);
        report.nu_per_t_s.push_back(inner.value);
        if (inner.value > best) {
            best = inner.value;
            report.t_s_star = t;
            report.p_star = inner.argmax;
            report.nu_star = inner.value;
            c.t_s = t;
            report.success_at_star = nu_R(inner.argmax, c, source).success;
        }
    }
    check_concavity(&report);
    return report;
}

TrainingReport optimal_training_fixed_power(double power,
                                            const SystemConfig& cfg,
                                            const SuccessSource& source) {
    cfg.validate();
    const int t_lo = cfg.M, t_hi = max_training_symbols(cfg);
    if (t_lo > t_hi)
        throw std::invalid_argument(
            "optimal_training_fixed_power: no feasible t_s");
    TrainingReport report;
    std::vector<SuccessProb> successes;
    bool any_resolved = false;
    for (int t = t_lo; t <= t_hi; ++t) {
        SystemConfig c = cfg;
        c.t_s = t;
        const EfficiencyResult r = nu_R(power, c, source);
        report.nu_per_t_s.push_back(r.nu);
        successes.push_back(r.success);
        if (r.success.value > 0.0) any_resolved = true;
    }
    if (any_resolved) {
        int best = 0;
        for (std::size_t i = 1; i < report.nu_per_t_s.size(); ++i)
            if (report.nu_per_t_s[i] > report.nu_per_t_s[best])
                best = static_cast<int>(i);
        report.t_s_star = t_lo + best;
        report.nu_star = report.nu_per_t_s[best];
        report.success_at_star = successes[best];
    } else {
        // Deep outage everywhere: rank candidates by the tail score.
        report.used_tail = true;
        int best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int t = t_lo; t <= t_hi; ++t) {
            SystemConfig c = cfg;
            c.t_s = t;
            const double score = tail_score(power, c);
            if (score > best_score) {
                best_score = score;
                best = t;
            }
        }
        report.t_s_star = best;
        report.nu_star = 0.0;
        report.success_at_star = successes[best - t_lo];
    }
    report.p_star = power;
    check_concavity(&report);
    return report;
}

AntennaReport optimal_antennas_at_power(double power, const SystemConfig& cfg,
                                        int m_max,
                                        const SuccessSource& source) {
    if (m_max < 1)
        throw std::invalid_argument("optimal_antennas_at_power: m_max >= 1");
    AntennaReport report;
    bool any_resolved = false;
    for (int m = 1; m <= m_max; ++m) {
        AntennaChoice choice;
        choice.num_tx = m;
        SystemConfig base = cfg;
        base.M = m;
        base.t_s = m;
        if (m > max_training_symbols(base)) {
            report.per_m.push_back(choice); // infeasible, skipped
            continue;
        }
        base.validate();
        choice.feasible = true;
        const TrainingReport inner =
            optimal_training_fixed_power(power, base, source);
        choice.t_s = inner.t_s_star;
        choice.nu = inner.nu_star;
        choice.success = inner.success_at_star;
        choice.used_tail = inner.used_tail;
        if (!inner.used_tail) any_resolved = true;
        report.per_m.push_back(choice);
    }

    const auto feasible = [&](const AntennaChoice& c) { return c.feasible; };
    if (std::none_of(report.per_m.begin(), report.per_m.end(), feasible))
        throw std::invalid_argument(
            "optimal_antennas_at_power: no feasible antenna count");

    if (any_resolved) {
        const AntennaChoice* best = nullptr;
        for (const auto& c : report.per_m)
            if (c.feasible && !c.used_tail && (!best || c.nu > best->nu))
                best = &c;
        report.best = *best;
    } else {
        // Every candidate is in deep outage; each per-M row already carries
        // its tail-optimal t_s, so compare the rows' tail scores.
        const AntennaChoice* best = nullptr;
        double best_score = -std::numeric_limits<double>::infinity();
        for (const auto& c : report.per_m) {
            if (!c.feasible) continue;
            SystemConfig base = cfg;
            base.M = c.num_tx;
            base.t_s = c.t_s;
            const double score = tail_score(power, base);
            if (!best || score > best_score) {
                best_score = score;
                best = &c;
            }
        }
        report.best = *best;
    }
    return report;
}

SisoLowSnrRoot siso_lowsnr_root(int block_length) {
    if (block_length < 1)
        throw std::invalid_argument("siso_lowsnr_root: L must be >= 1");
    const double big_l = static_cast<double>(block_length);
    auto g = [&](double x) {
        return (big_l + x) / std::sqrt(std::numbers::pi) * std::exp(-x * x) -
               q_function(x);
    };
    // The relevant root is the negative one nearest zero; scan down from 0.
    const double lo_limit = -std::min(big_l - 1e-9, 30.0);
    const int cells = 4096;
    double hi = 0.0, y_hi = g(0.0);
    double root_lo = 0.0, root_hi = 0.0;
    bool found = false;
    for (int i = 1; i <= cells; ++i) {
        const double x = lo_limit * i / cells;
        const double y = g(x);
        if ((y > 0.0) != (y_hi > 0.0)) {
            root_lo = x;
            root_hi = hi;
            found = true;
            break;
        }
        hi = x;
        y_hi = y;
    }
    if (!found)
        throw std::runtime_error(
            "siso_lowsnr_root: no sign change found on the scan interval");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (root_lo + root_hi);
        if ((g(mid) > 0.0) == (g(root_hi) > 0.0))
            root_hi = mid;
        else
            root_lo = mid;
    }
    SisoLowSnrRoot out;
    out.x = 0.5 * (root_lo + root_hi);
    out.residual = std::abs(g(out.x));
    out.snr_ratio = big_l / (big_l + out.x);
    return out;
}

OptimumReport optimal_power_infinite_block(const Eigen::VectorXd& d_squared,
                                           const SystemConfig& cfg) {
    cfg.validate();
    const double b_eff = consumed_power(0.0, cfg.power_model(), cfg.M);
    const double budget = static_cast<double>(cfg.M);
    auto info_and_mu = [&](double p, double* mu) {
        const double c = p / (cfg.M * cfg.sigma2);
        const PowerAllocation alloc = waterfill(d_squared, c, budget);
        if (mu) *mu = alloc.water_level;
        return mutual_info_icsitr(p / cfg.sigma2, alloc.weights, d_squared,
                                  cfg.M);
    };
    auto nu = [&](double p) {
        return cfg.R0 * cfg.goodput_factor_csitr() * info_and_mu(p, nullptr) /
               consumed_power(p, cfg.power_model(), cfg.M);
    };
    const Bracket bracket{std::min(1e-6, cfg.P_max * 1e-3), cfg.P_max, 1e-8};
    OptimumReport report = maximize_unimodal(nu, bracket);

    // Stationarity dI/dP (aP + b_eff) = a I with the analytic water-level
    // derivative dI/dP = 1 / (c mu sigma2 ln 2), c = P/(M sigma2): the
    // envelope derivative of the water-filled log-det.
    auto foc = [&](double p) {
        double mu = 0.0;
        const double info = info_and_mu(p, &mu);
        const double c = p / (cfg.M * cfg.sigma2);
        const double didp = 1.0 / (c * mu * cfg.sigma2 * std::numbers::ln2);
        return didp * (cfg.a * p + b_eff) - cfg.a * info;
    };
    double a = bracket.lo, b = bracket.hi;
    double fa = foc(a), fb = foc(b);
    if ((fa > 0.0) != (fb > 0.0)) {
        for (int it = 0; it < 200; ++it) {
            const double mid = std::sqrt(a * b);
            const double fm = foc(mid);
            if ((fm > 0.0) == (fa > 0.0)) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        report.foc_bracketed = true;
        report.foc_argmax = std::sqrt(a * b);
        report.first_order_residual = std::abs(foc(report.foc_argmax));
    }
    return report;
}

bool unimodal_on_grid(const std::vector<double>& values,
                      const std::vector<double>& tol) {
    if (values.size() < 3 || tol.size() + 1 < values.size()) return false;
    std::size_t peak = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[peak]) peak = i;
    if (peak == 0 || peak + 1 == values.size()) return false;
    for (std::size_t i = 0; i < peak; ++i)
        if (values[i + 1] < values[i] - tol[i]) return false;
    for (std::size_t i = peak; i + 1 < values.size(); ++i)
        if (values[i + 1] > values[i] + tol[i]) return false;
    return true;
}

} // namespace mimoee
