#include "mimoee/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mimoee/config_io.hpp"
#include "mimoee/optimize.hpp"
#include "mimoee/rng.hpp"

namespace mimoee {

namespace {

constexpr double kBOverARatios[] = {0.0, 1e-3, 1e-2};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }

/// Lean log-domain golden section for inner optimization loops whose
/// objectives are quasi-concave in the transmit power.
double golden_argmax(const std::function<double(double)>& f, double lo,
                     double hi, double rel_tol = 1e-6) {
    constexpr double g = 0.6180339887498949;
    double a = std::log(lo), b = std::log(hi);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(std::exp(c)), fd = f(std::exp(d));
    const double tol = std::log1p(rel_tol);
    while (b - a > tol) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - g * (b - a);
            fc = f(std::exp(c));
        } else {
            a = c; c = d; fc = fd;
            d = a + g * (b - a);
            fd = f(std::exp(d));
        }
    }
    return std::exp(0.5 * (a + b));
}

} // namespace

const char* to_string(ExperimentName name) {
    switch (name) {
        case ExperimentName::sweep_power_csitr: return "sweep-power-csitr";
        case ExperimentName::sweep_rate: return "sweep-rate";
        case ExperimentName::sweep_power_nocsit: return "sweep-power-nocsit";
        case ExperimentName::optimal_training_curve:
            return "optimal-training-curve";
        case ExperimentName::optimal_antennas_curve:
            return "optimal-antennas-curve";
        case ExperimentName::siso_analysis: return "siso-analysis";
        case ExperimentName::compare_pa_upa: return "compare-pa-upa";
    }
    return "?";
}

std::vector<std::string> experiment_names() {
    return {"sweep-power-csitr",      "sweep-rate",
            "sweep-power-nocsit",     "optimal-training-curve",
            "optimal-antennas-curve", "siso-analysis",
            "compare-pa-upa"};
}

ExperimentName experiment_from_string(const std::string& name) {
    for (int i = 0; i <= static_cast<int>(ExperimentName::compare_pa_upa); ++i)
        if (name == to_string(static_cast<ExperimentName>(i)))
            return static_cast<ExperimentName>(i);
    throw std::invalid_argument("unknown experiment '" + name + "'");
}

std::vector<double> GridAxis::values() const {
    if (points < 2)
        throw std::invalid_argument("grid: points must be >= 2");
    if (log_scale && lo <= 0.0)
        throw std::invalid_argument("grid: log axis needs lo > 0");
    if (!(hi > lo)) throw std::invalid_argument("grid: need hi > lo");
    std::vector<double> out(points);
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        out[i] = log_scale ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                           : lo + t * (hi - lo);
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

GridAxis parse_grid(const std::string& text) {
    GridAxis axis;
    std::istringstream in(text);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(in, part, ':')) parts.push_back(part);
    if (parts.size() != 4)
        throw std::invalid_argument("grid must be min:max:points:lin|log");
    axis.lo = std::stod(parts[0]);
    axis.hi = std::stod(parts[1]);
    axis.points = std::stoi(parts[2]);
    if (parts[3] == "log") axis.log_scale = true;
    else if (parts[3] == "lin") axis.log_scale = false;
    else throw std::invalid_argument("grid scale must be 'lin' or 'log'");
    axis.values(); // validate
    return axis;
}

void parallel_for(int n, int threads, const std::function<void(int)>& f) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(threads, n);
    pool.reserve(workers);
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    f(i);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    failed.store(true);
                    if (error.empty()) error = e.what();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed.load()) throw std::runtime_error(error);
}

namespace {

GridAxis default_grid(ExperimentName name, const SystemConfig& cfg) {
    switch (name) {
        case ExperimentName::sweep_power_csitr:
        case ExperimentName::sweep_power_nocsit:
            return {1e-5, cfg.P_max, 41, true};
        case ExperimentName::sweep_rate:
            return {0.25, 24.0, 32, false};
        case ExperimentName::optimal_training_curve:
            return {1e-4, cfg.P_max, 26, true};
        case ExperimentName::optimal_antennas_curve:
            return {1e-5, cfg.P_max, 31, true};
        case ExperimentName::siso_analysis:
            return {10.0, 1000.0, 3, true};
        case ExperimentName::compare_pa_upa:
            return {1e-5, std::min(1.0, cfg.P_max), 13, true};
    }
    return {};
}

std::string header_comment(const ExperimentSpec& spec, const GridAxis& grid) {
    std::ostringstream out;
    out << "# mimo-ee v" << kVersion << " experiment=" << to_string(spec.name)
        << " seed=" << spec.seed << " samples=" << spec.samples << " grid="
        << fmt(grid.lo) << ":" << fmt(grid.hi) << ":" << grid.points << ":"
        << (grid.log_scale ? "log" : "lin") << " config:";
    const SystemConfig& c = spec.config;
    out << " M=" << c.M << " N=" << c.N << " T_s=" << c.T_s
        << " t_s=" << c.t_s << " t_f_s=" << c.t_f_s << " S_d=" << fmt(c.S_d)
        << " L=" << c.L << " R=" << fmt(c.R) << " R0=" << fmt(c.R0)
        << " xi=" << fmt(c.xi) << " a=" << fmt(c.a) << " b=" << fmt(c.b);
    if (c.b0) out << " b0=" << fmt(*c.b0);
    out << " sigma2=" << fmt(c.sigma2) << " P_max=" << fmt(c.P_max);
    return out.str();
}

struct Rows {
    std::string header;
    std::vector<std::string> rows;
    std::ostringstream summary;
};

Rows run_sweep_power_csitr(const ExperimentSpec& spec, const GridAxis& grid) {
    const SystemConfig& cfg = spec.config;
    const ChannelMatrix h =
        sample_channel(cfg.M, cfg.N, derive_stream(spec.seed, 0));
    const Eigen::VectorXd d2 =
        svd(h).singular_values.array().square().matrix();
    const std::vector<double> ps = grid.values();
    Rows out;
    out.header = "P_W,P_dBm,t_s,M,mutual_info_bits,success,success_stderr,"
                 "nu_bits_per_joule";
    out.rows.resize(ps.size());
    std::vector<double> nus(ps.size());
    parallel_for(static_cast<int>(ps.size()), spec.threads, [&](int i) {
        const double p = ps[i];
        const double rho_eff = effective_snr(p / cfg.sigma2, cfg.tau());
        const PowerAllocation alloc =
            waterfill(d2, rho_eff / cfg.M, static_cast<double>(cfg.M));
        const double info = mutual_info_icsitr(rho_eff, alloc.weights, d2,
                                               cfg.M);
        const EfficiencyResult r =
            nu_T(p, alloc, d2, cfg, FlFlavor::gaussian);
        nus[i] = r.nu;
        std::ostringstream row;
        row << fmt(p) << ',' << fmt(dbm(p)) << ',' << cfg.t_s << ',' << cfg.M
            << ',' << fmt(info) << ',' << fmt(r.success.value) << ','
            << fmt(r.success.std_error) << ',' << fmt(r.nu);
        out.rows[i] = row.str();
    });
    int best = 0;
    for (std::size_t i = 1; i < nus.size(); ++i)
        if (nus[i] > nus[best]) best = static_cast<int>(i);
    out.summary << "peak nu=" << fmt(nus[best]) << " bits/J at P="
                << fmt(ps[best]) << " W (" << fmt(dbm(ps[best])) << " dBm)\n";
    return out;
}

Rows run_sweep_rate(const ExperimentSpec& spec, const GridAxis& grid) {
    const SystemConfig& base = spec.config;
    const ChannelMatrix h =
        sample_channel(base.M, base.N, derive_stream(spec.seed, 0));
    const Eigen::VectorXd d2 =
        svd(h).singular_values.array().square().matrix();
    const std::vector<double> xis = grid.values();
    Rows out;
    out.header = "xi,P_star_W,P_star_dBm,t_s,M,success,success_stderr,"
                 "nu_star_bits_per_joule";
    out.rows.resize(xis.size());
    std::vector<double> nus(xis.size());
    parallel_for(static_cast<int>(xis.size()), spec.threads, [&](int i) {
        SystemConfig cfg = base;
        cfg.xi = xis[i];
        cfg.R = xis[i] * cfg.R0;
        const OptimumReport rep =
            optimal_power_csitr(d2, cfg, FlFlavor::gaussian);
        const EfficiencyResult r =
            nu_T_waterfilled(rep.argmax, d2, cfg, FlFlavor::gaussian);
        nus[i] = r.nu;
        std::ostringstream row;
        row << fmt(xis[i]) << ',' << fmt(rep.argmax) << ','
            << fmt(dbm(rep.argmax)) << ',' << cfg.t_s << ',' << cfg.M << ','
            << fmt(r.success.value) << ',' << fmt(r.success.std_error) << ','
            << fmt(r.nu);
        out.rows[i] = row.str();
    });
    int best = 0;
    for (std::size_t i = 1; i < nus.size(); ++i)
        if (nus[i] > nus[best]) best = static_cast<int>(i);
    out.summary << "best spectral efficiency xi=" << fmt(xis[best])
                << " with nu=" << fmt(nus[best]) << " bits/J\n";
    return out;
}

Rows run_sweep_power_nocsit(const ExperimentSpec& spec, const GridAxis& grid) {
    const SystemConfig& base = spec.config;
    const SuccessSource src =
        SuccessSource::monte_carlo(spec.samples, spec.seed);
    const std::vector<double> ps = grid.values();
    Rows out;
    out.header =
        "b_over_a_W,P_W,P_dBm,t_s,M,success,success_stderr,nu_bits_per_joule";
    const int curves = static_cast<int>(std::size(kBOverARatios));
    out.rows.resize(curves * ps.size());
    // Shared sampler: build once before parallel section.
    src.sampler(base.M, base.N, base.xi);
    parallel_for(static_cast<int>(curves * ps.size()), spec.threads,
                 [&](int idx) {
                     const int c = idx / static_cast<int>(ps.size());
                     const int i = idx % static_cast<int>(ps.size());
                     SystemConfig cfg = base;
                     cfg.b = kBOverARatios[c] * cfg.a;
                     const EfficiencyResult r = nu_R(ps[i], cfg, src);
                     std::ostringstream row;
                     row << fmt(kBOverARatios[c]) << ',' << fmt(ps[i]) << ','
                         << fmt(dbm(ps[i])) << ',' << cfg.t_s << ',' << cfg.M
                         << ',' << fmt(r.success.value) << ','
                         << fmt(r.success.std_error) << ',' << fmt(r.nu);
                     out.rows[idx] = row.str();
                 });
    for (int c = 0; c < curves; ++c) {
        SystemConfig cfg = base;
        cfg.b = kBOverARatios[c] * cfg.a;
        const OptimumReport rep = optimal_power_nocsit(cfg, src);
        out.summary << "b/a=" << fmt(kBOverARatios[c])
                    << " W: P*=" << fmt(rep.argmax) << " W ("
                    << fmt(dbm(rep.argmax)) << " dBm), nu*=" << fmt(rep.value)
                    << " bits/J\n";
    }
    return out;
}

Rows run_optimal_training_curve(const ExperimentSpec& spec,
                                const GridAxis& grid) {
    const SystemConfig& cfg = spec.config;
    const SuccessSource src =
        SuccessSource::monte_carlo(spec.samples, spec.seed);
    src.sampler(cfg.M, cfg.N, cfg.xi);
    const std::vector<double> ps = grid.values();
    Rows out;
    out.header = "P_W,P_dBm,t_s_star,M,success,success_stderr,"
                 "nu_bits_per_joule,used_tail";
    out.rows.resize(ps.size());
    std::vector<TrainingReport> reports(ps.size());
    parallel_for(static_cast<int>(ps.size()), spec.threads, [&](int i) {
        reports[i] = optimal_training_fixed_power(ps[i], cfg, src);
        const TrainingReport& r = reports[i];
        std::ostringstream row;
        row << fmt(ps[i]) << ',' << fmt(dbm(ps[i])) << ',' << r.t_s_star << ','
            << cfg.M << ',' << fmt(r.success_at_star.value) << ','
            << fmt(r.success_at_star.std_error) << ',' << fmt(r.nu_star) << ','
            << (r.used_tail ? 1 : 0);
        out.rows[i] = row.str();
    });
    out.summary << "t_s* at P=" << fmt(ps.front()) << " W: "
                << reports.front().t_s_star << "; at P=" << fmt(ps.back())
                << " W: " << reports.back().t_s_star << "\n";
    return out;
}

Rows run_optimal_antennas_curve(const ExperimentSpec& spec,
                                const GridAxis& grid) {
    const SystemConfig& cfg = spec.config;
    const SuccessSource src =
        SuccessSource::monte_carlo(spec.samples, spec.seed);
    for (int m = 1; m <= cfg.M; ++m) src.sampler(m, cfg.N, cfg.xi);
    const std::vector<double> ps = grid.values();
    Rows out;
    out.header = "P_W,P_dBm,M_star,t_s_star,success,success_stderr,"
                 "nu_bits_per_joule,used_tail";
    out.rows.resize(ps.size());
    std::vector<AntennaReport> reports(ps.size());
    parallel_for(static_cast<int>(ps.size()), spec.threads, [&](int i) {
        reports[i] = optimal_antennas_at_power(ps[i], cfg, cfg.M, src);
        const AntennaChoice& b = reports[i].best;
        std::ostringstream row;
        row << fmt(ps[i]) << ',' << fmt(dbm(ps[i])) << ',' << b.num_tx << ','
            << b.t_s << ',' << fmt(b.success.value) << ','
            << fmt(b.success.std_error) << ',' << fmt(b.nu) << ','
            << (b.used_tail ? 1 : 0);
        out.rows[i] = row.str();
    });
    out.summary << "M* at P=" << fmt(ps.front()) << " W: "
                << reports.front().best.num_tx << "; at P=" << fmt(ps.back())
                << " W: " << reports.back().best.num_tx << "\n";
    return out;
}

Rows run_siso_analysis(const ExperimentSpec&, const GridAxis& grid) {
    Rows out;
    out.header = "L,x_root,residual,rho_star_h2_over_xi";
    const std::vector<double> ls = grid.values();
    for (double lv : ls) {
        const int block = static_cast<int>(std::llround(lv));
        const SisoLowSnrRoot root = siso_lowsnr_root(block);
        std::ostringstream row;
        row << block << ',' << fmt(root.x) << ',' << fmt(root.residual) << ','
            << fmt(root.snr_ratio);
        out.rows.push_back(row.str());
        out.summary << "L=" << block << ": x=" << fmt(root.x)
                    << ", rho* = " << fmt(root.snr_ratio)
                    << " * xi/|h|^2\n";
    }
    return out;
}

/// nu_T with continuous training time, used for the large-T_s joint search.
double nu_csitr_t_real(double p, double t_real, const Eigen::VectorXd& d2,
                       const SystemConfig& cfg, bool uniform) {
    const double rho = p / cfg.sigma2;
    const double rho_eff = effective_snr(rho, t_real / cfg.M);
    double info;
    if (uniform) {
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d2.size());
        info = mutual_info_icsitr(rho_eff, ones, d2, cfg.M);
    } else {
        const PowerAllocation alloc =
            waterfill(d2, rho_eff / cfg.M, static_cast<double>(cfg.M));
        info = mutual_info_icsitr(rho_eff, alloc.weights, d2, cfg.M);
    }
    const SuccessProb fl = f_L_gaussian(info, cfg.xi, cfg.L, rho);
    const double goodput_factor =
        1.0 - (t_real + cfg.t_f_s) / static_cast<double>(cfg.T_s);
    return cfg.R * goodput_factor * fl.value /
           consumed_power(p, cfg.power_model(), cfg.M);
}

/// max over t_s and P <= p_max of nu_T; exhaustive in t_s when the range is
/// desk-sized, golden over continuous t with integer polish otherwise.
double best_nu_csitr(double p_max, const Eigen::VectorXd& d2,
                     const SystemConfig& cfg, bool uniform) {
    const int t_lo = cfg.M, t_hi = cfg.T_s - 1 - cfg.t_f_s;
    auto best_over_p = [&](double t_real) {
        auto f = [&](double p) {
            return nu_csitr_t_real(p, t_real, d2, cfg, uniform);
        };
        const double p = golden_argmax(f, std::min(1e-6, p_max * 1e-3), p_max);
        return f(p);
    };
    if (t_hi - t_lo <= 512) {
        double best = 0.0;
        for (int t = t_lo; t <= t_hi; ++t)
            best = std::max(best, best_over_p(t));
        return best;
    }
    const double t_star = golden_argmax(best_over_p, t_lo, t_hi, 1e-4);
    double best = 0.0;
    for (int t : {static_cast<int>(std::floor(t_star)),
                  static_cast<int>(std::ceil(t_star))})
        if (t >= t_lo && t <= t_hi) best = std::max(best, best_over_p(t));
    return best;
}

Rows run_compare_pa_upa(const ExperimentSpec& spec, const GridAxis& grid) {
    const SystemConfig& base = spec.config;
    const std::vector<double> ps = grid.values();
    const int draws = spec.samples;
    const int block_lengths[] = {100, 10000};
    Rows out;
    out.header = "T_s,P_max_W,P_max_dBm,nu_wf,nu_upa";
    const int cells = 2 * static_cast<int>(ps.size());
    out.rows.resize(cells);
    int wf_wins = 0;
    std::mutex wins_mutex;
    parallel_for(cells, spec.threads, [&](int idx) {
        const int ti = idx / static_cast<int>(ps.size());
        const int i = idx % static_cast<int>(ps.size());
        SystemConfig cfg = base;
        cfg.T_s = block_lengths[ti];
        cfg.P_max = std::max(cfg.P_max, ps[i]);
        cfg.validate();
        double sum_wf = 0.0, sum_upa = 0.0;
        for (int d = 0; d < draws; ++d) {
            const ChannelMatrix h = sample_channel(
                cfg.M, cfg.N, derive_stream(spec.seed, 1000 + d));
            const Eigen::VectorXd d2 =
                svd(h).singular_values.array().square().matrix();
            sum_wf += best_nu_csitr(ps[i], d2, cfg, false);
            sum_upa += best_nu_csitr(ps[i], d2, cfg, true);
        }
        const double nu_wf = sum_wf / draws, nu_upa = sum_upa / draws;
        std::ostringstream row;
        row << cfg.T_s << ',' << fmt(ps[i]) << ',' << fmt(dbm(ps[i])) << ','
            << fmt(nu_wf) << ',' << fmt(nu_upa);
        out.rows[idx] = row.str();
        if (nu_wf >= nu_upa) {
            std::lock_guard<std::mutex> lock(wins_mutex);
            ++wf_wins;
        }
    });
    out.summary << "water-filling >= uniform allocation on " << wf_wins << "/"
                << cells << " swept points\n";
    return out;
}

} // namespace

ExperimentSummary run_experiment(const ExperimentSpec& spec) {
    spec.config.validate();
    const GridAxis grid =
        spec.grid_given ? spec.grid : default_grid(spec.name, spec.config);
    grid.values();

    Rows rows;
    switch (spec.name) {
        case ExperimentName::sweep_power_csitr:
            rows = run_sweep_power_csitr(spec, grid);
            break;
        case ExperimentName::sweep_rate:
            rows = run_sweep_rate(spec, grid);
            break;
        case ExperimentName::sweep_power_nocsit:
            rows = run_sweep_power_nocsit(spec, grid);
            break;
        case ExperimentName::optimal_training_curve:
            rows = run_optimal_training_curve(spec, grid);
            break;
        case ExperimentName::optimal_antennas_curve:
            rows = run_optimal_antennas_curve(spec, grid);
            break;
        case ExperimentName::siso_analysis:
            rows = run_siso_analysis(spec, grid);
            break;
        case ExperimentName::compare_pa_upa:
            rows = run_compare_pa_upa(spec, grid);
            break;
    }

    std::ostringstream csv;
    csv << header_comment(spec, grid) << "\n" << rows.header << "\n";
    for (const auto& r : rows.rows) csv << r << "\n";

    ExperimentSummary summary;
    summary.csv = csv.str();
    summary.summary_text = rows.summary.str();

    if (!spec.output_path.empty()) {
        std::ofstream file(spec.output_path, std::ios::binary);
        if (!file)
            throw std::runtime_error("cannot write output file '" +
                                     spec.output_path + "'");
        file << summary.csv;
        if (!file)
            throw std::runtime_error("error while writing '" +
                                     spec.output_path + "'");
    }
    return summary;
}

} // namespace mimoee
