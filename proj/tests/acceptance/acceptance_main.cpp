// Acceptance suite: one check per numbered criterion, one PASS/FAIL line
// each, nonzero exit when anything fails. Kept independent of the unit
// tests; oracles here are recomputed, not imported.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "mimoee/channel.hpp"
#include "mimoee/config_io.hpp"
#include "mimoee/experiments.hpp"
#include "mimoee/optimize.hpp"
#include "mimoee/rng.hpp"

using namespace mimoee;

namespace {

int g_failures = 0;

void run_criterion(int number, const std::string& name,
                   const std::function<std::string()>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = true;
    try {
        detail = body();
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    if (!detail.empty() && detail.rfind("FAIL", 0) == 0) pass = false;
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] criterion %d: %s (%.2fs)%s%s\n",
                pass ? "PASS" : "FAIL", number, name.c_str(), elapsed,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

// ---------------------------------------------------------------- criterion 1

std::string criterion_siso_lowsnr() {
    const SisoLowSnrRoot l10 = siso_lowsnr_root(10);
    const SisoLowSnrRoot l100 = siso_lowsnr_root(100);
    std::ostringstream detail;
    detail << "L=10 ratio=" << l10.snr_ratio << " residual=" << l10.residual
           << "; L=100 ratio=" << l100.snr_ratio;
    if (l10.snr_ratio < 1.10 || l10.snr_ratio > 1.18)
        return "FAIL L=10 ratio out of [1.10, 1.18]: " + detail.str();
    if (l10.residual >= 1e-10 || l100.residual >= 1e-10)
        return "FAIL residual >= 1e-10: " + detail.str();
    if (l100.snr_ratio < 1.00 || l100.snr_ratio > 1.04)
        return "FAIL L=100 ratio out of [1.00, 1.04]: " + detail.str();
    return detail.str();
}

// ---------------------------------------------------------------- criterion 2

std::string criterion_closed_vs_mc() {
    const int points = 20;
    const int samples = 100000;
    Rng rng(20260810);
    int agree_siso = 0, agree_m2 = 0, agree_m4 = 0;
    for (int i = 0; i < points; ++i) {
        const double xi = 0.5 + 2.5 * rng.uniform();
        const double gamma = std::exp2(xi) - 1.0;
        const double rho_eff =
            gamma * std::pow(10.0, -0.5 + 1.5 * rng.uniform());

        const SuccessProb mc1 =
            success_mc(1, 1, rho_eff, xi, samples, derive_stream(1, i));
        if (std::abs(success_siso_closed(rho_eff, xi).value - mc1.value) <
            3.0 * mc1.std_error)
            ++agree_siso;

        const SuccessProb mc2 =
            success_mc(2, 1, rho_eff, xi, samples, derive_stream(2, i));
        if (std::abs(success_miso(rho_eff, 2, xi).value - mc2.value) <
            3.0 * mc2.std_error)
            ++agree_m2;

        const SuccessProb mc4 =
            success_mc(4, 1, rho_eff, xi, samples, derive_stream(4, i));
        if (std::abs(success_miso(rho_eff, 4, xi).value - mc4.value) <
            3.0 * mc4.std_error)
            ++agree_m4;
    }
    std::ostringstream detail;
    detail << "3-sigma agreement: siso " << agree_siso << "/20, miso2 "
           << agree_m2 << "/20, miso4 " << agree_m4 << "/20";
    if (agree_siso < 18 || agree_m2 < 18 || agree_m4 < 18)
        return "FAIL " + detail.str();
    return detail.str();
}

// ---------------------------------------------------------------- criterion 3

std::string criterion_waterfilling() {
    Rng rng(33);
    int channels = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 1 + static_cast<int>(rng.raw() % 4);
        const int n = 1 + static_cast<int>(rng.raw() % 4);
        const ChannelMatrix h = sample_channel(m, n, derive_stream(300, trial));
        const Eigen::VectorXd d2 =
            svd(h).singular_values.array().square().matrix();
        if ((d2.array() <= 0.0).all()) continue;
        const double c = std::exp(4.0 * rng.uniform() - 2.0) / m;
        const PowerAllocation alloc = waterfill(d2, c, m);
        auto objective = [&](const Eigen::VectorXd& s) {
            double bits = 0.0;
            for (int i = 0; i < d2.size(); ++i)
                bits += std::log2(1.0 + c * d2(i) * s(i));
            return bits;
        };
        const double best = objective(alloc.weights);
        for (int draw = 0; draw < 10000; ++draw) {
            Eigen::VectorXd s(d2.size());
            double total = 0.0;
            for (int i = 0; i < s.size(); ++i) {
                s(i) = rng.exponential();
                total += s(i);
            }
            s *= m / total;
            if (objective(s) > best + 1e-12)
                return "FAIL random allocation beats water-filling on trial " +
                       std::to_string(trial);
        }
        ++channels;
    }

    Eigen::VectorXd d2(2);
    d2 << 1.0, 3.0;
    const PowerAllocation hand = waterfill(d2, 1.0, 2.0);
    if (std::abs(hand.weights(0) - 2.0 / 3.0) > 1e-9 ||
        std::abs(hand.weights(1) - 4.0 / 3.0) > 1e-9)
        return "FAIL hand case d2=(1,3), rho=1 is not (2/3, 4/3)";
    return std::to_string(channels) +
           " channels, 1e4 random allocations each, hand case exact";
}

// ---------------------------------------------------------------- criterion 4

std::string criterion_unimodality() {
    Rng rng(44);
    const int grid_points = 1000;
    int siso_checked = 0, mc_checked = 0;
    double worst_gap = 0.0;

    for (int trial = 0; trial < 50; ++trial) {
        const bool use_mc = trial % 2 == 1;
        SystemConfig cfg;
        cfg.N = cfg.M = use_mc ? 2 : 1;
        cfg.t_s = cfg.M + static_cast<int>(rng.raw() % 8);
        cfg.T_s = cfg.t_s + 10 + static_cast<int>(rng.raw() % 40);
        cfg.xi = 0.5 + 2.5 * rng.uniform();
        cfg.R0 = 100.0;
        cfg.R = cfg.xi * cfg.R0;
        cfg.L = 100;
        const double ratios[] = {0.0, 1e-3, 1e-2};
        cfg.b = ratios[rng.raw() % 3];
        cfg.validate();

        const SuccessSource source =
            use_mc ? SuccessSource::monte_carlo(100000, derive_stream(4, trial))
                   : SuccessSource::closed_form();

        std::vector<double> nu(grid_points), tol(grid_points - 1, 0.0);
        for (int i = 0; i < grid_points; ++i) {
            const double p = std::pow(
                10.0, -6.0 + 7.0 * static_cast<double>(i) / (grid_points - 1));
            const EfficiencyResult r = nu_R(p, cfg, source);
            nu[i] = r.nu;
            if (use_mc && i + 1 < grid_points)
                tol[i] = 4.0 * r.success.std_error * r.goodput / r.consumed;
        }
        if (!use_mc) {
            // closed form: strict sign counting (one rise->fall switch)
            int changes = 0;
            double prev = 0.0;
            bool have = false;
            for (int i = 1; i < grid_points; ++i) {
                const double d = nu[i] - nu[i - 1];
                if (d == 0.0) continue;
                if (have && (d > 0.0) != (prev > 0.0)) ++changes;
                prev = d;
                have = true;
            }
            if (changes != 1)
                return "FAIL closed-form trial " + std::to_string(trial) +
                       " has " + std::to_string(changes) +
                       " derivative sign changes";
            ++siso_checked;

            // first-order-condition root vs search argmax
            const OptimumReport rep = optimal_power_nocsit(cfg, source);
            if (!rep.foc_bracketed)
                return "FAIL no FOC root bracketed on trial " +
                       std::to_string(trial);
            const double gap =
                std::abs(rep.argmax - rep.foc_argmax) / rep.foc_argmax;
            worst_gap = std::max(worst_gap, gap);
            if (gap > 1e-4)
                return "FAIL search/FOC gap " + std::to_string(gap) +
                       " on trial " + std::to_string(trial);
        } else {
            if (!unimodal_on_grid(nu, tol))
                return "FAIL MC trial " + std::to_string(trial) +
                       " fails the unimodality witness";
            ++mc_checked;
        }
    }
    std::ostringstream detail;
    detail << siso_checked << " closed-form + " << mc_checked
           << " MC configs unimodal; worst search/FOC gap " << worst_gap;
    return detail.str();
}

// ---------------------------------------------------------------- criterion 5

std::string criterion_training_concavity() {
    struct Setup {
        int m;
        int block;
        double xi;
        double b;
    };
    const Setup setups[] = {
        {1, 10, 1.0, 0.0},  {1, 10, 2.0, 1e-3}, {1, 55, 1.0, 0.0},
        {1, 55, 2.0, 1e-2}, {1, 55, 3.0, 1e-3}, {2, 10, 1.0, 0.0},
        {2, 10, 2.0, 1e-3}, {2, 55, 1.0, 1e-3}, {2, 55, 2.0, 0.0},
        {2, 55, 2.0, 1e-2},
    };
    const SuccessSource closed = SuccessSource::closed_form();
    for (const Setup& s : setups) {
        SystemConfig cfg;
        cfg.M = cfg.N = s.m;
        cfg.t_s = s.m;
        cfg.T_s = s.block;
        cfg.xi = s.xi;
        cfg.R0 = 100.0;
        cfg.R = s.xi * 100.0;
        cfg.b = s.b;
        cfg.validate();
        const TrainingReport rep = optimal_training(cfg, closed);
        if (!rep.concave_ok) {
            std::ostringstream fail;
            fail << "FAIL concavity violated at M=N=" << s.m
                 << " T_s=" << s.block << " xi=" << s.xi << " b=" << s.b;
            return fail.str();
        }
    }
    // Monte-Carlo variant smoke test at 1e4 samples.
    SystemConfig mc_cfg;
    mc_cfg.M = mc_cfg.N = 2;
    mc_cfg.t_s = 2;
    mc_cfg.T_s = 10;
    mc_cfg.xi = 2.0;
    mc_cfg.R0 = 100.0;
    mc_cfg.R = 200.0;
    const TrainingReport smoke =
        optimal_training(mc_cfg, SuccessSource::monte_carlo(10000, 55));
    if (smoke.t_s_star < 2 || smoke.t_s_star > 9 ||
        !std::isfinite(smoke.nu_star))
        return "FAIL MC smoke test returned an infeasible optimum";
    return "10 closed-form configs concave within 1e-9 * peak; MC smoke ok";
}

// ---------------------------------------------------------------- criterion 6

std::string criterion_curve_shapes() {
    // Optimal-training curve, short coherence block: M=N=4, xi=16, T_s=10,
    // powers from -10 dBm to 40 dBm.
    ExperimentSpec train;
    train.name = ExperimentName::optimal_training_curve;
    train.config.M = train.config.N = 4;
    train.config.t_s = 4;
    train.config.T_s = 10;
    train.config.xi = 16.0;
    train.config.R = 1600.0;
    train.config.R0 = 100.0;
    train.config.sigma2 = 1e-3;
    train.config.P_max = 10.0;
    train.grid = {1e-4, 10.0, 26, true};
    train.grid_given = true;
    train.samples = 10000;
    train.seed = 6;
    train.output_path.clear();
    const std::string train_csv = run_experiment(train).csv;

    auto rows_of = [](const std::string& csv) {
        std::vector<std::vector<double>> rows;
        std::istringstream in(csv);
        std::string line;
        int skipped = 0;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            if (skipped++ == 0) continue; // column header
            std::vector<double> fields;
            std::istringstream ls(line);
            std::string f;
            while (std::getline(ls, f, ',')) fields.push_back(std::stod(f));
            rows.push_back(fields);
        }
        return rows;
    };
    const auto train_rows = rows_of(train_csv);
    if (train_rows.empty()) return "FAIL empty training curve";
    const int ts_low = static_cast<int>(train_rows.front()[2]);
    const int ts_high = static_cast<int>(train_rows.back()[2]);
    if (ts_low != train.config.T_s - 1)
        return "FAIL t_s* at -10 dBm is " + std::to_string(ts_low) +
               ", want T_s-1 = 9";
    if (ts_high != train.config.M)
        return "FAIL t_s* at 40 dBm is " + std::to_string(ts_high) +
               ", want M = 4";

    // Antenna sweep: joint (M, t_s) argmax, M* = 1 at both power extremes.
    ExperimentSpec ant;
    ant.name = ExperimentName::optimal_antennas_curve;
    ant.config.M = 4;
    ant.config.N = 4;
    ant.config.t_s = 4;
    ant.config.T_s = 100;
    ant.config.xi = 2.0;
    ant.config.R = 200.0;
    ant.config.R0 = 100.0;
    ant.config.b = 1e-2;
    ant.config.P_max = 100.0;
    ant.grid = {1e-5, 100.0, 15, true};
    ant.grid_given = true;
    ant.samples = 10000;
    ant.seed = 9;
    ant.output_path.clear();
    const auto ant_rows = rows_of(run_experiment(ant).csv);
    if (ant_rows.empty()) return "FAIL empty antenna curve";
    const int m_low = static_cast<int>(ant_rows.front()[2]);
    const int m_high = static_cast<int>(ant_rows.back()[2]);
    if (m_low != 1)
        return "FAIL M* at the low-power extreme is " + std::to_string(m_low);
    if (m_high != 1)
        return "FAIL M* at the high-power extreme is " + std::to_string(m_high);
    std::ostringstream detail;
    detail << "t_s*: " << ts_low << " -> " << ts_high
           << " across -10..40 dBm; M*: " << m_low << " / " << m_high
           << " at the power extremes";
    return detail.str();
}

// ---------------------------------------------------------------- criterion 7

std::string criterion_roundtrip_derivatives() {
    Rng rng(77);
    double worst_rt = 0.0, worst_d = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = std::exp(10.0 * rng.uniform() - 5.0);
        const double tau = std::exp(6.0 * rng.uniform() - 3.0);
        const double rho = snr_from_effective(x, tau);
        worst_rt = std::max(worst_rt,
                            std::abs(effective_snr(rho, tau) - x) / x);

        const double r = std::exp(6.0 * rng.uniform() - 3.0);
        const double h_r = 1e-6 * std::max(1.0, r);
        const double fd_rho =
            (effective_snr(r + h_r, tau) - effective_snr(r - h_r, tau)) /
            (2.0 * h_r);
        const double h_t = 1e-6 * std::max(1.0, tau);
        const double fd_tau =
            (effective_snr(r, tau + h_t) - effective_snr(r, tau - h_t)) /
            (2.0 * h_t);
        worst_d = std::max(
            worst_d, std::abs(d_effective_snr_d_rho(r, tau) - fd_rho) /
                         std::abs(fd_rho));
        worst_d = std::max(
            worst_d, std::abs(d_effective_snr_d_tau(r, tau) - fd_tau) /
                         std::abs(fd_tau));
    }
    std::ostringstream detail;
    detail << "worst round trip " << worst_rt << ", worst derivative gap "
           << worst_d;
    if (worst_rt >= 1e-10) return "FAIL round trip: " + detail.str();
    if (worst_d >= 1e-6) return "FAIL derivatives: " + detail.str();
    return detail.str();
}

// ---------------------------------------------------------------- criterion 8

std::string criterion_monotone_effects() {
    // P* strictly increasing along b/a for the 4x4 no-CSIT setup.
    SystemConfig cfg;
    cfg.M = cfg.N = 4;
    cfg.t_s = 4;
    cfg.T_s = 55;
    cfg.xi = 16.0;
    cfg.R = 1600.0;
    cfg.R0 = 100.0;
    const SuccessSource src = SuccessSource::monte_carlo(10000, 8);
    double prev = 0.0;
    std::ostringstream detail;
    for (double ratio : {0.0, 1e-3, 1e-2}) {
        SystemConfig c = cfg;
        c.b = ratio * c.a;
        const double p_star = optimal_power_nocsit(c, src).argmax;
        if (p_star <= prev) {
            std::ostringstream fail;
            fail << "FAIL P* not strictly increasing: " << p_star
                 << " after " << prev << " at b/a=" << ratio;
            return fail.str();
        }
        detail << "P*(b/a=" << ratio << ")=" << p_star << "W ";
        prev = p_star;
    }

    // Water-filling never loses to uniform allocation on the comparison sweep.
    ExperimentSpec cmp;
    cmp.name = ExperimentName::compare_pa_upa;
    cmp.config.M = cmp.config.N = 2;
    cmp.config.t_s = 2;
    cmp.config.T_s = 100;
    cmp.config.xi = 4.0;
    cmp.config.R = 400.0;
    cmp.config.R0 = 100.0;
    cmp.config.b = 1e-3;
    cmp.grid = {1e-4, 1.0, 10, true};
    cmp.grid_given = true;
    cmp.samples = 16;
    cmp.seed = 12;
    cmp.threads = 4;
    cmp.output_path.clear();
    const std::string csv = run_experiment(cmp).csv;
    std::istringstream in(csv);
    std::string line;
    int skipped = 0, rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (skipped++ == 0) continue;
        std::istringstream ls(line);
        std::string f;
        std::vector<double> fields;
        while (std::getline(ls, f, ',')) fields.push_back(std::stod(f));
        if (fields[3] < fields[4])
            return "FAIL uniform allocation beat water-filling at P_max=" +
                   std::to_string(fields[1]);
        ++rows;
    }
    detail << "; WF >= UPA on all " << rows << " compare rows";
    return detail.str();
}

// ---------------------------------------------------------------- criterion 9

std::string criterion_determinism() {
    int checked = 0;
    for (const std::string& name : experiment_names()) {
        ExperimentSpec spec;
        spec.name = experiment_from_string(name);
        spec.config.M = spec.config.N = 2;
        spec.config.t_s = 2;
        spec.config.T_s = 12;
        spec.config.xi = 2.0;
        spec.config.R = 200.0;
        spec.config.R0 = 100.0;
        spec.config.b = 1e-3;
        // siso-analysis sweeps the block length, not power
        spec.grid = spec.name == ExperimentName::siso_analysis
                        ? GridAxis{10.0, 100.0, 3, true}
                        : GridAxis{1e-4, 1.0, 5, true};
        spec.grid_given = true;
        spec.samples = spec.name == ExperimentName::compare_pa_upa ? 4 : 1500;
        spec.seed = 99;
        spec.output_path.clear();
        spec.threads = 1;
        const std::string first = run_experiment(spec).csv;
        spec.threads = 4;
        const std::string second = run_experiment(spec).csv;
        spec.threads = 3;
        const std::string third = run_experiment(spec).csv;
        if (first != second || first != third)
            return "FAIL CSV bytes differ across thread counts for " + name;
        ++checked;
    }

#ifdef MIMOEE_CLI_PATH
    // End-to-end through the built binary as well.
    const std::string cli = MIMOEE_CLI_PATH;
    const std::string base = "acceptance_cli_run";
    const std::string cmd1 = cli +
                             " sweep-power-nocsit --seed 5 --samples 800 "
                             "--grid 1e-4:1:4:log --threads 1 --out " +
                             base + "1.csv > /dev/null";
    const std::string cmd2 = cli +
                             " sweep-power-nocsit --seed 5 --samples 800 "
                             "--grid 1e-4:1:4:log --threads 4 --out " +
                             base + "2.csv > /dev/null";
    if (std::system(cmd1.c_str()) != 0 || std::system(cmd2.c_str()) != 0)
        return "FAIL CLI invocation returned nonzero";
    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    const std::string a = slurp(base + "1.csv");
    const std::string b = slurp(base + "2.csv");
    std::remove((base + "1.csv").c_str());
    std::remove((base + "2.csv").c_str());
    if (a.empty() || a != b)
        return "FAIL CLI output differs across thread counts";
#endif
    return std::to_string(checked) +
           " experiments byte-identical across 3 thread counts (plus CLI)";
}

} // namespace

int main() {
    std::printf("mimo-ee acceptance suite\n");
    run_criterion(1, "SISO low-SNR block-length constants",
                  criterion_siso_lowsnr);
    run_criterion(2, "closed forms vs Monte-Carlo oracle",
                  criterion_closed_vs_mc);
    run_criterion(3, "water-filling optimality", criterion_waterfilling);
    run_criterion(4, "nu(P) unimodality and first-order condition",
                  criterion_unimodality);
    run_criterion(5, "training-time concavity at P*",
                  criterion_training_concavity);
    run_criterion(6, "training/antenna curve shapes",
                  criterion_curve_shapes);
    run_criterion(7, "effective-SNR round trip and derivatives",
                  criterion_roundtrip_derivatives);
    run_criterion(8, "monotone effects of b/a and water-filling gain",
                  criterion_monotone_effects);
    run_criterion(9, "deterministic CSV under reseeded reruns and threading",
                  criterion_determinism);
    if (g_failures == 0) std::printf("all criteria passed\n");
    else std::printf("%d criteria FAILED\n", g_failures);
    return g_failures;
}
