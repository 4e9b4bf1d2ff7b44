#include "mimoee/success.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mimoee/channel.hpp"
#include "mimoee/rng.hpp"

namespace mimoee {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lower_gamma_series(double a, double x) {
    // gamma(a,x)/Gamma(a) by series, converges fast for x < a+1.
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double upper_gamma_cf(double a, double x) {
    // Gamma(a,x)/Gamma(a) by Lentz continued fraction, for x >= a+1.
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-17) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_gamma_domain(double a, double x, const char* who) {
    if (!(a > 0.0))
        throw std::invalid_argument(std::string(who) + ": a must be > 0");
    if (!(x >= 0.0))
        throw std::invalid_argument(std::string(who) + ": x must be >= 0");
}

double pow2m1(double xi) { return std::exp2(xi) - 1.0; }

} // namespace

double q_function(double x) {
    if (std::isnan(x)) throw std::invalid_argument("q_function: NaN input");
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double regularized_lower_gamma(double a, double x) {
    check_gamma_domain(a, x, "regularized_lower_gamma");
    if (x == 0.0) return 0.0;
    return x < a + 1.0 ? lower_gamma_series(a, x) : 1.0 - upper_gamma_cf(a, x);
}

double regularized_upper_gamma(double a, double x) {
    check_gamma_domain(a, x, "regularized_upper_gamma");
    if (x == 0.0) return 1.0;
    return x < a + 1.0 ? 1.0 - lower_gamma_series(a, x) : upper_gamma_cf(a, x);
}

std::pair<double, double> wilson_interval(long successes, long trials,
                                          double z) {
    if (trials < 1)
        throw std::invalid_argument("wilson_interval: trials must be >= 1");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half =
        z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

SuccessProb f_L_gaussian(double mutual_info, double xi, int block_length,
                         double rho) {
    if (block_length < 1)
        throw std::invalid_argument("f_L_gaussian: block_length must be >= 1");
    if (rho < 0.0)
        throw std::invalid_argument("f_L_gaussian: rho must be >= 0");
    if (rho == 0.0) {
        // Zero-SNR limit: dispersion vanishes, outcome is a step.
        if (mutual_info < xi) return {0.0, 0.0};
        if (mutual_info > xi) return {1.0, 0.0};
        throw std::domain_error("f_L_gaussian: undefined at rho = 0, I = xi");
    }
    const double spread =
        std::sqrt(2.0 * rho / ((1.0 + rho) * static_cast<double>(block_length)));
    return {q_function((xi - mutual_info) / spread), 0.0};
}

SuccessProb f_L_arq(double delta, double block_duration) {
    if (block_duration <= 0.0)
        throw std::invalid_argument("f_L_arq: block duration must be > 0");
    return {q_function(-block_duration * delta), 0.0};
}

SuccessProb success_siso_closed(double rho_eff, double xi) {
    if (rho_eff < 0.0)
        throw std::invalid_argument("success_siso_closed: rho_eff must be >= 0");
    if (xi < 0.0)
        throw std::invalid_argument("success_siso_closed: xi must be >= 0");
    if (xi == 0.0) return {1.0, 0.0};
    if (rho_eff == 0.0) return {0.0, 0.0}; // limit value
    return {std::exp(-pow2m1(xi) / rho_eff), 0.0};
}

SuccessProb success_miso(double rho_eff, int num_tx, double xi) {
    if (num_tx < 1)
        throw std::invalid_argument("success_miso: num_tx must be >= 1");
    if (rho_eff < 0.0)
        throw std::invalid_argument("success_miso: rho_eff must be >= 0");
    if (xi == 0.0) return {1.0, 0.0};
    if (rho_eff == 0.0) return {0.0, 0.0};
    const double z = num_tx * pow2m1(xi) / rho_eff;
    return {regularized_upper_gamma(static_cast<double>(num_tx), z), 0.0};
}

namespace {

// 2x2 complex-Wishart (unit-variance entries) joint eigenvalue density:
// p(l1,l2) = 1/2 (l1-l2)^2 exp(-l1-l2) on the quadrant.
// Success region (1+c l1)(1+c l2) >= A reduces, after integrating l2
// analytically, to the 1-D integral of
//   g(l) = 1/2 exp(-l - T(l)) [ (T-l)^2 + 2(T-l) + 2 ],
//   T(l) = max(0, (A/(1+c l) - 1)/c),
// over l in [0, l*], l* = (A-1)/c, plus the analytic tail
// 1/2 e^{-l*} (l*^2 + 2) where T = 0.
//
// Integrated in v = ln(1+c l) where the exponent (e^v + A e^{-v} - 2)/c is
// symmetric and the deep-outage peak stays resolvable.
struct Quad22 {
    double c;
    double big_a;

    double integrand_v(double v) const {
        const double ev = std::exp(v);
        const double l = (ev - 1.0) / c;
        const double t = (big_a * std::exp(-v) - 1.0) / c;
        const double d = t - l;
        const double density = 0.5 * std::exp(-l - t) * (d * d + 2.0 * d + 2.0);
        return density * ev / c; // dl = e^v / c dv
    }

    double adaptive(double lo, double hi, double flo, double fmid, double fhi,
                    double whole, double tol, int depth) const {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid);
        const double rm = 0.5 * (mid + hi);
        const double flm = integrand_v(lm);
        const double frm = integrand_v(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
            return left + right + (left + right - whole) / 15.0;
        return adaptive(lo, mid, flo, flm, fmid, left, tol * 0.5, depth - 1) +
               adaptive(mid, hi, fmid, frm, fhi, right, tol * 0.5, depth - 1);
    }

    double integral() const {
        const double v_hi = std::log(big_a);
        const double flo = integrand_v(0.0);
        const double fhi = integrand_v(v_hi);
        const double fmid = integrand_v(0.5 * v_hi);
        const double whole = v_hi / 6.0 * (flo + 4.0 * fmid + fhi);
        return adaptive(0.0, v_hi, flo, fmid, fhi, whole, 1e-14, 48);
    }
};

} // namespace

SuccessProb success_mimo22(double rho_eff, double xi) {
    if (rho_eff < 0.0)
        throw std::invalid_argument("success_mimo22: rho_eff must be >= 0");
    if (xi == 0.0) return {1.0, 0.0};
    if (rho_eff == 0.0) return {0.0, 0.0};
    const double c = rho_eff / 2.0;
    const double big_a = std::exp2(xi);
    // Exponent floor 2(sqrt(A)-1)/c: below double range the value is 0.
    if (2.0 * (std::sqrt(big_a) - 1.0) / c > 700.0) return {0.0, 0.0};
    const Quad22 quad{c, big_a};
    const double l_star = (big_a - 1.0) / c;
    const double tail = 0.5 * std::exp(-l_star) * (l_star * l_star + 2.0);
    const double value = std::clamp(quad.integral() + tail, 0.0, 1.0);
    return {value, 0.0};
}

SuccessProb success_closed_form(int num_tx, int num_rx, double rho_eff,
                                double xi) {
    if (std::min(num_tx, num_rx) == 1) {
        // One spatial mode: ||h||^2 ~ Gamma(max(M,N), 1), shape from the
        // total antenna count, threshold scaled by M through Q = I_M / M.
        if (xi == 0.0) return {1.0, 0.0};
        if (rho_eff == 0.0) return {0.0, 0.0};
        const double shape = static_cast<double>(std::max(num_tx, num_rx));
        const double z = num_tx * pow2m1(xi) / rho_eff;
        return {regularized_upper_gamma(shape, z), 0.0};
    }
    if (num_tx == 2 && num_rx == 2) return success_mimo22(rho_eff, xi);
    throw std::invalid_argument(
        "success_closed_form: no closed form for this (M, N); use Monte Carlo");
}

double log_success_tail(int num_tx, int num_rx, double rho_eff, double xi) {
    if (num_tx < 1 || num_rx < 1)
        throw std::invalid_argument("log_success_tail: antennas must be >= 1");
    if (rho_eff <= 0.0)
        throw std::invalid_argument("log_success_tail: rho_eff must be > 0");
    if (xi <= 0.0) return 0.0;
    const int k_max = std::min(num_tx, num_rx);
    double best = kInf;
    for (int k = 1; k <= k_max; ++k)
        best = std::min(best, k * (std::exp2(xi / k) - 1.0));
    return -(num_tx / rho_eff) * best;
}

OutageSampler::OutageSampler(int num_tx, int num_rx, double xi, int samples,
                             std::uint64_t seed)
    : num_tx_(num_tx), num_rx_(num_rx), xi_(xi) {
    if (samples < 1)
        throw std::invalid_argument("OutageSampler: samples must be >= 1");
    if (xi < 0.0)
        throw std::invalid_argument("OutageSampler: xi must be >= 0");
    thresholds_.resize(samples);
    const double target = xi * std::numbers::ln2; // sum ln(1+c*lambda) at threshold
    Rng rng(seed);
    for (int s = 0; s < samples; ++s) {
        const ChannelMatrix h = [&] {
            ChannelMatrix m(num_rx, num_tx);
            for (int r = 0; r < num_rx; ++r)
                for (int c = 0; c < num_tx; ++c)
                    m(r, c) = rng.complex_gaussian();
            return m;
        }();
        if (xi == 0.0) {
            thresholds_[s] = 0.0;
            continue;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
            h * h.adjoint(), Eigen::EigenvaluesOnly);
        Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
        const double total = lambda.sum();
        if (total <= 0.0) {
            thresholds_[s] = kInf;
            continue;
        }
        auto excess = [&](double c) {
            double acc = 0.0;
            for (int i = 0; i < lambda.size(); ++i)
                acc += std::log1p(c * lambda(i));
            return acc - target;
        };
        double hi = target / total; // first-order lower bound on c*
        while (excess(hi) < 0.0) hi *= 2.0;
        double lo = 0.0;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            (excess(mid) < 0.0 ? lo : hi) = mid;
        }
        thresholds_[s] = num_tx * 0.5 * (lo + hi);
    }
    std::sort(thresholds_.begin(), thresholds_.end());

    log_thresholds_.reserve(thresholds_.size());
    for (double t : thresholds_)
        if (t > 0.0 && std::isfinite(t))
            log_thresholds_.push_back(std::log(t));
    if (log_thresholds_.size() > 1) {
        double mean = 0.0;
        for (double v : log_thresholds_) mean += v;
        mean /= static_cast<double>(log_thresholds_.size());
        double var = 0.0;
        for (double v : log_thresholds_) var += (v - mean) * (v - mean);
        var /= static_cast<double>(log_thresholds_.size() - 1);
        bandwidth_ = 1.06 * std::sqrt(var) *
                     std::pow(static_cast<double>(log_thresholds_.size()), -0.2);
        if (bandwidth_ <= 0.0) bandwidth_ = 1e-6;
    } else {
        bandwidth_ = 1e-6;
    }
}

SuccessProb OutageSampler::success(double rho_eff) const {
    if (rho_eff < 0.0)
        throw std::invalid_argument("OutageSampler::success: rho_eff must be >= 0");
    const auto n = static_cast<double>(thresholds_.size());
    const auto hit = std::upper_bound(thresholds_.begin(), thresholds_.end(),
                                      rho_eff) -
                     thresholds_.begin();
    const double v = static_cast<double>(hit) / n;
    return {v, std::sqrt(v * (1.0 - v) / n)};
}

double OutageSampler::kernel_success(double rho_eff) const {
    const auto n = static_cast<double>(thresholds_.size());
    if (rho_eff <= 0.0) return 0.0;
    const double zero_mass =
        static_cast<double>(thresholds_.size() - log_thresholds_.size() -
                            std::count(thresholds_.begin(), thresholds_.end(),
                                       kInf)) /
        n;
    const double x = std::log(rho_eff);
    double acc = 0.0;
    for (double lt : log_thresholds_)
        acc += q_function((lt - x) / bandwidth_);
    return zero_mass + acc / n;
}

SuccessProb success_mc(int num_tx, int num_rx, double rho_eff, double xi,
                       int samples, std::uint64_t seed) {
    OutageSampler sampler(num_tx, num_rx, xi, samples, seed);
    return sampler.success(rho_eff);
}

} // namespace mimoee
