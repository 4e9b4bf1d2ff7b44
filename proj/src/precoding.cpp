#include "mimoee/precoding.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace mimoee {

namespace {

/// log2 det(I + G) for Hermitian PSD G, via eigenvalues. Stable at any SNR.
double log2_det_identity_plus(const Eigen::MatrixXcd& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g,
                                                       Eigen::EigenvaluesOnly);
    double bits = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double lambda = std::max(0.0, es.eigenvalues()(i));
        bits += std::log1p(lambda);
    }
    return bits / std::numbers::ln2;
}

} // namespace

SvdFactors svd(const ChannelMatrix& h) {
    if (h.rows() < 1 || h.cols() < 1)
        throw std::invalid_argument("svd: empty matrix");
    if (!h.allFinite())
        throw std::invalid_argument("svd: non-finite entries");
    Eigen::JacobiSVD<Eigen::MatrixXcd> solver(
        h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

PowerAllocation waterfill(const Eigen::VectorXd& d_squared, double mode_snr,
                          double total_power) {
    const int k = static_cast<int>(d_squared.size());
    if (k < 1) throw std::invalid_argument("waterfill: empty d_squared");
    if (mode_snr <= 0.0)
        throw std::invalid_argument("waterfill: mode_snr must be > 0");
    if (total_power <= 0.0)
        throw std::invalid_argument("waterfill: total_power must be > 0");
    if ((d_squared.array() < 0.0).any())
        throw std::invalid_argument("waterfill: negative d_squared entry");
    if ((d_squared.array() == 0.0).all())
        throw std::invalid_argument("waterfill: all-zero d_squared");

    std::vector<int> active;
    for (int i = 0; i < k; ++i)
        if (d_squared(i) > 0.0) active.push_back(i);

    Eigen::VectorXd s = Eigen::VectorXd::Zero(k);
    double mu = 0.0;
    // Drop modes whose weight would be negative and re-solve; the weakest
    // modes drop first, so this terminates in at most K passes.
    while (true) {
        double inv_sum = 0.0;
        for (int i : active) inv_sum += 1.0 / (mode_snr * d_squared(i));
        mu = (total_power + inv_sum) / static_cast<double>(active.size());

        std::vector<int> keep;
        for (int i : active)
            if (mu - 1.0 / (mode_snr * d_squared(i)) > 0.0) keep.push_back(i);
        if (keep.size() == active.size() || keep.empty()) break;
        active.swap(keep);
    }
    for (int i : active) s(i) = mu - 1.0 / (mode_snr * d_squared(i));
    return {s, mu};
}

double mutual_info_csitr(double power, const Eigen::MatrixXcd& q,
                         const ChannelMatrix& h, double sigma2) {
    if (power < 0.0)
        throw std::invalid_argument("mutual_info_csitr: power must be >= 0");
    if (sigma2 <= 0.0)
        throw std::invalid_argument("mutual_info_csitr: sigma2 must be > 0");
    if (q.rows() != h.cols() || q.cols() != h.cols())
        throw std::invalid_argument("mutual_info_csitr: Q must be M x M");
    const double scale = power / (static_cast<double>(h.cols()) * sigma2);
    const Eigen::MatrixXcd g = scale * (h * q * h.adjoint());
    return log2_det_identity_plus(g);
}

double mutual_info_icsitr(double rho_eff, const Eigen::VectorXd& weights,
                          const Eigen::VectorXd& d_squared, int num_tx) {
    if (weights.size() != d_squared.size())
        throw std::invalid_argument("mutual_info_icsitr: length mismatch");
    if (num_tx < 1)
        throw std::invalid_argument("mutual_info_icsitr: num_tx must be >= 1");
    const double c = rho_eff / num_tx;
    double bits = 0.0;
    for (int i = 0; i < weights.size(); ++i)
        bits += std::log1p(c * d_squared(i) * weights(i));
    return bits / std::numbers::ln2;
}

double mutual_info_icsir(double rho_eff, const ChannelMatrix& h_hat) {
    const double c = rho_eff / static_cast<double>(h_hat.cols());
    const Eigen::MatrixXcd g = c * (h_hat * h_hat.adjoint());
    return log2_det_identity_plus(g);
}

Eigen::MatrixXcd precoding_matrix(const SvdFactors& factors,
                                  const PowerAllocation& alloc) {
    const int m = static_cast<int>(factors.v.rows());
    Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
    s.head(alloc.weights.size()) = alloc.weights;
    return factors.v * s.asDiagonal() * factors.v.adjoint();
}

} // namespace mimoee
