#include "rvlink/mimo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rvlink::mimo {

namespace {

void require_finite(const MatrixXcd& h) {
    if (!h.allFinite()) throw std::invalid_argument("channel matrix has non-finite entries");
    if (h.size() == 0 || h.norm() == 0.0) throw std::invalid_argument("channel matrix is zero");
}

}  // namespace

SvdSubchannels svd_subchannels(const MatrixXcd& h) {
    require_finite(h);
    Eigen::JacobiSVD<MatrixXcd> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SvdSubchannels out;
    out.u = svd.matrixU();
    out.v = svd.matrixV();
    VectorXd sv = svd.singularValues();  // descending by Eigen contract
    out.d = MatrixXd::Zero(h.rows(), h.cols());
    for (Eigen::Index i = 0; i < sv.size(); ++i) out.d(i, i) = sv(i);
    out.lambda = sv.cwiseProduct(sv);
    return out;
}

ChannelRealization::ChannelRealization(MatrixXcd h_, double sigma_n2_)
    : h(std::move(h_)), sigma_n2(sigma_n2_) {
    require_finite(h);
    auto svd = svd_subchannels(h);
    u = svd.u;
    v = svd.v;
    lambda = svd.lambda;
    Eigen::HouseholderQR<MatrixXcd> qr(h);
    MatrixXcd thin_q = qr.householderQ() * MatrixXcd::Identity(h.rows(), h.cols());
    MatrixXcd full_r = qr.matrixQR().triangularView<Eigen::Upper>();
    q = thin_q;
    r = full_r.topRows(h.cols());
}

MatrixXcd nulling_matrix(const MatrixXcd& h, double sigma_n2, Criterion criterion) {
    require_finite(h);
    MatrixXcd gram = h.adjoint() * h;
    if (criterion == Criterion::kZf) {
        Eigen::FullPivLU<MatrixXcd> lu(gram);
        if (!lu.isInvertible())
            throw std::runtime_error("ZF nulling failed: channel is rank-deficient");
        return lu.inverse() * h.adjoint();
    }
    if (sigma_n2 < 0.0) throw std::invalid_argument("negative noise variance");
    MatrixXcd reg = gram + sigma_n2 * MatrixXcd::Identity(gram.rows(), gram.cols());
    Eigen::FullPivLU<MatrixXcd> lu(reg);
    if (!lu.isInvertible())
        throw std::runtime_error("MMSE nulling failed: regularized Gram matrix is singular");
    return lu.inverse() * h.adjoint();
}

DetectionResult vblast_detect(const MatrixXcd& h, const VectorXcd& y, double sigma_n2,
                              const DetectionConfig& config, const modem::QamParams& qam) {
    require_finite(h);
    if (y.size() != h.rows()) throw std::invalid_argument("received vector dimension mismatch");
    const int m_t = static_cast<int>(h.cols());
    DetectionResult res;
    res.symbols = VectorXcd::Zero(m_t);
    res.soft = VectorXcd::Zero(m_t);
    res.noise_gain = VectorXd::Ones(m_t);

    std::vector<int> remaining(m_t);
    std::iota(remaining.begin(), remaining.end(), 0);
    VectorXcd residual = y;

    while (!remaining.empty()) {
        MatrixXcd hr(h.rows(), remaining.size());
        for (size_t c = 0; c < remaining.size(); ++c) hr.col(c) = h.col(remaining[c]);
        MatrixXcd w = nulling_matrix(hr, sigma_n2, config.criterion);

        size_t pick = 0;
        if (config.ordering == Ordering::kBestPostSnrFirst) {
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index rrow = 0; rrow < w.rows(); ++rrow) {
                double nrm = w.row(rrow).squaredNorm();  // smaller row norm = larger post-SNR
                if (nrm < best) {
                    best = nrm;
                    pick = static_cast<size_t>(rrow);
                }
            }
        }
        int stream = remaining[pick];
        std::complex<double> soft = (w.row(static_cast<Eigen::Index>(pick)) * residual)(0);
        std::complex<double> hard = modem::slice(qam, soft);
        res.noise_gain(stream) = w.row(static_cast<Eigen::Index>(pick)).squaredNorm();
        res.soft(stream) = soft;
        res.symbols(stream) = hard;
        residual -= h.col(stream) * hard;
        remaining.erase(remaining.begin() + static_cast<long>(pick));
    }
    return res;
}

double eta_mmse(const MatrixXcd& h, double sigma_n2, int stream, EtaMode mode,
                std::mt19937_64* rng, int draws) {
    if (stream < 1 || stream > h.cols()) throw std::invalid_argument("stream index out of range");
    const int dim = stream - 1;
    if (dim == 0) return 0.0;
    MatrixXcd hi = h.leftCols(dim);
    MatrixXcd m = hi.adjoint() * hi + sigma_n2 * MatrixXcd::Identity(dim, dim);
    Eigen::LLT<MatrixXcd> llt(m);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("eta_mmse: kernel matrix not positive definite");
    if (mode == EtaMode::kExpected) {
        // E[beta* M^-1 beta] = tr(M^-1) = ||L^-1||_F^2 for unit-variance beta
        MatrixXcd linv = llt.matrixL().solve(MatrixXcd::Identity(dim, dim));
        return linv.squaredNorm();
    }
    if (!rng) throw std::invalid_argument("sampled eta mode requires an RNG");
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    double acc = 0.0;
    for (int d = 0; d < draws; ++d) {
        VectorXcd beta(dim);
        for (int i = 0; i < dim; ++i) beta(i) = std::complex<double>(g(*rng), g(*rng));
        acc += llt.matrixL().solve(beta).squaredNorm();  // beta* M^-1 beta, exactly >= 0
    }
    return acc / draws;
}

VectorXd post_snr(const ChannelRealization& ch, Criterion criterion, double input_ebn0,
                  EtaMode mode, std::mt19937_64* rng, int draws) {
    const int m_t = ch.m_t();
    VectorXd out(m_t);
    for (int i = 0; i < m_t; ++i) {
        double rii2 = std::norm(ch.r(i, i));
        out(i) = rii2 * input_ebn0;
        if (criterion == Criterion::kMmse)
            out(i) += eta_mmse(ch.h, ch.sigma_n2, i + 1, mode, rng, draws);
    }
    return out;
}

RateAllocation allocate_rates(const VectorXd& lambda, const rcpc::RcpcFamily& family) {
    if (lambda.size() == 0) throw std::invalid_argument("empty subchannel list");
    if (family.matrices.size() < 2 && lambda.size() > 1)
        throw std::invalid_argument("family must provide at least two rates");
    const int n = static_cast<int>(lambda.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    // strongest first; ties break toward the smaller stream index
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return lambda(a) > lambda(b); });
    RateAllocation alloc;
    alloc.matrix_index.assign(n, 0);
    const int protected_count = (n + 1) / 2;
    for (int rank = 0; rank < n; ++rank)
        alloc.matrix_index[order[rank]] = rank < protected_count ? 0 : 1;
    return alloc;
}

double effective_m(int m_r, int m_t) {
    if (m_r < 1 || m_t < 1) throw std::invalid_argument("antenna counts must be >= 1");
    return (m_r + m_t - 1) / 4.0;
}

}  // namespace rvlink::mimo
