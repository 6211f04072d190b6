#include "rvlink/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rvlink::channel {

FadingParams::FadingParams(double m_, double rho_) : m(m_), rho(rho_) {
    if (m < 0.5) throw std::invalid_argument("Nakagami shape m must be >= 0.5");
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("correlation must lie in [0,1]");
}

double sample_nakagami_one(const FadingParams& params, std::mt19937_64& rng) {
    std::gamma_distribution<double> power(params.m, 1.0 / params.m);
    return std::sqrt(power(rng));
}

std::vector<double> sample_nakagami(const FadingParams& params, size_t count, uint64_t seed) {
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    if (params.m < 0.5) throw std::invalid_argument("Nakagami shape m must be >= 0.5");
    std::mt19937_64 rng(seed);
    std::vector<double> out(count);
    for (auto& v : out) v = sample_nakagami_one(params, rng);
    return out;
}

MatrixXcd nakagami_channel_matrix(const FadingParams& params, int m_r, int m_t, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    MatrixXcd h(m_r, m_t);
    for (int r = 0; r < m_r; ++r)
        for (int c = 0; c < m_t; ++c) {
            double a = sample_nakagami_one(params, rng);
            double ph = phase(rng);
            h(r, c) = std::complex<double>(a * std::cos(ph), a * std::sin(ph));
        }
    return h;
}

VectorXcd apply_channel(const MatrixXcd& h, const VectorXcd& s, double sigma_n2, std::mt19937_64& rng) {
    if (h.cols() != s.size()) throw std::invalid_argument("channel/signal dimension mismatch");
    if (sigma_n2 < 0.0) throw std::invalid_argument("negative noise variance");
    VectorXcd y = h * s;
    if (sigma_n2 > 0.0) {
        std::normal_distribution<double> g(0.0, std::sqrt(sigma_n2 / 2.0));
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += std::complex<double>(g(rng), g(rng));
    }
    return y;
}

VectorXcd apply_channel(const MatrixXcd& h, const VectorXcd& s, double sigma_n2, uint64_t seed) {
    std::mt19937_64 rng(seed);
    return apply_channel(h, s, sigma_n2, rng);
}

}  // namespace rvlink::channel
