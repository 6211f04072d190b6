#ifndef RVLINK_CHANNEL_HPP
#define RVLINK_CHANNEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

namespace rvlink::channel {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// Nakagami-m envelope statistics, E[z^2] = 1. The branch correlation rho is
/// consumed by the analytic engine only; no correlated sampler exists.
struct FadingParams {
    double m = 1.0;
    double rho = 0.0;

    FadingParams() = default;
    FadingParams(double m_, double rho_ = 0.0);
};

/// i.i.d. Nakagami-m envelope samples: sqrt of gamma(shape m, mean 1) power.
std::vector<double> sample_nakagami(const FadingParams& params, size_t count, uint64_t seed);
double sample_nakagami_one(const FadingParams& params, std::mt19937_64& rng);

/// Channel realization recipe: per-entry Nakagami-m envelope times an
/// independent uniform phase.
MatrixXcd nakagami_channel_matrix(const FadingParams& params, int m_r, int m_t, std::mt19937_64& rng);

/// y = H s + n with n circular complex Gaussian, per-entry variance sigma_n2.
VectorXcd apply_channel(const MatrixXcd& h, const VectorXcd& s, double sigma_n2, uint64_t seed);
VectorXcd apply_channel(const MatrixXcd& h, const VectorXcd& s, double sigma_n2, std::mt19937_64& rng);

}  // namespace rvlink::channel

#endif
