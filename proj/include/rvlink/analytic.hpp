#ifndef RVLINK_ANALYTIC_HPP
#define RVLINK_ANALYTIC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rvlink/channel.hpp"
#include "rvlink/convcode.hpp"
#include "rvlink/mimo.hpp"
#include "rvlink/modem.hpp"
#include "rvlink/quadrature.hpp"

namespace rvlink::analytic {

/// Inputs for the closed-form BER formulas.
struct AnalyticConfig {
    modem::QamParams qam = modem::QamParams::make(4);
    channel::FadingParams fading;     // shape m and branch correlation rho
    int branches = 1;                 // diversity branch count L
    double mean_snr = 0.0;            // per-branch mean SNR (linear)
    double code_rate = 0.5;
    int puncturing_period = 1;
    convcode::DistanceSpectrum spectrum;
    std::vector<double> grid_db;      // strictly increasing E_b/N_0 grid
    quad::Options quad;

    void validate() const;
};

/// Correlation factor for equicorrelated MRC branches.
/// r(rho=0) = L and r -> L^2 as rho -> 1 (rho = 1 itself is excluded).
double corr_factor_r(int l, double rho);

/// Average M-QAM BER over L-branch Nakagami-m MRC, either independent
/// branches (product of per-branch moment factors) or the equicorrelated
/// model driven by corr_factor_r. Uses config.mean_snr and config.branches.
double avg_ber(const AnalyticConfig& config, bool correlated);

/// Pairwise error probability for a weight-d error event, evaluated as a
/// single finite integral of the gamma moment factor with shape m*d.
/// Mean symbol SNR is c * code_rate * ebn0.
double p_d(int d, const AnalyticConfig& config, double ebn0);

/// Independent semi-infinite evaluation of the same expectation (Gaussian
/// tail against the gamma density); kept as a cross-check oracle.
double p_d_direct(int d, const AnalyticConfig& config, double ebn0);

struct UnionBoundResult {
    double raw = 0.0;       // truncated sum, unclipped
    double clipped = 0.0;   // min(raw, 1)
    double tail_ratio = 0.0;  // last-term magnitude relative to the sum
};

/// Truncated first-event error bound (1/P_c) * sum_d c_d * P_d.
UnionBoundResult union_bound(const convcode::DistanceSpectrum& spectrum,
                             const AnalyticConfig& config, double ebn0);

struct BerPoint {
    double ebn0_db = 0.0;
    double raw = 0.0;      // literal formula value, may exceed 1
    double clipped = 0.0;  // presentation value in [0, 1]
};

struct BerCurve {
    std::vector<BerPoint> points;
    std::string criterion;
    int m_r = 0, m_t = 0;
    double m = 1.0, rho = 0.0;
    double code_rate = 0.0;
};

/// Which shape parameter the bracketed channel factor uses.
enum class ExponentFamily {
    kAntennaDifference,  // q = (|M_r - M_t| + 1) / 4
    kAntennaSum,         // q = (M_r + M_t - 1) / 4
};

/// How many diversity branches the QAM term sees.
enum class BranchCount {
    kProduct,  // L = M_r * M_t
    kMin,      // L = min(M_r, M_t)
};

struct SystemSwitches {
    ExponentFamily exponent = ExponentFamily::kAntennaDifference;
    BranchCount branch_count = BranchCount::kProduct;
    bool bracket = true;      // include the bracketed channel-density factor
    bool rate_in_qam = true;  // apply c * code_rate to the QAM-term SNR
};

struct SystemConfig {
    AnalyticConfig base;
    int m_r = 2, m_t = 2;
    mimo::Criterion criterion = mimo::Criterion::kZf;
    SystemSwitches switches;
    int ensemble_draws = 4000;    // channel realizations for the post-SNR factors
    std::uint64_t ensemble_seed = 5;
};

/// Seeded ensemble averages of the per-stream post-processing factors:
/// squared QR diagonal entries and the MMSE eta increment.
struct PostFactors {
    Eigen::VectorXd rii2_mean;
    Eigen::VectorXd eta_mean;
};

PostFactors estimate_post_factors(int m_r, int m_t, double m, double sigma_n2,
                                  int draws, std::uint64_t seed);

/// Full coded V-BLAST BER curve: QAM term x bracketed factor x union bound,
/// evaluated at the criterion's ensemble-average post-processing E_b/N_0.
BerCurve system_ber(const SystemConfig& config);

}  // namespace rvlink::analytic

#endif
