#ifndef RVLINK_MIMO_HPP
#define RVLINK_MIMO_HPP

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "rvlink/modem.hpp"
#include "rvlink/rcpc.hpp"

namespace rvlink::mimo {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

enum class Criterion { kZf, kMmse };
enum class Ordering { kNatural, kBestPostSnrFirst };

struct DetectionConfig {
    Criterion criterion = Criterion::kZf;
    Ordering ordering = Ordering::kNatural;  // best-first mode is an extension
};

/// Channel matrix with cached SVD and QR products.
struct ChannelRealization {
    MatrixXcd h;
    double sigma_n2 = 0.0;
    MatrixXcd u, v;        // unitary SVD factors
    VectorXd lambda;       // eigenvalues of H H*, descending
    MatrixXcd q;           // M_r x M_t, orthonormal columns
    MatrixXcd r;           // M_t x M_t upper triangular

    explicit ChannelRealization(MatrixXcd h_, double sigma_n2_ = 0.0);

    int m_r() const { return static_cast<int>(h.rows()); }
    int m_t() const { return static_cast<int>(h.cols()); }
    VectorXd singular_values() const { return lambda.cwiseSqrt(); }
};

struct SvdSubchannels {
    MatrixXcd u, d, v;
    VectorXd lambda;  // descending
};

SvdSubchannels svd_subchannels(const MatrixXcd& h);

/// ZF: Moore-Penrose pseudo-inverse (H*H)^-1 H*. MMSE: (H*H + sigma_n2 I)^-1 H*.
/// ZF on a rank-deficient channel is an explicit error.
MatrixXcd nulling_matrix(const MatrixXcd& h, double sigma_n2, Criterion criterion);

/// Iterative nulling and cancellation with hard nearest-neighbor slicing.
/// Returns per-stream sliced symbols plus the pre-slicing soft estimates.
struct DetectionResult {
    VectorXcd symbols;
    VectorXcd soft;
    VectorXd noise_gain;  // squared norm of the nulling row used per stream
};

DetectionResult vblast_detect(const MatrixXcd& h, const VectorXcd& y, double sigma_n2,
                              const DetectionConfig& config, const modem::QamParams& qam);

enum class EtaMode { kExpected, kSampled };

/// Per-stream post-processing E_b/N_0. ZF: R_ii^2 scaling of the input value.
/// MMSE adds the nonnegative eta increment, evaluated either through the
/// exact expectation over the Gaussian vector (deterministic mode) or from
/// sampled draws.
VectorXd post_snr(const ChannelRealization& ch, Criterion criterion, double input_ebn0,
                  EtaMode mode = EtaMode::kExpected, std::mt19937_64* rng = nullptr,
                  int draws = 10000);

/// eta for stream i (1-based), always >= 0.
double eta_mmse(const MatrixXcd& h, double sigma_n2, int stream, EtaMode mode,
                std::mt19937_64* rng = nullptr, int draws = 10000);

/// Indices into family.matrices, one per transmit stream keyed by
/// singular-value rank: the strongest half receives the lowest rate
/// (highest protection), exactly as specified; ties break by stream index.
struct RateAllocation {
    std::vector<int> matrix_index;
};

RateAllocation allocate_rates(const VectorXd& lambda, const rcpc::RcpcFamily& family);

/// Nakagami shape implied by the antenna diversity: (M_r + M_t - 1) / 4.
double effective_m(int m_r, int m_t);

}  // namespace rvlink::mimo

#endif
