#ifndef RVLINK_SIMKIT_HPP
#define RVLINK_SIMKIT_HPP

#include <cstdint>
#include <vector>

#include "rvlink/channel.hpp"
#include "rvlink/mimo.hpp"
#include "rvlink/modem.hpp"
#include "rvlink/rcpc.hpp"

namespace rvlink::simkit {

enum class ChannelKind { kNakagami, kAwgn, kIdentity };
enum class Allocation { kFixed, kPerChannel };

/// Quasi-static: one realization per trial. Per-symbol: an independent
/// realization every vector symbol (ideal interleaving, the regime the
/// analytic union bound describes).
enum class FadingDynamics { kQuasiStatic, kPerSymbol };

/// Monte Carlo link description. One trial = one quasi-static channel
/// realization carrying `info_bits_per_trial` information bits per stream.
struct LinkConfig {
    int m_r = 1, m_t = 1;
    channel::FadingParams fading;
    ChannelKind channel_kind = ChannelKind::kNakagami;
    FadingDynamics dynamics = FadingDynamics::kQuasiStatic;
    mimo::Criterion criterion = mimo::Criterion::kZf;
    modem::QamParams qam = modem::QamParams::make(4);

    bool coded = true;
    rcpc::RcpcFamily family;
    Allocation allocation = Allocation::kFixed;
    int fixed_matrix_index = 0;

    std::vector<double> grid_db;  // strictly increasing
    int info_bits_per_trial = 200;
    int max_trials = 2000;
    int min_error_events = 100;  // early-stop rule
    bool noiseless = false;
    std::uint64_t master_seed = 1;
    int workers = 1;

    void validate() const;
};

struct TrialResult {
    std::uint64_t bits = 0;
    std::uint64_t errors = 0;
    int rank_resamples = 0;  // ZF rank failures that forced a channel redraw
};

struct PointSummary {
    double ebn0_db = 0.0;
    std::uint64_t bits = 0;
    std::uint64_t errors = 0;
    double ber = 0.0;
    double std_error = 0.0;  // sqrt(p (1-p) / bits)
    int trials_run = 0;
    int rank_resamples = 0;
};

struct RunSummary {
    LinkConfig config;       // echo
    std::uint64_t seed = 0;  // echo
    std::vector<PointSummary> points;
    double wall_seconds = 0.0;
};

/// Fixed seed-mixing function: trial seeds depend only on
/// (master seed, grid index, trial index), never on execution layout.
std::uint64_t derive_seed(std::uint64_t master, int grid_index, int trial_index);

/// One full chain pass: encode, puncture, map, transmit, detect, depuncture,
/// decode, count. Deterministic given the trial seed.
TrialResult run_trial(const LinkConfig& config, int grid_index, std::uint64_t trial_seed);

/// Runs trials in index order per grid point until the stop rule fires
/// (cumulative errors >= min_error_events) or max_trials is reached. The
/// included trial set depends only on (config, seed), not on worker count.
RunSummary run_sweep(const LinkConfig& config);

}  // namespace rvlink::simkit

#endif
