#include "rvlink/simkit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "rvlink/convcode.hpp"

namespace rvlink::simkit {

namespace {

Eigen::MatrixXcd draw_channel(const LinkConfig& cfg, std::mt19937_64& rng, int& resamples) {
    if (cfg.channel_kind != ChannelKind::kNakagami)
        return Eigen::MatrixXcd::Identity(cfg.m_r, cfg.m_t);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Eigen::MatrixXcd h = channel::nakagami_channel_matrix(cfg.fading, cfg.m_r, cfg.m_t, rng);
        if (cfg.criterion == mimo::Criterion::kZf) {
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h);
            const auto& sv = svd.singularValues();
            if (sv(sv.size() - 1) < 1e-12 * sv(0)) {
                ++resamples;
                continue;
            }
        }
        return h;
    }
    throw std::runtime_error("could not draw a full-rank channel");
}

}  // namespace

void LinkConfig::validate() const {
    if (m_r < 1 || m_t < 1) throw std::invalid_argument("antenna counts must be positive");
    if (grid_db.empty()) throw std::invalid_argument("empty grid");
    for (size_t i = 1; i < grid_db.size(); ++i)
        if (grid_db[i] <= grid_db[i - 1])
            throw std::invalid_argument("grid must be strictly increasing");
    if (info_bits_per_trial < 1 || max_trials < 1 || min_error_events < 1 || workers < 1)
        throw std::invalid_argument("counts must be positive");
    if (coded && family.matrices.empty())
        throw std::invalid_argument("coded runs need a family with at least one matrix");
    if (coded && allocation == Allocation::kFixed &&
        (fixed_matrix_index < 0 ||
         fixed_matrix_index >= static_cast<int>(family.matrices.size())))
        throw std::invalid_argument("fixed matrix index out of range");
    if (coded && allocation == Allocation::kPerChannel && m_t > m_r)
        throw std::invalid_argument("per-channel allocation needs m_t <= m_r");
    if (allocation == Allocation::kPerChannel && dynamics == FadingDynamics::kPerSymbol)
        throw std::invalid_argument("per-channel allocation requires quasi-static fading");
}

std::uint64_t derive_seed(std::uint64_t master, int grid_index, int trial_index) {
    // splitmix64 finalizer over the mixed triple
    std::uint64_t z = master;
    z += 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(grid_index) + 1);
    z += 0xbf58476d1ce4e5b9ULL * (static_cast<std::uint64_t>(trial_index) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

TrialResult run_trial(const LinkConfig& cfg, int grid_index, std::uint64_t trial_seed) {
    cfg.validate();
    if (grid_index < 0 || grid_index >= static_cast<int>(cfg.grid_db.size()))
        throw std::invalid_argument("grid index out of range");
    const int c = cfg.qam.bits_per_symbol;
    const double ebn0 = std::pow(10.0, cfg.grid_db[grid_index] / 10.0);

    std::mt19937_64 rng(trial_seed);
    std::bernoulli_distribution coin(0.5);
    TrialResult res;

    Eigen::MatrixXcd h = draw_channel(cfg, rng, res.rank_resamples);

    // per-stream puncturing matrices
    std::vector<int> matrix_of(cfg.m_t, cfg.fixed_matrix_index);
    if (cfg.coded && cfg.allocation == Allocation::kPerChannel) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h);
        Eigen::VectorXd lambda = svd.singularValues().cwiseAbs2();
        matrix_of = mimo::allocate_rates(lambda, cfg.family).matrix_index;
    }

    // source + encode per stream
    std::vector<std::vector<uint8_t>> info(cfg.m_t), coded_bits(cfg.m_t);
    std::uint64_t total_info = 0, total_coded = 0;
    for (int s = 0; s < cfg.m_t; ++s) {
        info[s].resize(cfg.info_bits_per_trial);
        for (auto& b : info[s]) b = coin(rng) ? 1 : 0;
        if (cfg.coded) {
            std::vector<uint8_t> mother_out = convcode::encode(cfg.family.mother, info[s]);
            coded_bits[s] = puncture(cfg.family.matrices[matrix_of[s]], mother_out);
        } else {
            coded_bits[s] = info[s];
        }
        total_info += info[s].size();
        total_coded += coded_bits[s].size();
    }
    const double rate_eff = static_cast<double>(total_info) / static_cast<double>(total_coded);
    const double sigma_n2 = cfg.noiseless ? 0.0 : 1.0 / (c * rate_eff * ebn0);

    // map each stream, padding shorter streams with filler zeros that the
    // receiver discards before decoding
    size_t frames = 0;
    for (int s = 0; s < cfg.m_t; ++s)
        frames = std::max(frames, (coded_bits[s].size() + c - 1) / c);
    std::vector<std::vector<modem::cplx>> tx(cfg.m_t);
    for (int s = 0; s < cfg.m_t; ++s) {
        std::vector<uint8_t> padded = coded_bits[s];
        padded.resize(frames * c, 0);
        tx[s] = modem::modulate(cfg.qam, padded);
    }

    // transmit and detect frame by frame; the decoder metric of each symbol
    // is weighted by its post-detection reliability 1/(sigma_n2 * noise gain)
    mimo::DetectionConfig det;
    det.criterion = cfg.criterion;
    std::vector<std::vector<modem::cplx>> rx_soft(cfg.m_t);
    std::vector<std::vector<double>> rx_weight(cfg.m_t);
    for (size_t t = 0; t < frames; ++t) {
        if (cfg.dynamics == FadingDynamics::kPerSymbol && t > 0)
            h = draw_channel(cfg, rng, res.rank_resamples);
        Eigen::VectorXcd s_vec(cfg.m_t);
        for (int s = 0; s < cfg.m_t; ++s) s_vec(s) = tx[s][t];
        Eigen::VectorXcd y = channel::apply_channel(h, s_vec, sigma_n2, rng);
        mimo::DetectionResult d = mimo::vblast_detect(h, y, sigma_n2, det, cfg.qam);
        for (int s = 0; s < cfg.m_t; ++s) {
            rx_soft[s].push_back(d.soft(s));
            rx_weight[s].push_back(sigma_n2 > 0.0 ? 1.0 / (sigma_n2 * d.noise_gain(s)) : 1.0);
        }
    }

    // decode and count
    for (int s = 0; s < cfg.m_t; ++s) {
        std::vector<double> metrics = modem::soft_bits(cfg.qam, rx_soft[s]);
        for (size_t i = 0; i < metrics.size(); ++i) metrics[i] *= rx_weight[s][i / c];
        metrics.resize(coded_bits[s].size());  // drop filler positions
        std::vector<uint8_t> decoded;
        if (cfg.coded) {
            auto soft = depuncture(cfg.family.matrices[matrix_of[s]], metrics);
            decoded = convcode::viterbi_decode(cfg.family.mother, soft);
        } else {
            decoded.reserve(metrics.size());
            for (double v : metrics) decoded.push_back(v > 0.0 ? 1 : 0);
        }
        if (decoded.size() != info[s].size()) throw std::logic_error("decode length mismatch");
        res.bits += info[s].size();
        for (size_t i = 0; i < info[s].size(); ++i)
            if (decoded[i] != info[s][i]) ++res.errors;
    }
    return res;
}

RunSummary run_sweep(const LinkConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    RunSummary summary;
    summary.config = cfg;
    summary.seed = cfg.master_seed;

    for (int g = 0; g < static_cast<int>(cfg.grid_db.size()); ++g) {
        std::vector<TrialResult> results;
        int next_trial = 0;
        int stop_at = cfg.max_trials;  // exclusive index of the last included trial
        while (next_trial < stop_at) {
            const int batch =
                std::min(cfg.workers, stop_at - next_trial);
            std::vector<TrialResult> out(batch);
            auto work = [&](int slot) {
                int trial = next_trial + slot;
                out[slot] = run_trial(cfg, g, derive_seed(cfg.master_seed, g, trial));
            };
            if (batch == 1) {
                work(0);
            } else {
                std::vector<std::thread> pool;
                for (int i = 0; i < batch; ++i) pool.emplace_back(work, i);
                for (auto& th : pool) th.join();
            }
            for (auto& r : out) results.push_back(r);
            next_trial += batch;
            // stop rule on the prefix in trial-index order: independent of
            // batch size, so worker count cannot change the included set
            std::uint64_t cum = 0;
            for (int i = 0; i < static_cast<int>(results.size()); ++i) {
                cum += results[i].errors;
                if (cum >= static_cast<std::uint64_t>(cfg.min_error_events)) {
                    stop_at = std::min(stop_at, i + 1);
                    break;
                }
            }
        }
        results.resize(std::min<int>(static_cast<int>(results.size()), stop_at));

        PointSummary p;
        p.ebn0_db = cfg.grid_db[g];
        p.trials_run = static_cast<int>(results.size());
        for (const auto& r : results) {
            p.bits += r.bits;
            p.errors += r.errors;
            p.rank_resamples += r.rank_resamples;
        }
        p.ber = p.bits ? static_cast<double>(p.errors) / static_cast<double>(p.bits) : 0.0;
        p.std_error = p.bits ? std::sqrt(p.ber * (1.0 - p.ber) / static_cast<double>(p.bits)) : 0.0;
        summary.points.push_back(p);
    }
    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

}  // namespace rvlink::simkit
