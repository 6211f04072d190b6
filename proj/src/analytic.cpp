#include "rvlink/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rvlink::analytic {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLowerLimit = 1e-12;  // avoids the sin(0) singularity

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

void AnalyticConfig::validate() const {
    if (branches < 1) throw std::invalid_argument("branch count must be >= 1");
    if (mean_snr < 0.0) throw std::invalid_argument("mean SNR must be >= 0");
    if (code_rate <= 0.0 || code_rate > 1.0) throw std::invalid_argument("code rate out of range");
    if (puncturing_period < 1) throw std::invalid_argument("puncturing period must be >= 1");
    for (size_t i = 1; i < grid_db.size(); ++i)
        if (grid_db[i] <= grid_db[i - 1])
            throw std::invalid_argument("grid must be strictly increasing");
}

double corr_factor_r(int l, double rho) {
    if (l < 1) throw std::invalid_argument("branch count must be >= 1");
    if (rho < 0.0 || rho >= 1.0)
        throw std::invalid_argument("correlation must lie in [0, 1); the rho = 1 limit is L^2");
    if (rho == 0.0) return static_cast<double>(l);
    const double sr = std::sqrt(rho);
    double geom = (1.0 - std::pow(sr, l)) / (1.0 - sr);
    return l + (2.0 * sr / (1.0 - sr)) * (l - geom);
}

double avg_ber(const AnalyticConfig& config, bool correlated) {
    config.validate();
    const double m = config.fading.m;
    const double rho = config.fading.rho;
    const double l = config.branches;
    const double g = config.qam.g;
    const double gbar = config.mean_snr;
    const double c = config.qam.bits_per_symbol;
    const double sqrt_m_ary = std::sqrt(static_cast<double>(config.qam.m_ary));
    const double b1 = (4.0 / c) * (1.0 - 1.0 / sqrt_m_ary);
    const double b2 = b1 * (1.0 - 1.0 / sqrt_m_ary);

    auto kernel = [&](double theta) {
        const double s2 = std::sin(theta) * std::sin(theta);
        if (!correlated || rho == 0.0)
            return std::pow(1.0 + g * gbar / (m * s2), -m * l);
        const double r = corr_factor_r(config.branches, rho);
        return std::pow(1.0 + gbar * g * r / (m * l * s2), -m * l * l / r);
    };
    double i_half = quad::integrate(kernel, kLowerLimit, kPi / 2.0, config.quad);
    double i_quarter = quad::integrate(kernel, kLowerLimit, kPi / 4.0, config.quad);
    return clip01(b1 * i_half / kPi - b2 * i_quarter / kPi);
}

double p_d(int d, const AnalyticConfig& config, double ebn0) {
    if (d < 1) throw std::invalid_argument("event weight must be >= 1");
    if (ebn0 < 0.0) throw std::invalid_argument("E_b/N_0 must be >= 0");
    const double m = config.fading.m;
    const double g = config.qam.g;
    const double gamma_s = config.qam.bits_per_symbol * config.code_rate * ebn0;
    auto kernel = [&](double theta) {
        const double s2 = std::sin(theta) * std::sin(theta);
        return std::pow(1.0 + g * gamma_s / (m * s2), -m * d);
    };
    return quad::integrate(kernel, kLowerLimit, kPi / 2.0, config.quad) / kPi;
}

double p_d_direct(int d, const AnalyticConfig& config, double ebn0) {
    if (d < 1) throw std::invalid_argument("event weight must be >= 1");
    const double m = config.fading.m;
    const double g = config.qam.g;
    const double gamma_s = config.qam.bits_per_symbol * config.code_rate * ebn0;
    if (gamma_s <= 0.0) throw std::invalid_argument("mean symbol SNR must be positive");
    const double shape = m * d;
    const double rate = m / gamma_s;  // gamma density: rate^shape a^(shape-1) e^(-rate a)/Gamma
    const double log_norm = shape * std::log(rate) - std::lgamma(shape);
    // map alpha = t/(1-t) onto (0, 1); Jacobian 1/(1-t)^2
    auto kernel = [&](double t) {
        const double alpha = t / (1.0 - t);
        double log_pdf = log_norm + (shape - 1.0) * std::log(alpha) - rate * alpha;
        double jac = 1.0 / ((1.0 - t) * (1.0 - t));
        return quad::qfunc(std::sqrt(2.0 * g * alpha)) * std::exp(log_pdf) * jac;
    };
    quad::Options opt = config.quad;
    opt.rel_tol = std::max(opt.rel_tol, 1e-11);
    return quad::integrate(kernel, 1e-14, 1.0 - 1e-14, opt);
}

UnionBoundResult union_bound(const convcode::DistanceSpectrum& spectrum,
                             const AnalyticConfig& config, double ebn0) {
    if (spectrum.c.empty()) throw std::invalid_argument("empty distance spectrum");
    UnionBoundResult res;
    double last_term = 0.0;
    for (const auto& [d, cd] : spectrum.c) {  // std::map iterates in increasing d
        last_term = static_cast<double>(cd) * p_d(d, config, ebn0);
        res.raw += last_term;
    }
    res.raw /= config.puncturing_period;
    last_term /= config.puncturing_period;
    res.tail_ratio = res.raw > 0.0 ? last_term / res.raw : 0.0;
    res.clipped = clip01(res.raw);
    return res;
}

PostFactors estimate_post_factors(int m_r, int m_t, double m, double sigma_n2,
                                  int draws, std::uint64_t seed) {
    if (draws < 1) throw std::invalid_argument("ensemble needs at least one draw");
    channel::FadingParams fading(m);
    std::mt19937_64 rng(seed);
    PostFactors pf;
    pf.rii2_mean = Eigen::VectorXd::Zero(m_t);
    pf.eta_mean = Eigen::VectorXd::Zero(m_t);
    for (int n = 0; n < draws; ++n) {
        Eigen::MatrixXcd h = channel::nakagami_channel_matrix(fading, m_r, m_t, rng);
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(h);
        Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int i = 0; i < m_t; ++i) {
            pf.rii2_mean(i) += std::norm(r(i, i));
            if (i >= 1)
                pf.eta_mean(i) +=
                    mimo::eta_mmse(h, sigma_n2, i + 1, mimo::EtaMode::kExpected);
        }
    }
    pf.rii2_mean /= draws;
    pf.eta_mean /= draws;
    return pf;
}

BerCurve system_ber(const SystemConfig& config) {
    const AnalyticConfig& base = config.base;
    base.validate();
    if (base.grid_db.empty()) throw std::invalid_argument("empty E_b/N_0 grid");
    if (config.m_r < 1 || config.m_t < 1)
        throw std::invalid_argument("antenna counts must be >= 1");

    const int c = base.qam.bits_per_symbol;
    const double rc = base.code_rate;
    const int l = config.switches.branch_count == BranchCount::kProduct
                      ? config.m_r * config.m_t
                      : std::min(config.m_r, config.m_t);
    const double q = config.switches.exponent == ExponentFamily::kAntennaDifference
                         ? (std::abs(config.m_r - config.m_t) + 1) / 4.0
                         : (config.m_r + config.m_t - 1) / 4.0;
    const int diff = std::abs(config.m_r - config.m_t);

    BerCurve curve;
    curve.criterion = config.criterion == mimo::Criterion::kZf ? "zf" : "mmse";
    curve.m_r = config.m_r;
    curve.m_t = config.m_t;
    curve.m = base.fading.m;
    curve.rho = base.fading.rho;
    curve.code_rate = rc;

    for (double db : base.grid_db) {
        const double ebn0_in = std::pow(10.0, db / 10.0);
        const double sigma_n2 = 1.0 / (c * rc * ebn0_in);
        PostFactors pf = estimate_post_factors(config.m_r, config.m_t, base.fading.m,
                                               sigma_n2, config.ensemble_draws,
                                               config.ensemble_seed);
        Eigen::VectorXd per_stream = pf.rii2_mean;
        if (config.criterion == mimo::Criterion::kMmse) per_stream += pf.eta_mean;
        const double post = per_stream.mean() * ebn0_in;

        AnalyticConfig qam_cfg = base;
        qam_cfg.branches = l;
        qam_cfg.mean_snr = config.switches.rate_in_qam ? c * rc * post : c * post;
        const double pqam = avg_ber(qam_cfg, base.fading.rho > 0.0);

        const double ub = union_bound(base.spectrum, base, post).raw;

        double bracket = 1.0;
        if (config.switches.bracket) {
            bracket = 2.0 * std::pow(q, 2.0 * q) / std::pow(std::tgamma(q), 2.0) *
                      std::pow(post, diff) * std::exp(-q * post * post);
        }
        BerPoint pt;
        pt.ebn0_db = db;
        pt.raw = pqam * bracket * ub;
        if (!std::isfinite(pt.raw)) throw std::runtime_error("non-finite BER value");
        pt.clipped = clip01(pt.raw);
        curve.points.push_back(pt);
    }
    return curve;
}

}  // namespace rvlink::analytic
