#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rvlink/analytic.hpp"

using namespace rvlink::analytic;
using rvlink::channel::FadingParams;
using rvlink::convcode::DistanceSpectrum;
using rvlink::modem::QamParams;

namespace {

AnalyticConfig base_config(double m, double rho, int branches, double mean_snr) {
    AnalyticConfig c;
    c.qam = QamParams::make(4);
    c.fading = FadingParams(m, rho);
    c.branches = branches;
    c.mean_snr = mean_snr;
    c.code_rate = 0.5;
    c.puncturing_period = 2;
    return c;
}

DistanceSpectrum mother_spectrum() {
    DistanceSpectrum sp;
    sp.d_free = 12;
    sp.d_max = 22;
    sp.c = {{12, 33}, {14, 281}, {16, 2179}, {18, 15035}, {20, 105166}, {22, 692330}};
    sp.a = sp.c;
    return sp;
}

}  // namespace

TEST_CASE("correlation factor endpoints and the worked value") {
    for (int l : {1, 2, 4, 8}) CHECK(corr_factor_r(l, 0.0) == doctest::Approx(l).epsilon(1e-15));
    CHECK(corr_factor_r(4, 0.8) == doctest::Approx(13.9976).epsilon(1e-4));
    // approaches the square of the branch count monotonically
    double prev = corr_factor_r(4, 0.0);
    for (double rho = 0.1; rho < 0.999; rho += 0.05) {
        double r = corr_factor_r(4, rho);
        CHECK(r > prev);
        prev = r;
    }
    CHECK(corr_factor_r(4, 0.9999999) == doctest::Approx(16.0).epsilon(1e-3));
    CHECK_THROWS(corr_factor_r(4, 1.0));
}

TEST_CASE("zero correlation reduces the correlated form to the independent product") {
    for (double m : {0.5, 1.0, 2.0})
        for (int l : {1, 2, 4})
            for (double snr : {0.01, 1.0, 25.0}) {
                auto cfg = base_config(m, 0.0, l, snr);
                double ind = avg_ber(cfg, false);
                double cor = avg_ber(cfg, true);
                CHECK(std::abs(ind - cor) <= 1e-12 * std::max(ind, 1e-300));
            }
}

TEST_CASE("unit-shape single-branch average matches a direct density integration") {
    // oracle: integrate the conditional error rate against the exponential
    // SNR density by an independent semi-infinite quadrature
    auto qam = QamParams::make(4);
    for (double gbar : {0.5, 2.0, 10.0}) {
        auto cfg = base_config(1.0, 0.0, 1, gbar);
        double got = avg_ber(cfg, false);
        auto kernel = [&](double t) {
            double gamma = t / (1.0 - t);
            double jac = 1.0 / ((1.0 - t) * (1.0 - t));
            double pdf = std::exp(-gamma / gbar) / gbar;
            return rvlink::modem::conditional_ber(qam, gamma) * pdf * jac;
        };
        rvlink::quad::Options opt;
        opt.rel_tol = 1e-11;
        double oracle = rvlink::quad::integrate(kernel, 1e-14, 1.0 - 1e-14, opt);
        CHECK(got == doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("zero mean SNR pins the known conditional value") {
    auto cfg = base_config(0.5, 0.0, 4, 0.0);
    CHECK(avg_ber(cfg, false) == doctest::Approx(0.375).epsilon(1e-12));
}

TEST_CASE("pairwise error terms agree across the two integration routes") {
    for (double m : {1.0, 0.5, 2.0})
        for (int d : {1, 3, 12})
            for (double ebn0 : {0.5, 4.0, 20.0}) {
                auto cfg = base_config(m, 0.0, 1, 0.0);
                double finite = p_d(d, cfg, ebn0);
                double direct = p_d_direct(d, cfg, ebn0);
                // the direct route integrates through a density singularity
                // when the gamma shape m*d drops below one, so its own
                // accuracy is the limiting factor away from m = 1
                double tol = (m == 1.0) ? 1e-8 : 1e-6;
                CHECK(finite == doctest::Approx(direct).epsilon(tol));
            }
}

TEST_CASE("pairwise error decreases in event weight and in SNR") {
    auto cfg = base_config(0.75, 0.0, 1, 0.0);
    double prev = 1.0;
    for (int d = 12; d <= 18; ++d) {
        double v = p_d(d, cfg, 3.0);
        CHECK(v < prev);
        prev = v;
    }
    prev = 1.0;
    for (double e = 0.5; e <= 16.0; e *= 2.0) {
        double v = p_d(12, cfg, e);
        CHECK(v < prev);
        prev = v;
    }
    // tail limit
    CHECK(p_d(12, cfg, 1e9) < 1e-30);
}

TEST_CASE("single-term bound bookkeeping") {
    DistanceSpectrum sp;
    sp.d_free = 5;
    sp.d_max = 5;
    sp.a = {{5, 1}};
    sp.c = {{5, 1}};
    auto cfg = base_config(1.0, 0.0, 1, 0.0);
    auto res = union_bound(sp, cfg, 2.0);
    CHECK(res.raw == doctest::Approx(p_d(5, cfg, 2.0) / 2.0).epsilon(1e-12));
    CHECK(res.tail_ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bound is dominated by the leading term at high SNR") {
    auto cfg = base_config(1.0, 0.0, 1, 0.0);
    auto sp = mother_spectrum();
    double e = std::pow(10.0, 1.2);  // 12 dB
    double lead = 33.0 * p_d(12, cfg, e);
    double next = 281.0 * p_d(14, cfg, e);
    CHECK(next / lead < 0.10);
}

TEST_CASE("doubling the truncation depth barely moves the bound at high SNR") {
    auto cfg = base_config(1.0, 0.0, 1, 0.0);
    auto sp15 = mother_spectrum();
    // extend with the next terms of the same spectrum
    auto sp30 = sp15;
    sp30.d_max = 24;
    sp30.c[24] = 4580007;
    sp30.a[24] = 4580007;
    double e = std::pow(10.0, 0.8);  // 8 dB
    double b1 = union_bound(sp15, cfg, e).raw;
    double b2 = union_bound(sp30, cfg, e).raw;
    CHECK(std::abs(b2 - b1) / b1 < 0.01);
}

TEST_CASE("system curves are monotone and criterion-ordered") {
    SystemConfig sc;
    sc.base = base_config(0.5, 0.0, 1, 0.0);
    sc.base.spectrum = mother_spectrum();
    for (double db = 0.0; db <= 20.0; db += 1.0) sc.base.grid_db.push_back(db);
    sc.ensemble_draws = 500;
    sc.criterion = rvlink::mimo::Criterion::kZf;
    auto zf = system_ber(sc);
    sc.criterion = rvlink::mimo::Criterion::kMmse;
    auto mmse = system_ber(sc);
    REQUIRE(zf.points.size() == mmse.points.size());
    double prev = 1e300;
    for (size_t i = 0; i < zf.points.size(); ++i) {
        CHECK(std::isfinite(zf.points[i].raw));
        CHECK(zf.points[i].raw <= prev * (1.0 + 1e-12));
        prev = zf.points[i].raw;
        CHECK(mmse.points[i].raw <= zf.points[i].raw * (1.0 + 1e-12));
        CHECK(zf.points[i].clipped <= 1.0);
        CHECK(zf.points[i].clipped >= 0.0);
    }
}

TEST_CASE("the punctured rate curve sits above the mother rate curve") {
    DistanceSpectrum punctured;
    punctured.d_free = 7;
    punctured.d_max = 17;
    punctured.c = {{7, 11}, {8, 46}, {9, 324}, {10, 1594}, {11, 6425}, {12, 29069},
                   {13, 127923}, {14, 544616}, {15, 2313272}, {16, 9721227}, {17, 40485983}};
    punctured.a = punctured.c;

    SystemConfig lo;
    lo.base = base_config(0.5, 0.0, 1, 0.0);
    lo.base.spectrum = mother_spectrum();
    for (double db = 2.0; db <= 20.0; db += 1.0) lo.base.grid_db.push_back(db);
    lo.ensemble_draws = 500;
    auto mother_curve = system_ber(lo);

    SystemConfig hi = lo;
    hi.base.code_rate = 2.0 / 3.0;
    hi.base.spectrum = punctured;
    auto punct_curve = system_ber(hi);
    for (size_t i = 0; i < mother_curve.points.size(); ++i)
        CHECK(punct_curve.points[i].raw >= mother_curve.points[i].raw * (1.0 - 1e-9));
}

TEST_CASE("configuration validation") {
    auto cfg = base_config(1.0, 0.0, 1, 0.0);
    cfg.grid_db = {0.0, 0.0};
    CHECK_THROWS(cfg.validate());
    cfg.grid_db = {0.0, 1.0};
    cfg.branches = 0;
    CHECK_THROWS(cfg.validate());
}
