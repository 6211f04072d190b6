#include "rvlink/modem.hpp"

#include <cmath>
#include <stdexcept>

#include "rvlink/quadrature.hpp"

namespace rvlink::modem {

namespace {

int isqrt_exact(int v) {
    int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(v))));
    return r * r == v ? r : -1;
}

uint32_t to_gray(uint32_t x) { return x ^ (x >> 1); }

uint32_t from_gray(uint32_t g) {
    uint32_t x = 0;
    for (; g; g >>= 1) x ^= g;
    return x;
}

// amplitude scaling for unit average symbol energy: levels are odd integers
// +-1, +-3, ... scaled by sqrt(3 / (2(M-1)))
double axis_scale(int m_ary) { return std::sqrt(3.0 / (2.0 * (m_ary - 1))); }

}  // namespace

QamParams QamParams::make(int m_ary) {
    int c = 0;
    for (int v = m_ary; v > 1; v >>= 2) {
        if (v % 4 != 0) throw std::invalid_argument("M must be a power of 4");
        c += 2;
    }
    if (m_ary < 4) throw std::invalid_argument("M must be >= 4");
    QamParams p;
    p.m_ary = m_ary;
    p.bits_per_symbol = c;
    p.g = 3.0 / (2.0 * (m_ary - 1));
    p.symbol_energy = 1.0;
    p.d_min = std::sqrt(6.0 * p.symbol_energy / (m_ary - 1));
    return p;
}

namespace {

double level_for_bits(const QamParams& p, uint32_t bits, int axis_bits) {
    uint32_t l = from_gray(bits);
    int levels = 1 << axis_bits;
    return (2.0 * static_cast<double>(l) - (levels - 1)) * axis_scale(p.m_ary);
}

uint32_t bits_for_level(const QamParams& p, double y, int axis_bits) {
    int levels = 1 << axis_bits;
    double x = y / axis_scale(p.m_ary);
    int l = static_cast<int>(std::lround((x + (levels - 1)) / 2.0));
    l = std::max(0, std::min(levels - 1, l));
    return to_gray(static_cast<uint32_t>(l));
}

}  // namespace

std::vector<cplx> modulate(const QamParams& p, const std::vector<uint8_t>& bits) {
    const int c = p.bits_per_symbol;
    if (bits.size() % static_cast<size_t>(c) != 0)
        throw std::invalid_argument("bit count not a multiple of bits per symbol");
    const int half = c / 2;
    std::vector<cplx> out;
    out.reserve(bits.size() / c);
    for (size_t s = 0; s < bits.size() / c; ++s) {
        uint32_t bi = 0, bq = 0;
        for (int i = 0; i < half; ++i) bi = (bi << 1) | (bits[s * c + i] & 1u);
        for (int i = 0; i < half; ++i) bq = (bq << 1) | (bits[s * c + half + i] & 1u);
        out.emplace_back(level_for_bits(p, bi, half), level_for_bits(p, bq, half));
    }
    return out;
}

std::vector<uint8_t> demodulate(const QamParams& p, const std::vector<cplx>& symbols) {
    const int c = p.bits_per_symbol;
    const int half = c / 2;
    std::vector<uint8_t> out;
    out.reserve(symbols.size() * c);
    for (cplx y : symbols) {
        uint32_t bi = bits_for_level(p, y.real(), half);
        uint32_t bq = bits_for_level(p, y.imag(), half);
        for (int i = half - 1; i >= 0; --i) out.push_back(static_cast<uint8_t>((bi >> i) & 1u));
        for (int i = half - 1; i >= 0; --i) out.push_back(static_cast<uint8_t>((bq >> i) & 1u));
    }
    return out;
}

cplx slice(const QamParams& p, cplx y) {
    const int half = p.bits_per_symbol / 2;
    uint32_t bi = bits_for_level(p, y.real(), half);
    uint32_t bq = bits_for_level(p, y.imag(), half);
    return {level_for_bits(p, bi, half), level_for_bits(p, bq, half)};
}

std::vector<double> soft_bits(const QamParams& p, const std::vector<cplx>& symbols) {
    const int half = p.bits_per_symbol / 2;
    const int levels = 1 << half;
    std::vector<double> out;
    out.reserve(symbols.size() * p.bits_per_symbol);
    auto axis_metrics = [&](double y, std::vector<double>& dst) {
        // max-log per bit: (min dist^2 | bit=0) - (min dist^2 | bit=1), over 4
        for (int bit = half - 1; bit >= 0; --bit) {
            double best0 = 1e300, best1 = 1e300;
            for (int l = 0; l < levels; ++l) {
                uint32_t g = to_gray(static_cast<uint32_t>(l));
                double x = (2.0 * l - (levels - 1)) * axis_scale(p.m_ary);
                double d2 = (y - x) * (y - x);
                if ((g >> bit) & 1u)
                    best1 = std::min(best1, d2);
                else
                    best0 = std::min(best0, d2);
            }
            dst.push_back((best0 - best1) / 4.0);
        }
    };
    for (cplx y : symbols) {
        axis_metrics(y.real(), out);
        axis_metrics(y.imag(), out);
    }
    return out;
}

cplx mrc_combine(const std::vector<cplx>& branch_symbols, const std::vector<cplx>& branch_gains) {
    if (branch_symbols.size() != branch_gains.size())
        throw std::invalid_argument("branch count mismatch");
    cplx acc{0.0, 0.0};
    for (size_t i = 0; i < branch_symbols.size(); ++i)
        acc += std::conj(branch_gains[i]) * branch_symbols[i];
    return acc;
}

double conditional_ber(const QamParams& p, double gamma) {
    if (gamma < 0) throw std::invalid_argument("negative SNR");
    const double x = std::sqrt(2.0 * p.g * gamma);
    const double b1 = (4.0 / p.bits_per_symbol) * (1.0 - 1.0 / std::sqrt(p.m_ary));
    const double b2 = b1 * (1.0 - 1.0 / std::sqrt(p.m_ary));
    double v = b1 * quad::qfunc_integral(x) - b2 * quad::qfunc2_integral(x);
    return std::max(0.0, std::min(1.0, v));
}

}  // namespace rvlink::modem
