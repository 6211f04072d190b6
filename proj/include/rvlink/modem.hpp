#ifndef RVLINK_MODEM_HPP
#define RVLINK_MODEM_HPP

#include <complex>
#include <cstdint>
#include <vector>

namespace rvlink::modem {

using cplx = std::complex<double>;

/// Square M-QAM constants. Unit average symbol energy; Gray mapping per axis.
struct QamParams {
    int m_ary = 4;              // constellation size, power of 4
    int bits_per_symbol = 2;    // c = log2 M
    double g = 0.5;             // 3 / (2(M-1))
    double symbol_energy = 1.0; // E_s
    double d_min = 0.0;         // minimum inter-point distance, D_min^2 = 6 E_s/(M-1)

    static QamParams make(int m_ary);
};

std::vector<cplx> modulate(const QamParams& p, const std::vector<uint8_t>& bits);
std::vector<uint8_t> demodulate(const QamParams& p, const std::vector<cplx>& symbols);

/// Nearest constellation point (hard slicer).
cplx slice(const QamParams& p, cplx y);

/// Per-bit antipodal soft metrics (max-log), scaled so the sign carries the
/// hard decision; exact for the Gray mapping's axis decomposition on M = 4.
std::vector<double> soft_bits(const QamParams& p, const std::vector<cplx>& symbols);

/// Gain-weighted conjugate combining; combined SNR is the sum of branch SNRs.
cplx mrc_combine(const std::vector<cplx>& branch_symbols, const std::vector<cplx>& branch_gains);

/// Conditional M-QAM bit error rate at post-processing SNR per bit `gamma`,
/// evaluated through the finite-interval Q-function forms.
double conditional_ber(const QamParams& p, double gamma);

}  // namespace rvlink::modem

#endif
