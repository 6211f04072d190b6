#ifndef RVLINK_CONVCODE_HPP
#define RVLINK_CONVCODE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rvlink::convcode {

/// Binary polynomial in the encoder delay variable; coeffs[t] multiplies D^t
/// (t = 0 is the current input tap).
using Poly = std::vector<uint8_t>;

/// Parses an octal generator string with the most-significant bit as the
/// current-input tap, so "7" = 1 + D + D^2 and "657" has degree 8.
Poly poly_from_octal(const std::string& octal);

std::string poly_to_octal(const Poly& p);

int poly_degree(const Poly& p);

/// A k/n convolutional code given by k*n generator polynomials.
/// polys[i][j] connects input i to output j. Each input i has its own shift
/// register of length max_j deg(polys[i][j]); total memory is their sum.
struct GeneratorSpec {
    int k = 1;
    int n = 2;
    std::vector<std::vector<Poly>> polys;  // k rows of n polynomials

    GeneratorSpec() = default;
    GeneratorSpec(int k_, int n_, std::vector<std::vector<Poly>> polys_);

    int input_memory(int i) const;  // register length of input i
    int total_memory() const;
    int flush_steps() const;  // steps of zero input required to return to state 0

    /// Rate-1/n convenience constructor from octal strings.
    static GeneratorSpec rate_1n_octal(const std::vector<std::string>& octal);
};

/// State-transition table: 2^memory states, 2^k inputs per state.
struct Trellis {
    struct Edge {
        uint32_t next;
        uint32_t output;  // n output bits, MSB = first output
        uint8_t input_weight;
    };
    int k = 0, n = 0;
    uint32_t num_states = 0;
    std::vector<Edge> edges;  // indexed [state * 2^k + input]

    const Edge& edge(uint32_t state, uint32_t input) const {
        return edges[(static_cast<size_t>(state) << k) + input];
    }
};

Trellis build_trellis(const GeneratorSpec& code);

/// Soft channel value for one coded bit. Erased positions contribute zero to
/// every branch metric.
struct SoftBit {
    double value = 0.0;
    bool erased = false;
};

/// Encodes `bits` (length divisible by k) and appends the zero-tail flush.
/// Output length is n * (bits.size()/k + flush_steps()).
std::vector<uint8_t> encode(const GeneratorSpec& code, const std::vector<uint8_t>& bits);

/// Soft-decision Viterbi decoding over the correlation metric: a transmitted
/// 1-bit scores +value, a 0-bit scores -value, erasures score 0. The decoded
/// path must terminate in the zero state (zero-tail convention); ties are
/// broken toward the lexicographically smaller surviving predecessor state.
std::vector<uint8_t> viterbi_decode(const GeneratorSpec& code, const std::vector<SoftBit>& metrics);

std::vector<SoftBit> to_soft(const std::vector<double>& values);

/// Hard bits to antipodal soft metrics (1 -> +1, 0 -> -1).
std::vector<SoftBit> hard_to_soft(const std::vector<uint8_t>& bits);

/// d_free plus the truncated weight spectrum of first-return error events.
/// a[d] counts paths of output weight d leaving the zero state and first
/// returning to it; c[d] sums their input Hamming weights.
struct DistanceSpectrum {
    int d_free = 0;
    int d_max = 0;
    std::map<int, uint64_t> a;
    std::map<int, uint64_t> c;
};

/// Exact bounded-weight enumeration of first-return paths. len_cap = 0 picks
/// an automatic cap; the result is certified (the path frontier must be
/// exhausted below the cap), otherwise a certification error is thrown.
DistanceSpectrum distance_spectrum(const GeneratorSpec& code, int d_max, long len_cap = 0);

/// True iff the state graph has a zero-output-weight cycle off the
/// zero-state/zero-input self-loop (equivalently, nonzero input weight).
bool is_catastrophic(const GeneratorSpec& code);

}  // namespace rvlink::convcode

#endif
