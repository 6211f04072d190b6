#ifndef RVLINK_RCPC_HPP
#define RVLINK_RCPC_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "rvlink/convcode.hpp"

namespace rvlink::rcpc {

using convcode::GeneratorSpec;
using convcode::Poly;
using convcode::SoftBit;

/// Binary deletion pattern over one puncturing period: rows index the n
/// mother outputs, columns index time mod P_c; 1 = transmit, 0 = delete.
struct PuncturingMatrix {
    std::vector<std::vector<uint8_t>> rows;

    PuncturingMatrix() = default;
    explicit PuncturingMatrix(std::vector<std::vector<uint8_t>> rows_);

    int n() const { return static_cast<int>(rows.size()); }
    int period() const { return rows.empty() ? 0 : static_cast<int>(rows[0].size()); }
    int survivors_per_period() const;
    bool kept(int output, int time) const { return rows[output][time % period()] != 0; }

    static PuncturingMatrix all_ones(int n, int period);
};

/// Code rate of the punctured stream as a (numerator, denominator) pair:
/// P_c / (number of 1-entries), unreduced to match the paper's 2/4, 2/3 naming.
std::pair<int, int> code_rate(const PuncturingMatrix& m);

/// Ordered RCPC family, lowest rate (least punctured) first. Construction
/// validates rate compatibility: every transmitted position of a higher-rate
/// member must be transmitted by every lower-rate member.
struct RcpcFamily {
    GeneratorSpec mother;
    int period = 0;
    std::vector<PuncturingMatrix> matrices;

    RcpcFamily() = default;
    RcpcFamily(GeneratorSpec mother_, int period_, std::vector<PuncturingMatrix> matrices_);
};

/// Deletes the gated bits from a serialized codeword (per step t the n
/// outputs v_0..v_{n-1} in order). Requires whole periods.
std::vector<uint8_t> puncture(const PuncturingMatrix& m, const std::vector<uint8_t>& codeword);
std::vector<double> puncture(const PuncturingMatrix& m, const std::vector<double>& values);

/// Reinserts erasure marks at deleted positions; inverse of puncture on the
/// surviving positions.
std::vector<SoftBit> depuncture(const PuncturingMatrix& m, const std::vector<double>& metrics);

/// Splits a polynomial into its K decimated phases: G(D) = sum_j D^j P_j(D^K).
std::vector<Poly> polyphase_decompose(const Poly& poly, int blocking);

/// K-times blocked equivalent of a 1/n mother code: a K/nK code over the
/// decimated delay variable whose serialized output equals the mother's.
struct BlockedGenerator {
    int blocking = 1;
    GeneratorSpec mother;
    GeneratorSpec code;  // K inputs, nK outputs
};

BlockedGenerator blocked_generator(const GeneratorSpec& mother, int blocking);

/// Deletes blocked output columns per the puncturing matrix (column tau*n+j
/// is gated by entry (j, tau)), yielding the K/(P_c+delta) equivalent code.
/// The equivalent encoder is cross-checked against puncture(mother output)
/// on random inputs at construction; a catastrophic result is reported via
/// the `catastrophic` flag rather than an exception.
struct PuncturedEquivalent {
    GeneratorSpec code;
    bool catastrophic = false;
};

PuncturedEquivalent punctured_equivalent(const BlockedGenerator& blocked, const PuncturingMatrix& m);

}  // namespace rvlink::rcpc

#endif
