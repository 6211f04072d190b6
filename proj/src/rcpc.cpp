#include "rvlink/rcpc.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace rvlink::rcpc {

PuncturingMatrix::PuncturingMatrix(std::vector<std::vector<uint8_t>> rows_) : rows(std::move(rows_)) {
    if (rows.empty() || rows[0].empty()) throw std::invalid_argument("puncturing matrix must be non-empty");
    for (const auto& r : rows)
        if (r.size() != rows[0].size()) throw std::invalid_argument("ragged puncturing matrix");
    if (survivors_per_period() == 0) throw std::invalid_argument("puncturing matrix deletes everything");
}

int PuncturingMatrix::survivors_per_period() const {
    int s = 0;
    for (const auto& r : rows)
        for (uint8_t v : r) s += (v != 0);
    return s;
}

PuncturingMatrix PuncturingMatrix::all_ones(int n, int period) {
    return PuncturingMatrix(std::vector<std::vector<uint8_t>>(n, std::vector<uint8_t>(period, 1)));
}

std::pair<int, int> code_rate(const PuncturingMatrix& m) {
    return {m.period(), m.survivors_per_period()};
}

RcpcFamily::RcpcFamily(GeneratorSpec mother_, int period_, std::vector<PuncturingMatrix> matrices_)
    : mother(std::move(mother_)), period(period_), matrices(std::move(matrices_)) {
    for (const auto& m : matrices) {
        if (m.n() != mother.n || m.period() != period)
            throw std::invalid_argument("puncturing matrix dimensions do not match the family");
    }
    // lower-rate members must transmit everything a higher-rate member transmits
    for (size_t lo = 0; lo < matrices.size(); ++lo) {
        for (size_t hi = lo + 1; hi < matrices.size(); ++hi) {
            for (int r = 0; r < matrices[lo].n(); ++r)
                for (int c = 0; c < period; ++c)
                    if (matrices[hi].rows[r][c] && !matrices[lo].rows[r][c])
                        throw std::invalid_argument("family is not rate-compatible");
        }
    }
}

namespace {

template <typename T>
std::vector<T> puncture_impl(const PuncturingMatrix& m, const std::vector<T>& x) {
    const int n = m.n();
    const size_t period_bits = static_cast<size_t>(n) * m.period();
    if (x.size() % period_bits != 0)
        throw std::invalid_argument("codeword does not cover whole puncturing periods");
    std::vector<T> out;
    out.reserve(x.size() / period_bits * m.survivors_per_period());
    for (size_t t = 0; t < x.size() / n; ++t)
        for (int j = 0; j < n; ++j)
            if (m.kept(j, static_cast<int>(t))) out.push_back(x[t * n + j]);
    return out;
}

}  // namespace

std::vector<uint8_t> puncture(const PuncturingMatrix& m, const std::vector<uint8_t>& codeword) {
    return puncture_impl(m, codeword);
}

std::vector<double> puncture(const PuncturingMatrix& m, const std::vector<double>& values) {
    return puncture_impl(m, values);
}

std::vector<SoftBit> depuncture(const PuncturingMatrix& m, const std::vector<double>& metrics) {
    const int per_period = m.survivors_per_period();
    if (metrics.size() % static_cast<size_t>(per_period) != 0)
        throw std::invalid_argument("metric count does not cover whole puncturing periods");
    const size_t periods = metrics.size() / per_period;
    const int n = m.n();
    std::vector<SoftBit> out;
    out.reserve(periods * n * m.period());
    size_t idx = 0;
    for (size_t p = 0; p < periods; ++p) {
        for (int c = 0; c < m.period(); ++c)
            for (int j = 0; j < n; ++j) {
                if (m.rows[j][c])
                    out.push_back(SoftBit{metrics[idx++], false});
                else
                    out.push_back(SoftBit{0.0, true});
            }
    }
    return out;
}

std::vector<Poly> polyphase_decompose(const Poly& poly, int blocking) {
    if (blocking < 1) throw std::invalid_argument("blocking factor must be >= 1");
    std::vector<Poly> phases(blocking, Poly{0});
    for (size_t t = 0; t < poly.size(); ++t) {
        if (!poly[t]) continue;
        size_t j = t % blocking, q = t / blocking;
        if (phases[j].size() <= q) phases[j].resize(q + 1, 0);
        phases[j][q] = 1;
    }
    return phases;
}

namespace {

Poly shift(const Poly& p, int by) {
    Poly out(p.size() + by, 0);
    std::copy(p.begin(), p.end(), out.begin() + by);
    return out;
}

}  // namespace

BlockedGenerator blocked_generator(const GeneratorSpec& mother, int blocking) {
    if (mother.k != 1) throw std::invalid_argument("blocking requires a 1/n mother code");
    const int K = blocking;
    const int n = mother.n;
    // phases[j][i] = P_{j,i}: phase i of mother output polynomial j
    std::vector<std::vector<Poly>> phases(n);
    for (int j = 0; j < n; ++j) phases[j] = polyphase_decompose(mother.polys[0][j], K);

    // Mat is K x n with Mat[r][j] = P_{j, K-1-r}; Z cycles rows upward and
    // multiplies the wrapped row by the blocked delay. G' = [Z^{K-1} Mat | ... | Mat].
    auto mat = [&](int r, int j) { return phases[j][K - 1 - r]; };
    std::vector<std::vector<Poly>> grid(K, std::vector<Poly>(static_cast<size_t>(n) * K));
    for (int power = K - 1, block = 0; power >= 0; --power, ++block) {
        std::vector<std::vector<Poly>> m(K, std::vector<Poly>(n));
        for (int r = 0; r < K; ++r)
            for (int j = 0; j < n; ++j) m[r][j] = mat(r, j);
        for (int p = 0; p < power; ++p) {
            std::vector<std::vector<Poly>> nm(K, std::vector<Poly>(n));
            for (int r = 0; r + 1 < K; ++r) nm[r] = m[r + 1];
            for (int j = 0; j < n; ++j) nm[K - 1][j] = shift(m[0][j], 1);
            m.swap(nm);
        }
        for (int r = 0; r < K; ++r)
            for (int j = 0; j < n; ++j) grid[r][static_cast<size_t>(block) * n + j] = m[r][j];
    }
    BlockedGenerator out;
    out.blocking = K;
    out.mother = mother;
    out.code = GeneratorSpec(K, n * K, grid);

    // construction-time equivalence check against the mother encoder
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    for (int trial = 0; trial < 8; ++trial) {
        std::vector<uint8_t> bits(static_cast<size_t>(K) * 12);
        for (auto& b : bits) b = static_cast<uint8_t>(rng() & 1u);
        auto a = convcode::encode(mother, bits);
        auto b = convcode::encode(out.code, bits);
        size_t common = std::min(a.size(), b.size());
        if (!std::equal(a.begin(), a.begin() + common, b.begin()))
            throw std::logic_error("blocked generator does not reproduce the mother encoder");
    }
    return out;
}

PuncturedEquivalent punctured_equivalent(const BlockedGenerator& blocked, const PuncturingMatrix& m) {
    const int K = blocked.blocking;
    const int n = blocked.mother.n;
    if (m.n() != n || m.period() != K)
        throw std::invalid_argument("puncturing matrix does not match the blocked code's layout");
    std::vector<int> keep;
    for (int tau = 0; tau < K; ++tau)
        for (int j = 0; j < n; ++j)
            if (m.rows[j][tau]) keep.push_back(tau * n + j);
    if (static_cast<int>(keep.size()) <= K)
        throw std::invalid_argument("puncturing leaves no redundancy to form a valid code");

    std::vector<std::vector<Poly>> grid(K, std::vector<Poly>(keep.size()));
    for (int r = 0; r < K; ++r)
        for (size_t c = 0; c < keep.size(); ++c) grid[r][c] = blocked.code.polys[r][keep[c]];

    PuncturedEquivalent out;
    out.code = GeneratorSpec(K, static_cast<int>(keep.size()), grid);

    // mandatory cross-check: equivalent output == puncture(mother output)
    std::mt19937_64 rng(0xda942042e4dd58b5ull);
    for (int trial = 0; trial < 8; ++trial) {
        std::vector<uint8_t> bits(static_cast<size_t>(K) * 12);
        for (auto& b : bits) b = static_cast<uint8_t>(rng() & 1u);
        auto punctured = puncture(m, convcode::encode(blocked.mother, bits));
        auto direct = convcode::encode(out.code, bits);
        size_t common = std::min(punctured.size(), direct.size());
        if (!std::equal(punctured.begin(), punctured.begin() + common, direct.begin()))
            throw std::logic_error("punctured equivalent does not reproduce the punctured mother stream");
    }
    out.catastrophic = convcode::is_catastrophic(out.code);
    return out;
}

}  // namespace rvlink::rcpc
