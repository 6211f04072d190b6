#include "rvlink/convcode.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace rvlink::convcode {

Poly poly_from_octal(const std::string& octal) {
    if (octal.empty()) throw std::invalid_argument("empty octal generator");
    unsigned long long v = 0;
    for (char ch : octal) {
        if (ch < '0' || ch > '7') throw std::invalid_argument("bad octal digit in generator: " + octal);
        v = v * 8 + static_cast<unsigned>(ch - '0');
    }
    if (v == 0) return {0};
    int nbits = std::bit_width(v);
    Poly p(nbits);
    // MSB is the current-input tap (delay 0).
    for (int t = 0; t < nbits; ++t) p[t] = static_cast<uint8_t>((v >> (nbits - 1 - t)) & 1u);
    return p;
}

std::string poly_to_octal(const Poly& p) {
    unsigned long long v = 0;
    for (uint8_t c : p) v = (v << 1) | (c & 1u);
    std::string s;
    if (v == 0) return "0";
    while (v) {
        s.insert(s.begin(), static_cast<char>('0' + (v & 7u)));
        v >>= 3;
    }
    return s;
}

int poly_degree(const Poly& p) {
    for (int t = static_cast<int>(p.size()) - 1; t >= 0; --t)
        if (p[t]) return t;
    return 0;
}

GeneratorSpec::GeneratorSpec(int k_, int n_, std::vector<std::vector<Poly>> polys_)
    : k(k_), n(n_), polys(std::move(polys_)) {
    if (k < 1 || n <= k) throw std::invalid_argument("require 1 <= k < n");
    if (static_cast<int>(polys.size()) != k) throw std::invalid_argument("polys must have k rows");
    for (const auto& row : polys)
        if (static_cast<int>(row.size()) != n) throw std::invalid_argument("each polys row must have n entries");
    for (int j = 0; j < n; ++j) {
        bool any = false;
        for (int i = 0; i < k; ++i)
            for (uint8_t c : polys[i][j]) any = any || c;
        if (!any) throw std::invalid_argument("output position with no nonzero polynomial");
    }
}

int GeneratorSpec::input_memory(int i) const {
    int m = 0;
    for (const auto& p : polys[i]) m = std::max(m, poly_degree(p));
    return m;
}

int GeneratorSpec::total_memory() const {
    int m = 0;
    for (int i = 0; i < k; ++i) m += input_memory(i);
    return m;
}

int GeneratorSpec::flush_steps() const {
    int m = 0;
    for (int i = 0; i < k; ++i) m = std::max(m, input_memory(i));
    return m;
}

GeneratorSpec GeneratorSpec::rate_1n_octal(const std::vector<std::string>& octal) {
    std::vector<Poly> row;
    row.reserve(octal.size());
    for (const auto& s : octal) row.push_back(poly_from_octal(s));
    return GeneratorSpec(1, static_cast<int>(octal.size()), {row});
}

Trellis build_trellis(const GeneratorSpec& code) {
    Trellis t;
    t.k = code.k;
    t.n = code.n;
    std::vector<int> mems(code.k);
    int total = 0;
    for (int i = 0; i < code.k; ++i) {
        mems[i] = code.input_memory(i);
        total += mems[i];
    }
    if (total > 24) throw std::invalid_argument("trellis too large (memory > 24)");
    t.num_states = 1u << total;
    const uint32_t ninputs = 1u << code.k;
    t.edges.resize(static_cast<size_t>(t.num_states) * ninputs);
    for (uint32_t s = 0; s < t.num_states; ++s) {
        for (uint32_t u = 0; u < ninputs; ++u) {
            uint32_t out = 0;
            uint32_t ns = 0;
            int off = 0;
            // per-output bit: XOR of tapped current/past inputs
            for (int j = 0; j < code.n; ++j) {
                int bit = 0;
                off = 0;
                for (int i = 0; i < code.k; ++i) {
                    const Poly& p = code.polys[i][j];
                    for (int tt = 0; tt < static_cast<int>(p.size()); ++tt) {
                        if (!p[tt]) continue;
                        int b = (tt == 0) ? static_cast<int>((u >> i) & 1u)
                                          : static_cast<int>((s >> (off + tt - 1)) & 1u);
                        bit ^= b;
                    }
                    off += mems[i];
                }
                out = (out << 1) | static_cast<uint32_t>(bit);
            }
            off = 0;
            for (int i = 0; i < code.k; ++i) {
                if (mems[i] > 0) {
                    uint32_t reg = (s >> off) & ((1u << mems[i]) - 1u);
                    reg = ((reg << 1) | ((u >> i) & 1u)) & ((1u << mems[i]) - 1u);
                    ns |= reg << off;
                }
                off += mems[i];
            }
            t.edges[(static_cast<size_t>(s) << code.k) + u] =
                Trellis::Edge{ns, out, static_cast<uint8_t>(std::popcount(u))};
        }
    }
    return t;
}

std::vector<uint8_t> encode(const GeneratorSpec& code, const std::vector<uint8_t>& bits) {
    if (bits.size() % static_cast<size_t>(code.k) != 0)
        throw std::invalid_argument("input length not a multiple of k");
    Trellis t = build_trellis(code);
    uint32_t s = 0;
    const size_t steps = bits.size() / code.k + static_cast<size_t>(code.flush_steps());
    std::vector<uint8_t> out;
    out.reserve(steps * code.n);
    for (size_t step = 0; step < steps; ++step) {
        uint32_t u = 0;
        if (step < bits.size() / code.k)
            for (int i = 0; i < code.k; ++i) u |= static_cast<uint32_t>(bits[step * code.k + i] & 1u) << i;
        const auto& e = t.edge(s, u);
        for (int j = code.n - 1; j >= 0; --j) out.push_back(static_cast<uint8_t>((e.output >> j) & 1u));
        s = e.next;
    }
    return out;
}

std::vector<SoftBit> to_soft(const std::vector<double>& values) {
    std::vector<SoftBit> out(values.size());
    for (size_t i = 0; i < values.size(); ++i) out[i] = SoftBit{values[i], false};
    return out;
}

std::vector<SoftBit> hard_to_soft(const std::vector<uint8_t>& bits) {
    std::vector<SoftBit> out(bits.size());
    for (size_t i = 0; i < bits.size(); ++i) out[i] = SoftBit{bits[i] ? 1.0 : -1.0, false};
    return out;
}

std::vector<uint8_t> viterbi_decode(const GeneratorSpec& code, const std::vector<SoftBit>& metrics) {
    Trellis t = build_trellis(code);
    if (metrics.size() % static_cast<size_t>(code.n) != 0)
        throw std::invalid_argument("metric length not a multiple of n");
    const size_t steps = metrics.size() / code.n;
    const size_t flush = static_cast<size_t>(code.flush_steps());
    if (steps < flush) throw std::invalid_argument("metric sequence shorter than the flush tail");
    const uint32_t ninputs = 1u << code.k;
    constexpr double kNeg = -std::numeric_limits<double>::infinity();

    std::vector<double> metric(t.num_states, kNeg);
    metric[0] = 0.0;
    std::vector<double> next(t.num_states);
    // survivor per (step, state): predecessor state and input, packed
    std::vector<std::vector<uint32_t>> surv(steps, std::vector<uint32_t>(t.num_states, 0));

    for (size_t step = 0; step < steps; ++step) {
        std::fill(next.begin(), next.end(), kNeg);
        // increasing predecessor-state order + strict improvement implements
        // the smaller-predecessor tie-break
        for (uint32_t s = 0; s < t.num_states; ++s) {
            if (metric[s] == kNeg) continue;
            for (uint32_t u = 0; u < ninputs; ++u) {
                const auto& e = t.edge(s, u);
                double bm = 0.0;
                for (int j = 0; j < code.n; ++j) {
                    const SoftBit& sb = metrics[step * code.n + j];
                    if (sb.erased) continue;
                    bm += ((e.output >> (code.n - 1 - j)) & 1u) ? sb.value : -sb.value;
                }
                double cand = metric[s] + bm;
                if (cand > next[e.next]) {
                    next[e.next] = cand;
                    surv[step][e.next] = (s << code.k) | u;
                }
            }
        }
        metric.swap(next);
    }
    if (metric[0] == kNeg) throw std::runtime_error("no terminating path in the zero state");

    std::vector<uint8_t> info((steps - flush) * code.k);
    uint32_t s = 0;
    for (size_t step = steps; step-- > 0;) {
        uint32_t packed = surv[step][s];
        uint32_t u = packed & (ninputs - 1u);
        if (step < steps - flush)
            for (int i = 0; i < code.k; ++i) info[step * code.k + i] = static_cast<uint8_t>((u >> i) & 1u);
        s = packed >> code.k;
    }
    return info;
}

DistanceSpectrum distance_spectrum(const GeneratorSpec& code, int d_max, long len_cap) {
    if (d_max < 1) throw std::invalid_argument("d_max must be >= 1");
    if (is_catastrophic(code))
        throw std::invalid_argument("catastrophic code: distance spectrum is unbounded");
    Trellis t = build_trellis(code);
    const uint32_t ninputs = 1u << code.k;
    if (len_cap <= 0) len_cap = static_cast<long>(d_max + 2) * t.num_states + 16;

    struct Acc {
        uint64_t paths = 0;
        uint64_t input_weight = 0;
    };
    DistanceSpectrum sp;
    sp.d_max = d_max;
    std::vector<uint64_t> a(static_cast<size_t>(d_max) + 1, 0), c(static_cast<size_t>(d_max) + 1, 0);

    // frontier over (state, accumulated weight); state 0 entries are folded into a/c
    auto key = [&](uint32_t s, int w) { return static_cast<uint64_t>(s) * (d_max + 1) + w; };
    std::unordered_map<uint64_t, Acc> cur;
    for (uint32_t u = 1; u < ninputs; ++u) {
        const auto& e = t.edge(0, u);
        int w = std::popcount(e.output);
        if (w > d_max) continue;
        if (e.next == 0) {
            if (w == 0) throw std::invalid_argument("catastrophic code");
            a[w] += 1;
            c[w] += e.input_weight;
        } else {
            Acc& acc = cur[key(e.next, w)];
            acc.paths += 1;
            acc.input_weight += e.input_weight;
        }
    }
    long step = 0;
    std::unordered_map<uint64_t, Acc> nxt;
    while (!cur.empty()) {
        if (++step > len_cap)
            throw std::runtime_error("distance_spectrum: len_cap certification failed");
        nxt.clear();
        for (const auto& [k2, acc] : cur) {
            uint32_t s = static_cast<uint32_t>(k2 / (d_max + 1));
            int w = static_cast<int>(k2 % (d_max + 1));
            for (uint32_t u = 0; u < ninputs; ++u) {
                const auto& e = t.edge(s, u);
                int nw = w + std::popcount(e.output);
                if (nw > d_max) continue;
                if (e.next == 0) {
                    a[nw] += acc.paths;
                    c[nw] += acc.input_weight + acc.paths * e.input_weight;
                } else {
                    Acc& nacc = nxt[key(e.next, nw)];
                    nacc.paths += acc.paths;
                    nacc.input_weight += acc.input_weight + acc.paths * e.input_weight;
                }
            }
        }
        cur.swap(nxt);
    }
    for (int d = 1; d <= d_max; ++d) {
        if (a[d]) {
            if (sp.d_free == 0) sp.d_free = d;
            sp.a[d] = a[d];
            sp.c[d] = c[d];
        }
    }
    if (sp.d_free == 0) throw std::runtime_error("distance_spectrum: no path with weight <= d_max");
    return sp;
}

bool is_catastrophic(const GeneratorSpec& code) {
    Trellis t = build_trellis(code);
    const uint32_t ninputs = 1u << code.k;
    // Cycle search on the zero-output-weight subgraph, excluding the benign
    // zero-state/zero-input self-loop. The zero-input path from any nonzero
    // state drains toward zero, so any remaining cycle carries input weight.
    // A cycle exists iff iterated removal of dead-end states leaves the
    // subgraph non-empty.
    std::vector<std::vector<uint32_t>> adj(t.num_states);
    for (uint32_t s = 0; s < t.num_states; ++s) {
        for (uint32_t u = 0; u < ninputs; ++u) {
            if (s == 0 && u == 0) continue;
            const auto& e = t.edge(s, u);
            if (std::popcount(e.output) == 0) adj[s].push_back(e.next);
        }
    }
    std::vector<char> alive(t.num_states, 1);
    bool changed = true;
    while (changed) {
        changed = false;
        for (uint32_t s = 0; s < t.num_states; ++s) {
            if (!alive[s]) continue;
            bool has_out = false;
            for (uint32_t n2 : adj[s])
                if (alive[n2]) { has_out = true; break; }
            if (!has_out) {
                alive[s] = 0;
                changed = true;
            }
        }
    }
    for (uint32_t s = 0; s < t.num_states; ++s)
        if (alive[s]) return true;
    return false;
}

}  // namespace rvlink::convcode
