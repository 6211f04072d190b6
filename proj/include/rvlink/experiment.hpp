#ifndef RVLINK_EXPERIMENT_HPP
#define RVLINK_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rvlink/analytic.hpp"
#include "rvlink/rcpc.hpp"
#include "rvlink/simkit.hpp"

namespace rvlink::experiment {

/// Malformed or unsupported experiment/family input (CLI exit code 2).
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An internal consistency gate failed on otherwise valid input (exit 4).
struct GateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One puncturing-matrix entry of a code family file, with the published
/// reference row (if any) for the discrepancy report.
struct FamilyMember {
    std::string name;
    rcpc::PuncturingMatrix matrix;
    std::map<int, std::uint64_t> published_cd;  // empty if none given
    bool published_catastrophic = false;
};

struct FamilyFile {
    std::string name;
    convcode::GeneratorSpec mother;
    int blocking = 1;
    int period = 1;
    std::vector<FamilyMember> members;

    const FamilyMember& member(const std::string& member_name) const;
};

FamilyFile load_family(const std::string& path);

/// Builds an ordered two-rate family (least punctured first) from named
/// members; validates rate compatibility through the rcpc constructor.
rcpc::RcpcFamily make_family(const FamilyFile& file, const std::vector<std::string>& names);

struct RunOptions {
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;  // overrides the file seed
    std::optional<int> d_max;
    bool quiet = false;
    bool json_sidecar = true;
};

/// Spectrum table per family member (or the "catastrophic" flag), plus a
/// written match/mismatch report against any published rows.
/// Returns the paths written.
std::vector<std::string> cmd_spectrum(const std::string& family_path, const RunOptions& opt);

/// Analytic BER curve bundle: one file per (criterion, rate, correlation).
std::vector<std::string> cmd_analytic(const std::string& experiment_path, const RunOptions& opt);

/// Monte Carlo sweep summaries; throws GateError when an embedded
/// consistency gate fails.
std::vector<std::string> cmd_simulate(const std::string& experiment_path, const RunOptions& opt);

}  // namespace rvlink::experiment

#endif
