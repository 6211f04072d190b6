#include "rvlink/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace rvlink::experiment {

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                    const std::string& context) {
    if (!obj.is_object()) throw SchemaError(context + ": expected a JSON object");
    for (const auto& [key, _] : obj.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw SchemaError(context + ": unknown key '" + key + "'");
}

template <typename T>
T require(const json& obj, const std::string& key, const std::string& context) {
    if (!obj.contains(key)) throw SchemaError(context + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(context + ": bad type for key '" + key + "'");
    }
}

template <typename T>
T optional_or(const json& obj, const std::string& key, const std::string& context, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(context + ": bad type for key '" + key + "'");
    }
}

std::vector<double> parse_grid(const json& j, const std::string& context) {
    std::vector<double> grid;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number()) throw SchemaError(context + ": grid entries must be numbers");
            grid.push_back(v.get<double>());
        }
    } else if (j.is_object()) {
        reject_unknown(j, {"start", "stop", "step"}, context + ".grid");
        double start = require<double>(j, "start", context);
        double stop = require<double>(j, "stop", context);
        double step = require<double>(j, "step", context);
        if (step <= 0.0 || stop < start) throw SchemaError(context + ": bad grid range");
        for (double v = start; v <= stop + 1e-9; v += step) grid.push_back(v);
    } else {
        throw SchemaError(context + ": grid must be an array or {start, stop, step}");
    }
    if (grid.empty()) throw SchemaError(context + ": empty grid");
    for (size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1]) throw SchemaError(context + ": grid must be strictly increasing");
    return grid;
}

bool all_ones(const rcpc::PuncturingMatrix& m) {
    return m.survivors_per_period() == m.n() * m.period();
}

/// Spectrum of the member's effective code: the mother itself when nothing
/// is deleted, otherwise the blocked punctured equivalent.
convcode::DistanceSpectrum member_spectrum(const FamilyFile& file, const FamilyMember& member,
                                           std::optional<int> d_max, bool* catastrophic) {
    if (catastrophic) *catastrophic = false;
    const convcode::GeneratorSpec* code = &file.mother;
    convcode::GeneratorSpec equivalent;
    if (!all_ones(member.matrix)) {
        auto blocked = rcpc::blocked_generator(file.mother, file.blocking);
        auto pe = rcpc::punctured_equivalent(blocked, member.matrix);
        if (pe.catastrophic) {
            if (!catastrophic) throw SchemaError("member '" + member.name + "' is catastrophic");
            *catastrophic = true;
            return {};
        }
        equivalent = pe.code;
        code = &equivalent;
    }
    if (d_max) return convcode::distance_spectrum(*code, *d_max);
    // auto range: find d_free, then report up to d_free + 10
    int probe = 12;
    for (;;) {
        auto sp = convcode::distance_spectrum(*code, probe);
        if (!sp.c.empty()) return convcode::distance_spectrum(*code, sp.d_free + 10);
        probe *= 2;
        if (probe > 96) throw std::runtime_error("no error event found below weight 96");
    }
}

struct CsvFile {
    std::ofstream out;
    json sidecar;
    std::string csv_path, json_path;

    CsvFile(const std::string& dir, const std::string& stem, bool sidecar_enabled) {
        std::filesystem::create_directories(dir);
        csv_path = (std::filesystem::path(dir) / (stem + ".csv")).string();
        json_path = sidecar_enabled ? (std::filesystem::path(dir) / (stem + ".json")).string() : "";
        out.open(csv_path);
        if (!out) throw std::runtime_error("cannot write " + csv_path);
    }
    void header(const std::string& key, const json& value) {
        out << "# " << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump())
            << "\n";
        sidecar[key] = value;
    }
    void finish(const json& rows) {
        sidecar["rows"] = rows;
        if (!json_path.empty()) {
            std::ofstream js(json_path);
            js << sidecar.dump(2) << "\n";
        }
    }
};

analytic::SystemSwitches parse_switches(const json& j, const std::string& context) {
    analytic::SystemSwitches sw;
    if (j.is_null()) return sw;
    reject_unknown(j, {"exponent", "branches", "bracket", "rate_in_qam"}, context);
    std::string exp = optional_or<std::string>(j, "exponent", context, "difference");
    if (exp == "difference")
        sw.exponent = analytic::ExponentFamily::kAntennaDifference;
    else if (exp == "sum")
        sw.exponent = analytic::ExponentFamily::kAntennaSum;
    else
        throw SchemaError(context + ": exponent must be 'difference' or 'sum'");
    std::string br = optional_or<std::string>(j, "branches", context, "product");
    if (br == "product")
        sw.branch_count = analytic::BranchCount::kProduct;
    else if (br == "min")
        sw.branch_count = analytic::BranchCount::kMin;
    else
        throw SchemaError(context + ": branches must be 'product' or 'min'");
    sw.bracket = optional_or<bool>(j, "bracket", context, true);
    sw.rate_in_qam = optional_or<bool>(j, "rate_in_qam", context, true);
    return sw;
}

}  // namespace

const FamilyMember& FamilyFile::member(const std::string& member_name) const {
    for (const auto& m : members)
        if (m.name == member_name) return m;
    throw SchemaError("family has no member named '" + member_name + "'");
}

FamilyFile load_family(const std::string& path) {
    json j = load_json(path);
    const std::string ctx = "family file " + path;
    reject_unknown(j, {"name", "mother", "blocking", "period", "matrices"}, ctx);
    FamilyFile f;
    f.name = optional_or<std::string>(j, "name", ctx, "family");
    json mj = j.contains("mother") ? j.at("mother") : json();
    reject_unknown(mj, {"polynomials"}, ctx + ".mother");
    auto octals = require<std::vector<std::string>>(mj, "polynomials", ctx + ".mother");
    try {
        f.mother = convcode::GeneratorSpec::rate_1n_octal(octals);
    } catch (const std::exception& e) {
        throw SchemaError(ctx + ": bad mother polynomials: " + e.what());
    }
    f.blocking = optional_or<int>(j, "blocking", ctx, 1);
    f.period = require<int>(j, "period", ctx);
    if (f.blocking < 1 || f.period < 1) throw SchemaError(ctx + ": blocking/period must be >= 1");
    if (!j.contains("matrices")) throw SchemaError(ctx + ": missing key 'matrices'");
    for (const auto& mjson : j.at("matrices")) {
        reject_unknown(mjson, {"name", "rows", "published_cd", "published"}, ctx + ".matrices[]");
        FamilyMember member;
        member.name = require<std::string>(mjson, "name", ctx);
        auto rows = require<std::vector<std::vector<uint8_t>>>(mjson, "rows", ctx);
        try {
            member.matrix = rcpc::PuncturingMatrix(rows);
        } catch (const std::exception& e) {
            throw SchemaError(ctx + ": bad matrix '" + member.name + "': " + e.what());
        }
        if (member.matrix.n() != f.mother.n || member.matrix.period() != f.period)
            throw SchemaError(ctx + ": matrix '" + member.name + "' dimensions mismatch");
        if (mjson.contains("published_cd")) {
            for (const auto& [k, v] : mjson.at("published_cd").items())
                member.published_cd[std::stoi(k)] = v.get<std::uint64_t>();
        }
        if (optional_or<std::string>(mjson, "published", ctx, "") == "catastrophic")
            member.published_catastrophic = true;
        f.members.push_back(std::move(member));
    }
    if (f.members.empty()) throw SchemaError(ctx + ": at least one matrix required");
    return f;
}

rcpc::RcpcFamily make_family(const FamilyFile& file, const std::vector<std::string>& names) {
    std::vector<rcpc::PuncturingMatrix> mats;
    for (const auto& n : names) mats.push_back(file.member(n).matrix);
    try {
        return rcpc::RcpcFamily(file.mother, file.period, std::move(mats));
    } catch (const std::exception& e) {
        throw SchemaError(std::string("rate-incompatible member selection: ") + e.what());
    }
}

std::vector<std::string> cmd_spectrum(const std::string& family_path, const RunOptions& opt) {
    FamilyFile f = load_family(family_path);
    CsvFile csv(opt.out_dir, f.name + "_spectrum", opt.json_sidecar);
    csv.header("tool", "rvlink");
    csv.header("mode", "spectrum");
    csv.header("family", f.name);
    {
        std::vector<std::string> oct;
        for (const auto& p : f.mother.polys[0]) oct.push_back(convcode::poly_to_octal(p));
        csv.header("mother_octal", json(oct));
    }
    json rows = json::array();
    csv.out << "member,d,a_d,c_d,published_c_d,match\n";
    for (const auto& member : f.members) {
        bool catastrophic = false;
        convcode::DistanceSpectrum sp = member_spectrum(f, member, opt.d_max, &catastrophic);
        json row;
        row["member"] = member.name;
        if (catastrophic) {
            row["catastrophic"] = true;
            row["published_match"] = member.published_catastrophic;
            csv.out << member.name << ",catastrophic,,,"
                    << (member.published_catastrophic ? "catastrophic,yes" : ",no") << "\n";
            rows.push_back(row);
            continue;
        }
        row["d_free"] = sp.d_free;
        bool all_match = member.published_cd.empty() ? false : true;
        // union of computed and published distances, so missing rows surface
        std::map<int, int> ds;
        for (const auto& [d, _] : sp.c) ds[d] = 1;
        for (const auto& [d, _] : member.published_cd) ds[d] = 1;
        for (const auto& [d, _] : ds) {
            auto it = sp.c.find(d);
            auto pub = member.published_cd.find(d);
            std::string match = "n/a";
            if (pub != member.published_cd.end()) {
                bool ok = it != sp.c.end() && it->second == pub->second;
                match = ok ? "yes" : "no";
                if (!ok) all_match = false;
            }
            csv.out << member.name << "," << d << ","
                    << (it != sp.c.end() ? std::to_string(sp.a.at(d)) : "0") << ","
                    << (it != sp.c.end() ? std::to_string(it->second) : "0") << ","
                    << (pub != member.published_cd.end() ? std::to_string(pub->second) : "")
                    << "," << match << "\n";
        }
        if (!member.published_cd.empty()) {
            row["published_match"] = all_match;
            csv.out << "# report: member " << member.name
                    << (all_match ? " matches" : " DIFFERS from") << " the published row\n";
        }
        if (member.published_catastrophic) {
            row["published_match"] = false;
            csv.out << "# report: member " << member.name
                    << " is published as catastrophic but has a bounded spectrum (d_free="
                    << sp.d_free << ")\n";
        }
        row["c"] = json::object();
        for (const auto& [d, cd] : sp.c) row["c"][std::to_string(d)] = cd;
        rows.push_back(row);
    }
    csv.finish(rows);
    if (!opt.quiet) std::cout << "wrote " << csv.csv_path << "\n";
    std::vector<std::string> paths{csv.csv_path};
    if (!csv.json_path.empty()) paths.push_back(csv.json_path);
    return paths;
}

std::vector<std::string> cmd_analytic(const std::string& experiment_path, const RunOptions& opt) {
    json j = load_json(experiment_path);
    const std::string ctx = "experiment " + experiment_path;
    reject_unknown(j,
                   {"mode", "family", "constellation", "antennas", "m", "rho", "criteria",
                    "rates", "grid_db", "switches", "ensemble", "output"},
                   ctx);
    if (require<std::string>(j, "mode", ctx) != "analytic")
        throw SchemaError(ctx + ": mode must be 'analytic'");
    std::filesystem::path base_dir = std::filesystem::path(experiment_path).parent_path();
    FamilyFile fam = load_family((base_dir / require<std::string>(j, "family", ctx)).string());

    json aj = j.contains("antennas") ? j.at("antennas") : json();
    reject_unknown(aj, {"rx", "tx"}, ctx + ".antennas");
    const int m_r = require<int>(aj, "rx", ctx);
    const int m_t = require<int>(aj, "tx", ctx);
    const int m_ary = optional_or<int>(j, "constellation", ctx, 4);
    const double m_shape = require<double>(j, "m", ctx);
    auto rhos = optional_or<std::vector<double>>(j, "rho", ctx, {0.0});
    auto criteria = optional_or<std::vector<std::string>>(j, "criteria", ctx, {"zf"});
    auto rates = require<std::vector<std::string>>(j, "rates", ctx);
    if (!j.contains("grid_db")) throw SchemaError(ctx + ": missing key 'grid_db'");
    auto grid = parse_grid(j.at("grid_db"), ctx);
    auto switches = parse_switches(j.contains("switches") ? j.at("switches") : json(), ctx);
    int draws = 4000;
    std::uint64_t seed = 5;
    if (j.contains("ensemble")) {
        reject_unknown(j.at("ensemble"), {"draws", "seed"}, ctx + ".ensemble");
        draws = optional_or<int>(j.at("ensemble"), "draws", ctx, 4000);
        seed = optional_or<std::uint64_t>(j.at("ensemble"), "seed", ctx, 5);
    }
    if (opt.seed) seed = *opt.seed;
    std::string output = optional_or<std::string>(j, "output", ctx, "analytic");

    std::vector<std::string> paths;
    for (const auto& crit_name : criteria) {
        if (crit_name != "zf" && crit_name != "mmse")
            throw SchemaError(ctx + ": criterion must be 'zf' or 'mmse'");
        for (const auto& rate_name : rates) {
            const FamilyMember& member = fam.member(rate_name);
            convcode::DistanceSpectrum sp = member_spectrum(fam, member, opt.d_max, nullptr);
            auto [num, den] = rcpc::code_rate(member.matrix);
            for (double rho : rhos) {
                analytic::SystemConfig sc;
                sc.base.qam = modem::QamParams::make(m_ary);
                sc.base.fading = channel::FadingParams(m_shape, rho);
                sc.base.code_rate = static_cast<double>(num) / den;
                sc.base.puncturing_period = fam.period;
                sc.base.spectrum = sp;
                sc.base.grid_db = grid;
                sc.m_r = m_r;
                sc.m_t = m_t;
                sc.criterion =
                    crit_name == "zf" ? mimo::Criterion::kZf : mimo::Criterion::kMmse;
                sc.switches = switches;
                sc.ensemble_draws = draws;
                sc.ensemble_seed = seed;
                analytic::BerCurve curve = analytic::system_ber(sc);

                std::ostringstream stem;
                stem << output << "_" << crit_name << "_" << rate_name << "_rho"
                     << rho;
                CsvFile csv(opt.out_dir, stem.str(), opt.json_sidecar);
                csv.header("tool", "rvlink");
                csv.header("mode", "analytic");
                csv.header("family", fam.name);
                csv.header("criterion", crit_name);
                csv.header("rate_member", rate_name);
                csv.header("code_rate", json(std::to_string(num) + "/" + std::to_string(den)));
                csv.header("antennas_rx", m_r);
                csv.header("antennas_tx", m_t);
                csv.header("m", m_shape);
                csv.header("rho", rho);
                csv.header("constellation", m_ary);
                csv.header("ensemble_draws", draws);
                csv.header("seed", seed);
                csv.header("d_free", sp.d_free);
                csv.header("d_max", sp.d_max);
                json rows = json::array();
                csv.out << "ebn0_db,raw_ber,clipped_ber\n";
                for (const auto& pt : curve.points) {
                    csv.out << pt.ebn0_db << "," << pt.raw << "," << pt.clipped << "\n";
                    rows.push_back({{"ebn0_db", pt.ebn0_db}, {"raw", pt.raw},
                                    {"clipped", pt.clipped}});
                }
                csv.finish(rows);
                if (!opt.quiet) std::cout << "wrote " << csv.csv_path << "\n";
                paths.push_back(csv.csv_path);
                if (!csv.json_path.empty()) paths.push_back(csv.json_path);
            }
        }
    }
    return paths;
}

std::vector<std::string> cmd_simulate(const std::string& experiment_path, const RunOptions& opt) {
    json j = load_json(experiment_path);
    const std::string ctx = "experiment " + experiment_path;
    reject_unknown(j,
                   {"mode", "family", "constellation", "antennas", "m", "rho", "criterion",
                    "coded", "rate", "allocation", "channel", "dynamics", "grid_db",
                    "info_bits_per_trial",
                    "max_trials", "min_error_events", "noiseless", "seed", "workers", "output",
                    "expect_zero_errors"},
                   ctx);
    if (require<std::string>(j, "mode", ctx) != "simulate")
        throw SchemaError(ctx + ": mode must be 'simulate'");
    if (optional_or<double>(j, "rho", ctx, 0.0) != 0.0)
        throw SchemaError(ctx + ": correlated-fading Monte Carlo is not supported; "
                          "the correlation model is analytic-only (set rho to 0)");

    simkit::LinkConfig cfg;
    json aj = j.contains("antennas") ? j.at("antennas") : json();
    reject_unknown(aj, {"rx", "tx"}, ctx + ".antennas");
    cfg.m_r = require<int>(aj, "rx", ctx);
    cfg.m_t = require<int>(aj, "tx", ctx);
    cfg.qam = modem::QamParams::make(optional_or<int>(j, "constellation", ctx, 4));
    cfg.fading = channel::FadingParams(optional_or<double>(j, "m", ctx, 1.0));
    std::string chan = optional_or<std::string>(j, "channel", ctx, "nakagami");
    if (chan == "nakagami")
        cfg.channel_kind = simkit::ChannelKind::kNakagami;
    else if (chan == "awgn")
        cfg.channel_kind = simkit::ChannelKind::kAwgn;
    else if (chan == "identity")
        cfg.channel_kind = simkit::ChannelKind::kIdentity;
    else
        throw SchemaError(ctx + ": channel must be nakagami/awgn/identity");
    std::string dyn = optional_or<std::string>(j, "dynamics", ctx, "quasi_static");
    if (dyn == "quasi_static")
        cfg.dynamics = simkit::FadingDynamics::kQuasiStatic;
    else if (dyn == "per_symbol")
        cfg.dynamics = simkit::FadingDynamics::kPerSymbol;
    else
        throw SchemaError(ctx + ": dynamics must be quasi_static/per_symbol");
    std::string crit = optional_or<std::string>(j, "criterion", ctx, "zf");
    if (crit != "zf" && crit != "mmse") throw SchemaError(ctx + ": criterion must be zf/mmse");
    cfg.criterion = crit == "zf" ? mimo::Criterion::kZf : mimo::Criterion::kMmse;
    cfg.coded = optional_or<bool>(j, "coded", ctx, true);

    FamilyFile fam;
    if (cfg.coded) {
        std::filesystem::path base_dir = std::filesystem::path(experiment_path).parent_path();
        fam = load_family((base_dir / require<std::string>(j, "family", ctx)).string());
        std::string alloc = optional_or<std::string>(j, "allocation", ctx, "fixed");
        if (alloc == "fixed") {
            cfg.allocation = simkit::Allocation::kFixed;
            std::string rate = require<std::string>(j, "rate", ctx);
            cfg.family = make_family(fam, {rate});
            cfg.fixed_matrix_index = 0;
        } else if (alloc == "per_channel") {
            cfg.allocation = simkit::Allocation::kPerChannel;
            auto rates = require<std::vector<std::string>>(j, "rate", ctx);
            cfg.family = make_family(fam, rates);
        } else {
            throw SchemaError(ctx + ": allocation must be 'fixed' or 'per_channel'");
        }
    }
    if (!j.contains("grid_db")) throw SchemaError(ctx + ": missing key 'grid_db'");
    cfg.grid_db = parse_grid(j.at("grid_db"), ctx);
    cfg.info_bits_per_trial = optional_or<int>(j, "info_bits_per_trial", ctx, 200);
    cfg.max_trials = optional_or<int>(j, "max_trials", ctx, 2000);
    cfg.min_error_events = optional_or<int>(j, "min_error_events", ctx, 100);
    cfg.noiseless = optional_or<bool>(j, "noiseless", ctx, false);
    cfg.master_seed = optional_or<std::uint64_t>(j, "seed", ctx, 1);
    if (opt.seed) cfg.master_seed = *opt.seed;
    cfg.workers = optional_or<int>(j, "workers", ctx, 1);
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw SchemaError(ctx + ": " + e.what());
    }

    simkit::RunSummary summary = simkit::run_sweep(cfg);

    std::string output = optional_or<std::string>(j, "output", ctx, "simulate");
    CsvFile csv(opt.out_dir, output, opt.json_sidecar);
    csv.header("tool", "rvlink");
    csv.header("mode", "simulate");
    csv.header("criterion", crit);
    csv.header("channel", chan);
    csv.header("coded", cfg.coded);
    csv.header("antennas_rx", cfg.m_r);
    csv.header("antennas_tx", cfg.m_t);
    csv.header("m", cfg.fading.m);
    csv.header("constellation", cfg.qam.m_ary);
    csv.header("info_bits_per_trial", cfg.info_bits_per_trial);
    csv.header("max_trials", cfg.max_trials);
    csv.header("min_error_events", cfg.min_error_events);
    csv.header("seed", cfg.master_seed);
    // wall-clock is intentionally the last header line so byte-comparisons
    // can drop it
    csv.out << "# wall_seconds: " << summary.wall_seconds << "\n";
    csv.sidecar["wall_seconds"] = summary.wall_seconds;
    json rows = json::array();
    csv.out << "ebn0_db,bits,errors,ber,std_error,trials,rank_resamples\n";
    bool any_errors = false;
    for (const auto& p : summary.points) {
        if (p.errors > p.bits) throw GateError("error count exceeds bit count");
        any_errors = any_errors || p.errors > 0;
        csv.out << p.ebn0_db << "," << p.bits << "," << p.errors << "," << p.ber << ","
                << p.std_error << "," << p.trials_run << "," << p.rank_resamples << "\n";
        rows.push_back({{"ebn0_db", p.ebn0_db},
                        {"bits", p.bits},
                        {"errors", p.errors},
                        {"ber", p.ber},
                        {"std_error", p.std_error},
                        {"trials", p.trials_run},
                        {"rank_resamples", p.rank_resamples}});
    }
    csv.finish(rows);
    if (optional_or<bool>(j, "expect_zero_errors", ctx, false) && any_errors)
        throw GateError("expected a zero-error run but errors were observed");
    if (!opt.quiet) std::cout << "wrote " << csv.csv_path << "\n";
    std::vector<std::string> paths{csv.csv_path};
    if (!csv.json_path.empty()) paths.push_back(csv.json_path);
    return paths;
}

}  // namespace rvlink::experiment
