#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "pks/diagnostics.hpp"
#include "pks/dynamics.hpp"
#include "pks/scenarios.hpp"

namespace pks::io {

using json = nlohmann::ordered_json;

// --- numeric literals -------------------------------------------------------

// Config files may write masses as "4*pi", "pi/2", "3*pi/4", "pi", or a plain
// number. Anything else is rejected rather than guessed at.
inline double parse_pi_expression(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw std::invalid_argument("empty numeric expression");

    const auto star = s.find('*');
    const auto slash = s.find('/');
    double factor = 1.0, divisor = 1.0;
    std::string core = s;

    auto number = [](const std::string& t) {
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad numeric expression: '" + t + "'");
        }
        if (used != t.size())
            throw std::invalid_argument("bad numeric expression: '" + t + "'");
        return v;
    };

    if (slash != std::string::npos) {
        divisor = number(s.substr(slash + 1));
        core = s.substr(0, slash);
    }
    if (star != std::string::npos) {
        if (slash != std::string::npos && star > slash)
            throw std::invalid_argument("bad numeric expression: '" + raw + "'");
        factor = number(core.substr(0, star));
        core = core.substr(star + 1);
    }
    if (core == "pi") return factor * pks::pi / divisor;
    if (star != std::string::npos || slash != std::string::npos)
        throw std::invalid_argument("bad numeric expression: '" + raw + "'");
    return number(core);
}

// JSON value that is either a number or a pi-expression string.
inline double parse_real(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return parse_pi_expression(j.get<std::string>());
    throw std::invalid_argument(where + ": expected number or pi-expression string");
}

namespace detail {

inline const json& require(const json& j, const std::string& key,
                           const std::string& where) {
    auto it = j.find(key);
    if (it == j.end())
        throw std::invalid_argument(where + ": missing field '" + key + "'");
    return *it;
}

inline void check_schema(const json& j, const std::string& expected,
                         const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
    const json& s = require(j, "schema", where);
    if (!s.is_string() || s.get<std::string>() != expected)
        throw std::invalid_argument(where + ": schema must be '" + expected + "'");
}

inline std::vector<double> real_array(const json& j, const std::string& where) {
    if (!j.is_array()) throw std::invalid_argument(where + ": expected an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(parse_real(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

}  // namespace detail

// --- coupling model ("pks-model-v1") ----------------------------------------

inline SquareMatrix matrix_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        throw std::invalid_argument(where + ": expected a non-empty array of rows");
    const int k = static_cast<int>(j.size());
    SquareMatrix out(k);
    for (int i = 0; i < k; ++i) {
        const std::string row = where + "[" + std::to_string(i) + "]";
        const auto vals = detail::real_array(j[i], row);
        if (static_cast<int>(vals.size()) != k)
            throw std::invalid_argument(row + ": expected " + std::to_string(k) +
                                        " entries");
        for (int c = 0; c < k; ++c) out(i, c) = vals[c];
    }
    return out;
}

inline json matrix_to_json(const SquareMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.n; ++i) {
        json row = json::array();
        for (int j = 0; j < m.n; ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline CouplingModel model_from_json(const json& j) {
    detail::check_schema(j, "pks-model-v1", "model");
    const int k = detail::require(j, "species", "model").get<int>();
    SquareMatrix B = matrix_from_json(detail::require(j, "B", "model"), "model.B");
    if (B.n != k)
        throw std::invalid_argument("model.B: size does not match 'species'");
    std::vector<double> M =
        detail::real_array(detail::require(j, "M", "model"), "model.M");
    if (static_cast<int>(M.size()) != k)
        throw std::invalid_argument("model.M: expected one mass per species");
    std::vector<double> chi;
    if (j.contains("chi")) {
        chi = detail::real_array(j["chi"], "model.chi");
        if (static_cast<int>(chi.size()) != k)
            throw std::invalid_argument("model.chi: expected one value per species");
    }
    try {
        return CouplingModel(std::move(B), std::move(M), std::move(chi));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("model: ") + e.what());
    }
}

inline json model_to_json(const CouplingModel& m) {
    json j;
    j["schema"] = "pks-model-v1";
    j["species"] = m.species();
    j["B"] = matrix_to_json(m.B);
    j["M"] = m.M;
    if (!m.unit_chi()) j["chi"] = m.chi;
    return j;
}

// --- scenario ("pks-scenario-v1") -------------------------------------------

inline std::string to_string(SimMode mode) {
    return mode == SimMode::Physical ? "physical" : "self_similar";
}

inline SimMode mode_from_string(const std::string& s) {
    if (s == "physical") return SimMode::Physical;
    if (s == "self_similar") return SimMode::SelfSimilar;
    throw std::invalid_argument("mode: expected 'physical' or 'self_similar', got '" +
                                s + "'");
}

inline ScenarioConfig scenario_from_json(const json& j) {
    detail::check_schema(j, "pks-scenario-v1", "scenario");
    ScenarioConfig cfg;
    cfg.name = detail::require(j, "name", "scenario").get<std::string>();

    const json& g = detail::require(j, "grid", "scenario");
    cfg.grid.n = detail::require(g, "n", "scenario.grid").get<int>();
    cfg.grid.half_width =
        parse_real(detail::require(g, "half_width", "scenario.grid"),
                   "scenario.grid.half_width");

    cfg.model = model_from_json(detail::require(j, "model", "scenario"));

    const json& init = detail::require(j, "initial", "scenario");
    if (!init.is_array())
        throw std::invalid_argument("scenario.initial: expected an array per species");
    cfg.initial.clear();
    for (std::size_t a = 0; a < init.size(); ++a) {
        const std::string where = "scenario.initial[" + std::to_string(a) + "]";
        if (!init[a].is_array())
            throw std::invalid_argument(where + ": expected an array of blobs");
        std::vector<GaussianBlob> blobs;
        for (std::size_t b = 0; b < init[a].size(); ++b) {
            const std::string bw = where + "[" + std::to_string(b) + "]";
            const json& jb = init[a][b];
            GaussianBlob blob;
            blob.mass = parse_real(detail::require(jb, "mass", bw), bw + ".mass");
            const json& c = detail::require(jb, "center", bw);
            if (!c.is_array() || c.size() != 2)
                throw std::invalid_argument(bw + ".center: expected [x, y]");
            blob.cx = parse_real(c[0], bw + ".center[0]");
            blob.cy = parse_real(c[1], bw + ".center[1]");
            blob.sigma = parse_real(detail::require(jb, "sigma", bw), bw + ".sigma");
            blobs.push_back(blob);
        }
        cfg.initial.push_back(std::move(blobs));
    }

    if (j.contains("t_end")) cfg.t_end = parse_real(j["t_end"], "scenario.t_end");
    if (j.contains("sample_dt"))
        cfg.sample_dt = parse_real(j["sample_dt"], "scenario.sample_dt");
    if (j.contains("mode"))
        cfg.mode = mode_from_string(j["mode"].get<std::string>());
    if (j.contains("snapshot_times"))
        cfg.snapshot_times = detail::real_array(j["snapshot_times"],
                                                "scenario.snapshot_times");
    if (j.contains("stepper")) {
        const json& st = j["stepper"];
        auto maybe = [&](const char* key, double& slot) {
            if (st.contains(key))
                slot = parse_real(st[key], std::string("scenario.stepper.") + key);
        };
        maybe("cfl", cfg.stepper.cfl);
        maybe("dt_min", cfg.stepper.dt_min);
        maybe("dt_max", cfg.stepper.dt_max);
        maybe("blowup_linf_factor", cfg.stepper.blowup_linf_factor);
        maybe("blowup_tail_fraction", cfg.stepper.blowup_tail_fraction);
        maybe("negativity_tolerance", cfg.stepper.negativity_tolerance);
    }
    validate(cfg);
    return cfg;
}

inline json scenario_to_json(const ScenarioConfig& cfg) {
    json j;
    j["schema"] = "pks-scenario-v1";
    j["name"] = cfg.name;
    j["grid"] = {{"n", cfg.grid.n}, {"half_width", cfg.grid.half_width}};
    j["model"] = model_to_json(cfg.model);
    json init = json::array();
    for (const auto& blobs : cfg.initial) {
        json species = json::array();
        for (const auto& b : blobs)
            species.push_back({{"mass", b.mass},
                               {"center", {b.cx, b.cy}},
                               {"sigma", b.sigma}});
        init.push_back(std::move(species));
    }
    j["initial"] = std::move(init);
    j["t_end"] = cfg.t_end;
    j["sample_dt"] = cfg.sample_dt;
    j["mode"] = to_string(cfg.mode);
    if (!cfg.snapshot_times.empty()) j["snapshot_times"] = cfg.snapshot_times;
    const StepperConfig def;
    json st;
    if (cfg.stepper.cfl != def.cfl) st["cfl"] = cfg.stepper.cfl;
    if (cfg.stepper.dt_min != def.dt_min) st["dt_min"] = cfg.stepper.dt_min;
    if (cfg.stepper.dt_max != def.dt_max) st["dt_max"] = cfg.stepper.dt_max;
    if (cfg.stepper.blowup_linf_factor != def.blowup_linf_factor)
        st["blowup_linf_factor"] = cfg.stepper.blowup_linf_factor;
    if (cfg.stepper.blowup_tail_fraction != def.blowup_tail_fraction)
        st["blowup_tail_fraction"] = cfg.stepper.blowup_tail_fraction;
    if (cfg.stepper.negativity_tolerance != def.negativity_tolerance)
        st["negativity_tolerance"] = cfg.stepper.negativity_tolerance;
    if (!st.empty()) j["stepper"] = std::move(st);
    return j;
}

// --- decomposition parts ("pks-parts-v1") -----------------------------------

inline std::vector<SquareMatrix> parts_from_json(const json& j) {
    detail::check_schema(j, "pks-parts-v1", "parts");
    const json& arr = detail::require(j, "parts", "parts");
    if (!arr.is_array() || arr.empty())
        throw std::invalid_argument("parts.parts: expected a non-empty array");
    std::vector<SquareMatrix> out;
    for (std::size_t i = 0; i < arr.size(); ++i)
        out.push_back(matrix_from_json(arr[i], "parts.parts[" + std::to_string(i) + "]"));
    return out;
}

// --- diagnostics stream (NDJSON, one record per line) ------------------------

inline json record_to_json(const DiagnosticsRecord& r) {
    json j;
    j["t"] = r.t;
    j["mass"] = r.mass;
    j["V"] = r.V;
    j["S"] = r.S;
    if (r.E)
        j["E"] = *r.E;
    else
        j["E"] = nullptr;
    j["D"] = r.D;
    j["F"] = r.F;
    j["L2"] = r.L2;
    j["Linf"] = r.Linf;
    j["min_density"] = r.min_density;
    j["cum_dissipation"] = r.cum_dissipation;
    j["A_t"] = r.A_t;
    return j;
}

inline void write_ndjson(std::ostream& os,
                         const std::vector<DiagnosticsRecord>& records) {
    for (const auto& r : records) os << record_to_json(r).dump() << '\n';
}

inline void write_ndjson_file(const std::string& path,
                              const std::vector<DiagnosticsRecord>& records) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_ndjson(os, records);
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline std::vector<DiagnosticsRecord> read_ndjson(std::istream& is) {
    std::vector<DiagnosticsRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        DiagnosticsRecord r;
        r.t = j.at("t").get<double>();
        r.mass = j.at("mass").get<std::vector<double>>();
        r.V = j.at("V").get<double>();
        r.S = j.at("S").get<std::vector<double>>();
        if (!j.at("E").is_null()) r.E = j.at("E").get<double>();
        r.D = j.at("D").get<double>();
        r.F = j.at("F").get<std::vector<double>>();
        r.L2 = j.at("L2").get<std::vector<double>>();
        r.Linf = j.at("Linf").get<std::vector<double>>();
        r.min_density = j.at("min_density").get<std::vector<double>>();
        r.cum_dissipation = j.at("cum_dissipation").get<double>();
        r.A_t = j.at("A_t").get<double>();
        out.push_back(std::move(r));
    }
    return out;
}

// --- field snapshots ----------------------------------------------------------
// One JSON header line, then raw little-endian float64 values, row-major within
// a species, species-major overall.

inline void write_snapshot(const std::string& path, const SimState& state) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    const GridSpec& g = state.grid();
    json header;
    header["n"] = g.n;
    header["half_width"] = g.half_width;
    header["species"] = state.species();
    header["time"] = state.t;
    header["mode"] = to_string(state.mode);
    os << header.dump() << '\n';
    for (const auto& f : state.n)
        os.write(reinterpret_cast<const char*>(f.v.data()),
                 static_cast<std::streamsize>(f.v.size() * sizeof(double)));
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline SimState read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("snapshot header missing: " + path);
    const json header = json::parse(line);
    GridSpec g{header.at("n").get<int>(), header.at("half_width").get<double>()};
    g.validate();
    const int species = header.at("species").get<int>();
    if (species < 1 || species > max_species)
        throw std::runtime_error("snapshot species count out of range: " + path);
    SimState state;
    state.t = header.at("time").get<double>();
    state.mode = header.contains("mode")
                     ? mode_from_string(header.at("mode").get<std::string>())
                     : SimMode::Physical;
    for (int a = 0; a < species; ++a) {
        ScalarField2D f(g);
        is.read(reinterpret_cast<char*>(f.v.data()),
                static_cast<std::streamsize>(f.v.size() * sizeof(double)));
        if (!is) throw std::runtime_error("snapshot truncated: " + path);
        state.n.push_back(std::move(f));
    }
    return state;
}

// --- run summary ---------------------------------------------------------------

inline json build_summary(const RunResult& result, const ScenarioConfig& cfg) {
    const auto& records = result.records;
    json j;
    j["schema"] = "pks-summary-v1";
    j["name"] = cfg.name;
    j["status"] = std::string(pks::to_string(result.outcome.status));
    j["t_final"] = result.outcome.t_final;
    if (result.outcome.indicator)
        j["indicator"] = std::string(pks::to_string(*result.outcome.indicator));
    else
        j["indicator"] = nullptr;

    double drift = 0.0;
    if (!records.empty()) {
        const auto& first = records.front().mass;
        const auto& last = records.back().mass;
        for (std::size_t a = 0; a < first.size(); ++a) {
            const double ref = std::max(std::abs(first[a]), 1e-300);
            drift = std::max(drift, std::abs(last[a] - first[a]) / ref);
        }
    }
    j["mass_drift"] = drift;

    try {
        const TrendFit fit = slope_fit(records);
        j["moment_fit"] = {{"slope", fit.slope}, {"r2", fit.r2}};
        if (cfg.model.symmetric())
            j["expected_slope"] = second_moment_slope(cfg.model);
        else
            j["expected_slope"] = nullptr;
        if (fit.slope < 0.0 && !records.empty())
            j["v_zero_time"] = records.front().V / (-fit.slope);
        else
            j["v_zero_time"] = nullptr;
    } catch (const std::invalid_argument&) {
        j["moment_fit"] = nullptr;
        j["expected_slope"] = nullptr;
        j["v_zero_time"] = nullptr;
    }

    try {
        const DecayFit decay = decay_fit(records, cfg.mode);
        j["decay_fit"] = {{"sup_scaled", decay.sup_scaled},
                          {"monotone_tail", decay.monotone_tail}};
    } catch (const std::invalid_argument&) {
        j["decay_fit"] = nullptr;
    }

    if (!records.empty() && records.front().E) {
        bool monotone = true;
        const double tol = 1e-4 * std::abs(*records.front().E);
        for (std::size_t i = 1; i < records.size(); ++i) {
            if (!records[i].E || *records[i].E > *records[i - 1].E + tol) {
                monotone = false;
                break;
            }
        }
        j["energy_monotone"] = monotone;
    } else {
        j["energy_monotone"] = nullptr;
    }
    return j;
}

inline json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open: " + path);
    try {
        return json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << j.dump(2) << '\n';
    if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace pks::io
