#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <regex>
#include <thread>

#include "CLI11.hpp"

#include "pks/io.hpp"

namespace pks::cli {

namespace fs = std::filesystem;

// --- model analysis -----------------------------------------------------------

inline io::json subset_labels(Subset J) {
    io::json out = io::json::array();
    for (int a : subset_members(J)) out.push_back(a + 1);
    return out;
}

// Aggregates every static criterion the model module offers into one report.
// Quantities that only make sense for symmetric coupling come out null
// otherwise, with a one-line note saying which route still applies.
inline io::json analyze_report(const CouplingModel& m,
                               const std::optional<std::vector<SquareMatrix>>& parts,
                               std::optional<double> v0) {
    m.validate();
    const int k = m.species();
    io::json j;
    j["schema"] = "pks-analysis-v1";
    j["species"] = k;
    j["symmetric"] = m.symmetric();

    const DissipativityChain diss = essentially_dissipative(m.B);
    if (m.symmetric()) {
        const SubsetVerdict sv = subcritical_check(m);
        j["verdict"] = std::string(to_string(sv.verdict));
        j["q_full"] = sv.q_full;
        j["q_full_over_8pi"] = sv.q_full / eight_pi;
        if (sv.worst_subset)
            j["worst_subset"] = {{"species", subset_labels(sv.worst_subset->first)},
                                 {"q", sv.worst_subset->second}};
        else
            j["worst_subset"] = nullptr;

        // Interaction strengths rescaled so the full-family gap closes exactly;
        // the per-subset gaps then say which sub-families carry slack.
        if (sv.q_full > 1e-14) {
            const double theta = sv.q_full / eight_pi;
            SquareMatrix A = positive_part(m.B);
            for (double& v : A.a) v /= theta;
            io::json rows = io::json::array();
            const Subset full = full_subset(k);
            for (Subset J = 1; J <= full; ++J)
                rows.push_back({{"species", subset_labels(J)},
                                {"lambda", lambda_J(A, m.M, J)}});
            j["lambda_table"] = {{"theta", theta}, {"rows", std::move(rows)}};
            const LogHlsResult hls = log_hls_condition(A, m.M);
            j["log_hls"] = {{"bounded_below", hls.bounded_below},
                            {"minimizer_exists", hls.minimizer_exists}};
        } else {
            j["lambda_table"] = nullptr;
            j["log_hls"] = nullptr;
        }

        try {
            const SpectralBound sb = spectral_sufficient(m);
            j["spectral"] = {{"rho", sb.rho}, {"bound_holds", sb.bound_holds}};
        } catch (const std::invalid_argument&) {
            j["spectral"] = nullptr;
        }

        const double slope = second_moment_slope(m);
        j["second_moment_slope"] = slope;
        if (v0 && slope < 0.0)
            j["v_zero_time"] = *v0 / (-slope);
        else
            j["v_zero_time"] = nullptr;
    } else {
        j["verdict"] = nullptr;
        j["note"] = std::string("non-symmetric: free-energy conditions not "
                                "applicable; essentially dissipative: ") +
                    (diss.is_essentially_dissipative ? "yes" : "no");
    }

    io::json chain = io::json::array();
    for (Subset J : diss.chain) chain.push_back(subset_labels(J));
    j["essentially_dissipative"] = {{"holds", diss.is_essentially_dissipative},
                                    {"chain", std::move(chain)}};

    try {
        const TridiagonalTagging tag = symmetrize_tridiagonal(m.B);
        j["tridiagonal_tagging"] = {{"eta", tag.eta},
                                    {"B_sym", io::matrix_to_json(tag.B_sym)}};
    } catch (const std::invalid_argument&) {
        j["tridiagonal_tagging"] = nullptr;
    }

    if (parts) {
        const DecompositionReport rep = check_decomposition_condition(m, *parts);
        io::json pj = io::json::array();
        for (const auto& p : rep.parts) {
            io::json one = {{"support", subset_labels(p.support)},
                            {"c_value", p.c_value},
                            {"strict_ok", p.strict_ok}};
            if (p.worst)
                one["worst"] = {{"species", subset_labels(p.worst->first)},
                                {"q", p.worst->second}};
            else
                one["worst"] = nullptr;
            pj.push_back(std::move(one));
        }
        j["decomposition"] = {{"valid_decomposition", rep.valid_decomposition},
                              {"condition_holds", rep.condition_holds},
                              {"c_rule", rep.c_rule},
                              {"parts", std::move(pj)}};
    }
    return j;
}

// --- scenario sources and simulation output -------------------------------------

inline ScenarioConfig load_scenario(const std::string& source) {
    if (source.rfind("preset:", 0) == 0) return preset(source.substr(7));
    return io::scenario_from_json(io::load_json_file(source));
}

// Runs a scenario and lays down diagnostics.ndjson, summary.json, and (when
// snapshot times are configured) snapshots/snapshot_NNN.field under out_dir.
inline RunResult simulate_to_dir(const ScenarioConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    SnapshotSink sink;
    int snap_idx = 0;
    if (!cfg.snapshot_times.empty()) {
        const fs::path snap_dir = fs::path(out_dir) / "snapshots";
        fs::create_directories(snap_dir);
        sink = [&snap_idx, snap_dir](const SimState& s) {
            char name[32];
            std::snprintf(name, sizeof name, "snapshot_%03d.field", snap_idx++);
            io::write_snapshot((snap_dir / name).string(), s);
        };
    }
    const RunResult result = run(cfg, sink);
    io::write_ndjson_file((fs::path(out_dir) / "diagnostics.ndjson").string(),
                          result.records);
    io::write_json_file((fs::path(out_dir) / "summary.json").string(),
                        io::build_summary(result, cfg));
    return result;
}

inline int exit_code_for(RunStatus status) {
    switch (status) {
        case RunStatus::Completed: return 0;
        case RunStatus::BlowUpDetected: return 3;
        case RunStatus::NegativityAbort: return 4;
    }
    return 5;
}

// --- parameter sweeps ------------------------------------------------------------

// Axis forms: mass[a], chi[a], sigma[a] (a is a 0-based species index), t_end.
inline void apply_sweep_axis(ScenarioConfig& cfg, const std::string& axis, double value) {
    if (axis == "t_end") {
        cfg.t_end = value;
        return;
    }
    static const std::regex form("^(mass|chi|sigma)\\[([0-9]+)\\]$");
    std::smatch match;
    if (!std::regex_match(axis, match, form))
        throw std::invalid_argument("sweep axis must be mass[a], chi[a], sigma[a], or t_end");
    const std::string what = match[1];
    const int a = std::stoi(match[2]);
    if (a < 0 || a >= cfg.model.species())
        throw std::invalid_argument("sweep axis species index out of range");

    if (what == "chi") {
        cfg.model.chi[a] = value;
        return;
    }
    if (cfg.initial_fields)
        throw std::invalid_argument("sweep over " + what +
                                    " needs blob initial data, not raw fields");
    if (what == "sigma") {
        for (auto& blob : cfg.initial[a]) blob.sigma = value;
        return;
    }
    // mass: move the species total and rescale its blobs to keep their ratios
    const double old_mass = cfg.model.M[a];
    if (!(old_mass > 0.0))
        throw std::invalid_argument("sweep over mass needs a positive starting mass");
    const double scale = value / old_mass;
    cfg.model.M[a] = value;
    for (auto& blob : cfg.initial[a]) blob.mass *= scale;
}

struct SweepPoint {
    double value = 0.0;
    RunStatus status = RunStatus::Completed;
    double t_final = 0.0;
    std::optional<BlowUpIndicator> indicator;
    std::optional<std::string> error;
};

struct SweepOutcome {
    std::vector<SweepPoint> points;
    std::optional<std::pair<double, double>> bracket;  // [last stable, first blow-up]
};

inline SweepOutcome run_sweep(const ScenarioConfig& base, const std::string& axis,
                              double from, double to, int steps, int threads,
                              const std::string& out_dir) {
    if (steps < 1) throw std::invalid_argument("sweep needs at least one step");
    {
        ScenarioConfig probe = base;  // fail fast on a bad axis before spawning
        apply_sweep_axis(probe, axis, from);
    }
    std::vector<double> values(steps);
    for (int i = 0; i < steps; ++i)
        values[i] = steps == 1 ? from : from + (to - from) * i / (steps - 1);

    SweepOutcome out;
    out.points.resize(values.size());
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= values.size()) return;
            SweepPoint& pt = out.points[i];
            pt.value = values[i];
            try {
                ScenarioConfig cfg = base;
                apply_sweep_axis(cfg, axis, values[i]);
                cfg.name = base.name + "_pt" + std::to_string(i);
                validate(cfg);
                RunResult res;
                if (out_dir.empty()) {
                    res = run(cfg);
                } else {
                    char sub[32];
                    std::snprintf(sub, sizeof sub, "point_%02zu", i);
                    res = simulate_to_dir(cfg, (fs::path(out_dir) / sub).string());
                }
                pt.status = res.outcome.status;
                pt.t_final = res.outcome.t_final;
                pt.indicator = res.outcome.indicator;
            } catch (const std::exception& e) {
                pt.error = e.what();
            }
        }
    };

    const int pool = std::max(1, std::min<int>(threads, static_cast<int>(values.size())));
    if (pool == 1) {
        worker();
    } else {
        std::vector<std::thread> team;
        team.reserve(pool);
        for (int i = 0; i < pool; ++i) team.emplace_back(worker);
        for (auto& t : team) t.join();
    }

    std::optional<std::size_t> first_blowup;
    for (std::size_t i = 0; i < out.points.size(); ++i) {
        const auto& pt = out.points[i];
        if (!pt.error && pt.status == RunStatus::BlowUpDetected) {
            first_blowup = i;
            break;
        }
    }
    if (first_blowup) {
        std::optional<std::size_t> last_ok;
        for (std::size_t i = 0; i < *first_blowup; ++i)
            if (!out.points[i].error && out.points[i].status == RunStatus::Completed)
                last_ok = i;
        if (last_ok)
            out.bracket = {out.points[*last_ok].value, out.points[*first_blowup].value};
    }
    return out;
}

inline io::json sweep_summary_json(const SweepOutcome& sweep, const std::string& axis) {
    io::json j;
    j["schema"] = "pks-sweep-v1";
    j["axis"] = axis;
    io::json pts = io::json::array();
    for (const auto& pt : sweep.points) {
        io::json one;
        one["value"] = pt.value;
        if (pt.error) {
            one["status"] = "Error";
            one["error"] = *pt.error;
        } else {
            one["status"] = std::string(to_string(pt.status));
            one["t_final"] = pt.t_final;
            one["indicator"] = pt.indicator
                                   ? io::json(std::string(to_string(*pt.indicator)))
                                   : io::json(nullptr);
        }
        pts.push_back(std::move(one));
    }
    j["points"] = std::move(pts);
    j["bracket"] = sweep.bracket
                       ? io::json({sweep.bracket->first, sweep.bracket->second})
                       : io::json(nullptr);
    return j;
}

// --- command entry points ---------------------------------------------------------

inline int resolve_threads(int flag) {
    if (const char* env = std::getenv("PKS_THREADS")) {
        try {
            flag = std::stoi(env);
        } catch (const std::exception&) {
            throw std::invalid_argument("PKS_THREADS must be an integer");
        }
    }
    return std::max(1, flag);
}

inline int cmd_analyze(const std::string& model_path, const std::string& parts_path,
                       std::optional<double> v0) {
    const CouplingModel model = io::model_from_json(io::load_json_file(model_path));
    std::optional<std::vector<SquareMatrix>> parts;
    if (!parts_path.empty())
        parts = io::parts_from_json(io::load_json_file(parts_path));
    std::cout << analyze_report(model, parts, v0).dump(2) << "\n";
    return 0;
}

inline int cmd_simulate(const std::string& source, const std::string& out_dir,
                        bool force_self_similar) {
    ScenarioConfig cfg = load_scenario(source);
    if (force_self_similar) cfg.mode = SimMode::SelfSimilar;
    const RunResult result = simulate_to_dir(cfg, out_dir);
    std::cout << io::build_summary(result, cfg).dump(2) << "\n";
    return exit_code_for(result.outcome.status);
}

inline int cmd_sweep(const std::string& source, const std::string& axis,
                     const std::string& from_expr, const std::string& to_expr,
                     int steps, int threads, const std::string& out_dir) {
    const ScenarioConfig base = load_scenario(source);
    const double from = io::parse_pi_expression(from_expr);
    const double to = io::parse_pi_expression(to_expr);
    const SweepOutcome sweep =
        run_sweep(base, axis, from, to, steps, resolve_threads(threads), out_dir);
    const io::json summary = sweep_summary_json(sweep, axis);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        io::write_json_file((fs::path(out_dir) / "sweep_summary.json").string(), summary);
    }
    std::cout << summary.dump(2) << "\n";
    for (const auto& pt : sweep.points)
        if (pt.error) return 5;
    return 0;
}

inline int cmd_presets() {
    for (const auto& name : preset_names()) std::cout << name << "\n";
    return 0;
}

inline int run_cli(int argc, char** argv) {
    CLI::App app{"multi-species parabolic-elliptic chemotaxis: analysis and simulation"};
    app.require_subcommand(1);

    std::string model_path, parts_path;
    double v0_value = 0.0;
    auto* analyze = app.add_subcommand("analyze", "static criticality report for a coupling model");
    analyze->add_option("--model", model_path, "model JSON (pks-model-v1)")->required();
    analyze->add_option("--parts", parts_path, "decomposition JSON (pks-parts-v1)");
    auto* v0_opt = analyze->add_option("--v0", v0_value,
                                       "initial second moment, for moment-extrapolated vanish time");

    std::string sim_source, sim_out;
    int sim_threads = 1;
    auto* simulate = app.add_subcommand("simulate", "run a scenario and write diagnostics");
    simulate->add_option("--scenario", sim_source, "scenario JSON or preset:NAME")->required();
    simulate->add_option("--out", sim_out, "output directory")->required();
    simulate->add_option("--threads", sim_threads, "worker threads (single runs ignore this)");

    std::string ss_source, ss_out;
    int ss_threads = 1;
    auto* selfsim = app.add_subcommand("self-similar", "run a scenario in rescaled variables");
    selfsim->add_option("--scenario", ss_source, "scenario JSON or preset:NAME")->required();
    selfsim->add_option("--out", ss_out, "output directory")->required();
    selfsim->add_option("--threads", ss_threads, "worker threads (single runs ignore this)");

    std::string sw_source, sw_axis, sw_from, sw_to, sw_out;
    int sw_steps = 0, sw_threads = 1;
    auto* sweep = app.add_subcommand("sweep", "run a scenario family along one axis");
    sweep->add_option("--scenario", sw_source, "scenario JSON or preset:NAME")->required();
    sweep->add_option("--axis", sw_axis, "mass[a], chi[a], sigma[a], or t_end")->required();
    sweep->add_option("--from", sw_from, "first value (pi expressions allowed)")->required();
    sweep->add_option("--to", sw_to, "last value (pi expressions allowed)")->required();
    sweep->add_option("--steps", sw_steps, "number of points, endpoints included")->required();
    sweep->add_option("--out", sw_out, "output directory (per-point subdirectories)");
    sweep->add_option("--threads", sw_threads, "worker threads (PKS_THREADS overrides)");

    app.add_subcommand("presets", "list built-in scenario names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(analyze))
            return cmd_analyze(model_path, parts_path,
                               v0_opt->count() ? std::optional<double>(v0_value)
                                               : std::nullopt);
        if (app.got_subcommand(simulate)) return cmd_simulate(sim_source, sim_out, false);
        if (app.got_subcommand(selfsim)) return cmd_simulate(ss_source, ss_out, true);
        if (app.got_subcommand(sweep))
            return cmd_sweep(sw_source, sw_axis, sw_from, sw_to, sw_steps, sw_threads, sw_out);
        return cmd_presets();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    }
}

}  // namespace pks::cli
