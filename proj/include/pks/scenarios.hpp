#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pks/field_ops.hpp"
#include "pks/grid.hpp"
#include "pks/model.hpp"
#include "pks/state.hpp"

namespace pks {

struct GaussianBlob {
    double mass = 0.0;
    double cx = 0.0, cy = 0.0;
    double sigma = 0.0;
};

struct ScenarioConfig {
    std::string name;
    GridSpec grid{256, 8.0};
    CouplingModel model;
    std::vector<std::vector<GaussianBlob>> initial;  // blobs per species
    // raw per-species fields override the blob list when present (file input)
    std::optional<std::vector<ScalarField2D>> initial_fields;
    double t_end = 1.0;
    double sample_dt = 0.01;
    StepperConfig stepper;
    SimMode mode = SimMode::Physical;
    std::vector<double> snapshot_times;
    std::string out_dir;
};

namespace detail {

// Mass fraction of a blob lying inside the safe box [-L/2, L/2]^2.
inline double blob_box_fraction(const GaussianBlob& b, double half_width) {
    const double s = b.sigma * std::sqrt(2.0);
    const double edge = 0.5 * half_width;
    auto axis = [&](double c) {
        return 0.5 * (std::erf((edge - c) / s) - std::erf((-edge - c) / s));
    };
    return axis(b.cx) * axis(b.cy);
}

}  // namespace detail

inline void validate(const ScenarioConfig& cfg) {
    cfg.grid.validate();
    cfg.model.validate();
    cfg.stepper.validate();
    if (!(cfg.t_end >= 0.0)) throw std::invalid_argument("scenario: t_end must be >= 0");
    if (!(cfg.sample_dt > 0.0)) throw std::invalid_argument("scenario: sample_dt must be > 0");
    for (double ts : cfg.snapshot_times)
        if (!(ts >= 0.0 && ts <= cfg.t_end))
            throw std::invalid_argument("scenario: snapshot time outside [0, t_end]");

    const int k = cfg.model.species();
    if (cfg.initial_fields) {
        if (static_cast<int>(cfg.initial_fields->size()) != k)
            throw std::invalid_argument("scenario: raw initial fields must cover every species");
        for (int a = 0; a < k; ++a) {
            const auto& f = (*cfg.initial_fields)[a];
            if (f.grid != cfg.grid) throw std::invalid_argument("scenario: raw field grid mismatch");
            const double m = integrate(f);
            if (std::abs(m - cfg.model.M[a]) > 1e-8 * cfg.model.M[a])
                throw std::invalid_argument("scenario: raw field mass disagrees with model");
        }
        return;
    }

    if (static_cast<int>(cfg.initial.size()) != k)
        throw std::invalid_argument("scenario: initial data must cover every species");
    const double safe = 0.5 * cfg.grid.half_width;
    for (int a = 0; a < k; ++a) {
        if (cfg.initial[a].empty())
            throw std::invalid_argument("scenario: species without initial blobs");
        double sum = 0.0;
        for (const auto& b : cfg.initial[a]) {
            if (!(b.mass > 0.0) || !(b.sigma > 0.0))
                throw std::invalid_argument("scenario: blob mass and sigma must be positive");
            if (std::abs(b.cx) + 3.0 * b.sigma > safe || std::abs(b.cy) + 3.0 * b.sigma > safe)
                throw std::invalid_argument("scenario: blob support escapes [-L/2, L/2]^2");
            if (1.0 - detail::blob_box_fraction(b, cfg.grid.half_width) > 1e-8)
                throw std::invalid_argument("scenario: blob tail mass outside the safe box");
            sum += b.mass;
        }
        if (std::abs(sum - cfg.model.M[a]) > 1e-10 * cfg.model.M[a])
            throw std::invalid_argument("scenario: blob masses disagree with model masses");
    }
}

inline SimState build_initial(const ScenarioConfig& cfg) {
    validate(cfg);
    SimState state;
    state.t = 0.0;
    state.mode = cfg.mode;
    if (cfg.initial_fields) {
        state.n = *cfg.initial_fields;
        return state;
    }
    const int k = cfg.model.species();
    for (int a = 0; a < k; ++a) {
        ScalarField2D f(cfg.grid);
        for (const auto& b : cfg.initial[a]) {
            const double amp = b.mass / (2.0 * M_PI * b.sigma * b.sigma);
            const double inv = 1.0 / (2.0 * b.sigma * b.sigma);
            for (int i = 0; i < cfg.grid.n; ++i) {
                const double dx = cfg.grid.x(i) - b.cx;
                for (int j = 0; j < cfg.grid.n; ++j) {
                    const double dy = cfg.grid.x(j) - b.cy;
                    f.at(i, j) += amp * std::exp(-(dx * dx + dy * dy) * inv);
                }
            }
        }
        const double scale = cfg.model.M[a] / integrate(f);
        for (auto& v : f.v) v *= scale;
        state.n.push_back(std::move(f));
    }
    return state;
}

inline std::vector<std::string> preset_names() {
    return {"competition_subcritical", "competition_supercritical", "cooperation",
            "single_subcritical",      "single_supercritical",      "chasing_escaping",
            "tridiagonal_nonsymmetric"};
}

inline ScenarioConfig preset(const std::string& name) {
    ScenarioConfig cfg;
    cfg.name = name;
    auto blob = [](double mass, double sigma, double cx = 0.0, double cy = 0.0) {
        return GaussianBlob{mass, cx, cy, sigma};
    };
    if (name == "competition_subcritical") {
        cfg.model = CouplingModel(SquareMatrix{{0, 1}, {1, 0}}, {3.9 * pi, 12 * pi});
        cfg.initial = {{blob(3.9 * pi, 0.5)}, {blob(12 * pi, 0.5)}};
        cfg.t_end = 2.0;
        cfg.sample_dt = 0.02;
    } else if (name == "competition_supercritical") {
        cfg.model = CouplingModel(SquareMatrix{{0, 1}, {1, 0}}, {5 * pi, 100 * pi});
        cfg.initial = {{blob(5 * pi, 0.25)}, {blob(100 * pi, 0.25)}};
        cfg.t_end = 1.0;
        cfg.sample_dt = 0.005;
    } else if (name == "cooperation") {
        cfg.model = CouplingModel(SquareMatrix{{1, 1}, {1, 1}}, {2 * pi, 3 * pi}, {1.2, 0.8});
        cfg.initial = {{blob(2 * pi, 0.5)}, {blob(3 * pi, 0.5)}};
        cfg.t_end = 1.0;
        cfg.sample_dt = 0.01;
    } else if (name == "single_subcritical") {
        cfg.model = CouplingModel(SquareMatrix{{1}}, {4 * pi});
        cfg.initial = {{blob(4 * pi, 0.5)}};
        cfg.t_end = 1.0;
        cfg.sample_dt = 0.01;
    } else if (name == "single_supercritical") {
        cfg.model = CouplingModel(SquareMatrix{{1}}, {16 * pi});
        cfg.initial = {{blob(16 * pi, 0.25)}};
        cfg.t_end = 1.0;
        cfg.sample_dt = 0.002;
    } else if (name == "chasing_escaping") {
        cfg.model = CouplingModel(SquareMatrix{{0, 1}, {-1, 0}}, {4 * pi, 4 * pi});
        cfg.initial = {{blob(4 * pi, 0.5, -0.75, 0.0)}, {blob(4 * pi, 0.5, 0.75, 0.0)}};
        cfg.t_end = 2.0;
        cfg.sample_dt = 0.02;
    } else if (name == "tridiagonal_nonsymmetric") {
        cfg.model =
            CouplingModel(SquareMatrix{{0, 2, 0}, {1, 0, 6}, {0, 3, 0}}, {2 * pi, 2 * pi, pi});
        cfg.initial = {{blob(2 * pi, 0.5)}, {blob(2 * pi, 0.5, 0.5, 0.0)}, {blob(pi, 0.5, -0.5, 0.0)}};
        cfg.t_end = 0.5;
        cfg.sample_dt = 0.01;
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    return cfg;
}

}  // namespace pks
