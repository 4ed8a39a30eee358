#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pks/diagnostics.hpp"
#include "pks/fft.hpp"
#include "pks/field_ops.hpp"
#include "pks/grid.hpp"
#include "pks/kernel.hpp"
#include "pks/model.hpp"
#include "pks/scenarios.hpp"
#include "pks/state.hpp"

namespace pks {

enum class RunStatus { Completed, BlowUpDetected, NegativityAbort };
enum class BlowUpIndicator { LinfThreshold, DtCollapse, SpectralTail };

inline const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Completed: return "Completed";
        case RunStatus::BlowUpDetected: return "BlowUpDetected";
        case RunStatus::NegativityAbort: return "NegativityAbort";
    }
    return "?";
}

inline const char* to_string(BlowUpIndicator i) {
    switch (i) {
        case BlowUpIndicator::LinfThreshold: return "LinfThreshold";
        case BlowUpIndicator::DtCollapse: return "DtCollapse";
        case BlowUpIndicator::SpectralTail: return "SpectralTail";
    }
    return "?";
}

struct RunOutcome {
    RunStatus status = RunStatus::Completed;
    double t_final = 0.0;
    std::optional<BlowUpIndicator> indicator;
};

namespace detail {

inline void check_consistent(const SimState& state, const CouplingModel& model,
                             const KernelTable& kernel) {
    if (state.species() != model.species())
        throw std::invalid_argument("dynamics: species count mismatch");
    for (const auto& f : state.n)
        if (f.grid != kernel.grid) throw std::invalid_argument("dynamics: grid mismatch");
}

// Two flux differences per cell with periodic wrap; the wrap makes the sum of
// every difference telescope to exactly zero, which is what keeps the discrete
// mass constant to roundoff.
inline ScalarField2D divergence_fd(const ScalarField2D& fx, const ScalarField2D& fy) {
    const auto& g = fx.grid;
    const int n = g.n;
    ScalarField2D out(g);
    const double inv2h = 1.0 / (2.0 * g.h());
    for (int i = 0; i < n; ++i) {
        const int ip = (i + 1) % n, im = (i + n - 1) % n;
        for (int j = 0; j < n; ++j) {
            const int jp = (j + 1) % n, jm = (j + n - 1) % n;
            out.at(i, j) =
                (fx.at(ip, j) - fx.at(im, j) + fy.at(i, jp) - fy.at(i, jm)) * inv2h;
        }
    }
    return out;
}

// Exact diffusion over time s in transform space.
inline ScalarField2D heat(const ScalarField2D& f, double s) {
    auto& fft = Fft2D::of(f.grid.n);
    thread_local std::vector<std::complex<double>> hat;
    fft.forward(f.v, hat);
    apply_heat_factor(hat, f.grid, s);
    ScalarField2D out(f.grid);
    fft.backward(hat, out.v);
    return out;
}

// Largest dt is rounded down to 24 mantissa bits so that runs related by an
// exact tagging/rescaling pick bitwise-identical step sequences.
inline double quantize_dt(double dt) {
    int e = 0;
    const double m = std::frexp(dt, &e);
    return std::ldexp(std::floor(m * 16777216.0) / 16777216.0, e);
}

}  // namespace detail

// Transport part of the right-hand side: -div(n (chi grad c - X)) with the
// drift X present only in self-similar mode.  The density factor is dealiased
// before the product; it decays at the boundary, so the truncation is benign.
// The gradient factor is used as assembled from transform space: it wraps
// discontinuously at the boundary and zeroing its top band would ring through
// the whole domain once differentiated.
inline std::vector<ScalarField2D> transport_term(const SimState& state, const CouplingModel& model,
                                                 const std::vector<VectorField2D>& grad_c) {
    const auto& g = state.grid();
    std::vector<ScalarField2D> out;
    out.reserve(state.n.size());
    for (int a = 0; a < state.species(); ++a) {
        const double chi = model.chi_at(a);
        ScalarField2D nd = dealias(state.n[a]);
        ScalarField2D fx(g), fy(g);
        if (state.mode == SimMode::SelfSimilar) {
            for (int i = 0; i < g.n; ++i)
                for (int j = 0; j < g.n; ++j) {
                    fx.at(i, j) = nd.at(i, j) * (chi * grad_c[a].x.at(i, j) - g.x(i));
                    fy.at(i, j) = nd.at(i, j) * (chi * grad_c[a].y.at(i, j) - g.x(j));
                }
        } else {
            for (std::size_t m = 0; m < nd.v.size(); ++m) {
                fx.v[m] = nd.v[m] * (chi * grad_c[a].x.v[m]);
                fy.v[m] = nd.v[m] * (chi * grad_c[a].y.v[m]);
            }
        }
        auto div = detail::divergence_fd(fx, fy);
        for (auto& v : div.v) v = -v;
        out.push_back(std::move(div));
    }
    return out;
}

inline std::vector<ScalarField2D> transport_term(const SimState& state, const CouplingModel& model,
                                                 const KernelTable& kernel) {
    detail::check_consistent(state, model, kernel);
    auto solved = poisson_solve(state.n, model.B, kernel, /*compute_chemicals=*/false);
    return transport_term(state, model, solved.gradients);
}

// Full semi-discrete right-hand side (diffusion + transport, plus the
// self-similar drift folded into the transport term).
inline std::vector<ScalarField2D> rhs(const SimState& state, const CouplingModel& model,
                                      const KernelTable& kernel) {
    auto out = transport_term(state, model, kernel);
    for (int a = 0; a < state.species(); ++a) {
        auto lap = spectral_laplacian(state.n[a]);
        for (std::size_t m = 0; m < lap.v.size(); ++m) out[a].v[m] += lap.v[m];
    }
    return out;
}

inline double adaptive_dt(const SimState& state, const CouplingModel& model,
                          const std::vector<VectorField2D>& grad_c, const StepperConfig& cfg) {
    const auto& g = state.grid();
    double vmax = 0.0, rmax = 0.0;
    for (int a = 0; a < state.species(); ++a) {
        const double chi = model.chi_at(a);
        double gm = 0.0;
        for (std::size_t m = 0; m < grad_c[a].x.v.size(); ++m)
            gm = std::max(gm, std::hypot(grad_c[a].x.v[m], grad_c[a].y.v[m]));
        vmax = std::max(vmax, chi * gm);
        double sm = 0.0;
        for (std::size_t m = 0; m < state.n[a].v.size(); ++m) {
            double s = 0.0;
            for (int b = 0; b < model.species(); ++b) s += model.B(a, b) * state.n[b].v[m];
            sm = std::max(sm, std::abs(s));
        }
        rmax = std::max(rmax, chi * sm);
    }
    double dt = cfg.dt_max;
    if (vmax > 0.0) dt = std::min(dt, cfg.cfl * g.h() / vmax);
    if (rmax > 0.0) dt = std::min(dt, cfg.cfl / rmax);
    if (state.mode == SimMode::SelfSimilar)
        dt = std::min(dt, cfg.cfl * g.h() / g.half_width);  // |X| <= L drift limit
    if (dt < cfg.dt_max) dt = detail::quantize_dt(dt);
    return std::max(dt, cfg.dt_min);
}

inline double adaptive_dt(const SimState& state, const CouplingModel& model,
                          const KernelTable& kernel, const StepperConfig& cfg) {
    detail::check_consistent(state, model, kernel);
    auto solved = poisson_solve(state.n, model.B, kernel, /*compute_chemicals=*/false);
    return adaptive_dt(state, model, solved.gradients, cfg);
}

// One integrating-factor midpoint step of size dt, reusing the stage-0
// chemical gradients (they depend only on the incoming state).
inline SimState step(const SimState& state, const CouplingModel& model, const KernelTable& kernel,
                     const std::vector<VectorField2D>& grad0, double dt) {
    auto g0 = transport_term(state, model, grad0);

    SimState half;
    half.t = state.t + 0.5 * dt;
    half.mode = state.mode;
    half.n.reserve(state.n.size());
    for (int a = 0; a < state.species(); ++a) {
        ScalarField2D tmp = state.n[a];
        for (std::size_t m = 0; m < tmp.v.size(); ++m) tmp.v[m] += 0.5 * dt * g0[a].v[m];
        half.n.push_back(detail::heat(tmp, 0.5 * dt));
    }

    auto solved1 = poisson_solve(half.n, model.B, kernel, /*compute_chemicals=*/false);
    auto g1 = transport_term(half, model, solved1.gradients);

    SimState next;
    next.t = state.t + dt;
    next.mode = state.mode;
    next.n.reserve(state.n.size());
    for (int a = 0; a < state.species(); ++a) {
        ScalarField2D base = detail::heat(state.n[a], 0.5 * dt);
        for (std::size_t m = 0; m < base.v.size(); ++m) base.v[m] += dt * g1[a].v[m];
        next.n.push_back(detail::heat(base, 0.5 * dt));
    }
    return next;
}

inline SimState step(const SimState& state, const CouplingModel& model, const KernelTable& kernel,
                     double dt) {
    detail::check_consistent(state, model, kernel);
    auto solved = poisson_solve(state.n, model.B, kernel, /*compute_chemicals=*/false);
    return step(state, model, kernel, solved.gradients, dt);
}

inline SimState step(const SimState& state, const CouplingModel& model, const KernelTable& kernel,
                     const StepperConfig& cfg) {
    detail::check_consistent(state, model, kernel);
    auto solved = poisson_solve(state.n, model.B, kernel, /*compute_chemicals=*/false);
    const double dt = adaptive_dt(state, model, solved.gradients, cfg);
    return step(state, model, kernel, solved.gradients, dt);
}

inline std::optional<BlowUpIndicator> detect_blowup(const SimState& state,
                                                    const StepperConfig& cfg, double initial_linf,
                                                    double current_dt) {
    for (const auto& f : state.n)
        if (f.max() > cfg.blowup_linf_factor * initial_linf) return BlowUpIndicator::LinfThreshold;
    for (const auto& f : state.n)
        if (spectral_tail_fraction(f) > cfg.blowup_tail_fraction)
            return BlowUpIndicator::SpectralTail;
    if (current_dt <= cfg.dt_min) return BlowUpIndicator::DtCollapse;
    return std::nullopt;
}

enum class MapDirection { ToSelfSimilar, ToPhysical };

// Change of variables X = x/R, tau = log R, R = sqrt(1+2t), n = R^-2 N(x/R),
// resampled bilinearly onto the same grid.
inline SimState map_self_similar(const SimState& state, MapDirection direction) {
    const auto& g = state.grid();
    const bool to_ss = direction == MapDirection::ToSelfSimilar;
    if (to_ss && state.mode != SimMode::Physical)
        throw std::invalid_argument("map_self_similar: state is not in physical variables");
    if (!to_ss && state.mode != SimMode::SelfSimilar)
        throw std::invalid_argument("map_self_similar: state is not in self-similar variables");

    const double R = to_ss ? std::sqrt(1.0 + 2.0 * state.t) : std::exp(state.t);
    const double scale = to_ss ? R : 1.0 / R;        // source coordinate multiplier
    const double amp = to_ss ? R * R : 1.0 / (R * R);

    auto bilerp = [&](const ScalarField2D& f, double px, double py) {
        const double u = (px + g.half_width) / g.h() - 0.5;
        const double v = (py + g.half_width) / g.h() - 0.5;
        const int i0 = static_cast<int>(std::floor(u)), j0 = static_cast<int>(std::floor(v));
        const double wu = u - i0, wv = v - j0;
        auto val = [&](int i, int j) {
            return (i < 0 || i >= g.n || j < 0 || j >= g.n) ? 0.0 : f.at(i, j);
        };
        return (1 - wu) * ((1 - wv) * val(i0, j0) + wv * val(i0, j0 + 1)) +
               wu * ((1 - wv) * val(i0 + 1, j0) + wv * val(i0 + 1, j0 + 1));
    };

    SimState out;
    out.mode = to_ss ? SimMode::SelfSimilar : SimMode::Physical;
    out.t = to_ss ? std::log(R) : 0.5 * (R * R - 1.0);
    for (const auto& f : state.n) {
        ScalarField2D mapped(g);
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                mapped.at(i, j) = amp * bilerp(f, scale * g.x(i), scale * g.x(j));
        const double m0 = integrate(f), m1 = integrate(mapped);
        if (std::abs(m1 - m0) > 1e-6 * std::abs(m0))
            throw std::domain_error("map_self_similar: mass not preserved (support leaves grid)");
        out.n.push_back(std::move(mapped));
    }
    return out;
}

struct RunResult {
    std::vector<DiagnosticsRecord> records;
    RunOutcome outcome;
    SimState final_state;
};

using SnapshotSink = std::function<void(const SimState&)>;

inline RunResult run(const ScenarioConfig& cfg, const SnapshotSink& sink = {}) {
    RunResult result;
    SimState state = build_initial(cfg);
    auto kernel = build_kernel(cfg.grid);
    DiagnosticsAccumulator acc(cfg.model);

    std::vector<double> snaps = cfg.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t snap_i = 0;
    const double teps = 1e-12 * std::max(1.0, cfg.t_end);

    result.records.push_back(acc.sample(state, kernel));
    while (sink && snap_i < snaps.size() && snaps[snap_i] <= teps) {
        sink(state);
        ++snap_i;
    }
    if (!sink) snap_i = snaps.size();

    double initial_linf = 0.0;
    for (const auto& f : state.n) initial_linf = std::max(initial_linf, f.max());

    long sample_k = 1;
    double next_sample = cfg.sample_dt;

    while (state.t < cfg.t_end - teps) {
        auto solved = poisson_solve(state.n, cfg.model.B, kernel, /*compute_chemicals=*/false);
        const double dt_adaptive = adaptive_dt(state, cfg.model, solved.gradients, cfg.stepper);

        double next_event = cfg.t_end;
        if (next_sample < next_event) next_event = next_sample;
        if (snap_i < snaps.size() && snaps[snap_i] < next_event) next_event = snaps[snap_i];

        double dt = dt_adaptive;
        bool landed = false;
        if (state.t + dt >= next_event - teps) {
            dt = next_event - state.t;
            landed = true;
        }

        state = step(state, cfg.model, kernel, solved.gradients, dt);
        if (landed) state.t = next_event;

        for (const auto& f : state.n)
            if (!f.finite()) throw std::runtime_error("dynamics: non-finite values produced");

        if (auto ind = detect_blowup(state, cfg.stepper, initial_linf, dt_adaptive)) {
            result.outcome.status = RunStatus::BlowUpDetected;
            result.outcome.indicator = ind;
            break;
        }

        // negativity_tolerance is a monitor level (recorded via min_density and
        // asserted on subcritical runs); the abort fires only when the state has
        // lost meaning.  A genuine collapse rings down to roughly -10% of max
        // before the spectral detector trips, so the abort sits well above that.
        bool aborted = false;
        for (const auto& f : state.n) {
            if (f.min() < -0.25 * f.max()) {
                result.outcome.status = RunStatus::NegativityAbort;
                aborted = true;
                break;
            }
        }
        if (aborted) break;

        if (landed) {
            while (next_sample <= state.t + teps) {
                result.records.push_back(acc.sample(state, kernel));
                ++sample_k;
                next_sample = sample_k * cfg.sample_dt;
            }
            while (snap_i < snaps.size() && snaps[snap_i] <= state.t + teps) {
                sink(state);
                ++snap_i;
            }
        }
    }

    if (result.outcome.status == RunStatus::Completed &&
        result.records.back().t < state.t - teps)
        result.records.push_back(acc.sample(state, kernel));
    result.outcome.t_final = state.t;
    result.final_state = std::move(state);
    return result;
}

}  // namespace pks
