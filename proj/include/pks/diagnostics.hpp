#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pks/field_ops.hpp"
#include "pks/grid.hpp"
#include "pks/kernel.hpp"
#include "pks/model.hpp"
#include "pks/state.hpp"

namespace pks {

namespace detail {

// Cells at or below 1e-14 of the field max contribute nothing to the
// log/ratio integrands; this also silences spectral undershoots.
inline double density_floor(const ScalarField2D& n) { return 1e-14 * n.max(); }

}  // namespace detail

// S[n] = integral of n log n.
inline double entropy(const ScalarField2D& n) {
    const double floor = detail::density_floor(n);
    double sum = 0.0;
    for (double v : n.v)
        if (v > floor) sum += v * std::log(v);
    return n.grid.h() * n.grid.h() * sum;
}

// Integral of n log+ n (positive part of the log), the entropy piece of A_t.
inline double positive_entropy(const ScalarField2D& n) {
    double sum = 0.0;
    for (double v : n.v)
        if (v > 1.0) sum += v * std::log(v);
    return n.grid.h() * n.grid.h() * sum;
}

// F[n] = integral of |grad n|^2 / n.
inline double fisher(const ScalarField2D& n) {
    const double floor = detail::density_floor(n);
    auto g = gradient_fd(n);
    double sum = 0.0;
    for (std::size_t m = 0; m < n.v.size(); ++m) {
        const double v = n.v[m];
        if (v > floor) sum += (g.x.v[m] * g.x.v[m] + g.y.v[m] * g.y.v[m]) / v;
    }
    return n.grid.h() * n.grid.h() * sum;
}

// E = sum_a chi_a^{-1} S[n_a] - 1/2 sum_a int n_a c_a, defined (and
// dissipated) when B is symmetric. Unit sensitivities give the plain form.
inline double free_energy(const std::vector<ScalarField2D>& fields,
                          const std::vector<ScalarField2D>& chemicals,
                          const CouplingModel& model) {
    if (!model.symmetric())
        throw std::invalid_argument("free_energy: requires symmetric coupling matrix");
    if (fields.size() != chemicals.size() || static_cast<int>(fields.size()) != model.species())
        throw std::invalid_argument("free_energy: species count mismatch");
    double e = 0.0;
    for (std::size_t a = 0; a < fields.size(); ++a) {
        e += entropy(fields[a]) / model.chi_at(static_cast<int>(a));
        double inter = 0.0;
        for (std::size_t m = 0; m < fields[a].v.size(); ++m)
            inter += fields[a].v[m] * chemicals[a].v[m];
        const double h = fields[a].grid.h();
        e -= 0.5 * h * h * inter;
    }
    return e;
}

inline double free_energy(const SimState& state, const CouplingModel& model,
                          const KernelTable& kernel) {
    auto res = poisson_solve(state.n, model.B, kernel);
    return free_energy(state.n, res.chemicals, model);
}

// D = sum_a chi_a^{-1} int n_a |grad log n_a - chi_a grad c_a|^2, the
// dissipation functional paired with the free energy above.
inline double dissipation(const std::vector<ScalarField2D>& fields,
                          const std::vector<VectorField2D>& grad_c, const CouplingModel& model) {
    if (fields.size() != grad_c.size() || static_cast<int>(fields.size()) != model.species())
        throw std::invalid_argument("dissipation: species count mismatch");
    double d = 0.0;
    for (std::size_t a = 0; a < fields.size(); ++a) {
        const double chi = model.chi_at(static_cast<int>(a));
        const double floor = detail::density_floor(fields[a]);
        auto g = gradient_fd(fields[a]);
        double sum = 0.0;
        for (std::size_t m = 0; m < fields[a].v.size(); ++m) {
            const double v = fields[a].v[m];
            if (v <= floor) continue;
            const double ex = g.x.v[m] / v - chi * grad_c[a].x.v[m];
            const double ey = g.y.v[m] / v - chi * grad_c[a].y.v[m];
            sum += v * (ex * ex + ey * ey);
        }
        const double h = fields[a].grid.h();
        d += h * h * sum / chi;
    }
    return d;
}

inline double dissipation(const SimState& state, const CouplingModel& model,
                          const KernelTable& kernel) {
    auto res = poisson_solve(state.n, model.B, kernel, /*compute_chemicals=*/false);
    return dissipation(state.n, res.gradients, model);
}

struct DiagnosticsRecord {
    double t = 0.0;
    std::vector<double> mass;
    double V = 0.0;  // total second moment
    std::vector<double> S;
    std::optional<double> E;  // absent for non-symmetric coupling
    double D = 0.0;
    std::vector<double> F;
    std::vector<double> L2;
    std::vector<double> Linf;
    std::vector<double> min_density;
    double cum_dissipation = 0.0;
    double A_t = 0.0;
};

// Builds records along a run: owns the trapezoid accumulation of the
// dissipation integral and the running sup in A_t.
class DiagnosticsAccumulator {
  public:
    explicit DiagnosticsAccumulator(CouplingModel model)
        : model_(std::move(model)), symmetric_(model_.symmetric()) {}

    DiagnosticsRecord sample(const SimState& state, const PoissonResult& solved) {
        const int k = state.species();
        if (k != model_.species())
            throw std::invalid_argument("diagnostics: species count mismatch");
        DiagnosticsRecord rec;
        rec.t = state.t;
        double logplus = 0.0;
        for (int a = 0; a < k; ++a) {
            const auto& n = state.n[a];
            rec.mass.push_back(integrate(n));
            rec.S.push_back(entropy(n));
            rec.F.push_back(fisher(n));
            rec.L2.push_back(l2_norm(n));
            rec.Linf.push_back(n.max());
            rec.min_density.push_back(n.min());
            rec.V += moment2(n);
            logplus += positive_entropy(n);
            if (!(rec.mass.back() > 0.0))
                throw std::runtime_error("diagnostics: non-positive species mass");
        }
        if (!(rec.V >= 0.0)) throw std::runtime_error("diagnostics: negative second moment");
        rec.D = dissipation(state.n, solved.gradients, model_);
        if (symmetric_) rec.E = free_energy(state.n, solved.chemicals, model_);

        if (has_prev_) cum_d_ += 0.5 * (rec.D + prev_d_) * (rec.t - prev_t_);
        sup_logplus_ = std::max(sup_logplus_, logplus);
        rec.cum_dissipation = cum_d_;
        rec.A_t = sup_logplus_ + cum_d_;
        prev_t_ = rec.t;
        prev_d_ = rec.D;
        has_prev_ = true;
        return rec;
    }

    DiagnosticsRecord sample(const SimState& state, const KernelTable& kernel) {
        return sample(state, poisson_solve(state.n, model_.B, kernel));
    }

  private:
    CouplingModel model_;
    bool symmetric_;
    bool has_prev_ = false;
    double prev_t_ = 0.0, prev_d_ = 0.0;
    double cum_d_ = 0.0;
    double sup_logplus_ = 0.0;
};

struct TrendFit {
    double slope = 0.0;
    double r2 = 1.0;
};

// Least-squares line through (t, V).
inline TrendFit slope_fit(const std::vector<DiagnosticsRecord>& records) {
    const std::size_t m = records.size();
    if (m < 10) throw std::invalid_argument("slope_fit: needs at least 10 samples");
    double tbar = 0.0, vbar = 0.0;
    for (const auto& r : records) {
        tbar += r.t;
        vbar += r.V;
    }
    tbar /= m;
    vbar /= m;
    double stt = 0.0, stv = 0.0, svv = 0.0;
    for (const auto& r : records) {
        stt += (r.t - tbar) * (r.t - tbar);
        stv += (r.t - tbar) * (r.V - vbar);
        svv += (r.V - vbar) * (r.V - vbar);
    }
    if (stt == 0.0) throw std::invalid_argument("slope_fit: degenerate time axis");
    TrendFit fit;
    fit.slope = stv / stt;
    double ssres = 0.0;
    for (const auto& r : records) {
        const double pred = vbar + fit.slope * (r.t - tbar);
        ssres += (r.V - pred) * (r.V - pred);
    }
    fit.r2 = (svv == 0.0) ? 1.0 : 1.0 - ssres / svv;
    return fit;
}

struct DecayFit {
    double sup_scaled = 0.0;
    bool monotone_tail = true;
};

// Tracks (1+t) * sum_a |n_a|_2^2 across a run. Self-similar records hold tau
// and profile norms; they convert via t = (e^{2 tau} - 1)/2 and
// |n|_2^2 = |N|_2^2 / (1 + 2t).
inline DecayFit decay_fit(const std::vector<DiagnosticsRecord>& records, SimMode mode) {
    std::vector<std::pair<double, double>> scaled;  // (t_phys, (1+t)*sum l2^2)
    for (const auto& r : records) {
        double t = r.t;
        double l2sq = 0.0;
        for (double l2 : r.L2) l2sq += l2 * l2;
        if (mode == SimMode::SelfSimilar) {
            t = 0.5 * (std::exp(2.0 * r.t) - 1.0);
            l2sq /= 1.0 + 2.0 * t;
        }
        scaled.emplace_back(t, (1.0 + t) * l2sq);
    }
    double tmin_pos = std::numeric_limits<double>::infinity(), tmax = 0.0;
    for (const auto& [t, v] : scaled) {
        if (t > 0.0) tmin_pos = std::min(tmin_pos, t);
        tmax = std::max(tmax, t);
    }
    if (!(tmax >= 10.0 * tmin_pos))
        throw std::invalid_argument("decay_fit: samples span less than a decade of t");

    DecayFit fit;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& [t, v] : scaled) {
        fit.sup_scaled = std::max(fit.sup_scaled, v);
        if (t >= tmax / 10.0) {
            if (v > prev * 1.05) fit.monotone_tail = false;
            prev = v;
        }
    }
    return fit;
}

}  // namespace pks
