#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace pks {

// Uniform cell-centered grid on [-L, L]^2.
struct GridSpec {
    int n = 0;
    double half_width = 0.0;

    GridSpec() = default;
    GridSpec(int n_, double half_width_) : n(n_), half_width(half_width_) { validate(); }

    void validate() const {
        if (n < 16 || (n & (n - 1)) != 0)
            throw std::invalid_argument("GridSpec: n must be a power of two >= 16");
        if (!(half_width > 0.0)) throw std::invalid_argument("GridSpec: half_width must be positive");
    }

    double h() const { return 2.0 * half_width / n; }
    double x(int i) const { return -half_width + (i + 0.5) * h(); }
    std::size_t cells() const { return static_cast<std::size_t>(n) * n; }

    bool operator==(const GridSpec& o) const { return n == o.n && half_width == o.half_width; }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

struct ScalarField2D {
    GridSpec grid;
    std::vector<double> v;  // row-major, index i*n + j for cell (x_i, y_j)

    ScalarField2D() = default;
    explicit ScalarField2D(const GridSpec& g, double fill = 0.0) : grid(g), v(g.cells(), fill) {}

    double& at(int i, int j) { return v[static_cast<std::size_t>(i) * grid.n + j]; }
    double at(int i, int j) const { return v[static_cast<std::size_t>(i) * grid.n + j]; }

    double max_abs() const {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double max() const {
        double m = v.empty() ? 0.0 : v[0];
        for (double x : v) m = std::max(m, x);
        return m;
    }
    double min() const {
        double m = v.empty() ? 0.0 : v[0];
        for (double x : v) m = std::min(m, x);
        return m;
    }
    bool finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

struct VectorField2D {
    ScalarField2D x, y;

    VectorField2D() = default;
    explicit VectorField2D(const GridSpec& g) : x(g), y(g) {}
    const GridSpec& grid() const { return x.grid; }
};

inline ScalarField2D make_field(const GridSpec& g,
                                const std::function<double(double, double)>& f) {
    ScalarField2D out(g);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) out.at(i, j) = f(g.x(i), g.x(j));
    return out;
}

inline ScalarField2D gaussian_field(const GridSpec& g, double mass, double cx, double cy,
                                    double sigma) {
    const double amp = mass / (2.0 * M_PI * sigma * sigma);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    return make_field(g, [&](double x, double y) {
        const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        return amp * std::exp(-r2 * inv2s2);
    });
}

}  // namespace pks
