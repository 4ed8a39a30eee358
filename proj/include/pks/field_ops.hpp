#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "pks/fft.hpp"
#include "pks/grid.hpp"
#include "pks/kernel.hpp"
#include "pks/matrix.hpp"

namespace pks {

inline double integrate(const ScalarField2D& f) {
    double s = 0.0;
    for (double x : f.v) s += x;
    return s * f.grid.h() * f.grid.h();
}

inline double moment2(const ScalarField2D& f) {
    const int n = f.grid.n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = f.grid.x(i);
        for (int j = 0; j < n; ++j) {
            const double y = f.grid.x(j);
            s += f.at(i, j) * (x * x + y * y);
        }
    }
    return s * f.grid.h() * f.grid.h();
}

inline double l2_norm(const ScalarField2D& f) {
    double s = 0.0;
    for (double x : f.v) s += x * x;
    return std::sqrt(s * f.grid.h() * f.grid.h());
}

// 4th-order centered differences; 2nd-order in the two-cell boundary band.
inline VectorField2D gradient_fd(const ScalarField2D& f) {
    const int n = f.grid.n;
    const double h = f.grid.h();
    VectorField2D g(f.grid);

    auto stencil = [&](auto value, int m) -> double {
        if (m >= 2 && m < n - 2)
            return (value(m - 2) - 8.0 * value(m - 1) + 8.0 * value(m + 1) - value(m + 2)) /
                   (12.0 * h);
        if (m == 0) return (-3.0 * value(0) + 4.0 * value(1) - value(2)) / (2.0 * h);
        if (m == n - 1) return (3.0 * value(n - 1) - 4.0 * value(n - 2) + value(n - 3)) / (2.0 * h);
        return (value(m + 1) - value(m - 1)) / (2.0 * h);
    };

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            g.x.at(i, j) = stencil([&](int m) { return f.at(m, j); }, i);
            g.y.at(i, j) = stencil([&](int m) { return f.at(i, m); }, j);
        }
    return g;
}

// Max interior defect of the 5-point -laplacian against rhs, relative to max|rhs|.
inline double laplacian_residual(const ScalarField2D& c, const ScalarField2D& rhs) {
    if (c.grid != rhs.grid) throw std::invalid_argument("laplacian_residual: grid mismatch");
    const int n = c.grid.n;
    const double h2 = c.grid.h() * c.grid.h();
    const double denom = rhs.max_abs();
    double worst = 0.0;
    for (int i = 8; i < n - 8; ++i)
        for (int j = 8; j < n - 8; ++j) {
            const double lap = (c.at(i + 1, j) + c.at(i - 1, j) + c.at(i, j + 1) +
                                c.at(i, j - 1) - 4.0 * c.at(i, j)) / h2;
            worst = std::max(worst, std::abs(-lap - rhs.at(i, j)));
        }
    return denom > 0.0 ? worst / denom : worst;
}

struct PoissonResult {
    std::vector<ScalarField2D> chemicals;
    std::vector<VectorField2D> gradients;
};

namespace detail {

// Zero-pad an n-grid field into the (2n)^2 buffer and take its transform.
inline void padded_forward(const ScalarField2D& f, std::vector<double>& pad,
                           std::vector<std::complex<double>>& hat) {
    const int n = f.grid.n;
    const int d = 2 * n;
    pad.assign(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) pad[static_cast<std::size_t>(i) * d + j] = f.at(i, j);
    Fft2D::of(d).forward(pad, hat);
}

inline void crop_into(const std::vector<double>& big, ScalarField2D& out) {
    const int n = out.grid.n;
    const int d = 2 * n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = big[static_cast<std::size_t>(i) * d + j];
}

}  // namespace detail

// c_alpha = K * (sum_beta b_ab n_beta), gradients via the tabulated grad-K;
// zero-padded doubled-grid convolution gives free-space (no-image) semantics.
inline PoissonResult poisson_solve(const std::vector<ScalarField2D>& densities,
                                   const SquareMatrix& B, const KernelTable& kernel,
                                   bool compute_chemicals = true) {
    if (B.n != static_cast<int>(densities.size()))
        throw std::invalid_argument("poisson_solve: dimension mismatch");
    for (const auto& f : densities)
        if (f.grid != kernel.grid) throw std::invalid_argument("poisson_solve: grid mismatch");

    const int k = B.n;
    const int d = kernel.doubled();
    auto& fft = Fft2D::of(d);

    std::vector<std::vector<std::complex<double>>> density_hats(k);
    std::vector<double> pad;
    for (int b = 0; b < k; ++b) detail::padded_forward(densities[b], pad, density_hats[b]);

    PoissonResult res;
    res.chemicals.assign(compute_chemicals ? k : 0, ScalarField2D());
    res.gradients.assign(k, VectorField2D());

    const std::size_t nc = density_hats.empty() ? 0 : density_hats[0].size();
    std::vector<std::complex<double>> source(nc), prod(nc);
    std::vector<double> big;
    for (int a = 0; a < k; ++a) {
        std::fill(source.begin(), source.end(), std::complex<double>(0.0));
        for (int b = 0; b < k; ++b) {
            const double w = B(a, b);
            if (w == 0.0) continue;
            for (std::size_t m = 0; m < nc; ++m) source[m] += w * density_hats[b][m];
        }
        auto convolve = [&](const std::vector<std::complex<double>>& khat, ScalarField2D& out) {
            for (std::size_t m = 0; m < nc; ++m) prod[m] = khat[m] * source[m];
            fft.backward(prod, big);
            out = ScalarField2D(kernel.grid);
            detail::crop_into(big, out);
        };
        if (compute_chemicals) convolve(kernel.k_hat, res.chemicals[a]);
        res.gradients[a] = VectorField2D(kernel.grid);
        convolve(kernel.gkx_hat, res.gradients[a].x);
        convolve(kernel.gky_hat, res.gradients[a].y);
    }
    return res;
}

// Brute-force counterpart of the fast convolution; test oracle only.
inline ScalarField2D direct_convolution_oracle(const ScalarField2D& f, const KernelTable& kernel) {
    if (f.grid != kernel.grid) throw std::invalid_argument("direct_convolution_oracle: grid mismatch");
    if (f.grid.n > 64) throw std::invalid_argument("direct_convolution_oracle: grid too large (n <= 64)");
    const int n = f.grid.n;
    const int d = kernel.doubled();
    ScalarField2D out(f.grid);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int p = 0; p < n; ++p) {
                const int mi = ((i - p) % d + d) % d;
                for (int q = 0; q < n; ++q) {
                    const int mj = ((j - q) % d + d) % d;
                    s += kernel.k_values[kernel.wrap_index(mi, mj)] * f.at(p, q);
                }
            }
            out.at(i, j) = s * f.grid.h() * f.grid.h();
        }
    return out;
}

}  // namespace pks
