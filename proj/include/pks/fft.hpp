#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "pks/grid.hpp"

namespace pks {

// The FFTW planner is not thread-safe; executions on distinct plans are.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Real-to-complex transform pair for one square size, with plan-owned buffers.
// FFTW_ESTIMATE keeps plan selection (and therefore output bits) deterministic.
class Fft2D {
  public:
    explicit Fft2D(int n) : n_(n), nc_(static_cast<std::size_t>(n) * (n / 2 + 1)) {
        real_ = fftw_alloc_real(static_cast<std::size_t>(n) * n);
        cplx_ = fftw_alloc_complex(nc_);
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd_ = fftw_plan_dft_r2c_2d(n, n, real_, cplx_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_2d(n, n, cplx_, real_, FFTW_ESTIMATE);
    }
    ~Fft2D() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(cplx_);
    }
    Fft2D(const Fft2D&) = delete;
    Fft2D& operator=(const Fft2D&) = delete;

    int n() const { return n_; }
    std::size_t spectral_size() const { return nc_; }

    // Unnormalized r2c.
    void forward(const std::vector<double>& src, std::vector<std::complex<double>>& dst) {
        std::memcpy(real_, src.data(), sizeof(double) * src.size());
        fftw_execute(fwd_);
        dst.resize(nc_);
        std::memcpy(dst.data(), cplx_, sizeof(fftw_complex) * nc_);
    }

    // c2r normalized by 1/n^2 (round trip is the identity).
    void backward(const std::vector<std::complex<double>>& src, std::vector<double>& dst) {
        std::memcpy(cplx_, src.data(), sizeof(fftw_complex) * nc_);
        fftw_execute(bwd_);
        dst.resize(static_cast<std::size_t>(n_) * n_);
        const double norm = 1.0 / (static_cast<double>(n_) * n_);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = real_[i] * norm;
    }

    // Workers in a sweep each get their own plans via this per-thread cache.
    static Fft2D& of(int n) {
        thread_local std::map<int, std::unique_ptr<Fft2D>> cache;
        auto& slot = cache[n];
        if (!slot) slot = std::make_unique<Fft2D>(n);
        return *slot;
    }

  private:
    int n_;
    std::size_t nc_;
    double* real_;
    fftw_complex* cplx_;
    fftw_plan fwd_, bwd_;
};

// Signed mode index m~ for row/column m of an n-point transform.
inline int mode_index(int m, int n) { return (m <= n / 2) ? m : m - n; }

// Physical wavenumber for the periodic extension of [-L, L].
inline double wavenumber(int m, int n, double half_width) {
    return M_PI * mode_index(m, n) / half_width;
}

// Zero every mode with max(|mx|, |my|) above n/3 (two-thirds rule).
inline void dealias_spectrum(std::vector<std::complex<double>>& hat, int n) {
    const int cut = n / 3;
    const int ncols = n / 2 + 1;
    for (int i = 0; i < n; ++i) {
        const int mi = std::abs(mode_index(i, n));
        for (int j = 0; j < ncols; ++j) {
            if (mi > cut || j > cut) hat[static_cast<std::size_t>(i) * ncols + j] = 0.0;
        }
    }
}

inline ScalarField2D dealias(const ScalarField2D& f) {
    auto& fft = Fft2D::of(f.grid.n);
    std::vector<std::complex<double>> hat;
    fft.forward(f.v, hat);
    dealias_spectrum(hat, f.grid.n);
    ScalarField2D out(f.grid);
    fft.backward(hat, out.v);
    return out;
}

// exp(-|k|^2 dt) multiplier applied in place.
inline void apply_heat_factor(std::vector<std::complex<double>>& hat, const GridSpec& g,
                              double dt) {
    const int n = g.n;
    const int ncols = n / 2 + 1;
    for (int i = 0; i < n; ++i) {
        const double kx = wavenumber(i, n, g.half_width);
        for (int j = 0; j < ncols; ++j) {
            const double ky = wavenumber(j, n, g.half_width);
            hat[static_cast<std::size_t>(i) * ncols + j] *= std::exp(-(kx * kx + ky * ky) * dt);
        }
    }
}

inline ScalarField2D spectral_laplacian(const ScalarField2D& f) {
    auto& fft = Fft2D::of(f.grid.n);
    std::vector<std::complex<double>> hat;
    fft.forward(f.v, hat);
    const int n = f.grid.n;
    const int ncols = n / 2 + 1;
    for (int i = 0; i < n; ++i) {
        const double kx = wavenumber(i, n, f.grid.half_width);
        for (int j = 0; j < ncols; ++j) {
            const double ky = wavenumber(j, n, f.grid.half_width);
            hat[static_cast<std::size_t>(i) * ncols + j] *= -(kx * kx + ky * ky);
        }
    }
    ScalarField2D out(f.grid);
    fft.backward(hat, out.v);
    return out;
}

// Fraction of spectral energy carried by the dealiased-away band.
inline double spectral_tail_fraction(const ScalarField2D& f) {
    auto& fft = Fft2D::of(f.grid.n);
    std::vector<std::complex<double>> hat;
    fft.forward(f.v, hat);
    const int n = f.grid.n;
    const int ncols = n / 2 + 1;
    const int cut = n / 3;
    double total = 0.0, tail = 0.0;
    for (int i = 0; i < n; ++i) {
        const int mi = std::abs(mode_index(i, n));
        for (int j = 0; j < ncols; ++j) {
            // r2c stores half the spectrum; interior columns stand for a conjugate pair
            const double w = (j == 0 || j == n / 2) ? 1.0 : 2.0;
            const double e = w * std::norm(hat[static_cast<std::size_t>(i) * ncols + j]);
            total += e;
            if (mi > cut || j > cut) tail += e;
        }
    }
    return total > 0.0 ? tail / total : 0.0;
}

}  // namespace pks
