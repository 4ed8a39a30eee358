#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace pks {

// Dense square matrix, row-major storage.
struct SquareMatrix {
    int n = 0;
    std::vector<double> a;

    SquareMatrix() = default;
    explicit SquareMatrix(int dim, double fill = 0.0)
        : n(dim), a(static_cast<std::size_t>(dim) * dim, fill) {
        if (dim < 1) throw std::invalid_argument("SquareMatrix: dimension must be >= 1");
    }
    SquareMatrix(std::initializer_list<std::initializer_list<double>> rows)
        : SquareMatrix(static_cast<int>(rows.size())) {
        int i = 0;
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != n)
                throw std::invalid_argument("SquareMatrix: ragged initializer");
            int j = 0;
            for (double v : row) (*this)(i, j++) = v;
            ++i;
        }
    }

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    bool symmetric() const {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if ((*this)(i, j) != (*this)(j, i)) return false;
        return true;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : a) m = std::max(m, std::abs(v));
        return m;
    }

    bool operator==(const SquareMatrix& o) const { return n == o.n && a == o.a; }
};

inline SquareMatrix positive_part(const SquareMatrix& B) {
    SquareMatrix P(B.n);
    for (std::size_t i = 0; i < B.a.size(); ++i) P.a[i] = std::max(B.a[i], 0.0);
    return P;
}

// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
// Dimensions here are tiny (<= 16), so a dependency-free O(n^3) sweep is plenty.
inline double largest_eigenvalue_symmetric(SquareMatrix A) {
    if (!A.symmetric()) throw std::invalid_argument("largest_eigenvalue_symmetric: matrix not symmetric");
    const int n = A.n;
    if (n == 1) return A(0, 0);

    auto off_norm2 = [&] {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += A(i, j) * A(i, j);
        return s;
    };
    const double scale = std::max(A.max_abs(), 1e-300);
    for (int sweep = 0; sweep < 100 && off_norm2() > 1e-30 * scale * scale; ++sweep) {
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (std::abs(apq) <= 1e-18 * scale) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    double lam = A(0, 0);
    for (int i = 1; i < n; ++i) lam = std::max(lam, A(i, i));
    return lam;
}

}  // namespace pks
