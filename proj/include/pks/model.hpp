#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pks/matrix.hpp"

namespace pks {

inline constexpr double pi = std::numbers::pi;
inline constexpr double eight_pi = 8.0 * std::numbers::pi;

// Species subsets are bitmasks over 0-based species indices; the cap keeps
// full 2^k enumeration trivial.
inline constexpr int max_species = 16;

using Subset = std::uint32_t;

inline Subset full_subset(int k) { return (k == 32) ? ~0u : ((1u << k) - 1u); }
inline int subset_size(Subset s) { return __builtin_popcount(s); }

inline std::vector<int> subset_members(Subset s) {
    std::vector<int> out;
    for (int i = 0; s != 0; ++i, s >>= 1)
        if (s & 1u) out.push_back(i);
    return out;
}

// Coupling matrix B, masses M and sensitivities chi for one model instance.
struct CouplingModel {
    SquareMatrix B;
    std::vector<double> M;
    std::vector<double> chi;  // empty means all ones

    CouplingModel() = default;
    CouplingModel(SquareMatrix B_, std::vector<double> M_, std::vector<double> chi_ = {})
        : B(std::move(B_)), M(std::move(M_)), chi(std::move(chi_)) {
        if (chi.empty()) chi.assign(M.size(), 1.0);
        validate();
    }

    int species() const { return B.n; }
    bool symmetric() const { return B.symmetric(); }
    double chi_at(int a) const { return chi.empty() ? 1.0 : chi[a]; }
    bool unit_chi() const {
        for (double c : chi)
            if (c != 1.0) return false;
        return true;
    }

    void validate() const {
        if (B.n < 1) throw std::invalid_argument("model: at least one species required");
        if (B.n > max_species) throw std::invalid_argument("model: species count exceeds enumeration cap 16");
        if (static_cast<int>(M.size()) != B.n) throw std::invalid_argument("model: len(M) != dim(B)");
        if (static_cast<int>(chi.size()) != B.n) throw std::invalid_argument("model: len(chi) != dim(B)");
        for (double m : M)
            if (!(m > 0.0)) throw std::invalid_argument("model: masses must be positive");
        for (double c : chi)
            if (!(c > 0.0)) throw std::invalid_argument("model: sensitivities must be positive");
    }
};

namespace detail {

// Q over a subset for an arbitrary coefficient matrix (shared by the public
// q_functional and the decomposition checker).
inline double q_of(const SquareMatrix& A, const std::vector<double>& M, Subset J) {
    if (J == 0) throw std::invalid_argument("q_functional: empty subset");
    double num = 0.0, den = 0.0;
    const auto members = subset_members(J);
    if (!members.empty() && members.back() >= A.n)
        throw std::invalid_argument("q_functional: subset exceeds species count");
    for (int a : members) {
        den += M[a];
        for (int b : members) num += A(a, b) * M[a] * M[b];
    }
    return num / den;
}

}  // namespace detail

inline double q_functional(const CouplingModel& m, Subset J, bool use_positive_part) {
    m.validate();
    return use_positive_part ? detail::q_of(positive_part(m.B), m.M, J)
                             : detail::q_of(m.B, m.M, J);
}

enum class Verdict { Subcritical, Supercritical, Indeterminate };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Subcritical: return "Subcritical";
        case Verdict::Supercritical: return "Supercritical";
        default: return "Indeterminate";
    }
}

struct SubsetVerdict {
    Verdict verdict = Verdict::Indeterminate;
    double q_full = 0.0;  // Q_{B+,M} over the full index set
    std::optional<std::pair<Subset, double>> worst_subset;  // maximizing proper subset (B+)
};

// Strict-inequality classification with equality cases (relative tolerance
// 1e-12) deliberately reported as Indeterminate.
inline SubsetVerdict subcritical_check(const CouplingModel& m) {
    m.validate();
    if (!m.symmetric())
        throw std::invalid_argument("subcritical_check: coupling matrix must be symmetric");

    const SquareMatrix Bp = positive_part(m.B);
    const Subset full = full_subset(m.species());
    SubsetVerdict out;
    out.q_full = detail::q_of(Bp, m.M, full);
    const double q_signed = detail::q_of(m.B, m.M, full);

    for (Subset J = 1; J < full; ++J) {
        const double q = detail::q_of(Bp, m.M, J);
        if (!out.worst_subset || q > out.worst_subset->second) out.worst_subset = {J, q};
    }

    const double tol = 1e-12 * std::max({eight_pi, std::abs(out.q_full), std::abs(q_signed)});
    const bool bp_nonzero = Bp.max_abs() > 0.0;
    const bool full_ok = out.q_full < eight_pi - tol;
    const bool subsets_ok = !out.worst_subset || out.worst_subset->second < out.q_full - tol;

    if (bp_nonzero && full_ok && subsets_ok)
        out.verdict = Verdict::Subcritical;
    else if (q_signed > eight_pi + tol)
        out.verdict = Verdict::Supercritical;
    else
        out.verdict = Verdict::Indeterminate;
    return out;
}

inline double lambda_J(const SquareMatrix& A, const std::vector<double>& M, Subset J) {
    if (static_cast<int>(M.size()) != A.n) throw std::invalid_argument("lambda_J: dimension mismatch");
    if (!A.symmetric()) throw std::invalid_argument("lambda_J: matrix not symmetric");
    for (double v : A.a)
        if (v < 0.0) throw std::invalid_argument("lambda_J: negative entry");
    if (J == 0) throw std::invalid_argument("lambda_J: empty subset");
    double lin = 0.0, quad = 0.0;
    const auto members = subset_members(J);
    if (!members.empty() && members.back() >= A.n)
        throw std::invalid_argument("lambda_J: subset exceeds dimension");
    for (int a : members) {
        lin += M[a];
        for (int b : members) quad += A(a, b) * M[a] * M[b];
    }
    return eight_pi * lin - quad;
}

struct LogHlsResult {
    bool bounded_below = false;
    bool minimizer_exists = false;
};

inline LogHlsResult log_hls_condition(const SquareMatrix& A, const std::vector<double>& M) {
    if (static_cast<int>(M.size()) != A.n) throw std::invalid_argument("log_hls_condition: dimension mismatch");
    if (!A.symmetric()) throw std::invalid_argument("log_hls_condition: matrix not symmetric");
    for (double v : A.a)
        if (v < 0.0) throw std::invalid_argument("log_hls_condition: negative entry");
    if (A.n > max_species) throw std::invalid_argument("log_hls_condition: dimension exceeds enumeration cap");

    double mass_sum = 0.0;
    for (double m : M) mass_sum += m;
    const double tol = 1e-12 * eight_pi * mass_sum;

    const Subset full = full_subset(A.n);
    std::vector<double> lam(static_cast<std::size_t>(full) + 1, 0.0);  // lam[0] = Lambda_empty = 0
    for (Subset J = 1; J <= full; ++J) lam[J] = lambda_J(A, M, J);

    LogHlsResult r;
    if (std::abs(lam[full]) > tol) return r;  // both conditions require Lambda_I = 0

    bool nonneg = true, diag_ok = true, proper_strict = true;
    for (Subset J = 1; J <= full; ++J) {
        if (lam[J] < -tol) nonneg = false;
        if (std::abs(lam[J]) <= tol) {
            for (int a : subset_members(J))
                if (!(A(a, a) + lam[J & ~(1u << a)] > tol)) diag_ok = false;
        }
        if (J != full && !(lam[J] > tol)) proper_strict = false;
    }
    r.bounded_below = nonneg && diag_ok;
    r.minimizer_exists = proper_strict;
    return r;
}

struct SpectralBound {
    double rho = 0.0;
    bool bound_holds = false;
};

inline SpectralBound spectral_sufficient(const CouplingModel& m) {
    m.validate();
    const SquareMatrix Bp = positive_part(m.B);
    if (!Bp.symmetric())
        throw std::invalid_argument("spectral_sufficient: positive part not symmetric");
    SpectralBound r;
    r.rho = largest_eigenvalue_symmetric(Bp);
    double max_mass = 0.0;
    for (double mass : m.M) max_mass = std::max(max_mass, mass);
    r.bound_holds = r.rho * max_mass < eight_pi;
    return r;
}

struct DissipativityChain {
    bool is_essentially_dissipative = false;
    std::vector<Subset> chain;  // I^(0) .. I^(|I|)
};

inline DissipativityChain essentially_dissipative(const SquareMatrix& B) {
    const int n = B.n;
    if (n > max_species) throw std::invalid_argument("essentially_dissipative: dimension exceeds cap");
    DissipativityChain out;
    Subset prev = 0;
    for (int k = 0; k <= n; ++k) {
        Subset cur = 0;
        for (int a = 0; a < n; ++a) {
            bool ok = true;
            for (int b = 0; b < n && ok; ++b)
                if (!(prev & (1u << b)) && B(a, b) > 0.0) ok = false;
            if (ok) cur |= 1u << a;
        }
        out.chain.push_back(cur);
        prev = cur;
    }
    out.is_essentially_dissipative = (out.chain.back() == full_subset(n));
    return out;
}

struct TridiagonalTagging {
    std::vector<double> eta;
    SquareMatrix B_sym;
};

// Per-species tagging n~_a = eta_a * n_a turning a sign-symmetric tridiagonal
// coupling into a symmetric one; a zero off-diagonal pair decouples the chain,
// and each block is tagged independently (eta restarts at 1).
inline TridiagonalTagging symmetrize_tridiagonal(const SquareMatrix& B) {
    const int n = B.n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::abs(i - j) > 1 && B(i, j) != 0.0)
                throw std::invalid_argument("symmetrize_tridiagonal: matrix not tridiagonal");
    auto sgn = [](double v) { return (v > 0.0) - (v < 0.0); };
    for (int k = 0; k + 1 < n; ++k)
        if (sgn(B(k, k + 1)) != sgn(B(k + 1, k)))
            throw std::invalid_argument("symmetrize_tridiagonal: sign mismatch across the diagonal");

    TridiagonalTagging out;
    out.eta.assign(n, 1.0);
    for (int k = 0; k + 1 < n; ++k)
        out.eta[k + 1] = (B(k, k + 1) == 0.0) ? 1.0 : out.eta[k] * B(k, k + 1) / B(k + 1, k);

    out.B_sym = SquareMatrix(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.B_sym(i, j) = B(i, j) / out.eta[j];
    return out;
}

inline CouplingModel rescale_sensitivities(const CouplingModel& m) {
    m.validate();
    const int n = m.species();
    CouplingModel out = m;
    for (int i = 0; i < n; ++i) {
        out.M[i] = m.M[i] / m.chi_at(i);
        out.chi[i] = 1.0;
        for (int j = 0; j < n; ++j) out.B(i, j) = m.chi_at(i) * m.B(i, j) * m.chi_at(j);
    }
    return out;
}

inline double second_moment_slope(const CouplingModel& m) {
    m.validate();
    if (!m.symmetric())
        throw std::invalid_argument("second_moment_slope: coupling matrix must be symmetric");
    double mass_sum = 0.0;
    for (double mass : m.M) mass_sum += mass;
    const double q = detail::q_of(m.B, m.M, full_subset(m.species()));
    return 4.0 * mass_sum * (1.0 - q / eight_pi);
}

struct DecompositionPart {
    Subset support = 0;
    double c_value = 0.0;  // Q over the part's support
    bool strict_ok = true;
    std::optional<std::pair<Subset, double>> worst;  // maximizing proper subset of the support
};

struct DecompositionReport {
    bool valid_decomposition = false;
    bool condition_holds = false;
    std::vector<DecompositionPart> parts;
    // C_l has no construction rule in the source statement; it is taken as the
    // computed subset maximum Q over the part's support.
    std::string c_rule = "subset-maximum";
};

inline DecompositionReport check_decomposition_condition(const CouplingModel& m,
                                                         const std::vector<SquareMatrix>& parts) {
    m.validate();
    for (double v : m.B.a)
        if (v < 0.0) throw std::invalid_argument("check_decomposition_condition: B must equal its positive part");
    for (const auto& P : parts) {
        if (P.n != m.species()) throw std::invalid_argument("check_decomposition_condition: part dimension mismatch");
        if (!P.symmetric()) throw std::invalid_argument("check_decomposition_condition: part not symmetric");
        for (double v : P.a)
            if (v < 0.0) throw std::invalid_argument("check_decomposition_condition: part has negative entry");
    }

    DecompositionReport rep;
    SquareMatrix sum(m.species());
    for (const auto& P : parts)
        for (std::size_t i = 0; i < sum.a.size(); ++i) sum.a[i] += P.a[i];
    rep.valid_decomposition = true;
    for (std::size_t i = 0; i < sum.a.size(); ++i)
        if (std::abs(sum.a[i] - m.B.a[i]) > 1e-12) rep.valid_decomposition = false;

    const int n = m.species();
    std::vector<double> per_species_sum(n, 0.0);
    bool all_strict = true;
    for (const auto& P : parts) {
        DecompositionPart d;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (P(i, j) != 0.0) d.support |= (1u << i) | (1u << j);
        if (d.support != 0) {
            d.c_value = detail::q_of(P, m.M, d.support);
            const double tol = 1e-12 * std::max(eight_pi, std::abs(d.c_value));
            for (Subset J = (d.support - 1) & d.support; J != 0; J = (J - 1) & d.support) {
                const double q = detail::q_of(P, m.M, J);
                if (!d.worst || q > d.worst->second) d.worst = {J, q};
                if (!(q < d.c_value - tol)) d.strict_ok = false;
            }
            for (int a : subset_members(d.support)) per_species_sum[a] += d.c_value;
        }
        all_strict = all_strict && d.strict_ok;
        rep.parts.push_back(std::move(d));
    }

    bool sums_ok = true;
    for (int a = 0; a < n; ++a) {
        const double tol = 1e-12 * eight_pi;
        if (!(per_species_sum[a] < eight_pi - tol)) sums_ok = false;
    }
    rep.condition_holds = rep.valid_decomposition && all_strict && sums_ok;
    return rep;
}

}  // namespace pks
