#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mixrank/errors.hpp"
#include "mixrank/lowrank.hpp"
#include "mixrank/mra.hpp"
#include "mixrank/smoothness.hpp"
#include "mixrank/sparse_tensor.hpp"

namespace mixrank {

/// A test function with known structure, evaluable anywhere on the unit cube.
struct OracleFunction {
    enum class Kind { SeparableSum, Matern, IsotropicKink };

    Kind kind = Kind::SeparableSum;
    std::string name;
    int total_dim = 2;
    std::function<double(std::span<const double>)> eval;

    /// Exact singular values when the construction fixes them (separable sums).
    std::vector<double> singular_values;

    double nu = 0.0;        // Matern smoothness
    double gamma = 0.0;     // power-law exponent of separable coefficients
    int terms = 0;          // number of separable terms

    /// Exact L2 error of the best rank-R truncation, when the spectrum is known.
    double exact_tail_error(int rank) const {
        if (singular_values.empty())
            throw ValidationError("exact_tail_error: spectrum not known in closed form");
        double sum = 0.0;
        for (std::size_t k = static_cast<std::size_t>(rank); k < singular_values.size(); ++k)
            sum += singular_values[k] * singular_values[k];
        return std::sqrt(sum);
    }
};

/// f(x,y) = sum_k c_k * sqrt(2) sin(k pi x) * sqrt(2) sin(k pi y). The sine
/// factors are L2-orthonormal, so the singular values are exactly c_k and the
/// best rank-R error is the coefficient tail.
inline OracleFunction separable_oracle(std::vector<double> c) {
    if (c.empty()) throw ValidationError("separable_oracle: empty coefficient list");
    for (std::size_t k = 1; k < c.size(); ++k)
        if (c[k] > c[k - 1] || c[k] <= 0.0)
            throw ValidationError("separable_oracle: coefficients must be positive nonincreasing");
    OracleFunction f;
    f.kind = OracleFunction::Kind::SeparableSum;
    f.name = "separable";
    f.total_dim = 2;
    f.terms = static_cast<int>(c.size());
    f.singular_values = c;
    f.eval = [c](std::span<const double> x) {
        double sum = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double kk = static_cast<double>(k + 1) * M_PI;
            sum += c[k] * 2.0 * std::sin(kk * x[0]) * std::sin(kk * x[1]);
        }
        return sum;
    };
    return f;
}

/// Power-law coefficients c_k = k^-gamma.
inline OracleFunction separable_power_oracle(double gamma, int terms) {
    if (terms < 1) throw ValidationError("separable_power_oracle: needs at least one term");
    std::vector<double> c(static_cast<std::size_t>(terms));
    for (int k = 0; k < terms; ++k) c[static_cast<std::size_t>(k)] = std::pow(k + 1.0, -gamma);
    auto f = separable_oracle(std::move(c));
    f.name = "separable_power";
    f.gamma = gamma;
    return f;
}

/// Matern kernel k_nu(x, y) on [0,1]^2 with unit correlation length, for the
/// half-integer orders with closed forms. k_nu(x, x) = 1.
inline OracleFunction matern_kernel(double nu) {
    OracleFunction f;
    f.kind = OracleFunction::Kind::Matern;
    f.name = "matern";
    f.total_dim = 2;
    f.nu = nu;
    if (nearly_equal(nu, 0.5)) {
        f.eval = [](std::span<const double> x) { return std::exp(-std::abs(x[0] - x[1])); };
    } else if (nearly_equal(nu, 1.5)) {
        f.eval = [](std::span<const double> x) {
            const double d = std::sqrt(3.0) * std::abs(x[0] - x[1]);
            return (1.0 + d) * std::exp(-d);
        };
    } else if (nearly_equal(nu, 2.5)) {
        f.eval = [](std::span<const double> x) {
            const double d = std::sqrt(5.0) * std::abs(x[0] - x[1]);
            return (1.0 + d + d * d / 3.0) * std::exp(-d);
        };
    } else {
        throw ValidationError("matern_kernel: nu must be one of 1/2, 3/2, 5/2");
    }
    return f;
}

/// Diagonal-kink comparison function exp(-|x-y|): isotropically smooth but
/// without extra mixed regularity across the diagonal.
inline OracleFunction isotropic_kink() {
    OracleFunction f;
    f.kind = OracleFunction::Kind::IsotropicKink;
    f.name = "isotropic_kink";
    f.total_dim = 2;
    f.eval = [](std::span<const double> x) { return std::exp(-std::abs(x[0] - x[1])); };
    return f;
}

/// Brute-force oracle: full spectrum of the midpoint sample matrix at the
/// given level, scaled by the cell measure so the values approximate the L2
/// singular values. ell_axes splits the sample axes into rows and columns.
inline Eigen::VectorXd dense_svd_reference(const OracleFunction& f, int level, int ell_axes = 1) {
    if (ell_axes < 1 || ell_axes >= f.total_dim)
        throw ValidationError("dense_svd_reference: invalid split");
    const std::int64_t n = std::int64_t{1} << level;
    std::int64_t rows = 1, cols = 1;
    for (int a = 0; a < ell_axes; ++a) rows *= n;
    for (int a = ell_axes; a < f.total_dim; ++a) cols *= n;
    if (rows > 4096 || cols > 4096)
        throw SizeGuardError("dense_svd_reference: sample matrix larger than 4096^2");

    const NdArray samples = sample_to_coefficients(f.eval, f.total_dim, level);
    Eigen::Map<const RowMat> mat(samples.data(), rows, cols);
    return svd_spectrum(Eigen::MatrixXd(mat));
}

/// Full spectrum produced by the library pipeline: sample, wavelet-analyze
/// each axis, matricize at the split and decompose. For orthonormal families
/// this agrees with dense_svd_reference by invariance.
inline Eigen::VectorXd pipeline_spectrum(const OracleFunction& f, const MraSpec& spec, int level) {
    if (f.total_dim != 2 || spec.dim != 1)
        throw ValidationError("pipeline_spectrum: expects a bivariate scalar-factor oracle");
    const NdArray samples = sample_to_coefficients(f.eval, 2, level);
    MraSpec s = spec;
    s.max_level = std::max(s.max_level, level);
    const HierCoeffTensor coeffs = analyze_product(samples, {s, s});
    const MatricizedTensor mt = matricize(coeffs, 1);
    return svd_spectrum(mt.matrix);
}

/// Rank-R truncation errors sqrt(sum_{k>R} sigma_k^2) for a list of ranks.
inline std::vector<double> rank_errors_from_spectrum(const Eigen::VectorXd& spectrum,
                                                     std::span<const int> ranks) {
    std::vector<double> tail(static_cast<std::size_t>(spectrum.size()) + 1, 0.0);
    for (Eigen::Index k = spectrum.size() - 1; k >= 0; --k) {
        tail[static_cast<std::size_t>(k)] =
            tail[static_cast<std::size_t>(k) + 1] + spectrum(k) * spectrum(k);
    }
    std::vector<double> out;
    out.reserve(ranks.size());
    for (int r : ranks) {
        const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(std::max(r, 0)), tail.size() - 1);
        out.push_back(std::sqrt(tail[idx]));
    }
    return out;
}

/// Random coefficient tensor lying exactly on the smoothness profile: entries
/// of block j are uniform draws damped by 2^(-sum_i j_i (s_i + n_i/2)), then
/// the whole tensor is normalized to unit weighted norm.
inline HierCoeffTensor mixed_smooth_synthetic(const SmoothnessProfile& profile, int level,
                                              std::uint64_t seed) {
    profile.validate();
    profile.require_positive_s();
    std::vector<MraSpec> specs;
    std::vector<std::int64_t> shape;
    for (int i = 0; i < profile.m(); ++i) {
        specs.push_back(MraSpec{profile.n[static_cast<std::size_t>(i)], WaveletKind::Haar, level});
        for (int d = 0; d < profile.n[static_cast<std::size_t>(i)]; ++d)
            shape.push_back(std::int64_t{1} << level);
    }
    // assemble directly in block coordinates
    NdArray zero(shape);
    HierCoeffTensor f = analyze_product(zero, specs);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (auto& [j, block] : f.blocks) {
        double damp = 0.0;
        for (std::size_t i = 0; i < j.size(); ++i)
            damp += j[i] * (profile.s[i] + 0.5 * profile.n[i]);
        const double scale = std::exp2(-damp);
        for (auto& v : block) v = scale * uni(rng);
    }
    const double norm = discrete_sobolev_norm(f, profile.s);
    if (norm > 0.0)
        for (auto& [j, block] : f.blocks)
            for (auto& v : block) v /= norm;
    return f;
}

struct DecayPoint {
    double abscissa = 0.0;
    double error = 0.0;
};

struct FitWindow {
    int drop_low = 2; // smallest abscissae are preasymptotic
    int drop_high = 0;
};

/// Log-log least-squares fit of error ~ C * x^(-beta) * (log2 x)^q.
struct DecayReport {
    std::vector<double> abscissae;
    std::vector<double> errors;
    double fitted_exponent = 0.0;
    double constant = 0.0;
    double residual = 0.0;
    std::optional<double> log_correction_q;
    double predicted_exponent = std::numeric_limits<double>::quiet_NaN();
    int dropped_nonpositive = 0;
    FitWindow window;
};

inline DecayReport fit_decay(std::span<const DecayPoint> points, FitWindow window = {},
                             std::optional<double> log_correction_q = std::nullopt,
                             double predicted_exponent = std::numeric_limits<double>::quiet_NaN()) {
    std::vector<DecayPoint> usable;
    int dropped = 0;
    for (const auto& p : points) {
        const bool needs_log = log_correction_q.has_value() && *log_correction_q != 0.0;
        if (p.error > 0.0 && p.abscissa > 0.0 && (!needs_log || p.abscissa > 1.0))
            usable.push_back(p);
        else
            ++dropped;
    }
    std::sort(usable.begin(), usable.end(),
              [](const DecayPoint& a, const DecayPoint& b) { return a.abscissa < b.abscissa; });
    const int lo = window.drop_low;
    const int hi = static_cast<int>(usable.size()) - window.drop_high;
    if (hi - lo < 2) throw ValidationError("fit_decay: window leaves fewer than two points");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int count = hi - lo;
    for (int i = lo; i < hi; ++i) {
        const double x = std::log(usable[static_cast<std::size_t>(i)].abscissa);
        double y = std::log(usable[static_cast<std::size_t>(i)].error);
        if (log_correction_q.has_value())
            y -= *log_correction_q * std::log(std::log2(usable[static_cast<std::size_t>(i)].abscissa));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = count * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) throw NumericError("fit_decay: degenerate abscissae");
    const double slope = (count * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / count;

    DecayReport report;
    for (const auto& p : usable) {
        report.abscissae.push_back(p.abscissa);
        report.errors.push_back(p.error);
    }
    report.fitted_exponent = -slope;
    report.constant = std::exp(intercept);
    report.log_correction_q = log_correction_q;
    report.predicted_exponent = predicted_exponent;
    report.dropped_nonpositive = dropped;
    report.window = window;

    double ss = 0.0;
    for (int i = lo; i < hi; ++i) {
        const double x = std::log(usable[static_cast<std::size_t>(i)].abscissa);
        double y = std::log(usable[static_cast<std::size_t>(i)].error);
        if (log_correction_q.has_value())
            y -= *log_correction_q * std::log(std::log2(usable[static_cast<std::size_t>(i)].abscissa));
        const double r = y - (intercept + slope * x);
        ss += r * r;
    }
    report.residual = std::sqrt(ss / count);
    return report;
}

struct SparseConvergencePoint {
    int level = 0;
    std::int64_t dof = 0;
    double error = 0.0;
};

/// Error of the sparse projection against the reference-level coefficients:
/// the energy of the discarded blocks, evaluated for every requested budget.
inline std::vector<SparseConvergencePoint> measure_sparse_convergence(
    const HierCoeffTensor& reference, const AnisotropyWeights& weights,
    const SmoothnessProfile& profile, std::span<const int> budgets) {
    std::vector<SparseConvergencePoint> out;
    for (int J : budgets) {
        const auto set = index_set(weights, static_cast<double>(J), reference.factor_count());
        double discarded = 0.0;
        for (const auto& [j, block] : reference.blocks) {
            if (!set.contains(j)) {
                for (double v : block) discarded += v * v;
            }
        }
        SparseConvergencePoint p;
        p.level = J;
        p.dof = sparse_dim(set, profile).exact;
        p.error = std::sqrt(discarded);
        out.push_back(p);
    }
    return out;
}

} // namespace mixrank
