#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "mixrank/errors.hpp"
#include "mixrank/mra.hpp"
#include "mixrank/smoothness.hpp"
#include "mixrank/sparse_tensor.hpp"

namespace mixrank {

/// Bivariate split of an m-factor tensor: rows carry subdomains 1..ell,
/// columns carry ell+1..m.
struct SplitLayout {
    SmoothnessProfile profile;
    int ell = 1;

    SplitLayout(SmoothnessProfile p, int ell_) : profile(std::move(p)), ell(ell_) {
        profile.validate();
        if (ell < 1 || ell >= profile.m())
            throw ValidationError("SplitLayout: needs 1 <= ell < m");
    }
};

/// Matricized coefficient tensor together with the structural data needed to
/// invert the reshaping bit-exactly.
struct MatricizedTensor {
    Eigen::MatrixXd matrix;
    std::vector<MraSpec> subdomains;
    std::vector<int> levels;
    int ell = 1;
};

/// Reshapes a hierarchical coefficient tensor into the matrix whose rows are
/// indexed by the combined (level, translation) indices of subdomains 1..ell
/// and whose columns carry the remaining subdomains. Index order matches the
/// per-subdomain hierarchical enumeration, so the map is deterministic.
inline MatricizedTensor matricize(const HierCoeffTensor& f, int ell) {
    const int m = f.factor_count();
    if (ell < 1 || ell >= m) throw ValidationError("matricize: needs 1 <= ell < m");

    detail::GroupTable table(f.subdomains, f.levels);

    std::int64_t rows = 1, cols = 1;
    for (int i = 0; i < ell; ++i) rows *= table.local_totals[static_cast<std::size_t>(i)];
    for (int i = ell; i < m; ++i) cols *= table.local_totals[static_cast<std::size_t>(i)];

    MatricizedTensor out;
    out.matrix = Eigen::MatrixXd::Zero(rows, cols);
    out.subdomains = f.subdomains;
    out.levels = f.levels;
    out.ell = ell;

    std::vector<std::int64_t> row_trailing(static_cast<std::size_t>(m), 1);
    std::vector<std::int64_t> col_trailing(static_cast<std::size_t>(m), 1);
    for (int i = ell - 2; i >= 0; --i)
        row_trailing[static_cast<std::size_t>(i)] =
            row_trailing[static_cast<std::size_t>(i + 1)] * table.local_totals[static_cast<std::size_t>(i + 1)];
    for (int i = m - 2; i >= ell; --i)
        col_trailing[static_cast<std::size_t>(i)] =
            col_trailing[static_cast<std::size_t>(i + 1)] * table.local_totals[static_cast<std::size_t>(i + 1)];

    for (const auto& [j, block] : f.blocks) {
        std::vector<const std::vector<std::int64_t>*> groups(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i)
            groups[static_cast<std::size_t>(i)] =
                &table.offsets[static_cast<std::size_t>(i)][static_cast<std::size_t>(j[static_cast<std::size_t>(i)])];
        std::vector<std::int64_t> g(static_cast<std::size_t>(m), 0);
        const std::int64_t size = static_cast<std::int64_t>(block.size());
        for (std::int64_t pos = 0; pos < size; ++pos) {
            std::int64_t row = 0, col = 0;
            for (int i = 0; i < ell; ++i)
                row += (*groups[static_cast<std::size_t>(i)])[static_cast<std::size_t>(g[static_cast<std::size_t>(i)])] *
                       row_trailing[static_cast<std::size_t>(i)];
            for (int i = ell; i < m; ++i)
                col += (*groups[static_cast<std::size_t>(i)])[static_cast<std::size_t>(g[static_cast<std::size_t>(i)])] *
                       col_trailing[static_cast<std::size_t>(i)];
            out.matrix(row, col) = block[static_cast<std::size_t>(pos)];
            for (int i = m - 1; i >= 0; --i) {
                if (++g[static_cast<std::size_t>(i)] <
                    static_cast<std::int64_t>(groups[static_cast<std::size_t>(i)]->size()))
                    break;
                g[static_cast<std::size_t>(i)] = 0;
            }
        }
    }
    return out;
}

/// Exact inverse of matricize.
inline HierCoeffTensor unmatricize(const MatricizedTensor& mt) {
    const int m = static_cast<int>(mt.subdomains.size());
    detail::GroupTable table(mt.subdomains, mt.levels);

    std::vector<std::int64_t> row_trailing(static_cast<std::size_t>(m), 1);
    std::vector<std::int64_t> col_trailing(static_cast<std::size_t>(m), 1);
    for (int i = mt.ell - 2; i >= 0; --i)
        row_trailing[static_cast<std::size_t>(i)] =
            row_trailing[static_cast<std::size_t>(i + 1)] * table.local_totals[static_cast<std::size_t>(i + 1)];
    for (int i = m - 2; i >= mt.ell; --i)
        col_trailing[static_cast<std::size_t>(i)] =
            col_trailing[static_cast<std::size_t>(i + 1)] * table.local_totals[static_cast<std::size_t>(i + 1)];

    HierCoeffTensor out;
    out.subdomains = mt.subdomains;
    out.levels = mt.levels;

    std::vector<int> j(static_cast<std::size_t>(m), 0);
    while (true) {
        std::vector<const std::vector<std::int64_t>*> groups(static_cast<std::size_t>(m));
        std::int64_t size = 1;
        for (int i = 0; i < m; ++i) {
            groups[static_cast<std::size_t>(i)] =
                &table.offsets[static_cast<std::size_t>(i)][static_cast<std::size_t>(j[static_cast<std::size_t>(i)])];
            size *= static_cast<std::int64_t>(groups[static_cast<std::size_t>(i)]->size());
        }
        std::vector<double> block(static_cast<std::size_t>(size));
        std::vector<std::int64_t> g(static_cast<std::size_t>(m), 0);
        for (std::int64_t pos = 0; pos < size; ++pos) {
            std::int64_t row = 0, col = 0;
            for (int i = 0; i < mt.ell; ++i)
                row += (*groups[static_cast<std::size_t>(i)])[static_cast<std::size_t>(g[static_cast<std::size_t>(i)])] *
                       row_trailing[static_cast<std::size_t>(i)];
            for (int i = mt.ell; i < m; ++i)
                col += (*groups[static_cast<std::size_t>(i)])[static_cast<std::size_t>(g[static_cast<std::size_t>(i)])] *
                       col_trailing[static_cast<std::size_t>(i)];
            block[static_cast<std::size_t>(pos)] = mt.matrix(row, col);
            for (int i = m - 1; i >= 0; --i) {
                if (++g[static_cast<std::size_t>(i)] <
                    static_cast<std::int64_t>(groups[static_cast<std::size_t>(i)]->size()))
                    break;
                g[static_cast<std::size_t>(i)] = 0;
            }
        }
        out.blocks.emplace(j, std::move(block));
        int i = m - 1;
        for (; i >= 0; --i) {
            if (++j[static_cast<std::size_t>(i)] <= mt.levels[static_cast<std::size_t>(i)]) break;
            j[static_cast<std::size_t>(i)] = 0;
        }
        if (i < 0) break;
    }
    return out;
}

struct SvdPolicy {
    enum class Kind { Rank, Tolerance };
    Kind kind = Kind::Rank;
    int rank = 0;
    double tolerance = 0.0;

    static SvdPolicy by_rank(int R) {
        if (R < 0) throw ValidationError("SvdPolicy: rank must be >= 0");
        return {Kind::Rank, R, 0.0};
    }
    static SvdPolicy by_tolerance(double eps) {
        if (!(eps >= 0.0)) throw ValidationError("SvdPolicy: tolerance must be >= 0");
        return {Kind::Tolerance, 0, eps};
    }
};

/// Best rank-R factorization of a matrix in the Frobenius metric. The kept
/// factors have orthonormal columns; the reconstruction is
/// left * diag(singular_values) * right^T and its squared error equals
/// tail_energy.
struct SvdTruncation {
    int rank = 0;
    Eigen::VectorXd singular_values; // kept, nonincreasing
    Eigen::MatrixXd left;
    Eigen::MatrixXd right;
    Eigen::VectorXd discarded; // dropped singular values, nonincreasing
    double tail_energy = 0.0;  // sum of squares of the dropped values

    Eigen::MatrixXd reconstruct() const {
        if (rank == 0) return Eigen::MatrixXd::Zero(left.rows(), right.rows());
        return left * singular_values.asDiagonal() * right.transpose();
    }
};

/// Full singular value spectrum, nonincreasing. Surfaces convergence failures
/// instead of returning silently wrong values.
inline Eigen::VectorXd svd_spectrum(const Eigen::MatrixXd& a) {
    if (std::min(a.rows(), a.cols()) > 64) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
        if (svd.info() != Eigen::Success) throw NumericError("svd_spectrum: SVD did not converge");
        return svd.singularValues();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    if (svd.info() != Eigen::Success) throw NumericError("svd_spectrum: SVD did not converge");
    return svd.singularValues();
}

inline SvdTruncation truncated_svd(const Eigen::MatrixXd& a, const SvdPolicy& policy) {
    if (!a.allFinite()) throw ValidationError("truncated_svd: matrix has non-finite entries");

    Eigen::MatrixXd u, v;
    Eigen::VectorXd sv;
    if (std::min(a.rows(), a.cols()) > 64) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.info() != Eigen::Success) throw NumericError("truncated_svd: SVD did not converge");
        u = svd.matrixU();
        v = svd.matrixV();
        sv = svd.singularValues();
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.info() != Eigen::Success) throw NumericError("truncated_svd: SVD did not converge");
        u = svd.matrixU();
        v = svd.matrixV();
        sv = svd.singularValues();
    }

    const int full = static_cast<int>(sv.size());
    int rank = 0;
    if (policy.kind == SvdPolicy::Kind::Rank) {
        // numerical rank: ignore singular values at roundoff level
        const double cutoff = (full > 0 ? sv(0) : 0.0) * 1e-14;
        int numerical = 0;
        while (numerical < full && sv(numerical) > cutoff) ++numerical;
        rank = std::min(policy.rank, numerical);
    } else {
        double tail = 0.0;
        for (int r = full - 1; r >= 0; --r) {
            const double next = tail + sv(r) * sv(r);
            if (std::sqrt(next) > policy.tolerance) {
                rank = r + 1;
                break;
            }
            tail = next;
        }
    }

    SvdTruncation out;
    out.rank = rank;
    out.singular_values = sv.head(rank);
    out.left = u.leftCols(rank);
    out.right = v.leftCols(rank);
    out.discarded = sv.tail(full - rank);
    out.tail_energy = out.discarded.squaredNorm();

    // deterministic sign: first nonzero entry of each left singular vector positive
    for (int r = 0; r < rank; ++r) {
        for (Eigen::Index i = 0; i < out.left.rows(); ++i) {
            const double e = out.left(i, r);
            if (e != 0.0) {
                if (e < 0.0) {
                    out.left.col(r) = -out.left.col(r);
                    out.right.col(r) = -out.right.col(r);
                }
                break;
            }
        }
    }
    return out;
}

struct BivariateRankBound {
    std::int64_t exact = 0; // surface sum of min block ranks
    double closed = 0.0;    // 2^(J n1 n2 / (n1/sigma + sigma n2))
    double crossover_j1 = 0.0;
    double crossover_j2 = 0.0;
};

/// Separation-rank bound for the two-factor sparse space: the exact sum
/// enumerates the surface levels, the closed form is its growth envelope, and
/// the crossover is where the two dimension counts balance.
inline BivariateRankBound rank_bound_bivariate(double J, double sigma, int n1, int n2) {
    if (!(sigma > 0.0)) throw ValidationError("rank_bound_bivariate: sigma must be positive");
    if (n1 < 1 || n2 < 1) throw ValidationError("rank_bound_bivariate: dimensions must be positive");
    const auto set = index_set(AnisotropyWeights::from_sigma(sigma), J, 2);
    BivariateRankBound out;
    for (const auto& j : set.surface) {
        const double d1 = std::exp2(static_cast<double>(j[0]) * n1);
        const double d2 = std::exp2(static_cast<double>(j[1]) * n2);
        out.exact += static_cast<std::int64_t>(std::llround(std::min(d1, d2)));
    }
    const double denom = n1 / sigma + sigma * n2;
    out.closed = std::exp2(J * n1 * n2 / denom);
    out.crossover_j1 = J * n2 / denom;
    out.crossover_j2 = J * n1 / denom;
    return out;
}

struct GeneralBeta {
    double beta = 0.0;
    bool balanced = false; // s1/sigma == s2*sigma, the logarithmic branch
};

/// Rank-convergence exponent for an arbitrary weight sigma:
/// beta = (n1/sigma + sigma n2) / (n1 n2) * min(s1/sigma, s2 sigma).
inline GeneralBeta beta_general(double sigma, const SmoothnessProfile& profile) {
    profile.validate();
    profile.require_positive_s();
    if (profile.m() != 2) throw ValidationError("beta_general: defined for m = 2 only");
    if (!(sigma > 0.0)) throw ValidationError("beta_general: sigma must be positive");
    const double n1 = profile.n[0], n2 = profile.n[1];
    const double a = profile.s[0] / sigma;
    const double b = profile.s[1] * sigma;
    GeneralBeta out;
    out.beta = (n1 / sigma + sigma * n2) / (n1 * n2) * std::min(a, b);
    out.balanced = nearly_equal(a, b);
    return out;
}

/// The weight that balances the two branches of the minimum.
inline double optimal_sigma(double s1, double s2) {
    if (!(s1 > 0.0) || !(s2 > 0.0)) throw ValidationError("optimal_sigma: needs s1, s2 > 0");
    return std::sqrt(s1 / s2);
}

/// Best achievable rank exponent under mixed smoothness: s1/n1 + s2/n2.
inline double beta_mixed(const SmoothnessProfile& profile) {
    profile.validate();
    if (profile.m() != 2) throw ValidationError("beta_mixed: defined for m = 2 only");
    return profile.s[0] / profile.n[0] + profile.s[1] / profile.n[1];
}

/// Rank exponent available from isotropic smoothness alone: max(s1/n1, s2/n2).
inline double beta_isotropic(const SmoothnessProfile& profile) {
    profile.validate();
    if (profile.m() != 2) throw ValidationError("beta_isotropic: defined for m = 2 only");
    return std::max(profile.s[0] / profile.n[0], profile.s[1] / profile.n[1]);
}

/// Rank-convergence prediction for a split of an m-factor profile.
struct RatePrediction {
    double beta = 0.0;
    int p1 = 0; // ties of the row-group minimum
    int p2 = 0; // ties of the column-group minimum
    double log_exponent = 0.0;
};

inline RatePrediction beta_split(const SplitLayout& layout) {
    const auto& p = layout.profile;
    p.require_positive_s();
    const int m = p.m();
    double min1 = p.s[0] / p.n[0];
    for (int i = 1; i < layout.ell; ++i)
        min1 = std::min(min1, p.s[static_cast<std::size_t>(i)] / p.n[static_cast<std::size_t>(i)]);
    double min2 = p.s[static_cast<std::size_t>(layout.ell)] / p.n[static_cast<std::size_t>(layout.ell)];
    for (int i = layout.ell + 1; i < m; ++i)
        min2 = std::min(min2, p.s[static_cast<std::size_t>(i)] / p.n[static_cast<std::size_t>(i)]);

    RatePrediction out;
    out.beta = min1 + min2;
    for (int i = 0; i < layout.ell; ++i)
        if (nearly_equal(p.s[static_cast<std::size_t>(i)] / p.n[static_cast<std::size_t>(i)], min1)) ++out.p1;
    for (int i = layout.ell; i < m; ++i)
        if (nearly_equal(p.s[static_cast<std::size_t>(i)] / p.n[static_cast<std::size_t>(i)], min2)) ++out.p2;
    out.log_exponent = 0.5 * (m - 1) + out.beta * std::max(out.p1, out.p2) - 1.0;
    return out;
}

struct SplitRankBound {
    std::int64_t exact = 0;
    double closed = 0.0;
    double m_lower = 0.0; // max_{i<=ell} n_i/alpha_i
    double m_upper = 0.0; // max_{i>ell}  n_i/alpha_i
    int p1 = 0;
    int p2 = 0;
};

/// Separation-rank bound of the m-factor sparse space split after subdomain
/// ell: the exact value sums min(row dims, col dims) over the surface band,
/// the closed form is max(J,1)^(max(P1,P2)-1) * 2^(J ml*mu/(ml+mu)).
inline SplitRankBound rank_bound_split(double J, const AnisotropyWeights& weights,
                                       const SmoothnessProfile& profile, int ell) {
    weights.validate();
    profile.validate();
    const int m = profile.m();
    if (weights.m() != m) throw ValidationError("rank_bound_split: weight count mismatch");
    if (ell < 1 || ell >= m) throw ValidationError("rank_bound_split: needs 1 <= ell < m");

    const auto set = index_set(weights, J, m);
    SplitRankBound out;
    for (const auto& j : set.surface) {
        double e1 = 0.0, e2 = 0.0;
        for (int i = 0; i < ell; ++i) e1 += static_cast<double>(j[static_cast<std::size_t>(i)]) * profile.n[static_cast<std::size_t>(i)];
        for (int i = ell; i < m; ++i) e2 += static_cast<double>(j[static_cast<std::size_t>(i)]) * profile.n[static_cast<std::size_t>(i)];
        out.exact += static_cast<std::int64_t>(std::llround(std::exp2(std::min(e1, e2))));
    }

    out.m_lower = 0.0;
    out.m_upper = 0.0;
    for (int i = 0; i < ell; ++i)
        out.m_lower = std::max(out.m_lower, profile.n[static_cast<std::size_t>(i)] / weights.alpha[static_cast<std::size_t>(i)]);
    for (int i = ell; i < m; ++i)
        out.m_upper = std::max(out.m_upper, profile.n[static_cast<std::size_t>(i)] / weights.alpha[static_cast<std::size_t>(i)]);
    for (int i = 0; i < ell; ++i)
        if (nearly_equal(profile.n[static_cast<std::size_t>(i)] / weights.alpha[static_cast<std::size_t>(i)], out.m_lower)) ++out.p1;
    for (int i = ell; i < m; ++i)
        if (nearly_equal(profile.n[static_cast<std::size_t>(i)] / weights.alpha[static_cast<std::size_t>(i)], out.m_upper)) ++out.p2;

    out.closed = std::pow(std::max(J, 1.0), std::max(out.p1, out.p2) - 1) *
                 std::exp2(J * out.m_lower * out.m_upper / (out.m_lower + out.m_upper));
    return out;
}

struct DofEstimates {
    double svd_exponent = 0.0;
    double sparse_exponent = 0.0;
    double svd_value = 0.0;
    double sparse_value = 0.0;
};

/// Degrees of freedom needed for target accuracy eps: truncated-SVD route
/// (eigenfunctions stored on full grids) versus the sparse tensor product
/// approximation. Reported as exponents of eps plus the evaluated values.
inline DofEstimates dof_estimates(double eps, const SmoothnessProfile& profile) {
    profile.validate();
    profile.require_positive_s();
    if (profile.m() != 2) throw ValidationError("dof_estimates: defined for m = 2 only");
    if (!(eps > 0.0) || eps > 1.0) throw ValidationError("dof_estimates: needs 0 < eps <= 1");
    const double n1 = profile.n[0], n2 = profile.n[1];
    const double grid = std::max(n1 / std::min(profile.s[0], profile.r[0]),
                                 n2 / std::min(profile.s[1], profile.r[1]));
    DofEstimates out;
    out.sparse_exponent = -grid;
    out.svd_exponent = -(n1 * n2 / (profile.s[0] * n2 + profile.s[1] * n1) + grid);
    out.svd_value = std::pow(eps, out.svd_exponent);
    out.sparse_value = std::pow(eps, out.sparse_exponent);
    return out;
}

} // namespace mixrank
