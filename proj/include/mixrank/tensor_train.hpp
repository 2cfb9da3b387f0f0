#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "mixrank/errors.hpp"
#include "mixrank/mra.hpp"
#include "mixrank/nd_array.hpp"
#include "mixrank/smoothness.hpp"

namespace mixrank {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Order-3 train core of shape (left_rank, mode_dim, right_rank), stored with
/// the right rank fastest. Both standard unfoldings are stride-free views.
struct TTCore {
    int left = 1;
    int mode = 1;
    int right = 1;
    std::vector<double> data;

    TTCore() = default;
    TTCore(int l, int n, int r)
        : left(l), mode(n), right(r),
          data(static_cast<std::size_t>(l) * static_cast<std::size_t>(n) * static_cast<std::size_t>(r), 0.0) {}

    double& at(int a, int i, int b) {
        return data[(static_cast<std::size_t>(a) * mode + i) * right + static_cast<std::size_t>(b)];
    }
    double at(int a, int i, int b) const {
        return data[(static_cast<std::size_t>(a) * mode + i) * right + static_cast<std::size_t>(b)];
    }

    /// (left*mode) x right
    Eigen::Map<const RowMat> vertical() const {
        return Eigen::Map<const RowMat>(data.data(), static_cast<Eigen::Index>(left) * mode, right);
    }
    /// left x (mode*right)
    Eigen::Map<const RowMat> horizontal() const {
        return Eigen::Map<const RowMat>(data.data(), left, static_cast<Eigen::Index>(mode) * right);
    }
};

struct TTTrain {
    std::vector<TTCore> cores;

    int order() const { return static_cast<int>(cores.size()); }

    /// (1, r_1, ..., r_{m-1}, 1)
    std::vector<int> ranks() const {
        std::vector<int> r;
        r.reserve(cores.size() + 1);
        r.push_back(cores.empty() ? 1 : cores.front().left);
        for (const auto& c : cores) r.push_back(c.right);
        return r;
    }

    std::vector<std::int64_t> mode_dims() const {
        std::vector<std::int64_t> n;
        n.reserve(cores.size());
        for (const auto& c : cores) n.push_back(c.mode);
        return n;
    }

    void validate() const {
        if (cores.size() < 2) throw StructureError("TTTrain: needs at least two cores");
        if (cores.front().left != 1 || cores.back().right != 1)
            throw StructureError("TTTrain: boundary ranks must be 1");
        for (std::size_t j = 1; j < cores.size(); ++j)
            if (cores[j].left != cores[j - 1].right)
                throw StructureError("TTTrain: adjacent rank mismatch");
    }
};

/// Per-step exponents and truncation ranks r_j = ceil(eps^(-1/beta_j)) derived
/// from a smoothness profile. The first step sees the full split rate
/// s_1/n_1 + min_{i>=2} s_i/n_i; later steps only the shrinking tail minimum,
/// so r_j is nonincreasing for j >= 2.
struct RankSchedule {
    double eps = 0.0;
    std::vector<double> beta;             // per step j = 1..m-1
    std::vector<int> ranks;               // r_j
    std::vector<std::vector<double>> tails; // t_j = (s_{j+1}, ..., s_m)
};

namespace detail {
inline int ceil_with_tie_tolerance(double x) {
    // ranks are integers; values a hair above an integer (from eps -> 1 or
    // exact powers) must not bump to the next one
    const double adjusted = x - std::abs(x) * 1e-12;
    return static_cast<int>(std::max(1.0, std::ceil(adjusted)));
}
} // namespace detail

inline RankSchedule rank_schedule(double eps, const SmoothnessProfile& profile) {
    profile.validate();
    profile.require_positive_s();
    if (!(eps > 0.0) || !(eps < 1.0)) throw ValidationError("rank_schedule: needs 0 < eps < 1");
    const int m = profile.m();
    RankSchedule out;
    out.eps = eps;
    for (int j = 1; j < m; ++j) {
        double tail_min = profile.s[static_cast<std::size_t>(j)] / profile.n[static_cast<std::size_t>(j)];
        for (int i = j + 1; i < m; ++i)
            tail_min = std::min(tail_min, profile.s[static_cast<std::size_t>(i)] / profile.n[static_cast<std::size_t>(i)]);
        double beta = tail_min;
        if (j == 1) beta += profile.s[0] / profile.n[0];
        out.beta.push_back(beta);
        out.ranks.push_back(detail::ceil_with_tie_tolerance(std::pow(eps, -1.0 / beta)));
        out.tails.emplace_back(profile.s.begin() + j, profile.s.end());
    }
    return out;
}

/// Truncation policy of the sequential sweep.
struct TTPolicy {
    enum class Kind { FullRank, FixedRanks, Schedule, StepTolerance, GlobalTolerance };
    Kind kind = Kind::FullRank;
    std::vector<int> ranks;
    double tolerance = 0.0;

    static TTPolicy full_rank() { return {Kind::FullRank, {}, 0.0}; }
    static TTPolicy fixed_ranks(std::vector<int> r) {
        for (int v : r)
            if (v < 1) throw ValidationError("TTPolicy: ranks must be >= 1");
        return {Kind::FixedRanks, std::move(r), 0.0};
    }
    static TTPolicy schedule(const RankSchedule& s) { return {Kind::Schedule, s.ranks, 0.0}; }
    /// Truncate each step at accuracy eps_step.
    static TTPolicy step_tolerance(double eps_step) {
        if (!(eps_step >= 0.0)) throw ValidationError("TTPolicy: tolerance must be >= 0");
        return {Kind::StepTolerance, {}, eps_step};
    }
    /// Distribute a total budget eps as eps/sqrt(m-1) per step.
    static TTPolicy global_tolerance(double eps) {
        if (!(eps >= 0.0)) throw ValidationError("TTPolicy: tolerance must be >= 0");
        return {Kind::GlobalTolerance, {}, eps};
    }
};

struct TtSvdResult {
    TTTrain train;
    /// Discarded singular values per step, in decreasing order.
    std::vector<std::vector<double>> truncation_log;
    /// Set when a requested rank exceeded what the unfolding could provide.
    bool clamped = false;
    /// Stacked right remainders g_j (rank_j x trailing modes), kept on request.
    std::vector<RowMat> remainders;
};

/// Truncation error guaranteed by the per-step discards:
/// sqrt( sum_j sum_{dropped} sigma^2 ), the Pythagoras accumulation of the
/// step-wise tail energies.
inline double tt_error_bound(const std::vector<std::vector<double>>& truncation_log) {
    double sum = 0.0;
    for (const auto& step : truncation_log)
        for (double sv : step) sum += sv * sv;
    return std::sqrt(sum);
}

/// Sequential left-to-right decomposition: reshape the remainder to
/// (r_{j-1} N_j) x (N_{j+1}...N_m), take the truncated SVD, keep the left
/// factor as core j and absorb the singular values into the right remainder.
/// Without truncation the result reproduces the input exactly and all cores
/// except the last are left-orthogonal.
inline TtSvdResult tt_svd(const NdArray& tensor, const TTPolicy& policy,
                          bool keep_remainders = false) {
    const int m = tensor.rank();
    if (m < 2) throw ValidationError("tt_svd: needs at least two modes");
    for (int a = 0; a < m; ++a)
        if (tensor.extent(a) < 1) throw ShapeError("tt_svd: empty mode");
    if ((policy.kind == TTPolicy::Kind::FixedRanks || policy.kind == TTPolicy::Kind::Schedule) &&
        static_cast<int>(policy.ranks.size()) != m - 1)
        throw ValidationError("tt_svd: policy needs m-1 ranks");

    TtSvdResult out;
    out.truncation_log.assign(static_cast<std::size_t>(m - 1), {});

    double norm2 = 0.0;
    for (std::int64_t i = 0; i < tensor.size(); ++i) norm2 += tensor[i] * tensor[i];
    if (norm2 == 0.0) {
        int left = 1;
        for (int j = 0; j < m; ++j) {
            out.train.cores.emplace_back(left, static_cast<int>(tensor.extent(j)), 1);
            left = 1;
        }
        if (keep_remainders)
            for (int j = 0; j < m - 1; ++j) {
                std::int64_t rest = 1;
                for (int a = j + 1; a < m; ++a) rest *= tensor.extent(a);
                out.remainders.emplace_back(RowMat::Zero(1, rest));
            }
        return out;
    }

    const double step_eps = policy.kind == TTPolicy::Kind::GlobalTolerance
                                ? policy.tolerance / std::sqrt(static_cast<double>(m - 1))
                                : policy.tolerance;

    std::int64_t rest = tensor.size() / tensor.extent(0);
    RowMat remainder = Eigen::Map<const RowMat>(tensor.data(), tensor.extent(0), rest);
    int r_prev = 1;

    for (int j = 0; j < m - 1; ++j) {
        const int n_j = static_cast<int>(tensor.extent(j));
        // remainder currently has shape (r_prev * N_j) x rest
        Eigen::MatrixXd M = remainder; // column-major copy for the SVD kernel
        Eigen::MatrixXd u, v;
        Eigen::VectorXd sv;
        if (std::min(M.rows(), M.cols()) > 64) {
            Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
            if (svd.info() != Eigen::Success) throw NumericError("tt_svd: SVD did not converge");
            u = svd.matrixU();
            v = svd.matrixV();
            sv = svd.singularValues();
        } else {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
            if (svd.info() != Eigen::Success) throw NumericError("tt_svd: SVD did not converge");
            u = svd.matrixU();
            v = svd.matrixV();
            sv = svd.singularValues();
        }
        const int full = static_cast<int>(sv.size());

        int keep = full;
        switch (policy.kind) {
        case TTPolicy::Kind::FullRank:
            keep = full;
            break;
        case TTPolicy::Kind::FixedRanks:
        case TTPolicy::Kind::Schedule: {
            const int wanted = policy.ranks[static_cast<std::size_t>(j)];
            if (wanted > full) out.clamped = true;
            keep = std::min(wanted, full);
            break;
        }
        case TTPolicy::Kind::StepTolerance:
        case TTPolicy::Kind::GlobalTolerance: {
            double tail = 0.0;
            keep = 0;
            for (int r = full - 1; r >= 0; --r) {
                const double next = tail + sv(r) * sv(r);
                if (std::sqrt(next) > step_eps) {
                    keep = r + 1;
                    break;
                }
                tail = next;
            }
            break;
        }
        }
        keep = std::max(keep, 1);

        for (int r = keep; r < full; ++r)
            out.truncation_log[static_cast<std::size_t>(j)].push_back(sv(r));

        TTCore core(r_prev, n_j, keep);
        for (int row = 0; row < r_prev * n_j; ++row)
            for (int b = 0; b < keep; ++b)
                core.data[static_cast<std::size_t>(row) * keep + static_cast<std::size_t>(b)] = u(row, b);
        out.train.cores.push_back(std::move(core));

        remainder = sv.head(keep).asDiagonal() * v.leftCols(keep).transpose();
        if (keep_remainders) out.remainders.push_back(remainder);

        r_prev = keep;
        if (j + 1 < m - 1) {
            // row-major reshape (r_j x rest) -> (r_j*N_{j+1} x rest/N_{j+1});
            // copy through a temporary, the map would alias the resize
            const std::int64_t n_next = tensor.extent(j + 1);
            rest /= n_next;
            RowMat reshaped =
                Eigen::Map<const RowMat>(remainder.data(), static_cast<Eigen::Index>(r_prev) * n_next, rest);
            remainder = std::move(reshaped);
        }
    }

    const int n_last = static_cast<int>(tensor.extent(m - 1));
    TTCore last(r_prev, n_last, 1);
    for (int a = 0; a < r_prev; ++a)
        for (int i = 0; i < n_last; ++i) last.at(a, i, 0) = remainder(a, i);
    out.train.cores.push_back(std::move(last));
    return out;
}

/// Full contraction of the train into a dense array; refuses to materialize
/// more than 10^7 entries.
inline NdArray tt_to_full(const TTTrain& train) {
    train.validate();
    const auto dims = train.mode_dims();
    std::int64_t total = 1;
    for (auto d : dims) {
        total *= d;
        if (total > 10'000'000) throw SizeGuardError("tt_to_full: result exceeds 1e7 entries");
    }
    RowMat acc = Eigen::Map<const RowMat>(train.cores[0].data.data(), dims[0], train.cores[0].right);
    for (std::size_t j = 1; j < train.cores.size(); ++j) {
        const auto& c = train.cores[j];
        RowMat next = acc * c.horizontal(); // (prefix) x (mode*right)
        acc = Eigen::Map<const RowMat>(next.data(), next.rows() * c.mode, c.right);
    }
    NdArray out(dims);
    for (std::int64_t i = 0; i < total; ++i) out[i] = acc(i, 0);
    return out;
}

/// Frobenius norm of the represented tensor via the Gram sweep; no dense
/// reconstruction involved.
inline double tt_norm(const TTTrain& train) {
    train.validate();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Ones(1, 1);
    for (const auto& c : train.cores) {
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(c.right, c.right);
        for (int i = 0; i < c.mode; ++i) {
            Eigen::Map<const RowMat, 0, Eigen::OuterStride<>> slice(
                c.data.data() + static_cast<std::size_t>(i) * c.right, c.left, c.right,
                Eigen::OuterStride<>(static_cast<Eigen::Index>(c.mode) * c.right));
            next.noalias() += slice.transpose() * gram * slice;
        }
        gram = std::move(next);
    }
    return std::sqrt(std::max(0.0, gram(0, 0)));
}

struct TTStorage {
    std::int64_t continuous = 0; // r_1 + sum_{j=2}^{m-1} r_{j-1} r_j
    std::int64_t discrete = 0;   // sum_j r_{j-1} N_j r_j
};

/// Storage cost of a train with interior ranks (r_1, ..., r_{m-1}); the
/// discrete count needs the mode dimensions.
inline TTStorage tt_storage(std::span<const int> interior_ranks,
                            std::span<const std::int64_t> mode_dims = {}) {
    if (interior_ranks.empty()) throw ValidationError("tt_storage: empty rank vector");
    for (int r : interior_ranks)
        if (r < 1) throw ValidationError("tt_storage: ranks must be >= 1");
    const int m = static_cast<int>(interior_ranks.size()) + 1;
    TTStorage out;
    out.continuous = interior_ranks[0];
    for (int j = 1; j < m - 1; ++j)
        out.continuous += static_cast<std::int64_t>(interior_ranks[static_cast<std::size_t>(j - 1)]) *
                          interior_ranks[static_cast<std::size_t>(j)];
    if (!mode_dims.empty()) {
        if (static_cast<int>(mode_dims.size()) != m)
            throw ValidationError("tt_storage: needs m mode dimensions");
        std::int64_t prev = 1;
        for (int j = 0; j < m; ++j) {
            const std::int64_t next = j < m - 1 ? interior_ranks[static_cast<std::size_t>(j)] : 1;
            out.discrete += prev * mode_dims[static_cast<std::size_t>(j)] * next;
            prev = next;
        }
    }
    return out;
}

/// Hierarchical coefficients reshaped as one dense mode per subdomain, with
/// the per-mode level of each index kept for weighted norms. Mode ordering is
/// coarse-to-fine by detail level, then the group enumeration.
struct ModeArray {
    NdArray tensor;
    std::vector<std::vector<int>> level_of_index; // per subdomain
};

inline ModeArray hier_to_modes(const HierCoeffTensor& f) {
    const int m = f.factor_count();
    detail::GroupTable table(f.subdomains, f.levels);

    // start position of each level group within its mode
    std::vector<std::vector<std::int64_t>> group_start(static_cast<std::size_t>(m));
    ModeArray out;
    out.level_of_index.resize(static_cast<std::size_t>(m));
    std::vector<std::int64_t> dims(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        std::int64_t pos = 0;
        for (int j = 0; j <= f.levels[static_cast<std::size_t>(i)]; ++j) {
            group_start[static_cast<std::size_t>(i)].push_back(pos);
            const auto size = static_cast<std::int64_t>(
                table.offsets[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].size());
            for (std::int64_t k = 0; k < size; ++k)
                out.level_of_index[static_cast<std::size_t>(i)].push_back(j);
            pos += size;
        }
        dims[static_cast<std::size_t>(i)] = pos;
    }
    out.tensor = NdArray(dims);

    for (const auto& [j, block] : f.blocks) {
        std::vector<std::int64_t> sizes(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i)
            sizes[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(
                table.offsets[static_cast<std::size_t>(i)][static_cast<std::size_t>(j[static_cast<std::size_t>(i)])].size());
        std::vector<std::int64_t> g(static_cast<std::size_t>(m), 0);
        const std::int64_t size = static_cast<std::int64_t>(block.size());
        std::vector<std::int64_t> idx(static_cast<std::size_t>(m));
        for (std::int64_t pos = 0; pos < size; ++pos) {
            for (int i = 0; i < m; ++i)
                idx[static_cast<std::size_t>(i)] =
                    group_start[static_cast<std::size_t>(i)][static_cast<std::size_t>(j[static_cast<std::size_t>(i)])] +
                    g[static_cast<std::size_t>(i)];
            out.tensor.at(idx) = block[static_cast<std::size_t>(pos)];
            for (int i = m - 1; i >= 0; --i) {
                if (++g[static_cast<std::size_t>(i)] < sizes[static_cast<std::size_t>(i)]) break;
                g[static_cast<std::size_t>(i)] = 0;
            }
        }
    }
    return out;
}

/// Weighted coefficient norm of a dense mode array: every entry is scaled by
/// 2^(sum_i level_i * t_i) before taking the Frobenius norm. Weights of
/// length < m apply to the trailing modes.
inline double weighted_mode_norm(const NdArray& tensor,
                                 std::span<const std::vector<int>> level_maps,
                                 std::span<const double> t) {
    const int m = tensor.rank();
    const int skip = m - static_cast<int>(t.size());
    if (skip < 0) throw ValidationError("weighted_mode_norm: too many weights");
    std::vector<std::vector<double>> factor(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
        factor[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(tensor.extent(a)), 1.0);
        if (a >= skip) {
            const auto& levels = level_maps[static_cast<std::size_t>(a)];
            for (std::int64_t k = 0; k < tensor.extent(a); ++k)
                factor[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)] =
                    std::exp2(levels[static_cast<std::size_t>(k)] * t[static_cast<std::size_t>(a - skip)]);
        }
    }
    double sum = 0.0;
    std::vector<std::int64_t> idx(static_cast<std::size_t>(m), 0);
    for (std::int64_t flat = 0; flat < tensor.size(); ++flat) {
        double w = 1.0;
        for (int a = 0; a < m; ++a) w *= factor[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
        const double v = tensor[flat] * w;
        sum += v * v;
        for (int a = m - 1; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < tensor.extent(a)) break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
    }
    return std::sqrt(sum);
}

struct RegularityReport {
    std::vector<double> step_norms; // |g_j| in the tail-weighted metric
    double source_norm = 0.0;       // |f| in the fully weighted metric
    std::vector<double> ratios;     // step_norms / source_norm
};

/// Verifies the chain of mixed-norm bounds along the sweep: after step j the
/// stacked remainder, measured with the tail weights (s_{j+1}, ..., s_m),
/// stays below the weighted norm of the source coefficients.
inline RegularityReport regularity_check(const TtSvdResult& result, const ModeArray& source,
                                         std::span<const double> s) {
    const int m = source.tensor.rank();
    if (static_cast<int>(s.size()) != m)
        throw ValidationError("regularity_check: needs one smoothness weight per mode");
    if (static_cast<int>(result.remainders.size()) != m - 1)
        throw ValidationError("regularity_check: run tt_svd with keep_remainders");

    RegularityReport report;
    report.source_norm = weighted_mode_norm(source.tensor, source.level_of_index, s);

    for (int j = 1; j < m; ++j) {
        const RowMat& g = result.remainders[static_cast<std::size_t>(j - 1)];
        // g has shape r_j x (N_{j+1} ... N_m); wrap it as a mode array whose
        // first mode is the unweighted stacking index.
        std::vector<std::int64_t> dims;
        dims.push_back(g.rows());
        for (int a = j; a < m; ++a) dims.push_back(source.tensor.extent(a));
        NdArray stacked(dims, std::vector<double>(g.data(), g.data() + g.size()));
        std::vector<std::vector<int>> maps;
        maps.emplace_back(); // stacking index carries no level
        for (int a = j; a < m; ++a) maps.push_back(source.level_of_index[static_cast<std::size_t>(a)]);
        std::vector<double> tail(s.begin() + j, s.end());
        report.step_norms.push_back(weighted_mode_norm(stacked, maps, tail));
        report.ratios.push_back(report.step_norms.back() / report.source_norm);
    }
    return report;
}

} // namespace mixrank
