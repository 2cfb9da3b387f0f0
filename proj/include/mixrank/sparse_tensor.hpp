#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "mixrank/errors.hpp"
#include "mixrank/mra.hpp"
#include "mixrank/smoothness.hpp"

namespace mixrank {

/// The anisotropic hyperbolic cross {j in N_0^m : alpha^T j <= J}, enumerated
/// explicitly together with its surface band (J - min_i alpha_i, J].
struct SparseIndexSet {
    double J = 0.0;
    AnisotropyWeights weights;
    std::vector<std::vector<int>> indices;
    std::vector<std::vector<int>> surface;

    bool contains(std::span<const int> j) const {
        const double scale = std::max(1.0, std::abs(J));
        return weights.dot(j) <= J + kTieTolerance * scale;
    }
};

/// Enumerates the index set in lexicographic order. Membership uses real
/// arithmetic with a relative tolerance, so J may be fractional.
inline SparseIndexSet index_set(const AnisotropyWeights& weights, double J, int m) {
    weights.validate();
    if (weights.m() != m) throw ValidationError("index_set: weight count != m");
    if (!(J >= 0.0) || !std::isfinite(J)) throw ValidationError("index_set: J must be >= 0");

    SparseIndexSet set;
    set.J = J;
    set.weights = weights;

    const double scale = std::max(1.0, std::abs(J));
    const double upper = J + kTieTolerance * scale;
    const double band_low = J - weights.min_weight() + kTieTolerance * scale;

    std::vector<int> j(static_cast<std::size_t>(m), 0);
    // Depth-first lexicographic enumeration with per-coordinate bounds.
    std::function<void(int, double)> recurse = [&](int pos, double partial) {
        if (pos == m) {
            set.indices.push_back(j);
            if (partial > band_low) set.surface.push_back(j);
            return;
        }
        const double a = weights.alpha[static_cast<std::size_t>(pos)];
        for (int v = 0;; ++v) {
            const double next = partial + a * v;
            if (next > upper) break;
            j[static_cast<std::size_t>(pos)] = v;
            recurse(pos + 1, next);
        }
        j[static_cast<std::size_t>(pos)] = 0;
    };
    recurse(0, 0.0);
    return set;
}

struct SparseDim {
    std::int64_t exact = 0; // sum over the set of the tensorized detail dims
    double bound = 0.0;     // 2^(J max_i n_i/alpha_i), times J per extra argmax tie
};

/// Exact dimension of the sparse tensor product space plus its growth envelope.
inline SparseDim sparse_dim(const SparseIndexSet& set, const SmoothnessProfile& profile) {
    profile.validate();
    if (profile.m() != set.weights.m())
        throw ValidationError("sparse_dim: profile does not match index set");
    SparseDim out;
    for (const auto& j : set.indices) {
        std::int64_t d = 1;
        for (std::size_t i = 0; i < j.size(); ++i)
            d *= detail_dim(profile.n[i], j[static_cast<std::size_t>(i)]);
        out.exact += d;
    }
    double rate = 0.0;
    for (std::size_t i = 0; i < profile.n.size(); ++i)
        rate = std::max(rate, profile.n[i] / set.weights.alpha[i]);
    int ties = 0;
    for (std::size_t i = 0; i < profile.n.size(); ++i)
        if (nearly_equal(profile.n[i] / set.weights.alpha[i], rate)) ++ties;
    out.bound = std::exp2(set.J * rate);
    for (int t = 1; t < ties; ++t) out.bound *= std::max(set.J, 1.0);
    return out;
}

struct SigmaChoices {
    double dof = 0.0;          // equilibrates block dimensions
    double approx = 0.0;       // equilibrates approximation power
    double cost_benefit = 0.0; // equilibrates the cost-benefit rate
};

/// The three closed-form weight choices for two factor domains.
inline SigmaChoices sigma_choices(const SmoothnessProfile& profile) {
    profile.validate();
    if (profile.m() != 2) throw ValidationError("sigma_choices: defined for m = 2 only");
    SigmaChoices out;
    out.dof = std::sqrt(static_cast<double>(profile.n[0]) / profile.n[1]);
    out.approx = std::sqrt(profile.r[0] / profile.r[1]);
    out.cost_benefit = std::sqrt((profile.n[0] + profile.r[0]) / (profile.n[1] + profile.r[1]));
    return out;
}

/// Orthogonal projection onto the sparse space: zeroes every block outside
/// the index set, keeps the rest bit-exactly. Idempotent by construction.
inline HierCoeffTensor sparse_project(const HierCoeffTensor& f, const SparseIndexSet& set) {
    if (f.factor_count() != set.weights.m())
        throw ValidationError("sparse_project: factor count mismatch");
    HierCoeffTensor out = f;
    for (auto& [j, block] : out.blocks) {
        if (!set.contains(j)) std::fill(block.begin(), block.end(), 0.0);
    }
    return out;
}

struct SparseRate {
    double exponent = 0.0; // min_i s_i / alpha_i
    int multiplicity = 0;  // how often the minimum is attained
};

/// Predicted level-convergence rate of the sparse projector: the error decays
/// like 2^(-J min_i s_i/alpha_i) times J^((P-1)/2) where P is the tie count.
inline SparseRate predicted_sparse_rate(const AnisotropyWeights& weights,
                                        const SmoothnessProfile& profile) {
    weights.validate();
    profile.validate();
    profile.require_s_within_r();
    if (weights.m() != profile.m())
        throw ValidationError("predicted_sparse_rate: weight count mismatch");
    SparseRate out;
    out.exponent = profile.s[0] / weights.alpha[0];
    for (std::size_t i = 1; i < weights.alpha.size(); ++i)
        out.exponent = std::min(out.exponent, profile.s[i] / weights.alpha[i]);
    for (std::size_t i = 0; i < weights.alpha.size(); ++i)
        if (nearly_equal(profile.s[i] / weights.alpha[i], out.exponent)) ++out.multiplicity;
    return out;
}

} // namespace mixrank
