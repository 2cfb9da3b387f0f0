#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mixrank/errors.hpp"

namespace mixrank {

/// Per-subdomain description (m factors; spatial dimension n_i, smoothness
/// exponent s_i, polynomial exactness r_i) driving every rate and rank formula.
struct SmoothnessProfile {
    std::vector<int> n;
    std::vector<double> s;
    std::vector<double> r;

    SmoothnessProfile() = default;
    SmoothnessProfile(std::vector<int> n_, std::vector<double> s_, std::vector<double> r_)
        : n(std::move(n_)), s(std::move(s_)), r(std::move(r_)) {
        validate();
    }

    int m() const { return static_cast<int>(n.size()); }

    void validate() const {
        if (n.size() < 2 || n.size() != s.size() || n.size() != r.size())
            throw ValidationError("SmoothnessProfile: needs m >= 2 consistent vectors");
        for (int ni : n)
            if (ni < 1) throw ValidationError("SmoothnessProfile: n_i must be positive integers");
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] < 0.0) throw ValidationError("SmoothnessProfile: s_i must be nonnegative");
            if (r[i] < 1.0) throw ValidationError("SmoothnessProfile: r_i must be >= 1");
        }
    }

    void require_s_within_r() const {
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s[i] > r[i] + 1e-12)
                throw ValidationError("SmoothnessProfile: rate prediction needs s_i <= r_i");
    }

    void require_positive_s() const {
        for (double si : s)
            if (si <= 0.0) throw ValidationError("SmoothnessProfile: needs s_i > 0");
    }
};

/// Level weights alpha > 0 of the anisotropic index sets; for two factors the
/// scalar form sigma corresponds to alpha = (sigma, 1/sigma).
struct AnisotropyWeights {
    std::vector<double> alpha;

    AnisotropyWeights() = default;
    explicit AnisotropyWeights(std::vector<double> a) : alpha(std::move(a)) { validate(); }

    static AnisotropyWeights from_sigma(double sigma) {
        if (!(sigma > 0.0)) throw ValidationError("AnisotropyWeights: sigma must be positive");
        return AnisotropyWeights({sigma, 1.0 / sigma});
    }

    void validate() const {
        if (alpha.empty()) throw ValidationError("AnisotropyWeights: empty weight vector");
        for (double a : alpha)
            if (!(a > 0.0) || !std::isfinite(a))
                throw ValidationError("AnisotropyWeights: weights must be positive and finite");
    }

    int m() const { return static_cast<int>(alpha.size()); }

    double min_weight() const {
        double mn = alpha[0];
        for (double a : alpha) mn = std::min(mn, a);
        return mn;
    }

    double dot(std::span<const int> j) const {
        double d = 0.0;
        for (std::size_t i = 0; i < alpha.size(); ++i) d += alpha[i] * j[i];
        return d;
    }
};

/// Relative tie tolerance used whenever minima/maxima over real ratios decide
/// a multiplicity.
inline constexpr double kTieTolerance = 1e-12;

inline bool nearly_equal(double a, double b, double tol = kTieTolerance) {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) <= tol * scale;
}

} // namespace mixrank
