#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mixrank/errors.hpp"

namespace mixrank {

enum class WaveletKind { Haar, Biorthogonal22 };

/// Filter taps stored exactly: tap k equals num[k] / 2^den_log2 * sqrt(2)^sqrt2_power
/// and multiplies the sample at position 2i + offset + k when producing output i.
struct FilterTaps {
    std::vector<int> num;
    int den_log2 = 0;
    int sqrt2_power = 0;
    int offset = 0;

    std::vector<double> values() const {
        const double scale =
            std::pow(std::sqrt(2.0), sqrt2_power) / static_cast<double>(std::int64_t{1} << den_log2);
        std::vector<double> v(num.size());
        for (std::size_t k = 0; k < num.size(); ++k) v[k] = scale * num[k];
        return v;
    }
};

/// A dyadic refinable basis on [0,1] with L2-normalized coordinates.
///
/// The transform maps single-scale coefficients at level j to approximation
/// coefficients at level j-1 plus detail coefficients spanning the complement.
/// Haar is orthonormal; the order-2 biorthogonal family uses periodic wrap-around
/// and is implemented by lifting, so reconstruction is exact independently of the
/// boundary treatment.
class WaveletFamily {
public:
    static const WaveletFamily& haar() {
        static const WaveletFamily f = make_haar();
        return f;
    }

    static const WaveletFamily& biorthogonal22() {
        static const WaveletFamily f = make_biorthogonal22();
        return f;
    }

    static const WaveletFamily& by_kind(WaveletKind kind) {
        return kind == WaveletKind::Haar ? haar() : biorthogonal22();
    }

    WaveletKind kind() const { return kind_; }
    const std::string& name() const { return name_; }

    /// Polynomial exactness: details of locally polynomial data up to this
    /// degree minus one vanish (1 for Haar, 2 for the biorthogonal family).
    int order() const { return order_; }

    /// Orthonormal families coincide with their dual.
    bool dual_equals_primal() const { return kind_ == WaveletKind::Haar; }

    const FilterTaps& analysis_low() const { return analysis_low_; }
    const FilterTaps& analysis_high() const { return analysis_high_; }
    const FilterTaps& synthesis_low() const { return synthesis_low_; }
    const FilterTaps& synthesis_high() const { return synthesis_high_; }

    /// One analysis step: 2k single-scale coefficients -> k approximation +
    /// k detail coefficients. Periodic indexing for the biorthogonal family.
    void forward_step(std::span<const double> x, std::span<double> approx,
                      std::span<double> detail) const {
        const std::int64_t k = static_cast<std::int64_t>(approx.size());
        if (static_cast<std::int64_t>(x.size()) != 2 * k ||
            static_cast<std::int64_t>(detail.size()) != k)
            throw ShapeError("forward_step: inconsistent extents");
        if (kind_ == WaveletKind::Haar) {
            const double s = 1.0 / std::sqrt(2.0);
            for (std::int64_t i = 0; i < k; ++i) {
                approx[i] = (x[2 * i] + x[2 * i + 1]) * s;
                detail[i] = (x[2 * i] - x[2 * i + 1]) * s;
            }
            return;
        }
        // Lifting for the (2,2) family: predict odds from even neighbors,
        // update evens from the new details, then rescale.
        const double rt2 = std::sqrt(2.0);
        for (std::int64_t i = 0; i < k; ++i) {
            const double e0 = x[2 * i];
            const double e1 = x[2 * ((i + 1) % k)];
            detail[i] = x[2 * i + 1] - 0.5 * (e0 + e1);
        }
        for (std::int64_t i = 0; i < k; ++i) {
            const double dm = detail[(i + k - 1) % k];
            approx[i] = (x[2 * i] + 0.25 * (dm + detail[i])) * rt2;
        }
        for (std::int64_t i = 0; i < k; ++i) detail[i] /= rt2;
    }

    /// Exact inverse of forward_step.
    void inverse_step(std::span<const double> approx, std::span<const double> detail,
                      std::span<double> x) const {
        const std::int64_t k = static_cast<std::int64_t>(approx.size());
        if (static_cast<std::int64_t>(x.size()) != 2 * k ||
            static_cast<std::int64_t>(detail.size()) != k)
            throw ShapeError("inverse_step: inconsistent extents");
        if (kind_ == WaveletKind::Haar) {
            const double s = 1.0 / std::sqrt(2.0);
            for (std::int64_t i = 0; i < k; ++i) {
                x[2 * i] = (approx[i] + detail[i]) * s;
                x[2 * i + 1] = (approx[i] - detail[i]) * s;
            }
            return;
        }
        const double rt2 = std::sqrt(2.0);
        std::vector<double> d(static_cast<std::size_t>(k));
        for (std::int64_t i = 0; i < k; ++i) d[static_cast<std::size_t>(i)] = detail[i] * rt2;
        for (std::int64_t i = 0; i < k; ++i) {
            const double dm = d[static_cast<std::size_t>((i + k - 1) % k)];
            x[2 * i] = approx[i] / rt2 - 0.25 * (dm + d[static_cast<std::size_t>(i)]);
        }
        for (std::int64_t i = 0; i < k; ++i) {
            const double e0 = x[2 * i];
            const double e1 = x[2 * ((i + 1) % k)];
            x[2 * i + 1] = d[static_cast<std::size_t>(i)] + 0.5 * (e0 + e1);
        }
    }

private:
    static WaveletFamily make_haar() {
        WaveletFamily f;
        f.kind_ = WaveletKind::Haar;
        f.name_ = "haar";
        f.order_ = 1;
        f.analysis_low_ = {{1, 1}, 1, 1, 0};
        f.analysis_high_ = {{1, -1}, 1, 1, 0};
        f.synthesis_low_ = {{1, 1}, 1, 1, 0};
        f.synthesis_high_ = {{1, -1}, 1, 1, 0};
        return f;
    }

    static WaveletFamily make_biorthogonal22() {
        WaveletFamily f;
        f.kind_ = WaveletKind::Biorthogonal22;
        f.name_ = "biorthogonal22";
        f.order_ = 2;
        f.analysis_low_ = {{-1, 2, 6, 2, -1}, 3, 1, -2};
        f.analysis_high_ = {{-1, 2, -1}, 1, -1, 0};
        f.synthesis_low_ = {{1, 2, 1}, 1, -1, -1};
        f.synthesis_high_ = {{-1, -2, 6, -2, -1}, 3, 1, -1};
        return f;
    }

    WaveletKind kind_ = WaveletKind::Haar;
    std::string name_;
    int order_ = 1;
    FilterTaps analysis_low_, analysis_high_, synthesis_low_, synthesis_high_;
};

inline bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

inline int log2_exact(std::int64_t n) {
    if (!is_power_of_two(n)) throw ShapeError("extent is not a power of two");
    int j = 0;
    while ((std::int64_t{1} << j) < n) ++j;
    return j;
}

/// Full cascade on a vector of length 2^J, in hierarchical layout afterwards:
/// position 0 holds the coarsest approximation, positions [2^(j-1), 2^j) hold
/// the level-j details.
inline void analyze_1d(const WaveletFamily& family, std::span<double> v) {
    const std::int64_t n = static_cast<std::int64_t>(v.size());
    log2_exact(n);
    std::vector<double> scratch(static_cast<std::size_t>(n));
    for (std::int64_t len = n; len >= 2; len /= 2) {
        const std::int64_t half = len / 2;
        family.forward_step(v.subspan(0, static_cast<std::size_t>(len)),
                            std::span<double>(scratch.data(), static_cast<std::size_t>(half)),
                            std::span<double>(scratch.data() + half, static_cast<std::size_t>(half)));
        for (std::int64_t i = 0; i < len; ++i) v[static_cast<std::size_t>(i)] = scratch[static_cast<std::size_t>(i)];
    }
}

/// Inverse of analyze_1d.
inline void synthesize_1d(const WaveletFamily& family, std::span<double> v) {
    const std::int64_t n = static_cast<std::int64_t>(v.size());
    log2_exact(n);
    std::vector<double> scratch(static_cast<std::size_t>(n));
    for (std::int64_t len = 2; len <= n; len *= 2) {
        const std::int64_t half = len / 2;
        family.inverse_step(std::span<const double>(v.data(), static_cast<std::size_t>(half)),
                            std::span<const double>(v.data() + half, static_cast<std::size_t>(half)),
                            std::span<double>(scratch.data(), static_cast<std::size_t>(len)));
        for (std::int64_t i = 0; i < len; ++i) v[static_cast<std::size_t>(i)] = scratch[static_cast<std::size_t>(i)];
    }
}

/// Level of a position in the hierarchical layout: 0 for the coarse
/// coefficient, j for positions in [2^(j-1), 2^j).
inline int hierarchical_level(std::int64_t position) {
    int level = 0;
    while (position >= (std::int64_t{1} << level)) ++level;
    return level;
}

} // namespace mixrank
