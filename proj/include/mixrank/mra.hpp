#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "mixrank/errors.hpp"
#include "mixrank/nd_array.hpp"
#include "mixrank/wavelet.hpp"

namespace mixrank {

/// Dyadic multiresolution on one factor domain [0,1]^dim.
struct MraSpec {
    int dim = 1;
    WaveletKind family = WaveletKind::Haar;
    int max_level = 0;

    const WaveletFamily& wavelets() const { return WaveletFamily::by_kind(family); }
};

/// dim V_j = 2^(j*n) on the unit cube.
inline std::int64_t space_dim(int n, int level) {
    return std::int64_t{1} << (static_cast<std::int64_t>(level) * n);
}

/// dim W_j: 1 at level 0, 2^(jn) - 2^((j-1)n) for j >= 1.
inline std::int64_t detail_dim(int n, int level) {
    if (level == 0) return 1;
    return space_dim(n, level) - space_dim(n, level - 1);
}

/// Flat offsets (into the n-dim hierarchical array with axes of length 2^J)
/// of the coefficients whose per-axis levels have maximum exactly `level`.
/// Ascending flat order, which is lexicographic in the axis tuple.
inline std::vector<std::int64_t> detail_group_offsets(int n, int max_level, int level) {
    const std::int64_t axis_len = std::int64_t{1} << max_level;
    std::vector<std::int64_t> offsets;
    offsets.reserve(static_cast<std::size_t>(detail_dim(n, level)));
    const std::int64_t total = space_dim(n, max_level);
    for (std::int64_t flat = 0; flat < total; ++flat) {
        int lvl = 0;
        std::int64_t rem = flat;
        for (int a = n - 1; a >= 0; --a) {
            const std::int64_t p = rem % axis_len;
            rem /= axis_len;
            const int l = hierarchical_level(p);
            if (l > lvl) lvl = l;
        }
        if (lvl == level) offsets.push_back(flat);
    }
    return offsets;
}

/// Multivariate wavelet coefficients organized by per-subdomain level blocks.
/// Block (j_1,...,j_m) holds the tensorized detail coefficients, flattened
/// row-major over the per-subdomain group enumerations.
struct HierCoeffTensor {
    std::vector<MraSpec> subdomains;
    std::vector<int> levels; // analysis level per subdomain
    std::map<std::vector<int>, std::vector<double>> blocks;

    int factor_count() const { return static_cast<int>(subdomains.size()); }

    std::int64_t block_size(std::span<const int> j) const {
        std::int64_t size = 1;
        for (std::size_t i = 0; i < subdomains.size(); ++i)
            size *= detail_dim(subdomains[i].dim, j[i]);
        return size;
    }

    double squared_norm() const {
        double sum = 0.0;
        for (const auto& [j, block] : blocks)
            for (double v : block) sum += v * v;
        return sum;
    }

    double norm() const { return std::sqrt(squared_norm()); }
};

namespace detail {

inline void cascade_all_axes(NdArray& a, std::span<const MraSpec> specs, bool forward) {
    int axis = 0;
    for (const auto& spec : specs) {
        for (int d = 0; d < spec.dim; ++d, ++axis) {
            const std::int64_t len = a.extent(axis);
            const std::int64_t inner = a.trailing_count(axis);
            const std::int64_t outer = a.leading_count(axis);
            std::vector<double> line(static_cast<std::size_t>(len));
            for (std::int64_t o = 0; o < outer; ++o) {
                for (std::int64_t i = 0; i < inner; ++i) {
                    const std::int64_t base = o * len * inner + i;
                    for (std::int64_t k = 0; k < len; ++k)
                        line[static_cast<std::size_t>(k)] = a[base + k * inner];
                    if (forward)
                        analyze_1d(spec.wavelets(), line);
                    else
                        synthesize_1d(spec.wavelets(), line);
                    for (std::int64_t k = 0; k < len; ++k)
                        a[base + k * inner] = line[static_cast<std::size_t>(k)];
                }
            }
        }
    }
}

struct GroupTable {
    // [subdomain][level] -> flat offsets within the subdomain's local array
    std::vector<std::vector<std::vector<std::int64_t>>> offsets;
    std::vector<std::int64_t> local_totals;

    GroupTable(std::span<const MraSpec> specs, std::span<const int> levels) {
        offsets.resize(specs.size());
        local_totals.resize(specs.size());
        for (std::size_t i = 0; i < specs.size(); ++i) {
            local_totals[i] = space_dim(specs[i].dim, levels[i]);
            offsets[i].resize(static_cast<std::size_t>(levels[i]) + 1);
            for (int j = 0; j <= levels[i]; ++j)
                offsets[i][static_cast<std::size_t>(j)] =
                    detail_group_offsets(specs[i].dim, levels[i], j);
        }
    }
};

} // namespace detail

/// Wavelet analysis of a dense coefficient array over one or more subdomains.
/// The array carries one axis per spatial dimension (subdomain axes adjacent,
/// in order), each of extent 2^J, holding single-scale coefficients in the
/// L2-normalized basis.
inline HierCoeffTensor analyze_product(const NdArray& x, std::vector<MraSpec> specs) {
    int expected_rank = 0;
    for (const auto& s : specs) expected_rank += s.dim;
    if (x.rank() != expected_rank)
        throw ShapeError("analyze: array rank does not match subdomain dimensions");

    std::vector<int> levels;
    int axis = 0;
    for (const auto& s : specs) {
        const int J = log2_exact(x.extent(axis));
        for (int d = 0; d < s.dim; ++d, ++axis) {
            if (x.extent(axis) != (std::int64_t{1} << J))
                throw ShapeError("analyze: axes of one subdomain must share their extent");
        }
        if (J > s.max_level) throw ShapeError("analyze: level exceeds max_level");
        levels.push_back(J);
    }

    NdArray work = x;
    detail::cascade_all_axes(work, specs, true);

    detail::GroupTable table(specs, levels);
    const int m = static_cast<int>(specs.size());

    HierCoeffTensor out;
    out.subdomains = std::move(specs);
    out.levels = levels;

    // Trailing totals for combining per-subdomain local offsets into the
    // global row-major offset.
    std::vector<std::int64_t> trailing(static_cast<std::size_t>(m), 1);
    for (int i = m - 2; i >= 0; --i)
        trailing[static_cast<std::size_t>(i)] =
            trailing[static_cast<std::size_t>(i + 1)] * table.local_totals[static_cast<std::size_t>(i + 1)];

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
        for (std::int64_t out_pos = 0; out_pos < size; ++out_pos) {
            std::int64_t global = 0;
            for (int i = 0; i < m; ++i)
                global += (*groups[static_cast<std::size_t>(i)])[static_cast<std::size_t>(g[static_cast<std::size_t>(i)])] *
                          trailing[static_cast<std::size_t>(i)];
            block[static_cast<std::size_t>(out_pos)] = work[global];
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
            if (++j[static_cast<std::size_t>(i)] <= out.levels[static_cast<std::size_t>(i)]) break;
            j[static_cast<std::size_t>(i)] = 0;
        }
        if (i < 0) break;
    }
    return out;
}

/// Single-subdomain analysis.
inline HierCoeffTensor analyze(const NdArray& x, const MraSpec& spec) {
    return analyze_product(x, {spec});
}

/// Exact inverse of analyze_product: reassembles the dense single-scale array.
inline NdArray synthesize(const HierCoeffTensor& coeffs) {
    const int m = coeffs.factor_count();
    detail::GroupTable table(coeffs.subdomains, coeffs.levels);

    std::vector<std::int64_t> shape;
    for (int i = 0; i < m; ++i) {
        const std::int64_t axis_len = std::int64_t{1} << coeffs.levels[static_cast<std::size_t>(i)];
        for (int d = 0; d < coeffs.subdomains[static_cast<std::size_t>(i)].dim; ++d)
            shape.push_back(axis_len);
    }
    NdArray work(shape);

    std::vector<std::int64_t> trailing(static_cast<std::size_t>(m), 1);
    for (int i = m - 2; i >= 0; --i)
        trailing[static_cast<std::size_t>(i)] =
            trailing[static_cast<std::size_t>(i + 1)] * table.local_totals[static_cast<std::size_t>(i + 1)];

    std::vector<int> j(static_cast<std::size_t>(m), 0);
    while (true) {
        const auto it = coeffs.blocks.find(j);
        if (it == coeffs.blocks.end()) throw StructureError("synthesize: missing coefficient block");
        const auto& block = it->second;
        std::vector<const std::vector<std::int64_t>*> groups(static_cast<std::size_t>(m));
        std::int64_t size = 1;
        for (int i = 0; i < m; ++i) {
            groups[static_cast<std::size_t>(i)] =
                &table.offsets[static_cast<std::size_t>(i)][static_cast<std::size_t>(j[static_cast<std::size_t>(i)])];
            size *= static_cast<std::int64_t>(groups[static_cast<std::size_t>(i)]->size());
        }
        if (static_cast<std::int64_t>(block.size()) != size)
            throw StructureError("synthesize: block size mismatch");
        std::vector<std::int64_t> g(static_cast<std::size_t>(m), 0);
        for (std::int64_t pos = 0; pos < size; ++pos) {
            std::int64_t global = 0;
            for (int i = 0; i < m; ++i)
                global += (*groups[static_cast<std::size_t>(i)])[static_cast<std::size_t>(g[static_cast<std::size_t>(i)])] *
                          trailing[static_cast<std::size_t>(i)];
            work[global] = block[static_cast<std::size_t>(pos)];
            for (int i = m - 1; i >= 0; --i) {
                if (++g[static_cast<std::size_t>(i)] <
                    static_cast<std::int64_t>(groups[static_cast<std::size_t>(i)]->size()))
                    break;
                g[static_cast<std::size_t>(i)] = 0;
            }
        }

        int i = m - 1;
        for (; i >= 0; --i) {
            if (++j[static_cast<std::size_t>(i)] <= coeffs.levels[static_cast<std::size_t>(i)]) break;
            j[static_cast<std::size_t>(i)] = 0;
        }
        if (i < 0) break;
    }

    detail::cascade_all_axes(work, coeffs.subdomains, false);
    return work;
}

struct DetailBlock {
    std::vector<double> values;
    double norm = 0.0;
};

/// Level-j detail coefficients of a single-subdomain tensor, with their norm.
inline DetailBlock detail_block(const HierCoeffTensor& coeffs, int level) {
    if (coeffs.factor_count() != 1)
        throw ValidationError("detail_block: expects a single-subdomain tensor");
    if (level < 0 || level > coeffs.levels[0])
        throw ValidationError("detail_block: level out of range");
    const auto it = coeffs.blocks.find(std::vector<int>{level});
    if (it == coeffs.blocks.end()) throw StructureError("detail_block: missing block");
    DetailBlock out;
    out.values = it->second;
    double s = 0.0;
    for (double v : out.values) s += v * v;
    out.norm = std::sqrt(s);
    return out;
}

/// Weighted coefficient norm ( sum_j 2^(2 sum_i j_i t_i) |block_j|^2 )^(1/2).
/// With t = 0 this is the plain coefficient norm, which for an orthonormal
/// family equals the L2 norm of the represented function.
inline double discrete_sobolev_norm(const HierCoeffTensor& coeffs, std::span<const double> t) {
    if (static_cast<int>(t.size()) != coeffs.factor_count())
        throw ValidationError("discrete_sobolev_norm: weight count mismatch");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < 0.0 || t[i] > coeffs.subdomains[i].wavelets().order())
            throw ValidationError("discrete_sobolev_norm: smoothness outside [0, r]");
    }
    double sum = 0.0;
    for (const auto& [j, block] : coeffs.blocks) {
        double e = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) e += j[i] * t[i];
        const double w = std::exp2(2.0 * e);
        double s = 0.0;
        for (double v : block) s += v * v;
        sum += w * s;
    }
    return std::sqrt(sum);
}

/// Midpoint samples of f on the level-J dyadic grid of the unit cube,
/// scaled by the square root of the cell measure so the result lives in
/// L2-normalized single-scale coordinates.
inline NdArray sample_to_coefficients(const std::function<double(std::span<const double>)>& f,
                                      int total_axes, int level) {
    const std::int64_t n = std::int64_t{1} << level;
    std::vector<std::int64_t> shape(static_cast<std::size_t>(total_axes), n);
    NdArray out(shape);
    const double h = 1.0 / static_cast<double>(n);
    const double scale = std::pow(h, 0.5 * total_axes);
    std::vector<double> point(static_cast<std::size_t>(total_axes));
    std::vector<std::int64_t> idx(static_cast<std::size_t>(total_axes), 0);
    const std::int64_t total = out.size();
    for (std::int64_t flat = 0; flat < total; ++flat) {
        for (int a = 0; a < total_axes; ++a)
            point[static_cast<std::size_t>(a)] = (static_cast<double>(idx[static_cast<std::size_t>(a)]) + 0.5) * h;
        out[flat] = f(point) * scale;
        for (int a = total_axes - 1; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < n) break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
    }
    return out;
}

} // namespace mixrank
