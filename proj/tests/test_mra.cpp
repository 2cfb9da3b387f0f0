#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "mixrank/mra.hpp"

using namespace mixrank;

namespace {

NdArray random_array(std::vector<std::int64_t> shape, std::uint64_t seed) {
    NdArray a(std::move(shape));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (std::int64_t i = 0; i < a.size(); ++i) a[i] = uni(rng);
    return a;
}

// least-squares slope of log2(norm) against the block index
double fitted_slope(const std::vector<int>& js, const std::vector<double>& norms) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(js.size());
    for (std::size_t i = 0; i < js.size(); ++i) {
        const double x = js[i];
        const double y = std::log2(norms[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

TEST_CASE("analyze/synthesize round trip") {
    for (const auto family : {WaveletKind::Haar, WaveletKind::Biorthogonal22}) {
        for (int n = 1; n <= 3; ++n) {
            const int J = n == 3 ? 3 : 5;
            MraSpec spec{n, family, J};
            const auto x = random_array(std::vector<std::int64_t>(static_cast<std::size_t>(n), std::int64_t{1} << J),
                                        17 + static_cast<std::uint64_t>(n));
            const auto coeffs = analyze(x, spec);
            const auto back = synthesize(coeffs);
            REQUIRE(back.size() == x.size());
            for (std::int64_t i = 0; i < x.size(); ++i)
                REQUIRE(back[i] == Catch::Approx(x[i]).margin(1e-12));
        }
    }
}

TEST_CASE("block dimensions add up to the full space") {
    for (int n = 1; n <= 3; ++n) {
        const int J = 3;
        MraSpec spec{n, WaveletKind::Haar, J};
        const auto coeffs = analyze(
            random_array(std::vector<std::int64_t>(static_cast<std::size_t>(n), std::int64_t{1} << J), 5), spec);
        std::int64_t total = 0;
        for (const auto& [j, block] : coeffs.blocks) {
            REQUIRE(static_cast<std::int64_t>(block.size()) == detail_dim(n, j[0]));
            total += static_cast<std::int64_t>(block.size());
        }
        REQUIRE(total == space_dim(n, J));
    }
}

TEST_CASE("constant function has no details") {
    MraSpec spec{1, WaveletKind::Haar, 3};
    const auto coeffs =
        analyze(sample_to_coefficients([](std::span<const double>) { return 1.0; }, 1, 3), spec);
    for (int j = 1; j <= 3; ++j) REQUIRE(detail_block(coeffs, j).norm == Catch::Approx(0.0).margin(1e-14));
    // the coarse coefficient carries the total mass (f, phi_0) = 1
    REQUIRE(coeffs.blocks.at({0})[0] == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("single unit coefficient synthesizes one wavelet") {
    MraSpec spec{1, WaveletKind::Haar, 3};
    NdArray zero({8});
    auto coeffs = analyze(zero, spec);
    coeffs.blocks.at({2})[0] = 1.0;
    const auto x = synthesize(coeffs);
    // block 2 holds the two scale-1 wavelets; the first one takes the value
    // +sqrt(2) on [0,1/4) and -sqrt(2) on [1/4,1/2), i.e. single-scale
    // coefficients (1/2, 1/2, -1/2, -1/2, 0, 0, 0, 0) at level 3
    const std::vector<double> expected{0.5, 0.5, -0.5, -0.5, 0.0, 0.0, 0.0, 0.0};
    for (std::int64_t i = 0; i < 8; ++i) REQUIRE(x[i] == Catch::Approx(expected[static_cast<std::size_t>(i)]).margin(1e-13));
    double norm2 = 0.0;
    for (std::int64_t i = 0; i < 8; ++i) norm2 += x[i] * x[i];
    REQUIRE(std::sqrt(norm2) == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("zero coefficients synthesize to zero") {
    MraSpec spec{2, WaveletKind::Haar, 2};
    NdArray zero({4, 4});
    const auto x = synthesize(analyze(zero, spec));
    for (std::int64_t i = 0; i < x.size(); ++i) REQUIRE(x[i] == 0.0);
}

// Analytic Haar coefficients of f(x) = x: a wavelet supported on an interval
// of width w has inner product -w^(3/2)/4 regardless of position, so the
// block holding the scale-l wavelets (w = 2^-l, count 2^l) has norm 2^-l/4.
// Storage block j carries scale j-1.
TEST_CASE("detail norms of the identity function") {
    const int J = 10;
    MraSpec spec{1, WaveletKind::Haar, J};
    const auto coeffs =
        analyze(sample_to_coefficients([](std::span<const double> x) { return x[0]; }, 1, J), spec);

    // independent oracle: midpoint quadrature of (f, psi) at a finer level
    const int quad_level = J + 4;
    const std::int64_t q = std::int64_t{1} << quad_level;
    for (int block = 1; block <= J; ++block) {
        const int scale = block - 1;
        const double w = std::exp2(-scale);
        double inner = 0.0; // against the first wavelet of the block
        for (std::int64_t p = 0; p < q; ++p) {
            const double x = (static_cast<double>(p) + 0.5) / static_cast<double>(q);
            if (x >= w) break;
            const double psi = (x < 0.5 * w ? 1.0 : -1.0) / std::sqrt(w);
            inner += x * psi / static_cast<double>(q);
        }
        REQUIRE(inner == Catch::Approx(-std::pow(w, 1.5) / 4.0).margin(1e-12));
        const double expected_norm = std::sqrt(std::exp2(scale)) * std::abs(inner);
        const auto block_data = detail_block(coeffs, block);
        REQUIRE(block_data.norm == Catch::Approx(expected_norm).margin(1e-10));
        REQUIRE(block_data.norm == Catch::Approx(std::exp2(-scale) / 4.0).margin(1e-12));
    }
}

TEST_CASE("detail decay of a smooth function matches the smoothness order") {
    SECTION("haar: slope about -1 for sin(pi x)") {
        const int J = 12;
        MraSpec spec{1, WaveletKind::Haar, J};
        const auto coeffs = analyze(
            sample_to_coefficients([](std::span<const double> x) { return std::sin(M_PI * x[0]); }, 1, J), spec);
        std::vector<int> js;
        std::vector<double> norms;
        for (int j = 4; j <= 10; ++j) {
            js.push_back(j);
            norms.push_back(detail_block(coeffs, j).norm);
        }
        REQUIRE(fitted_slope(js, norms) <= -0.9);
    }
    SECTION("biorthogonal order 2: slope about -2 for a periodic smooth function") {
        const int J = 12;
        MraSpec spec{1, WaveletKind::Biorthogonal22, J};
        const auto coeffs = analyze(
            sample_to_coefficients([](std::span<const double> x) { return std::sin(2.0 * M_PI * x[0]); }, 1, J),
            spec);
        std::vector<int> js;
        std::vector<double> norms;
        for (int j = 4; j <= 10; ++j) {
            js.push_back(j);
            norms.push_back(detail_block(coeffs, j).norm);
        }
        REQUIRE(fitted_slope(js, norms) <= -1.9);
    }
}

TEST_CASE("coefficient norm equals the grid L2 norm") {
    // orthonormal family: block energy == discrete L2 norm of the cell values
    const int J = 5;
    MraSpec spec{2, WaveletKind::Haar, J};
    const auto values = random_array({32, 32}, 99);
    NdArray scaled = values;
    const double h = std::exp2(-J);
    for (std::int64_t i = 0; i < scaled.size(); ++i) scaled[i] *= h; // 2^(-J*2/2)
    const auto coeffs = analyze(scaled, spec);
    double grid_l2 = 0.0;
    for (std::int64_t i = 0; i < values.size(); ++i) grid_l2 += values[i] * values[i] * h * h;
    REQUIRE(coeffs.norm() == Catch::Approx(std::sqrt(grid_l2)).margin(1e-10));
}

TEST_CASE("discrete sobolev norm") {
    SECTION("t = 0 equals the coefficient norm") {
        MraSpec spec{1, WaveletKind::Haar, 6};
        const auto coeffs = analyze(random_array({64}, 3), spec);
        const std::vector<double> t{0.0};
        REQUIRE(discrete_sobolev_norm(coeffs, t) == Catch::Approx(coeffs.norm()).epsilon(1e-13));
    }
    SECTION("single unit coefficient at level j scales as 2^(j t)") {
        MraSpec spec{1, WaveletKind::Haar, 5};
        NdArray zero({32});
        auto coeffs = analyze(zero, spec);
        coeffs.blocks.at({4})[0] = 1.0;
        const std::vector<double> t{0.75};
        REQUIRE(discrete_sobolev_norm(coeffs, t) == Catch::Approx(std::exp2(4 * 0.75)).epsilon(1e-13));
    }
    SECTION("weighted norm of the identity function matches the closed form") {
        // block norms are exactly 2^-j/2 for j >= 1 and the coarse coefficient
        // is 1/2, so norm(t=1)^2 = 1/4 + J/4 and norm(t=0)^2 = 1/3 - 4^-J/12
        const int J = 10;
        MraSpec spec{1, WaveletKind::Haar, J};
        const auto coeffs =
            analyze(sample_to_coefficients([](std::span<const double> x) { return x[0]; }, 1, J), spec);
        const std::vector<double> t1{1.0}, t0{0.0};
        const double n1 = discrete_sobolev_norm(coeffs, t1);
        const double n0 = discrete_sobolev_norm(coeffs, t0);
        REQUIRE(n1 == Catch::Approx(std::sqrt(0.25 + J * 0.25)).margin(1e-10));
        REQUIRE(n0 == Catch::Approx(std::sqrt(1.0 / 3.0 - std::exp2(-2.0 * J) / 12.0)).margin(1e-10));
        const double ratio = n1 / n0;
        REQUIRE(std::isfinite(ratio));
        REQUIRE(ratio < 10.0); // grows only like sqrt(J)
    }
    SECTION("t above the family order is rejected") {
        MraSpec spec{1, WaveletKind::Haar, 3};
        const auto coeffs = analyze(random_array({8}, 4), spec);
        const std::vector<double> t{1.5};
        REQUIRE_THROWS_AS(discrete_sobolev_norm(coeffs, t), ValidationError);
    }
}

TEST_CASE("shape validation") {
    MraSpec spec{1, WaveletKind::Haar, 4};
    REQUIRE_THROWS_AS(analyze(NdArray({6}), spec), ShapeError);     // non-dyadic
    REQUIRE_THROWS_AS(analyze(NdArray({32}), spec), ShapeError);    // beyond max_level
    REQUIRE_THROWS_AS(analyze(NdArray({4, 4}), spec), ShapeError);  // wrong rank
    MraSpec spec2{2, WaveletKind::Haar, 4};
    REQUIRE_THROWS_AS(analyze(NdArray({4, 8}), spec2), ShapeError); // mixed extents
}

TEST_CASE("missing blocks are a structural error") {
    MraSpec spec{1, WaveletKind::Haar, 3};
    auto coeffs = analyze(NdArray({8}), spec);
    coeffs.blocks.erase({2});
    REQUIRE_THROWS_AS(synthesize(coeffs), StructureError);
}

TEST_CASE("product analysis keeps per-factor structure") {
    MraSpec s1{1, WaveletKind::Haar, 4};
    MraSpec s2{2, WaveletKind::Haar, 3};
    NdArray x = random_array({16, 8, 8}, 11);
    const auto coeffs = analyze_product(x, {s1, s2});
    REQUIRE(coeffs.factor_count() == 2);
    REQUIRE(coeffs.levels == std::vector<int>{4, 3});
    // block sizes are products of the per-factor detail dimensions
    REQUIRE(coeffs.blocks.at({2, 3}).size() ==
            static_cast<std::size_t>(detail_dim(1, 2) * detail_dim(2, 3)));
    const auto back = synthesize(coeffs);
    for (std::int64_t i = 0; i < x.size(); ++i) REQUIRE(back[i] == Catch::Approx(x[i]).margin(1e-12));
}
