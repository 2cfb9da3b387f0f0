#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "mixrank/wavelet.hpp"

using namespace mixrank;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = uni(rng);
    return v;
}

// Independent route for one analysis step: circular convolution with the
// published taps, downsampled by two.
void reference_step(const WaveletFamily& fam, const std::vector<double>& x,
                    std::vector<double>& approx, std::vector<double>& detail) {
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    const std::int64_t k = n / 2;
    approx.assign(static_cast<std::size_t>(k), 0.0);
    detail.assign(static_cast<std::size_t>(k), 0.0);
    const auto lo = fam.analysis_low().values();
    const auto hi = fam.analysis_high().values();
    for (std::int64_t i = 0; i < k; ++i) {
        for (std::size_t t = 0; t < lo.size(); ++t) {
            const std::int64_t p = ((2 * i + fam.analysis_low().offset + static_cast<std::int64_t>(t)) % n + n) % n;
            approx[static_cast<std::size_t>(i)] += lo[t] * x[static_cast<std::size_t>(p)];
        }
        for (std::size_t t = 0; t < hi.size(); ++t) {
            const std::int64_t p = ((2 * i + fam.analysis_high().offset + static_cast<std::int64_t>(t)) % n + n) % n;
            detail[static_cast<std::size_t>(i)] += hi[t] * x[static_cast<std::size_t>(p)];
        }
    }
}

} // namespace

TEST_CASE("perfect reconstruction on random vectors") {
    for (const auto* fam : {&WaveletFamily::haar(), &WaveletFamily::biorthogonal22()}) {
        for (int J = 1; J <= 10; ++J) {
            auto v = random_vector(std::size_t{1} << J, 1000 + static_cast<std::uint64_t>(J));
            auto original = v;
            analyze_1d(*fam, v);
            synthesize_1d(*fam, v);
            for (std::size_t i = 0; i < v.size(); ++i)
                REQUIRE(v[i] == Catch::Approx(original[i]).margin(1e-12));
        }
    }
}

TEST_CASE("haar transform is orthonormal") {
    auto v = random_vector(256, 7);
    double before = 0.0, after = 0.0;
    for (double x : v) before += x * x;
    analyze_1d(WaveletFamily::haar(), v);
    for (double x : v) after += x * x;
    REQUIRE(std::sqrt(after) == Catch::Approx(std::sqrt(before)).epsilon(1e-12));
}

TEST_CASE("filter taps are exact dyadics and reproduce the transform") {
    for (const auto* fam : {&WaveletFamily::haar(), &WaveletFamily::biorthogonal22()}) {
        for (const auto* taps : {&fam->analysis_low(), &fam->analysis_high(),
                                 &fam->synthesis_low(), &fam->synthesis_high()}) {
            REQUIRE(!taps->num.empty());
            REQUIRE(taps->den_log2 >= 0);
        }
        const auto x = random_vector(32, 42);
        std::vector<double> approx(16), detail(16), ref_a, ref_d;
        fam->forward_step(x, approx, detail);
        reference_step(*fam, x, ref_a, ref_d);
        for (std::size_t i = 0; i < 16; ++i) {
            REQUIRE(approx[i] == Catch::Approx(ref_a[i]).margin(1e-13));
            REQUIRE(detail[i] == Catch::Approx(ref_d[i]).margin(1e-13));
        }
    }
}

TEST_CASE("polynomial exactness of the detail filters") {
    SECTION("haar kills constants") {
        std::vector<double> x(16, 3.25), a(8), d(8);
        WaveletFamily::haar().forward_step(x, a, d);
        for (double v : d) REQUIRE(v == Catch::Approx(0.0).margin(1e-14));
    }
    SECTION("biorthogonal order 2 kills linears away from the wrap") {
        std::vector<double> x(16), a(8), d(8);
        for (std::size_t p = 0; p < x.size(); ++p) x[p] = 0.5 + 0.25 * static_cast<double>(p);
        WaveletFamily::biorthogonal22().forward_step(x, a, d);
        for (std::size_t i = 0; i + 1 < d.size(); ++i)
            REQUIRE(d[i] == Catch::Approx(0.0).margin(1e-13));
        REQUIRE(std::abs(d.back()) > 0.1); // periodic wrap sees the jump
    }
}

TEST_CASE("hierarchical layout levels") {
    REQUIRE(hierarchical_level(0) == 0);
    REQUIRE(hierarchical_level(1) == 1);
    REQUIRE(hierarchical_level(2) == 2);
    REQUIRE(hierarchical_level(3) == 2);
    REQUIRE(hierarchical_level(4) == 3);
    REQUIRE(hierarchical_level(7) == 3);
    REQUIRE(hierarchical_level(8) == 4);
}

TEST_CASE("step rejects inconsistent extents") {
    std::vector<double> x(8), a(3), d(4);
    REQUIRE_THROWS_AS(WaveletFamily::haar().forward_step(x, a, d), ShapeError);
}
