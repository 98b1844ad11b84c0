#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ctkit/acquisition.hpp"
#include "test_support.hpp"

using namespace ctkit;
using namespace testsup;

TEST_CASE("noiseless counts follow the exponential law exactly") {
    auto geom = make_geometry(2, GridShape(8, 8, 1.0), 10, 1.0);
    Sinogram sino(geom);

    SECTION("zero attenuation passes every photon") {
        auto rec = simulate_intensity(sino, 1000.0, false);
        for (double c : rec.counts) REQUIRE(c == 1000.0);
    }
    SECTION("ln 2 halves the beam") {
        for (auto& v : sino.data) v = std::log(2.0);
        auto rec = simulate_intensity(sino, 1000.0, false);
        for (double c : rec.counts) REQUIRE(std::abs(c - 500.0) < 1e-9);
    }
}

TEST_CASE("Poisson sample mean matches the attenuated intensity") {
    // 1e5 bins at p = 1, i0 = 1e4: mean must sit within 1% of 1e4 / e.
    ParallelGeometry geom(equispaced_angles(100), 1000, 1.0, GridShape(8, 8, 1.0));
    Sinogram sino(geom);
    for (auto& v : sino.data) v = 1.0;
    auto rec = simulate_intensity(sino, 1e4, true, 42);
    double mean = 0.0;
    for (double c : rec.counts) mean += c;
    mean /= static_cast<double>(rec.counts.size());
    const double expected = 1e4 * std::exp(-1.0);
    REQUIRE(std::abs(mean - expected) / expected < 0.01);
}

TEST_CASE("noisy acquisition is deterministic per seed") {
    auto geom = make_geometry(4, GridShape(8, 8, 1.0), 12, 1.0);
    auto sino = random_sinogram(geom, 7, 0.0, 3.0);
    auto a = simulate_intensity(sino, 5e3, true, 123);
    auto b = simulate_intensity(sino, 5e3, true, 123);
    auto c = simulate_intensity(sino, 5e3, true, 124);
    REQUIRE(a.counts == b.counts);
    REQUIRE(a.counts != c.counts);
}

TEST_CASE("zero draws are clamped to half a photon") {
    auto geom = make_geometry(4, GridShape(8, 8, 1.0), 16, 1.0);
    Sinogram sino(geom);
    for (auto& v : sino.data) v = 12.0; // mean ~ 6e-3 photons at i0 = 1000
    auto rec = simulate_intensity(sino, 1000.0, true, 5);
    bool saw_clamp = false;
    for (double c : rec.counts) {
        REQUIRE(c > 0.0);
        if (c == 0.5) saw_clamp = true;
    }
    REQUIRE(saw_clamp);
}

TEST_CASE("unphysical acquisition inputs are rejected") {
    auto geom = make_geometry(2, GridShape(8, 8, 1.0), 8, 1.0);
    Sinogram sino(geom);
    REQUIRE_THROWS_AS(simulate_intensity(sino, 0.0, false), invalid_input);
    sino.data[3] = -0.25;
    REQUIRE_THROWS_AS(simulate_intensity(sino, 100.0, false), invalid_input);
}

TEST_CASE("log normalization inverts the noiseless acquisition") {
    auto geom = make_geometry(6, GridShape(16, 16, 1.0), 24, 1.0);
    auto sino = random_sinogram(geom, 99, 0.0, 4.0);
    auto rec = simulate_intensity(sino, 2.5e4, false);
    auto back = log_normalize(rec);
    for (std::size_t i = 0; i < sino.data.size(); ++i)
        REQUIRE(rel_err(back.data[i], sino.data[i]) < 1e-12);
}

TEST_CASE("log normalization pins the two reference points") {
    auto geom = make_geometry(1, GridShape(8, 8, 1.0), 4, 1.0);
    IntensityRecord rec(geom, 1234.0, false);

    for (auto& c : rec.counts) c = 1234.0;
    auto p0 = log_normalize(rec);
    for (double v : p0.data) REQUIRE(v == 0.0);

    for (auto& c : rec.counts) c = 1234.0 / std::numbers::e;
    auto p1 = log_normalize(rec);
    for (double v : p1.data) REQUIRE(std::abs(v - 1.0) < 1e-12);
}

TEST_CASE("nonpositive counts are rejected by log normalization") {
    auto geom = make_geometry(1, GridShape(8, 8, 1.0), 4, 1.0);
    IntensityRecord rec(geom, 100.0, false);
    rec.counts[2] = 0.0;
    REQUIRE_THROWS_AS(log_normalize(rec), invalid_input);
}
