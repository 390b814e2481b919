#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tcage/dataset.hpp"

using namespace tcage;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    fs::path d = fs::temp_directory_path() / "tcage_test_dataset";
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
}

}  // namespace

TEST_CASE("generation structure: 1 planet, L=300, seed=7") {
    Dataset ds = generate_synthetic_dataset(1, 300, 7);
    CHECK(ds.blocks.size() == 100);
    CHECK(ds.transit_center == 150);
    for (const auto& b : ds.blocks) {
        CHECK(b.flux.rows() == 55);
        CHECK(b.flux.cols() == 300);
        CHECK(b.flux.allFinite());
    }
    CHECK(ds.planets.size() == 1);
    CHECK(ds.planets[0].target_spectrum.size() == 55);
    for (int c = 0; c < 55; ++c) {
        CHECK(ds.planets[0].target_spectrum[c] > 0.0);
        CHECK(ds.planets[0].target_spectrum[c] < 1.0);
    }
}

TEST_CASE("generation is deterministic and planet-sliceable") {
    Dataset a = generate_synthetic_dataset(3, 300, 42);
    Dataset b = generate_synthetic_dataset(3, 300, 42, /*threads=*/4);
    CHECK(datasets_equal(a, b));

    Dataset p1 = generate_synthetic_planet(1, 300, 42);
    CHECK(p1.planets[0].planet_id == a.planets[1].planet_id);
    CHECK(p1.blocks[5].flux == a.blocks[100 + 5].flux);
}

TEST_CASE("generation rejects invalid sizes") {
    CHECK_THROWS_AS(generate_synthetic_dataset(0, 300, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_synthetic_dataset(1, 150, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_synthetic_dataset(1, 301, 1), std::invalid_argument);
}

TEST_CASE("noiseless flux at t=0 is exactly 1.0 out of transit") {
    PlanetGeometry g = sample_planet_geometry(123, 0, 300);
    for (int s = 0; s < kSpotConfigs; ++s)
        for (int c = 0; c < kChannels; ++c)
            CHECK(noiseless_flux(g, s, c, 0.0, 150.0) == 1.0);
}

TEST_CASE("trapezoid profile: depth 1e-4 gives min flux 0.9999 and radius 0.01") {
    double m = 2.0;
    for (int t = 0; t < 300; ++t)
        m = std::min(m, transit_profile(t, 150.0, 1e-4, 60.0, 20.0));
    CHECK(m == doctest::Approx(0.9999).epsilon(1e-15));
    CHECK(std::sqrt(1e-4) == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("noiseless fluxes stay within (0, 1.5]") {
    for (int p = 0; p < 5; ++p) {
        PlanetGeometry g = sample_planet_geometry(99, p, 300);
        for (int s = 0; s < kSpotConfigs; ++s)
            for (int c = 0; c < kChannels; c += 7)
                for (int t = 0; t < 300; ++t) {
                    double f = noiseless_flux(g, s, c, t, 150.0);
                    CHECK(f > 0.0);
                    CHECK(f <= 1.5);
                }
    }
}

TEST_CASE("inject_drift with zero amplitudes is the identity") {
    Dataset ds = generate_synthetic_dataset(2, 300, 5);
    Dataset out = inject_drift(ds, DriftConfig{0.0, 0.0, 0.0, 77});
    CHECK(datasets_equal(ds, out));
}

TEST_CASE("inject_drift gain nonlinearity") {
    Dataset ds = generate_synthetic_dataset(1, 300, 5);
    ds.blocks.resize(100);
    for (auto& b : ds.blocks) b.flux.setConstant(55, 300, 1.0);
    ds.blocks[0].flux(0, 0) = 0.99;

    Dataset out = inject_drift(ds, DriftConfig{1.0, 0.0, 0.0, 0});
    CHECK(out.blocks[0].flux(0, 0) == doctest::Approx(0.9901).epsilon(1e-15));
    CHECK(out.blocks[0].flux(0, 1) == 1.0);  // fixed point at out-of-transit level
}

TEST_CASE("inject_drift red noise is shared across noise instances of a spot") {
    Dataset ds = generate_synthetic_dataset(1, 300, 5);
    for (auto& b : ds.blocks) b.flux.setConstant(55, 300, 1.0);
    Dataset out = inject_drift(ds, DriftConfig{0.0, 1e-3, 0.0, 9});
    // same spot, different noise instance: identical red-noise series
    CHECK(out.blocks[0].flux == out.blocks[1].flux);
    // different spot: different series
    CHECK(out.blocks[0].flux != out.blocks[10].flux);
    // noise is temporally correlated and nonzero
    CHECK(out.blocks[0].flux(0, 0) != 1.0);
}

TEST_CASE("inject_drift perturbs targets within (0,1)") {
    Dataset ds = generate_synthetic_dataset(2, 300, 6);
    Dataset out = inject_drift(ds, DriftConfig{0.0, 0.0, 0.05, 3});
    bool changed = false;
    for (std::size_t p = 0; p < out.planets.size(); ++p)
        for (int c = 0; c < 55; ++c) {
            double v = out.planets[p].target_spectrum[c];
            CHECK(v > 0.0);
            CHECK(v < 1.0);
            changed = changed || v != ds.planets[p].target_spectrum[c];
        }
    CHECK(changed);
}

TEST_CASE("inject_drift rejects negative amplitudes") {
    Dataset ds = generate_synthetic_dataset(1, 300, 5);
    CHECK_THROWS_AS(inject_drift(ds, DriftConfig{-1.0, 0.0, 0.0, 0}), std::invalid_argument);
}

TEST_CASE("binary round trip is bit-exact") {
    fs::path dir = temp_dir();
    Dataset ds = generate_synthetic_dataset(2, 300, 11);
    fs::path p1 = dir / "a.bin";
    fs::path p2 = dir / "b.bin";
    save_dataset(ds, p1);
    Dataset loaded = load_dataset(p1);
    CHECK(datasets_equal(ds, loaded));
    save_dataset(loaded, p2);
    CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("load errors are distinct") {
    fs::path dir = temp_dir();
    Dataset ds = generate_synthetic_dataset(1, 300, 2);
    fs::path p = dir / "c.bin";
    save_dataset(ds, p);
    std::string bytes = slurp(p);

    SUBCASE("bad magic") {
        std::string bad = bytes;
        bad[0] = 'X';
        fs::path q = dir / "bad_magic.bin";
        std::ofstream(q, std::ios::binary).write(bad.data(), bad.size());
        CHECK_THROWS_WITH_AS(load_dataset(q), "bad magic", DatasetFormatError);
    }
    SUBCASE("truncated payload") {
        fs::path q = dir / "trunc.bin";
        std::ofstream(q, std::ios::binary).write(bytes.data(), bytes.size() / 2);
        CHECK_THROWS_WITH_AS(load_dataset(q), "unexpected end of data", DatasetFormatError);
    }
    SUBCASE("checksum mismatch") {
        std::string bad = bytes;
        bad[bytes.size() / 2] ^= 0x5A;
        fs::path q = dir / "crc.bin";
        std::ofstream(q, std::ios::binary).write(bad.data(), bad.size());
        CHECK_THROWS_WITH_AS(load_dataset(q), "checksum mismatch", DatasetFormatError);
    }
}

TEST_CASE("csv export writes params and targets") {
    fs::path dir = temp_dir() / "csv";
    Dataset ds = generate_synthetic_dataset(2, 300, 1);
    export_dataset_csv(ds, dir);
    std::string params = slurp(dir / "params.csv");
    std::string targets = slurp(dir / "targets.csv");
    CHECK(params.find("planet_id,p0,p1,p2,p3,p4,p5") == 0);
    CHECK(targets.find("planet_id,t00") == 0);
    CHECK(params.find(ds.planets[1].planet_id) != std::string::npos);
}
