#include "tcage/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include <zlib.h>

#include "tcage/parallel.hpp"
#include "tcage/rng.hpp"

namespace tcage {

namespace {

constexpr std::uint64_t kPlanetStream = 0x11;
constexpr std::uint64_t kNoiseStream = 0x22;
constexpr std::uint64_t kDriftTargetStream = 0x33;
constexpr std::uint64_t kDriftRedStream = 0x44;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string planet_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "P%06d", index);
    return buf;
}

void check_gen_args(int n_planets, int series_length) {
    if (n_planets < 1) throw std::invalid_argument("n_planets must be >= 1");
    if (series_length < 200 || series_length % 2 != 0)
        throw std::invalid_argument("series_length must be even and >= 200");
}

}  // namespace

double transit_profile(double t, double center, double depth, double flat_width,
                       double ramp_width) {
    double u = std::abs(t - center);
    double half_flat = 0.5 * flat_width;
    if (u <= half_flat) return 1.0 - depth;
    if (u <= half_flat + ramp_width)
        return 1.0 - depth * (1.0 - (u - half_flat) / ramp_width);
    return 1.0;
}

double spot_bump(double t, double center, double width) {
    double z = (t - center) / width;
    double q = 1.0 - z * z;
    if (q <= 0.0) return 0.0;
    return q * q;
}

double noiseless_flux(const PlanetGeometry& g, int spot, int channel, double t,
                      double transit_center) {
    double f = transit_profile(t, transit_center, g.depths[channel], g.flat_width,
                               g.ramp_width);
    double bump = spot_bump(t, g.spot_center[spot], g.spot_width[spot]);
    return f * (1.0 + g.spot_amp[spot] * bump);
}

PlanetGeometry sample_planet_geometry(std::uint64_t seed, int planet_index,
                                      int series_length) {
    Rng rng(derive_seed(seed, kPlanetStream, static_cast<std::uint64_t>(planet_index)));
    PlanetGeometry g;
    g.aux_params[0] = rng.uniform(3000.0, 7000.0);  // stellar temperature [K]
    g.aux_params[1] = rng.uniform(3.5, 5.0);        // log surface gravity
    g.aux_params[2] = rng.uniform(-0.5, 0.5);       // metallicity
    g.aux_params[3] = rng.uniform(0.5, 2.0);        // stellar radius [Rsun]
    g.aux_params[4] = rng.uniform(0.5, 10.0);       // orbital period [d]
    g.aux_params[5] = rng.uniform(0.1, 5.0);        // planet mass [Mjup]

    // base depth in [1e-4, 1e-2]: a mid bulk with thin shallow and deep
    // tails; smooth sinusoidal channel modulation
    double u = rng.uniform01();
    double d_base;
    if (u < 0.15)
        d_base = 1e-4 * std::exp(rng.uniform01() * std::log(3.0));
    else if (u < 0.96)
        d_base = 5e-4 * std::exp(rng.uniform01() * std::log(3.0));
    else
        d_base = 1.5e-3 * std::exp(rng.uniform01() * std::log(10.0 / 1.5));
    double m_amp = rng.uniform(0.0, 0.1);
    double m_freq = rng.uniform(0.5, 2.0);
    double m_phase = rng.uniform(0.0, 6.283185307179586);
    g.depths.resize(kChannels);
    for (int c = 0; c < kChannels; ++c) {
        double phase = m_phase + 6.283185307179586 * m_freq * c / kChannels;
        g.depths[c] = d_base * (1.0 + m_amp * std::sin(phase));
    }

    g.flat_width = rng.uniform(60.0, 80.0);
    g.ramp_width = rng.uniform(10.0, 20.0);

    g.noise_sigma.resize(kChannels);
    for (int c = 0; c < kChannels; ++c)
        g.noise_sigma[c] = rng.uniform(0.1, 1.0) * d_base;

    double center = 0.5 * series_length;
    for (int s = 0; s < kSpotConfigs; ++s) {
        g.spot_amp[s] = rng.uniform(0.0, 0.3) * d_base;
        if (rng.uniform01() < 0.5) g.spot_amp[s] = -g.spot_amp[s];
        g.spot_center[s] = center + rng.uniform(-30.0, 30.0);
        g.spot_width[s] = rng.uniform(30.0, 60.0);
    }
    return g;
}

Dataset generate_synthetic_planet(int planet_index, int series_length,
                                  std::uint64_t seed) {
    check_gen_args(planet_index + 1, series_length);
    const int L = series_length;
    const int center = L / 2;

    Dataset ds;
    ds.series_length = L;
    ds.channels = kChannels;
    ds.transit_center = center;

    PlanetGeometry g = sample_planet_geometry(seed, planet_index, L);
    PlanetSystem p;
    p.planet_id = planet_name(planet_index);
    p.aux_params = g.aux_params;
    p.target_spectrum.resize(kChannels);
    for (int c = 0; c < kChannels; ++c)
        p.target_spectrum[c] = std::sqrt(g.depths[c]);
    ds.planets.push_back(std::move(p));

    for (int s = 0; s < kSpotConfigs; ++s) {
        Eigen::MatrixXd base(kChannels, L);
        for (int c = 0; c < kChannels; ++c)
            for (int t = 0; t < L; ++t)
                base(c, t) = noiseless_flux(g, s, c, static_cast<double>(t),
                                            static_cast<double>(center));
        for (int n = 0; n < kNoiseInstances; ++n) {
            Rng noise(derive_seed(seed, kNoiseStream,
                                  (static_cast<std::uint64_t>(planet_index) << 16) |
                                      static_cast<std::uint64_t>(s * kNoiseInstances + n)));
            LightCurveBlock b;
            b.planet_id = ds.planets[0].planet_id;
            b.spot_config_index = s;
            b.noise_instance_index = n;
            b.flux = base;
            for (int c = 0; c < kChannels; ++c)
                for (int t = 0; t < L; ++t)
                    b.flux(c, t) += g.noise_sigma[c] * noise.normal();
            ds.blocks.push_back(std::move(b));
        }
    }
    return ds;
}

Dataset generate_synthetic_dataset(int n_planets, int series_length,
                                   std::uint64_t seed, int threads) {
    check_gen_args(n_planets, series_length);
    std::vector<Dataset> parts(n_planets);
    parallel_for(static_cast<std::size_t>(n_planets), threads, [&](std::size_t i) {
        parts[i] = generate_synthetic_planet(static_cast<int>(i), series_length, seed);
    });
    Dataset ds;
    ds.series_length = series_length;
    ds.channels = kChannels;
    ds.transit_center = series_length / 2;
    ds.planets.reserve(n_planets);
    ds.blocks.reserve(static_cast<std::size_t>(n_planets) * kSpotConfigs * kNoiseInstances);
    for (auto& part : parts) {
        ds.planets.push_back(std::move(part.planets[0]));
        for (auto& b : part.blocks) ds.blocks.push_back(std::move(b));
    }
    return ds;
}

Dataset inject_drift(const Dataset& ds, const DriftConfig& cfg) {
    if (!(cfg.gain_nonlinearity >= 0.0) || !(cfg.red_noise_amplitude >= 0.0) ||
        !(cfg.target_shift_sigma >= 0.0))
        throw std::invalid_argument("drift amplitudes must be finite and non-negative");

    Dataset out = ds;

    // keyed by planet id so results do not depend on planet ordering
    for (auto& p : out.planets) {
        if (cfg.target_shift_sigma > 0.0) {
            Rng rng(derive_seed(cfg.seed, kDriftTargetStream, fnv1a(p.planet_id)));
            for (int c = 0; c < out.channels; ++c) {
                double v = p.target_spectrum[c] + cfg.target_shift_sigma * rng.normal();
                p.target_spectrum[c] = std::clamp(v, 1e-12, 1.0 - 1e-12);
            }
        }
    }

    const int L = out.series_length;
    std::vector<double> red(L, 0.0);
    std::string red_key;
    int red_spot = -1;
    for (auto& b : out.blocks) {
        // AR(1) red-noise series shared across the noise instances of a spot
        if (cfg.red_noise_amplitude > 0.0 &&
            (b.planet_id != red_key || b.spot_config_index != red_spot)) {
            red_key = b.planet_id;
            red_spot = b.spot_config_index;
            Rng rng(derive_seed(cfg.seed, kDriftRedStream,
                                fnv1a(b.planet_id) ^
                                    (static_cast<std::uint64_t>(b.spot_config_index) << 56)));
            double e = cfg.red_noise_amplitude * rng.normal();
            for (int t = 0; t < L; ++t) {
                red[t] = e;
                e = 0.9 * e + cfg.red_noise_amplitude * rng.normal();
            }
        }
        for (int c = 0; c < out.channels; ++c) {
            for (int t = 0; t < L; ++t) {
                double f = b.flux(c, t);
                double v = f + cfg.gain_nonlinearity * (f - 1.0) * (f - 1.0);
                if (cfg.red_noise_amplitude > 0.0) v += red[t];
                b.flux(c, t) = v;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Binary persistence
//
// little-endian; header: "OCDS", version u16, n_planets u32, C u16, L u16,
// transit_center u16; per planet: length-prefixed id, 6 f64 aux, C f64
// targets; then blocks in (planet, spot, noise) order, C x L f64 row-major;
// trailing CRC32 over everything after the header.
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'O', 'C', 'D', 'S'};
constexpr std::uint16_t kFormatVersion = 1;

class ByteWriter {
public:
    explicit ByteWriter(std::ostream& os) : os_(os) {}
    void raw(const void* p, std::size_t n) {
        os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        crc_ = crc32(crc_, static_cast<const Bytef*>(p), static_cast<uInt>(n));
    }
    template <typename T>
    void pod(T v) { raw(&v, sizeof(T)); }
    void reset_crc() { crc_ = crc32(0L, Z_NULL, 0); }
    std::uint32_t crc() const { return static_cast<std::uint32_t>(crc_); }

private:
    std::ostream& os_;
    uLong crc_ = crc32(0L, Z_NULL, 0);
};

class ByteReader {
public:
    explicit ByteReader(std::istream& is) : is_(is) {}
    void raw(void* p, std::size_t n) {
        is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(is_.gcount()) != n)
            throw DatasetFormatError("unexpected end of data");
        crc_ = crc32(crc_, static_cast<const Bytef*>(p), static_cast<uInt>(n));
    }
    template <typename T>
    T pod() { T v; raw(&v, sizeof(T)); return v; }
    void reset_crc() { crc_ = crc32(0L, Z_NULL, 0); }
    std::uint32_t crc() const { return static_cast<std::uint32_t>(crc_); }

private:
    std::istream& is_;
    uLong crc_ = crc32(0L, Z_NULL, 0);
};

}  // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DatasetFormatError("cannot open file for writing: " + path.string());
    ByteWriter w(os);
    w.raw(kMagic, 4);
    w.pod<std::uint16_t>(kFormatVersion);
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(ds.planets.size()));
    w.pod<std::uint16_t>(static_cast<std::uint16_t>(ds.channels));
    w.pod<std::uint16_t>(static_cast<std::uint16_t>(ds.series_length));
    w.pod<std::uint16_t>(static_cast<std::uint16_t>(ds.transit_center));
    w.reset_crc();  // CRC covers the payload only
    for (const auto& p : ds.planets) {
        w.pod<std::uint32_t>(static_cast<std::uint32_t>(p.planet_id.size()));
        w.raw(p.planet_id.data(), p.planet_id.size());
        for (double v : p.aux_params) w.pod<double>(v);
        for (int c = 0; c < ds.channels; ++c) w.pod<double>(p.target_spectrum[c]);
    }
    for (const auto& b : ds.blocks) {
        for (int c = 0; c < ds.channels; ++c)
            for (int t = 0; t < ds.series_length; ++t) w.pod<double>(b.flux(c, t));
    }
    std::uint32_t crc = w.crc();
    w.pod<std::uint32_t>(crc);
    if (!os) throw DatasetFormatError("write failed: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DatasetFormatError("cannot open file: " + path.string());
    ByteReader r(is);
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw DatasetFormatError("bad magic");
    auto version = r.pod<std::uint16_t>();
    if (version != kFormatVersion) throw DatasetFormatError("unsupported format version");
    auto n_planets = r.pod<std::uint32_t>();
    auto channels = r.pod<std::uint16_t>();
    auto length = r.pod<std::uint16_t>();
    auto center = r.pod<std::uint16_t>();

    Dataset ds;
    ds.channels = channels;
    ds.series_length = length;
    ds.transit_center = center;
    r.reset_crc();
    ds.planets.resize(n_planets);
    for (auto& p : ds.planets) {
        auto id_len = r.pod<std::uint32_t>();
        p.planet_id.resize(id_len);
        r.raw(p.planet_id.data(), id_len);
        for (auto& v : p.aux_params) v = r.pod<double>();
        p.target_spectrum.resize(channels);
        for (int c = 0; c < channels; ++c) p.target_spectrum[c] = r.pod<double>();
    }
    ds.blocks.reserve(static_cast<std::size_t>(n_planets) * kSpotConfigs * kNoiseInstances);
    for (std::uint32_t pi = 0; pi < n_planets; ++pi) {
        for (int s = 0; s < kSpotConfigs; ++s) {
            for (int n = 0; n < kNoiseInstances; ++n) {
                LightCurveBlock b;
                b.planet_id = ds.planets[pi].planet_id;
                b.spot_config_index = s;
                b.noise_instance_index = n;
                b.flux.resize(channels, length);
                for (int c = 0; c < channels; ++c)
                    for (int t = 0; t < length; ++t) b.flux(c, t) = r.pod<double>();
                ds.blocks.push_back(std::move(b));
            }
        }
    }
    std::uint32_t expected = r.crc();
    std::uint32_t stored;
    is.read(reinterpret_cast<char*>(&stored), sizeof(stored));
    if (static_cast<std::size_t>(is.gcount()) != sizeof(stored))
        throw DatasetFormatError("unexpected end of data");
    if (stored != expected) throw DatasetFormatError("checksum mismatch");
    return ds;
}

void export_dataset_csv(const Dataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "params.csv");
        os << "planet_id";
        for (int i = 0; i < kAuxParams; ++i) os << ",p" << i;
        os << "\n";
        char buf[32];
        for (const auto& p : ds.planets) {
            os << p.planet_id;
            for (double v : p.aux_params) {
                std::snprintf(buf, sizeof(buf), "%.17g", v);
                os << ',' << buf;
            }
            os << "\n";
        }
    }
    {
        std::ofstream os(dir / "targets.csv");
        os << "planet_id";
        for (int c = 0; c < ds.channels; ++c) {
            char h[16];
            std::snprintf(h, sizeof(h), "t%02d", c);
            os << ',' << h;
        }
        os << "\n";
        char buf[32];
        for (const auto& p : ds.planets) {
            os << p.planet_id;
            for (int c = 0; c < ds.channels; ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", p.target_spectrum[c]);
                os << ',' << buf;
            }
            os << "\n";
        }
    }
}

bool datasets_equal(const Dataset& a, const Dataset& b) {
    if (a.series_length != b.series_length || a.channels != b.channels ||
        a.transit_center != b.transit_center ||
        a.planets.size() != b.planets.size() || a.blocks.size() != b.blocks.size())
        return false;
    for (std::size_t i = 0; i < a.planets.size(); ++i) {
        const auto& pa = a.planets[i];
        const auto& pb = b.planets[i];
        if (pa.planet_id != pb.planet_id || pa.aux_params != pb.aux_params) return false;
        if (std::memcmp(pa.target_spectrum.data(), pb.target_spectrum.data(),
                        sizeof(double) * pa.target_spectrum.size()) != 0)
            return false;
    }
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        const auto& ba = a.blocks[i];
        const auto& bb = b.blocks[i];
        if (ba.planet_id != bb.planet_id || ba.spot_config_index != bb.spot_config_index ||
            ba.noise_instance_index != bb.noise_instance_index)
            return false;
        if (std::memcmp(ba.flux.data(), bb.flux.data(),
                        sizeof(double) * ba.flux.size()) != 0)
            return false;
    }
    return true;
}

}  // namespace tcage
