#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tcage {

inline constexpr int kChannels = 55;
inline constexpr int kSpotConfigs = 10;
inline constexpr int kNoiseInstances = 10;
inline constexpr int kAuxParams = 6;

struct PlanetSystem {
    std::string planet_id;
    std::array<double, kAuxParams> aux_params{};
    Eigen::VectorXd target_spectrum;  // 55 relative radii, each in (0, 1)
};

struct LightCurveBlock {
    std::string planet_id;
    int spot_config_index = 0;
    int noise_instance_index = 0;
    Eigen::MatrixXd flux;  // channels x series_length, relative flux
};

struct Dataset {
    int series_length = 300;
    int channels = kChannels;
    int transit_center = 150;
    std::vector<PlanetSystem> planets;
    std::vector<LightCurveBlock> blocks;  // (planet, spot, noise) order
};

struct DriftConfig {
    double gain_nonlinearity = 0.0;
    double red_noise_amplitude = 0.0;
    double target_shift_sigma = 0.0;
    std::uint64_t seed = 0;
};

// Sampled per-planet generation parameters, exposed so the noiseless
// signal path can be inspected directly.
struct PlanetGeometry {
    std::array<double, kAuxParams> aux_params{};
    Eigen::VectorXd depths;    // per-channel transit depth
    double flat_width = 0.0;   // full width of the flat transit bottom
    double ramp_width = 0.0;   // ingress/egress duration
    Eigen::VectorXd noise_sigma;  // per-channel photon-noise sigma
    // per-spot smooth multiplicative bump: amplitude, center, half-width
    std::array<double, kSpotConfigs> spot_amp{};
    std::array<double, kSpotConfigs> spot_center{};
    std::array<double, kSpotConfigs> spot_width{};
};

// Trapezoidal transit profile: 1.0 out of transit, 1-depth across the flat
// bottom, linear ramps of the given width.
double transit_profile(double t, double center, double depth, double flat_width,
                       double ramp_width);

// Compactly supported smooth bump, zero outside |t-center| >= width.
double spot_bump(double t, double center, double width);

// Noiseless flux for one (spot, channel, time) cell of a planet.
double noiseless_flux(const PlanetGeometry& g, int spot, int channel, double t,
                      double transit_center);

// Deterministic per-planet parameter draw; the RNG stream is a documented
// split of (seed, planet_index).
PlanetGeometry sample_planet_geometry(std::uint64_t seed, int planet_index,
                                      int series_length);

// Single-planet slice of the synthetic dataset: identical content to planet
// `planet_index` of generate_synthetic_dataset(n, L, seed) for any n large
// enough. Enables streaming generation at scale.
Dataset generate_synthetic_planet(int planet_index, int series_length,
                                  std::uint64_t seed);

Dataset generate_synthetic_dataset(int n_planets, int series_length,
                                   std::uint64_t seed, int threads = 1);

Dataset inject_drift(const Dataset& ds, const DriftConfig& cfg);

// Binary persistence, bit-exact round trip. Errors surface as
// DatasetFormatError with a message naming the defect.
class DatasetFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

// CSV inspection exports: params.csv and targets.csv in `dir`.
void export_dataset_csv(const Dataset& ds, const std::filesystem::path& dir);

bool datasets_equal(const Dataset& a, const Dataset& b);

}  // namespace tcage
