#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tcage/dataset.hpp"

namespace tcage {

struct EncodingConfig {
    int grid_start = 100;
    int grid_end = 150;
    int grid_step = 5;
    int window_radius = 10;

    int grid_points() const { return (grid_end - grid_start) / grid_step + 1; }
};

struct EncodedSample {
    std::string planet_id;
    int spot_config_index = 0;
    Eigen::VectorXd features;  // grid_points*C radius aggregates + aux params
    Eigen::VectorXd target;
};

struct EncodedDataset {
    Eigen::MatrixXd X;                 // n x (grid_points*C + aux)
    Eigen::MatrixXd Y;                 // n x C
    std::vector<std::string> groups;   // planet id per row
    std::vector<int> spots;            // spot config per row
};

// R_p/R_s = sqrt(1 - min(1, f))
double flux_to_radius(double f);

// n / sum(1/v); all values must be strictly positive.
double harmonic_window_aggregate(std::span<const double> values);

// Series stacked with its reflection about `center` (t -> 2*center - t).
// Column j < L is the original sample at t=j; column L+j the mirrored one.
// `valid[col]` is false where the mirrored index falls outside [0, L).
struct MirrorStacked {
    Eigen::MatrixXd values;          // C x 2L
    std::vector<std::uint8_t> valid; // per column
};
MirrorStacked mirror_stack(const Eigen::MatrixXd& flux, int center);

// Harmonic aggregate over the window [t-r, t+r] of one channel, taken from
// the original and mirrored series of every block (noise instance).
// Values are clamped below at 1e-9 before aggregation. `count_out`, when
// given, receives the number of observations aggregated.
double window_aggregate(std::span<const LightCurveBlock* const> blocks, int channel,
                        int t, int window_radius, int center, int* count_out = nullptr);

EncodedSample encode_group(std::span<const LightCurveBlock* const> blocks,
                           const PlanetSystem& planet, const EncodingConfig& cfg,
                           int transit_center);

EncodedDataset encode_dataset(const Dataset& ds, const EncodingConfig& cfg,
                              int threads = 1);

// CSV export (header planet_id,spot,f...,t...) with a sidecar JSON that
// records the encoding config and feature ordering.
void export_encoded_csv(const EncodedDataset& enc, const EncodingConfig& cfg,
                        const std::filesystem::path& csv_path);

}  // namespace tcage
