#include "tcage/encode.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tcage/parallel.hpp"

namespace tcage {

namespace {
constexpr double kFluxFloor = 1e-9;
}

double flux_to_radius(double f) {
    if (!std::isfinite(f)) throw std::invalid_argument("flux must be finite");
    return std::sqrt(1.0 - std::min(1.0, f));
}

double harmonic_window_aggregate(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("harmonic mean of empty window");
    double inv_sum = 0.0;
    for (double v : values) {
        if (!(v > 0.0)) throw std::invalid_argument("harmonic mean requires positive values");
        inv_sum += 1.0 / v;
    }
    return static_cast<double>(values.size()) / inv_sum;
}

MirrorStacked mirror_stack(const Eigen::MatrixXd& flux, int center) {
    const int L = static_cast<int>(flux.cols());
    if (center <= 0 || center >= L) throw std::invalid_argument("center out of range");
    MirrorStacked out;
    out.values.setZero(flux.rows(), 2 * L);
    out.valid.assign(static_cast<std::size_t>(2 * L), 0);
    out.values.leftCols(L) = flux;
    std::fill(out.valid.begin(), out.valid.begin() + L, 1);
    for (int t = 0; t < L; ++t) {
        int m = 2 * center - t;
        if (m >= 0 && m < L) {
            out.values.col(L + t) = flux.col(m);
            out.valid[static_cast<std::size_t>(L + t)] = 1;
        }
    }
    return out;
}

double window_aggregate(std::span<const LightCurveBlock* const> blocks, int channel,
                        int t, int window_radius, int center, int* count_out) {
    double inv_sum = 0.0;
    int count = 0;
    for (const LightCurveBlock* b : blocks) {
        const Eigen::MatrixXd& flux = b->flux;
        const int L = static_cast<int>(flux.cols());
        for (int u = t - window_radius; u <= t + window_radius; ++u) {
            // The direct and mirrored samples of each time step are summed as
            // a pair, so the aggregate is bitwise invariant under time
            // reversal of the series about `center`.
            int m = 2 * center - u;
            bool has_u = u >= 0 && u < L;
            bool has_m = m >= 0 && m < L;
            if (has_u && has_m) {
                inv_sum += 1.0 / std::max(flux(channel, u), kFluxFloor) +
                           1.0 / std::max(flux(channel, m), kFluxFloor);
                count += 2;
            } else if (has_u) {
                inv_sum += 1.0 / std::max(flux(channel, u), kFluxFloor);
                count += 1;
            } else if (has_m) {
                inv_sum += 1.0 / std::max(flux(channel, m), kFluxFloor);
                count += 1;
            }
        }
    }
    if (count_out) *count_out = count;
    if (count == 0) throw std::invalid_argument("empty aggregation window");
    return static_cast<double>(count) / inv_sum;
}

EncodedSample encode_group(std::span<const LightCurveBlock* const> blocks,
                           const PlanetSystem& planet, const EncodingConfig& cfg,
                           int transit_center) {
    if (blocks.size() != kNoiseInstances)
        throw std::invalid_argument("encode_group expects exactly 10 noise-instance blocks");
    const int spot = blocks[0]->spot_config_index;
    for (const LightCurveBlock* b : blocks) {
        if (b->planet_id != planet.planet_id || b->spot_config_index != spot)
            throw std::invalid_argument("encode_group blocks must share (planet, spot)");
    }
    const int C = static_cast<int>(blocks[0]->flux.rows());
    const int G = cfg.grid_points();

    EncodedSample s;
    s.planet_id = planet.planet_id;
    s.spot_config_index = spot;
    s.features.resize(C * G + kAuxParams);
    // channel-major, grid-minor; aux params appended last
    for (int c = 0; c < C; ++c) {
        for (int g = 0; g < G; ++g) {
            int t = cfg.grid_start + g * cfg.grid_step;
            double hm = window_aggregate(blocks, c, t, cfg.window_radius, transit_center);
            s.features[c * G + g] = flux_to_radius(hm);
        }
    }
    for (int i = 0; i < kAuxParams; ++i) s.features[C * G + i] = planet.aux_params[i];
    s.target = planet.target_spectrum;
    return s;
}

EncodedDataset encode_dataset(const Dataset& ds, const EncodingConfig& cfg, int threads) {
    const int n_planets = static_cast<int>(ds.planets.size());
    const int n = n_planets * kSpotConfigs;
    const int C = ds.channels;
    const int d = C * cfg.grid_points() + kAuxParams;

    EncodedDataset enc;
    enc.X.resize(n, d);
    enc.Y.resize(n, C);
    enc.groups.resize(n);
    enc.spots.resize(n);

    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t row) {
        int pi = static_cast<int>(row) / kSpotConfigs;
        int spot = static_cast<int>(row) % kSpotConfigs;
        std::vector<const LightCurveBlock*> blocks;
        blocks.reserve(kNoiseInstances);
        std::size_t base = (static_cast<std::size_t>(pi) * kSpotConfigs + spot) * kNoiseInstances;
        for (int i = 0; i < kNoiseInstances; ++i) blocks.push_back(&ds.blocks[base + i]);
        EncodedSample s = encode_group(blocks, ds.planets[pi], cfg, ds.transit_center);
        enc.X.row(row) = s.features.transpose();
        enc.Y.row(row) = s.target.transpose();
        enc.groups[row] = s.planet_id;
        enc.spots[row] = s.spot_config_index;
    });
    return enc;
}

void export_encoded_csv(const EncodedDataset& enc, const EncodingConfig& cfg,
                        const std::filesystem::path& csv_path) {
    std::ofstream os(csv_path);
    if (!os) throw std::runtime_error("cannot open " + csv_path.string());
    const int d = static_cast<int>(enc.X.cols());
    const int m = static_cast<int>(enc.Y.cols());
    os << "planet_id,spot";
    char h[16];
    for (int i = 0; i < d; ++i) {
        std::snprintf(h, sizeof(h), ",f%03d", i);
        os << h;
    }
    for (int i = 0; i < m; ++i) {
        std::snprintf(h, sizeof(h), ",t%02d", i);
        os << h;
    }
    os << "\n";
    char buf[32];
    for (Eigen::Index r = 0; r < enc.X.rows(); ++r) {
        os << enc.groups[r] << ',' << enc.spots[r];
        for (int i = 0; i < d; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", enc.X(r, i));
            os << ',' << buf;
        }
        for (int i = 0; i < m; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", enc.Y(r, i));
            os << ',' << buf;
        }
        os << "\n";
    }

    nlohmann::json side;
    side["grid_start"] = cfg.grid_start;
    side["grid_end"] = cfg.grid_end;
    side["grid_step"] = cfg.grid_step;
    side["window_radius"] = cfg.window_radius;
    side["feature_order"] =
        "channel-major radius aggregates (channel c, grid point g at column "
        "c*grid_points+g), then the 6 auxiliary star/planet parameters";
    side["flux_floor"] = kFluxFloor;
    std::filesystem::path sidecar = csv_path;
    sidecar.replace_extension(".json");
    std::ofstream js(sidecar);
    js << side.dump(2) << "\n";
}

}  // namespace tcage
