#include "tcage/model_io.hpp"

#include <fstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace tcage {

namespace {

constexpr int kModelFormatVersion = 1;

using json = nlohmann::json;

void write_payload(const std::filesystem::path& base, const std::vector<double>& payload) {
    std::filesystem::path bin = base;
    bin += ".bin";
    std::ofstream os(bin, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + bin.string());
    os.write(reinterpret_cast<const char*>(payload.data()),
             static_cast<std::streamsize>(payload.size() * sizeof(double)));
}

std::vector<double> read_payload(const std::filesystem::path& base, std::size_t expected) {
    std::filesystem::path bin = base;
    bin += ".bin";
    std::ifstream is(bin, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + bin.string());
    std::vector<double> payload(expected);
    is.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(expected * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != expected * sizeof(double))
        throw std::runtime_error("model payload truncated: " + bin.string());
    return payload;
}

void write_meta(const std::filesystem::path& base, json meta) {
    meta["format_version"] = kModelFormatVersion;
    std::filesystem::path js = base;
    js += ".json";
    std::ofstream os(js);
    if (!os) throw std::runtime_error("cannot write " + js.string());
    os << meta.dump(2) << "\n";
}

json read_meta(const std::filesystem::path& base, const std::string& expected_type) {
    std::filesystem::path js = base;
    js += ".json";
    std::ifstream is(js);
    if (!is) throw std::runtime_error("cannot read " + js.string());
    json meta = json::parse(is);
    if (meta.at("format_version").get<int>() != kModelFormatVersion)
        throw std::runtime_error("unsupported model format version");
    if (meta.at("model_type").get<std::string>() != expected_type)
        throw std::runtime_error("model type mismatch, expected " + expected_type);
    return meta;
}

void append(std::vector<double>& payload, const Eigen::VectorXd& v) {
    payload.insert(payload.end(), v.data(), v.data() + v.size());
}

void append(std::vector<double>& payload, const Eigen::MatrixXd& m) {
    // row-major
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) payload.push_back(m(r, c));
}

}  // namespace

void save_model(const Standardizer& m, const std::filesystem::path& base) {
    std::vector<double> payload;
    append(payload, m.means);
    append(payload, m.scales);
    write_payload(base, payload);
    write_meta(base, {{"model_type", "standardizer"},
                      {"dim", m.means.size()},
                      {"layout", "means[d], scales[d]"}});
}

Standardizer load_standardizer(const std::filesystem::path& base) {
    json meta = read_meta(base, "standardizer");
    auto d = meta.at("dim").get<Eigen::Index>();
    auto payload = read_payload(base, static_cast<std::size_t>(2 * d));
    Standardizer m;
    m.means = Eigen::Map<const Eigen::VectorXd>(payload.data(), d);
    m.scales = Eigen::Map<const Eigen::VectorXd>(payload.data() + d, d);
    return m;
}

void save_model(const RidgeModel& m, const std::filesystem::path& base) {
    std::vector<double> payload;
    append(payload, m.coefficients);
    append(payload, m.intercepts);
    append(payload, m.feature_means);
    write_payload(base, payload);
    write_meta(base, {{"model_type", "ridge"},
                      {"alpha", m.alpha},
                      {"dim", m.coefficients.rows()},
                      {"outputs", m.coefficients.cols()},
                      {"layout", "coefficients[d*m row-major], intercepts[m], feature_means[d]"}});
}

RidgeModel load_ridge(const std::filesystem::path& base) {
    json meta = read_meta(base, "ridge");
    auto d = meta.at("dim").get<Eigen::Index>();
    auto m_out = meta.at("outputs").get<Eigen::Index>();
    auto payload = read_payload(base, static_cast<std::size_t>(d * m_out + m_out + d));
    RidgeModel m;
    m.alpha = meta.at("alpha").get<double>();
    m.coefficients.resize(d, m_out);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < m_out; ++c) m.coefficients(r, c) = payload[k++];
    m.intercepts = Eigen::Map<const Eigen::VectorXd>(payload.data() + k, m_out);
    k += static_cast<std::size_t>(m_out);
    m.feature_means = Eigen::Map<const Eigen::VectorXd>(payload.data() + k, d);
    return m;
}

void save_model(const PcaModel& m, const std::filesystem::path& base) {
    std::vector<double> payload;
    append(payload, m.mean);
    append(payload, m.components);
    append(payload, m.explained_variances);
    write_payload(base, payload);
    write_meta(base, {{"model_type", "pca"},
                      {"dim", m.mean.size()},
                      {"k", m.components.rows()},
                      {"layout", "mean[d], components[k*d row-major], explained_variances[k]"}});
}

PcaModel load_pca(const std::filesystem::path& base) {
    json meta = read_meta(base, "pca");
    auto d = meta.at("dim").get<Eigen::Index>();
    auto k = meta.at("k").get<Eigen::Index>();
    auto payload = read_payload(base, static_cast<std::size_t>(d + k * d + k));
    PcaModel m;
    m.mean = Eigen::Map<const Eigen::VectorXd>(payload.data(), d);
    m.components.resize(k, d);
    std::size_t p = static_cast<std::size_t>(d);
    for (Eigen::Index r = 0; r < k; ++r)
        for (Eigen::Index c = 0; c < d; ++c) m.components(r, c) = payload[p++];
    m.explained_variances = Eigen::Map<const Eigen::VectorXd>(payload.data() + p, k);
    return m;
}

void save_model(const IsolationForestModel& m, const std::filesystem::path& base) {
    // nodes flattened as (feature, threshold, left, right, size) quintuples
    std::vector<double> payload;
    json tree_sizes = json::array();
    for (const auto& tree : m.trees) {
        tree_sizes.push_back(tree.nodes.size());
        for (const auto& nd : tree.nodes) {
            payload.push_back(static_cast<double>(nd.feature));
            payload.push_back(nd.threshold);
            payload.push_back(static_cast<double>(nd.left));
            payload.push_back(static_cast<double>(nd.right));
            payload.push_back(static_cast<double>(nd.size));
        }
    }
    write_payload(base, payload);
    write_meta(base, {{"model_type", "iforest"},
                      {"dim", m.dim},
                      {"subsample_size", m.subsample_size},
                      {"offset", m.offset},
                      {"seed", m.seed},
                      {"tree_node_counts", tree_sizes},
                      {"layout", "per tree, per node: feature, threshold, left, right, size"}});
}

IsolationForestModel load_iforest(const std::filesystem::path& base) {
    json meta = read_meta(base, "iforest");
    IsolationForestModel m;
    m.dim = meta.at("dim").get<int>();
    m.subsample_size = meta.at("subsample_size").get<int>();
    m.offset = meta.at("offset").get<double>();
    m.seed = meta.at("seed").get<std::uint64_t>();
    std::vector<std::size_t> counts = meta.at("tree_node_counts").get<std::vector<std::size_t>>();
    std::size_t total = 0;
    for (auto c : counts) total += c;
    auto payload = read_payload(base, total * 5);
    std::size_t p = 0;
    m.trees.resize(counts.size());
    for (std::size_t t = 0; t < counts.size(); ++t) {
        m.trees[t].nodes.resize(counts[t]);
        for (auto& nd : m.trees[t].nodes) {
            nd.feature = static_cast<int>(payload[p++]);
            nd.threshold = payload[p++];
            nd.left = static_cast<int>(payload[p++]);
            nd.right = static_cast<int>(payload[p++]);
            nd.size = static_cast<int>(payload[p++]);
        }
    }
    return m;
}

}  // namespace tcage
