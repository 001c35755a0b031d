#include "sbro/data.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "sbro/rng.hpp"

namespace sbro {

namespace {

constexpr double kRatioTol = 1e-12;

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

std::uint32_t read_u32_be(std::istream& in, const std::string& path) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4)) {
        throw std::runtime_error("truncated IDX file: " + path);
    }
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

}  // namespace

void PartitionSpec::validate() const {
    if (num_clients < 1) throw std::invalid_argument("num_clients must be >= 1");
    if (samples_total < 1) throw std::invalid_argument("samples_total must be >= 1");
    if (samples_total % num_clients != 0) {
        throw std::invalid_argument("samples_total must be divisible by num_clients");
    }
    int total = 0;
    for (const FlipGroup& g : flip_groups) {
        if (g.count < 0) throw std::invalid_argument("flip group count must be >= 0");
        if (g.ratio < 0.0 || g.ratio > 1.0) {
            throw std::invalid_argument("flip ratio must be in [0,1]");
        }
        total += g.count;
    }
    if (total != num_clients) {
        throw std::invalid_argument("flip group counts must sum to num_clients");
    }
}

void BidSpec::validate() const {
    if (floor <= 0.0) throw std::invalid_argument("bid floor must be > 0");
    if (mode == Mode::gaussian) {
        if (variance < 0.0) throw std::invalid_argument("bid variance must be >= 0");
    } else {
        for (const auto& [ratio, bid] : tiers) {
            if (ratio < 0.0 || ratio > 1.0) {
                throw std::invalid_argument("tier flip ratio must be in [0,1]");
            }
            if (bid <= 0.0) throw std::invalid_argument("tier bids must be > 0");
        }
    }
}

Dataset generate_synthetic(int num_classes, int input_dim, int samples,
                           double class_separation, std::uint64_t seed) {
    if (num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
    if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
    if (samples < num_classes) throw std::invalid_argument("samples must be >= num_classes");
    if (class_separation <= 0.0) throw std::invalid_argument("class_separation must be > 0");

    Rng rng(seed);

    // Class means: standard normal direction, normalized, scaled to radius.
    std::vector<std::vector<double>> means(num_classes, std::vector<double>(input_dim));
    for (auto& mean : means) {
        double norm_sq = 0.0;
        for (double& v : mean) {
            v = rng.normal();
            norm_sq += v * v;
        }
        double norm = std::sqrt(norm_sq);
        if (norm < 1e-12) {
            mean.assign(input_dim, 0.0);
            mean[0] = 1.0;
            norm = 1.0;
        }
        for (double& v : mean) v *= class_separation / norm;
    }

    Dataset out;
    out.num_classes = num_classes;
    out.input_dim = input_dim;
    out.features.reserve(static_cast<std::size_t>(samples) * input_dim);
    out.labels.reserve(samples);
    const int base = samples / num_classes;
    const int extra = samples % num_classes;
    for (int c = 0; c < num_classes; ++c) {
        const int count = base + (c < extra ? 1 : 0);
        for (int k = 0; k < count; ++k) {
            for (int d = 0; d < input_dim; ++d) {
                out.features.push_back(means[c][d] + rng.normal());
            }
            out.labels.push_back(c);
        }
    }
    return out;
}

std::vector<ClientDataset> partition(const Dataset& data, const PartitionSpec& spec) {
    spec.validate();
    data.validate();
    if (static_cast<std::size_t>(spec.samples_total) > data.rows()) {
        throw std::invalid_argument("samples_total exceeds dataset size");
    }

    Rng rng(spec.seed);
    std::vector<std::size_t> idx(data.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(idx);

    // Flip ratios land on a seeded random permutation of client ids.
    std::vector<double> ratio_of_client;
    ratio_of_client.reserve(spec.num_clients);
    for (const FlipGroup& g : spec.flip_groups) {
        for (int k = 0; k < g.count; ++k) ratio_of_client.push_back(g.ratio);
    }
    std::vector<int> client_order(spec.num_clients);
    std::iota(client_order.begin(), client_order.end(), 0);
    rng.shuffle(client_order);
    std::vector<double> ratios(spec.num_clients, 0.0);
    for (int j = 0; j < spec.num_clients; ++j) {
        ratios[client_order[j]] = ratio_of_client[j];
    }

    const int shard = spec.samples_total / spec.num_clients;
    std::vector<ClientDataset> clients;
    clients.reserve(spec.num_clients);
    for (int c = 0; c < spec.num_clients; ++c) {
        ClientDataset cd;
        cd.client_id = c;
        cd.flip_ratio = ratios[c];
        cd.is_clean = (ratios[c] == 0.0);
        cd.data.num_classes = data.num_classes;
        cd.data.input_dim = data.input_dim;
        cd.data.features.reserve(static_cast<std::size_t>(shard) * data.input_dim);
        cd.data.labels.reserve(shard);
        for (int k = 0; k < shard; ++k) {
            const std::size_t src = idx[static_cast<std::size_t>(c) * shard + k];
            const double* row = data.row(src);
            cd.data.features.insert(cd.data.features.end(), row, row + data.input_dim);
            cd.data.labels.push_back(data.labels[src]);
        }
        clients.push_back(std::move(cd));
    }
    return clients;
}

ClientDataset flip_labels(const ClientDataset& cd, int num_classes, std::uint64_t seed) {
    if (cd.flip_ratio > 0.0 && num_classes < 2) {
        throw std::invalid_argument("label flipping needs at least 2 classes");
    }
    ClientDataset out = cd;
    const int n = static_cast<int>(cd.data.rows());
    const int flips = round_half_up(cd.flip_ratio * n);
    if (flips == 0) return out;

    Rng rng(seed);
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    for (int k = 0; k < flips; ++k) {
        int& label = out.data.labels[idx[k]];
        // uniform over the other num_classes-1 labels
        int pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_classes - 1)));
        if (pick >= label) ++pick;
        label = pick;
    }
    return out;
}

std::vector<double> generate_bids(const BidSpec& spec, const std::vector<ClientDataset>& clients) {
    spec.validate();
    std::vector<double> bids;
    bids.reserve(clients.size());
    if (spec.mode == BidSpec::Mode::gaussian) {
        Rng rng(spec.seed);
        const double stddev = std::sqrt(spec.variance);
        for (std::size_t i = 0; i < clients.size(); ++i) {
            bids.push_back(std::max(spec.floor, rng.normal(spec.mean, stddev)));
        }
    } else {
        for (const ClientDataset& cd : clients) {
            bool found = false;
            for (const auto& [ratio, bid] : spec.tiers) {
                if (std::abs(ratio - cd.flip_ratio) <= kRatioTol) {
                    bids.push_back(bid);
                    found = true;
                    break;
                }
            }
            if (!found) {
                throw std::invalid_argument("no bid tier covers flip ratio " +
                                            std::to_string(cd.flip_ratio));
            }
        }
    }
    return bids;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("cannot open " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("cannot open " + labels_path);

    if (read_u32_be(img, images_path) != 2051u) {
        throw std::runtime_error("bad IDX image magic in " + images_path);
    }
    const std::uint32_t num_images = read_u32_be(img, images_path);
    const std::uint32_t rows = read_u32_be(img, images_path);
    const std::uint32_t cols = read_u32_be(img, images_path);

    if (read_u32_be(lab, labels_path) != 2049u) {
        throw std::runtime_error("bad IDX label magic in " + labels_path);
    }
    const std::uint32_t num_labels = read_u32_be(lab, labels_path);
    if (num_images != num_labels) {
        throw std::runtime_error("IDX image/label count mismatch");
    }

    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    Dataset out;
    out.input_dim = static_cast<int>(pixels);
    out.features.resize(num_images * pixels);
    out.labels.resize(num_labels);

    std::vector<unsigned char> buf(pixels);
    for (std::uint32_t i = 0; i < num_images; ++i) {
        if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels))) {
            throw std::runtime_error("truncated IDX file: " + images_path);
        }
        for (std::size_t p = 0; p < pixels; ++p) {
            out.features[i * pixels + p] = buf[p] / 255.0;
        }
    }
    int max_label = 0;
    for (std::uint32_t i = 0; i < num_labels; ++i) {
        unsigned char b;
        if (!lab.read(reinterpret_cast<char*>(&b), 1)) {
            throw std::runtime_error("truncated IDX file: " + labels_path);
        }
        out.labels[i] = b;
        max_label = std::max(max_label, static_cast<int>(b));
    }
    out.num_classes = max_label + 1;
    out.validate();
    return out;
}

}  // namespace sbro
