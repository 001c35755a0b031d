#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sbro/model.hpp"

namespace sbro {

struct ClientDataset {
    int client_id = 0;
    Dataset data;
    double flip_ratio = 0.0;
    bool is_clean = true;
};

struct FlipGroup {
    int count = 0;
    double ratio = 0.0;
};

struct PartitionSpec {
    int num_clients = 0;
    int samples_total = 0;
    std::vector<FlipGroup> flip_groups;
    std::uint64_t seed = 0;

    void validate() const;
};

struct BidSpec {
    enum class Mode { gaussian, tiered };
    Mode mode = Mode::gaussian;
    double mean = 10.0;
    double variance = 1.0;
    std::vector<std::pair<double, double>> tiers;  // flip_ratio -> bid
    double floor = 0.01;
    std::uint64_t seed = 0;

    void validate() const;
};

// Isotropic Gaussian blobs, one per class. Class means sit on a seeded
// random sphere of radius class_separation; per-class covariance is the
// identity. Class counts differ by at most one.
Dataset generate_synthetic(int num_classes, int input_dim, int samples,
                           double class_separation, std::uint64_t seed);

// Seeded shuffle, equal disjoint shards of spec.samples_total samples, flip
// groups assigned to a seeded random permutation of client ids. Flip ratios
// are recorded but not yet applied.
std::vector<ClientDataset> partition(const Dataset& data, const PartitionSpec& spec);

// Replaces the labels of exactly round(flip_ratio * size) seeded-chosen
// samples with a uniformly chosen different label.
ClientDataset flip_labels(const ClientDataset& cd, int num_classes, std::uint64_t seed);

// Gaussian mode: i.i.d. seeded draws clamped below at spec.floor. Tiered
// mode: exact per-client lookup by flip ratio.
std::vector<double> generate_bids(const BidSpec& spec, const std::vector<ClientDataset>& clients);

// IDX-format loader (big-endian, magic 2051 images / 2049 labels). Pixels
// scale to [0,1]; images are row-flattened.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

}  // namespace sbro
