#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sbro {

// Flat parameter vector for a feed-forward classifier. `shape` lists the
// layer widths (input_dim, hidden..., num_classes); with no hidden layers
// the model is multinomial logistic regression, otherwise an MLP with tanh
// hidden activations. Per layer the flat layout is the weight matrix
// (out x in, row-major) followed by the bias (out).
struct ModelParams {
    std::vector<double> values;
    std::vector<int> shape;
};

struct Dataset {
    std::vector<double> features;  // row-major, rows() x input_dim
    std::vector<int> labels;
    int num_classes = 0;
    int input_dim = 0;

    std::size_t rows() const { return labels.size(); }
    const double* row(std::size_t i) const { return features.data() + i * input_dim; }
    void validate() const;
};

struct TrainConfig {
    double learning_rate = 0.01;
    int batch_size = 16;
    int local_steps = 20;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class Metric { accuracy };

std::size_t param_count(const std::vector<int>& shape);

// Uniform init in [-s, s] with s = 1/sqrt(fan_in) per layer, biases included.
ModelParams init_model(const std::vector<int>& shape, std::uint64_t seed);

// Mean softmax cross-entropy over the dataset.
double loss(const ModelParams& params, const Dataset& data);

// Analytic gradient of loss(); same flat layout as params.values.
std::vector<double> loss_gradient(const ModelParams& params, const Dataset& data);

// Class scores (pre-softmax logits) for one sample.
std::vector<double> forward(const ModelParams& params, const double* x);

// cfg.local_steps mini-batch SGD steps. Batch order is a seeded shuffle,
// drawn without replacement; the pool is reshuffled when exhausted and the
// last partial batch is used as is. Input params are not modified.
ModelParams local_train(const ModelParams& params, const Dataset& data, const TrainConfig& cfg);

// Fraction of argmax-correct predictions; score ties resolve to the lowest
// class index.
double evaluate(const ModelParams& params, const Dataset& data, Metric metric = Metric::accuracy);

// Weighted mean of parameter vectors; weights are normalized to sum 1.
ModelParams aggregate(const std::vector<ModelParams>& updates, const std::vector<double>& weights);

}  // namespace sbro
