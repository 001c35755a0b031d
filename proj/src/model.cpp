#include "sbro/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sbro/rng.hpp"

namespace sbro {

namespace {

void check_finite(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw std::runtime_error(std::string(what) + ": non-finite parameter value");
        }
    }
}

void check_shape(const std::vector<int>& shape) {
    if (shape.size() < 2) {
        throw std::invalid_argument("model shape needs at least input and output dims");
    }
    for (int d : shape) {
        if (d < 1) throw std::invalid_argument("model shape dims must be >= 1");
    }
}

void check_compat(const ModelParams& params, const Dataset& data) {
    if (data.rows() == 0) throw std::invalid_argument("empty dataset");
    if (params.shape.front() != data.input_dim) {
        throw std::invalid_argument("input_dim does not match model shape");
    }
    if (params.shape.back() != data.num_classes) {
        throw std::invalid_argument("num_classes does not match model shape");
    }
    if (params.values.size() != param_count(params.shape)) {
        throw std::invalid_argument("parameter vector length does not match shape");
    }
}

// Activations for every layer of one sample: act[0] is the input,
// act.back() the logits. Hidden layers use tanh.
void forward_all(const ModelParams& params, const double* x,
                 std::vector<std::vector<double>>& act) {
    const auto& dims = params.shape;
    const std::size_t num_layers = dims.size() - 1;
    act.resize(dims.size());
    act[0].assign(x, x + dims[0]);
    std::size_t off = 0;
    for (std::size_t l = 0; l < num_layers; ++l) {
        const int in = dims[l];
        const int out = dims[l + 1];
        const double* w = params.values.data() + off;
        const double* b = w + static_cast<std::size_t>(in) * out;
        act[l + 1].assign(out, 0.0);
        for (int o = 0; o < out; ++o) {
            double s = b[o];
            const double* wrow = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) s += wrow[i] * act[l][i];
            act[l + 1][o] = s;
        }
        if (l + 1 < num_layers) {
            for (double& v : act[l + 1]) v = std::tanh(v);
        }
        off += static_cast<std::size_t>(in) * out + out;
    }
}

// Stable softmax in place; returns log(sum(exp)) + max for the loss.
double softmax_inplace(std::vector<double>& z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (double& v : z) v /= sum;
    return std::log(sum) + zmax;
}

// Accumulates the cross-entropy gradient of one sample into grad (same flat
// layout as params). Returns the sample's loss.
double backward_sample(const ModelParams& params, const double* x, int label,
                       std::vector<double>& grad,
                       std::vector<std::vector<double>>& act_scratch) {
    const auto& dims = params.shape;
    const std::size_t num_layers = dims.size() - 1;
    forward_all(params, x, act_scratch);

    std::vector<double> probs = act_scratch.back();
    const double lse = softmax_inplace(probs);
    const double sample_loss = lse - act_scratch.back()[label];

    // delta = dL/d(pre-activation) of the current layer, starting at logits.
    std::vector<double> delta = probs;
    delta[label] -= 1.0;

    // Walk layers backwards, accumulating dW, db and propagating delta.
    std::vector<std::size_t> offsets(num_layers);
    std::size_t off = 0;
    for (std::size_t l = 0; l < num_layers; ++l) {
        offsets[l] = off;
        off += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
    }
    for (std::size_t l = num_layers; l-- > 0;) {
        const int in = dims[l];
        const int out = dims[l + 1];
        const double* w = params.values.data() + offsets[l];
        double* gw = grad.data() + offsets[l];
        double* gb = gw + static_cast<std::size_t>(in) * out;
        const std::vector<double>& input = act_scratch[l];
        for (int o = 0; o < out; ++o) {
            double* gwrow = gw + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) gwrow[i] += delta[o] * input[i];
            gb[o] += delta[o];
        }
        if (l > 0) {
            std::vector<double> prev(in, 0.0);
            for (int i = 0; i < in; ++i) {
                double s = 0.0;
                for (int o = 0; o < out; ++o) {
                    s += w[static_cast<std::size_t>(o) * in + i] * delta[o];
                }
                // input holds tanh outputs for hidden layers
                prev[i] = s * (1.0 - input[i] * input[i]);
            }
            delta = std::move(prev);
        }
    }
    return sample_loss;
}

std::vector<double> batch_gradient(const ModelParams& params, const Dataset& data,
                                   const std::vector<std::size_t>& idx) {
    std::vector<double> grad(params.values.size(), 0.0);
    std::vector<std::vector<double>> scratch;
    for (std::size_t i : idx) {
        backward_sample(params, data.row(i), data.labels[i], grad, scratch);
    }
    const double inv = 1.0 / static_cast<double>(idx.size());
    for (double& g : grad) g *= inv;
    return grad;
}

}  // namespace

void Dataset::validate() const {
    if (num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
    if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
    if (features.size() != rows() * static_cast<std::size_t>(input_dim)) {
        throw std::invalid_argument("feature matrix size does not match labels");
    }
    for (int l : labels) {
        if (l < 0 || l >= num_classes) throw std::invalid_argument("label out of range");
    }
}

void TrainConfig::validate() const {
    // Zero is a legal degenerate step size; only reject negatives and NaN.
    if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (local_steps < 1) throw std::invalid_argument("local_steps must be >= 1");
}

std::size_t param_count(const std::vector<int>& shape) {
    check_shape(shape);
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < shape.size(); ++l) {
        n += static_cast<std::size_t>(shape[l]) * shape[l + 1] + shape[l + 1];
    }
    return n;
}

ModelParams init_model(const std::vector<int>& shape, std::uint64_t seed) {
    check_shape(shape);
    ModelParams p;
    p.shape = shape;
    p.values.reserve(param_count(shape));
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < shape.size(); ++l) {
        const double s = 1.0 / std::sqrt(static_cast<double>(shape[l]));
        const std::size_t layer_params =
            static_cast<std::size_t>(shape[l]) * shape[l + 1] + shape[l + 1];
        for (std::size_t k = 0; k < layer_params; ++k) {
            p.values.push_back(rng.uniform(-s, s));
        }
    }
    return p;
}

std::vector<double> forward(const ModelParams& params, const double* x) {
    std::vector<std::vector<double>> act;
    forward_all(params, x, act);
    return act.back();
}

double loss(const ModelParams& params, const Dataset& data) {
    check_compat(params, data);
    double total = 0.0;
    std::vector<std::vector<double>> act;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        forward_all(params, data.row(i), act);
        std::vector<double> probs = act.back();
        const double lse = softmax_inplace(probs);
        total += lse - act.back()[data.labels[i]];
    }
    return total / static_cast<double>(data.rows());
}

std::vector<double> loss_gradient(const ModelParams& params, const Dataset& data) {
    check_compat(params, data);
    std::vector<std::size_t> idx(data.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return batch_gradient(params, data, idx);
}

ModelParams local_train(const ModelParams& params, const Dataset& data, const TrainConfig& cfg) {
    check_compat(params, data);
    ModelParams out = params;
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    std::size_t cursor = 0;

    std::vector<std::size_t> batch;
    for (int step = 0; step < cfg.local_steps; ++step) {
        if (cursor >= order.size()) {
            rng.shuffle(order);
            cursor = 0;
        }
        const std::size_t take =
            std::min<std::size_t>(cfg.batch_size, order.size() - cursor);
        batch.assign(order.begin() + cursor, order.begin() + cursor + take);
        cursor += take;

        const std::vector<double> grad = batch_gradient(out, data, batch);
        for (std::size_t k = 0; k < out.values.size(); ++k) {
            out.values[k] -= cfg.learning_rate * grad[k];
        }
    }
    check_finite(out.values, "local_train");
    return out;
}

double evaluate(const ModelParams& params, const Dataset& data, Metric metric) {
    check_compat(params, data);
    (void)metric;  // accuracy is the only metric
    std::size_t correct = 0;
    std::vector<std::vector<double>> act;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        forward_all(params, data.row(i), act);
        const std::vector<double>& scores = act.back();
        int best = 0;
        for (int c = 1; c < data.num_classes; ++c) {
            if (scores[c] > scores[best]) best = c;  // ties keep the lowest index
        }
        if (best == data.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.rows());
}

ModelParams aggregate(const std::vector<ModelParams>& updates, const std::vector<double>& weights) {
    if (updates.empty()) throw std::invalid_argument("aggregate: empty update list");
    if (updates.size() != weights.size()) {
        throw std::invalid_argument("aggregate: updates/weights length mismatch");
    }
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) {
            throw std::invalid_argument("aggregate: weights must be nonnegative");
        }
        total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("aggregate: zero total weight");
    for (const ModelParams& u : updates) {
        if (u.shape != updates.front().shape) {
            throw std::invalid_argument("aggregate: mismatched shapes");
        }
    }
    ModelParams out;
    out.shape = updates.front().shape;
    out.values.assign(updates.front().values.size(), 0.0);
    for (std::size_t j = 0; j < updates.size(); ++j) {
        const double w = weights[j] / total;
        const auto& vals = updates[j].values;
        for (std::size_t k = 0; k < vals.size(); ++k) out.values[k] += w * vals[k];
    }
    check_finite(out.values, "aggregate");
    return out;
}

}  // namespace sbro
