#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sslac/layers.hpp"

namespace sslac {

// A feed-forward stack of layers. Parameter gradients accumulate across
// backward passes until zero_grads(), so composite losses can combine
// several forward/backward sweeps into one optimizer step.
class Network {
public:
    Network() = default;
    Network(Network&&) = default;
    Network& operator=(Network&&) = default;

    void add(std::unique_ptr<Layer> layer);

    NdArray forward(const NdArray& input, bool training);
    NdArray backward(const NdArray& grad_output);

    std::vector<Param*> params();
    void zero_grads();
    bool has_grads() const { return has_grads_; }

    void set_reuse_noise(bool reuse);

    std::size_t layer_count() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_[i]; }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
    bool forward_done_ = false;
    bool has_grads_ = false;
};

// Snapshot of a network's parameter values rounded through 32-bit floats,
// the same precision the checkpoint file stores. Restoring a snapshot is
// therefore bit-identical to a save/load round trip.
struct ParamSnapshot {
    std::vector<std::vector<float>> values;

    static ParamSnapshot capture(Network& net);
    void restore(Network& net) const;
};

// Adaptive-moment optimizer over a network's trainable parameters.
class AdamOptimizer {
public:
    AdamOptimizer(double learning_rate, double beta1 = 0.5, double beta2 = 0.999,
                  double eps = 1e-8)
        : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(Network& net);

    long steps_taken() const { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

// Checkpoint file: magic, config text blob, then flat (name, shape,
// little-endian float32 data) records for every parameter.
void save_checkpoint(const std::string& path, Network& net, const std::string& config_text);

struct CheckpointRecord {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<float> data;
};

struct Checkpoint {
    std::string config_text;
    std::vector<CheckpointRecord> records;
};

Checkpoint read_checkpoint(const std::string& path);

// Loads parameter values into an already-built network; names and shapes
// must match exactly.
void load_checkpoint(const std::string& path, Network& net, std::string* config_text = nullptr);

// Finite-difference verification: compares the analytic gradient of
// loss(net.forward(input)) with central differences over every trainable
// parameter and returns the worst relative discrepancy. The loss callback
// must return both the scalar and its gradient w.r.t. the network output.
struct ScalarLoss {
    double value;
    NdArray grad;
};

double grad_check(Network& net, const NdArray& input,
                  const std::function<ScalarLoss(const NdArray&)>& loss, double eps,
                  bool training_mode = true);

}  // namespace sslac
