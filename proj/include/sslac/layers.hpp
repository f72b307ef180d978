#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sslac/ndarray.hpp"
#include "sslac/rng.hpp"

namespace sslac {

// One named parameter tensor with its gradient and optimizer moment state.
// Non-trainable entries (batch-norm running statistics) are checkpointed but
// skipped by the optimizer.
struct Param {
    std::string name;
    NdArray value;
    NdArray grad;
    NdArray m;
    NdArray v;
    bool trainable = true;

    Param(std::string n, NdArray val, bool train = true)
        : name(std::move(n)),
          value(std::move(val)),
          grad(value.shape()),
          m(value.shape()),
          v(value.shape()),
          trainable(train) {}
};

class Layer {
public:
    virtual ~Layer() = default;

    virtual NdArray forward(const NdArray& input, bool training) = 0;

    // Propagates the loss gradient; parameter gradients are accumulated
    // (+=) so several forward/backward passes can share one optimizer step.
    virtual NdArray backward(const NdArray& grad_output) = 0;

    virtual std::vector<Param*> params() { return {}; }
    virtual std::string kind() const = 0;

    // When set, stochastic layers (dropout, gaussian noise) replay their
    // last drawn mask instead of sampling a fresh one. Used by the
    // finite-difference gradient checker.
    virtual void set_reuse_noise(bool) {}
};

class Dense : public Layer {
public:
    Dense(std::size_t in_features, std::size_t out_features, RngStream& init_rng,
          double init_std = 0.02);

    NdArray forward(const NdArray& input, bool training) override;
    NdArray backward(const NdArray& grad_output) override;
    std::vector<Param*> params() override { return {&weight_, &bias_}; }
    std::string kind() const override { return "dense"; }

private:
    std::size_t in_, out_;
    Param weight_, bias_;
    NdArray last_input_;
};

// 3x3 convolution with same padding on NHWC tensors, stride 1 or 2.
class Conv2d : public Layer {
public:
    Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t stride,
           RngStream& init_rng, double init_std = 0.02);

    NdArray forward(const NdArray& input, bool training) override;
    NdArray backward(const NdArray& grad_output) override;
    std::vector<Param*> params() override { return {&weight_, &bias_}; }
    std::string kind() const override { return "conv"; }

    static constexpr std::size_t kKernel = 3;
    static constexpr std::size_t kPad = 1;

private:
    std::size_t in_ch_, out_ch_, stride_;
    Param weight_;  // (3, 3, in_ch, out_ch)
    Param bias_;    // (out_ch)
    NdArray last_input_;
};

// Nearest-neighbour 2x spatial upsampling on NHWC tensors.
class Upsample2x : public Layer {
public:
    NdArray forward(const NdArray& input, bool training) override;
    NdArray backward(const NdArray& grad_output) override;
    std::string kind() const override { return "upsample2x"; }

private:
    std::vector<std::size_t> last_shape_;
};

// Normalizes over all axes except the last (features/channels), keeping
// exponential running statistics for inference mode.
class BatchNorm : public Layer {
public:
    BatchNorm(std::size_t channels, double momentum);

    NdArray forward(const NdArray& input, bool training) override;
    NdArray backward(const NdArray& grad_output) override;
    std::vector<Param*> params() override {
        return {&gamma_, &beta_, &running_mean_, &running_var_};
    }
    std::string kind() const override { return "batch_norm"; }

    static constexpr double kEps = 1e-5;

private:
    std::size_t channels_;
    double momentum_;
    Param gamma_, beta_;
    Param running_mean_, running_var_;  // state, not optimized
    NdArray last_xhat_;
    std::vector<double> last_inv_std_;
    std::vector<std::size_t> last_shape_;
};

class Relu : public Layer {
public:
    NdArray forward(const NdArray& input, bool training) override;
    NdArray backward(const NdArray& grad_output) override;
    std::string kind() const override { return "relu"; }

private:
    NdArray last_input_;
};

class TanhLayer : public Layer {
public:
    NdArray forward(const NdArray& input, bool training) override;
    NdArray backward(const NdArray& grad_output) override;
    std::string kind() const override { return "tanh"; }

private:
    NdArray last_output_;
};

// Inverted dropout; identity in inference mode.
class Dropout : public Layer {
public:
    Dropout(double rate, RngStream rng);

    NdArray forward(const NdArray& input, bool training) override;
    NdArray backward(const NdArray& grad_output) override;
    std::string kind() const override { return "dropout"; }
    void set_reuse_noise(bool reuse) override { reuse_noise_ = reuse; }

private:
    double rate_;
    RngStream rng_;
    NdArray mask_;
    bool reuse_noise_ = false;
    bool last_training_ = false;
};

// Additive zero-mean Gaussian noise; identity in inference mode.
class GaussianNoise : public Layer {
public:
    GaussianNoise(double stddev, RngStream rng);

    NdArray forward(const NdArray& input, bool training) override;
    NdArray backward(const NdArray& grad_output) override;
    std::string kind() const override { return "gaussian_noise"; }
    void set_reuse_noise(bool reuse) override { reuse_noise_ = reuse; }

private:
    double stddev_;
    RngStream rng_;
    NdArray noise_;
    bool reuse_noise_ = false;
};

// Collapses all axes after the batch axis.
class Flatten : public Layer {
public:
    NdArray forward(const NdArray& input, bool training) override;
    NdArray backward(const NdArray& grad_output) override;
    std::string kind() const override { return "flatten"; }

private:
    std::vector<std::size_t> last_shape_;
};

// Expands (batch, h*w*c) into (batch, h, w, c).
class Reshape : public Layer {
public:
    Reshape(std::size_t h, std::size_t w, std::size_t c) : h_(h), w_(w), c_(c) {}

    NdArray forward(const NdArray& input, bool training) override;
    NdArray backward(const NdArray& grad_output) override;
    std::string kind() const override { return "reshape"; }

private:
    std::size_t h_, w_, c_;
};

}  // namespace sslac
