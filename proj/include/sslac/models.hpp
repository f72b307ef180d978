#pragma once

#include <cstdint>
#include <vector>

#include "sslac/network.hpp"

namespace sslac {

// Upsampling generator for 28x28x1 images: dense projection to a low-res
// feature map, then (upsample2x, conv s1, batch-norm, relu) blocks and a
// final bounded-output convolution.
struct GeneratorSpec {
    int z_length = 100;
    int base_size = 7;  // spatial side of the dense projection
    int base_channels = 64;
    std::vector<int> up_filters = {64, 32};  // one entry per upsample block
    double bn_momentum = 0.8;
    double init_std = 0.02;
};

// Strided-convolution discriminator: input Gaussian noise, (conv s2, relu,
// dropout) blocks, flatten, dense K+1 logit head. No output activation --
// the losses own the readout.
struct DiscriminatorSpec {
    std::vector<int> conv_filters = {32, 64, 128};
    double dropout_rate = 0.4;
    double noise_std = 0.2;
    double init_std = 0.02;
};

// Dense-only pair for the 2-D synthetic domain.
struct MlpPairSpec {
    int z_length = 8;
    std::vector<int> generator_hidden = {64, 64, 64};
    std::vector<int> discriminator_hidden = {64, 64, 64};
    double init_std = 0.02;
    // The generator starts broad so its counter-examples sweep the whole
    // plane before settling near the data.
    double generator_init_std = 0.8;
};

// Builders validate output shapes at build time with a dry forward pass
// and throw on a spec that cannot reach the declared geometry.
Network build_generator(const GeneratorSpec& spec, std::uint64_t seed);
Network build_discriminator(int k, const DiscriminatorSpec& spec, std::uint64_t seed);
Network build_mlp_generator(const MlpPairSpec& spec, std::uint64_t seed);
Network build_mlp_discriminator(int k, const MlpPairSpec& spec, std::uint64_t seed);

constexpr std::size_t kImageSide = 28;

// Per-sample argmax over (batch, K+1) logits, returning system classes in
// 1..K+1. Ties break toward the lowest index.
std::vector<int> classify(const NdArray& logits);

}  // namespace sslac
