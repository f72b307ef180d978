#include "sslac/models.hpp"

#include <memory>
#include <stdexcept>

#include "sslac/rng.hpp"

namespace sslac {

namespace {

void check_output_shape(Network& net, const NdArray& probe,
                        const std::vector<std::size_t>& expected, const char* what) {
    NdArray out = net.forward(probe, /*training=*/false);
    if (out.shape() != expected) {
        throw std::invalid_argument(std::string(what) + ": spec produces output shape " +
                                    NdArray::shape_string(out.shape()) + ", expected " +
                                    NdArray::shape_string(expected));
    }
}

}  // namespace

Network build_generator(const GeneratorSpec& spec, std::uint64_t seed) {
    if (spec.z_length < 1) {
        throw std::invalid_argument("build_generator: z_length must be >= 1");
    }
    RngStream init = RngStream::derive(seed, "generator/init");

    Network net;
    const std::size_t base = static_cast<std::size_t>(spec.base_size);
    const std::size_t base_ch = static_cast<std::size_t>(spec.base_channels);
    net.add(std::make_unique<Dense>(spec.z_length, base * base * base_ch, init, spec.init_std));
    net.add(std::make_unique<Reshape>(base, base, base_ch));
    net.add(std::make_unique<BatchNorm>(base_ch, spec.bn_momentum));
    net.add(std::make_unique<Relu>());
    std::size_t channels = base_ch;
    for (int filters : spec.up_filters) {
        net.add(std::make_unique<Upsample2x>());
        net.add(std::make_unique<Conv2d>(channels, filters, 1, init, spec.init_std));
        net.add(std::make_unique<BatchNorm>(filters, spec.bn_momentum));
        net.add(std::make_unique<Relu>());
        channels = static_cast<std::size_t>(filters);
    }
    net.add(std::make_unique<Conv2d>(channels, 1, 1, init, spec.init_std));
    net.add(std::make_unique<TanhLayer>());

    NdArray probe({1, static_cast<std::size_t>(spec.z_length)});
    check_output_shape(net, probe, {1, kImageSide, kImageSide, 1}, "build_generator");
    return net;
}

Network build_discriminator(int k, const DiscriminatorSpec& spec, std::uint64_t seed) {
    if (k < 1) {
        throw std::invalid_argument("build_discriminator: k must be >= 1");
    }
    RngStream init = RngStream::derive(seed, "discriminator/init");

    Network net;
    net.add(std::make_unique<GaussianNoise>(
        spec.noise_std, RngStream::derive(seed, "discriminator/input-noise")));
    std::size_t channels = 1;
    std::size_t side = kImageSide;
    int block = 0;
    for (int filters : spec.conv_filters) {
        net.add(std::make_unique<Conv2d>(channels, filters, 2, init, spec.init_std));
        net.add(std::make_unique<Relu>());
        net.add(std::make_unique<Dropout>(
            spec.dropout_rate,
            RngStream::derive(seed, "discriminator/dropout-" + std::to_string(block))));
        channels = static_cast<std::size_t>(filters);
        side = (side + 1) / 2;  // 3x3 stride-2 same padding
        ++block;
    }
    net.add(std::make_unique<Flatten>());
    net.add(std::make_unique<Dense>(side * side * channels, static_cast<std::size_t>(k + 1), init,
                                    spec.init_std));

    NdArray probe({1, kImageSide, kImageSide, 1});
    check_output_shape(net, probe, {1, static_cast<std::size_t>(k + 1)}, "build_discriminator");
    return net;
}

Network build_mlp_generator(const MlpPairSpec& spec, std::uint64_t seed) {
    if (spec.z_length < 1) {
        throw std::invalid_argument("build_mlp_generator: z_length must be >= 1");
    }
    RngStream init = RngStream::derive(seed, "mlp-generator/init");
    Network net;
    std::size_t width = static_cast<std::size_t>(spec.z_length);
    for (int hidden : spec.generator_hidden) {
        net.add(std::make_unique<Dense>(width, hidden, init, spec.generator_init_std));
        net.add(std::make_unique<Relu>());
        width = static_cast<std::size_t>(hidden);
    }
    net.add(std::make_unique<Dense>(width, 2, init, spec.generator_init_std));
    return net;
}

Network build_mlp_discriminator(int k, const MlpPairSpec& spec, std::uint64_t seed) {
    if (k < 1) {
        throw std::invalid_argument("build_mlp_discriminator: k must be >= 1");
    }
    RngStream init = RngStream::derive(seed, "mlp-discriminator/init");
    Network net;
    std::size_t width = 2;
    for (int hidden : spec.discriminator_hidden) {
        net.add(std::make_unique<Dense>(width, hidden, init, spec.init_std));
        net.add(std::make_unique<Relu>());
        width = static_cast<std::size_t>(hidden);
    }
    net.add(std::make_unique<Dense>(width, static_cast<std::size_t>(k + 1), init, spec.init_std));
    return net;
}

std::vector<int> classify(const NdArray& logits) {
    if (logits.ndim() != 2) {
        throw std::invalid_argument("classify: expected (batch, K+1) logits, got " +
                                    NdArray::shape_string(logits.shape()));
    }
    const std::size_t batch = logits.dim(0);
    const std::size_t classes = logits.dim(1);
    std::vector<int> out(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        const double* row = logits.data() + b * classes;
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes; ++c) {
            if (row[c] > row[best]) best = c;  // strict: ties keep the lowest index
        }
        out[b] = static_cast<int>(best) + 1;
    }
    return out;
}

}  // namespace sslac
