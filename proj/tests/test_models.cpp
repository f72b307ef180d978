#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sslac/models.hpp"
#include "sslac/rng.hpp"

using namespace sslac;

namespace {

NdArray random_noise(std::size_t batch, std::size_t z, std::uint64_t seed) {
    RngStream rng(seed);
    NdArray out({batch, z});
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rng.normal();
    return out;
}

std::size_t param_element_count(Network& net) {
    std::size_t n = 0;
    for (const Param* p : net.params()) n += p->value.size();
    return n;
}

}  // namespace

TEST_CASE("generator maps latent noise to 28x28x1 images in [-1, 1]") {
    Network gen = build_generator(GeneratorSpec{}, 17);
    NdArray z = random_noise(2, 100, 3);
    NdArray images = gen.forward(z, false);
    REQUIRE(images.shape() == std::vector<std::size_t>({2, kImageSide, kImageSide, 1}));
    for (std::size_t i = 0; i < images.size(); ++i) {
        CHECK(images[i] >= -1.0);
        CHECK(images[i] <= 1.0);
    }
}

TEST_CASE("generator rejects a spec that cannot reach 28x28") {
    GeneratorSpec spec;
    spec.up_filters = {64};  // one doubling from 7 stops at 14
    CHECK_THROWS(build_generator(spec, 1));
    spec.up_filters = {64, 32, 16};
    CHECK_THROWS(build_generator(spec, 1));
}

TEST_CASE("discriminator head width follows K") {
    NdArray x({3, kImageSide, kImageSide, 1});
    Network d2 = build_discriminator(2, DiscriminatorSpec{}, 5);
    CHECK(d2.forward(x, false).shape() == std::vector<std::size_t>({3, 3}));
    Network d9 = build_discriminator(9, DiscriminatorSpec{}, 5);
    CHECK(d9.forward(x, false).shape() == std::vector<std::size_t>({3, 10}));

    // Only the dense head grows with K: flat_dim weights plus one bias per
    // extra output node.
    const std::size_t flat_dim = 4 * 4 * 128;
    CHECK(param_element_count(d9) - param_element_count(d2) == 7 * (flat_dim + 1));
}

TEST_CASE("discriminator shapes propagate for arbitrary filter stacks") {
    RngStream rng(23);
    for (int trial = 0; trial < 6; ++trial) {
        DiscriminatorSpec spec;
        spec.conv_filters.clear();
        const std::size_t blocks = 1 + rng.index(4);
        for (std::size_t b = 0; b < blocks; ++b) {
            spec.conv_filters.push_back(static_cast<int>(1 + rng.index(12)));
        }
        const int k = static_cast<int>(1 + rng.index(9));
        Network disc = build_discriminator(k, spec, trial);
        NdArray out = disc.forward(NdArray({2, kImageSide, kImageSide, 1}), false);
        CHECK(out.shape() ==
              std::vector<std::size_t>({2, static_cast<std::size_t>(k + 1)}));
    }
}

TEST_CASE("mlp pair works on 2-d points") {
    MlpPairSpec spec;
    Network gen = build_mlp_generator(spec, 7);
    Network disc = build_mlp_discriminator(3, spec, 8);
    NdArray z = random_noise(5, spec.z_length, 9);
    NdArray points = gen.forward(z, false);
    REQUIRE(points.shape() == std::vector<std::size_t>({5, 2}));
    NdArray logits = disc.forward(points, false);
    CHECK(logits.shape() == std::vector<std::size_t>({5, 4}));
}

TEST_CASE("identical seeds build identical networks") {
    Network a = build_discriminator(2, DiscriminatorSpec{}, 99);
    Network b = build_discriminator(2, DiscriminatorSpec{}, 99);
    auto pa = a.params(), pb = b.params();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i]->value.raw() == pb[i]->value.raw());
    }
    Network c = build_discriminator(2, DiscriminatorSpec{}, 100);
    CHECK(a.params()[0]->value.raw() != c.params()[0]->value.raw());
}

TEST_CASE("classify returns 1-based argmax classes") {
    NdArray logits({3, 3}, {0.5, 0.1, 0.2,
                            -4.0, -1.0, -2.0,
                            1.0, 2.0, 9.0});
    CHECK(classify(logits) == std::vector<int>({1, 2, 3}));
}

TEST_CASE("classify breaks ties toward the lowest class") {
    NdArray logits({2, 4}, {1.0, 1.0, 0.0, 1.0,
                            0.0, 3.0, 3.0, 3.0});
    CHECK(classify(logits) == std::vector<int>({1, 2}));
}

TEST_CASE("classify is invariant to a per-row logit shift") {
    RngStream rng(41);
    NdArray logits({6, 5});
    for (std::size_t i = 0; i < logits.size(); ++i) logits[i] = rng.uniform(-3, 3);
    NdArray shifted = logits;
    for (std::size_t r = 0; r < 6; ++r) {
        const double offset = rng.uniform(-100, 100);
        for (std::size_t c = 0; c < 5; ++c) shifted[r * 5 + c] += offset;
    }
    CHECK(classify(logits) == classify(shifted));
}
