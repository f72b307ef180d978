#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sslac/ndarray.hpp"

namespace sslac {

// A labelled (or label-free, for foreign open-set data) image collection
// with pixel values in [0, 255].
struct ImageSet {
    NdArray images;           // (count, height, width, channels)
    std::vector<int> labels;  // empty when unused

    std::size_t count() const { return images.empty() ? 0 : images.dim(0); }
};

// Loads an IDX image file and optional IDX label file, reshaping images to
// (count, h, w, 1) when the file stores (count, h, w).
ImageSet load_image_set(const std::string& images_path, const std::string& labels_path = "");

// Element-wise x/127.5 - 1, mapping [0, 255] onto [-1, 1].
NdArray normalize(const NdArray& images);

// The four-way SsLAC partition. Sample arrays are model-ready (normalized
// pixels, or raw coordinates for the synthetic domain). System classes are
// 1..K for the known classes in ascending original order and K+1 for
// everything else.
class SsLacSplit {
public:
    int k = 0;
    std::vector<int> known_classes;  // ascending original class ids

    NdArray labelled_x;
    NdArray labelled_y;  // one-hot over K+1
    std::vector<std::size_t> labelled_indices;

    NdArray unlabelled_x;
    std::vector<std::size_t> unlabelled_indices;

    NdArray fair_val_x;
    std::vector<int> fair_val_labels;  // system classes, 1..K only
    std::vector<std::size_t> fair_val_indices;

    std::uint64_t seed = 0;

    void set_test(NdArray x, std::vector<int> system_labels) {
        test_x_ = std::move(x);
        test_labels_ = std::move(system_labels);
    }

    // Test-partition access is counted so tests can assert that training
    // never peeks at it.
    const NdArray& test_images() const {
        ++test_access_count_;
        return test_x_;
    }
    const std::vector<int>& test_labels() const {
        ++test_access_count_;
        return test_labels_;
    }
    std::size_t test_count() const { return test_x_.empty() ? 0 : test_x_.dim(0); }
    std::size_t test_access_count() const { return test_access_count_; }

    // Maps an original class id to its system class in 1..K+1.
    int system_class(int original_class) const;

private:
    NdArray test_x_;
    std::vector<int> test_labels_;
    mutable std::size_t test_access_count_ = 0;
};

struct SplitParams {
    int k = 2;
    std::uint64_t seed = 0;
    std::size_t labelled_per_class = 1400;
    std::size_t unlabelled_per_class = 4200;
    // When set, unlabelled_per_class is read as a total over all 10
    // classes instead of a per-class count.
    bool unlabelled_is_total = false;
    double val_fraction = 0.2;
};

// Draws the SsLAC partition from a 10-class training set: a seeded uniform
// K-subset of known classes, per-class labelled/fair-validation samples,
// and unlabelled samples from all 10 classes disjoint from the labelled
// pool. Identical seeds give identical splits.
SsLacSplit build_sslac_split(const ImageSet& train_set, const ImageSet& test_set,
                             const SplitParams& params);

// ---------------------------------------------------------------- manifests

struct SplitManifest {
    std::uint64_t seed = 0;
    int k = 0;
    std::vector<int> known_classes;
    std::vector<std::size_t> labelled_indices;
    std::vector<std::size_t> fair_val_indices;
    std::vector<std::size_t> unlabelled_indices;
    std::size_t test_count = 0;
};

SplitManifest manifest_from_split(const SsLacSplit& split);
void write_split_manifest(const std::string& path, const SplitManifest& manifest);
SplitManifest read_split_manifest(const std::string& path);

// Reconstructs a split from recorded indices; bit-identical to the split
// the manifest was taken from.
SsLacSplit split_from_manifest(const ImageSet& train_set, const ImageSet& test_set,
                               const SplitManifest& manifest);

// ---------------------------------------------------------------- dummy domain

// The 2-D six-blob synthetic domain: three blobs carry labels, all six
// appear unlabelled, and open-set probe points sit far away from every
// blob.
struct SyntheticDomain {
    std::array<std::array<double, 2>, 6> blob_centers;
    std::array<double, 6> blob_spreads;
    std::vector<int> known_ids;  // 3 of the 6 blob indices, ascending
    NdArray open_probe_points;   // (count, 2)
    SsLacSplit split;

    static constexpr double kProbeClearanceSpreads = 6.0;
};

SyntheticDomain make_dummy_domain(std::uint64_t seed, std::size_t samples_per_blob,
                                  std::size_t probe_count = 200);

}  // namespace sslac
