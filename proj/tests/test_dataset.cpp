#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "sslac/dataset.hpp"
#include "sslac/rng.hpp"

using namespace sslac;
using doctest::Approx;

namespace {

// A 10-class image set with 4x4 single-channel images whose pixel values
// encode (class, sample index) so gathered rows are traceable.
ImageSet synthetic_set(std::size_t per_class) {
    ImageSet set;
    const std::size_t n = per_class * 10;
    set.images = NdArray({n, 4, 4, 1});
    set.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 10);
        set.labels[i] = label;
        for (std::size_t p = 0; p < 16; ++p) {
            set.images[i * 16 + p] = static_cast<double>((label * 17 + i + p) % 256);
        }
    }
    return set;
}

std::string temp_path(const char* name) {
    return std::string("/tmp/sslac_dataset_test_") + name;
}

}  // namespace

TEST_CASE("normalize maps byte endpoints onto [-1, 1]") {
    NdArray out = normalize(NdArray({3}, {0.0, 255.0, 128.0}));
    CHECK(out[0] == Approx(-1.0));
    CHECK(out[1] == Approx(1.0));
    CHECK(out[2] == Approx(128.0 / 127.5 - 1.0));
    CHECK_THROWS(normalize(NdArray({1}, {256.0})));
    CHECK_THROWS(normalize(NdArray({1}, {-1.0})));
    CHECK_THROWS(normalize(NdArray({1}, {0.5})));
}

TEST_CASE("split draws the expected partition sizes") {
    ImageSet train = synthetic_set(60);
    ImageSet test = synthetic_set(10);
    SplitParams params;
    params.k = 2;
    params.seed = 7;
    params.labelled_per_class = 20;
    params.unlabelled_per_class = 30;
    SsLacSplit split = build_sslac_split(train, test, params);

    // 20% of the labelled budget is carved out for fair validation.
    CHECK(split.labelled_indices.size() == 2 * 16);
    CHECK(split.fair_val_indices.size() == 2 * 4);
    CHECK(split.unlabelled_indices.size() == 10 * 30);
    CHECK(split.test_count() == 100);
    CHECK(split.known_classes.size() == 2);
    CHECK(std::is_sorted(split.known_classes.begin(), split.known_classes.end()));

    CHECK(split.labelled_x.shape() == std::vector<std::size_t>({32, 4, 4, 1}));
    CHECK(split.labelled_y.shape() == std::vector<std::size_t>({32, 3}));
    CHECK(split.unlabelled_x.dim(0) == 300);
}

TEST_CASE("unlabelled budget can be read as a total over all classes") {
    ImageSet train = synthetic_set(60);
    SplitParams params;
    params.k = 3;
    params.seed = 1;
    params.labelled_per_class = 20;
    params.unlabelled_per_class = 42;
    params.unlabelled_is_total = true;
    SsLacSplit split = build_sslac_split(train, ImageSet{}, params);
    CHECK(split.unlabelled_indices.size() == 42);
}

TEST_CASE("labelled, fair-validation and unlabelled draws never overlap") {
    ImageSet train = synthetic_set(60);
    SplitParams params;
    params.k = 5;
    params.seed = 99;
    params.labelled_per_class = 15;
    params.unlabelled_per_class = 40;
    SsLacSplit split = build_sslac_split(train, ImageSet{}, params);

    std::set<std::size_t> seen;
    auto check_disjoint = [&seen](const std::vector<std::size_t>& indices) {
        for (std::size_t i : indices) CHECK(seen.insert(i).second);
    };
    check_disjoint(split.labelled_indices);
    check_disjoint(split.fair_val_indices);
    check_disjoint(split.unlabelled_indices);
}

TEST_CASE("labelled one-hots and fair-validation labels cover exactly the known classes") {
    ImageSet train = synthetic_set(60);
    SplitParams params;
    params.k = 4;
    params.seed = 5;
    params.labelled_per_class = 20;
    params.unlabelled_per_class = 20;
    SsLacSplit split = build_sslac_split(train, ImageSet{}, params);

    for (std::size_t i = 0; i < split.labelled_indices.size(); ++i) {
        const int original = train.labels[split.labelled_indices[i]];
        const int sys = split.system_class(original);
        CHECK(sys <= split.k);  // labelled samples come from known classes only
        for (int c = 0; c < split.k + 1; ++c) {
            CHECK(split.labelled_y[i * (split.k + 1) + c] == (c + 1 == sys ? 1.0 : 0.0));
        }
    }
    for (int label : split.fair_val_labels) {
        CHECK(label >= 1);
        CHECK(label <= split.k);
    }
}

TEST_CASE("system_class maps known classes in ascending order and the rest to K+1") {
    SsLacSplit split;
    split.k = 3;
    split.known_classes = {1, 4, 7};
    CHECK(split.system_class(1) == 1);
    CHECK(split.system_class(4) == 2);
    CHECK(split.system_class(7) == 3);
    CHECK(split.system_class(0) == 4);
    CHECK(split.system_class(9) == 4);
}

TEST_CASE("identical seeds reproduce the split, different seeds move it") {
    ImageSet train = synthetic_set(60);
    SplitParams params;
    params.k = 2;
    params.seed = 31;
    params.labelled_per_class = 20;
    params.unlabelled_per_class = 25;
    SsLacSplit a = build_sslac_split(train, ImageSet{}, params);
    SsLacSplit b = build_sslac_split(train, ImageSet{}, params);
    CHECK(a.known_classes == b.known_classes);
    CHECK(a.labelled_indices == b.labelled_indices);
    CHECK(a.fair_val_indices == b.fair_val_indices);
    CHECK(a.unlabelled_indices == b.unlabelled_indices);
    CHECK(a.labelled_x.raw() == b.labelled_x.raw());

    params.seed = 32;
    SsLacSplit c = build_sslac_split(train, ImageSet{}, params);
    CHECK(a.labelled_indices != c.labelled_indices);
}

TEST_CASE("split construction rejects bad parameters and thin classes") {
    ImageSet train = synthetic_set(10);
    SplitParams params;
    params.labelled_per_class = 5;
    params.unlabelled_per_class = 4;

    SplitParams bad_k = params;
    bad_k.k = 0;
    CHECK_THROWS(build_sslac_split(train, ImageSet{}, bad_k));
    bad_k.k = 10;
    CHECK_THROWS(build_sslac_split(train, ImageSet{}, bad_k));

    SplitParams greedy = params;
    greedy.k = 2;
    greedy.labelled_per_class = 11;  // more than the 10 samples per class
    CHECK_THROWS(build_sslac_split(train, ImageSet{}, greedy));

    greedy.labelled_per_class = 5;
    greedy.unlabelled_per_class = 20;
    CHECK_THROWS(build_sslac_split(train, ImageSet{}, greedy));
}

TEST_CASE("manifest round trip reconstructs the split bit for bit") {
    ImageSet train = synthetic_set(60);
    ImageSet test = synthetic_set(8);
    SplitParams params;
    params.k = 3;
    params.seed = 12345;
    params.labelled_per_class = 20;
    params.unlabelled_per_class = 25;
    SsLacSplit split = build_sslac_split(train, test, params);

    const std::string path = temp_path("manifest.txt");
    write_split_manifest(path, manifest_from_split(split));
    SplitManifest loaded = read_split_manifest(path);
    std::remove(path.c_str());

    SsLacSplit rebuilt = split_from_manifest(train, test, loaded);
    CHECK(rebuilt.k == split.k);
    CHECK(rebuilt.seed == split.seed);
    CHECK(rebuilt.known_classes == split.known_classes);
    CHECK(rebuilt.labelled_x.raw() == split.labelled_x.raw());
    CHECK(rebuilt.labelled_y.raw() == split.labelled_y.raw());
    CHECK(rebuilt.fair_val_x.raw() == split.fair_val_x.raw());
    CHECK(rebuilt.fair_val_labels == split.fair_val_labels);
    CHECK(rebuilt.unlabelled_x.raw() == split.unlabelled_x.raw());
    CHECK(rebuilt.test_images().raw() == split.test_images().raw());
    CHECK(rebuilt.test_labels() == split.test_labels());
}

TEST_CASE("test partition access is counted") {
    SsLacSplit split;
    split.set_test(NdArray({2, 2}), {4, 4});
    CHECK(split.test_access_count() == 0);
    split.test_images();
    split.test_labels();
    CHECK(split.test_access_count() == 2);
    split.test_count();  // size query is not a peek
    CHECK(split.test_access_count() == 2);
}

TEST_CASE("dummy domain geometry and partition sizes") {
    SyntheticDomain domain = make_dummy_domain(77, 50, 40);
    CHECK(domain.known_ids.size() == 3);
    CHECK(std::is_sorted(domain.known_ids.begin(), domain.known_ids.end()));

    const SsLacSplit& split = domain.split;
    CHECK(split.k == 3);
    CHECK(split.labelled_x.dim(0) == 3 * 40);  // 80% of 50 per known blob
    CHECK(split.fair_val_x.dim(0) == 3 * 10);
    CHECK(split.unlabelled_x.dim(0) == 6 * 50);
    CHECK(split.test_count() == 6 * 50);
    CHECK(domain.open_probe_points.shape() == std::vector<std::size_t>({40, 2}));

    // Test labels cover both known system classes and K+1 novel blobs.
    std::set<int> label_set(split.test_labels().begin(), split.test_labels().end());
    CHECK(label_set == std::set<int>({1, 2, 3, 4}));
}

TEST_CASE("dummy-domain samples cluster near their blob centers") {
    SyntheticDomain domain = make_dummy_domain(3, 30);
    const SsLacSplit& split = domain.split;
    const std::size_t lab_per_blob = 24;
    for (std::size_t i = 0; i < split.labelled_x.dim(0); ++i) {
        const int blob = domain.known_ids[i / lab_per_blob];
        const double dx = split.labelled_x[i * 2] - domain.blob_centers[blob][0];
        const double dy = split.labelled_x[i * 2 + 1] - domain.blob_centers[blob][1];
        // 6 spreads covers all but a vanishing tail of the Gaussian.
        CHECK(std::sqrt(dx * dx + dy * dy) < 6.0 * domain.blob_spreads[blob]);
    }
}

TEST_CASE("open-set probes keep their clearance from every blob") {
    SyntheticDomain domain = make_dummy_domain(11, 25, 120);
    for (std::size_t p = 0; p < domain.open_probe_points.dim(0); ++p) {
        const double x = domain.open_probe_points[p * 2];
        const double y = domain.open_probe_points[p * 2 + 1];
        for (int b = 0; b < 6; ++b) {
            const double dx = x - domain.blob_centers[b][0];
            const double dy = y - domain.blob_centers[b][1];
            CHECK(std::sqrt(dx * dx + dy * dy) >=
                  SyntheticDomain::kProbeClearanceSpreads * domain.blob_spreads[b]);
        }
    }
}

TEST_CASE("dummy domain is seed-deterministic") {
    SyntheticDomain a = make_dummy_domain(5, 30, 50);
    SyntheticDomain b = make_dummy_domain(5, 30, 50);
    CHECK(a.known_ids == b.known_ids);
    CHECK(a.split.labelled_x.raw() == b.split.labelled_x.raw());
    CHECK(a.split.unlabelled_x.raw() == b.split.unlabelled_x.raw());
    CHECK(a.open_probe_points.raw() == b.open_probe_points.raw());

    SyntheticDomain c = make_dummy_domain(6, 30, 50);
    CHECK(a.split.labelled_x.raw() != c.split.labelled_x.raw());
}

TEST_CASE("dummy domain rejects a starving sample budget") {
    CHECK_THROWS(make_dummy_domain(1, 10));
}
