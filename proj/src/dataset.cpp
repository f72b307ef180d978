#include "sslac/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sslac/idx.hpp"
#include "sslac/rng.hpp"

namespace sslac {

namespace {

void fisher_yates(std::vector<std::size_t>& v, RngStream& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[rng.index(i)]);
    }
}

// Copies the selected leading-axis rows of src into a new array.
NdArray gather_rows(const NdArray& src, const std::vector<std::size_t>& indices) {
    const std::size_t row = src.size() / src.dim(0);
    std::vector<std::size_t> shape = src.shape();
    shape[0] = indices.size();
    NdArray out(shape);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= src.dim(0)) {
            throw std::out_of_range("gather_rows: index " + std::to_string(indices[i]) +
                                    " out of range");
        }
        std::copy_n(src.data() + indices[i] * row, row, out.data() + i * row);
    }
    return out;
}

NdArray onehot_rows(const std::vector<int>& system_labels, int classes) {
    NdArray out({system_labels.size(), static_cast<std::size_t>(classes)});
    for (std::size_t i = 0; i < system_labels.size(); ++i) {
        const int c = system_labels[i];
        if (c < 1 || c > classes) {
            throw std::invalid_argument("onehot_rows: system class out of range");
        }
        out[i * classes + (c - 1)] = 1.0;
    }
    return out;
}

}  // namespace

ImageSet load_image_set(const std::string& images_path, const std::string& labels_path) {
    ImageSet set;
    set.images = load_idx_file(images_path);
    if (set.images.ndim() == 3) {
        auto s = set.images.shape();
        set.images.reshape({s[0], s[1], s[2], 1});
    }
    if (set.images.ndim() != 4) {
        throw std::runtime_error(images_path + ": expected a 3- or 4-dimensional image array, got " +
                                 NdArray::shape_string(set.images.shape()));
    }
    if (!labels_path.empty()) {
        NdArray labels = load_idx_file(labels_path);
        if (labels.ndim() != 1 || labels.dim(0) != set.images.dim(0)) {
            throw std::runtime_error(labels_path + ": label count does not match image count");
        }
        set.labels.resize(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            set.labels[i] = static_cast<int>(labels[i]);
        }
    }
    return set;
}

NdArray normalize(const NdArray& images) {
    NdArray out(images.shape());
    for (std::size_t i = 0; i < images.size(); ++i) {
        const double v = images[i];
        if (v < 0.0 || v > 255.0 || v != std::floor(v)) {
            throw std::invalid_argument("normalize: expected integer values in [0, 255]");
        }
        out[i] = v / 127.5 - 1.0;
    }
    return out;
}

int SsLacSplit::system_class(int original_class) const {
    auto it = std::lower_bound(known_classes.begin(), known_classes.end(), original_class);
    if (it != known_classes.end() && *it == original_class) {
        return static_cast<int>(it - known_classes.begin()) + 1;
    }
    return k + 1;
}

SsLacSplit build_sslac_split(const ImageSet& train_set, const ImageSet& test_set,
                             const SplitParams& params) {
    constexpr int kNumOriginalClasses = 10;
    if (params.k < 1 || params.k > kNumOriginalClasses - 1) {
        throw std::invalid_argument("build_sslac_split: k must be in [1, 9], got " +
                                    std::to_string(params.k));
    }
    if (!(params.val_fraction > 0.0 && params.val_fraction < 1.0)) {
        throw std::invalid_argument("build_sslac_split: val_fraction must be in (0, 1)");
    }
    if (train_set.labels.size() != train_set.count()) {
        throw std::invalid_argument("build_sslac_split: training set must be fully labelled");
    }

    SsLacSplit split;
    split.k = params.k;
    split.seed = params.seed;

    // Uniform random k-subset of the 10 original classes.
    RngStream class_rng = RngStream::derive(params.seed, "split/class-choice");
    std::vector<std::size_t> class_order(kNumOriginalClasses);
    for (std::size_t i = 0; i < class_order.size(); ++i) class_order[i] = i;
    fisher_yates(class_order, class_rng);
    for (int i = 0; i < params.k; ++i) {
        split.known_classes.push_back(static_cast<int>(class_order[i]));
    }
    std::sort(split.known_classes.begin(), split.known_classes.end());

    // Per-class index pools, shuffled once; partitions take disjoint
    // prefixes so labelled, fair-validation and unlabelled never overlap.
    RngStream sample_rng = RngStream::derive(params.seed, "split/sample-draw");
    std::vector<std::vector<std::size_t>> pools(kNumOriginalClasses);
    for (std::size_t i = 0; i < train_set.count(); ++i) {
        const int c = train_set.labels[i];
        if (c < 0 || c >= kNumOriginalClasses) {
            throw std::invalid_argument("build_sslac_split: label " + std::to_string(c) +
                                        " outside [0, 9] at sample " + std::to_string(i));
        }
        pools[c].push_back(i);
    }
    for (auto& pool : pools) fisher_yates(pool, sample_rng);

    std::vector<std::size_t> used(kNumOriginalClasses, 0);

    const std::size_t val_per_class = static_cast<std::size_t>(
        std::lround(static_cast<double>(params.labelled_per_class) * params.val_fraction));
    const std::size_t lab_per_class = params.labelled_per_class - val_per_class;

    std::vector<int> labelled_sys, fair_val_sys;
    for (int c : split.known_classes) {
        if (pools[c].size() < params.labelled_per_class) {
            throw std::runtime_error("build_sslac_split: class " + std::to_string(c) + " has only " +
                                     std::to_string(pools[c].size()) + " samples, need " +
                                     std::to_string(params.labelled_per_class) + " labelled");
        }
        for (std::size_t i = 0; i < lab_per_class; ++i) {
            split.labelled_indices.push_back(pools[c][used[c]++]);
            labelled_sys.push_back(split.system_class(c));
        }
        for (std::size_t i = 0; i < val_per_class; ++i) {
            split.fair_val_indices.push_back(pools[c][used[c]++]);
            fair_val_sys.push_back(split.system_class(c));
        }
    }

    std::vector<std::size_t> unlab_quota(kNumOriginalClasses, params.unlabelled_per_class);
    if (params.unlabelled_is_total) {
        const std::size_t per = params.unlabelled_per_class / kNumOriginalClasses;
        const std::size_t rem = params.unlabelled_per_class % kNumOriginalClasses;
        for (int c = 0; c < kNumOriginalClasses; ++c) {
            unlab_quota[c] = per + (static_cast<std::size_t>(c) < rem ? 1 : 0);
        }
    }
    for (int c = 0; c < kNumOriginalClasses; ++c) {
        if (pools[c].size() - used[c] < unlab_quota[c]) {
            throw std::runtime_error("build_sslac_split: class " + std::to_string(c) +
                                     " cannot supply " + std::to_string(unlab_quota[c]) +
                                     " unlabelled samples after labelled draws");
        }
        for (std::size_t i = 0; i < unlab_quota[c]; ++i) {
            split.unlabelled_indices.push_back(pools[c][used[c]++]);
        }
    }

    split.labelled_x = normalize(gather_rows(train_set.images, split.labelled_indices));
    split.labelled_y = onehot_rows(labelled_sys, params.k + 1);
    split.fair_val_x = normalize(gather_rows(train_set.images, split.fair_val_indices));
    split.fair_val_labels = fair_val_sys;
    split.unlabelled_x = normalize(gather_rows(train_set.images, split.unlabelled_indices));

    if (test_set.count() > 0) {
        if (test_set.labels.size() != test_set.count()) {
            throw std::invalid_argument("build_sslac_split: test set must be labelled");
        }
        std::vector<int> test_sys(test_set.count());
        for (std::size_t i = 0; i < test_set.count(); ++i) {
            test_sys[i] = split.system_class(test_set.labels[i]);
        }
        split.set_test(normalize(test_set.images), std::move(test_sys));
    }
    return split;
}

// ---------------------------------------------------------------- manifests

SplitManifest manifest_from_split(const SsLacSplit& split) {
    SplitManifest m;
    m.seed = split.seed;
    m.k = split.k;
    m.known_classes = split.known_classes;
    m.labelled_indices = split.labelled_indices;
    m.fair_val_indices = split.fair_val_indices;
    m.unlabelled_indices = split.unlabelled_indices;
    m.test_count = split.test_count();
    return m;
}

void write_split_manifest(const std::string& path, const SplitManifest& manifest) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open manifest for writing: " + path);
    out << "seed = " << manifest.seed << "\n";
    out << "k = " << manifest.k << "\n";
    out << "known_classes =";
    for (int c : manifest.known_classes) out << " " << c;
    out << "\n";
    out << "test_count = " << manifest.test_count << "\n";
    auto section = [&out](const char* name, const std::vector<std::size_t>& indices) {
        out << "[" << name << "] " << indices.size() << "\n";
        for (std::size_t i : indices) out << i << "\n";
    };
    section("labelled", manifest.labelled_indices);
    section("fair_validation", manifest.fair_val_indices);
    section("unlabelled", manifest.unlabelled_indices);
    if (!out) throw std::runtime_error("error writing manifest: " + path);
}

SplitManifest read_split_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    SplitManifest m;
    std::string line;
    std::vector<std::size_t>* current = nullptr;
    std::size_t expected = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '[') {
            std::istringstream ls(line);
            std::string name;
            ls >> name >> expected;
            if (name == "[labelled]") current = &m.labelled_indices;
            else if (name == "[fair_validation]") current = &m.fair_val_indices;
            else if (name == "[unlabelled]") current = &m.unlabelled_indices;
            else throw std::runtime_error(path + ": unknown manifest section " + name);
            current->reserve(expected);
            continue;
        }
        if (current) {
            current->push_back(std::stoull(line));
            continue;
        }
        std::istringstream ls(line);
        std::string key, eq;
        ls >> key >> eq;
        if (key == "seed") ls >> m.seed;
        else if (key == "k") ls >> m.k;
        else if (key == "test_count") ls >> m.test_count;
        else if (key == "known_classes") {
            int c;
            while (ls >> c) m.known_classes.push_back(c);
        } else {
            throw std::runtime_error(path + ": unknown manifest key " + key);
        }
    }
    if (m.k < 1 || m.known_classes.size() != static_cast<std::size_t>(m.k)) {
        throw std::runtime_error(path + ": manifest k does not match known_classes");
    }
    return m;
}

SsLacSplit split_from_manifest(const ImageSet& train_set, const ImageSet& test_set,
                               const SplitManifest& manifest) {
    SsLacSplit split;
    split.k = manifest.k;
    split.seed = manifest.seed;
    split.known_classes = manifest.known_classes;
    split.labelled_indices = manifest.labelled_indices;
    split.fair_val_indices = manifest.fair_val_indices;
    split.unlabelled_indices = manifest.unlabelled_indices;

    std::vector<int> labelled_sys, fair_val_sys;
    for (std::size_t i : split.labelled_indices) {
        labelled_sys.push_back(split.system_class(train_set.labels.at(i)));
    }
    for (std::size_t i : split.fair_val_indices) {
        fair_val_sys.push_back(split.system_class(train_set.labels.at(i)));
    }
    split.labelled_x = normalize(gather_rows(train_set.images, split.labelled_indices));
    split.labelled_y = onehot_rows(labelled_sys, split.k + 1);
    split.fair_val_x = normalize(gather_rows(train_set.images, split.fair_val_indices));
    split.fair_val_labels = fair_val_sys;
    split.unlabelled_x = normalize(gather_rows(train_set.images, split.unlabelled_indices));

    if (test_set.count() > 0) {
        std::vector<int> test_sys(test_set.count());
        for (std::size_t i = 0; i < test_set.count(); ++i) {
            test_sys[i] = split.system_class(test_set.labels.at(i));
        }
        split.set_test(normalize(test_set.images), std::move(test_sys));
    }
    return split;
}

// ---------------------------------------------------------------- dummy domain

SyntheticDomain make_dummy_domain(std::uint64_t seed, std::size_t samples_per_blob,
                                  std::size_t probe_count) {
    if (samples_per_blob < 20) {
        throw std::invalid_argument("make_dummy_domain: samples_per_blob must be >= 20");
    }
    constexpr int kBlobs = 6;
    constexpr int kKnown = 3;
    constexpr double kRing = 8.0;
    constexpr double kSpread = 0.7;
    constexpr double kBox = 20.0;
    const double pi = std::acos(-1.0);

    SyntheticDomain domain;
    for (int b = 0; b < kBlobs; ++b) {
        const double angle = 2.0 * pi * b / kBlobs;
        domain.blob_centers[b] = {kRing * std::cos(angle), kRing * std::sin(angle)};
        domain.blob_spreads[b] = kSpread;
    }

    RngStream choice_rng = RngStream::derive(seed, "dummy/known-choice");
    std::vector<std::size_t> order(kBlobs);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    fisher_yates(order, choice_rng);
    for (int i = 0; i < kKnown; ++i) domain.known_ids.push_back(static_cast<int>(order[i]));
    std::sort(domain.known_ids.begin(), domain.known_ids.end());

    RngStream draw_rng = RngStream::derive(seed, "dummy/sample-draw");
    auto draw_blob = [&](int b, std::size_t n, NdArray& out, std::size_t at) {
        for (std::size_t i = 0; i < n; ++i) {
            out[(at + i) * 2] = domain.blob_centers[b][0] + draw_rng.normal(0.0, kSpread);
            out[(at + i) * 2 + 1] = domain.blob_centers[b][1] + draw_rng.normal(0.0, kSpread);
        }
    };

    SsLacSplit& split = domain.split;
    split.k = kKnown;
    split.seed = seed;
    for (int id : domain.known_ids) split.known_classes.push_back(id);

    const std::size_t val_per_blob = samples_per_blob / 5;  // 20% fair validation
    const std::size_t lab_per_blob = samples_per_blob - val_per_blob;

    split.labelled_x = NdArray({lab_per_blob * kKnown, 2});
    split.fair_val_x = NdArray({val_per_blob * kKnown, 2});
    std::vector<int> labelled_sys, fair_val_sys;
    for (int i = 0; i < kKnown; ++i) {
        const int b = domain.known_ids[i];
        draw_blob(b, lab_per_blob, split.labelled_x, i * lab_per_blob);
        draw_blob(b, val_per_blob, split.fair_val_x, i * val_per_blob);
        for (std::size_t s = 0; s < lab_per_blob; ++s) labelled_sys.push_back(i + 1);
        for (std::size_t s = 0; s < val_per_blob; ++s) fair_val_sys.push_back(i + 1);
    }
    split.labelled_y = onehot_rows(labelled_sys, kKnown + 1);
    split.fair_val_labels = fair_val_sys;

    split.unlabelled_x = NdArray({samples_per_blob * kBlobs, 2});
    for (int b = 0; b < kBlobs; ++b) {
        draw_blob(b, samples_per_blob, split.unlabelled_x, b * samples_per_blob);
    }

    NdArray test_x({samples_per_blob * kBlobs, 2});
    std::vector<int> test_sys;
    for (int b = 0; b < kBlobs; ++b) {
        draw_blob(b, samples_per_blob, test_x, b * samples_per_blob);
        const int sys = split.system_class(b);
        for (std::size_t s = 0; s < samples_per_blob; ++s) test_sys.push_back(sys);
    }
    split.set_test(std::move(test_x), std::move(test_sys));

    // Open-set probes: uniform points in the box, kept only when far from
    // every blob center (the red question marks of the domain picture).
    RngStream probe_rng = RngStream::derive(seed, "dummy/open-probes");
    const double clearance = SyntheticDomain::kProbeClearanceSpreads * kSpread;
    domain.open_probe_points = NdArray({probe_count, 2});
    std::size_t placed = 0;
    while (placed < probe_count) {
        const double x = probe_rng.uniform(-kBox, kBox);
        const double y = probe_rng.uniform(-kBox, kBox);
        bool clear = true;
        for (int b = 0; b < kBlobs; ++b) {
            const double dx = x - domain.blob_centers[b][0];
            const double dy = y - domain.blob_centers[b][1];
            if (std::sqrt(dx * dx + dy * dy) < clearance) {
                clear = false;
                break;
            }
        }
        if (clear) {
            domain.open_probe_points[placed * 2] = x;
            domain.open_probe_points[placed * 2 + 1] = y;
            ++placed;
        }
    }
    return domain;
}

}  // namespace sslac
