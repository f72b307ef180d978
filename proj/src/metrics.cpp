#include "sslac/metrics.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "sslac/models.hpp"

namespace sslac {

ConfusionMatrix confusion_matrix(const std::vector<int>& predictions,
                                 const std::vector<int>& truths, int classes) {
    if (predictions.size() != truths.size()) {
        throw std::invalid_argument("confusion_matrix: length mismatch");
    }
    if (classes < 1) {
        throw std::invalid_argument("confusion_matrix: classes must be >= 1");
    }
    ConfusionMatrix cm;
    cm.classes = classes;
    cm.counts.assign(static_cast<std::size_t>(classes) * classes, 0);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (truths[i] < 1 || truths[i] > classes || predictions[i] < 1 ||
            predictions[i] > classes) {
            throw std::invalid_argument("confusion_matrix: class out of range at sample " +
                                        std::to_string(i));
        }
        ++cm.at(truths[i], predictions[i]);
    }
    return cm;
}

std::vector<double> per_class_f1(const ConfusionMatrix& confusion) {
    if (confusion.classes < 1 || confusion.counts.empty()) {
        throw std::invalid_argument("per_class_f1: empty confusion matrix");
    }
    std::vector<double> f1(confusion.classes, 0.0);
    for (int c = 1; c <= confusion.classes; ++c) {
        std::size_t tp = confusion.at(c, c);
        std::size_t predicted = 0, actual = 0;
        for (int other = 1; other <= confusion.classes; ++other) {
            predicted += confusion.at(other, c);
            actual += confusion.at(c, other);
        }
        // 2TP / (predicted + actual); 0 by convention when the class never
        // appears on either side.
        const std::size_t denom = predicted + actual;
        f1[c - 1] = denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    }
    return f1;
}

double f1_macro(const ConfusionMatrix& confusion) {
    const std::vector<double> f1 = per_class_f1(confusion);
    double sum = 0.0;
    for (double v : f1) sum += v;
    return sum / static_cast<double>(f1.size());
}

std::vector<int> predict_classes(Network& discriminator, const NdArray& inputs,
                                 std::size_t batch_size) {
    const std::size_t count = inputs.dim(0);
    const std::size_t row = inputs.size() / count;
    std::vector<int> out;
    out.reserve(count);
    for (std::size_t start = 0; start < count; start += batch_size) {
        const std::size_t n = std::min(batch_size, count - start);
        std::vector<std::size_t> shape = inputs.shape();
        shape[0] = n;
        NdArray batch(shape);
        std::copy_n(inputs.data() + start * row, n * row, batch.data());
        NdArray logits = discriminator.forward(batch, /*training=*/false);
        for (int c : classify(logits)) out.push_back(c);
    }
    return out;
}

double open_set_accuracy(Network& discriminator, const NdArray& foreign_inputs, int k) {
    if (foreign_inputs.empty()) {
        throw std::invalid_argument("open_set_accuracy: empty foreign set");
    }
    const std::vector<int> preds = predict_classes(discriminator, foreign_inputs);
    std::size_t unknown = 0;
    for (int c : preds) unknown += (c == k + 1);
    return static_cast<double>(unknown) / static_cast<double>(preds.size());
}

EvalReport evaluate_split(Network& discriminator, const SsLacSplit& split) {
    if (split.test_count() == 0) {
        throw std::invalid_argument("evaluate_split: split has no test partition");
    }
    EvalReport report;
    report.k = split.k;
    report.seed = split.seed;
    const std::vector<int> preds = predict_classes(discriminator, split.test_images());
    report.confusion = confusion_matrix(preds, split.test_labels(), split.k + 1);
    report.per_class_f1 = per_class_f1(report.confusion);
    report.f1_macro = f1_macro(report.confusion);
    return report;
}

void write_eval_report(const std::string& path, const EvalReport& report) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open report for writing: " + path);
    out << std::setprecision(10);
    out << "k = " << report.k << "\n";
    out << "seed = " << report.seed << "\n";
    out << "novel_train_classes = " << report.novel_train_classes << "\n";
    out << "open_classes = " << report.open_classes << "\n";
    out << "f1_macro = " << report.f1_macro << "\n";
    out << "per_class_f1 =";
    for (double v : report.per_class_f1) out << " " << v;
    out << "\n";
    for (const auto& [name, acc] : report.open_set) {
        out << "open_set_accuracy." << name << " = " << acc << "\n";
    }
    out << "[confusion] " << report.confusion.classes << "\n";
    for (int t = 1; t <= report.confusion.classes; ++t) {
        for (int p = 1; p <= report.confusion.classes; ++p) {
            if (p > 1) out << " ";
            out << report.confusion.at(t, p);
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("error writing report: " + path);
}

BoundaryRaster boundary_raster(Network& discriminator, int k, const RasterBounds& bounds,
                               std::size_t resolution) {
    if (resolution < 16) {
        throw std::invalid_argument("boundary_raster: resolution must be >= 16");
    }
    BoundaryRaster raster;
    raster.classes = k + 1;
    raster.bounds = bounds;
    raster.resolution = resolution;
    NdArray points({resolution * resolution, 2});
    const double dx = (bounds.x_max - bounds.x_min) / static_cast<double>(resolution);
    const double dy = (bounds.y_max - bounds.y_min) / static_cast<double>(resolution);
    for (std::size_t row = 0; row < resolution; ++row) {
        // Row 0 is the top of the image (largest y).
        const double y = bounds.y_max - (static_cast<double>(row) + 0.5) * dy;
        for (std::size_t col = 0; col < resolution; ++col) {
            const double x = bounds.x_min + (static_cast<double>(col) + 0.5) * dx;
            points[(row * resolution + col) * 2] = x;
            points[(row * resolution + col) * 2 + 1] = y;
        }
    }
    raster.grid = predict_classes(discriminator, points);
    return raster;
}

void write_raster_text(const std::string& path, const BoundaryRaster& raster) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open raster for writing: " + path);
    for (std::size_t row = 0; row < raster.resolution; ++row) {
        for (std::size_t col = 0; col < raster.resolution; ++col) {
            if (col) out << " ";
            out << raster.grid[row * raster.resolution + col];
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("error writing raster: " + path);
}

namespace {

// Known classes cycle through warm colors; K+1 (the last class) is blue.
std::array<unsigned char, 3> class_color(int cls, int classes) {
    if (cls == classes) return {40, 70, 220};  // unknown class: blue
    static const std::array<std::array<unsigned char, 3>, 9> palette = {{
        {240, 150, 40},   // orange
        {60, 170, 60},    // green
        {230, 220, 50},   // yellow
        {170, 70, 180},   // purple
        {60, 200, 200},   // cyan
        {220, 60, 120},   // pink
        {130, 130, 40},   // olive
        {150, 90, 50},    // brown
        {200, 40, 40},    // red
    }};
    return palette[static_cast<std::size_t>(cls - 1) % palette.size()];
}

}  // namespace

void write_raster_ppm(const std::string& path, const BoundaryRaster& raster) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open raster image for writing: " + path);
    out << "P6\n" << raster.resolution << " " << raster.resolution << "\n255\n";
    for (int cls : raster.grid) {
        const auto rgb = class_color(cls, raster.classes);
        out.write(reinterpret_cast<const char*>(rgb.data()), 3);
    }
    if (!out) throw std::runtime_error("error writing raster image: " + path);
}

}  // namespace sslac
