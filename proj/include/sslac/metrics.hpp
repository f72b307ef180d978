#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sslac/dataset.hpp"
#include "sslac/network.hpp"

namespace sslac {

// (K+1)x(K+1) count matrix; entry (truth, predicted), classes 1..K+1.
struct ConfusionMatrix {
    int classes = 0;
    std::vector<std::size_t> counts;  // row-major, classes*classes

    std::size_t& at(int truth, int predicted) {
        return counts[static_cast<std::size_t>(truth - 1) * classes + (predicted - 1)];
    }
    std::size_t at(int truth, int predicted) const {
        return counts[static_cast<std::size_t>(truth - 1) * classes + (predicted - 1)];
    }
};

ConfusionMatrix confusion_matrix(const std::vector<int>& predictions,
                                 const std::vector<int>& truths, int classes);

// Per-class F1 = 2PR/(P+R); a class with no true positives and no
// predictions scores 0.
std::vector<double> per_class_f1(const ConfusionMatrix& confusion);
double f1_macro(const ConfusionMatrix& confusion);

// Runs the discriminator over inputs in fixed-size inference batches and
// returns argmax system classes.
std::vector<int> predict_classes(Network& discriminator, const NdArray& inputs,
                                 std::size_t batch_size = 256);

// Fraction of foreign samples classified into class K+1. Inputs must
// already be normalized the same way as training data.
double open_set_accuracy(Network& discriminator, const NdArray& foreign_inputs, int k);

struct EvalReport {
    double f1_macro = 0.0;
    std::vector<double> per_class_f1;
    ConfusionMatrix confusion;
    std::vector<std::pair<std::string, double>> open_set;  // dataset name -> accuracy
    int k = 0;
    std::uint64_t seed = 0;
    int novel_train_classes = 0;  // n, recorded for reporting only
    int open_classes = 0;         // o, recorded for reporting only
};

// F1-macro and confusion over the split's test partition.
EvalReport evaluate_split(Network& discriminator, const SsLacSplit& split);

void write_eval_report(const std::string& path, const EvalReport& report);

// ---------------------------------------------------------------- raster

struct RasterBounds {
    double x_min = -20.0, x_max = 20.0;
    double y_min = -20.0, y_max = 20.0;
};

struct BoundaryRaster {
    RasterBounds bounds;
    std::size_t resolution = 0;
    int classes = 0;           // K+1
    std::vector<int> grid;     // row-major, resolution*resolution, values 1..K+1
};

// Classifies every cell center of a resolution x resolution grid with a
// 2-D-input discriminator over K+1 system classes.
BoundaryRaster boundary_raster(Network& discriminator, int k, const RasterBounds& bounds,
                               std::size_t resolution);

void write_raster_text(const std::string& path, const BoundaryRaster& raster);

// Portable pixel map with one color per class; blue is reserved for the
// unknown class K+1.
void write_raster_ppm(const std::string& path, const BoundaryRaster& raster);

}  // namespace sslac
