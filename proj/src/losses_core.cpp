#include "sslac/losses_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sslac {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) {
    // log(1+exp(x)) = max(x,0) + log1p(exp(-|x|))
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

NdArray softmax_rows(const NdArray& logits) {
    if (logits.ndim() != 2) {
        throw std::invalid_argument("softmax_rows: expected a (batch, classes) array, got " +
                                    NdArray::shape_string(logits.shape()));
    }
    const std::size_t batch = logits.dim(0);
    const std::size_t classes = logits.dim(1);
    NdArray out(logits.shape());
    for (std::size_t b = 0; b < batch; ++b) {
        const double* row = logits.data() + b * classes;
        double* orow = out.data() + b * classes;
        double mx = *std::max_element(row, row + classes);
        double sum = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            orow[c] = std::exp(row[c] - mx);
            sum += orow[c];
        }
        for (std::size_t c = 0; c < classes; ++c) {
            orow[c] /= sum;
        }
    }
    return out;
}

LossAndGrad softmax_cross_entropy_with_logits(const NdArray& logits, const NdArray& onehot) {
    if (!logits.same_shape(onehot)) {
        throw std::invalid_argument("softmax_cross_entropy_with_logits: shape mismatch " +
                                    NdArray::shape_string(logits.shape()) + " vs " +
                                    NdArray::shape_string(onehot.shape()));
    }
    const std::size_t batch = logits.dim(0);
    const std::size_t classes = logits.dim(1);
    for (std::size_t b = 0; b < batch; ++b) {
        double sum = 0.0;
        std::size_t ones = 0;
        for (std::size_t c = 0; c < classes; ++c) {
            double y = onehot[b * classes + c];
            if (y != 0.0 && y != 1.0) {
                throw std::invalid_argument("softmax_cross_entropy_with_logits: row " +
                                            std::to_string(b) + " is not one-hot");
            }
            sum += y;
            ones += (y == 1.0);
        }
        if (sum != 1.0 || ones != 1) {
            throw std::invalid_argument("softmax_cross_entropy_with_logits: row " +
                                        std::to_string(b) + " is not one-hot");
        }
    }

    NdArray probs = softmax_rows(logits);
    LossAndGrad result;
    result.grad = NdArray(logits.shape());
    double total = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
        const double* row = logits.data() + b * classes;
        double mx = *std::max_element(row, row + classes);
        double lse = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            lse += std::exp(row[c] - mx);
        }
        lse = mx + std::log(lse);
        for (std::size_t c = 0; c < classes; ++c) {
            const std::size_t i = b * classes + c;
            if (onehot[i] == 1.0) {
                total += lse - row[c];  // -log softmax, in stable form
            }
            result.grad[i] = (probs[i] - onehot[i]) / static_cast<double>(batch);
        }
    }
    result.value = total / static_cast<double>(batch);
    return result;
}

LossAndGrad sigmoid_cross_entropy_with_logits(const NdArray& logits, const NdArray& targets) {
    if (!logits.same_shape(targets)) {
        throw std::invalid_argument("sigmoid_cross_entropy_with_logits: shape mismatch " +
                                    NdArray::shape_string(logits.shape()) + " vs " +
                                    NdArray::shape_string(targets.shape()));
    }
    const std::size_t n = logits.size();
    LossAndGrad result;
    result.grad = NdArray(logits.shape());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = targets[i];
        if (t != 0.0 && t != 1.0) {
            throw std::invalid_argument("sigmoid_cross_entropy_with_logits: target at index " +
                                        std::to_string(i) + " is not 0 or 1");
        }
        const double l = logits[i];
        // -t log s(l) - (1-t) log(1-s(l)) = softplus(l) - t*l
        total += softplus(l) - t * l;
        result.grad[i] = (sigmoid(l) - t) / static_cast<double>(n);
    }
    result.value = total / static_cast<double>(n);
    return result;
}

}  // namespace sslac
