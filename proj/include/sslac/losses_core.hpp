#pragma once

#include "sslac/ndarray.hpp"

namespace sslac {

struct LossAndGrad {
    double value = 0.0;
    NdArray grad;  // d(value)/d(logits), same shape as the logits argument
};

// Mean over the batch of -sum_k y_k log softmax(logits)_k, computed with
// max-subtraction so large logits never overflow. onehot rows must contain
// a single 1 and otherwise 0.
LossAndGrad softmax_cross_entropy_with_logits(const NdArray& logits, const NdArray& onehot);

// Mean over all elements of -t log sigmoid(l) - (1-t) log(1 - sigmoid(l)),
// in the softplus form. Targets must be exactly 0 or 1.
LossAndGrad sigmoid_cross_entropy_with_logits(const NdArray& logits, const NdArray& targets);

// Row-wise softmax with max-subtraction.
NdArray softmax_rows(const NdArray& logits);

double sigmoid(double x);

// log(1 + exp(x)) without overflow.
double softplus(double x);

}  // namespace sslac
