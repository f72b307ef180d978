#include "sslac/gan_losses.hpp"

#include <stdexcept>

namespace sslac {

namespace {

LossAndGrad binary_term(const NdArray& logits, bool target_real, double weight) {
    const std::size_t n = logits.size();
    if (n == 0) {
        throw std::invalid_argument("gan loss: empty logit batch");
    }
    LossAndGrad result;
    result.grad = NdArray(logits.shape());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double l = logits[i];
        if (target_real) {
            // -log sigmoid(l) = softplus(-l)
            total += softplus(-l);
            result.grad[i] = weight * (sigmoid(l) - 1.0) / static_cast<double>(n);
        } else {
            // -log(1 - sigmoid(l)) = softplus(l)
            total += softplus(l);
            result.grad[i] = weight * sigmoid(l) / static_cast<double>(n);
        }
    }
    result.value = weight * total / static_cast<double>(n);
    return result;
}

}  // namespace

LossAndGrad binary_real_term(const NdArray& k1_logits, double weight) {
    return binary_term(k1_logits, true, weight);
}

LossAndGrad binary_fake_term(const NdArray& k1_logits, double weight) {
    return binary_term(k1_logits, false, weight);
}

LossAndGrad generator_loss(const NdArray& k1_logits_on_fake) {
    const std::size_t n = k1_logits_on_fake.size();
    if (n == 0) {
        throw std::invalid_argument("generator_loss: empty logit batch");
    }
    LossAndGrad result;
    result.grad = NdArray(k1_logits_on_fake.shape());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double l = k1_logits_on_fake[i];
        // log(1 - sigmoid(l)) = -softplus(l)
        total -= softplus(l);
        result.grad[i] = -sigmoid(l) / static_cast<double>(n);
    }
    result.value = total / static_cast<double>(n);
    return result;
}

SupervisedLossResult supervised_loss(const NdArray& labelled_logits, const NdArray& onehot,
                                     const NdArray& fake_logits, double labelled_weight,
                                     double fake_weight) {
    if (labelled_logits.ndim() != 2 || fake_logits.ndim() != 2 ||
        labelled_logits.dim(1) != fake_logits.dim(1)) {
        throw std::invalid_argument("supervised_loss: logit batches must be (batch, K+1) with "
                                    "matching class counts");
    }
    const std::size_t classes = fake_logits.dim(1);

    SupervisedLossResult result;

    LossAndGrad labelled = softmax_cross_entropy_with_logits(labelled_logits, onehot);
    result.labelled_term = labelled.value;
    result.grad_labelled = std::move(labelled.grad);
    for (std::size_t i = 0; i < result.grad_labelled.size(); ++i) {
        result.grad_labelled[i] *= labelled_weight;
    }

    // Pseudo-label every generated sample as class K+1.
    NdArray pseudo(fake_logits.shape());
    for (std::size_t b = 0; b < fake_logits.dim(0); ++b) {
        pseudo[b * classes + (classes - 1)] = 1.0;
    }
    LossAndGrad fake = softmax_cross_entropy_with_logits(fake_logits, pseudo);
    result.fake_term = fake.value;
    result.grad_fake = std::move(fake.grad);
    for (std::size_t i = 0; i < result.grad_fake.size(); ++i) {
        result.grad_fake[i] *= fake_weight;
    }

    result.value = labelled_weight * result.labelled_term + fake_weight * result.fake_term;
    return result;
}

GanLossResult gan_discriminator_loss(const NdArray& k1_logits_unlabelled,
                                     const NdArray& k1_logits_labelled,
                                     const NdArray& k1_logits_fake, double unlabelled_weight,
                                     double labelled_weight, double fake_weight) {
    GanLossResult result;
    LossAndGrad unlab = binary_real_term(k1_logits_unlabelled, unlabelled_weight);
    LossAndGrad lab = binary_fake_term(k1_logits_labelled, labelled_weight);
    LossAndGrad fake = binary_fake_term(k1_logits_fake, fake_weight);
    result.value = unlab.value + lab.value + fake.value;
    result.grad_unlabelled = std::move(unlab.grad);
    result.grad_labelled = std::move(lab.grad);
    result.grad_fake = std::move(fake.grad);
    return result;
}

}  // namespace sslac
