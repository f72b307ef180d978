#pragma once

#include "sslac/losses_core.hpp"
#include "sslac/ndarray.hpp"

namespace sslac {

// Per-term weights for the discriminator objective. Unit weights reproduce
// the method as published; zeroing individual terms supports ablation.
struct LossWeights {
    double supervised_labelled = 1.0;
    double supervised_fake = 1.0;
    double gan_unlabelled = 1.0;
    double gan_labelled = 1.0;
    double gan_fake = 1.0;
};

// Generator objective on the K+1'th-node logits of generated samples:
// mean log(1 - sigmoid(l)), i.e. -softplus(l). Minimizing drives the
// discriminator to read fakes as real/unlabelled at the K+1 node.
LossAndGrad generator_loss(const NdArray& k1_logits_on_fake);

struct SupervisedLossResult {
    double value = 0.0;
    double labelled_term = 0.0;
    double fake_term = 0.0;
    NdArray grad_labelled;  // d/d labelled_logits
    NdArray grad_fake;      // d/d fake_logits
};

// Categorical cross-entropy of labelled samples against their K+1 one-hot
// labels plus categorical cross-entropy of generated samples pseudo-labelled
// into class K+1.
SupervisedLossResult supervised_loss(const NdArray& labelled_logits, const NdArray& onehot,
                                     const NdArray& fake_logits,
                                     double labelled_weight = 1.0, double fake_weight = 1.0);

// Single binary-game terms at the K+1 node; gan_discriminator_loss is
// their sum, and the trainer applies them per forward pass.
LossAndGrad binary_real_term(const NdArray& k1_logits, double weight = 1.0);
LossAndGrad binary_fake_term(const NdArray& k1_logits, double weight = 1.0);

struct GanLossResult {
    double value = 0.0;
    NdArray grad_unlabelled;
    NdArray grad_labelled;
    NdArray grad_fake;
};

// Binary game at the K+1'th node: unlabelled samples are real (target 1),
// labelled and generated samples are fake (target 0).
GanLossResult gan_discriminator_loss(const NdArray& k1_logits_unlabelled,
                                     const NdArray& k1_logits_labelled,
                                     const NdArray& k1_logits_fake,
                                     double unlabelled_weight = 1.0,
                                     double labelled_weight = 1.0, double fake_weight = 1.0);

inline double total_discriminator_loss(double supervised, double gan) {
    return supervised + gan;
}

}  // namespace sslac
