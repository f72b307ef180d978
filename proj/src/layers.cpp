#include "sslac/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace sslac {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

NdArray init_normal(std::vector<std::size_t> shape, RngStream& rng, double stddev) {
    NdArray out(std::move(shape));
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = rng.normal(0.0, stddev);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------- Dense

Dense::Dense(std::size_t in_features, std::size_t out_features, RngStream& init_rng,
             double init_std)
    : in_(in_features),
      out_(out_features),
      weight_("W", init_normal({in_features, out_features}, init_rng, init_std)),
      bias_("b", NdArray({out_features})) {}

NdArray Dense::forward(const NdArray& input, bool) {
    require(input.ndim() == 2 && input.dim(1) == in_,
            "dense: expected input (batch, " + std::to_string(in_) + "), got " +
                NdArray::shape_string(input.shape()));
    last_input_ = input;
    const std::size_t batch = input.dim(0);
    NdArray out({batch, out_});
    const double* w = weight_.value.data();
    for (std::size_t b = 0; b < batch; ++b) {
        const double* x = input.data() + b * in_;
        double* y = out.data() + b * out_;
        for (std::size_t o = 0; o < out_; ++o) y[o] = bias_.value[o];
        for (std::size_t i = 0; i < in_; ++i) {
            const double xi = x[i];
            const double* wrow = w + i * out_;
            for (std::size_t o = 0; o < out_; ++o) y[o] += xi * wrow[o];
        }
    }
    return out;
}

NdArray Dense::backward(const NdArray& grad_output) {
    const std::size_t batch = last_input_.dim(0);
    require(grad_output.ndim() == 2 && grad_output.dim(0) == batch && grad_output.dim(1) == out_,
            "dense backward: gradient shape mismatch");
    NdArray grad_input({batch, in_});
    double* dw = weight_.grad.data();
    const double* w = weight_.value.data();
    for (std::size_t b = 0; b < batch; ++b) {
        const double* x = last_input_.data() + b * in_;
        const double* g = grad_output.data() + b * out_;
        double* gx = grad_input.data() + b * in_;
        for (std::size_t o = 0; o < out_; ++o) bias_.grad[o] += g[o];
        for (std::size_t i = 0; i < in_; ++i) {
            const double xi = x[i];
            const double* wrow = w + i * out_;
            double* dwrow = dw + i * out_;
            double acc = 0.0;
            for (std::size_t o = 0; o < out_; ++o) {
                dwrow[o] += xi * g[o];
                acc += wrow[o] * g[o];
            }
            gx[i] = acc;
        }
    }
    return grad_input;
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t stride,
               RngStream& init_rng, double init_std)
    : in_ch_(in_channels),
      out_ch_(out_channels),
      stride_(stride),
      weight_("W", init_normal({kKernel, kKernel, in_channels, out_channels}, init_rng, init_std)),
      bias_("b", NdArray({out_channels})) {
    require(stride == 1 || stride == 2, "conv: stride must be 1 or 2");
}

NdArray Conv2d::forward(const NdArray& input, bool) {
    require(input.ndim() == 4 && input.dim(3) == in_ch_,
            "conv: expected input (batch, h, w, " + std::to_string(in_ch_) + "), got " +
                NdArray::shape_string(input.shape()));
    last_input_ = input;
    const std::size_t batch = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t oh = (h + 2 * kPad - kKernel) / stride_ + 1;
    const std::size_t ow = (w + 2 * kPad - kKernel) / stride_ + 1;
    NdArray out({batch, oh, ow, out_ch_});
    const double* wt = weight_.value.data();
    for (std::size_t b = 0; b < batch; ++b) {
        const double* xb = input.data() + b * h * w * in_ch_;
        double* yb = out.data() + b * oh * ow * out_ch_;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double* y = yb + (oy * ow + ox) * out_ch_;
                for (std::size_t oc = 0; oc < out_ch_; ++oc) y[oc] = bias_.value[oc];
                for (std::size_t ky = 0; ky < kKernel; ++ky) {
                    const std::ptrdiff_t iy =
                        static_cast<std::ptrdiff_t>(oy * stride_ + ky) - kPad;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                    for (std::size_t kx = 0; kx < kKernel; ++kx) {
                        const std::ptrdiff_t ix =
                            static_cast<std::ptrdiff_t>(ox * stride_ + kx) - kPad;
                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                        const double* x = xb + (iy * w + ix) * in_ch_;
                        const double* wk = wt + (ky * kKernel + kx) * in_ch_ * out_ch_;
                        for (std::size_t ic = 0; ic < in_ch_; ++ic) {
                            const double xi = x[ic];
                            const double* wrow = wk + ic * out_ch_;
                            for (std::size_t oc = 0; oc < out_ch_; ++oc) y[oc] += xi * wrow[oc];
                        }
                    }
                }
            }
        }
    }
    return out;
}

NdArray Conv2d::backward(const NdArray& grad_output) {
    const std::size_t batch = last_input_.dim(0);
    const std::size_t h = last_input_.dim(1), w = last_input_.dim(2);
    const std::size_t oh = grad_output.dim(1), ow = grad_output.dim(2);
    require(grad_output.ndim() == 4 && grad_output.dim(0) == batch &&
                grad_output.dim(3) == out_ch_,
            "conv backward: gradient shape mismatch");
    NdArray grad_input(last_input_.shape());
    const double* wt = weight_.value.data();
    double* dw = weight_.grad.data();
    for (std::size_t b = 0; b < batch; ++b) {
        const double* xb = last_input_.data() + b * h * w * in_ch_;
        double* gxb = grad_input.data() + b * h * w * in_ch_;
        const double* gb = grad_output.data() + b * oh * ow * out_ch_;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const double* g = gb + (oy * ow + ox) * out_ch_;
                for (std::size_t oc = 0; oc < out_ch_; ++oc) bias_.grad[oc] += g[oc];
                for (std::size_t ky = 0; ky < kKernel; ++ky) {
                    const std::ptrdiff_t iy =
                        static_cast<std::ptrdiff_t>(oy * stride_ + ky) - kPad;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                    for (std::size_t kx = 0; kx < kKernel; ++kx) {
                        const std::ptrdiff_t ix =
                            static_cast<std::ptrdiff_t>(ox * stride_ + kx) - kPad;
                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                        const double* x = xb + (iy * w + ix) * in_ch_;
                        double* gx = gxb + (iy * w + ix) * in_ch_;
                        const double* wk = wt + (ky * kKernel + kx) * in_ch_ * out_ch_;
                        double* dwk = dw + (ky * kKernel + kx) * in_ch_ * out_ch_;
                        for (std::size_t ic = 0; ic < in_ch_; ++ic) {
                            const double xi = x[ic];
                            const double* wrow = wk + ic * out_ch_;
                            double* dwrow = dwk + ic * out_ch_;
                            double acc = 0.0;
                            for (std::size_t oc = 0; oc < out_ch_; ++oc) {
                                dwrow[oc] += xi * g[oc];
                                acc += wrow[oc] * g[oc];
                            }
                            gx[ic] += acc;
                        }
                    }
                }
            }
        }
    }
    return grad_input;
}

// ---------------------------------------------------------------- Upsample2x

NdArray Upsample2x::forward(const NdArray& input, bool) {
    require(input.ndim() == 4, "upsample2x: expected NHWC input, got " +
                                   NdArray::shape_string(input.shape()));
    last_shape_ = input.shape();
    const std::size_t batch = input.dim(0), h = input.dim(1), w = input.dim(2), c = input.dim(3);
    NdArray out({batch, 2 * h, 2 * w, c});
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t y = 0; y < 2 * h; ++y) {
            for (std::size_t x = 0; x < 2 * w; ++x) {
                const double* src = input.data() + ((b * h + y / 2) * w + x / 2) * c;
                double* dst = out.data() + ((b * 2 * h + y) * 2 * w + x) * c;
                for (std::size_t ch = 0; ch < c; ++ch) dst[ch] = src[ch];
            }
        }
    }
    return out;
}

NdArray Upsample2x::backward(const NdArray& grad_output) {
    const std::size_t batch = last_shape_[0], h = last_shape_[1], w = last_shape_[2],
                      c = last_shape_[3];
    require(grad_output.shape() == std::vector<std::size_t>({batch, 2 * h, 2 * w, c}),
            "upsample2x backward: gradient shape mismatch");
    NdArray grad_input(last_shape_);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t y = 0; y < 2 * h; ++y) {
            for (std::size_t x = 0; x < 2 * w; ++x) {
                const double* src = grad_output.data() + ((b * 2 * h + y) * 2 * w + x) * c;
                double* dst = grad_input.data() + ((b * h + y / 2) * w + x / 2) * c;
                for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += src[ch];
            }
        }
    }
    return grad_input;
}

// ---------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(std::size_t channels, double momentum)
    : channels_(channels),
      momentum_(momentum),
      gamma_("gamma", NdArray({channels}, 1.0)),
      beta_("beta", NdArray({channels})),
      running_mean_("running_mean", NdArray({channels}), /*train=*/false),
      running_var_("running_var", NdArray({channels}, 1.0), /*train=*/false) {}

NdArray BatchNorm::forward(const NdArray& input, bool training) {
    require(input.ndim() >= 2 && input.shape().back() == channels_,
            "batch_norm: expected trailing dimension " + std::to_string(channels_) + ", got " +
                NdArray::shape_string(input.shape()));
    last_shape_ = input.shape();
    const std::size_t rows = input.size() / channels_;
    NdArray out(input.shape());
    last_xhat_ = NdArray(input.shape());
    last_inv_std_.assign(channels_, 0.0);

    std::vector<double> mean(channels_, 0.0), var(channels_, 0.0);
    if (training) {
        for (std::size_t r = 0; r < rows; ++r) {
            const double* x = input.data() + r * channels_;
            for (std::size_t c = 0; c < channels_; ++c) mean[c] += x[c];
        }
        for (std::size_t c = 0; c < channels_; ++c) mean[c] /= static_cast<double>(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* x = input.data() + r * channels_;
            for (std::size_t c = 0; c < channels_; ++c) {
                const double d = x[c] - mean[c];
                var[c] += d * d;
            }
        }
        for (std::size_t c = 0; c < channels_; ++c) var[c] /= static_cast<double>(rows);
        for (std::size_t c = 0; c < channels_; ++c) {
            running_mean_.value[c] = momentum_ * running_mean_.value[c] + (1.0 - momentum_) * mean[c];
            running_var_.value[c] = momentum_ * running_var_.value[c] + (1.0 - momentum_) * var[c];
        }
    } else {
        for (std::size_t c = 0; c < channels_; ++c) {
            mean[c] = running_mean_.value[c];
            var[c] = running_var_.value[c];
        }
    }

    for (std::size_t c = 0; c < channels_; ++c) {
        last_inv_std_[c] = 1.0 / std::sqrt(var[c] + kEps);
    }
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = input.data() + r * channels_;
        double* xh = last_xhat_.data() + r * channels_;
        double* y = out.data() + r * channels_;
        for (std::size_t c = 0; c < channels_; ++c) {
            xh[c] = (x[c] - mean[c]) * last_inv_std_[c];
            y[c] = gamma_.value[c] * xh[c] + beta_.value[c];
        }
    }
    return out;
}

NdArray BatchNorm::backward(const NdArray& grad_output) {
    require(grad_output.shape() == last_shape_, "batch_norm backward: gradient shape mismatch");
    const std::size_t rows = grad_output.size() / channels_;
    const double n = static_cast<double>(rows);

    std::vector<double> sum_g(channels_, 0.0), sum_gx(channels_, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* g = grad_output.data() + r * channels_;
        const double* xh = last_xhat_.data() + r * channels_;
        for (std::size_t c = 0; c < channels_; ++c) {
            sum_g[c] += g[c];
            sum_gx[c] += g[c] * xh[c];
        }
    }
    for (std::size_t c = 0; c < channels_; ++c) {
        gamma_.grad[c] += sum_gx[c];
        beta_.grad[c] += sum_g[c];
    }

    NdArray grad_input(last_shape_);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* g = grad_output.data() + r * channels_;
        const double* xh = last_xhat_.data() + r * channels_;
        double* gx = grad_input.data() + r * channels_;
        for (std::size_t c = 0; c < channels_; ++c) {
            gx[c] = gamma_.value[c] * last_inv_std_[c] / n *
                    (n * g[c] - sum_g[c] - xh[c] * sum_gx[c]);
        }
    }
    return grad_input;
}

// ---------------------------------------------------------------- Relu / Tanh

NdArray Relu::forward(const NdArray& input, bool) {
    last_input_ = input;
    NdArray out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
        out[i] = input[i] > 0.0 ? input[i] : 0.0;
    }
    return out;
}

NdArray Relu::backward(const NdArray& grad_output) {
    require(grad_output.same_shape(last_input_), "relu backward: gradient shape mismatch");
    NdArray grad_input(grad_output.shape());
    for (std::size_t i = 0; i < grad_output.size(); ++i) {
        grad_input[i] = last_input_[i] > 0.0 ? grad_output[i] : 0.0;
    }
    return grad_input;
}

NdArray TanhLayer::forward(const NdArray& input, bool) {
    NdArray out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) out[i] = std::tanh(input[i]);
    last_output_ = out;
    return out;
}

NdArray TanhLayer::backward(const NdArray& grad_output) {
    require(grad_output.same_shape(last_output_), "tanh backward: gradient shape mismatch");
    NdArray grad_input(grad_output.shape());
    for (std::size_t i = 0; i < grad_output.size(); ++i) {
        grad_input[i] = grad_output[i] * (1.0 - last_output_[i] * last_output_[i]);
    }
    return grad_input;
}

// ---------------------------------------------------------------- Dropout

Dropout::Dropout(double rate, RngStream rng) : rate_(rate), rng_(rng) {
    require(rate >= 0.0 && rate < 1.0, "dropout: keep probability must be positive (rate in [0,1))");
}

NdArray Dropout::forward(const NdArray& input, bool training) {
    last_training_ = training;
    if (!training || rate_ == 0.0) {
        mask_ = NdArray();
        return input;
    }
    const double keep = 1.0 - rate_;
    if (!(reuse_noise_ && mask_.same_shape(input) && !mask_.empty())) {
        mask_ = NdArray(input.shape());
        for (std::size_t i = 0; i < mask_.size(); ++i) {
            mask_[i] = rng_.uniform() < keep ? 1.0 / keep : 0.0;
        }
    }
    NdArray out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] * mask_[i];
    return out;
}

NdArray Dropout::backward(const NdArray& grad_output) {
    if (!last_training_ || rate_ == 0.0) return grad_output;
    NdArray grad_input(grad_output.shape());
    for (std::size_t i = 0; i < grad_output.size(); ++i) {
        grad_input[i] = grad_output[i] * mask_[i];
    }
    return grad_input;
}

// ---------------------------------------------------------------- GaussianNoise

GaussianNoise::GaussianNoise(double stddev, RngStream rng) : stddev_(stddev), rng_(rng) {
    require(stddev >= 0.0, "gaussian_noise: stddev must be non-negative");
}

NdArray GaussianNoise::forward(const NdArray& input, bool training) {
    if (!training || stddev_ == 0.0) return input;
    if (!(reuse_noise_ && noise_.same_shape(input) && !noise_.empty())) {
        noise_ = NdArray(input.shape());
        for (std::size_t i = 0; i < noise_.size(); ++i) noise_[i] = rng_.normal(0.0, stddev_);
    }
    NdArray out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] + noise_[i];
    return out;
}

NdArray GaussianNoise::backward(const NdArray& grad_output) { return grad_output; }

// ---------------------------------------------------------------- Flatten / Reshape

NdArray Flatten::forward(const NdArray& input, bool) {
    last_shape_ = input.shape();
    NdArray out = input;
    out.reshape({input.dim(0), input.size() / input.dim(0)});
    return out;
}

NdArray Flatten::backward(const NdArray& grad_output) {
    NdArray grad_input = grad_output;
    grad_input.reshape(last_shape_);
    return grad_input;
}

NdArray Reshape::forward(const NdArray& input, bool) {
    require(input.ndim() == 2 && input.dim(1) == h_ * w_ * c_,
            "reshape: expected (batch, " + std::to_string(h_ * w_ * c_) + "), got " +
                NdArray::shape_string(input.shape()));
    NdArray out = input;
    out.reshape({input.dim(0), h_, w_, c_});
    return out;
}

NdArray Reshape::backward(const NdArray& grad_output) {
    NdArray grad_input = grad_output;
    grad_input.reshape({grad_output.dim(0), h_ * w_ * c_});
    return grad_input;
}

}  // namespace sslac
