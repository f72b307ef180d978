#include "sslac/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sslac {

void Network::add(std::unique_ptr<Layer> layer) {
    // Qualify parameter names with the layer position so checkpoints can
    // match parameters unambiguously.
    const std::size_t idx = layers_.size();
    for (Param* p : layer->params()) {
        p->name = "l" + std::to_string(idx) + "." + layer->kind() + "." + p->name;
    }
    layers_.push_back(std::move(layer));
}

NdArray Network::forward(const NdArray& input, bool training) {
    NdArray x = input;
    for (auto& layer : layers_) {
        x = layer->forward(x, training);
    }
    forward_done_ = true;
    return x;
}

NdArray Network::backward(const NdArray& grad_output) {
    if (!forward_done_) {
        throw std::logic_error("Network::backward called without a preceding forward pass");
    }
    NdArray g = grad_output;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        g = (*it)->backward(g);
    }
    has_grads_ = true;
    return g;
}

std::vector<Param*> Network::params() {
    std::vector<Param*> out;
    for (auto& layer : layers_) {
        for (Param* p : layer->params()) out.push_back(p);
    }
    return out;
}

void Network::zero_grads() {
    for (Param* p : params()) {
        std::fill(p->grad.raw().begin(), p->grad.raw().end(), 0.0);
    }
    has_grads_ = false;
}

void Network::set_reuse_noise(bool reuse) {
    for (auto& layer : layers_) layer->set_reuse_noise(reuse);
}

ParamSnapshot ParamSnapshot::capture(Network& net) {
    ParamSnapshot snap;
    for (Param* p : net.params()) {
        std::vector<float> v(p->value.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(p->value[i]);
        snap.values.push_back(std::move(v));
    }
    return snap;
}

void ParamSnapshot::restore(Network& net) const {
    auto params = net.params();
    if (params.size() != values.size()) {
        throw std::logic_error("ParamSnapshot::restore: parameter count mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->value.size() != values[i].size()) {
            throw std::logic_error("ParamSnapshot::restore: parameter size mismatch");
        }
        for (std::size_t j = 0; j < values[i].size(); ++j) {
            params[i]->value[j] = static_cast<double>(values[i][j]);
        }
    }
}

void AdamOptimizer::step(Network& net) {
    if (!net.has_grads()) {
        throw std::logic_error("AdamOptimizer::step called before any gradients were computed");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (Param* p : net.params()) {
        if (!p->trainable) continue;
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double g = p->grad[i];
            p->m[i] = beta1_ * p->m[i] + (1.0 - beta1_) * g;
            p->v[i] = beta2_ * p->v[i] + (1.0 - beta2_) * g * g;
            const double mhat = p->m[i] / bc1;
            const double vhat = p->v[i] / bc2;
            p->value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

namespace {

constexpr char kMagic[8] = {'S', 'S', 'L', 'A', 'C', 'K', '0', '1'};

void write_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void write_f32_le(std::ofstream& out, float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

float read_f32_le(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t u = 0;
    for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

}  // namespace

void save_checkpoint(const std::string& path, Network& net, const std::string& config_text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out.write(kMagic, 8);
    write_u64(out, config_text.size());
    out.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));
    auto params = net.params();
    write_u64(out, params.size());
    for (Param* p : params) {
        write_u64(out, p->name.size());
        out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
        write_u64(out, p->value.ndim());
        for (std::size_t d : p->value.shape()) write_u64(out, d);
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            write_f32_le(out, static_cast<float>(p->value[i]));
        }
    }
    if (!out) throw std::runtime_error("error writing checkpoint: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) {
        throw std::runtime_error("not a checkpoint file: " + path);
    }
    Checkpoint ck;
    const std::uint64_t cfg_len = read_u64(in);
    ck.config_text.resize(cfg_len);
    in.read(ck.config_text.data(), static_cast<std::streamsize>(cfg_len));
    const std::uint64_t n = read_u64(in);
    for (std::uint64_t r = 0; r < n; ++r) {
        CheckpointRecord rec;
        const std::uint64_t name_len = read_u64(in);
        rec.name.resize(name_len);
        in.read(rec.name.data(), static_cast<std::streamsize>(name_len));
        const std::uint64_t ndim = read_u64(in);
        std::size_t count = 1;
        for (std::uint64_t d = 0; d < ndim; ++d) {
            rec.shape.push_back(static_cast<std::size_t>(read_u64(in)));
            count *= rec.shape.back();
        }
        rec.data.resize(count);
        for (std::size_t i = 0; i < count; ++i) rec.data[i] = read_f32_le(in);
        if (!in) throw std::runtime_error("truncated checkpoint: " + path);
        ck.records.push_back(std::move(rec));
    }
    return ck;
}

void load_checkpoint(const std::string& path, Network& net, std::string* config_text) {
    Checkpoint ck = read_checkpoint(path);
    auto params = net.params();
    if (params.size() != ck.records.size()) {
        throw std::runtime_error("checkpoint " + path + " holds " +
                                 std::to_string(ck.records.size()) + " parameters, network has " +
                                 std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const CheckpointRecord& rec = ck.records[i];
        if (params[i]->name != rec.name || params[i]->value.shape() != rec.shape) {
            throw std::runtime_error("checkpoint parameter mismatch: expected " +
                                     params[i]->name + " " +
                                     NdArray::shape_string(params[i]->value.shape()) + ", found " +
                                     rec.name + " " + NdArray::shape_string(rec.shape));
        }
        for (std::size_t j = 0; j < rec.data.size(); ++j) {
            params[i]->value[j] = static_cast<double>(rec.data[j]);
        }
    }
    if (config_text) *config_text = ck.config_text;
}

double grad_check(Network& net, const NdArray& input,
                  const std::function<ScalarLoss(const NdArray&)>& loss, double eps,
                  bool training_mode) {
    // Freeze stochastic masks so both central-difference evaluations see
    // the same noise realisation as the analytic pass.
    net.set_reuse_noise(true);
    net.zero_grads();
    NdArray out = net.forward(input, training_mode);
    ScalarLoss l = loss(out);
    net.backward(l.grad);

    double worst = 0.0;
    for (Param* p : net.params()) {
        if (!p->trainable) continue;
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double saved = p->value[i];
            p->value[i] = saved + eps;
            const double up = loss(net.forward(input, training_mode)).value;
            p->value[i] = saved - eps;
            const double down = loss(net.forward(input, training_mode)).value;
            p->value[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double analytic = p->grad[i];
            const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
            worst = std::max(worst, std::abs(numeric - analytic) / denom);
        }
    }
    net.set_reuse_noise(false);
    net.zero_grads();
    return worst;
}

}  // namespace sslac
