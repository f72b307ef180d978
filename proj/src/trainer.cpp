#include "sslac/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "sslac/rng.hpp"

namespace sslac {

namespace {

NdArray gather_batch(const NdArray& src, const std::vector<std::size_t>& indices) {
    const std::size_t row = src.size() / src.dim(0);
    std::vector<std::size_t> shape = src.shape();
    shape[0] = indices.size();
    NdArray out(shape);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        std::copy_n(src.data() + indices[i] * row, row, out.data() + i * row);
    }
    return out;
}

// K+1'th column of a (batch, K+1) logit array as a flat vector.
NdArray k1_column(const NdArray& logits) {
    const std::size_t batch = logits.dim(0);
    const std::size_t classes = logits.dim(1);
    NdArray out({batch});
    for (std::size_t b = 0; b < batch; ++b) out[b] = logits[b * classes + (classes - 1)];
    return out;
}

// Adds a flat per-sample gradient into the K+1'th column of a full logit
// gradient.
void add_k1_grad(NdArray& full_grad, const NdArray& k1_grad) {
    const std::size_t batch = full_grad.dim(0);
    const std::size_t classes = full_grad.dim(1);
    for (std::size_t b = 0; b < batch; ++b) full_grad[b * classes + (classes - 1)] += k1_grad[b];
}

}  // namespace

void write_train_log(const std::string& path, const TrainLog& log) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open train log for writing: " + path);
    out << std::setprecision(12);
    out << "# step g_loss d_supervised_loss d_gan_loss [fair_val_accuracy]\n";
    for (const StepRecord& r : log.records) {
        out << r.step << " " << r.generator_loss << " " << r.disc_supervised_loss << " "
            << r.disc_gan_loss;
        if (r.fair_val_accuracy) out << " " << *r.fair_val_accuracy;
        out << "\n";
    }
    out << "best_step = " << log.best_step << "\n";
    out << "best_val_accuracy = " << log.best_val_accuracy << "\n";
    out << "stopped_at_step = " << log.stopped_at_step << "\n";
    if (!out) throw std::runtime_error("error writing train log: " + path);
}

double fair_validation_accuracy(Network& discriminator, const NdArray& val_inputs,
                                const std::vector<int>& val_labels) {
    if (val_labels.empty() || val_inputs.empty()) {
        throw std::invalid_argument("fair_validation_accuracy: empty validation set");
    }
    const std::vector<int> preds = predict_classes(discriminator, val_inputs);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) correct += (preds[i] == val_labels[i]);
    return static_cast<double>(correct) / static_cast<double>(preds.size());
}

TrainResult train(const SsLacSplit& split, const TrainConfig& config) {
    config.validate();
    if (split.k != config.k) {
        throw std::invalid_argument("train: split has k=" + std::to_string(split.k) +
                                    " but config has k=" + std::to_string(config.k));
    }

    TrainResult result;
    if (config.domain == "dummy") {
        result.generator = build_mlp_generator(config.mlp, config.seed);
        result.discriminator = build_mlp_discriminator(config.k, config.mlp, config.seed);
    } else {
        result.generator = build_generator(config.generator, config.seed);
        result.discriminator = build_discriminator(config.k, config.discriminator, config.seed);
    }
    Network& gen = result.generator;
    Network& disc = result.discriminator;

    AdamOptimizer gen_opt(config.learning_rate, config.adam_beta1, config.adam_beta2);
    AdamOptimizer disc_opt(config.learning_rate, config.adam_beta1, config.adam_beta2);

    RngStream batch_rng = RngStream::derive(config.seed, "train/batch-draw");
    RngStream noise_rng = RngStream::derive(config.seed, "train/noise");

    // Class-balanced labelled sampling: group labelled rows by their
    // one-hot class once up front.
    const std::size_t classes = static_cast<std::size_t>(config.k) + 1;
    std::vector<std::vector<std::size_t>> labelled_by_class(config.k);
    for (std::size_t i = 0; i < split.labelled_x.dim(0); ++i) {
        for (std::size_t c = 0; c < classes; ++c) {
            if (split.labelled_y[i * classes + c] == 1.0) {
                labelled_by_class.at(c).push_back(i);
                break;
            }
        }
    }
    for (const auto& rows : labelled_by_class) {
        if (rows.empty()) {
            throw std::invalid_argument("train: a known class has no labelled samples");
        }
    }

    const std::size_t batch = static_cast<std::size_t>(config.batch_size);
    const std::size_t z_len = static_cast<std::size_t>(config.z_length());

    auto draw_noise = [&]() {
        NdArray z({batch, z_len});
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = noise_rng.normal();
        return z;
    };

    TrainLog& log = result.log;
    double best_acc = -1.0;
    int best_step = 0;
    int last_improvement = config.min_steps_before_stopping;
    std::optional<ParamSnapshot> best_gen, best_disc;

    int step = 0;
    for (step = 1; step <= config.max_steps; ++step) {
        // ---- discriminator update: supervised + K+1-node GAN terms.
        disc.zero_grads();

        std::vector<std::size_t> lab_idx(batch);
        for (std::size_t i = 0; i < batch; ++i) {
            const auto& rows = labelled_by_class[batch_rng.index(labelled_by_class.size())];
            lab_idx[i] = rows[batch_rng.index(rows.size())];
        }
        NdArray lab_x = gather_batch(split.labelled_x, lab_idx);
        NdArray lab_y = gather_batch(split.labelled_y, lab_idx);

        std::vector<std::size_t> unlab_idx(batch);
        for (std::size_t i = 0; i < batch; ++i) {
            unlab_idx[i] = batch_rng.index(split.unlabelled_x.dim(0));
        }
        NdArray unlab_x = gather_batch(split.unlabelled_x, unlab_idx);

        NdArray fake_x = gen.forward(draw_noise(), /*training=*/true);

        // Labelled pass: softmax cross-entropy plus the 'labelled is fake'
        // binary term at the K+1 node.
        NdArray lab_logits = disc.forward(lab_x, /*training=*/true);
        LossAndGrad lab_ce = softmax_cross_entropy_with_logits(lab_logits, lab_y);
        NdArray lab_grad = lab_ce.grad;
        for (std::size_t i = 0; i < lab_grad.size(); ++i) {
            lab_grad[i] *= config.weights.supervised_labelled;
        }
        LossAndGrad gan_lab = binary_fake_term(k1_column(lab_logits), config.weights.gan_labelled);
        add_k1_grad(lab_grad, gan_lab.grad);
        disc.backward(lab_grad);

        // Unlabelled pass: 'unlabelled is real' at the K+1 node.
        NdArray unlab_logits = disc.forward(unlab_x, /*training=*/true);
        LossAndGrad gan_unlab =
            binary_real_term(k1_column(unlab_logits), config.weights.gan_unlabelled);
        {
            NdArray grad(unlab_logits.shape());
            add_k1_grad(grad, gan_unlab.grad);
            disc.backward(grad);
        }

        // Fake pass: pseudo-label into class K+1 (supervised term) plus
        // 'generated is fake' at the K+1 node (GAN term).
        NdArray fake_logits = disc.forward(fake_x, /*training=*/true);
        NdArray pseudo(fake_logits.shape());
        for (std::size_t b = 0; b < batch; ++b) pseudo[b * classes + (classes - 1)] = 1.0;
        LossAndGrad fake_ce = softmax_cross_entropy_with_logits(fake_logits, pseudo);
        NdArray fake_grad = fake_ce.grad;
        for (std::size_t i = 0; i < fake_grad.size(); ++i) {
            fake_grad[i] *= config.weights.supervised_fake;
        }
        LossAndGrad gan_fake = binary_fake_term(k1_column(fake_logits), config.weights.gan_fake);
        add_k1_grad(fake_grad, gan_fake.grad);
        disc.backward(fake_grad);

        const double d_sup = config.weights.supervised_labelled * lab_ce.value +
                             config.weights.supervised_fake * fake_ce.value;
        const double d_gan = gan_unlab.value + gan_lab.value + gan_fake.value;
        disc_opt.step(disc);
        disc.zero_grads();

        // ---- generator update on a fresh noise batch.
        gen.zero_grads();
        NdArray fake2 = gen.forward(draw_noise(), /*training=*/true);
        NdArray fake2_logits = disc.forward(fake2, /*training=*/true);
        LossAndGrad g_loss = generator_loss(k1_column(fake2_logits));
        NdArray d_input_grad;
        {
            NdArray grad(fake2_logits.shape());
            add_k1_grad(grad, g_loss.grad);
            d_input_grad = disc.backward(grad);
        }
        gen.backward(d_input_grad);
        gen_opt.step(gen);
        gen.zero_grads();
        disc.zero_grads();  // discard gradients leaked through the generator pass

        if (!std::isfinite(g_loss.value) || !std::isfinite(d_sup) || !std::isfinite(d_gan)) {
            log.stopped_at_step = step;
            throw TrainingDivergence(step,
                                     "non-finite loss (g=" + std::to_string(g_loss.value) +
                                         ", d_sup=" + std::to_string(d_sup) +
                                         ", d_gan=" + std::to_string(d_gan) + ")",
                                     log);
        }

        StepRecord record;
        record.step = step;
        record.generator_loss = g_loss.value;
        record.disc_supervised_loss = d_sup;
        record.disc_gan_loss = d_gan;

        if (step % config.eval_every == 0 || step == config.max_steps) {
            const double acc =
                fair_validation_accuracy(disc, split.fair_val_x, split.fair_val_labels);
            record.fair_val_accuracy = acc;
            if (step >= config.min_steps_before_stopping && acc > best_acc) {
                best_acc = acc;
                best_step = step;
                last_improvement = step;
                best_gen = ParamSnapshot::capture(gen);
                best_disc = ParamSnapshot::capture(disc);
            }
        }
        log.records.push_back(record);

        if (step >= config.min_steps_before_stopping && best_gen &&
            step - last_improvement >= config.patience) {
            break;
        }
    }
    log.stopped_at_step = std::min(step, config.max_steps);

    if (!best_gen) {
        // max_steps below the stopping threshold: fall back to the final
        // parameters so the contract of returning a model still holds.
        best_gen = ParamSnapshot::capture(gen);
        best_disc = ParamSnapshot::capture(disc);
        best_step = log.stopped_at_step;
    }
    best_gen->restore(gen);
    best_disc->restore(disc);
    log.best_step = best_step;
    // Recorded from the restored (checkpoint-precision) parameters so a
    // later save/load reproduces it exactly.
    log.best_val_accuracy = fair_validation_accuracy(disc, split.fair_val_x, split.fair_val_labels);
    return result;
}

ExperimentReport run_experiment(int n_runs, const TrainConfig& base_config,
                                const SplitFactory& make_split,
                                const std::vector<std::pair<std::string, NdArray>>& foreign_sets) {
    if (n_runs < 1) {
        throw std::invalid_argument("run_experiment: n_runs must be >= 1");
    }
    ExperimentReport report;
    report.k = base_config.k;
    report.requested_runs = static_cast<std::size_t>(n_runs);

    for (int run = 0; run < n_runs; ++run) {
        RunOutcome outcome;
        outcome.run_seed =
            RngStream::derive(base_config.seed, "experiment/run-" + std::to_string(run))
                .next_u64();
        try {
            SsLacSplit split = make_split(outcome.run_seed);
            TrainConfig config = base_config;
            config.seed = outcome.run_seed;
            TrainResult trained = train(split, config);
            outcome.known_classes = split.known_classes;
            outcome.best_val_accuracy = trained.log.best_val_accuracy;
            outcome.report = evaluate_split(trained.discriminator, split);
            for (const auto& [name, images] : foreign_sets) {
                outcome.report.open_set.emplace_back(
                    name, open_set_accuracy(trained.discriminator, images, config.k));
            }
            outcome.ok = true;
        } catch (const std::exception& e) {
            outcome.error = e.what();
            ++report.failed_runs;
        }
        report.runs.push_back(std::move(outcome));
    }

    // Aggregate over completed runs only.
    std::vector<double> f1;
    for (const RunOutcome& r : report.runs) {
        if (r.ok) f1.push_back(r.report.f1_macro);
    }
    auto mean_std = [](const std::vector<double>& v) -> std::pair<double, double> {
        if (v.empty()) return {0.0, 0.0};
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        if (v.size() < 2) return {mean, 0.0};
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
    };
    std::tie(report.f1_mean, report.f1_std) = mean_std(f1);
    for (std::size_t f = 0; f < foreign_sets.size(); ++f) {
        std::vector<double> acc;
        for (const RunOutcome& r : report.runs) {
            if (r.ok) acc.push_back(r.report.open_set[f].second);
        }
        auto [m, s] = mean_std(acc);
        report.open_set_mean.emplace_back(foreign_sets[f].first, m);
        report.open_set_std.emplace_back(foreign_sets[f].first, s);
    }
    return report;
}

void write_experiment_report(const std::string& path, const ExperimentReport& report) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open experiment report for writing: " + path);
    out << std::setprecision(10);
    out << "k = " << report.k << "\n";
    out << "requested_runs = " << report.requested_runs << "\n";
    out << "failed_runs = " << report.failed_runs << "\n";
    out << "f1_macro_mean = " << report.f1_mean << "\n";
    out << "f1_macro_std = " << report.f1_std << "\n";
    for (std::size_t f = 0; f < report.open_set_mean.size(); ++f) {
        out << "open_set_mean." << report.open_set_mean[f].first << " = "
            << report.open_set_mean[f].second << "\n";
        out << "open_set_std." << report.open_set_std[f].first << " = "
            << report.open_set_std[f].second << "\n";
    }
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        const RunOutcome& r = report.runs[i];
        out << "[run " << i << "] seed=" << r.run_seed;
        if (!r.ok) {
            out << " FAILED: " << r.error << "\n";
            continue;
        }
        out << " known_classes=";
        for (std::size_t c = 0; c < r.known_classes.size(); ++c) {
            if (c) out << ",";
            out << r.known_classes[c];
        }
        out << " f1_macro=" << r.report.f1_macro << " best_val_acc=" << r.best_val_accuracy;
        for (const auto& [name, acc] : r.report.open_set) {
            out << " open_set." << name << "=" << acc;
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("error writing experiment report: " + path);
}

}  // namespace sslac
