#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sslac/dataset.hpp"
#include "sslac/gan_losses.hpp"
#include "sslac/metrics.hpp"
#include "sslac/models.hpp"
#include "sslac/network.hpp"

namespace sslac {

// All hyperparameters and seeds for one run. Serialized alongside results.
struct TrainConfig {
    int k = 2;
    std::string domain = "mnist";  // "mnist" (CNN pair) or "dummy" (MLP pair)
    int batch_size = 128;
    double learning_rate = 0.0002;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.999;
    int max_steps = 5000;
    int min_steps_before_stopping = 1000;
    int eval_every = 50;
    int patience = 500;  // improvement-free steps tolerated after min_steps
    std::uint64_t seed = 0;
    LossWeights weights;

    GeneratorSpec generator;
    DiscriminatorSpec discriminator;
    MlpPairSpec mlp;

    int z_length() const { return domain == "dummy" ? mlp.z_length : generator.z_length; }

    void validate() const {
        if (batch_size < 2) throw std::invalid_argument("config: batch_size must be >= 2");
        if (min_steps_before_stopping > max_steps) {
            throw std::invalid_argument(
                "config: min_steps_before_stopping must not exceed max_steps");
        }
        if (eval_every < 1) throw std::invalid_argument("config: eval_every must be >= 1");
        if (domain != "mnist" && domain != "dummy") {
            throw std::invalid_argument("config: domain must be 'mnist' or 'dummy'");
        }
    }
};

struct StepRecord {
    int step = 0;
    double generator_loss = 0.0;
    double disc_supervised_loss = 0.0;
    double disc_gan_loss = 0.0;
    std::optional<double> fair_val_accuracy;
};

struct TrainLog {
    std::vector<StepRecord> records;
    int best_step = 0;
    double best_val_accuracy = 0.0;
    int stopped_at_step = 0;
};

void write_train_log(const std::string& path, const TrainLog& log);

// Training aborted on a non-finite loss; carries the offending step and
// the partial log so callers can still persist it.
class TrainingDivergence : public std::runtime_error {
public:
    TrainingDivergence(int step, const std::string& what, TrainLog partial = {})
        : std::runtime_error("training diverged at step " + std::to_string(step) + ": " + what),
          step_(step),
          partial_log_(std::move(partial)) {}
    int step() const { return step_; }
    const TrainLog& partial_log() const { return partial_log_; }

private:
    int step_;
    TrainLog partial_log_;
};

struct TrainResult {
    Network generator;
    Network discriminator;
    TrainLog log;
};

// Fraction of fair-validation samples whose argmax class matches the truth.
// A K+1 prediction on a validation sample counts as wrong.
double fair_validation_accuracy(Network& discriminator, const NdArray& val_inputs,
                                const std::vector<int>& val_labels);

// The alternating loop: per step one discriminator update (supervised +
// K+1-node GAN loss) then one generator update, with fair-validation
// best-checkpoint retention after min_steps_before_stopping. The returned
// networks hold the best parameters, rounded through checkpoint precision.
TrainResult train(const SsLacSplit& split, const TrainConfig& config);

// ---------------------------------------------------------------- experiments

struct RunOutcome {
    bool ok = false;
    std::string error;
    std::uint64_t run_seed = 0;
    std::vector<int> known_classes;
    double best_val_accuracy = 0.0;
    EvalReport report;
};

struct ExperimentReport {
    int k = 0;
    std::size_t requested_runs = 0;
    std::size_t failed_runs = 0;
    std::vector<RunOutcome> runs;
    double f1_mean = 0.0;
    double f1_std = 0.0;  // sample std; 0 by convention for a single run
    std::vector<std::pair<std::string, double>> open_set_mean;
    std::vector<std::pair<std::string, double>> open_set_std;
};

using SplitFactory = std::function<SsLacSplit(std::uint64_t run_seed)>;

// Repeats the full protocol n_runs times with fresh class choices and
// splits, evaluating each trained model on the test partition and on each
// named foreign (open-set) dataset. Failures are recorded and skipped in
// the aggregate.
ExperimentReport run_experiment(int n_runs, const TrainConfig& base_config,
                                const SplitFactory& make_split,
                                const std::vector<std::pair<std::string, NdArray>>& foreign_sets);

void write_experiment_report(const std::string& path, const ExperimentReport& report);

}  // namespace sslac
