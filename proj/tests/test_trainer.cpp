#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "sslac/rng.hpp"
#include "sslac/trainer.hpp"

using namespace sslac;
using doctest::Approx;

namespace {

// A 1-input network with zero weights and a fixed bias: every sample gets
// the same logits, so the accuracy is exactly predictable.
Network constant_logit_net(std::vector<double> bias) {
    Network net;
    RngStream rng(1);
    net.add(std::make_unique<Dense>(1, bias.size(), rng, 0.1));
    Param* w = net.params()[0];
    for (std::size_t i = 0; i < w->value.size(); ++i) w->value[i] = 0.0;
    Param* b = net.params()[1];
    for (std::size_t i = 0; i < bias.size(); ++i) b->value[i] = bias[i];
    return net;
}

TrainConfig dummy_config(std::uint64_t seed) {
    TrainConfig config;
    config.domain = "dummy";
    config.k = 3;
    config.batch_size = 16;
    config.max_steps = 40;
    config.min_steps_before_stopping = 20;
    config.eval_every = 10;
    config.patience = 100;
    config.seed = seed;
    return config;
}

}  // namespace

TEST_CASE("fair validation accuracy oracle values") {
    NdArray inputs({5, 1}, {0, 1, 2, 3, 4});

    Network predicts_2 = constant_logit_net({0.0, 1.0, 0.0});
    CHECK(fair_validation_accuracy(predicts_2, inputs, {2, 2, 2, 2, 2}) == 1.0);
    CHECK(fair_validation_accuracy(predicts_2, inputs, {1, 1, 1, 1, 1}) == 0.0);
    CHECK(fair_validation_accuracy(predicts_2, inputs, {2, 2, 2, 1, 1}) == Approx(0.6));

    // A K+1 prediction is always wrong on validation samples.
    Network predicts_unknown = constant_logit_net({0.0, 0.0, 5.0});
    CHECK(fair_validation_accuracy(predicts_unknown, inputs, {1, 2, 1, 2, 1}) == 0.0);

    CHECK_THROWS(fair_validation_accuracy(predicts_2, NdArray({0, 1}), {}));
}

TEST_CASE("training on the dummy domain runs to completion") {
    SyntheticDomain domain = make_dummy_domain(5, 30);
    TrainConfig config = dummy_config(5);
    TrainResult result = train(domain.split, config);

    CHECK(result.log.stopped_at_step == 40);
    CHECK(result.log.records.size() == 40);
    CHECK(result.log.best_step >= config.min_steps_before_stopping);
    CHECK(result.log.best_val_accuracy >= 0.0);
    CHECK(result.log.best_val_accuracy <= 1.0);
    for (const StepRecord& r : result.log.records) {
        CHECK(std::isfinite(r.generator_loss));
        CHECK(std::isfinite(r.disc_supervised_loss));
        CHECK(std::isfinite(r.disc_gan_loss));
        const bool eval_step = r.step % config.eval_every == 0 || r.step == config.max_steps;
        CHECK(r.fair_val_accuracy.has_value() == eval_step);
    }
}

TEST_CASE("training never touches the test partition") {
    SyntheticDomain domain = make_dummy_domain(7, 30);
    CHECK(domain.split.test_access_count() == 0);
    train(domain.split, dummy_config(7));
    CHECK(domain.split.test_access_count() == 0);
}

TEST_CASE("training is bit-deterministic in the seed") {
    SyntheticDomain domain = make_dummy_domain(9, 30);
    TrainConfig config = dummy_config(9);
    TrainResult a = train(domain.split, config);
    TrainResult b = train(domain.split, config);

    REQUIRE(a.log.records.size() == b.log.records.size());
    for (std::size_t i = 0; i < a.log.records.size(); ++i) {
        CHECK(a.log.records[i].generator_loss == b.log.records[i].generator_loss);
        CHECK(a.log.records[i].disc_supervised_loss == b.log.records[i].disc_supervised_loss);
        CHECK(a.log.records[i].disc_gan_loss == b.log.records[i].disc_gan_loss);
    }
    CHECK(a.log.best_step == b.log.best_step);
    CHECK(a.log.best_val_accuracy == b.log.best_val_accuracy);
    auto pa = a.discriminator.params(), pb = b.discriminator.params();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i]->value.raw() == pb[i]->value.raw());
    }

    TrainConfig other = dummy_config(10);
    TrainResult c = train(domain.split, other);
    CHECK(a.log.records[5].generator_loss != c.log.records[5].generator_loss);
}

TEST_CASE("best model survives a checkpoint round trip exactly") {
    SyntheticDomain domain = make_dummy_domain(11, 30);
    TrainConfig config = dummy_config(11);
    TrainResult result = train(domain.split, config);

    const std::string path = "/tmp/sslac_trainer_test_disc.ckpt";
    save_checkpoint(path, result.discriminator, "test");
    Network reloaded = build_mlp_discriminator(config.k, config.mlp, 999);
    load_checkpoint(path, reloaded);
    std::remove(path.c_str());

    // The trainer records best_val_accuracy from checkpoint-precision
    // parameters, so the reloaded model must reproduce it bit for bit.
    const double acc = fair_validation_accuracy(reloaded, domain.split.fair_val_x,
                                                domain.split.fair_val_labels);
    CHECK(acc == result.log.best_val_accuracy);
}

TEST_CASE("early stopping halts after an improvement-free patience window") {
    SyntheticDomain domain = make_dummy_domain(13, 30);
    TrainConfig config = dummy_config(13);
    config.max_steps = 400;
    config.min_steps_before_stopping = 10;
    config.eval_every = 5;
    config.patience = 30;
    TrainResult result = train(domain.split, config);
    CHECK(result.log.stopped_at_step <= config.max_steps);
    if (result.log.stopped_at_step < config.max_steps) {
        CHECK(result.log.stopped_at_step - result.log.best_step >= config.patience);
    }
}

TEST_CASE("train rejects a split whose k disagrees with the config") {
    SyntheticDomain domain = make_dummy_domain(15, 30);
    TrainConfig config = dummy_config(15);
    config.k = 2;
    CHECK_THROWS_AS(train(domain.split, config), std::invalid_argument);
}

TEST_CASE("config validation rejects malformed settings") {
    TrainConfig config = dummy_config(1);
    config.batch_size = 1;
    CHECK_THROWS(config.validate());
    config = dummy_config(1);
    config.min_steps_before_stopping = config.max_steps + 1;
    CHECK_THROWS(config.validate());
    config = dummy_config(1);
    config.domain = "cifar";
    CHECK_THROWS(config.validate());
    config = dummy_config(1);
    config.eval_every = 0;
    CHECK_THROWS(config.validate());
}

TEST_CASE("train log file carries the header, records and summary") {
    TrainLog log;
    StepRecord r;
    r.step = 1;
    r.generator_loss = -0.5;
    r.disc_supervised_loss = 1.25;
    r.disc_gan_loss = 2.0;
    log.records.push_back(r);
    r.step = 2;
    r.fair_val_accuracy = 0.75;
    log.records.push_back(r);
    log.best_step = 2;
    log.best_val_accuracy = 0.75;
    log.stopped_at_step = 2;

    const std::string path = "/tmp/sslac_trainer_test_log.txt";
    write_train_log(path, log);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    std::remove(path.c_str());

    CHECK(text.find("# step") != std::string::npos);
    CHECK(text.find("\n2 ") != std::string::npos);
    CHECK(text.find("0.75") != std::string::npos);
    CHECK(text.find("best_step = 2") != std::string::npos);
    CHECK(text.find("stopped_at_step = 2") != std::string::npos);
}

TEST_CASE("experiments aggregate completed runs") {
    TrainConfig config = dummy_config(21);
    config.max_steps = 25;
    config.min_steps_before_stopping = 10;
    auto make_split = [](std::uint64_t run_seed) {
        return make_dummy_domain(run_seed, 30).split;
    };
    RngStream foreign_rng(3);
    NdArray foreign({20, 2});
    for (std::size_t i = 0; i < foreign.size(); ++i) foreign[i] = foreign_rng.uniform(-20, 20);

    ExperimentReport report = run_experiment(2, config, make_split, {{"probes", foreign}});
    CHECK(report.requested_runs == 2);
    CHECK(report.failed_runs == 0);
    REQUIRE(report.runs.size() == 2);
    CHECK(report.runs[0].run_seed != report.runs[1].run_seed);
    CHECK(report.f1_mean >= 0.0);
    CHECK(report.f1_mean <= 1.0);
    REQUIRE(report.open_set_mean.size() == 1);
    CHECK(report.open_set_mean[0].first == "probes");

    // Aggregates match a direct recomputation from the per-run reports.
    const double mean =
        (report.runs[0].report.f1_macro + report.runs[1].report.f1_macro) / 2.0;
    CHECK(report.f1_mean == Approx(mean).epsilon(1e-12));

    ExperimentReport again = run_experiment(2, config, make_split, {{"probes", foreign}});
    CHECK(again.f1_mean == report.f1_mean);
    CHECK(again.runs[0].run_seed == report.runs[0].run_seed);
}

TEST_CASE("a single-run experiment reports zero spread") {
    TrainConfig config = dummy_config(23);
    config.max_steps = 25;
    config.min_steps_before_stopping = 10;
    auto make_split = [](std::uint64_t run_seed) {
        return make_dummy_domain(run_seed, 30).split;
    };
    ExperimentReport report = run_experiment(1, config, make_split, {});
    CHECK(report.requested_runs == 1);
    CHECK(report.f1_std == 0.0);
}

TEST_CASE("a failing run is recorded without sinking the experiment") {
    TrainConfig config = dummy_config(25);
    config.max_steps = 25;
    config.min_steps_before_stopping = 10;
    int calls = 0;
    auto make_split = [&calls](std::uint64_t run_seed) {
        if (calls++ == 0) throw std::runtime_error("synthetic split failure");
        return make_dummy_domain(run_seed, 30).split;
    };
    ExperimentReport report = run_experiment(2, config, make_split, {});
    CHECK(report.failed_runs == 1);
    CHECK_FALSE(report.runs[0].ok);
    CHECK(report.runs[0].error == "synthetic split failure");
    CHECK(report.runs[1].ok);

    const std::string path = "/tmp/sslac_trainer_test_experiment.txt";
    write_experiment_report(path, report);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::remove(path.c_str());
    CHECK(buffer.str().find("FAILED: synthetic split failure") != std::string::npos);
}
