#include "sslac/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sslac {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": unterminated section header");
            }
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected 'key = value'");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
        }
        cfg.set(section.empty() ? key : section + "." + key, value);
    }
    return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        throw std::runtime_error("config: missing required key '" + key + "'");
    }
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

long long Config::get_int(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stoll(it->second);
    } catch (const std::exception&) {
        throw std::runtime_error("config: key '" + key + "' is not an integer: " + it->second);
    }
}

long long Config::require_int(const std::string& key) const {
    get_string(key);  // throws with the key name if absent
    return get_int(key, 0);
}

double Config::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw std::runtime_error("config: key '" + key + "' is not a number: " + it->second);
    }
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw std::runtime_error("config: key '" + key + "' is not an unsigned integer: " +
                                 it->second);
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::runtime_error("config: key '" + key + "' is not a boolean: " + it->second);
}

std::vector<int> Config::get_int_list(const std::string& key,
                                      const std::vector<int>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<int> out;
    std::istringstream ls(it->second);
    int v;
    while (ls >> v) out.push_back(v);
    if (out.empty()) {
        throw std::runtime_error("config: key '" + key + "' is not an integer list: " + it->second);
    }
    return out;
}

void Config::set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) order_.push_back(key);
    values_[key] = value;
}

std::string Config::to_string() const {
    std::ostringstream out;
    std::string section;
    for (const std::string& key : order_) {
        const auto dot = key.rfind('.');
        const std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
        const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
        if (sec != section) {
            out << "[" << sec << "]\n";
            section = sec;
        }
        out << name << " = " << values_.at(key) << "\n";
    }
    return out.str();
}

void Config::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open config for writing: " + path);
    out << to_string();
    if (!out) throw std::runtime_error("error writing config: " + path);
}

std::vector<std::pair<std::string, std::string>> Config::with_prefix(
    const std::string& prefix) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& key : order_) {
        if (key.rfind(prefix, 0) == 0) {
            out.emplace_back(key.substr(prefix.size()), values_.at(key));
        }
    }
    return out;
}

TrainConfig train_config_from(const Config& config) {
    TrainConfig tc;
    tc.domain = config.get_string("run.domain", "mnist");
    tc.k = static_cast<int>(config.get_int("run.k", 2));
    tc.seed = config.get_u64("run.seed", 0);

    tc.batch_size = static_cast<int>(config.get_int("train.batch_size", 128));
    tc.learning_rate = config.get_double("train.learning_rate", 0.0002);
    tc.adam_beta1 = config.get_double("train.adam_beta1", 0.5);
    tc.adam_beta2 = config.get_double("train.adam_beta2", 0.999);
    tc.max_steps =
        static_cast<int>(config.get_int("train.max_steps", tc.domain == "dummy" ? 3000 : 5000));
    tc.min_steps_before_stopping =
        static_cast<int>(config.get_int("train.min_steps_before_stopping", 1000));
    tc.eval_every = static_cast<int>(config.get_int("train.eval_every", 50));
    tc.patience = static_cast<int>(config.get_int("train.patience", 500));

    tc.weights.supervised_labelled =
        config.get_double("loss_weights.supervised_labelled", 1.0);
    tc.weights.supervised_fake = config.get_double("loss_weights.supervised_fake", 1.0);
    tc.weights.gan_unlabelled = config.get_double("loss_weights.gan_unlabelled", 1.0);
    tc.weights.gan_labelled = config.get_double("loss_weights.gan_labelled", 1.0);
    tc.weights.gan_fake = config.get_double("loss_weights.gan_fake", 1.0);

    tc.generator.z_length = static_cast<int>(config.get_int("generator.z_length", 100));
    tc.generator.base_size = static_cast<int>(config.get_int("generator.base_size", 7));
    tc.generator.base_channels = static_cast<int>(config.get_int("generator.base_channels", 64));
    tc.generator.up_filters = config.get_int_list("generator.up_filters", {64, 32});
    tc.generator.bn_momentum = config.get_double("generator.bn_momentum", 0.8);
    tc.generator.init_std = config.get_double("generator.init_std", 0.02);

    tc.discriminator.conv_filters =
        config.get_int_list("discriminator.conv_filters", {32, 64, 128});
    tc.discriminator.dropout_rate = config.get_double("discriminator.dropout_rate", 0.4);
    tc.discriminator.noise_std = config.get_double("discriminator.noise_std", 0.2);
    tc.discriminator.init_std = config.get_double("discriminator.init_std", 0.02);

    tc.mlp.z_length = static_cast<int>(config.get_int("mlp.z_length", 8));
    tc.mlp.generator_hidden = config.get_int_list("mlp.generator_hidden", {64, 64, 64});
    tc.mlp.discriminator_hidden = config.get_int_list("mlp.discriminator_hidden", {64, 64, 64});
    tc.mlp.init_std = config.get_double("mlp.init_std", 0.02);
    tc.mlp.generator_init_std = config.get_double("mlp.generator_init_std", 0.8);

    tc.validate();
    return tc;
}

SplitParams split_params_from(const Config& config) {
    SplitParams sp;
    sp.k = static_cast<int>(config.get_int("run.k", 2));
    sp.seed = config.get_u64("run.seed", 0);
    sp.labelled_per_class =
        static_cast<std::size_t>(config.get_int("data.labelled_per_class", 1400));
    sp.unlabelled_per_class =
        static_cast<std::size_t>(config.get_int("data.unlabelled_per_class", 4200));
    sp.unlabelled_is_total = config.get_bool("data.unlabelled_is_total", false);
    sp.val_fraction = config.get_double("data.val_fraction", 0.2);
    return sp;
}

}  // namespace sslac
