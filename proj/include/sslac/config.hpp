#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sslac/dataset.hpp"
#include "sslac/trainer.hpp"

namespace sslac {

// Flat sectioned key-value configuration ("[section]" headers, "key = value"
// lines, '#' comments). Keys are addressed as "section.key". Insertion
// order is preserved so serialization is deterministic.
class Config {
public:
    Config() = default;

    static Config load(const std::string& path);
    static Config parse(const std::string& text);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    long long require_int(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // Whitespace-separated integer list.
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

    void set(const std::string& key, const std::string& value);

    std::string to_string() const;
    void save(const std::string& path) const;

    // Keys with the given section prefix (e.g. "data.foreign."), mapped
    // suffix -> value, in insertion order.
    std::vector<std::pair<std::string, std::string>> with_prefix(const std::string& prefix) const;

private:
    std::vector<std::string> order_;
    std::map<std::string, std::string> values_;
};

// Bindings between the config file and the typed parameter structs. Every
// hyperparameter has a documented default; a missing file section simply
// keeps the defaults.
TrainConfig train_config_from(const Config& config);
SplitParams split_params_from(const Config& config);

}  // namespace sslac
