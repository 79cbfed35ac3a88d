#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anderloc/geometry.hpp"
#include "anderloc/model.hpp"

namespace anderloc::config {

// Flat sectioned key-value file: `[section]` headers, `key = value` lines,
// `#` comments. Keys are exposed as "section.key". Repeated keys accumulate
// (used for domain boxes).
class KeyValues {
public:
    void add(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;
    const std::string& raw(const std::string& key) const;
    std::vector<std::string> all(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key) const;
    long get_long(const std::string& key, long fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return order_; }

private:
    std::map<std::string, std::vector<std::string>> values_;
    std::vector<std::pair<std::string, std::string>> order_;
};

KeyValues parse_spec_text(const std::string& text);
KeyValues parse_spec_file(const std::string& path);

// [model] section -> ModelConfig (validated by the caller)
model::ModelConfig model_from_spec(const KeyValues& kv);

// JSON array-of-arrays -> configuration (n inner arrays of d coordinates)
geometry::Configuration configuration_from_json(const std::string& json_text);
std::string configuration_to_json(const geometry::Configuration& c);

// JSON list of [x, y] configuration pairs
std::vector<std::pair<geometry::Configuration, geometry::Configuration>> pairs_from_json(
    const std::string& json_text);

} // namespace anderloc::config
