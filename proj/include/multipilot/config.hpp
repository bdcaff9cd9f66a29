#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace multipilot {

// Line-oriented "key = value" configuration with dotted section keys.
// '#' starts a comment, blank lines are ignored, duplicate keys are an error.
class Config {
  public:
    Config() = default;

    static Config parse(const std::string& text);
    static Config parse_file(const std::string& path);

    // Same config with one key replaced (or added); the stored text changes
    // with it, so the config hash reflects the override.
    static Config with_override(const Config& base, const std::string& key,
                                const std::string& value);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& def) const;
    double get_double(const std::string& key, double def) const;
    int get_int(const std::string& key, int def) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
    bool get_bool(const std::string& key, bool def) const;
    Eigen::Vector3d get_vec3(const std::string& key, const Eigen::Vector3d& def) const;

    std::string require_string(const std::string& key) const;
    double require_double(const std::string& key) const;

    // sorted keys that start with `prefix`
    std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

    // original text, used for the report's config hash
    const std::string& text() const { return text_; }

    // FNV-1a of the original text
    std::uint64_t hash() const;

  private:
    const std::string& raw(const std::string& key) const;

    std::map<std::string, std::string> values_;
    std::string text_;
};

} // namespace multipilot
