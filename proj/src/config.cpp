#include "multipilot/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace multipilot {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    cfg.text_ = text;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (cfg.values_.count(key))
            throw std::invalid_argument("config: duplicate key '" + key + "'");
        cfg.values_[key] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

Config Config::with_override(const Config& base, const std::string& key,
                             const std::string& value) {
    std::istringstream in(base.text());
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        std::string stripped = line;
        const auto hash = stripped.find('#');
        if (hash != std::string::npos) stripped.erase(hash);
        const auto eq = stripped.find('=');
        if (eq != std::string::npos && trim(stripped.substr(0, eq)) == key) continue;
        out << line << '\n';
    }
    out << key << " = " << value << '\n';
    return parse(out.str());
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

const std::string& Config::raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument("config: missing key '" + key + "'");
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& def) const {
    return has(key) ? raw(key) : def;
}

double Config::get_double(const std::string& key, double def) const {
    if (!has(key)) return def;
    try {
        std::size_t pos = 0;
        const double v = std::stod(raw(key), &pos);
        if (pos != raw(key).size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' is not a number: '" + raw(key) + "'");
    }
}

int Config::get_int(const std::string& key, int def) const {
    if (!has(key)) return def;
    const double v = get_double(key, 0.0);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw std::invalid_argument("config: key '" + key + "' is not an integer");
    return i;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t def) const {
    if (!has(key)) return def;
    try {
        return std::stoull(raw(key));
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' is not an unsigned integer");
    }
}

bool Config::get_bool(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const std::string& v = raw(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config: key '" + key + "' is not a boolean: '" + v + "'");
}

Eigen::Vector3d Config::get_vec3(const std::string& key, const Eigen::Vector3d& def) const {
    if (!has(key)) return def;
    std::istringstream ss(raw(key));
    Eigen::Vector3d v;
    if (!(ss >> v.x() >> v.y() >> v.z()))
        throw std::invalid_argument("config: key '" + key + "' needs three numbers");
    std::string rest;
    if (ss >> rest)
        throw std::invalid_argument("config: key '" + key + "' has trailing tokens");
    return v;
}

std::string Config::require_string(const std::string& key) const { return raw(key); }

double Config::require_double(const std::string& key) const {
    raw(key);
    return get_double(key, 0.0);
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (k.rfind(prefix, 0) == 0) out.push_back(k);
    return out;
}

std::uint64_t Config::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : text_) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace multipilot
