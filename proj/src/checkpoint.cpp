#include "multipilot/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace multipilot {

std::string Checkpoint::format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void Checkpoint::begin_section(const std::string& name) {
    sections_.push_back(Section{name, {}});
}

void Checkpoint::put(const std::string& key, const std::vector<double>& values) {
    if (sections_.empty()) throw std::logic_error("checkpoint: put before begin_section");
    std::string joined;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) joined += ' ';
        joined += format_double(values[i]);
    }
    sections_.back().entries.emplace_back(key, joined);
}

void Checkpoint::put(const std::string& key, double value) {
    put(key, std::vector<double>{value});
}

void Checkpoint::put(const std::string& key, const std::string& value) {
    if (sections_.empty()) throw std::logic_error("checkpoint: put before begin_section");
    sections_.back().entries.emplace_back(key, value);
}

void Checkpoint::put_ints(const std::string& key, const std::vector<int>& values) {
    if (sections_.empty()) throw std::logic_error("checkpoint: put before begin_section");
    std::string joined;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) joined += ' ';
        joined += std::to_string(values[i]);
    }
    sections_.back().entries.emplace_back(key, joined);
}

void Checkpoint::write(std::ostream& out) const {
    out << kMagic << '\n';
    for (const auto& sec : sections_) {
        out << '[' << sec.name << "]\n";
        for (const auto& [k, v] : sec.entries) out << k << " = " << v << '\n';
    }
}

void Checkpoint::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot write '" + path + "'");
    write(out);
}

std::string Checkpoint::to_string() const {
    std::ostringstream ss;
    write(ss);
    return ss.str();
}

Checkpoint Checkpoint::read(std::istream& in) {
    Checkpoint ck;
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw std::runtime_error("checkpoint: bad or missing header line");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '[') {
            const auto close = line.find(']');
            if (close == std::string::npos)
                throw std::runtime_error("checkpoint: unterminated section name");
            ck.begin_section(line.substr(1, close - 1));
            continue;
        }
        const auto eq = line.find(" = ");
        if (eq == std::string::npos)
            throw std::runtime_error("checkpoint: malformed entry: " + line);
        if (ck.sections_.empty())
            throw std::runtime_error("checkpoint: entry before any section");
        ck.sections_.back().entries.emplace_back(line.substr(0, eq), line.substr(eq + 3));
    }
    return ck;
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    return read(in);
}

Checkpoint Checkpoint::from_string(const std::string& text) {
    std::istringstream ss(text);
    return read(ss);
}

const std::string* Checkpoint::find(const std::string& section, const std::string& key) const {
    for (const auto& sec : sections_) {
        if (sec.name != section) continue;
        for (const auto& [k, v] : sec.entries)
            if (k == key) return &v;
    }
    return nullptr;
}

bool Checkpoint::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::vector<double> Checkpoint::get(const std::string& section, const std::string& key) const {
    const std::string* v = find(section, key);
    if (!v) throw std::runtime_error("checkpoint: missing [" + section + "] " + key);
    std::istringstream ss(*v);
    std::vector<double> out;
    double x = 0.0;
    while (ss >> x) out.push_back(x);
    return out;
}

double Checkpoint::get_scalar(const std::string& section, const std::string& key) const {
    const auto v = get(section, key);
    if (v.size() != 1)
        throw std::runtime_error("checkpoint: [" + section + "] " + key + " is not a scalar");
    return v[0];
}

std::string Checkpoint::get_string(const std::string& section, const std::string& key) const {
    const std::string* v = find(section, key);
    if (!v) throw std::runtime_error("checkpoint: missing [" + section + "] " + key);
    return *v;
}

std::vector<int> Checkpoint::get_ints(const std::string& section, const std::string& key) const {
    const std::string* v = find(section, key);
    if (!v) throw std::runtime_error("checkpoint: missing [" + section + "] " + key);
    std::istringstream ss(*v);
    std::vector<int> out;
    int x = 0;
    while (ss >> x) out.push_back(x);
    return out;
}

std::vector<std::string> Checkpoint::sections() const {
    std::vector<std::string> names;
    names.reserve(sections_.size());
    for (const auto& s : sections_) names.push_back(s.name);
    return names;
}

} // namespace multipilot
