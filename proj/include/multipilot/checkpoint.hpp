#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace multipilot {

// Plain-text checkpoint document: a version line, then [section] blocks of
// "key = tokens" entries. Floats are written with 17 significant digits so a
// save/load/save round trip is byte-exact.
class Checkpoint {
  public:
    static constexpr const char* kMagic = "multipilot-checkpoint 1";

    Checkpoint() = default;

    // --- writing ---
    void begin_section(const std::string& name);
    void put(const std::string& key, const std::vector<double>& values);
    void put(const std::string& key, double value);
    void put(const std::string& key, const std::string& value);
    void put_ints(const std::string& key, const std::vector<int>& values);

    void write(std::ostream& out) const;
    void save(const std::string& path) const;
    std::string to_string() const;

    // --- reading ---
    static Checkpoint read(std::istream& in);
    static Checkpoint load(const std::string& path);
    static Checkpoint from_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::vector<double> get(const std::string& section, const std::string& key) const;
    double get_scalar(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::vector<int> get_ints(const std::string& section, const std::string& key) const;
    std::vector<std::string> sections() const;

    static std::string format_double(double v);

  private:
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;
    };

    const std::string* find(const std::string& section, const std::string& key) const;

    std::vector<Section> sections_;
};

} // namespace multipilot
