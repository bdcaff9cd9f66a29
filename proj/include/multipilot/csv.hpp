#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace multipilot {

// Comma-separated log with a header row; floats carry 17 significant digits
// so identical runs produce identical bytes.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns);

    void row(const std::vector<double>& values);
    void flush();

  private:
    std::ofstream out_;
    std::size_t columns_;
};

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    bool has_column(const std::string& name) const;
    std::size_t column_index(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

} // namespace multipilot
