#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace coneflow {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

/// Writes rows of doubles with a documented header row. Output is
/// deterministic: identical values give identical bytes.
class CsvWriter {
  public:
    CsvWriter(std::ostream& os, const std::vector<std::string>& columns);
    void row(std::span<const double> values);

  private:
    std::ostream& os_;
    std::size_t ncols_;
};

}  // namespace coneflow
