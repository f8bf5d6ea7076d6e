#include "coneflow/csvio.hpp"

#include <charconv>
#include <stdexcept>

namespace coneflow {

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& columns)
    : os_(os), ncols_(columns.size()) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) os_ << ',';
        os_ << columns[i];
    }
    os_ << '\n';
}

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != ncols_) throw std::invalid_argument("csv row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) os_ << ',';
        os_ << format_double(values[i]);
    }
    os_ << '\n';
}

}  // namespace coneflow
