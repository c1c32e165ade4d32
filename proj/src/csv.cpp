#include "tvg/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace tvg {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void emit_csv(const std::string& path, const std::string& header,
              const std::vector<CsvRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("csv: cannot open " + path + " for writing");
  out << header << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      std::visit(
          [&](const auto& cell) {
            using T = std::decay_t<decltype(cell)>;
            if constexpr (std::is_same_v<T, double>)
              out << format_double(cell);
            else
              out << cell;
          },
          row[i]);
    }
    out << "\n";
  }
  out.flush();
  if (!out) throw std::runtime_error("csv: write failed for " + path);
}

}  // namespace tvg
