#ifndef TVG_CSV_HPP
#define TVG_CSV_HPP

#include <string>
#include <variant>
#include <vector>

namespace tvg {

inline constexpr const char* kLibraryVersion = "0.1.0";

using CsvCell = std::variant<long long, unsigned long long, double, std::string>;
using CsvRow = std::vector<CsvCell>;

// Formats a double with 17 significant digits ("%.17g").
std::string format_double(double v);

// Writes header + rows, one comma-separated line each, trailing newline.
// Doubles are printed with 17 significant digits. Throws std::runtime_error
// on I/O failure.
void emit_csv(const std::string& path, const std::string& header,
              const std::vector<CsvRow>& rows);

}  // namespace tvg

#endif  // TVG_CSV_HPP
