#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "collapse/error.hpp"

namespace collapse::lab {

/// Failure to create, write or remove an output file (exit code 4).
class IoError : public Error {
 public:
  using Error::Error;
};

/// A CSV cell. Doubles are written with 17 significant digits; an empty
/// string marks a missing value.
using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

/// Header row plus one line per row, '\n'-terminated. Throws InvalidArgument
/// on a non-finite double or a ragged row, IoError on write failure.
void emit_csv(const Table& table, const std::filesystem::path& path);

/// %.17g-style text: 17 significant digits, locale independent.
[[nodiscard]] std::string format_double(double value);

struct Series {
  std::string title;
  std::string x_label;  // quantity and unit, e.g. "t (natural units)"
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
};

inline constexpr std::size_t kMaxPlotPoints = 4000;

/// Keeps at most max_points samples: the series is cut into max_points/2
/// buckets and each contributes its minimum and maximum in x order, so
/// envelopes survive.
[[nodiscard]] Series decimate_min_max(const Series& series, std::size_t max_points = kMaxPlotPoints);

/// Self-contained SVG line plot (single marker for a one-point series).
void emit_svg(const Series& series, const std::filesystem::path& path);

/// Lower-case hex SHA-256 of a file's bytes.
[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace collapse::lab
