#include "collapse/output.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>

namespace collapse::lab {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Short label for axis ticks.
std::string tick_label(double v) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 4);
  return std::string(buf.data(), res.ptr);
}

std::string coord(double v) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, 2);
  return std::string(buf.data(), res.ptr);
}

// Evenly spaced "nice" ticks covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) {
    ticks.push_back(std::fabs(v) < 1e-12 * step ? 0.0 : v);
  }
  return ticks;
}

}  // namespace

std::string format_double(double value) {
  if (!std::isfinite(value)) throw InvalidArgument("cannot format a non-finite value");
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

void emit_csv(const Table& table, const std::filesystem::path& path) {
  std::string text;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) text += ',';
    text += csv_field(table.header[i]);
  }
  text += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw InvalidArgument("CSV row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ',';
      if (const double* d = std::get_if<double>(&row[i])) {
        text += format_double(*d);
      } else if (const std::int64_t* n = std::get_if<std::int64_t>(&row[i])) {
        text += std::to_string(*n);
      } else {
        text += csv_field(std::get<std::string>(row[i]));
      }
    }
    text += '\n';
  }
  write_text(path, text);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_for_write(path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  close_checked(out, path);
}

Series decimate_min_max(const Series& series, std::size_t max_points) {
  const std::size_t n = series.x.size();
  if (n <= max_points || max_points < 2) return series;
  Series out{series.title, series.x_label, series.y_label, {}, {}};
  const std::size_t buckets = max_points / 2;
  for (std::size_t b = 0; b < buckets; ++b) {
    const std::size_t begin = b * n / buckets;
    const std::size_t end = (b + 1) * n / buckets;
    if (begin >= end) continue;
    std::size_t lo = begin;
    std::size_t hi = begin;
    for (std::size_t i = begin; i < end; ++i) {
      if (series.y[i] < series.y[lo]) lo = i;
      if (series.y[i] > series.y[hi]) hi = i;
    }
    for (std::size_t i : {std::min(lo, hi), std::max(lo, hi)}) {
      out.x.push_back(series.x[i]);
      out.y.push_back(series.y[i]);
      if (lo == hi) break;
    }
  }
  return out;
}

void emit_svg(const Series& input, const std::filesystem::path& path) {
  if (input.x.size() != input.y.size()) throw InvalidArgument("series x and y differ in length");
  if (input.x.empty()) throw InvalidArgument("cannot plot an empty series");
  for (std::size_t i = 0; i < input.x.size(); ++i) {
    if (!std::isfinite(input.x[i]) || !std::isfinite(input.y[i])) {
      throw InvalidArgument("cannot plot non-finite values");
    }
  }
  const Series s = decimate_min_max(input);

  constexpr double kWidth = 800.0;
  constexpr double kHeight = 500.0;
  constexpr double kLeft = 80.0;
  constexpr double kRight = 20.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 60.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  auto [xmin_it, xmax_it] = std::minmax_element(s.x.begin(), s.x.end());
  auto [ymin_it, ymax_it] = std::minmax_element(s.y.begin(), s.y.end());
  double xmin = *xmin_it, xmax = *xmax_it, ymin = *ymin_it, ymax = *ymax_it;
  auto widen = [](double& lo, double& hi) {
    if (hi - lo <= 1e-300) {
      const double pad = std::max(std::fabs(lo) * 0.05, 0.5);
      lo -= pad;
      hi += pad;
    }
  };
  widen(xmin, xmax);
  widen(ymin, ymax);
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * plot_h; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(s.title)
      << "</text>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double v : nice_ticks(xmin, xmax)) {
    const std::string x = coord(px(v));
    svg << "<line x1=\"" << x << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << x << "\" y2=\"" << kTop + plot_h + 5
        << "\" stroke=\"black\"/>"
        << "<text x=\"" << x << "\" y=\"" << kTop + plot_h + 18 << "\" text-anchor=\"middle\">" << tick_label(v)
        << "</text>\n";
  }
  for (double v : nice_ticks(ymin, ymax)) {
    const std::string y = coord(py(v));
    svg << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << y << "\" x2=\"" << kLeft << "\" y2=\"" << y
        << "\" stroke=\"black\"/>"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << y << "\" text-anchor=\"end\" dominant-baseline=\"middle\">"
        << tick_label(v) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
      << xml_escape(s.x_label) << "</text>\n"
      << "<text x=\"18\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << kTop + plot_h / 2 << ")\">" << xml_escape(s.y_label) << "</text>\n";

  if (s.x.size() == 1) {
    svg << "<circle cx=\"" << coord(px(s.x[0])) << "\" cy=\"" << coord(py(s.y[0]))
        << "\" r=\"3\" fill=\"steelblue\"/>\n";
  } else {
    svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) svg << ' ';
      svg << coord(px(s.x[i])) << ',' << coord(py(s.y[i]));
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";
  write_text(path, svg.str());
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "' for checksumming");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw IoError("SHA-256 unavailable");
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &length);
  std::ostringstream hex;
  hex << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < length; ++i) hex << std::setw(2) << static_cast<int>(digest[i]);
  return hex.str();
}

}  // namespace collapse::lab
