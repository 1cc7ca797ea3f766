#include "artifacts.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>
#include <unistd.h>

#include "sacl/error.hpp"

namespace fs = std::filesystem;

namespace sacl::cli {

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw NumericError("cannot format value");
  return std::string(buf.data(), ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw ShapeError("csv row width differs from header");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::render() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

Staging::Staging(fs::path out) : out_(std::move(out)) {
  std::error_code ec;
  if (!fs::exists(out_, ec)) {
    fs::create_directories(out_, ec);
    if (ec) throw IoError("cannot create output directory " + out_.string() + ": " + ec.message());
    created_out_ = true;
  }
  dir_ = out_ / (".staging-" + std::to_string(::getpid()));
  fs::create_directories(dir_, ec);
  if (ec) {
    if (created_out_) fs::remove_all(out_, ec);
    throw IoError("cannot write into " + out_.string() + ": " + ec.message());
  }
}

Staging::~Staging() {
  std::error_code ec;
  fs::remove_all(dir_, ec);
  if (!committed_ && created_out_) fs::remove(out_, ec);  // only if still empty
}

fs::path Staging::path(const std::string& name) const {
  return dir_ / name;
}

void Staging::write_text(const std::string& name, const std::string& contents) {
  std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
  f << contents;
  f.close();
  if (!f) throw IoError("cannot write " + (dir_ / name).string());
}

void Staging::commit() {
  std::error_code ec;
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir_)) names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  for (const auto& n : names) {
    fs::rename(dir_ / n, out_ / n, ec);
    if (ec) throw IoError("cannot move " + n + " into " + out_.string() + ": " + ec.message());
  }
  committed_ = true;
}

namespace {

std::string fixed(double v, int digits = 2) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, digits);
  return ec == std::errc() ? std::string(buf.data(), ptr) : std::string("0");
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c",
                                                "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string line_plot_svg(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<Series>& series) {
  constexpr double W = 640, H = 400, left = 70, right = 160, top = 40, bottom = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = W - left - right, ph = H - top - bottom;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(W, 0) +
                    "\" height=\"" + fixed(H, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fixed(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";
  svg += "<path d=\"M" + fixed(left) + " " + fixed(top) + " V" + fixed(top + ph) + " H" +
         fixed(left + pw) + "\" stroke=\"black\" fill=\"none\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0;
    const double yv = y0 + (y1 - y0) * t / 4.0;
    svg += "<text x=\"" + fixed(sx(xv)) + "\" y=\"" + fixed(top + ph + 16) +
           "\" text-anchor=\"middle\">" + fixed(xv, 0) + "</text>\n";
    svg += "<text x=\"" + fixed(left - 6) + "\" y=\"" + fixed(sy(yv) + 4) +
           "\" text-anchor=\"end\">" + fixed(yv, 3) + "</text>\n";
    svg += "<path d=\"M" + fixed(left) + " " + fixed(sy(yv)) + " H" + fixed(left + pw) +
           "\" stroke=\"#ddd\"/>\n";
  }
  svg += "<text x=\"" + fixed(left + pw / 2) + "\" y=\"" + fixed(H - 10) +
         "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  svg += "<text transform=\"translate(16 " + fixed(top + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % kColors.size()];
    std::string d;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      d += (i ? " L" : "M") + fixed(sx(s.x[i])) + " " + fixed(sy(s.y[i]));
    if (!d.empty())
      svg += "<path d=\"" + d + "\" stroke=\"" + color + "\" stroke-width=\"2\" fill=\"none\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    svg += "<path d=\"M" + fixed(left + pw + 12) + " " + fixed(ly) + " h20\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fixed(left + pw + 38) + "\" y=\"" + fixed(ly + 4) + "\">" +
           escape(s.name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace sacl::cli
