#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sacl::cli {

// Shortest round-trip decimal form; identical across runs and platforms.
std::string format_real(double value);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  std::string render() const;
  std::size_t rows() const noexcept { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Files are written into a hidden directory under `out` and moved into place
// by commit(). If the staging object dies uncommitted, nothing is left behind.
class Staging {
 public:
  explicit Staging(std::filesystem::path out);
  ~Staging();
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;

  std::filesystem::path path(const std::string& name) const;
  void write_text(const std::string& name, const std::string& contents);
  void commit();
  const std::filesystem::path& out() const noexcept { return out_; }

 private:
  std::filesystem::path out_;
  std::filesystem::path dir_;
  std::vector<std::string> names_;
  bool created_out_ = false;
  bool committed_ = false;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Standalone SVG line chart with axes, ticks and a legend.
std::string line_plot_svg(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<Series>& series);

}  // namespace sacl::cli
