#pragma once

#include "libra/hamsys.hpp"
#include "libra/sympmat.hpp"
#include "libra/types.hpp"

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace libra {

/// Shortest round-trip decimal form ("%.17g"), identical across runs and platforms.
std::string format_number(double v);

/// In-memory CSV table. Cells are written as given; numbers go through format_number.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    Row& operator<<(double v);
    Row& operator<<(int v);
    Row& operator<<(std::size_t v);
    Row& operator<<(bool v);
    Row& operator<<(const std::string& s);
    Row& operator<<(const char* s) { return *this << std::string(s); }
    Row& operator<<(const Vec& v);

   private:
    friend class CsvTable;
    explicit Row(std::vector<std::string>& cells) : cells_(cells) {}
    std::vector<std::string>& cells_;
  };

  /// Starts a new row; throws DimensionError on write if its width is wrong.
  Row row();
  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }

  void write(std::ostream& os) const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Plain-text matrix: one row per line, entries separated by whitespace.
void write_matrix_text(std::ostream& os, const Mat& M);
Mat read_matrix_text(std::istream& is);
/// Matrix as CSV with header c0, c1, ...
void write_matrix_csv(const std::filesystem::path& path, const Mat& M);

/// (t, q..., p..., H) at `samples` uniform times of [0, duration] along a dense solution.
CsvTable orbit_table(const System& sys, const OrbitSegment& seg, int samples);

/// Single row (verdict, reason, order, distances, tolerances).
CsvTable upsilon_table(const UpsilonVerdict& v, double root_tol, double gap_tol);

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

/// Static SVG line plot of one or more series on shared axes.
void write_svg_lines(const std::filesystem::path& path, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<PlotSeries>& series);
/// Eigenvalues in the complex plane with the unit circle and rays to each point.
void write_svg_spectrum(const std::filesystem::path& path, const std::string& title,
                        const std::vector<std::complex<double>>& eigenvalues);

}  // namespace libra
