#include "libra/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace libra {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

CsvTable::Row& CsvTable::Row::operator<<(double v) {
  cells_.push_back(format_number(v));
  return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(int v) {
  cells_.push_back(std::to_string(v));
  return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(std::size_t v) {
  cells_.push_back(std::to_string(v));
  return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(bool v) {
  cells_.push_back(v ? "true" : "false");
  return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(const std::string& s) {
  cells_.push_back(quote(s));
  return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) cells_.push_back(format_number(v(i)));
  return *this;
}

CsvTable::Row CsvTable::row() {
  rows_.emplace_back();
  return Row(rows_.back());
}

void CsvTable::write(std::ostream& os) const {
  for (std::size_t j = 0; j < header_.size(); ++j) os << (j ? "," : "") << quote(header_[j]);
  os << '\n';
  for (const auto& r : rows_) {
    if (r.size() != header_.size())
      throw DimensionError("csv row has " + std::to_string(r.size()) + " cells, header has " +
                           std::to_string(header_.size()));
    for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << r[j];
    os << '\n';
  }
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream f(path);
  if (!f) throw InputError("cannot open " + path.string() + " for writing");
  write(f);
}

void write_matrix_text(std::ostream& os, const Mat& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) os << (j ? " " : "") << format_number(M(i, j));
    os << '\n';
  }
}

Mat read_matrix_text(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::vector<double> r;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw InputError("not a number in matrix text: '" + tok + "'");
      r.push_back(v);
    }
    if (!r.empty()) rows.push_back(std::move(r));
  }
  if (rows.empty()) return Mat(0, 0);
  Mat M(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw DimensionError("ragged matrix text");
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
  }
  return M;
}

void write_matrix_csv(const std::filesystem::path& path, const Mat& M) {
  std::vector<std::string> h;
  for (Eigen::Index j = 0; j < M.cols(); ++j) h.push_back("c" + std::to_string(j));
  CsvTable t(h);
  for (Eigen::Index i = 0; i < M.rows(); ++i) t.row() << Vec(M.row(i).transpose());
  t.write(path);
}

CsvTable orbit_table(const System& sys, const OrbitSegment& seg, int samples) {
  const int n = sys.n();
  std::vector<std::string> h{"t"};
  for (int i = 0; i < n; ++i) h.push_back("q" + std::to_string(i + 1));
  for (int i = 0; i < n; ++i) h.push_back("p" + std::to_string(i + 1));
  h.push_back("H");
  CsvTable t(h);
  const int m = std::max(samples, 2);
  for (int k = 0; k < m; ++k) {
    double s = seg.t_begin() + (seg.t_end() - seg.t_begin()) * k / (m - 1);
    Vec x = seg.state(s);
    t.row() << s << x << sys.energy(x);
  }
  return t;
}

CsvTable upsilon_table(const UpsilonVerdict& v, double root_tol, double gap_tol) {
  CsvTable t({"in_upsilon", "reason", "order", "min_root_distance", "min_eigenvalue_gap",
              "discriminant", "root_tol", "gap_tol"});
  t.row() << v.in_upsilon << to_string(v.reason) << v.order << v.min_root_distance
          << v.min_eigenvalue_gap << v.discriminant << root_tol << gap_tol;
  return t;
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Frame {
  double x0, x1, y0, y1;
  double left = 70, right = 20, top = 40, bottom = 50, width = 640, height = 420;
  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void header(std::ostream& os, const Frame& f, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << f.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << esc(title) << "</text>\n";
}

void axes(std::ostream& os, const Frame& f, const std::string& xl, const std::string& yl) {
  os << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << f.width - f.left - f.right
     << "\" height=\"" << f.height - f.top - f.bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    double x = f.x0 + (f.x1 - f.x0) * k / 4, y = f.y0 + (f.y1 - f.y0) * k / 4;
    os << "<text x=\"" << f.px(x) << "\" y=\"" << f.height - f.bottom + 16
       << "\" text-anchor=\"middle\">" << tick(x) << "</text>\n";
    os << "<text x=\"" << f.left - 6 << "\" y=\"" << f.py(y) + 4 << "\" text-anchor=\"end\">"
       << tick(y) << "</text>\n";
  }
  os << "<text x=\"" << (f.left + f.width - f.right) / 2 << "\" y=\"" << f.height - 12
     << "\" text-anchor=\"middle\">" << esc(xl) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (f.top + f.height - f.bottom) / 2
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (f.top + f.height - f.bottom) / 2
     << ")\">" << esc(yl) << "</text>\n";
}

std::pair<double, double> padded(double lo, double hi) {
  if (!(hi > lo)) return {lo - 1, hi + 1};
  double m = 0.05 * (hi - lo);
  return {lo - m, hi + m};
}

}  // namespace

void write_svg_lines(const std::filesystem::path& path, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<PlotSeries>& series) {
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : series) {
    for (double v : s.x) xlo = std::min(xlo, v), xhi = std::max(xhi, v);
    for (double v : s.y)
      if (std::isfinite(v)) ylo = std::min(ylo, v), yhi = std::max(yhi, v);
  }
  if (!std::isfinite(xlo)) xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  Frame f{};
  std::tie(f.x0, f.x1) = padded(xlo, xhi);
  std::tie(f.y0, f.y1) = padded(ylo, yhi);

  std::ofstream os(path);
  if (!os) throw InputError("cannot open " + path.string() + " for writing");
  header(os, f, title);
  axes(os, f, xlabel, ylabel);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* c = kPalette[i % 10];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k)
      if (std::isfinite(s.y[k])) os << tick(f.px(s.x[k])) << ',' << tick(f.py(s.y[k])) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << f.width - f.right - 6 << "\" y=\"" << f.top + 16 * (i + 1)
       << "\" text-anchor=\"end\" fill=\"" << c << "\">" << esc(s.label) << "</text>\n";
  }
  os << "</svg>\n";
}

void write_svg_spectrum(const std::filesystem::path& path, const std::string& title,
                        const std::vector<std::complex<double>>& eigenvalues) {
  double r = 1.0;
  for (const auto& z : eigenvalues) r = std::max(r, std::abs(z));
  r *= 1.15;
  Frame f{};
  f.width = f.height = 480;
  f.left = 60, f.right = 20;
  f.x0 = f.y0 = -r;
  f.x1 = f.y1 = r;

  std::ofstream os(path);
  if (!os) throw InputError("cannot open " + path.string() + " for writing");
  header(os, f, title);
  axes(os, f, "Re", "Im");
  double cx = f.px(0), cy = f.py(0);
  os << "<ellipse cx=\"" << cx << "\" cy=\"" << cy << "\" rx=\"" << f.px(1) - cx << "\" ry=\""
     << cy - f.py(1) << "\" fill=\"none\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  for (const auto& z : eigenvalues) {
    double x = f.px(z.real()), y = f.py(z.imag());
    os << "<line x1=\"" << cx << "\" y1=\"" << cy << "\" x2=\"" << tick(x) << "\" y2=\"" << tick(y)
       << "\" stroke=\"#1f77b4\" stroke-width=\"0.6\"/>\n";
    os << "<circle cx=\"" << tick(x) << "\" cy=\"" << tick(y) << "\" r=\"3\" fill=\"#d62728\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace libra
