#include "spectral/matrix_io.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

#include "spectral/csv.h"
#include "spectral/errors.h"

namespace spectral {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

[[noreturn]] void parse_fail(const std::string& path, long line, const std::string& why) {
  throw DataError(path + ":" + std::to_string(line) + ": " + why);
}

}  // namespace

SpMat read_matrix_market(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  ++line_no;
  std::istringstream banner(lower(line));
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%matrixmarket" || object != "matrix" || format != "coordinate") {
    parse_fail(path, line_no, "expected '%%MatrixMarket matrix coordinate' banner");
  }
  if (field != "real" && field != "integer") {
    parse_fail(path, line_no, "unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    parse_fail(path, line_no, "unsupported symmetry '" + symmetry + "'");
  }
  const bool mirror = symmetry == "symmetric";
  long rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz) || rows < 1 || cols < 1 || nnz < 0) {
      parse_fail(path, line_no, "bad size line");
    }
    break;
  }
  if (rows < 0) parse_fail(path, line_no, "missing size line");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mirror ? 2 * nnz : nnz);
  long read = 0;
  while (read < nnz && std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    long i, j;
    double v;
    if (!(ss >> i >> j >> v)) parse_fail(path, line_no, "bad entry");
    if (i < 1 || i > rows || j < 1 || j > cols) parse_fail(path, line_no, "index out of range");
    trips.emplace_back(i - 1, j - 1, v);
    if (mirror && i != j) trips.emplace_back(j - 1, i - 1, v);
    ++read;
  }
  if (read != nnz) parse_fail(path, line_no, "fewer entries than declared");
  SpMat m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

Mat read_dense_matrix(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) {
      try {
        size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        parse_fail(path, line_no, "not a number: '" + tok + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      parse_fail(path, line_no, "ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no matrix rows");
  Mat m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void write_dense_matrix(const Mat& m, std::ostream& out) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

bool is_symmetric(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool is_symmetric(const SpMat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  SpMat diff = a - SpMat(a.transpose());
  double scale = 1.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SpMat::InnerIterator it(a, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  }
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SpMat::InnerIterator it(diff, k); it; ++it) {
      if (std::abs(it.value()) > tol * scale) return false;
    }
  }
  return true;
}

}  // namespace spectral
