#include "fastassoc/matrix_io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace fastassoc {

SparseCostMatrix read_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++line_no;
      auto first = out.find_first_not_of(" \t\r");
      if (first == std::string::npos || out[first] == '#') continue;
      return true;
    }
    return false;
  };

  if (!next_line(line)) throw InvalidInput("matrix input is empty");
  long long rows = -1;
  long long cols = -1;
  {
    std::istringstream header(line);
    if (!(header >> rows >> cols) || rows < 0 || cols < 0) {
      throw InvalidInput("line " + std::to_string(line_no) + ": expected header 'M N'");
    }
    std::string extra;
    if (header >> extra) throw InvalidInput("line " + std::to_string(line_no) + ": trailing data in header");
  }

  std::vector<Triplet> triplets;
  while (next_line(line)) {
    std::istringstream entry(line);
    long long i = -1;
    long long j = -1;
    double c = 0.0;
    if (!(entry >> i >> j >> c)) {
      throw InvalidInput("line " + std::to_string(line_no) + ": expected 'i j cost'");
    }
    std::string extra;
    if (entry >> extra) throw InvalidInput("line " + std::to_string(line_no) + ": trailing data");
    if (i < 0 || i >= rows || j < 0 || j >= cols) {
      throw InvalidInput("line " + std::to_string(line_no) + ": index out of range");
    }
    triplets.push_back({static_cast<Index>(i), static_cast<Index>(j), c});
  }
  return SparseCostMatrix::from_triplets(static_cast<Index>(rows), static_cast<Index>(cols), std::move(triplets));
}

SparseCostMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_matrix(in);
}

void write_matrix(std::ostream& out, const SparseCostMatrix& matrix) {
  auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << matrix.rows() << ' ' << matrix.cols() << '\n';
  for (Index i = 0; i < matrix.rows(); ++i) {
    for (const auto& e : matrix.row(i)) {
      out << i << ' ' << e.col << ' ' << e.cost << '\n';
    }
  }
  out.precision(old);
}

void write_output_csv(std::ostream& out, const OutputSet& set) {
  auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "rank,parent,cost,row_to\n";
  for (std::size_t k = 0; k < set.entries.size(); ++k) {
    const auto& e = set.entries[k];
    out << k << ',' << e.parent << ',' << e.total_cost << ',';
    for (std::size_t r = 0; r < e.assoc.row_to.size(); ++r) {
      if (r > 0) out << ' ';
      out << e.assoc.row_to[r];
    }
    out << '\n';
  }
  out.precision(old);
}

}  // namespace fastassoc
