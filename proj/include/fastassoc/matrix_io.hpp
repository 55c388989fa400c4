#pragma once

#include <iosfwd>
#include <string>

#include "fastassoc/kbest.hpp"
#include "fastassoc/types.hpp"

namespace fastassoc {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text format: first line "M N", then one "i j c" line per stored pair
/// (0-based, any order). Blank lines and lines starting with '#' are
/// skipped. Throws InvalidInput on malformed content or duplicate pairs.
SparseCostMatrix read_matrix(std::istream& in);

/// Throws IoError when the file cannot be opened.
SparseCostMatrix read_matrix_file(const std::string& path);

/// Writes pairs in row-major order with full round-trip precision.
void write_matrix(std::ostream& out, const SparseCostMatrix& matrix);

/// CSV: rank,parent,cost,row_to (row_to space-separated, -1 for a miss).
void write_output_csv(std::ostream& out, const OutputSet& set);

}  // namespace fastassoc
