#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "mnflow/field.hpp"

namespace mnflow {

// Binary snapshot layout: magic "MNF1", u8 kind, u8 payload-kind
// (0 scalar / 1 state), u32 dims and f64 geometry per kind, then
// little-endian f64 payload in grid order.  Reads verify the header.
void write_scalar_bin(const std::string& path, const Scalar& f,
                      const DomainSpec& d);
Scalar read_scalar_bin(const std::string& path, const DomainSpec& d);
void write_state_bin(const std::string& path, const FieldState& s,
                     const DomainSpec& d);
FieldState read_state_bin(const std::string& path, const DomainSpec& d);

// CSV with comma separator, LF line endings, numbers at full round-trip
// precision (%.17g).  The header row is written on construction.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t ncols_;
};

std::string format_double(double v);  // %.17g

}  // namespace mnflow
