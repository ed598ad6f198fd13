#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace attn {

// Shortest decimal string that round-trips to the same double.
std::string format_double(double x);
// Fixed number of significant digits in general notation.
std::string format_double(double x, int significant_digits);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out, int significant_digits = 0)
      : out_(out), digits_(significant_digits) {}

  void header(const std::vector<std::string>& columns);
  CsvWriter& cell(std::string_view text);
  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  CsvWriter& cells(std::span<const double> values);
  void end_row();

 private:
  void sep();
  std::ostream& out_;
  int digits_;
  bool row_started_ = false;
};

}  // namespace attn
