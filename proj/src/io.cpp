#include "attn/io.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace attn {

std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::string format_double(double x, int significant_digits) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general,
                           significant_digits);
  return std::string(buf.data(), res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (const auto& c : columns) cell(c);
  end_row();
}

void CsvWriter::sep() {
  if (row_started_) out_ << ',';
  row_started_ = true;
}

CsvWriter& CsvWriter::cell(std::string_view text) {
  sep();
  out_ << text;
  return *this;
}

CsvWriter& CsvWriter::cell(double value) {
  sep();
  out_ << (digits_ > 0 ? format_double(value, digits_) : format_double(value));
  return *this;
}

CsvWriter& CsvWriter::cell(long long value) {
  sep();
  out_ << value;
  return *this;
}

CsvWriter& CsvWriter::cells(std::span<const double> values) {
  for (double v : values) cell(v);
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  row_started_ = false;
}

}  // namespace attn
