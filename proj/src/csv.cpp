#include "sqphase/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace sqphase::csv {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Writer::Writer(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

Writer& Writer::field(double v) { return field(format_double(v)); }

Writer& Writer::field(std::size_t v) { return field(std::to_string(v)); }

Writer& Writer::field(const std::string& v) {
  if (in_row_ >= columns_) throw std::logic_error("csv row has too many fields");
  if (in_row_) out_ << ',';
  out_ << v;
  ++in_row_;
  return *this;
}

void Writer::end_row() {
  if (in_row_ != columns_) throw std::logic_error("csv row has too few fields");
  out_ << '\n';
  in_row_ = 0;
}

void Writer::close() {
  out_.flush();
  out_.close();
}

}  // namespace sqphase::csv
