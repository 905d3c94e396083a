#pragma once

#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

// Deterministic CSV output: UTF-8, '.' decimal separator, '\n' line endings,
// shortest round-trip formatting for doubles.

namespace sqphase::csv {

std::string format_double(double v);

class Writer {
 public:
  Writer(const std::string& path, const std::vector<std::string>& header);

  Writer& field(double v);
  Writer& field(const std::string& v);
  Writer& field(std::size_t v);
  void end_row();
  void close();
  bool ok() const { return static_cast<bool>(out_); }

 private:
  std::ofstream out_;
  std::size_t columns_ = 0;
  std::size_t in_row_ = 0;
};

}  // namespace sqphase::csv
