#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace adoptminer {

/// Builds RFC 4180 CSV text with a mandatory header row.
class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string_view> header);

  CsvWriter& cell(std::string_view text);
  CsvWriter& cell(std::int64_t v);
  CsvWriter& cell(std::uint64_t v);
  CsvWriter& cell(int v) { return cell(static_cast<std::int64_t>(v)); }
  CsvWriter& cell(double v);
  CsvWriter& empty();
  void end_row();

  const std::string& str() const { return out_; }
  std::size_t rows() const { return rows_; }

 private:
  void separator();

  std::string out_;
  std::size_t columns_ = 0;
  std::size_t in_row_ = 0;
  std::size_t rows_ = 0;
};

std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace adoptminer
