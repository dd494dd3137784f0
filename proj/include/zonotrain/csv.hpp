/*
 * Copyright 2026 The zonotrain Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ZONOTRAIN_CSV_HPP
#define ZONOTRAIN_CSV_HPP

#include <array>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "zonotrain/error.hpp"

namespace zonotrain {

/// Shortest round-trip decimal text, independent of the global locale.
inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

inline std::string format_number(long long v) { return std::to_string(v); }

/// Accumulates rows in memory; `write` emits them with '\n' line endings.
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw Error("csv: row has wrong number of cells");
    rows_.push_back(std::move(cells));
  }

  [[nodiscard]] std::string str() const {
    std::string out;
    append_line(out, header_);
    for (const auto& r : rows_) append_line(out, r);
    return out;
  }

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    const std::string s = str();
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  [[nodiscard]] std::size_t rows() const { return rows_.size(); }

private:
  static void append_line(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out.push_back(',');
      out += cells[i];
    }
    out.push_back('\n');
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

} // namespace zonotrain

#endif
