/*
   Copyright 2026 The bilinsde Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "bilinsde_app/csv.hpp"

#include <charconv>
#include <cmath>

#include "bilinsde/error.hpp"

namespace bilinsde::app {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // also folds -0
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), header_(header), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error("io.write", "cannot open " + path.string() + " for writing");
  for (const auto& h : header_) field(h);
  end_row();
  rows_ = 0;
}

CsvWriter& CsvWriter::field(std::string_view text) {
  if (columns_in_row_++ > 0) line_ += ',';
  line_ += csv_escape(text);
  return *this;
}

CsvWriter& CsvWriter::field(double value) { return field(std::string_view(format_double(value))); }

CsvWriter& CsvWriter::field(long long value) {
  char buf[24];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return field(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

CsvWriter& CsvWriter::field(unsigned long long value) {
  char buf[24];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return field(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

void CsvWriter::end_row() {
  if (columns_in_row_ != header_.size())
    throw Error("internal", "row with " + std::to_string(columns_in_row_) + " fields in " + path_.string() +
                                " (header has " + std::to_string(header_.size()) + ")");
  line_ += '\n';
  out_ << line_;
  line_.clear();
  columns_in_row_ = 0;
  ++rows_;
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw Error("io.write", "failed writing " + path_.string());
}

}  // namespace bilinsde::app
