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

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace bilinsde::app {

// Shortest representation that reads back to the same double.
std::string format_double(double x);

// Quotes a field when it holds a comma, quote or line break.
std::string csv_escape(std::string_view field);

class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& field(std::string_view text);
  CsvWriter& field(double value);
  CsvWriter& field(long long value);
  CsvWriter& field(unsigned long long value);
  CsvWriter& field(int value) { return field(static_cast<long long>(value)); }
  CsvWriter& field(std::size_t value) { return field(static_cast<unsigned long long>(value)); }
  CsvWriter& empty() { return field(std::string_view{}); }
  void end_row();

  std::size_t rows() const { return rows_; }
  const std::vector<std::string>& header() const { return header_; }
  const std::filesystem::path& path() const { return path_; }
  void close();

private:
  std::filesystem::path path_;
  std::vector<std::string> header_;
  std::ofstream out_;
  std::string line_;
  std::size_t columns_in_row_ = 0;
  std::size_t rows_ = 0;
};

}  // namespace bilinsde::app
