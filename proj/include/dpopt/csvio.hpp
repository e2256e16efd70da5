// Copyright 2026 The dp-optim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPOPT_CSVIO_HPP_
#define DPOPT_CSVIO_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace dpopt {

// Doubles cross the CSV/JSON boundary as 17-significant-digit decimals,
// which round-trip bit-exactly through strtod.
std::string format_double(double v);

double parse_double(const std::string& s);

// Minimal RFC-style CSV: comma separation, no quoting needed for our fields.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& out_;
};

std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace dpopt

#endif  // DPOPT_CSVIO_HPP_
