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
#include <string>

#include "bilinsde/model.hpp"

namespace bilinsde {

// JSON model document, see docs/model_format.md:
//
//   { "format": "bilinsde-model/1", "name": "...", "dim": N, "noise_dim": d,
//     "nu": nu, "A": [N*N numbers, row-major], "B": [[i, j, k, value], ...],
//     "sigma": [[column 1], ..., [column d]] }
//
// Indices are 0-based. Doubles are written with round-trip precision.
std::string model_to_text(const BilinearModel& model);
ModelPtr model_from_text(const std::string& text);

void save_model(const BilinearModel& model, const std::filesystem::path& path);
ModelPtr load_model(const std::filesystem::path& path);

}  // namespace bilinsde
