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
#include <iosfwd>
#include <string>
#include <vector>

#include "bilinsde_app/config.hpp"

namespace bilinsde::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitInternal = 4,
};

// Maps an error class ("config.parse", "integration.blowup", ...) to an exit code.
int exit_code_for(const std::string& error_class);

struct RunResult {
  int exit_code = kExitOk;
  std::string error_class;  // empty on success
  std::string message;
  std::vector<std::filesystem::path> files;  // CSVs written, in order
};

// Builds the model a config describes.
ModelPtr build_model(const RunConfig& config);

// Runs the experiment, writing CSVs and their manifests under config.out_dir.
// Never throws: failures come back as a nonzero exit code and error class.
RunResult run(const RunConfig& config, std::ostream& log);

}  // namespace bilinsde::app
