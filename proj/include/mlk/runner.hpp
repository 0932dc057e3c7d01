/*
 *   Copyright 2026 The mlkakeya Authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mlk {

inline constexpr const char* kToolVersion = "0.1.0";

/// Process exit contract shared by the CLI and the C API.
enum class ExitStatus : int {
  Pass = 0,
  Usage = 1,
  Fail = 2,
  NotConverged = 3,
};

/// Malformed or invalid configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

const std::vector<std::string>& command_names();

/// Parses, validates and fills defaults. Throws ConfigError.
nlohmann::json resolve_config(std::string_view command, std::string_view text);

/// 64-bit FNV-1a over the compact dump of the resolved config.
std::uint64_t config_hash(const nlohmann::json& resolved);
std::string hex64(std::uint64_t v);

struct RunRequest {
  std::string command;
  std::string config_text;
  std::string config_dir;  ///< base for relative input paths
  std::string out_dir;
  int jobs = 1;
};

struct RunOutcome {
  ExitStatus status = ExitStatus::Usage;
  std::string message;             ///< one line, suitable for stderr
  nlohmann::json summary;          ///< empty on usage errors
  std::vector<std::string> files;  ///< written outputs
};

/// Runs one command. Nothing is written unless the config validates and the
/// computation finishes.
RunOutcome run_command(const RunRequest& req);

/// Output directory: explicit flag, else MLK_OUTPUT_DIR, else "mlk-out".
std::string output_dir(const std::string& flag_value);

}  // namespace mlk
