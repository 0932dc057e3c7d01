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

// Command-line front end. Numeric parameters come from a JSON config; flags
// only select the command, the config path, the output directory and the
// worker cap.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mlk/mlk.h"

namespace {

const char* status_word(int code) {
  switch (code) {
    case MLK_EXIT_PASS: return "PASS";
    case MLK_EXIT_FAIL: return "FAIL";
    case MLK_EXIT_NOT_CONVERGED: return "NOT_CONVERGED";
    default: return "ERROR";
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> commands;
  for (std::size_t i = 0; const char* c = mlk_command_name(i); ++i) commands.emplace_back(c);

  CLI::App app{"Polynomial partitioning and multilinear Kakeya experiments"};
  app.set_version_flag("--version", std::string("mlk ") + mlk_version());
  std::string command, config, out;
  int jobs = 1;
  bool quiet = false;
  app.add_option("command", command, "Experiment to run")->required()->check(CLI::IsMember(commands));
  app.add_option("-c,--config", config, "JSON experiment config")->required();
  app.add_option("-o,--out", out, "Output directory (default: $MLK_OUTPUT_DIR or ./mlk-out)");
  app.add_option("-j,--jobs", jobs, "Maximum worker threads")->check(CLI::Range(1, 1024));
  app.add_flag("-q,--quiet", quiet, "Only report errors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return MLK_EXIT_USAGE;
  }

  std::ifstream in(config, std::ios::binary);
  if (!in) {
    std::cerr << "mlk: cannot open config " << config << "\n";
    return MLK_EXIT_USAGE;
  }
  std::ostringstream text;
  text << in.rdbuf();
  const std::string dir = std::filesystem::path(config).parent_path().string();

  char* message = nullptr;
  const int code = mlk_run(command.c_str(), text.str().c_str(), dir.c_str(), out.empty() ? nullptr : out.c_str(),
                           jobs, &message);
  const std::string msg = message ? message : "";
  mlk_string_free(message);
  if (code == MLK_EXIT_USAGE) {
    std::cerr << config << ":" << (msg.rfind("line ", 0) == 0 ? msg.substr(5) : " " + msg) << "\n";
  } else if (!quiet) {
    std::cout << status_word(code) << ": " << msg << "\n";
  }
  return code;
}
