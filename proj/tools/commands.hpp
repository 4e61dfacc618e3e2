#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace stmado::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitPartial = 4;

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  std::string command;
  std::optional<std::string> config_path;
  std::optional<nlohmann::json> config;  ///< used instead of config_path when set
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  int threads = 1;
};

const std::vector<std::string>& command_names();

/// Runs one subcommand and returns its exit code. Errors are reported on stderr.
int run(const RunOptions& opts);

/// Full command line entry point (argv[0] is the program name).
int main_with_args(int argc, const char* const* argv);

/// Hex SHA-1 of a byte string.
std::string sha1_hex(const std::string& bytes);

}  // namespace stmado::cli
