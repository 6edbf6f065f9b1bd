#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlsm::cli {

// Exit codes are a stable contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Bad flags, config keys or input schema. Maps to kExitUsage.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Environment variable naming the directory relative output paths land in.
inline constexpr const char* kOutputDirEnv = "MLSM_OUTPUT_DIR";

std::filesystem::path resolve_output_path(const std::string& path);

/// Flat `key = value` file; `#` starts a comment. Throws UsageError on a
/// malformed line.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

/// Runs one command line (without the program name). Never throws; errors are
/// reported on `err` and mapped to an exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mlsm::cli
