#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>

namespace bridgex::cli {

inline constexpr std::string_view kLockName = ".bridgex.lock";

/// Entry point behind the `bridgex` binary. Returns the process exit code;
/// failures print a JSON error report to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Writes `content` under the provenance convention of its extension:
/// CSV/TSV/text files get a "# config_hash=" first line, headered formats
/// (.freq, .neurons, .dump) get a config_hash header field, JSON objects a
/// "config_hash" member, and JSONL files a "<name>.meta.json" sidecar.
void write_with_provenance(const std::filesystem::path& path, std::string content, const std::string& hash);

}  // namespace bridgex::cli
