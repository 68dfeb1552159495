#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qtunnel::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
};

struct RunManifest {
  std::string subcommand;
  std::string config_path;  // empty when running on defaults
  std::string output_dir;
  std::string tool_version = kToolVersion;
  std::string config_hash;
  double duration_s = 0.0;
  bool complete = false;
  std::vector<std::string> outputs;
};

/// FNV-1a over the canonical config text, as 16 hex digits.
std::string config_hash(const std::string& canonical_text);

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

/// Entry point; returns the process exit code. Diagnostics go to stderr.
int run(int argc, char** argv);

}  // namespace qtunnel::cli
