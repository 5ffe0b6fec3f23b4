#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bapnmf {

/// Hex SHA-256 of a file's bytes / of a string.
std::string sha256_file(const std::string& path);
std::string sha256_string(const std::string& data);

struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;  // full argv, for re-running
  std::string config_digest;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
  std::uint64_t seed = 0;
  int threads = 1;
  std::string tool_version;
  std::string started;  // ISO-8601 UTC
  std::string finished;
};

std::string utc_timestamp();
void write_manifest(const std::string& path, const RunManifest& m);

}  // namespace bapnmf
