#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mbti {

/// Provenance written as manifest.json next to every CLI output.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::filesystem::path> inputs;
  std::optional<std::uint64_t> seed;
  /// Files written by the command, hashed at write time.
  std::vector<std::filesystem::path> outputs;

  /// SHA-256 of the canonical (key-sorted, compact) config dump.
  std::string config_hash() const;
  nlohmann::json to_json() const;
  /// Records this command under "commands" in `dir`/manifest.json, keeping
  /// entries of other commands. Output paths are relative to `dir` when they
  /// live under it.
  void write(const std::filesystem::path& dir) const;
};

std::string tool_version();

}  // namespace mbti
