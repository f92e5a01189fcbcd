#include "mbti/manifest.hpp"

#include "mbti/error.hpp"
#include "mbti/io.hpp"

namespace mbti {

namespace {

constexpr const char* kManifestFormat = "mbti-run-manifest/1";

nlohmann::json hashed(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (!std::filesystem::is_regular_file(p))
    throw Error(ErrorCode::Io, "cannot hash missing file: " + p.string());
  auto shown = p;
  if (!base.empty()) {
    const auto rel = std::filesystem::relative(p, base);
    if (!rel.empty() && *rel.begin() != "..") shown = rel;
  }
  return {{"path", shown.generic_string()}, {"sha256", io::sha256_file(p)}};
}

}  // namespace

std::string tool_version() { return MBTI_VERSION; }

std::string RunManifest::config_hash() const { return io::sha256_hex(config.dump()); }

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["version"] = tool_version();
  j["config"] = config;
  j["config_sha256"] = config_hash();
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  j["inputs"] = nlohmann::json::array();
  for (const auto& p : inputs) j["inputs"].push_back(hashed(p, {}));
  j["outputs"] = nlohmann::json::array();
  return j;
}

void RunManifest::write(const std::filesystem::path& dir) const {
  auto entry = to_json();
  for (const auto& p : outputs) entry["outputs"].push_back(hashed(p, dir));
  const auto path = dir / "manifest.json";
  nlohmann::json doc = {{"format", kManifestFormat}, {"tool", "mbti"}, {"commands", nlohmann::json::object()}};
  if (std::filesystem::exists(path)) {
    auto old = nlohmann::json::parse(io::read_file(path), nullptr, false);
    if (old.is_object() && old.value("format", "") == kManifestFormat && old["commands"].is_object())
      doc["commands"] = old["commands"];
  }
  doc["commands"][command] = entry;
  io::write_file(path, doc.dump(2) + "\n");
}

}  // namespace mbti
