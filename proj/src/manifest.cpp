#include "wordorder/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wordorder/errors.hpp"
#include "wordorder/util.hpp"

namespace wordorder {

namespace {

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot read '" + path.string() + "' for checksum");
  }
  std::uint64_t h = 14695981039346656037ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return "fnv1a64:" + hex64(h);
}

std::string config_hash(const std::map<std::string, std::string>& settings) {
  std::string flat;
  for (const auto& [key, value] : settings) {
    flat += key;
    flat += '=';
    flat += value;
    flat += '\n';
  }
  return hex64(fnv1a64(flat));
}

Manifest Manifest::load(const std::filesystem::path& path) {
  Manifest m;
  std::ifstream in(path, std::ios::binary);
  if (!in) return m;
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest '" + path.string() + "': " + e.what());
  }
  if (!doc.is_object() || !doc.contains("artifacts") ||
      !doc["artifacts"].is_object()) {
    throw DataError("manifest '" + path.string() +
                    "': expected an object with an \"artifacts\" map");
  }
  for (const auto& [key, entry] : doc["artifacts"].items()) {
    ArtifactInfo info;
    try {
      info.checksum = entry.at("checksum").get<std::string>();
      info.config_hash = entry.at("config_hash").get<std::string>();
      info.stage = entry.at("stage").get<std::string>();
      if (entry.contains("inputs")) {
        info.inputs = entry["inputs"].get<std::vector<std::string>>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError("manifest '" + path.string() + "', artifact '" + key +
                      "': " + e.what());
    }
    m.artifacts_[key] = std::move(info);
  }
  return m;
}

void Manifest::save(const std::filesystem::path& path) const {
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [key, info] : artifacts_) {
    entries[key] = {
        {"checksum", info.checksum},
        {"config_hash", info.config_hash},
        {"stage", info.stage},
        {"inputs", info.inputs},
    };
  }
  nlohmann::json doc = {{"artifacts", entries}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot write manifest '" + path.string() + "'");
  }
  out << doc.dump(2) << '\n';
}

void Manifest::record(const std::string& key, ArtifactInfo info) {
  artifacts_[key] = std::move(info);
}

const ArtifactInfo* Manifest::find(const std::string& key) const {
  auto it = artifacts_.find(key);
  return it == artifacts_.end() ? nullptr : &it->second;
}

void Manifest::require_fresh(const std::string& key) const {
  const ArtifactInfo* info = find(key);
  if (info == nullptr) return;
  std::filesystem::path path(key);
  if (!std::filesystem::exists(path)) {
    throw DataError("'" + key + "' is recorded in the manifest but missing; "
                    "re-run " + info->stage);
  }
  if (file_checksum(path) != info->checksum) {
    throw DataError("'" + key + "' changed since " + info->stage +
                    " recorded it; re-run " + info->stage +
                    " and the stages after it");
  }
}

std::string Manifest::checksum_input(const std::string& key) const {
  std::string sum = file_checksum(key);
  const ArtifactInfo* info = find(key);
  if (info != nullptr && info->checksum != sum) {
    throw DataError("'" + key + "' changed since " + info->stage +
                    " recorded it; re-run " + info->stage +
                    " and the stages after it");
  }
  return sum;
}

}  // namespace wordorder
