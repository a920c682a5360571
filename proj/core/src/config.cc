#include "rgbdgeo/config.h"

#include <cstdlib>
#include <fstream>

#include "rgbdgeo/errors.h"
#include "rgbdgeo/io.h"

namespace rgbdgeo {
namespace {

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  return s.substr(begin, s.find_last_not_of(" \t\r") - begin + 1);
}

}  // namespace

Config Config::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  Config config;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : Trim(line.substr(0, eq));
    if (key.empty()) {
      throw FormatError(path + ":" + std::to_string(number) +
                        ": expected 'key = value'");
    }
    config.values_[key] = Trim(line.substr(eq + 1));
  }
  return config;
}

Config Config::FromEnvironment() {
  const char* path = std::getenv(kConfigEnvVar);
  if (path == nullptr || *path == '\0') return {};
  return Load(path);
}

std::optional<std::string> Config::Get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> Config::GetDouble(const std::string& key) const {
  const auto v = Get(key);
  if (!v) return std::nullopt;
  return ParseDoubleToken(*v, "config key " + key);
}

std::optional<int64_t> Config::GetInt(const std::string& key) const {
  const auto v = Get(key);
  if (!v) return std::nullopt;
  return ParseIntToken(*v, "config key " + key);
}

std::optional<bool> Config::GetBool(const std::string& key) const {
  const auto v = Get(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw FormatError("config key " + key + ": expected a boolean");
}

}  // namespace rgbdgeo
