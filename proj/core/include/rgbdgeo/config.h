#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace rgbdgeo {

inline constexpr const char* kConfigEnvVar = "RGBDGEO_CONFIG";

// Flat "key = value" settings, '#' comments. Command-line flags take
// precedence over anything read here.
class Config {
 public:
  Config() = default;

  static Config Load(const std::string& path);
  // Loads the file named by $RGBDGEO_CONFIG, or returns an empty config.
  static Config FromEnvironment();

  bool Has(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> Get(const std::string& key) const;
  // Typed lookups; FormatError when the stored value does not parse.
  std::optional<double> GetDouble(const std::string& key) const;
  std::optional<int64_t> GetInt(const std::string& key) const;
  std::optional<bool> GetBool(const std::string& key) const;

  void Set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace rgbdgeo
