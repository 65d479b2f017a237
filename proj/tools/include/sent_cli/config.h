#ifndef SENT_CLI_CONFIG_H_
#define SENT_CLI_CONFIG_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "sent/noisegen.h"
#include "sent/trainer.h"

namespace sent::cli {

// Flat key=value configuration. Keys are "section.name"; a "[section]"
// line prefixes the keys that follow it. Every known key has a default.
class CliConfig {
 public:
  CliConfig();

  // Merges a file; unknown keys and malformed lines throw kConfig.
  void MergeFile(const std::filesystem::path &path);
  void MergeText(std::string_view text, std::string_view origin = "<text>");

  // Sets a known key, throwing kConfig for unknown keys.
  void Set(const std::string &key, const std::string &value);

  bool Has(const std::string &key) const { return values_.count(key) > 0; }
  const std::string &Get(const std::string &key) const;
  std::optional<std::string> GetOptional(const std::string &key) const;
  double GetDouble(const std::string &key) const;
  int64_t GetInt(const std::string &key) const;
  uint64_t GetUint(const std::string &key) const;
  bool GetBool(const std::string &key) const;

  // Sorted by section, one "[section]" header each; re-readable by MergeText.
  std::string Dump() const;

  RunConfig ToRunConfig() const;
  NoiseSpec ToNoiseSpec() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace sent::cli

#endif  // SENT_CLI_CONFIG_H_
