// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "timegrad/engine/model.hpp"
#include "timegrad/engine/train.hpp"

namespace timegrad::cli {

inline constexpr const char* kEnvPrefix = "TIMEGRAD_";

/// Flat `section.key = value` settings with layered overrides.
///
/// Layers apply in order defaults < file < environment < flags. Every layer
/// rejects keys outside the known table.
class RunConfig {
 public:
  enum class Source { Default, File, Environment, Flag };

  RunConfig();

  /// Known keys with their default values, in display order.
  static const std::vector<std::pair<std::string, std::string>>& defaults();
  /// TIMEGRAD_SECTION_KEY for section.key.
  static std::string env_name(const std::string& key);

  void set(const std::string& key, const std::string& value, Source source);
  /// Parses `section.key = value` lines; '#' starts a comment.
  void apply_text(const std::string& text, const std::string& origin);
  void apply_file(const std::string& path);
  /// `lookup` returns the value of an environment variable if set.
  void apply_environment(const std::function<std::optional<std::string>(const std::string&)>& lookup);
  void apply_environment();
  /// "section.key=value"
  void apply_assignment(const std::string& assignment);

  const std::string& get(const std::string& key) const;
  Source source(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::size_t> get_size_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  /// Model settings; the dimension comes from the data.
  engine::ModelConfig model_config(std::size_t dimension) const;
  engine::TrainConfig train_config() const;

  /// Resolved settings as `key = value` lines.
  std::string dump() const;

 private:
  std::map<std::string, std::pair<std::string, Source>> values_;
};

}  // namespace timegrad::cli
