#pragma once

#include <string>
#include <utility>
#include <vector>

namespace rsac {

/// One section of a plain-text configuration: ordered key = value pairs.
class ConfigSection {
public:
  explicit ConfigSection(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  std::string require_string(const std::string& key) const;
  double require_double(const std::string& key) const;
  int require_int(const std::string& key) const;

  /// Comma-separated list of doubles.
  std::vector<double> get_double_list(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

private:
  const std::string* find(const std::string& key) const;

  std::string name_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Sectioned key-value text file:
///   # comment
///   [section]
///   key = value
/// Keys before any section header belong to the unnamed section "".
class KeyValueFile {
public:
  static KeyValueFile load(const std::string& path);
  static KeyValueFile parse(const std::string& text, const std::string& origin = "<string>");

  bool has_section(const std::string& name) const;
  const ConfigSection& section(const std::string& name) const;
  ConfigSection& get_or_create(const std::string& name);
  const std::vector<ConfigSection>& sections() const { return sections_; }

  /// Canonical re-serialization, used for hashing.
  std::string canonical_text() const;

private:
  std::vector<ConfigSection> sections_;
};

/// FNV-1a 64-bit hash of a string, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

} // namespace rsac
