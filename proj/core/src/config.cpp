#include "rsac/config.hpp"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rsac/error.hpp"

namespace rsac {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

} // namespace

bool ConfigSection::has(const std::string& key) const { return find(key) != nullptr; }

void ConfigSection::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

const std::string* ConfigSection::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

std::string ConfigSection::get_string(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

double ConfigSection::get_double(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  try {
    size_t used = 0;
    const double d = std::stod(*v, &used);
    if (trim(v->substr(used)).empty()) return d;
  } catch (...) {
  }
  fail(ErrorKind::Config, "config: key '" + key + "' in [" + name_ + "] is not a number: " + *v);
}

int ConfigSection::get_int(const std::string& key, int fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  try {
    size_t used = 0;
    const long d = std::stol(*v, &used);
    if (trim(v->substr(used)).empty()) return static_cast<int>(d);
  } catch (...) {
  }
  fail(ErrorKind::Config, "config: key '" + key + "' in [" + name_ + "] is not an integer: " + *v);
}

bool ConfigSection::get_bool(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  const std::string s = trim(*v);
  if (s == "on" || s == "true" || s == "1" || s == "yes") return true;
  if (s == "off" || s == "false" || s == "0" || s == "no") return false;
  fail(ErrorKind::Config, "config: key '" + key + "' in [" + name_ + "] is not a boolean: " + *v);
}

std::string ConfigSection::require_string(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) fail(ErrorKind::Config, "config: missing key '" + key + "' in [" + name_ + "]");
  return *v;
}

double ConfigSection::require_double(const std::string& key) const {
  if (!has(key)) fail(ErrorKind::Config, "config: missing key '" + key + "' in [" + name_ + "]");
  return get_double(key, 0.0);
}

int ConfigSection::require_int(const std::string& key) const {
  if (!has(key)) fail(ErrorKind::Config, "config: missing key '" + key + "' in [" + name_ + "]");
  return get_int(key, 0);
}

std::vector<double> ConfigSection::get_double_list(const std::string& key) const {
  std::vector<double> out;
  const std::string* v = find(key);
  if (!v) return out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    try {
      out.push_back(std::stod(t));
    } catch (...) {
      fail(ErrorKind::Config, "config: bad list element '" + t + "' for key '" + key + "'");
    }
  }
  return out;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
  KeyValueFile file;
  file.sections_.emplace_back("");
  ConfigSection* current = &file.sections_.front();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        fail(ErrorKind::Config, origin + ":" + std::to_string(lineno) + ": unterminated section");
      current = &file.get_or_create(trim(t.substr(1, t.size() - 2)));
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::Config, origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      fail(ErrorKind::Config, origin + ":" + std::to_string(lineno) + ": empty key");
    current->set(key, value);
  }
  return file;
}

bool KeyValueFile::has_section(const std::string& name) const {
  for (const auto& s : sections_)
    if (s.name() == name) return true;
  return false;
}

const ConfigSection& KeyValueFile::section(const std::string& name) const {
  for (const auto& s : sections_)
    if (s.name() == name) return s;
  static const ConfigSection empty("");
  return empty;
}

ConfigSection& KeyValueFile::get_or_create(const std::string& name) {
  for (auto& s : sections_)
    if (s.name() == name) return s;
  sections_.emplace_back(name);
  return sections_.back();
}

std::string KeyValueFile::canonical_text() const {
  std::string out;
  for (const auto& s : sections_) {
    if (s.entries().empty()) continue;
    if (!s.name().empty()) out += "[" + s.name() + "]\n";
    for (const auto& [k, v] : s.entries()) out += k + " = " + v + "\n";
  }
  return out;
}

std::string fnv1a_hex(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

} // namespace rsac
