#include "sma/keyvalue.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "sma/errors.hpp"

namespace sma {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_number(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  // strtod accepts the exponent forms users write by hand (1e-3, 4.5E-2)
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& source) {
  KeyValueFile file;
  file.source_ = source;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string content = trim(raw);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ParseError(source, line, "expected 'key = value'");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (key.empty()) throw ParseError(source, line, "empty key");
    if (value.empty()) throw ParseError(source, line, "empty value for '" + key + "'");
    if (file.entries_.count(key)) throw ParseError(source, line, "duplicate key '" + key + "'");
    file.entries_[key] = Entry{value, line};
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

const KeyValueFile::Entry& KeyValueFile::entry(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ParseError(source_, 0, "missing key '" + key + "'");
  return it->second;
}

std::string KeyValueFile::get_string(const std::string& key) const { return entry(key).value; }

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? entry(key).value : fallback;
}

double KeyValueFile::get_double(const std::string& key) const {
  const Entry& e = entry(key);
  double v = 0.0;
  if (!parse_number(e.value, v)) throw ParseError(source_, e.line, "'" + key + "' is not a number: " + e.value);
  return v;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int KeyValueFile::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const Entry& e = entry(key);
  int v = 0;
  const auto* first = e.value.data();
  const auto* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) throw ParseError(source_, e.line, "'" + key + "' is not an integer: " + e.value);
  return v;
}

std::vector<double> KeyValueFile::get_list(const std::string& key) const {
  const Entry& e = entry(key);
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    if (!parse_number(item, v)) throw ParseError(source_, e.line, "bad list element in '" + key + "': " + item);
    out.push_back(v);
  }
  return out;
}

int KeyValueFile::line_of(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.line;
}

std::vector<std::string> KeyValueFile::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : entries_) out.push_back(k);
  return out;
}

void KeyValueFile::reject_unknown(const std::vector<std::string>& allowed) const {
  for (const auto& [key, e] : entries_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ParseError(source_, e.line, "unknown key '" + key + "'");
  }
}

}  // namespace sma
