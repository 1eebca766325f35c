#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sma {

/// Flat `key = value` text file. Blank lines and `#` comments are ignored.
/// Values keep their source line so diagnostics can point back at the file.
class KeyValueFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static KeyValueFile parse(const std::string& text, const std::string& source = "<string>");
  static KeyValueFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& source() const { return source_; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  /// Comma separated list of numbers.
  std::vector<double> get_list(const std::string& key) const;

  /// Line of the key, or 0 when absent.
  int line_of(const std::string& key) const;
  std::vector<std::string> keys() const;

  /// Raise a ParseError for the first key not in `allowed`.
  void reject_unknown(const std::vector<std::string>& allowed) const;

 private:
  const Entry& entry(const std::string& key) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
};

}  // namespace sma
