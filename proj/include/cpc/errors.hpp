#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cpc {

/// Bad or unknown configuration entry. line is 0 when not file-based.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, std::size_t line, const std::string& message)
      : std::runtime_error(compose(key, line, message)),
        key_(std::move(key)),
        line_(line) {}

  const std::string& key() const { return key_; }
  std::size_t line() const { return line_; }

 private:
  static std::string compose(const std::string& key, std::size_t line,
                             const std::string& message) {
    std::string s = "config error";
    if (line > 0) s += " at line " + std::to_string(line);
    if (!key.empty()) s += " [" + key + "]";
    return s + ": " + message;
  }
  std::string key_;
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data; line is 1-based within the offending file.
class DataFormatError : public std::runtime_error {
 public:
  DataFormatError(std::string file, std::size_t line, const std::string& message)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + message),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class DegenerateFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotConvergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cpc
