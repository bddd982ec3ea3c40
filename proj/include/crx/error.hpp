#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crx {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed WoS export. line is 1-based; 0 when not attributable to a line.
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// None of the supplied files could be imported.
class ImportError : public Error {
 public:
  using Error::Error;
};

// A reference id that does not exist in the dataset or partition.
class UnknownIdError : public Error {
 public:
  explicit UnknownIdError(std::int64_t id)
      : Error("unknown reference id " + std::to_string(id)), id_(id) {}

  std::int64_t id() const noexcept { return id_; }

 private:
  std::int64_t id_;
};

// Invalid argument to a data operation (inverted year range, bad fraction).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// CSV table whose header lacks required columns.
class SchemaError : public Error {
 public:
  explicit SchemaError(std::vector<std::string> missing)
      : Error(describe(missing)), missing_(std::move(missing)) {}

  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  static std::string describe(const std::vector<std::string>& missing) {
    std::string msg = "table is missing columns:";
    for (const auto& name : missing) msg += " \"" + name + "\"";
    return msg;
  }

  std::vector<std::string> missing_;
};

}  // namespace crx
