#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace l4r {

/// Base class for every error the pipeline reports. Data errors map to
/// exit code 1 in the CLI.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfRange : public Error {
 public:
  enum class Axis { Latitude, Longitude };

  OutOfRange(Axis axis, double value);
  Axis axis() const noexcept { return axis_; }

 private:
  Axis axis_;
};

class MalformedDate : public Error {
 public:
  explicit MalformedDate(const std::string& text);
};

class InvalidDate : public Error {
 public:
  explicit InvalidDate(const std::string& text);
};

/// Parse failure in a JSON, CSV or N-Triples input. `position()` is a byte
/// offset for JSON/CSV and a 1-based line number for line-oriented formats.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t position);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class MissingMandatoryField : public Error {
 public:
  MissingMandatoryField(const std::string& canonical_field, std::size_t record);
  const std::string& field() const noexcept { return field_; }
  std::size_t record() const noexcept { return record_; }

 private:
  std::string field_;
  std::size_t record_;
};

/// Tab-separated or CSV input with the wrong shape. Line is 1-based.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnknownId : public Error {
 public:
  explicit UnknownId(long long geoname_id);
};

/// Wraps a per-record failure with the record's position in the source file.
class RecordError : public Error {
 public:
  RecordError(std::size_t index, const std::string& cause);
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class SinkError : public Error {
 public:
  using Error::Error;
};

}  // namespace l4r
