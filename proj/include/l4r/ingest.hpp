#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "l4r/model.hpp"

namespace l4r::ingest {

enum class Format { JSON, CSV };
Format parse_format_name(std::string_view s);

/// One source entry, values verbatim. Nested JSON objects are flattened into
/// dotted keys ("location.lat"); arrays of scalars are joined with '\n'.
struct RawEventRecord {
  Dataset dataset = Dataset::EOR;
  std::map<std::string, std::string> fields;
};

/// Maps canonical field names to source field names for one dataset.
///
/// Canonical names: date, lat, lon (mandatory); id, description, country,
/// city, province, location, url, violence_level (optional). `location` is a
/// combined "City, Province region" string split by split_location_parts.
/// `comment_fields` lists extra source fields copied into comments as
/// "name: value".
struct AdapterConfig {
  std::map<std::string, std::string> fields;
  std::vector<std::string> comment_fields;

  std::optional<std::string> source_field(std::string_view canonical) const;
};

/// Throws Error if a mandatory mapping is missing or a key is unknown.
AdapterConfig adapter_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AdapterConfig& cfg);

/// One record per source entry in file order. Throws SyntaxError (byte
/// offset) on malformed input and MissingMandatoryField when an entry lacks
/// the source field mapped to date, lat or lon.
std::vector<RawEventRecord> parse_dataset(std::string_view bytes, Dataset dataset, Format format,
                                          const AdapterConfig& cfg);

/// RFC 4180 rows. Throws SyntaxError with the byte offset of the problem.
/// When `row_offsets` is given it receives the starting byte of each row.
std::vector<std::vector<std::string>> parse_csv(std::string_view bytes,
                                               std::vector<std::size_t>* row_offsets = nullptr);

std::string clean_location_string(std::string_view s);
std::vector<std::string> split_location_parts(std::string_view s);

/// Splits a raw URL field on whitespace and commas.
std::vector<std::string> split_urls(std::string_view s);

/// Throws RecordError(index) when the date or coordinates are unusable.
Event normalize_record(const RawEventRecord& raw, const AdapterConfig& cfg, std::size_t index);

struct Rejection {
  std::size_t index;
  std::string reason;
};

struct IngestResult {
  std::vector<Event> events;
  std::vector<Rejection> rejected;
};

/// parse_dataset + normalize_record over every record; per-record failures
/// are collected rather than aborting the file.
IngestResult ingest(std::string_view bytes, Dataset dataset, Format format,
                    const AdapterConfig& cfg);

}  // namespace l4r::ingest
