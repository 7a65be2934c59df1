#include "l4r/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "l4r/text.hpp"

namespace l4r::ingest {

namespace {

const std::set<std::string, std::less<>> kMandatory = {"date", "lat", "lon"};
const std::set<std::string, std::less<>> kOptional = {
    "id", "description", "country", "city", "province", "location", "url", "violence_level"};

void flatten(const nlohmann::json& value, const std::string& prefix,
             std::map<std::string, std::string>& out) {
  switch (value.type()) {
    case nlohmann::json::value_t::null:
      return;
    case nlohmann::json::value_t::object:
      for (const auto& [k, v] : value.items()) {
        flatten(v, prefix.empty() ? k : prefix + "." + k, out);
      }
      return;
    case nlohmann::json::value_t::array: {
      std::string joined;
      for (const auto& item : value) {
        if (item.is_null()) continue;
        if (!joined.empty()) joined += '\n';
        joined += item.is_string() ? item.get<std::string>() : item.dump();
      }
      out[prefix] = joined;
      return;
    }
    case nlohmann::json::value_t::string:
      out[prefix] = value.get<std::string>();
      return;
    default:
      out[prefix] = value.dump();
  }
}

void require_mandatory(const RawEventRecord& rec, const AdapterConfig& cfg, std::size_t index) {
  for (const auto& canonical : kMandatory) {
    const auto source = cfg.source_field(canonical);
    if (!source || !rec.fields.contains(*source)) throw MissingMandatoryField(canonical, index);
  }
}

std::optional<std::string> field(const RawEventRecord& raw, const AdapterConfig& cfg,
                                 std::string_view canonical) {
  const auto source = cfg.source_field(canonical);
  if (!source) return std::nullopt;
  const auto it = raw.fields.find(*source);
  if (it == raw.fields.end()) return std::nullopt;
  return it->second;
}

double parse_coordinate(const std::string& text, std::string_view axis) {
  const auto s = trim(text);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
    throw Error("unparseable " + std::string(axis) + " '" + text + "'");
  }
  return v;
}

std::optional<std::string> non_empty(std::optional<std::string> s) {
  if (s && s->empty()) return std::nullopt;
  return s;
}

bool ends_with_region(std::string_view part, std::size_t& cut) {
  constexpr std::string_view suffix = " region";
  if (part.size() <= suffix.size()) return false;
  const auto tail = ascii_lower(part.substr(part.size() - suffix.size()));
  if (tail != suffix) return false;
  cut = part.size() - suffix.size();
  return true;
}

}  // namespace

Format parse_format_name(std::string_view s) {
  const auto lower = ascii_lower(trim(s));
  if (lower == "json") return Format::JSON;
  if (lower == "csv") return Format::CSV;
  throw Error("unknown format '" + std::string(s) + "' (expected json or csv)");
}

std::optional<std::string> AdapterConfig::source_field(std::string_view canonical) const {
  const auto it = fields.find(std::string(canonical));
  if (it == fields.end()) return std::nullopt;
  return it->second;
}

AdapterConfig adapter_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("adapter config must be a JSON object");
  AdapterConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "comment_fields") {
      cfg.comment_fields = value.get<std::vector<std::string>>();
      continue;
    }
    if (!kMandatory.contains(key) && !kOptional.contains(key)) {
      throw Error("adapter config: unknown canonical field '" + key + "'");
    }
    if (!value.is_string() || value.get<std::string>().empty()) {
      throw Error("adapter config: field '" + key + "' must map to a source field name");
    }
    cfg.fields[key] = value.get<std::string>();
  }
  for (const auto& m : kMandatory) {
    if (!cfg.fields.contains(m)) throw Error("adapter config: mandatory field '" + m + "' unmapped");
  }
  return cfg;
}

nlohmann::json to_json(const AdapterConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : cfg.fields) j[k] = v;
  if (!cfg.comment_fields.empty()) j["comment_fields"] = cfg.comment_fields;
  return j;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view bytes,
                                               std::vector<std::size_t>* row_offsets) {
  std::vector<std::vector<std::string>> rows;
  std::size_t row_start = 0;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool cell_was_quoted = false;
  std::size_t quote_start = 0;
  std::size_t i = 0;
  auto end_cell = [&] {
    row.push_back(std::move(cell));
    cell.clear();
    cell_was_quoted = false;
  };
  auto end_row = [&] {
    end_cell();
    rows.push_back(std::move(row));
    row.clear();
    if (row_offsets) row_offsets->push_back(row_start);
  };
  if (bytes.starts_with("\xEF\xBB\xBF")) i = 3;
  row_start = i;
  const std::size_t n = bytes.size();
  if (i == n) return rows;
  while (i < n) {
    const char c = bytes[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < n && bytes[i + 1] == '"') {
          cell.push_back('"');
          i += 2;
          continue;
        }
        quoted = false;
        ++i;
        if (i < n && bytes[i] != ',' && bytes[i] != '\r' && bytes[i] != '\n') {
          throw SyntaxError("csv: unexpected character after closing quote", i);
        }
        continue;
      }
      cell.push_back(c);
      ++i;
      continue;
    }
    if (c == '"') {
      if (!cell.empty() || cell_was_quoted) throw SyntaxError("csv: stray quote", i);
      quoted = true;
      cell_was_quoted = true;
      quote_start = i;
      ++i;
    } else if (c == ',') {
      end_cell();
      ++i;
    } else if (c == '\r' || c == '\n') {
      end_row();
      i += (c == '\r' && i + 1 < n && bytes[i + 1] == '\n') ? 2 : 1;
      row_start = i;
      if (i == n) return rows;
    } else {
      cell.push_back(c);
      ++i;
    }
  }
  if (quoted) throw SyntaxError("csv: unterminated quoted field", quote_start);
  end_row();
  return rows;
}

std::vector<RawEventRecord> parse_dataset(std::string_view bytes, Dataset dataset, Format format,
                                          const AdapterConfig& cfg) {
  std::vector<RawEventRecord> out;
  if (format == Format::JSON) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::parse_error& e) {
      throw SyntaxError(std::string("json: ") + e.what(), e.byte);
    }
    // Accept either a bare array or an object wrapping one array (e.g. {"events": [...]}).
    const nlohmann::json* entries = &doc;
    if (doc.is_object()) {
      entries = nullptr;
      for (const auto& [k, v] : doc.items()) {
        if (v.is_array()) {
          if (entries) throw SyntaxError("json: ambiguous top-level object with several arrays", 0);
          entries = &v;
        }
      }
    }
    if (!entries || !entries->is_array()) throw SyntaxError("json: expected an array of records", 0);
    out.reserve(entries->size());
    for (std::size_t i = 0; i < entries->size(); ++i) {
      const auto& entry = (*entries)[i];
      if (!entry.is_object()) throw SyntaxError("json: record " + std::to_string(i) + " is not an object", 0);
      RawEventRecord rec{dataset, {}};
      flatten(entry, "", rec.fields);
      require_mandatory(rec, cfg, i);
      out.push_back(std::move(rec));
    }
    return out;
  }

  std::vector<std::size_t> offsets;
  auto rows = parse_csv(bytes, &offsets);
  if (rows.empty()) throw SyntaxError("csv: missing header row", 0);
  const auto& header = rows.front();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    if (row.size() != header.size()) {
      throw SyntaxError("csv: row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                            " fields, header has " + std::to_string(header.size()),
                        offsets[r]);
    }
    RawEventRecord rec{dataset, {}};
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (!row[c].empty()) rec.fields[header[c]] = std::move(row[c]);
    }
    require_mandatory(rec, cfg, out.size());
    out.push_back(std::move(rec));
  }
  return out;
}

std::string clean_location_string(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    const bool ws = c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
    if (ws) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> split_location_parts(std::string_view s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    auto part = trim(s.substr(start, comma - start));
    std::size_t cut = 0;
    if (ends_with_region(part, cut)) part = trim(part.substr(0, cut));
    if (!part.empty()) parts.emplace_back(part);
    start = comma + 1;
  }
  return parts;
}

std::vector<std::string> split_urls(std::string_view s) {
  std::vector<std::string> urls;
  std::string current;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == ',') {
      if (!current.empty()) urls.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) urls.push_back(std::move(current));
  return urls;
}

Event normalize_record(const RawEventRecord& raw, const AdapterConfig& cfg, std::size_t index) {
  try {
    Event ev;
    ev.dataset = raw.dataset;
    const auto date = field(raw, cfg, "date");
    const auto lat = field(raw, cfg, "lat");
    const auto lon = field(raw, cfg, "lon");
    if (!date) throw MissingMandatoryField("date", index);
    if (!lat) throw MissingMandatoryField("lat", index);
    if (!lon) throw MissingMandatoryField("lon", index);
    ev.date = parse_civil_date(*date);
    ev.point = validate_point(parse_coordinate(*lat, "latitude"),
                              parse_coordinate(*lon, "longitude"));

    if (auto d = field(raw, cfg, "description")) {
      const auto t = trim(*d);
      if (!t.empty()) ev.description = std::string(t);
    }

    auto cleaned = [&](std::string_view canonical) {
      auto v = field(raw, cfg, canonical);
      return v ? non_empty(clean_location_string(*v)) : std::nullopt;
    };
    ev.country_text = cleaned("country");
    ev.province_text = cleaned("province");
    if (auto city = cleaned("city")) {
      auto parts = split_location_parts(*city);
      if (!parts.empty()) ev.city_text = parts.front();
    }
    if (auto location = cleaned("location")) {
      const auto parts = split_location_parts(*location);
      if (!ev.city_text && !parts.empty()) ev.city_text = parts[0];
      if (!ev.province_text && parts.size() > 1) ev.province_text = parts[1];
    }
    if (ev.province_text) {
      auto parts = split_location_parts(*ev.province_text);
      ev.province_text = parts.empty() ? std::nullopt : std::optional(parts.front());
    }

    if (auto urls = field(raw, cfg, "url")) {
      for (auto& url : split_urls(*urls)) {
        if (is_absolute_url(url)) {
          if (std::find(ev.source_urls.begin(), ev.source_urls.end(), url) == ev.source_urls.end()) {
            ev.source_urls.push_back(std::move(url));
          }
        } else {
          ev.provenance.push_back("url: dropped non-absolute value '" + url + "'");
        }
      }
    }

    if (auto level = field(raw, cfg, "violence_level")) {
      const auto t = trim(*level);
      if (!t.empty()) ev.comments.push_back("violence_level: " + std::string(t));
    }
    for (const auto& extra : cfg.comment_fields) {
      const auto it = raw.fields.find(extra);
      if (it == raw.fields.end()) continue;
      const auto t = trim(it->second);
      if (!t.empty()) ev.comments.push_back(extra + ": " + std::string(t));
    }

    auto id = field(raw, cfg, "id");
    if (id && !trim(*id).empty()) {
      ev.id = std::string(trim(*id));
    } else {
      ev.id = content_id(ev.dataset, ev.date, ev.point, ev.description);
    }
    return ev;
  } catch (const RecordError&) {
    throw;
  } catch (const Error& e) {
    throw RecordError(index, e.what());
  }
}

IngestResult ingest(std::string_view bytes, Dataset dataset, Format format,
                    const AdapterConfig& cfg) {
  const auto records = parse_dataset(bytes, dataset, format, cfg);
  IngestResult result;
  result.events.reserve(records.size());
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      auto ev = normalize_record(records[i], cfg, i);
      // Byte-identical source records hash to the same id; keep them distinct.
      if (const int n = seen[ev.id]++; n > 0) {
        ev.provenance.push_back("id: duplicate of " + ev.id);
        ev.id += "~" + std::to_string(n + 1);
      }
      result.events.push_back(std::move(ev));
    } catch (const RecordError& e) {
      result.rejected.push_back({i, e.what()});
    }
  }
  return result;
}

}  // namespace l4r::ingest
