#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "l4r/model.hpp"

namespace l4r::rdf {

namespace ns {
inline constexpr std::string_view rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view rdfs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view xsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view sem = "http://semanticweb.cs.vu.nl/2009/11/sem/";
inline constexpr std::string_view sdo = "https://schema.org/";
inline constexpr std::string_view dct = "http://purl.org/dc/terms/";
inline constexpr std::string_view l4r = "https://linked4resilience.eu/ontology/";
inline constexpr std::string_view geo = "http://www.opengis.net/ont/geosparql#";
}  // namespace ns

inline constexpr std::string_view kEventBase = "https://linked4resilience.eu/event/";

/// Full IRIs of every term the mapping uses.
namespace vocab {
std::string rdf_type();
std::string rdfs_comment();
std::string xsd_date();
std::string xsd_decimal();
std::string sem_event();
std::string dct_date();
std::string dct_description();
std::string sdo_location();
std::string sdo_geo();
std::string sdo_geo_coordinates();
std::string sdo_latitude();
std::string sdo_longitude();
std::string sdo_url();
std::string city_name();
std::string address_region();
std::string city_geonames();
std::string province_geonames();
std::string country_geonames();
std::string postal_code();
std::string has_primary_source();
std::string has_member();
std::string wkt_literal();
std::string as_wkt();
}  // namespace vocab

class Term {
 public:
  enum class Kind { IRI, Literal };

  /// Throws Error unless `value` is an absolute IRI without characters that
  /// N-Triples forbids inside <...>.
  static Term iri(std::string value);
  static Term literal(std::string value);
  static Term lang_literal(std::string value, std::string language);
  static Term typed_literal(std::string value, std::string datatype);

  Kind kind() const noexcept { return kind_; }
  bool is_iri() const noexcept { return kind_ == Kind::IRI; }
  bool is_literal() const noexcept { return kind_ == Kind::Literal; }
  const std::string& value() const noexcept { return value_; }
  const std::optional<std::string>& language() const noexcept { return language_; }
  const std::optional<std::string>& datatype() const noexcept { return datatype_; }

  friend bool operator==(const Term&, const Term&) = default;

 private:
  Term() = default;
  Kind kind_ = Kind::IRI;
  std::string value_;
  std::optional<std::string> language_;
  std::optional<std::string> datatype_;
};

struct Triple {
  Term subject;
  Term predicate;
  Term object;

  /// Throws Error unless subject and predicate are IRIs.
  Triple(Term s, Term p, Term o);
  friend bool operator==(const Triple&, const Triple&) = default;
};

bool is_valid_iri(std::string_view iri) noexcept;

/// `https://linked4resilience.eu/event/{eor|ch}/{percent-encoded id}`
std::string event_iri(Dataset dataset, std::string_view id);
/// Inverse of event_iri; nullopt for IRIs outside the event namespace.
std::optional<EventKey> event_key_from_iri(std::string_view iri);

std::vector<Triple> emit_event_triples(const Event& ev);
/// Throws Error if the primary is not among the members.
std::vector<Triple> emit_aggregate_triples(const AggregateEvent& agg);

/// N-Triples form of a single term.
std::string to_ntriples(const Term& t);

/// Sorts by (subject, predicate, object) on their N-Triples forms and drops
/// duplicates, giving the canonical statement order for output.
void canonicalize(std::vector<Triple>& triples);

enum class Format { NTriples, Turtle };

/// Canonicalizes a copy of `triples` and writes it. Throws SinkError when the
/// stream fails.
void serialize(const std::vector<Triple>& triples, Format format, std::ostream& sink);
std::string serialize(const std::vector<Triple>& triples, Format format);

/// Accepts the N-Triples subset this module writes (IRIs and literals, no
/// blank nodes), plus comments and blank lines. Throws SyntaxError with the
/// 1-based line number.
std::vector<Triple> parse_ntriples(std::string_view bytes);

/// Rebuilds source events and aggregates from emitted triples. Only the
/// fields carried by the mapping survive (raw place strings and provenance
/// notes do not).
IntegratedDataset read_integrated(const std::vector<Triple>& triples);

}  // namespace l4r::rdf
