#include "l4r/rdf.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <tuple>

#include "l4r/text.hpp"
#include "l4r/url.hpp"

namespace l4r::rdf {

namespace vocab {
namespace {
std::string join(std::string_view ns, std::string_view local) {
  std::string out(ns);
  out += local;
  return out;
}
}  // namespace

std::string rdf_type() { return join(ns::rdf, "type"); }
std::string rdfs_comment() { return join(ns::rdfs, "comment"); }
std::string xsd_date() { return join(ns::xsd, "date"); }
std::string xsd_decimal() { return join(ns::xsd, "decimal"); }
std::string sem_event() { return join(ns::sem, "Event"); }
std::string dct_date() { return join(ns::dct, "date"); }
std::string dct_description() { return join(ns::dct, "description"); }
std::string sdo_location() { return join(ns::sdo, "location"); }
std::string sdo_geo() { return join(ns::sdo, "geo"); }
std::string sdo_geo_coordinates() { return join(ns::sdo, "GeoCoordinates"); }
std::string sdo_latitude() { return join(ns::sdo, "latitude"); }
std::string sdo_longitude() { return join(ns::sdo, "longitude"); }
std::string sdo_url() { return join(ns::sdo, "url"); }
std::string city_name() { return join(ns::l4r, "cityName"); }
std::string address_region() { return join(ns::l4r, "addressRegion"); }
std::string city_geonames() { return join(ns::l4r, "cityGeoNames"); }
std::string province_geonames() { return join(ns::l4r, "provinceGeoNames"); }
std::string country_geonames() { return join(ns::l4r, "countryGeoNames"); }
std::string postal_code() { return join(ns::l4r, "postalCode"); }
std::string has_primary_source() { return join(ns::l4r, "hasPrimarySource"); }
std::string has_member() { return join(ns::l4r, "hasMember"); }
std::string wkt_literal() { return join(ns::geo, "wktLiteral"); }
std::string as_wkt() { return join(ns::geo, "asWKT"); }
}  // namespace vocab

namespace {

bool is_lang_tag(std::string_view tag) {
  if (tag.empty()) return false;
  bool first = true;
  std::size_t run = 0;
  for (char c : tag) {
    const bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    const bool digit = c >= '0' && c <= '9';
    if (c == '-') {
      if (run == 0) return false;
      first = false;
      run = 0;
    } else if (alpha || (!first && digit)) {
      ++run;
    } else {
      return false;
    }
  }
  return run > 0;
}

void escape_string(std::string_view s, std::string& out) {
  static constexpr char hex[] = "0123456789ABCDEF";
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (c < 0x20 || c == 0x7F) {
          out += "\\u00";
          out.push_back(hex[c >> 4]);
          out.push_back(hex[c & 0xF]);
        } else {
          out.push_back(ch);
        }
    }
  }
}

std::string iri_ref(std::string_view iri) {
  std::string out = "<";
  out += iri;
  out += '>';
  return out;
}

struct Prefix {
  std::string_view name;
  std::string_view ns;
};

constexpr Prefix kPrefixes[] = {
    {"dct", ns::dct}, {"geo", ns::geo}, {"l4r", ns::l4r}, {"rdf", ns::rdf},
    {"rdfs", ns::rdfs}, {"sdo", ns::sdo}, {"sem", ns::sem}, {"xsd", ns::xsd},
};

bool is_simple_local(std::string_view local) {
  if (local.empty()) return false;
  const char f = local.front();
  if (!((f >= 'a' && f <= 'z') || (f >= 'A' && f <= 'Z') || f == '_')) return false;
  for (char c : local) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::string turtle_iri(std::string_view iri) {
  for (const auto& p : kPrefixes) {
    if (iri.starts_with(p.ns) && is_simple_local(iri.substr(p.ns.size()))) {
      std::string out(p.name);
      out += ':';
      out += iri.substr(p.ns.size());
      return out;
    }
  }
  return iri_ref(iri);
}

std::string turtle_term(const Term& t) {
  if (t.is_iri()) return turtle_iri(t.value());
  std::string out = "\"";
  escape_string(t.value(), out);
  out += '"';
  if (t.language()) {
    out += '@';
    out += *t.language();
  } else if (t.datatype()) {
    out += "^^";
    out += turtle_iri(*t.datatype());
  }
  return out;
}

// Line-level N-Triples reader.
class LineParser {
 public:
  LineParser(std::string_view line, std::size_t line_no) : s_(line), line_(line_no) {}

  bool at_end_of_content() {
    skip_ws();
    return pos_ == s_.size() || s_[pos_] == '#';
  }

  Term term() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of line");
    if (s_[pos_] == '<') return Term::iri(iri());
    if (s_[pos_] == '"') return literal();
    if (s_[pos_] == '_') fail("blank nodes are not supported");
    fail("expected '<' or '\"'");
  }

  void end_statement() {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != '.') fail("missing terminating '.'");
    ++pos_;
    if (!at_end_of_content()) fail("trailing characters after '.'");
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw SyntaxError("n-triples: " + what, line_);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  std::string iri() {
    const auto close = s_.find('>', pos_ + 1);
    if (close == std::string_view::npos) fail("unterminated IRI");
    auto out = unescape(s_.substr(pos_ + 1, close - pos_ - 1), false);
    pos_ = close + 1;
    if (!is_valid_iri(out)) fail("invalid IRI <" + out + ">");
    return out;
  }

  Term literal() {
    std::size_t i = pos_ + 1;
    while (i < s_.size() && s_[i] != '"') {
      if (s_[i] == '\\') ++i;
      ++i;
    }
    if (i >= s_.size()) fail("unterminated literal");
    auto value = unescape(s_.substr(pos_ + 1, i - pos_ - 1), true);
    pos_ = i + 1;
    if (pos_ < s_.size() && s_[pos_] == '@') {
      const auto start = ++pos_;
      while (pos_ < s_.size() && s_[pos_] != ' ' && s_[pos_] != '\t' && s_[pos_] != '.') ++pos_;
      const auto tag = s_.substr(start, pos_ - start);
      if (!is_lang_tag(tag)) fail("invalid language tag");
      return Term::lang_literal(std::move(value), std::string(tag));
    }
    if (s_.substr(pos_).starts_with("^^")) {
      pos_ += 2;
      if (pos_ >= s_.size() || s_[pos_] != '<') fail("datatype must be an IRI");
      return Term::typed_literal(std::move(value), iri());
    }
    return Term::literal(std::move(value));
  }

  std::string unescape(std::string_view body, bool echar) const {
    std::string out;
    out.reserve(body.size());
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i] != '\\') {
        out.push_back(body[i]);
        continue;
      }
      if (++i >= body.size()) fail("dangling escape");
      const char e = body[i];
      if (e == 'u' || e == 'U') {
        const std::size_t n = e == 'u' ? 4 : 8;
        if (i + n >= body.size()) fail("short unicode escape");
        std::uint32_t cp = 0;
        const auto digits = body.substr(i + 1, n);
        auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, 16);
        if (ec != std::errc{} || p != digits.data() + digits.size()) fail("bad unicode escape");
        out += utf8_encode(std::u32string(1, static_cast<char32_t>(cp)));
        i += n;
        continue;
      }
      if (!echar) fail("invalid escape in IRI");
      switch (e) {
        case 't': out.push_back('\t'); break;
        case 'b': out.push_back('\b'); break;
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 'f': out.push_back('\f'); break;
        case '"': out.push_back('"'); break;
        case '\'': out.push_back('\''); break;
        case '\\': out.push_back('\\'); break;
        default: fail(std::string("unknown escape \\") + e);
      }
    }
    return out;
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

double parse_decimal(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
    throw Error("bad decimal literal '" + s + "'");
  }
  return v;
}

}  // namespace

bool is_valid_iri(std::string_view iri) noexcept {
  const auto colon = iri.find(':');
  if (colon == std::string_view::npos || colon == 0) return false;
  for (std::size_t i = 0; i < colon; ++i) {
    const char c = iri[i];
    const bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    const bool other = (c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.';
    if (!(alpha || (i > 0 && other))) return false;
  }
  for (unsigned char c : iri) {
    if (c <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' ||
        c == '^' || c == '`' || c == '\\') {
      return false;
    }
  }
  return true;
}

Term Term::iri(std::string value) {
  if (!is_valid_iri(value)) throw Error("invalid IRI '" + value + "'");
  Term t;
  t.kind_ = Kind::IRI;
  t.value_ = std::move(value);
  return t;
}

Term Term::literal(std::string value) {
  Term t;
  t.kind_ = Kind::Literal;
  t.value_ = std::move(value);
  return t;
}

Term Term::lang_literal(std::string value, std::string language) {
  if (!is_lang_tag(language)) throw Error("invalid language tag '" + language + "'");
  Term t = literal(std::move(value));
  t.language_ = std::move(language);
  return t;
}

Term Term::typed_literal(std::string value, std::string datatype) {
  if (!is_valid_iri(datatype)) throw Error("invalid datatype IRI '" + datatype + "'");
  Term t = literal(std::move(value));
  t.datatype_ = std::move(datatype);
  return t;
}

Triple::Triple(Term s, Term p, Term o)
    : subject(std::move(s)), predicate(std::move(p)), object(std::move(o)) {
  if (!subject.is_iri() || !predicate.is_iri()) throw Error("triple subject and predicate must be IRIs");
}

std::string event_iri(Dataset dataset, std::string_view id) {
  if (id.empty()) throw Error("event_iri: empty id");
  std::string out(kEventBase);
  out += to_string(dataset);
  out += '/';
  out += percent_encode(id);
  return out;
}

std::optional<EventKey> event_key_from_iri(std::string_view iri) {
  if (!iri.starts_with(kEventBase)) return std::nullopt;
  const auto rest = iri.substr(kEventBase.size());
  const auto slash = rest.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  const auto ds = rest.substr(0, slash);
  const auto id = rest.substr(slash + 1);
  if (id.empty()) return std::nullopt;
  if (ds == "eor") return EventKey{Dataset::EOR, percent_decode(id)};
  if (ds == "ch") return EventKey{Dataset::CH, percent_decode(id)};
  return std::nullopt;
}

std::vector<Triple> emit_event_triples(const Event& ev) {
  const auto subject = event_iri(ev.dataset, ev.id);
  const auto location = subject + "/location";
  const auto geo = subject + "/geo";
  auto iri = [](std::string v) { return Term::iri(std::move(v)); };

  std::vector<Triple> out;
  auto add = [&](const std::string& s, std::string p, Term o) {
    out.emplace_back(Term::iri(s), Term::iri(std::move(p)), std::move(o));
  };

  add(subject, vocab::rdf_type(), iri(vocab::sem_event()));
  add(subject, vocab::dct_date(), Term::typed_literal(ev.date.to_string(), vocab::xsd_date()));
  add(subject, vocab::sdo_location(), iri(location));
  add(location, vocab::sdo_geo(), iri(geo));
  add(geo, vocab::rdf_type(), iri(vocab::sdo_geo_coordinates()));
  add(geo, vocab::sdo_latitude(),
      Term::typed_literal(format_decimal(ev.point.latitude()), vocab::xsd_decimal()));
  add(geo, vocab::sdo_longitude(),
      Term::typed_literal(format_decimal(ev.point.longitude()), vocab::xsd_decimal()));

  if (ev.description) add(subject, vocab::dct_description(), Term::literal(*ev.description));
  for (const auto& url : ev.source_urls) add(subject, vocab::sdo_url(), iri(url));
  for (const auto& c : ev.comments) add(subject, vocab::rdfs_comment(), Term::literal(c));
  for (const auto& [lang, name] : ev.city_labels) {
    add(subject, vocab::city_name(), Term::lang_literal(name, lang));
  }
  if (ev.province) {
    if (!ev.province->preferred_name.empty()) {
      add(subject, vocab::address_region(), Term::literal(ev.province->preferred_name));
    }
    add(subject, vocab::province_geonames(), iri(ev.province->iri()));
  }
  if (ev.city) add(subject, vocab::city_geonames(), iri(ev.city->iri()));
  if (ev.country) add(subject, vocab::country_geonames(), iri(ev.country->iri()));
  if (ev.postal_code) add(subject, vocab::postal_code(), Term::literal(*ev.postal_code));
  return out;
}

std::vector<Triple> emit_aggregate_triples(const AggregateEvent& agg) {
  if (agg.members.empty() || agg.members.size() > 2) {
    throw Error("aggregate " + agg.iri + ": must have one or two members");
  }
  if (std::find(agg.members.begin(), agg.members.end(), agg.primary) == agg.members.end()) {
    throw Error("aggregate " + agg.iri + ": primary is not a member");
  }
  std::vector<Triple> out;
  const auto s = Term::iri(agg.iri);
  out.emplace_back(s, Term::iri(vocab::rdf_type()), Term::iri(vocab::sem_event()));
  out.emplace_back(s, Term::iri(vocab::has_primary_source()),
                   Term::iri(event_iri(agg.primary.dataset, agg.primary.id)));
  for (const auto& m : agg.members) {
    out.emplace_back(s, Term::iri(vocab::has_member()), Term::iri(event_iri(m.dataset, m.id)));
  }
  return out;
}

std::string to_ntriples(const Term& t) {
  if (t.is_iri()) return iri_ref(t.value());
  std::string out = "\"";
  escape_string(t.value(), out);
  out += '"';
  if (t.language()) {
    out += '@';
    out += *t.language();
  } else if (t.datatype()) {
    out += "^^";
    out += iri_ref(*t.datatype());
  }
  return out;
}

void canonicalize(std::vector<Triple>& triples) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::vector<std::pair<Key, std::size_t>> keys;
  keys.reserve(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    keys.emplace_back(Key{triples[i].subject.value(), triples[i].predicate.value(),
                          to_ntriples(triples[i].object)},
                      i);
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end(),
                         [](const auto& a, const auto& b) { return a.first == b.first; }),
             keys.end());
  std::vector<Triple> sorted;
  sorted.reserve(keys.size());
  for (const auto& [key, i] : keys) sorted.push_back(std::move(triples[i]));
  triples = std::move(sorted);
}

void serialize(const std::vector<Triple>& input, Format format, std::ostream& sink) {
  auto triples = input;
  canonicalize(triples);
  if (format == Format::NTriples) {
    for (const auto& t : triples) {
      sink << iri_ref(t.subject.value()) << ' ' << iri_ref(t.predicate.value()) << ' '
           << to_ntriples(t.object) << " .\n";
    }
  } else {
    for (const auto& p : kPrefixes) sink << "@prefix " << p.name << ": <" << p.ns << "> .\n";
    const std::string* subject = nullptr;
    for (const auto& t : triples) {
      const auto pred = t.predicate.value() == vocab::rdf_type() ? std::string("a")
                                                                : turtle_iri(t.predicate.value());
      if (subject && *subject == t.subject.value()) {
        sink << " ;\n    " << pred << ' ' << turtle_term(t.object);
      } else {
        if (subject) sink << " .\n";
        sink << '\n' << turtle_iri(t.subject.value()) << '\n' << "    " << pred << ' '
             << turtle_term(t.object);
      }
      subject = &t.subject.value();
    }
    if (subject) sink << " .\n";
  }
  sink.flush();
  if (!sink) throw SinkError("rdf: write failed");
}

std::string serialize(const std::vector<Triple>& triples, Format format) {
  std::ostringstream out;
  serialize(triples, format, out);
  return out.str();
}

std::vector<Triple> parse_ntriples(std::string_view bytes) {
  std::vector<Triple> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < bytes.size()) {
    auto nl = bytes.find('\n', start);
    if (nl == std::string_view::npos) nl = bytes.size();
    auto line = bytes.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    LineParser p(line, line_no);
    if (p.at_end_of_content()) continue;
    auto s = p.term();
    auto pr = p.term();
    auto o = p.term();
    if (!s.is_iri() || !pr.is_iri()) throw SyntaxError("n-triples: subject and predicate must be IRIs", line_no);
    p.end_statement();
    out.emplace_back(std::move(s), std::move(pr), std::move(o));
  }
  return out;
}

IntegratedDataset read_integrated(const std::vector<Triple>& triples) {
  std::map<std::string, std::vector<const Triple*>> by_subject;
  for (const auto& t : triples) by_subject[t.subject.value()].push_back(&t);

  auto objects = [&](const std::string& s, const std::string& p) {
    std::vector<const Term*> out;
    const auto it = by_subject.find(s);
    if (it == by_subject.end()) return out;
    for (const auto* t : it->second) {
      if (t->predicate.value() == p) out.push_back(&t->object);
    }
    return out;
  };
  auto single = [&](const std::string& s, const std::string& p) -> const Term* {
    const auto objs = objects(s, p);
    if (objs.size() > 1) throw Error(s + ": more than one <" + p + ">");
    return objs.empty() ? nullptr : objs.front();
  };
  auto geoname_ref = [&](const std::string& s, const std::string& p) -> std::optional<GazetteerRef> {
    const auto* o = single(s, p);
    if (!o) return std::nullopt;
    const auto id = geoname_id_from_iri(o->value());
    if (!id) throw Error(s + ": <" + p + "> is not a GeoNames IRI");
    return GazetteerRef{*id, ""};
  };

  IntegratedDataset data;
  const auto type = vocab::rdf_type();
  const auto sem_event = vocab::sem_event();
  for (const auto& [subject, stmts] : by_subject) {
    const bool is_event = std::any_of(stmts.begin(), stmts.end(), [&](const Triple* t) {
      return t->predicate.value() == type && t->object.value() == sem_event;
    });
    if (!is_event) continue;

    if (const auto* primary = single(subject, vocab::has_primary_source())) {
      AggregateEvent agg;
      agg.iri = subject;
      const auto pk = event_key_from_iri(primary->value());
      if (!pk) throw Error(subject + ": primary source is not an event IRI");
      agg.primary = *pk;
      for (const auto* m : objects(subject, vocab::has_member())) {
        const auto mk = event_key_from_iri(m->value());
        if (!mk) throw Error(subject + ": member is not an event IRI");
        agg.members.push_back(*mk);
      }
      data.aggregates.push_back(std::move(agg));
      continue;
    }

    const auto key = event_key_from_iri(subject);
    if (!key) continue;
    Event ev;
    ev.dataset = key->dataset;
    ev.id = key->id;
    const auto* date = single(subject, vocab::dct_date());
    if (!date) throw Error(subject + ": missing dct:date");
    ev.date = parse_civil_date(date->value());
    const auto* loc = single(subject, vocab::sdo_location());
    const auto* geo = loc ? single(loc->value(), vocab::sdo_geo()) : nullptr;
    const auto* lat = geo ? single(geo->value(), vocab::sdo_latitude()) : nullptr;
    const auto* lon = geo ? single(geo->value(), vocab::sdo_longitude()) : nullptr;
    if (!lat || !lon) throw Error(subject + ": missing coordinates");
    ev.point = validate_point(parse_decimal(lat->value()), parse_decimal(lon->value()));
    if (const auto* d = single(subject, vocab::dct_description())) ev.description = d->value();
    for (const auto* u : objects(subject, vocab::sdo_url())) ev.source_urls.push_back(u->value());
    for (const auto* c : objects(subject, vocab::rdfs_comment())) ev.comments.push_back(c->value());
    for (const auto* label : objects(subject, vocab::city_name())) {
      if (label->language()) ev.city_labels[*label->language()] = label->value();
    }
    ev.city = geoname_ref(subject, vocab::city_geonames());
    ev.country = geoname_ref(subject, vocab::country_geonames());
    ev.province = geoname_ref(subject, vocab::province_geonames());
    if (const auto* region = single(subject, vocab::address_region())) {
      if (!ev.province) throw Error(subject + ": addressRegion without provinceGeoNames");
      ev.province->preferred_name = region->value();
    }
    if (const auto* pc = single(subject, vocab::postal_code())) ev.postal_code = pc->value();
    data.events.push_back(std::move(ev));
  }
  return data;
}

}  // namespace l4r::rdf
