#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace l4r {

/// RFC 4180 writer: fields containing a comma, quote, CR or LF are quoted,
/// rows end with "\n".
class CsvWriter {
 public:
  void comment(std::string_view text) {
    out_ += "# ";
    out_ += text;
    out_ += '\n';
  }

  void row(std::initializer_list<std::string_view> fields) { write(fields.begin(), fields.end()); }
  void row(const std::vector<std::string>& fields) { write(fields.begin(), fields.end()); }

  const std::string& str() const noexcept { return out_; }

  static std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string q = "\"";
    for (char c : field) {
      if (c == '"') q += '"';
      q += c;
    }
    q += '"';
    return q;
  }

 private:
  template <typename It>
  void write(It first, It last) {
    bool head = true;
    for (; first != last; ++first) {
      if (!head) out_ += ',';
      out_ += quote(*first);
      head = false;
    }
    out_ += '\n';
  }

  std::string out_;
};

}  // namespace l4r
