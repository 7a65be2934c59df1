#include <gtest/gtest.h>

#include "l4r/csv_writer.hpp"
#include "l4r/text.hpp"
#include "l4r/url.hpp"

namespace l4r {
namespace {

TEST(Text, Trim) {
  EXPECT_EQ(trim("  a b \r\n"), "a b");
  EXPECT_EQ(trim(""), "");
  EXPECT_EQ(trim(" \t "), "");
}

TEST(Text, Utf8RoundTrip) {
  const std::string s = "Харків école 🚀";
  EXPECT_EQ(utf8_encode(utf8_decode(s)), s);
  EXPECT_EQ(utf8_decode("\xff").front(), U'�');
}

TEST(Text, LowerCoversCyrillicAndLatin) {
  EXPECT_EQ(utf8_lower("ХАРКІВ"), "харків");
  EXPECT_EQ(utf8_lower("ÉCOLE Ÿ"), "école ÿ");
  EXPECT_EQ(utf8_lower("ΑΘΗΝΑ"), "αθηνα");
  EXPECT_EQ(ascii_lower("AbC-Ä"), "abc-Ä");
}

TEST(Text, FormatDecimal) {
  EXPECT_EQ(format_decimal(50.0), "50.0");
  EXPECT_EQ(format_decimal(49.9935), "49.9935");
  EXPECT_EQ(format_decimal(-0.0), "0.0");
  EXPECT_EQ(format_decimal(36.123456789), "36.1234568");
  EXPECT_EQ(format_decimal(-93.2982), "-93.2982");
}

TEST(Text, Sha256) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Url, Parse) {
  const auto u = parse_url("HTTPS://T.me:443/x/1?a=b#frag");
  ASSERT_TRUE(u);
  EXPECT_EQ(u->scheme, "https");
  EXPECT_EQ(u->host, "T.me");
  EXPECT_EQ(u->port, 443);
  EXPECT_EQ(u->target, "/x/1?a=b");
  EXPECT_EQ(u->fragment, "frag");
  EXPECT_EQ(u->origin(), "https://T.me");
  EXPECT_FALSE(parse_url("mailto:x@y"));
  EXPECT_EQ(parse_url("http://h")->target, "/");
}

TEST(Url, Normalize) {
  EXPECT_EQ(normalize_url("https://X/p/1"), normalize_url("https://x/p/1/"));
  EXPECT_EQ(normalize_url("HTTPS://T.ME/kharkiv_news/101/"), "https://t.me/kharkiv_news/101");
  EXPECT_EQ(normalize_url("https://t.me/a#b"), "https://t.me/a");
  EXPECT_NE(normalize_url("https://t.me/A"), normalize_url("https://t.me/a"));
}

TEST(Url, Rebase) {
  EXPECT_EQ(rebase_url("https://t.me/x/1?q=2", "http://127.0.0.1:8080"), "http://127.0.0.1:8080/x/1?q=2");
  EXPECT_EQ(rebase_url("https://t.me/x", "http://127.0.0.1:8080/mock/"), "http://127.0.0.1:8080/mock/x");
}

TEST(Url, PercentEncoding) {
  EXPECT_EQ(percent_encode("a b/ü"), "a%20b%2F%C3%BC");
  EXPECT_EQ(percent_decode(percent_encode("a b/ü~._-")), "a b/ü~._-");
}

TEST(CsvWriter, QuotesWhenNeeded) {
  CsvWriter w;
  w.comment("note");
  w.row({"a", "b,c", "say \"hi\"", "x\ny"});
  EXPECT_EQ(w.str(), "# note\na,\"b,c\",\"say \"\"hi\"\"\",\"x\ny\"\n");
}

}  // namespace
}  // namespace l4r
