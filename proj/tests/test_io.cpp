#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "dissmps/io.hpp"
#include "dissmps/types.hpp"

using namespace dissmps;

TEST(Io, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, (i % 40) - 20);
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.25), "2.50000000000000000e-01");
}

TEST(Io, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
}

TEST(Io, CanonicalJsonIgnoresLayoutAndKeyOrder) {
  const std::string a = canonical_json("{ \"n\": 4,\n \"boundary\": \"open\" }");
  const std::string b = canonical_json("{\"boundary\":\"open\",\"n\":4}");
  EXPECT_EQ(a, b);
  EXPECT_NE(canonical_json("{\"n\": 5, \"boundary\": \"open\"}"), a);
  EXPECT_THROW(canonical_json("{\"n\": 4,"), ValidationError);
  EXPECT_EQ(make_provenance("x", a, 1).config_hash, make_provenance("x", b, 1).config_hash);
}

TEST(Io, ProvenanceHeader) {
  Provenance p = make_provenance("cw-rates", "{}", 7);
  auto lines = p.header_lines();
  ASSERT_EQ(lines.size(), 3u);
  const std::string text = CsvTable({"a"}).to_string(&p);
  for (const auto& l : lines) EXPECT_NE(text.find("# " + l + "\n"), std::string::npos);
  EXPECT_NE(lines[0].find("command=cw-rates"), std::string::npos);
  EXPECT_NE(lines[1].find(p.config_hash), std::string::npos);
  EXPECT_NE(lines[2].find("seed=7"), std::string::npos);
  EXPECT_EQ(p.version, version_string());
}

TEST(Io, CsvRoundTripIsByteIdentical) {
  CsvTable t({"label", "rate"});
  t.add_row(std::vector<std::string>{"cw0", format_double(7.0 / 32.0)});
  t.add_row(std::vector<std::string>{"cw1", format_double(3.0 / 16.0)});
  Provenance p = make_provenance("cw-rates", "{}", 0);
  const std::string text = t.to_string(&p);
  ParsedCsv parsed = parse_csv(text);
  EXPECT_EQ(parsed.columns, (std::vector<std::string>{"label", "rate"}));
  ASSERT_EQ(parsed.rows.size(), 2u);
  EXPECT_EQ(parsed.comments.size(), 3u);
  EXPECT_EQ(serialize_csv(parsed), text);

  CsvTable num({"t", "F"});
  num.add_row(std::vector<double>{0.1, 1.0 / 3.0});
  const std::string s = num.to_string();
  EXPECT_EQ(serialize_csv(parse_csv(s)), s);
  EXPECT_THROW(num.add_row(std::vector<double>{1.0}), ValidationError);
}

TEST(Io, CsvQuotedCellsRoundTrip) {
  CsvTable t({"name", "measured"});
  t.add_row(std::vector<std::string>{"a,b", "say \"hi\""});
  t.add_row(std::vector<std::string>{"plain", "two\nlines"});
  const std::string text = t.to_string();
  EXPECT_EQ(text.substr(0, 14), "name,measured\n");
  ParsedCsv parsed = parse_csv(text);
  ASSERT_EQ(parsed.rows.size(), 2u);
  EXPECT_EQ(parsed.rows[0][0], "a,b");
  EXPECT_EQ(parsed.rows[0][1], "say \"hi\"");
  EXPECT_EQ(parsed.rows[1][1], "two\nlines");
  EXPECT_EQ(serialize_csv(parsed), text);
  EXPECT_THROW(parse_csv("a,b\n\"open,1\n"), ValidationError);
}

TEST(Io, AtomicWrite) {
  const auto dir = std::filesystem::temp_directory_path() / "dissmps_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "out.csv").string();
  write_file_atomic(path, "a,b\n1,2\n");
  EXPECT_EQ(read_file(path), "a,b\n1,2\n");
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);
}
