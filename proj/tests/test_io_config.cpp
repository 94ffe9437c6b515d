#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "nuhlab/config.hpp"
#include "nuhlab/io.hpp"
#include "nuhlab/rng.hpp"

using namespace nuhlab;
namespace fs = std::filesystem;

TEST(Sha256, KnownAnswers) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

// Property: formatted doubles parse back to the same bits.
TEST(FormatDouble, RoundTrips) {
  Stream rng(3, 0);
  for (int i = 0; i < 5000; ++i) {
    double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-20, 20));
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Csv, QuotesSpecialCells) {
  CsvTable t({"a", "b"});
  t.row({"1", "x,y"}).row({"say \"hi\"", "plain"});
  EXPECT_EQ(t.str(), "a,b\n1,\"x,y\"\n\"say \"\"hi\"\"\",plain\n");
  EXPECT_THROW(t.row({"only one"}), std::invalid_argument);
}

TEST(Pgm, RoundTripBothEncodings) {
  Graymap g = graymap_from_values(3, 2, {0.0, 0.5, 1.0, std::nan(""), 2.0, -1.0}, 0.0, 1.0);
  EXPECT_EQ(g.pixels, (std::vector<std::uint8_t>{1, 128, 255, 0, 255, 1}));
  for (bool binary : {true, false}) {
    std::string bytes = g.encode(binary);
    EXPECT_EQ(bytes.substr(0, 2), binary ? "P5" : "P2");
    Graymap back = Graymap::decode(bytes);
    EXPECT_EQ(back.width, 3);
    EXPECT_EQ(back.height, 2);
    EXPECT_EQ(back.pixels, g.pixels);
  }
}

TEST(Config, SerializeParseRoundTrip) {
  RunConfig c;
  c.seed = 42;
  c.variant = "t6";
  c.ak_q = {2, 6};
  c.ak_subdivision = {2, 1};
  c.sw_amplitude = 0.0125;
  RunConfig back = parse_config(serialize_config(c));
  EXPECT_TRUE(back == c);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_NE(config_hash(c), config_hash(RunConfig{}));
}

TEST(Config, CommentsAndBlankLines) {
  RunConfig c = parse_config("# header\n\nseed = 7   # trailing\n  sw.amplitude=0.02\n");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_DOUBLE_EQ(c.sw_amplitude, 0.02);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("nonsense.key = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("seed 5\n"), ConfigError);
  EXPECT_THROW(parse_config("lyapunov.n = ten\n"), ConfigError);
  EXPECT_THROW(parse_config("eps = 0.9\n"), ConfigError);
  EXPECT_THROW(parse_config("access.depth = 9\n"), ConfigError);
  EXPECT_THROW(parse_config("variant = t5\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/run.cfg"), ConfigError);
}

TEST(Config, EveryKeyIsDescribedAndSerialized) {
  auto entries = config_entries(RunConfig{});
  auto keys = describe_config_keys();
  EXPECT_EQ(entries.size(), keys.size());
  for (const auto& [k, doc] : keys) {
    EXPECT_TRUE(entries.count(k)) << k;
    EXPECT_FALSE(doc.empty()) << k;
  }
}

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("nuhlab_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(RunDirectory, ManifestAndAudit) {
  fs::path root = scratch("rundir");
  {
    RunDirectory d(root.string(), "hash1", "seed = 1\n");
    d.write("a/b.csv", "x\n1\n");
    d.record_check("c", true, "fine");
    d.write_manifest();
  }
  EXPECT_TRUE(RunDirectory::audit(root.string()).empty());
  auto listed = RunDirectory::listed_files(root.string());
  EXPECT_EQ(listed.size(), 2u);
  EXPECT_EQ(listed["a/b.csv"], sha256_hex("x\n1\n"));

  std::ofstream(root / "stray.txt") << "?";
  std::ofstream(root / "a/b.csv") << "changed";
  auto problems = RunDirectory::audit(root.string());
  ASSERT_EQ(problems.size(), 2u);
  EXPECT_EQ(problems[0], "checksum mismatch: a/b.csv");
  EXPECT_EQ(problems[1], "orphan: stray.txt");

  EXPECT_THROW(RunDirectory(root.string(), "hash2", ""), std::runtime_error);
  fs::remove_all(root);
}

TEST(RunDirectory, ReopenMergesEntries) {
  fs::path root = scratch("merge");
  {
    RunDirectory d(root.string(), "h", "");
    d.write("one.txt", "1");
    d.write_manifest();
  }
  {
    RunDirectory d(root.string(), "h", "");
    d.write("two.txt", "2");
    d.write_manifest();
  }
  EXPECT_EQ(RunDirectory::listed_files(root.string()).size(), 3u);
  EXPECT_TRUE(RunDirectory::audit(root.string()).empty());
  fs::remove_all(root);
}
