#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ilmc/config.hpp"
#include "ilmc/errors.hpp"

namespace ilmc {
namespace {

KeyValueConfig parse_text(const std::string& text) {
  std::istringstream in(text);
  return KeyValueConfig::parse(in);
}

TEST(KeyValueConfig, ParsesCommentsAndWhitespace) {
  const auto kv = parse_text(
      "# header\n"
      "\n"
      "potential = gaussian   # trailing\n"
      "  h_list=0.2, 0.1 ,0.05\n"
      "replicas = 100\n"
      "drift_only = yes\n");
  EXPECT_EQ(kv.get_string("potential", ""), "gaussian");
  EXPECT_EQ(kv.get_list("h_list", {}), (std::vector<double>{0.2, 0.1, 0.05}));
  EXPECT_EQ(kv.get_int("replicas", 0), 100);
  EXPECT_TRUE(kv.get_bool("drift_only", false));
  EXPECT_EQ(kv.values().size(), 4u);
}

TEST(KeyValueConfig, FallbacksForMissingKeys) {
  const auto kv = parse_text("");
  EXPECT_FALSE(kv.has("seed"));
  EXPECT_EQ(kv.get_uint("seed", 7), 7u);
  EXPECT_DOUBLE_EQ(kv.get_double("kappa", 2.5), 2.5);
  EXPECT_EQ(kv.get_list("h_list", {0.1}), std::vector<double>{0.1});
}

TEST(KeyValueConfig, LaterKeysWin) {
  auto kv = parse_text("seed = 1\nseed = 2\n");
  EXPECT_EQ(kv.get_uint("seed", 0), 2u);
  kv.apply_override("seed=3");
  EXPECT_EQ(kv.get_uint("seed", 0), 3u);
}

TEST(KeyValueConfig, MalformedInputIsAConfigError) {
  EXPECT_THROW(parse_text("just words\n"), ConfigError);
  EXPECT_THROW(parse_text("= 3\n"), ConfigError);
  const auto kv = parse_text("a = x\nb = 1.5\nc = -1\nd = maybe\ne = 1,q\n");
  EXPECT_THROW(kv.get_double("a", 0), ConfigError);
  EXPECT_THROW(kv.get_int("b", 0), ConfigError);
  EXPECT_THROW(kv.get_uint("c", 0), ConfigError);
  EXPECT_THROW(kv.get_bool("d", false), ConfigError);
  EXPECT_THROW(kv.get_list("e", {}), ConfigError);
  KeyValueConfig empty;
  EXPECT_THROW(empty.apply_override("novalue"), ConfigError);
  EXPECT_THROW(empty.apply_override("=1"), ConfigError);
}

TEST(KeyValueConfig, LoadFromFile) {
  const std::string path = ::testing::TempDir() + "ilmc_config_test.cfg";
  {
    std::ofstream out(path);
    out << "kappa = 3\n";
  }
  EXPECT_DOUBLE_EQ(KeyValueConfig::load(path).get_double("kappa", 0), 3.0);
  std::remove(path.c_str());
  EXPECT_THROW(KeyValueConfig::load(path), ConfigError);
}

TEST(NumberList, EmptyAndSingle) {
  EXPECT_TRUE(parse_number_list("").empty());
  EXPECT_TRUE(parse_number_list(" , ").empty());
  EXPECT_EQ(parse_number_list("1e-3"), std::vector<double>{1e-3});
}

}  // namespace
}  // namespace ilmc
