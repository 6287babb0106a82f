#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "slicearena/config.hpp"
#include "slicearena/errors.hpp"

namespace slicearena {
namespace {

constexpr const char* kMinimal = R"(
kappa = 50
[datacenter]
id = 1
cpu = 8
memory = 16
storage = 100
power_lo = 10
power_hi = 20
[slice]
id = 3
cpu = 1
memory = 2
storage = 3
alpha = 1
mu = 2
t_max = 1.07
arrival_mean = 2
departure_prob = 0.5
)";

TEST(LoadConfig, ReferenceConfig) {
  const auto sc = testing::reference_scenario();
  ASSERT_EQ(sc.dc_count(), 2);
  ASSERT_EQ(sc.slice_count(), 2);
  for (const auto& dc : sc.data_centers) {
    EXPECT_TRUE((dc.capacity == make_resources(32, 50, 5000)).all());
    EXPECT_EQ(dc.power_lo, 100);
    EXPECT_EQ(dc.power_hi, 200);
  }
  EXPECT_TRUE((sc.slices[0].per_request_demand == make_resources(2, 7, 30)).all());
  EXPECT_TRUE((sc.slices[1].per_request_demand == make_resources(3, 5, 50)).all());
  for (const auto& s : sc.slices) {
    EXPECT_EQ(s.departure_prob, 0.3);
    EXPECT_EQ(s.chain_capacity, 8);
    EXPECT_EQ(s.arrival_mean, 6);
  }
  EXPECT_EQ(sc.horizon, 200);
  EXPECT_EQ(sc.seeds.size(), 20u);
  EXPECT_EQ(sc.arrival_sweep, (std::vector<double>{2, 4, 6, 8, 10, 12}));
}

TEST(LoadConfig, DefaultsFilled) {
  const auto sc = parse_config(kMinimal);
  EXPECT_EQ(sc.kappa, 50);
  EXPECT_EQ(sc.penalty, 1000);
  EXPECT_EQ(sc.horizon, 200);
  EXPECT_EQ(sc.power_mode, PowerMode::utilization);
  EXPECT_EQ(sc.slices[0].priority, 1.0);
  EXPECT_EQ(sc.slices[0].chain_capacity, 8);
  EXPECT_EQ(sc.slices[0].slice_id, 3);
}

TEST(LoadConfig, EmptyFileHasNoDataCenters) {
  try {
    parse_config("");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "datacenter");
  }
}

TEST(LoadConfig, DepartureProbOutOfRange) {
  std::string text = kMinimal;
  text.replace(text.find("departure_prob = 0.5"), 20, "departure_prob = 1.3");
  try {
    parse_config(text);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(e.field().find("departure_prob"), std::string::npos);
  }
}

TEST(LoadConfig, UnknownKeyReportsLine) {
  std::string text = std::string(kMinimal) + "colour = blue\n";
  try {
    parse_config(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 20u);
  }
}

TEST(LoadConfig, MalformedLines) {
  EXPECT_THROW(parse_config("kappa 5\n"), ParseError);
  EXPECT_THROW(parse_config("kappa = five\n"), ParseError);
  EXPECT_THROW(parse_config("[rack]\n"), ParseError);
  EXPECT_THROW(parse_config("kappa = 1\nkappa = 2\n"), ParseError);
}

TEST(LoadConfig, MissingSliceKeyNamesField) {
  std::string text = kMinimal;
  text.erase(text.find("alpha = 1\n"), 10);
  try {
    parse_config(text);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "slice.alpha");
  }
}

TEST(LoadConfig, SeedListsAndRanges) {
  EXPECT_EQ(parse_config(std::string("seeds = 3..5\n") + kMinimal).seeds, (std::vector<std::uint64_t>{3, 4, 5}));
  EXPECT_EQ(parse_config(std::string("seeds = 9, 2\n") + kMinimal).seeds, (std::vector<std::uint64_t>{9, 2}));
  EXPECT_EQ(parse_config(std::string("power_mode = always-on\n") + kMinimal).power_mode, PowerMode::always_on);
}

TEST(LoadConfig, MissingFile) { EXPECT_THROW(load_config("/nonexistent/slice.cfg"), IoError); }

} // namespace
} // namespace slicearena
