#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scatrel/config.hpp"
#include "scatrel/errors.hpp"

using namespace scatrel;

TEST_CASE("defaults parse from an empty object") {
  const auto c = parse_config("{}");
  CHECK(c.potential.kind == "gaussian");
  CHECK(c.lambda == 0.5);
  CHECK(c.dimension == 2);
  CHECK(c.h_values.size() == 5);
}

TEST_CASE("round-trip is the identity") {
  const auto c = parse_config(R"({
    "potential": {"kind": "yukawa-smoothed", "amplitude": 0.3, "width": 2.0, "smoothing": 0.5},
    "lambda": 0.7,
    "omega": {"lo": 0.1, "hi": 0.4, "count": 7},
    "h_values": [0.3, 0.2, 0.1],
    "seed": 42
  })");
  const auto text = serialize_config(c);
  const auto c2 = parse_config(text);
  CHECK(serialize_config(c2) == text);
  CHECK(config_hash(c2) == config_hash(c));
}

TEST_CASE("hash distinguishes configs") {
  auto a = parse_config("{}");
  auto b = a;
  b.lambda = 0.6;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("invariant violations are named") {
  CHECK_THROWS_AS(parse_config(R"({"lambda": -1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"h_values": [0.1, 0.2]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"h_values": []})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"omega": {"lo": 1.0, "hi": 0.0, "count": 3}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"dimension": 4})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"typo": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"potential": {"kind": "nope"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  try {
    parse_config(R"({"omega": {"lo": 1.0, "hi": 0.0, "count": 3}})");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("omega") != std::string::npos);
  }
}

TEST_CASE("grid points span the range inclusively") {
  const auto pts = grid_points({0.0, 1.0, 5});
  REQUIRE(pts.size() == 5);
  CHECK(pts.front() == 0.0);
  CHECK(pts.back() == 1.0);
  CHECK(pts[2] == doctest::Approx(0.5));
  CHECK(grid_points({2.0, 2.0, 1}).size() == 1);
}

TEST_CASE("potential factory builds the configured model") {
  PotentialConfig pc;
  pc.kind = "gaussian";
  pc.amplitude = 1.0;
  pc.width = 2.0;
  const auto model = make_potential(pc, 2);
  CHECK(model.kind() == PotentialKind::Gaussian);
  CHECK(model.radial_value(0.0) == doctest::Approx(1.0));
}
