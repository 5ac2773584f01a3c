#include <string>

#include "doctest.h"

#include "jano/config.hpp"

using namespace jano;

namespace {

const char* kMinimalScene = R"({
  "seed": 3,
  "scene": {
    "channels": 2, "frames": 4, "height": 16, "width": 16,
    "regions": [
      {"box": [0, 4, 0, 16, 0, 16], "pattern": "constant", "amplitude": 0.5},
      {"box": [0, 4, 0, 8, 0, 8], "pattern": "sinusoid", "amplitude": 2.0, "freq": 0.375}
    ]
  },
  "trajectory": {"steps": 50, "mode": "interpolate"},
  "analyzer": {"warmup_steps": 5, "block": [2, 8, 8]},
  "schedule": {
    "total_steps": 50, "warmup_steps": 6,
    "static_threshold": 0.4, "static_interval": 6,
    "moderate_threshold": 0.6, "moderate_interval": 4
  }
})";

}  // namespace

TEST_CASE("a minimal config parses") {
    const RunConfig cfg = RunConfig::parse_text(kMinimalScene);
    CHECK(cfg.seed == 3);
    REQUIRE(cfg.scene.has_value());
    CHECK(cfg.scene->regions.size() == 2);
    CHECK(cfg.scene->regions[1].kind == PatternKind::Sinusoid);
    CHECK(cfg.trajectory.steps == 50);
    CHECK(cfg.require_analyzer().warmup_steps == 5);
    CHECK(cfg.require_schedule().cooldown_steps == 2);  // defaulted
    CHECK(cfg.resolve_scenes().size() == 1);
    CHECK_THROWS_AS(cfg.require_model(), ConfigError);
}

TEST_CASE("unknown keys are rejected with their path") {
    const std::string bad = R"({"seed": 1, "scene": {"channels": 1, "frames": 1,
      "height": 4, "width": 4, "bogus": 2,
      "regions": [{"box": [0,1,0,4,0,4], "pattern": "constant", "amplitude": 1.0}]}})";
    try {
        RunConfig::parse_text(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("scene.bogus") != std::string::npos);
    }
}

TEST_CASE("missing required keys name the path") {
    const std::string missing = R"({"seed": 1, "scene": {"channels": 1, "frames": 1,
      "height": 4, "width": 4,
      "regions": [{"box": [0,1,0,4,0,4], "pattern": "constant"}]}})";
    try {
        RunConfig::parse_text(missing);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("regions[0].amplitude") != std::string::npos);
    }
    CHECK_THROWS_AS(RunConfig::parse_text(R"({"seed": 1})"), ConfigError);
}

TEST_CASE("enum-like fields validate their values") {
    const std::string bad_mode = R"({"scene": {"channels": 1, "frames": 1, "height": 4,
      "width": 4, "regions": [{"box": [0,1,0,4,0,4], "pattern": "constant", "amplitude": 1}]},
      "trajectory": {"mode": "warp"}})";
    CHECK_THROWS_AS(RunConfig::parse_text(bad_mode), ConfigError);

    const std::string bad_pattern = R"({"scene": {"channels": 1, "frames": 1, "height": 4,
      "width": 4, "regions": [{"box": [0,1,0,4,0,4], "pattern": "plaid", "amplitude": 1}]}})";
    CHECK_THROWS_AS(RunConfig::parse_text(bad_pattern), ConfigError);
}

TEST_CASE("schedule validation propagates as config errors") {
    const std::string bad = R"({"scene": {"channels": 1, "frames": 1, "height": 4, "width": 4,
      "regions": [{"box": [0,1,0,4,0,4], "pattern": "constant", "amplitude": 1}]},
      "schedule": {"total_steps": 10, "warmup_steps": 9,
        "static_threshold": 0.4, "static_interval": 6,
        "moderate_threshold": 0.6, "moderate_interval": 4}})";
    CHECK_THROWS_AS(RunConfig::parse_text(bad), ConfigError);
}

TEST_CASE("suite presets resolve to scene lists") {
    const RunConfig cfg = RunConfig::parse_text(
        R"({"seed": 9, "suite": {"preset": "standard", "count": 4}})");
    const auto scenes = cfg.resolve_scenes();
    CHECK(scenes.size() == 4);
    for (const SceneSpec& s : scenes) CHECK_NOTHROW(s.validate());

    CHECK_THROWS_AS(
        RunConfig::parse_text(R"({"suite": {"preset": "fancy", "count": 1}})"),
        ConfigError);
}

TEST_CASE("malformed json is a config error") {
    CHECK_THROWS_AS(RunConfig::parse_text("{nope"), ConfigError);
}
