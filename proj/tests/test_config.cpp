#include <doctest.h>

#include <algorithm>

#include "gpq/config.hpp"
#include "gpq/errors.hpp"

using namespace gpq;

namespace {

std::vector<std::string> errors_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.messages();
  }
  return {};
}

bool mentions(const std::vector<std::string>& errs, const std::string& needle) {
  return std::any_of(errs.begin(), errs.end(), [&](const std::string& m) { return m.find(needle) != std::string::npos; });
}

}  // namespace

TEST_SUITE("cli_io") {
  TEST_CASE("minimal configs receive defaults") {
    const RunConfig r = parse_config(R"({"mode": "radial"})");
    CHECK(r.mode == Mode::Radial);
    CHECK(r.q == std::vector<double>{2.0});
    CHECK(r.radial_n == 8001);
    const RunConfig c = parse_config(R"({"mode": "campaign"})");
    CHECK(c.schedule == std::vector<double>{1.6, 1.75, 1.9});
    CHECK(c.ratio == std::vector<double>{1.2});
    CHECK(c.grid_n == 257);
    const CampaignSettings s = make_campaign_settings(c);
    CHECK(s.ratio == 1.2);
    CHECK(s.grid == Grid2D::make(8.0, 257));
    CHECK(s.flow.method == FlowMethod::Preconditioned);
  }

  TEST_CASE("range errors name the permitted range") {
    CHECK(mentions(errors_of(R"({"mode": "radial", "q": [2.1]})"), "(0, 2]"));
    CHECK(mentions(errors_of(R"({"mode": "free", "q": [2.0]})"), "(0, 2)"));
    CHECK(mentions(errors_of(R"({"mode": "radial", "q": 0})"), "outside"));
    CHECK(errors_of(R"({"mode": "radial", "q": 2})").empty());
  }

  TEST_CASE("short and unordered schedules") {
    CHECK(mentions(errors_of(R"({"mode": "campaign", "schedule": [1.9]})"), "insufficient points"));
    CHECK(mentions(errors_of(R"({"mode": "campaign", "schedule": [1.6, 1.9, 1.75]})"), "ascending"));
    CHECK(mentions(errors_of(R"({"mode": "campaign", "schedule": [1.6, 1.75, 2.0]})"), "(0, 2)"));
  }

  TEST_CASE("unknown keys, bad types and malformed documents") {
    CHECK(mentions(errors_of(R"({"mode": "radial", "qq": [1]})"), "qq: unknown key"));
    CHECK(mentions(errors_of(R"({"mode": "radial", "radial_grid": {"n": 10, "h": 1}})"), "radial_grid.h"));
    CHECK(mentions(errors_of(R"({"mode": "radial", "q": "two"})"), "q:"));
    CHECK(mentions(errors_of(R"({"mode": "sideways"})"), "mode"));
    CHECK(mentions(errors_of(R"({"q": [1]})"), "mode"));
    CHECK(mentions(errors_of("{not json"), "malformed JSON"));
    CHECK(mentions(errors_of(R"({"mode": "report"})"), "input"));
    CHECK(mentions(errors_of(R"({"mode": "minimize", "flow": {"scheme": "magic"}})"), "flow.scheme"));
  }

  TEST_CASE("every problem is reported at once") {
    const auto errs = errors_of(R"({"mode": "minimize", "q": [2.5], "grid": {"L": -1}, "bogus": 1,
                                    "seeds": [{"name": "a"}, {"name": "a"}]})");
    CHECK(errs.size() >= 4);
    CHECK(mentions(errs, "bogus"));
    CHECK(mentions(errs, "grid.L"));
    CHECK(mentions(errs, "duplicate seed name"));
    CHECK(mentions(errs, "(0, 2)"));
  }

  TEST_CASE("potential errors surface as config errors") {
    CHECK(mentions(errors_of(R"({"mode": "minimize", "potential": {"wells": []}})"), "potential.wells"));
    CHECK(mentions(errors_of(R"({"mode": "minimize", "potential": {"modulation": "1 + x"}})"), "potential"));
    CHECK(mentions(errors_of(R"({"mode": "minimize",
        "potential": {"wells": [{"center": [-1, 0], "exponent": 2}, {"center": [1, 0], "exponent": 4}]},
        "symmetry": {"type": "reflection"}})"),
                   "symmetry"));
  }

  TEST_CASE("canonical serialization round trips") {
    const char* docs[] = {
        R"({"mode": "radial", "q": [1, 1.5], "random_tests": 7})",
        R"({"mode": "free", "q": [1.2], "ratio": [1.1, 3]})",
        R"J({"mode": "minimize", "q": 1.9, "a": 12.5, "seeds": [{"name": "g", "type": "gaussian", "center": [1, 0], "width": 0.3}],
            "potential": {"wells": [{"center": [-1, 0], "exponent": 2}, {"center": [1, 0], "exponent": 2}], "modulation": "1 + 0.5*exp(-r^2)"},
            "symmetry": {"type": "reflection", "normal_angle": 0}})J",
        R"({"mode": "campaign", "schedule": [1.5, 1.7, 1.8, 1.9], "tolerances": {"window": [0.2, 5]}, "output": "x"})",
        R"({"mode": "report", "input": "somewhere/report.json"})",
    };
    for (const char* d : docs) {
      CAPTURE(d);
      const RunConfig c = parse_config(d);
      const RunConfig back = parse_config(to_json(c).dump());
      CHECK(back == c);
      CHECK(to_json(back) == to_json(c));
      CHECK(config_hash(back) == config_hash(c));
    }
  }

  TEST_CASE("config hash ignores the output location and key order") {
    const RunConfig a = parse_config(R"({"mode": "campaign", "ratio": 1.3, "output": "one"})");
    const RunConfig b = parse_config(R"({"output": "two", "ratio": 1.3, "mode": "campaign"})");
    const RunConfig c = parse_config(R"({"mode": "campaign", "ratio": 1.4})");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(c));
    CHECK(config_hash(a).size() == 64);
  }

  TEST_CASE("sha256 test vectors") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  }

  TEST_CASE("load_config on the shipped configurations") {
    for (const char* name : {"radial", "free", "harmonic_campaign", "flattest_well", "symmetric_double_well", "modulated_trap"}) {
      CAPTURE(name);
      CHECK_NOTHROW(load_config(std::string(GPQ_SOURCE_DIR) + "/configs/" + name + ".json"));
    }
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  }
}
