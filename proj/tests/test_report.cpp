#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gpq/config.hpp"
#include "gpq/errors.hpp"
#include "gpq/report.hpp"
#include "support.hpp"

using namespace gpq;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// A small campaign shared by the report tests.
const CampaignReport& small_campaign() {
  static const CampaignReport rep = [] {
    CampaignSettings s;
    s.schedule = {1.5, 1.6, 1.7};
    s.grid = Grid2D::make(8.0, 129);
    return run_campaign(s, "test");
  }();
  return rep;
}

}  // namespace

TEST_SUITE("cli_io") {
  TEST_CASE("number formatting round trips exactly") {
    for (double v : {0.1, -1.0 / 3.0, 1e-300, 11.700896525}) CHECK(std::stod(format_double(v)) == v);
  }

  TEST_CASE("campaign CSV has a header and one row per point") {
    const auto pts = synthetic_free_points({1.6, 1.75, 1.9}, 1.2);
    const std::string csv = campaign_csv(pts);
    std::istringstream in(csv);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0].rfind("q,a,aq_star,", 0) == 0);
    const auto commas = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
    for (const auto& l : lines) CHECK(commas(l) == commas(lines[0]));
    CHECK(std::stod(lines[1].substr(0, lines[1].find(','))) == 1.6);
  }

  TEST_CASE("empty reports and unwritable directories are errors") {
    CampaignReport empty;
    CHECK_THROWS_AS(emit_report(empty, PotentialSpec::harmonic(), test::scratch("empty_report")), ParameterError);

    const std::string blocker = test::scratch("blocker");
    std::ofstream(blocker) << "not a directory";
    CHECK_THROWS(OutputCollector(blocker));
    CHECK_THROWS(OutputCollector(blocker + "/below"));
  }

  TEST_CASE("collector manifest lists every file exactly once") {
    const std::string dir = test::scratch("collector");
    OutputCollector out(dir);
    out.write("a.txt", "alpha");
    out.write("b.txt", "beta");
    out.write("a.txt", "alpha again");
    std::ofstream(out.path("c.bin")) << "gamma";
    out.adopt("c.bin");
    const auto entries = out.finish();
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].path == "a.txt");
    CHECK(entries[0].sha256 == sha256_hex("alpha again"));
    CHECK(entries[0].bytes == 11);
    const auto manifest = nlohmann::json::parse(slurp(fs::path(dir) / "manifest.json"));
    CHECK(manifest.at("files").size() == 3);
  }

  TEST_CASE("campaign report: manifest, determinism and round trip") {
    const CampaignReport& rep = small_campaign();
    REQUIRE(rep.points.size() == 3);
    const std::string d1 = test::scratch("report_a");
    const std::string d2 = test::scratch("report_b");
    emit_report(rep, PotentialSpec::harmonic(), d1);
    emit_report(rep, PotentialSpec::harmonic(), d2);

    const auto manifest = nlohmann::json::parse(slurp(fs::path(d1) / "manifest.json"));
    std::set<std::string> listed;
    for (const auto& f : manifest.at("files")) {
      const std::string path = f.at("path");
      listed.insert(path);
      const std::string content = slurp(fs::path(d1) / path);
      CHECK(f.at("sha256") == sha256_hex(content));
      CHECK(f.at("bytes") == content.size());
    }
    std::set<std::string> present;
    for (const auto& e : fs::directory_iterator(d1))
      if (e.path().filename() != "manifest.json") present.insert(e.path().filename().string());
    CHECK(listed == present);
    for (const char* name : {"campaign.csv", "verdicts.json", "report.json", "scaled_energy.svg", "kinetic.svg", "gap.svg",
                             "profile_overlay.svg", "trajectory.svg", "minimizer.svg"})
      CHECK(listed.count(name) == 1);

    for (const auto& name : listed) {
      CAPTURE(name);
      CHECK(slurp(fs::path(d1) / name) == slurp(fs::path(d2) / name));
    }

    const CampaignReport back = campaign_report_from_json(nlohmann::json::parse(slurp(fs::path(d1) / "report.json")));
    CHECK(to_json(back) == to_json(rep));
    CHECK(campaign_csv(back.points) == campaign_csv(rep.points));
    CHECK(provenance_potential(back.provenance).wells().size() == 1);
  }

  TEST_CASE("radial and free modes write their outputs") {
    RunConfig r = parse_config(R"({"mode": "radial", "q": [1.5, 2], "radial_grid": {"n": 4001}, "random_tests": 10})");
    const std::string rd = test::scratch("mode_radial");
    std::ostringstream log;
    RunOptions opt;
    opt.log = &log;
    CHECK(run_mode(r, rd, opt) == 0);
    for (const char* f : {"radial.json", "profile_q1.5.csv", "profile_q2.csv", "profiles.svg", "config.json", "manifest.json"}) {
      CAPTURE(f);
      CHECK(fs::exists(fs::path(rd) / f));
    }
    CHECK(parse_config(slurp(fs::path(rd) / "config.json")) == r);

    RunConfig f = parse_config(R"({"mode": "free", "q": [1.0], "ratio": [1.5]})");
    const std::string fd = test::scratch("mode_free");
    CHECK(run_mode(f, fd, opt) == 0);
    CHECK(fs::exists(fs::path(fd) / "free.csv"));
    CHECK(fs::exists(fs::path(fd) / "free.json"));
  }

  TEST_CASE("report mode re-emits a stored campaign") {
    const std::string src = test::scratch("stored");
    emit_report(small_campaign(), PotentialSpec::harmonic(), src);
    RunConfig c = parse_config(R"({"mode": "report", "input": ")" + src + R"(/report.json"})");
    const std::string dst = test::scratch("reemitted");
    std::ostringstream log;
    RunOptions opt;
    opt.log = &log;
    const int code = run_mode(c, dst, opt);
    CHECK(code == (small_campaign().all_pass() ? 0 : 2));
    CHECK(slurp(fs::path(src) / "campaign.csv") == slurp(fs::path(dst) / "campaign.csv"));
    CHECK(slurp(fs::path(src) / "verdicts.json") == slurp(fs::path(dst) / "verdicts.json"));
  }
}
