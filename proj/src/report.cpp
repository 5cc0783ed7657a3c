#include "gpq/report.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "gpq/errors.hpp"
#include "gpq/svg.hpp"

namespace gpq {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- collector ----

OutputCollector::OutputCollector(std::string dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_))
    throw std::runtime_error(fmt::format("cannot create output directory '{}': {}", dir_, ec.message()));
  const fs::path probe = fs::path(dir_) / ".gpq-write-probe";
  {
    std::ofstream f(probe);
    if (!f) throw std::runtime_error(fmt::format("output directory '{}' is not writable", dir_));
  }
  fs::remove(probe, ec);
}

std::string OutputCollector::path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

void OutputCollector::write(const std::string& name, const std::string& content) {
  std::ofstream f(path(name), std::ios::binary | std::ios::trunc);
  f << content;
  f.close();
  if (!f) throw std::runtime_error(fmt::format("failed writing '{}'", path(name)));
  for (auto& e : entries_)
    if (e.path == name) {
      e = {name, sha256_hex(content), content.size()};
      return;
    }
  entries_.push_back({name, sha256_hex(content), content.size()});
}

void OutputCollector::write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

void OutputCollector::adopt(const std::string& name) {
  std::ifstream f(path(name), std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot read '{}'", path(name)));
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string content = ss.str();
  entries_.push_back({name, sha256_hex(content), content.size()});
}

std::vector<ManifestEntry> OutputCollector::finish() {
  std::vector<ManifestEntry> sorted = entries_;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  json files = json::array();
  for (const auto& e : sorted) files.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  const std::string text = json{{"files", files}}.dump(2) + "\n";
  std::ofstream f(path("manifest.json"), std::ios::binary | std::ios::trunc);
  f << text;
  f.close();
  if (!f) throw std::runtime_error(fmt::format("failed writing '{}'", path("manifest.json")));
  return sorted;
}

// ---- campaign report ----

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string campaign_csv(const std::vector<CampaignPoint>& pts) {
  std::string out =
      "q,a,aq_star,tau_q,eps_q,tilde_d_closed,tilde_d_quadrature,d,mu,residual,iterations,converged,kinetic,"
      "interaction,gap,potential_energy,scaled_energy,scaled_kinetic,scaled_mu,beta2,rescaled_mass,"
      "profile_l2_error,z_x,z_y,max_value,local_maxima,nearest_well,scaled_offset,seed\n";
  for (const auto& p : pts) {
    const double row[] = {p.q,         p.a,           p.aq_star,      p.tau_q,           p.eps_q,
                          p.tilde_d,   p.tilde_d_quadrature, p.d,     p.mu,              p.residual};
    for (double v : row) out += format_double(v) + ",";
    out += fmt::format("{},{},", p.iterations, p.converged ? 1 : 0);
    const double row2[] = {p.kinetic,      p.interaction, p.gap,           p.potential_energy,
                           p.scaled_energy, p.scaled_kinetic, p.scaled_mu, p.beta2,
                           p.rescaled_mass, p.profile_l2_error, p.z[0],    p.z[1],
                           p.max_value};
    for (double v : row2) out += format_double(v) + ",";
    out += fmt::format("{},{},{},{}\n", p.local_maxima, p.nearest_well, format_double(p.scaled_offset), p.seed);
  }
  return out;
}

json to_json(const CampaignReport& rep) {
  json points = json::array();
  for (const auto& p : rep.points) points.push_back(to_json(p));
  json skipped = json::array();
  for (const auto& s : rep.skipped) skipped.push_back({{"q", s.q}, {"reason", s.reason}});
  json verdicts = json::array();
  for (const auto& v : rep.verdicts) verdicts.push_back(to_json(v));
  json sym = nullptr;
  if (rep.symmetry)
    sym = {{"broken", rep.symmetry->broken},
           {"distance", rep.symmetry->distance},
           {"displacement", rep.symmetry->displacement},
           {"witness", rep.symmetry->witness}};
  return {{"points", points},
          {"skipped", skipped},
          {"verdicts", verdicts},
          {"symmetry", sym},
          {"overlay", {{"x", rep.overlay.x}, {"wbar", rep.overlay.wbar}, {"limit", rep.overlay.limit}}},
          {"provenance", rep.provenance}};
}

CampaignReport campaign_report_from_json(const json& j) {
  CampaignReport rep;
  for (const auto& p : j.at("points")) rep.points.push_back(campaign_point_from_json(p));
  for (const auto& s : j.at("skipped")) rep.skipped.push_back({s.at("q").get<double>(), s.at("reason").get<std::string>()});
  for (const auto& v : j.at("verdicts")) {
    Verdict out;
    v.at("name").get_to(out.name);
    v.at("applicable").get_to(out.applicable);
    v.at("pass").get_to(out.pass);
    v.at("detail").get_to(out.detail);
    v.at("series").get_to(out.series);
    rep.verdicts.push_back(out);
  }
  if (j.contains("symmetry") && !j.at("symmetry").is_null()) {
    const json& s = j.at("symmetry");
    SymmetryReport sr;
    s.at("broken").get_to(sr.broken);
    s.at("distance").get_to(sr.distance);
    s.at("displacement").get_to(sr.displacement);
    s.at("witness").get_to(sr.witness);
    rep.symmetry = sr;
  }
  j.at("overlay").at("x").get_to(rep.overlay.x);
  j.at("overlay").at("wbar").get_to(rep.overlay.wbar);
  j.at("overlay").at("limit").get_to(rep.overlay.limit);
  rep.provenance = j.at("provenance");
  return rep;
}

PotentialSpec provenance_potential(const json& provenance) {
  const json& s = provenance.at("settings");
  std::vector<Well> wells;
  for (const auto& w : s.at("wells"))
    wells.push_back(Well{{w.at("center").at(0).get<double>(), w.at("center").at(1).get<double>()},
                         w.at("exponent").get<double>()});
  std::optional<std::string> mod;
  if (s.contains("modulation") && !s.at("modulation").is_null()) mod = s.at("modulation").get<std::string>();
  return PotentialSpec(std::move(wells), mod);
}

namespace {

constexpr double kInvE = 0.36787944117144233;

std::vector<double> column(const std::vector<CampaignPoint>& pts, double CampaignPoint::*m) {
  std::vector<double> out;
  for (const auto& p : pts) out.push_back(p.*m);
  return out;
}

Grid2D provenance_grid(const json& provenance, const PotentialSpec&) {
  if (provenance.contains("settings") && provenance.at("settings").contains("grid")) {
    const json& g = provenance.at("settings").at("grid");
    return Grid2D::make(g.at("L").get<double>(), g.at("n").get<std::size_t>());
  }
  return Grid2D::make(8.0, 257);
}

}  // namespace

std::vector<ManifestEntry> emit_report(const CampaignReport& rep, const PotentialSpec& V, const std::string& dir) {
  if (rep.points.empty()) throw ParameterError("cannot emit a campaign report without points");
  OutputCollector out(dir);
  out.write("campaign.csv", campaign_csv(rep.points));
  json verdicts = json::array();
  for (const auto& v : rep.verdicts) verdicts.push_back(to_json(v));
  out.write_json("verdicts.json", {{"all_pass", rep.all_pass()}, {"verdicts", verdicts}});
  out.write_json("report.json", to_json(rep));

  const std::vector<double> qs = column(rep.points, &CampaignPoint::q);
  svg::LineChart energy{"Scaled energy", "q", "(2/(2-q)) eps^2 d", {}, {}};
  energy.series.push_back({"campaign", qs, column(rep.points, &CampaignPoint::scaled_energy)});
  energy.references.push_back({"-1/e", -kInvE});
  out.write("scaled_energy.svg", svg::render(energy));

  svg::LineChart kin{"Rescaled kinetic energy", "q", "beta^2", {}, {}};
  kin.series.push_back({"beta^2", qs, column(rep.points, &CampaignPoint::beta2)});
  kin.references.push_back({"1/e", kInvE});
  out.write("kinetic.svg", svg::render(kin));

  svg::LineChart gap{"Energy gap and trapping energy", "q", "", {}, {}};
  gap.series.push_back({"d - tilde d", qs, column(rep.points, &CampaignPoint::gap)});
  gap.series.push_back({"int V u^2", qs, column(rep.points, &CampaignPoint::potential_energy), "#2ca02c"});
  gap.references.push_back({"0", 0.0, "#7f7f7f"});
  out.write("gap.svg", svg::render(gap));

  svg::LineChart overlay{fmt::format("Profile at q = {}", rep.points.back().q), "y (x-axis section)", "", {}, {}};
  overlay.series.push_back({"rescaled minimizer", rep.overlay.x, rep.overlay.wbar, "#1f77b4", false});
  overlay.series.push_back({"limit profile", rep.overlay.x, rep.overlay.limit, "#ff7f0e", false});
  out.write("profile_overlay.svg", svg::render(overlay));

  std::vector<svg::Marker> path;
  for (const auto& p : rep.points) path.push_back({p.z[0], p.z[1]});
  const Grid2D grid = provenance_grid(rep.provenance, V);
  out.write("trajectory.svg", svg::heatmap(V.sample(grid), "Maximum point over V", path, true));
  if (rep.final_field)
    out.write("minimizer.svg", svg::heatmap(*rep.final_field, fmt::format("Minimizer at q = {}", rep.points.back().q)));
  return out.finish();
}

// ---- modes ----

double random_gn_margin(const GroundStateRecord& rec, std::uint64_t seed, std::size_t count) {
  const RadialGrid& grid = rec.profile.grid;
  const double q = rec.q();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(0.1, 2.0), rate(0.2, 3.0);
  std::uniform_int_distribution<int> terms(1, 3);
  double worst = INFINITY;
  std::vector<double> f(grid.n), df(grid.n), tmp(grid.n);
  for (std::size_t t = 0; t < count; ++t) {
    const int k = terms(rng);
    std::vector<std::pair<double, double>> parts;
    for (int i = 0; i < k; ++i) parts.emplace_back(coef(rng), rate(rng));
    for (std::size_t i = 0; i < grid.n; ++i) {
      const double r = grid.node(i);
      f[i] = df[i] = 0.0;
      for (const auto& [c, a] : parts) {
        const double e = c * std::exp(-a * r * r);
        f[i] += e;
        df[i] -= 2.0 * a * r * e;
      }
    }
    for (std::size_t i = 0; i < grid.n; ++i) tmp[i] = f[i] * f[i];
    const double M = radial_integral(tmp, grid);
    for (std::size_t i = 0; i < grid.n; ++i) tmp[i] = df[i] * df[i];
    const double K = radial_integral(tmp, grid);
    for (std::size_t i = 0; i < grid.n; ++i) tmp[i] = std::pow(f[i], q + 2.0);
    const double I = radial_integral(tmp, grid);
    const double margin = (rec.gn_constant * std::pow(K, q / 2.0) * M - I) / I;
    worst = std::min(worst, margin);
  }
  return worst;
}

namespace {

std::ostream& log_of(const RunOptions& opt) { return opt.log ? *opt.log : std::cerr; }

void say(const RunOptions& opt, const std::string& line) {
  if (opt.verbose) log_of(opt) << line << "\n";
}

void verdict_line(const RunOptions& opt, const std::string& name, bool pass, const std::string& detail) {
  log_of(opt) << fmt::format("{} {}: {}\n", pass ? "PASS" : "FAIL", name, detail);
}

std::string q_tag(double q) { return fmt::format("q{}", q); }

GroundStateOptions gs_options(const RunConfig& cfg) {
  GroundStateOptions o;
  o.tol_s = cfg.tol_s;
  return o;
}

}  // namespace

int run_radial(const RunConfig& cfg, OutputCollector& out, const RunOptions& opt) {
  const RadialGrid grid = make_radial_grid(cfg);
  json records = json::array();
  bool ok = true;
  svg::LineChart chart{"Radial ground states", "r", "u(r)", {}, {}};
  const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
  std::size_t idx = 0;
  for (double q : cfg.q) {
    const auto t0 = std::chrono::steady_clock::now();
    const GroundStateRecord rec = find_ground_state(q, grid, gs_options(cfg));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const PohozaevResiduals res = pohozaev_residuals(rec);
    const double gn = gn_equality_check(rec);
    const double margin = random_gn_margin(rec, cfg.rng_seed + idx, cfg.random_tests);
    json j = to_json(rec);
    j["pohozaev_kinetic_vs_mass"] = res.kinetic_vs_mass;
    j["pohozaev_mass_vs_interaction"] = res.mass_vs_interaction;
    j["gn_equality_defect"] = gn;
    j["random_tests"] = cfg.random_tests;
    if (cfg.random_tests > 0) j["random_gn_min_margin"] = margin;
    records.push_back(j);
    const bool pass = res.kinetic_vs_mass < 1e-6 && res.mass_vs_interaction < 1e-6 && gn < 1e-6 &&
                      (cfg.random_tests == 0 || margin >= -1e-9);
    ok = ok && pass;
    verdict_line(opt, fmt::format("radial q={}", q), pass,
                 fmt::format("aq*={:.10g} pohozaev=({:.2e}, {:.2e}) gn={:.2e} random margin={:.3e} ({:.2f} s)",
                             rec.aq_star, res.kinetic_vs_mass, res.mass_vs_interaction, gn, margin, secs));
    std::ostringstream csv;
    write_profile_csv(csv, rec.profile);
    out.write(fmt::format("profile_{}.csv", q_tag(q)), csv.str());
    svg::Series s{fmt::format("q = {}", q), {}, {}, colors[idx % 6], false};
    for (std::size_t i = 0; i < grid.n; i += std::max<std::size_t>(1, grid.n / 400)) {
      if (grid.node(i) > 10.0) break;
      s.x.push_back(grid.node(i));
      s.y.push_back(rec.profile.values[i]);
    }
    chart.series.push_back(std::move(s));
    ++idx;
  }
  out.write_json("radial.json", {{"config_hash", config_hash(cfg)}, {"records", records}, {"all_pass", ok}});
  out.write("profiles.svg", svg::render(chart));
  return ok ? 0 : 2;
}

int run_free(const RunConfig& cfg, OutputCollector& out, const RunOptions& opt) {
  const RadialGrid grid = make_radial_grid(cfg);
  std::string csv = "q,ratio,a,aq_star,tau_q,eps_q,tilde_d_closed,tilde_d_quadrature,relative_error,scaled_energy\n";
  json rows = json::array();
  bool ok = true;
  for (double q : cfg.q) {
    const GroundStateRecord rec = find_ground_state(q, grid, gs_options(cfg));
    for (double ratio : cfg.ratio) {
      const FreeProblemParams p = FreeProblemParams::from_ratio(ratio, q, rec.aq_star);
      const ScalingRecord sc = scaling(p);
      const double quad = tilde_energy_quadrature(tilde_minimizer_profile(rec, p), p);
      const double rel = std::abs(quad - sc.tilde_d) / std::abs(sc.tilde_d);
      const double scaled = 2.0 / (2.0 - q) * sc.eps_q * sc.eps_q * sc.tilde_d;
      const bool pass = rel < 1e-5;
      ok = ok && pass;
      verdict_line(opt, fmt::format("free q={} ratio={}", q, ratio), pass,
                   fmt::format("tilde d={:.10g} quadrature={:.10g} rel={:.2e}", sc.tilde_d, quad, rel));
      const double vals[] = {q, ratio, p.a, rec.aq_star, sc.tau_q, sc.eps_q, sc.tilde_d, quad, rel, scaled};
      for (std::size_t k = 0; k < std::size(vals); ++k) csv += format_double(vals[k]) + (k + 1 < std::size(vals) ? "," : "\n");
      rows.push_back({{"q", q},
                      {"ratio", ratio},
                      {"a", p.a},
                      {"aq_star", rec.aq_star},
                      {"tau_q", sc.tau_q},
                      {"eps_q", sc.eps_q},
                      {"tilde_d_closed", sc.tilde_d},
                      {"tilde_d_quadrature", quad},
                      {"relative_error", rel},
                      {"scaled_energy", scaled}});
    }
  }
  out.write("free.csv", csv);
  out.write_json("free.json", {{"config_hash", config_hash(cfg)}, {"rows", rows}, {"all_pass", ok}});
  return ok ? 0 : 2;
}

int run_minimize(const RunConfig& cfg, OutputCollector& out, const RunOptions& opt) {
  const double q = cfg.q.at(0);
  const PotentialSpec V = make_potential(cfg);
  const Grid2D grid = make_grid(cfg);
  const FlowConfig flow = make_flow(cfg);
  const GroundStateRecord rec = find_ground_state(q, make_radial_grid(cfg), gs_options(cfg));
  const double a = cfg.a ? *cfg.a : cfg.ratio.at(0) * rec.aq_star;
  const FreeProblemParams p = FreeProblemParams::make(a, q, rec.aq_star);
  const double eps = eps_q(p);
  // below the threshold there is no concentration and no length to guard
  if (p.ratio() > 1.0) check_domain(eps, grid);

  std::vector<NamedSeed> seeds;
  auto add_free = [&](const std::string& name, Point c) {
    // the free profile needs a > aq*; use a unit Gaussian otherwise
    if (p.ratio() > 1.0) seeds.push_back({name, free_minimizer_seed(rec, p, c)});
    else seeds.push_back({name, GaussianSeed{c, 1.0}});
  };
  if (cfg.seeds.empty()) {
    for (std::size_t i = 0; i < V.wells().size(); ++i) add_free(fmt::format("free@well{}", i), V.wells()[i].center);
  } else {
    for (const auto& s : cfg.seeds) {
      if (s.type == "gaussian") seeds.push_back({s.name, GaussianSeed{s.center, s.width}});
      else add_free(s.name, s.center);
    }
  }
  if (!opt.seed_filter.empty()) {
    std::vector<NamedSeed> kept;
    for (const auto& name : opt.seed_filter) {
      auto it = std::find_if(seeds.begin(), seeds.end(), [&](const NamedSeed& s) { return s.name == name; });
      if (it == seeds.end()) throw ParameterError(fmt::format("unknown seed '{}'", name));
      kept.push_back(*it);
    }
    seeds = std::move(kept);
  }
  say(opt, fmt::format("minimize q={} a={} with {} seed(s)", q, a, seeds.size()));
  const std::vector<MinimizationResult> results =
      multi_seed_minimize(seeds, grid, V, a, q, flow, configured_threads());

  const FlatnessReport flat = flatness_classify(V);
  json lambdas = json::array();
  for (double l : flat.lambdas) lambdas.push_back(std::isfinite(l) ? json(l) : json(nullptr));
  json res_json = json::array();
  for (const auto& r : results) {
    json j = to_json(r);
    j["nearest_well"] = nearest_well(V, r.max_point);
    res_json.push_back(j);
  }

  bool ok = true;
  json checks = json::array();
  auto check = [&](const std::string& name, bool pass, const std::string& detail) {
    ok = ok && pass;
    checks.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
    verdict_line(opt, name, pass, detail);
  };
  bool all_conv = true;
  for (const auto& r : results) all_conv = all_conv && r.converged;
  check("converged", all_conv,
        fmt::format("best energy {:.10g}, residual {:.3e} after {} iterations", results.front().energy,
                    results.front().residual, results.front().iterations));
  const MinimizationResult& best = results.front();
  const std::size_t nw = nearest_well(V, best.max_point);
  const bool in_z = std::find(flat.Z.begin(), flat.Z.end(), nw) != flat.Z.end();
  check("flattest_well", in_z,
        fmt::format("maximum at ({:.4f}, {:.4f}) nearest well {}; flattest set size {}", best.max_point[0],
                    best.max_point[1], nw, flat.Z.size()));

  json sym = nullptr;
  if (const auto S = make_symmetry(cfg)) {
    const SymmetryReport sr = symmetry_breaking_detect(results, V, *S);
    sym = {{"broken", sr.broken}, {"distance", sr.distance}, {"displacement", sr.displacement}, {"witness", sr.witness}};
    check("symmetry_breaking", sr.broken, fmt::format("reflection distance {:.4f}", sr.distance));
    if (results.size() >= 2) {
      const double gap = std::abs(results[0].energy - results[1].energy);
      check("mirror_energies", gap <= 10.0 * flow.tol_residual,
            fmt::format("|E1 - E2| = {:.3e} for {} distinct minimizers", gap, results.size()));
    } else {
      check("mirror_energies", false, "only one distinct minimizer found");
    }
  }

  write_field(best.field, out.path("minimizer"));
  out.adopt("minimizer.bin");
  out.adopt("minimizer.json");
  std::vector<svg::Marker> marks;
  for (const auto& m : best.local_maxima) marks.push_back({m[0], m[1]});
  out.write("minimizer.svg", svg::heatmap(best.field, fmt::format("Minimizer q = {}", q), marks));
  out.write_json("minimize.json", {{"config_hash", config_hash(cfg)},
                                   {"q", q},
                                   {"a", a},
                                   {"eps_q", eps},
                                   {"results", res_json},
                                   {"flatness", {{"p", flat.p}, {"lambdas", lambdas}, {"lambda", flat.lambda}, {"Z", flat.Z}}},
                                   {"symmetry", sym},
                                   {"checks", checks},
                                   {"all_pass", ok}});
  return ok ? 0 : 2;
}

int run_campaign_mode(const RunConfig& cfg, const std::string& out_dir, const RunOptions& opt) {
  const CampaignSettings settings = make_campaign_settings(cfg);
  const auto observer = [&](const CampaignPoint& p) {
    say(opt, fmt::format("q={} d={:.10g} gap={:.6g} beta2={:.6g} profile error={:.4g} iterations={}", p.q, p.d,
                         p.gap, p.beta2, p.profile_l2_error, p.iterations));
  };
  // checked before the long run, so a bad path fails fast
  { OutputCollector probe(out_dir); }
  const CampaignReport rep = run_campaign(settings, config_hash(cfg), observer);
  emit_report(rep, settings.potential, out_dir);
  for (const auto& v : rep.verdicts)
    if (v.applicable) verdict_line(opt, v.name, v.pass, v.detail);
  return rep.all_pass() ? 0 : 2;
}

int run_report_mode(const RunConfig& cfg, const std::string& out_dir, const RunOptions& opt) {
  std::ifstream in(*cfg.input);
  if (!in) throw std::runtime_error(fmt::format("cannot read stored report '{}'", *cfg.input));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(fmt::format("stored report '{}' is not valid: {}", *cfg.input, e.what()));
  }
  const CampaignReport rep = campaign_report_from_json(j);
  emit_report(rep, provenance_potential(rep.provenance), out_dir);
  for (const auto& v : rep.verdicts)
    if (v.applicable) verdict_line(opt, v.name, v.pass, v.detail);
  return rep.all_pass() ? 0 : 2;
}

int run_mode(const RunConfig& cfg, const std::string& out_dir, const RunOptions& opt) {
  switch (cfg.mode) {
    case Mode::Campaign: return run_campaign_mode(cfg, out_dir, opt);
    case Mode::Report: return run_report_mode(cfg, out_dir, opt);
    default: break;
  }
  OutputCollector out(out_dir);
  int code = 0;
  if (cfg.mode == Mode::Radial) code = run_radial(cfg, out, opt);
  else if (cfg.mode == Mode::Free) code = run_free(cfg, out, opt);
  else code = run_minimize(cfg, out, opt);
  out.write_json("config.json", to_json(cfg));
  out.finish();
  return code;
}

}  // namespace gpq
