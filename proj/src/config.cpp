#include "gpq/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "gpq/errors.hpp"

namespace gpq {

using nlohmann::json;

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Radial: return "radial";
    case Mode::Free: return "free";
    case Mode::Minimize: return "minimize";
    case Mode::Campaign: return "campaign";
    case Mode::Report: return "report";
  }
  return "radial";
}

namespace {

std::optional<Mode> mode_from_string(const std::string& s) {
  for (Mode m : {Mode::Radial, Mode::Free, Mode::Minimize, Mode::Campaign, Mode::Report})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

// Collects messages while walking the document so that every problem is
// reported in one pass.
class Reader {
 public:
  std::vector<std::string> errors;

  void error(const std::string& path, const std::string& msg) { errors.push_back(fmt::format("{}: {}", path, msg)); }

  void allow_only(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) {
      error(path, "expected an object");
      return;
    }
    const std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items())
      if (!known.contains(k)) error(path.empty() ? k : path + "." + k, "unknown key");
  }

  bool number(const json& obj, const char* key, const std::string& path, double& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_number()) {
      error(path + key, "expected a number");
      return false;
    }
    out = v.get<double>();
    if (!std::isfinite(out)) {
      error(path + key, "must be finite");
      return false;
    }
    return true;
  }

  template <class Int>
  bool integer(const json& obj, const char* key, const std::string& path, Int& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      error(path + key, "expected a non-negative integer");
      return false;
    }
    out = v.get<Int>();
    return true;
  }

  bool string(const json& obj, const char* key, const std::string& path, std::string& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_string()) {
      error(path + key, "expected a string");
      return false;
    }
    out = v.get<std::string>();
    return true;
  }

  // Accepts a number or a list of numbers.
  bool numbers(const json& obj, const char* key, const std::string& path, std::vector<double>& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    std::vector<double> vals;
    if (v.is_number()) {
      vals.push_back(v.get<double>());
    } else if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) {
          error(fmt::format("{}{}[{}]", path, key, i), "expected a number");
          return false;
        }
        vals.push_back(v[i].get<double>());
      }
    } else {
      error(path + key, "expected a number or a list of numbers");
      return false;
    }
    out = std::move(vals);
    return true;
  }

  bool point(const json& obj, const char* key, const std::string& path, Point& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      error(path + key, "expected [x, y]");
      return false;
    }
    out = {v[0].get<double>(), v[1].get<double>()};
    return true;
  }
};

std::vector<double> default_q(Mode m) {
  switch (m) {
    case Mode::Radial: return {2.0};
    case Mode::Free: return {1.0, 1.5, 1.9};
    case Mode::Minimize: return {1.8};
    default: return {};
  }
}

std::vector<double> default_ratio(Mode m) {
  switch (m) {
    case Mode::Free: return {1.1, 1.5};
    case Mode::Minimize:
    case Mode::Campaign: return {1.2};
    default: return {};
  }
}

void validate(const RunConfig& c, Reader& r) {
  const bool uses_q = c.mode == Mode::Radial || c.mode == Mode::Free || c.mode == Mode::Minimize;
  if (uses_q) {
    if (c.q.empty()) r.error("q", "needs at least one exponent");
    const bool closed = c.mode == Mode::Radial;
    for (double q : c.q) {
      const bool ok = q > 0.0 && (closed ? q <= 2.0 : q < 2.0);
      if (!ok) r.error("q", fmt::format("value {} outside the permitted range {}", q, closed ? "(0, 2]" : "(0, 2)"));
    }
    if (c.mode == Mode::Minimize && c.q.size() != 1) r.error("q", "minimize takes exactly one exponent");
  }
  if (c.mode == Mode::Free || c.mode == Mode::Minimize || c.mode == Mode::Campaign) {
    for (double v : c.ratio)
      if (!(v > 0.0)) r.error("ratio", fmt::format("value {} must be positive", v));
    if (c.mode != Mode::Free && c.ratio.size() != 1 && !(c.mode == Mode::Minimize && c.a))
      r.error("ratio", "expected exactly one value");
    if (c.mode == Mode::Free && c.ratio.empty()) r.error("ratio", "needs at least one value");
  }
  if (c.a && !(*c.a > 0.0)) r.error("a", fmt::format("value {} must be positive", *c.a));
  if (c.mode == Mode::Campaign) {
    if (c.schedule.size() < 3)
      r.error("schedule", fmt::format("insufficient points: a campaign needs at least 3, got {}", c.schedule.size()));
    for (std::size_t k = 0; k < c.schedule.size(); ++k) {
      if (!(c.schedule[k] > 0.0 && c.schedule[k] < 2.0))
        r.error("schedule", fmt::format("value {} outside the permitted range (0, 2)", c.schedule[k]));
      if (k > 0 && !(c.schedule[k] > c.schedule[k - 1])) r.error("schedule", "must be strictly ascending");
    }
  }
  if (!(c.radial_r_max > 0.0)) r.error("radial_grid.r_max", "must be positive");
  if (c.radial_n < 2) r.error("radial_grid.n", "must be at least 2");
  if (!(c.tol_s > 0.0)) r.error("radial_grid.tol_s", "must be positive");
  if (!(c.grid_L > 0.0)) r.error("grid.L", "must be positive");
  if (c.grid_n < 16) r.error("grid.n", "must be at least 16");
  if (!(c.flow_dt >= 0.0)) r.error("flow.dt", "must be non-negative (0 selects the default)");
  if (!(c.flow_tol_residual > 0.0)) r.error("flow.tol_residual", "must be positive");
  if (c.flow_max_iter < 1) r.error("flow.max_iter", "must be at least 1");
  if (c.flow_scheme != "spectral" && c.flow_scheme != "finite_difference")
    r.error("flow.scheme", fmt::format("'{}' is not one of spectral, finite_difference", c.flow_scheme));
  if (c.flow_method != "explicit" && c.flow_method != "preconditioned")
    r.error("flow.method", fmt::format("'{}' is not one of explicit, preconditioned", c.flow_method));
  if (!(c.flow_clip_tolerance >= 0.0 && c.flow_clip_tolerance < 1.0))
    r.error("flow.clip_tolerance", "must lie in [0, 1)");

  bool wells_ok = !c.wells.empty();
  if (c.wells.empty()) r.error("potential.wells", "needs at least one well");
  std::set<std::string> names;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    const SeedSpec& s = c.seeds[i];
    const std::string path = fmt::format("seeds[{}]", i);
    if (s.name.empty()) r.error(path + ".name", "must not be empty");
    else if (!names.insert(s.name).second) r.error(path + ".name", fmt::format("duplicate seed name '{}'", s.name));
    if (s.type != "free" && s.type != "gaussian")
      r.error(path + ".type", fmt::format("'{}' is not one of free, gaussian", s.type));
    if (!(s.width > 0.0)) r.error(path + ".width", "must be positive");
  }
  const VerdictTolerances& t = c.tolerances;
  if (!(t.final_relative > 0.0)) r.error("tolerances.final_relative", "must be positive");
  if (!(t.inversion >= 0.0)) r.error("tolerances.inversion", "must be non-negative");
  if (!(t.profile_error > 0.0)) r.error("tolerances.profile_error", "must be positive");
  if (!(t.window_lo > 0.0 && t.window_hi > t.window_lo)) r.error("tolerances.window", "needs 0 < lo < hi");
  if (!(t.gap_floor <= 0.0)) r.error("tolerances.gap_floor", "must be non-positive");
  if (!(t.well_distance_eps > 0.0)) r.error("tolerances.well_distance_eps", "must be positive");
  if (c.symmetry) {
    if (c.symmetry->type != "reflection" && c.symmetry->type != "rotation")
      r.error("symmetry.type", fmt::format("'{}' is not one of reflection, rotation", c.symmetry->type));
    if (c.symmetry->order < 2) r.error("symmetry.order", "must be at least 2");
  }
  if (c.mode == Mode::Report && !c.input) r.error("input", "report mode needs the path of a stored report.json");

  if (wells_ok) {
    try {
      const PotentialSpec V = make_potential(c);
      if (c.symmetry && r.errors.empty()) {
        const auto S = make_symmetry(c);
        if (S && symmetry_defect(V, *S) > 1e-9) r.error("symmetry", "potential is not invariant under this symmetry");
      }
    } catch (const ParameterError& e) {
      r.error("potential", e.what());
    }
  }
}

}  // namespace

bool RunConfig::operator==(const RunConfig& o) const { return to_json(*this) == to_json(o); }

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({fmt::format("malformed JSON: {}", e.what())});
  }
  Reader r;
  r.allow_only(doc, "",
               {"mode", "q", "ratio", "a", "schedule", "radial_grid", "grid", "potential", "flow", "seeds",
                "tolerances", "symmetry", "rng_seed", "random_tests", "input", "output"});
  if (!doc.is_object()) throw ConfigError(r.errors);

  RunConfig c;
  std::string mode;
  if (!r.string(doc, "mode", "", mode)) {
    if (!doc.contains("mode")) r.error("mode", "required (radial | free | minimize | campaign | report)");
  } else if (auto m = mode_from_string(mode)) {
    c.mode = *m;
  } else {
    r.error("mode", fmt::format("'{}' is not one of radial, free, minimize, campaign, report", mode));
  }
  c.q = default_q(c.mode);
  c.ratio = default_ratio(c.mode);
  if (c.mode == Mode::Campaign) c.schedule = {1.6, 1.75, 1.9};

  r.numbers(doc, "q", "", c.q);
  r.numbers(doc, "ratio", "", c.ratio);
  if (doc.contains("a")) {
    double a = 0.0;
    if (r.number(doc, "a", "", a)) c.a = a;
  }
  r.numbers(doc, "schedule", "", c.schedule);

  if (doc.contains("radial_grid")) {
    const json& g = doc.at("radial_grid");
    r.allow_only(g, "radial_grid", {"r_max", "n", "tol_s"});
    if (g.is_object()) {
      r.number(g, "r_max", "radial_grid.", c.radial_r_max);
      r.integer(g, "n", "radial_grid.", c.radial_n);
      r.number(g, "tol_s", "radial_grid.", c.tol_s);
    }
  }
  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    r.allow_only(g, "grid", {"L", "n"});
    if (g.is_object()) {
      r.number(g, "L", "grid.", c.grid_L);
      r.integer(g, "n", "grid.", c.grid_n);
    }
  }
  if (doc.contains("potential")) {
    const json& p = doc.at("potential");
    r.allow_only(p, "potential", {"wells", "modulation"});
    if (p.is_object()) {
      if (p.contains("wells")) {
        const json& w = p.at("wells");
        if (!w.is_array()) {
          r.error("potential.wells", "expected a list");
        } else {
          c.wells.clear();
          for (std::size_t i = 0; i < w.size(); ++i) {
            const std::string path = fmt::format("potential.wells[{}]", i);
            r.allow_only(w[i], path, {"center", "exponent"});
            if (!w[i].is_object()) continue;
            WellSpec ws;
            if (!r.point(w[i], "center", path + ".", ws.center) && !w[i].contains("center"))
              r.error(path + ".center", "required");
            if (!r.number(w[i], "exponent", path + ".", ws.exponent) && !w[i].contains("exponent"))
              r.error(path + ".exponent", "required");
            c.wells.push_back(ws);
          }
        }
      }
      if (p.contains("modulation")) {
        if (p.at("modulation").is_null()) c.modulation.reset();
        else {
          std::string m;
          if (r.string(p, "modulation", "potential.", m)) c.modulation = m;
        }
      }
    }
  }
  if (doc.contains("flow")) {
    const json& f = doc.at("flow");
    r.allow_only(f, "flow", {"dt", "tol_residual", "max_iter", "scheme", "method", "clip_tolerance"});
    if (f.is_object()) {
      r.number(f, "dt", "flow.", c.flow_dt);
      r.number(f, "tol_residual", "flow.", c.flow_tol_residual);
      r.integer(f, "max_iter", "flow.", c.flow_max_iter);
      r.string(f, "scheme", "flow.", c.flow_scheme);
      r.string(f, "method", "flow.", c.flow_method);
      r.number(f, "clip_tolerance", "flow.", c.flow_clip_tolerance);
    }
  }
  if (doc.contains("seeds")) {
    const json& s = doc.at("seeds");
    if (!s.is_array()) {
      r.error("seeds", "expected a list");
    } else {
      for (std::size_t i = 0; i < s.size(); ++i) {
        const std::string path = fmt::format("seeds[{}]", i);
        r.allow_only(s[i], path, {"name", "type", "center", "width"});
        if (!s[i].is_object()) continue;
        SeedSpec sp;
        r.string(s[i], "name", path + ".", sp.name);
        r.string(s[i], "type", path + ".", sp.type);
        r.point(s[i], "center", path + ".", sp.center);
        r.number(s[i], "width", path + ".", sp.width);
        c.seeds.push_back(sp);
      }
    }
  }
  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    r.allow_only(t, "tolerances",
                 {"final_relative", "inversion", "profile_error", "window", "gap_floor", "well_distance_eps"});
    if (t.is_object()) {
      VerdictTolerances& v = c.tolerances;
      r.number(t, "final_relative", "tolerances.", v.final_relative);
      r.number(t, "inversion", "tolerances.", v.inversion);
      r.number(t, "profile_error", "tolerances.", v.profile_error);
      Point w{v.window_lo, v.window_hi};
      if (r.point(t, "window", "tolerances.", w)) {
        v.window_lo = w[0];
        v.window_hi = w[1];
      }
      r.number(t, "gap_floor", "tolerances.", v.gap_floor);
      r.number(t, "well_distance_eps", "tolerances.", v.well_distance_eps);
    }
  }
  if (doc.contains("symmetry") && !doc.at("symmetry").is_null()) {
    const json& s = doc.at("symmetry");
    r.allow_only(s, "symmetry", {"type", "normal_angle", "order", "center"});
    if (s.is_object()) {
      SymmetrySpec sp;
      r.string(s, "type", "symmetry.", sp.type);
      r.number(s, "normal_angle", "symmetry.", sp.normal_angle);
      if (s.contains("order")) {
        if (!s.at("order").is_number_integer()) r.error("symmetry.order", "expected an integer");
        else sp.order = s.at("order").get<int>();
      }
      r.point(s, "center", "symmetry.", sp.center);
      c.symmetry = sp;
    }
  }
  r.integer(doc, "rng_seed", "", c.rng_seed);
  r.integer(doc, "random_tests", "", c.random_tests);
  if (doc.contains("input") && !doc.at("input").is_null()) {
    std::string s;
    if (r.string(doc, "input", "", s)) c.input = s;
  }
  if (doc.contains("output") && !doc.at("output").is_null()) {
    std::string s;
    if (r.string(doc, "output", "", s)) c.output = s;
  }

  if (r.errors.empty()) validate(c, r);
  else {
    // range checks still run on whatever parsed, so the user sees them too
    Reader more;
    validate(c, more);
    for (auto& e : more.errors) r.errors.push_back(std::move(e));
  }
  if (!r.errors.empty()) throw ConfigError(r.errors);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({fmt::format("cannot read config file '{}'", path)});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json to_json(const RunConfig& c) {
  json wells = json::array();
  for (const auto& w : c.wells) wells.push_back({{"center", {w.center[0], w.center[1]}}, {"exponent", w.exponent}});
  json seeds = json::array();
  for (const auto& s : c.seeds)
    seeds.push_back({{"name", s.name}, {"type", s.type}, {"center", {s.center[0], s.center[1]}}, {"width", s.width}});
  json j = {
      {"mode", to_string(c.mode)},
      {"q", c.q},
      {"ratio", c.ratio},
      {"a", c.a ? json(*c.a) : json(nullptr)},
      {"schedule", c.schedule},
      {"radial_grid", {{"r_max", c.radial_r_max}, {"n", c.radial_n}, {"tol_s", c.tol_s}}},
      {"grid", {{"L", c.grid_L}, {"n", c.grid_n}}},
      {"potential", {{"wells", wells}, {"modulation", c.modulation ? json(*c.modulation) : json(nullptr)}}},
      {"flow",
       {{"dt", c.flow_dt},
        {"tol_residual", c.flow_tol_residual},
        {"max_iter", c.flow_max_iter},
        {"scheme", c.flow_scheme},
        {"method", c.flow_method},
        {"clip_tolerance", c.flow_clip_tolerance}}},
      {"seeds", seeds},
      {"tolerances",
       {{"final_relative", c.tolerances.final_relative},
        {"inversion", c.tolerances.inversion},
        {"profile_error", c.tolerances.profile_error},
        {"window", {c.tolerances.window_lo, c.tolerances.window_hi}},
        {"gap_floor", c.tolerances.gap_floor},
        {"well_distance_eps", c.tolerances.well_distance_eps}}},
      {"symmetry", c.symmetry ? json{{"type", c.symmetry->type},
                                     {"normal_angle", c.symmetry->normal_angle},
                                     {"order", c.symmetry->order},
                                     {"center", {c.symmetry->center[0], c.symmetry->center[1]}}}
                              : json(nullptr)},
      {"rng_seed", c.rng_seed},
      {"random_tests", c.random_tests},
      {"input", c.input ? json(*c.input) : json(nullptr)},
      {"output", c.output ? json(*c.output) : json(nullptr)},
  };
  // `a` is optional; keep the key only when set so the dump re-parses
  if (!c.a) j.erase("a");
  return j;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("SHA-256 computation failed");
  }
  EVP_MD_CTX_free(ctx);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string config_hash(const RunConfig& cfg) {
  json j = to_json(cfg);
  // where results go does not change them
  j.erase("output");
  return sha256_hex(j.dump());
}

PotentialSpec make_potential(const RunConfig& cfg) {
  std::vector<Well> wells;
  for (const auto& w : cfg.wells) wells.push_back(Well{w.center, w.exponent});
  return PotentialSpec(std::move(wells), cfg.modulation);
}

Grid2D make_grid(const RunConfig& cfg) { return Grid2D::make(cfg.grid_L, cfg.grid_n); }

RadialGrid make_radial_grid(const RunConfig& cfg) { return RadialGrid::make(cfg.radial_r_max, cfg.radial_n); }

FlowConfig make_flow(const RunConfig& cfg) {
  FlowConfig f;
  f.dt = cfg.flow_dt;
  f.tol_residual = cfg.flow_tol_residual;
  f.max_iter = cfg.flow_max_iter;
  f.scheme = kinetic_scheme_from_string(cfg.flow_scheme);
  f.method = flow_method_from_string(cfg.flow_method);
  f.clip_tolerance = cfg.flow_clip_tolerance;
  return f;
}

std::optional<Symmetry> make_symmetry(const RunConfig& cfg) {
  if (!cfg.symmetry) return std::nullopt;
  const SymmetrySpec& s = *cfg.symmetry;
  if (s.type == "rotation") return Symmetry::rotation(s.order, s.center);
  return Symmetry::reflection(s.normal_angle, s.center);
}

CampaignSettings make_campaign_settings(const RunConfig& cfg) {
  CampaignSettings s;
  s.schedule = cfg.schedule;
  s.ratio = cfg.ratio.at(0);
  s.potential = make_potential(cfg);
  s.grid = make_grid(cfg);
  s.radial = make_radial_grid(cfg);
  s.flow = make_flow(cfg);
  s.tolerances = cfg.tolerances;
  s.symmetry = make_symmetry(cfg);
  return s;
}

}  // namespace gpq
