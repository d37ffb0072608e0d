#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "dgtopo/cli_io.hpp"

namespace dgtopo {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& key, const std::string& what) {
  throw ConfigError(origin + ": " + key + ": " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& origin,
                    const std::string& prefix) {
  if (!obj.is_object()) fail(origin, prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!known.count(key)) fail(origin, prefix.empty() ? key : prefix + "." + key, "unknown key");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& origin, const std::string& prefix) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    if constexpr (std::is_same_v<T, int>) {
      if (!it->is_number_integer()) throw std::invalid_argument("expected an integer");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw std::invalid_argument("expected a number");
    }
    out = it->get<T>();
  } catch (const std::exception& e) {
    fail(origin, prefix + key, e.what());
  }
}

json to_json(const RunConfig& c) {
  const BenchmarkSpec& s = c.spec;
  const OptimizerOptions& o = c.optimizer;
  json j;
  j["problem"] = {{"preset", c.preset}, {"Lx", s.Lx},   {"Ly", s.Ly}, {"gamma", s.gamma}, {"alpha_bar", s.alpha_bar},
                  {"q", s.q},           {"nu", s.nu},   {"sigma", s.sigma}};
  j["mesh"] = {{"nx", s.nx}, {"ny", s.ny}, {"levels", s.levels}};
  j["solver"] = {{"tol", o.tol},
                 {"stage_tol", o.stage_tol},
                 {"max_iterations", o.max_iterations},
                 {"anderson_depth", o.anderson_depth},
                 {"deflation_iterations", o.deflation_iterations},
                 {"continuation", o.continuation}};
  j["seeds"] = c.seeds;
  j["deflate"] = c.deflate;
  j["mms"] = {{"base_n", c.mms_base_n}};
  return j;
}

}  // namespace

RunConfig double_pipe_config() { return RunConfig{}; }

void RunConfig::validate(const std::string& o) const {
  auto positive = [&](const char* key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(o, key, "must be positive and finite");
  };
  positive("problem.Lx", spec.Lx);
  positive("problem.Ly", spec.Ly);
  positive("problem.alpha_bar", spec.alpha_bar);
  positive("problem.q", spec.q);
  positive("problem.nu", spec.nu);
  positive("problem.sigma", spec.sigma);
  if (!(spec.gamma > 0.0 && spec.gamma < 1.0)) fail(o, "problem.gamma", "must lie in (0,1)");
  if (!preset.empty() && preset != "double-pipe") fail(o, "problem.preset", "unknown preset '" + preset + "'");
  if (spec.nx < 1) fail(o, "mesh.nx", "must be at least 1");
  if (spec.ny < 1) fail(o, "mesh.ny", "must be at least 1");
  if (spec.levels < 1 || spec.levels > 8) fail(o, "mesh.levels", "must lie in [1, 8]");
  positive("solver.tol", optimizer.tol);
  positive("solver.stage_tol", optimizer.stage_tol);
  if (optimizer.max_iterations < 1) fail(o, "solver.max_iterations", "must be at least 1");
  if (optimizer.anderson_depth < 0) fail(o, "solver.anderson_depth", "must be nonnegative");
  if (optimizer.deflation_iterations < 0) fail(o, "solver.deflation_iterations", "must be nonnegative");
  const auto& cont = optimizer.continuation;
  for (std::size_t i = 0; i < cont.size(); ++i) {
    if (!(cont[i] > 0.0) || (i > 0 && !(cont[i] > cont[i - 1])))
      fail(o, "solver.continuation", "must be positive and strictly increasing");
  }
  if (!cont.empty() && cont.back() != spec.alpha_bar)
    fail(o, "solver.continuation", "must end at problem.alpha_bar");
  if (seeds.empty()) fail(o, "seeds", "at least one seed is required");
  for (const std::string& s : seeds)
    if (s != "uniform" && s != "band") fail(o, "seeds", "unknown seed '" + s + "' (expected uniform or band)");
  if (mms_base_n < 1) fail(o, "mms.base_n", "must be at least 1");
  if (out_dir.empty()) fail(o, "output", "must not be empty");
}

std::string RunConfig::canonical() const { return to_json(*this).dump(); }

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": malformed JSON: " + e.what());
  }
  reject_unknown(j, {"problem", "mesh", "solver", "seeds", "deflate", "mms", "output"}, origin, "");
  if (!j.contains("problem")) fail(origin, "problem", "missing required key");

  RunConfig c;
  const json& pj = j["problem"];
  reject_unknown(pj, {"preset", "Lx", "Ly", "gamma", "alpha_bar", "q", "nu", "sigma"}, origin, "problem");
  c.preset.clear();
  read(pj, "preset", c.preset, origin, "problem.");
  if (!c.preset.empty() && c.preset != "double-pipe")
    fail(origin, "problem.preset", "unknown preset '" + c.preset + "'");
  if (c.preset.empty()) {
    for (const char* key : {"Lx", "Ly", "gamma", "alpha_bar", "q", "nu", "sigma"})
      if (!pj.contains(key)) fail(origin, std::string("problem.") + key, "missing required key (no preset given)");
  }
  read(pj, "Lx", c.spec.Lx, origin, "problem.");
  read(pj, "Ly", c.spec.Ly, origin, "problem.");
  read(pj, "gamma", c.spec.gamma, origin, "problem.");
  read(pj, "alpha_bar", c.spec.alpha_bar, origin, "problem.");
  read(pj, "q", c.spec.q, origin, "problem.");
  read(pj, "nu", c.spec.nu, origin, "problem.");
  read(pj, "sigma", c.spec.sigma, origin, "problem.");

  if (j.contains("mesh")) {
    const json& mj = j["mesh"];
    reject_unknown(mj, {"nx", "ny", "levels"}, origin, "mesh");
    read(mj, "nx", c.spec.nx, origin, "mesh.");
    read(mj, "ny", c.spec.ny, origin, "mesh.");
    read(mj, "levels", c.spec.levels, origin, "mesh.");
  }
  if (j.contains("solver")) {
    const json& sj = j["solver"];
    reject_unknown(sj,
                   {"tol", "stage_tol", "max_iterations", "anderson_depth", "deflation_iterations", "continuation"},
                   origin, "solver");
    read(sj, "tol", c.optimizer.tol, origin, "solver.");
    read(sj, "stage_tol", c.optimizer.stage_tol, origin, "solver.");
    read(sj, "max_iterations", c.optimizer.max_iterations, origin, "solver.");
    read(sj, "anderson_depth", c.optimizer.anderson_depth, origin, "solver.");
    read(sj, "deflation_iterations", c.optimizer.deflation_iterations, origin, "solver.");
    read(sj, "continuation", c.optimizer.continuation, origin, "solver.");
  }
  read(j, "seeds", c.seeds, origin, "");
  read(j, "deflate", c.deflate, origin, "");
  if (j.contains("mms")) {
    reject_unknown(j["mms"], {"base_n"}, origin, "mms");
    read(j["mms"], "base_n", c.mms_base_n, origin, "mms.");
  }
  read(j, "output", c.out_dir, origin, "");
  c.validate(origin);
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

}  // namespace dgtopo
