/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "varlab/Config.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "varlab/Dynamics.h"
#include "varlab/Exceptions.h"

using json = nlohmann::json;

namespace varlab {

namespace {

// -----------------------------------------------------------------------------
/// Walks one JSON object, remembers which keys were consumed.
class Block {
 public:
  Block(const json & j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string & key) const {return j_.contains(key);}

  const json & raw(const std::string & key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  void get(const std::string & key, T & out) {
    if (!has(key)) return;
    out = as<T>(raw(key), path(key));
  }

  template <typename T>
  void get(const std::string & key, std::optional<T> & out) {
    if (!has(key)) return;
    if (raw(key).is_null()) {out.reset(); return;}
    out = as<T>(raw(key), path(key));
  }

  std::string path(const std::string & key) const {return path_ + "." + key;}

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key " + path(it.key()));
    }
  }

  template <typename T>
  static T as(const json & v, const std::string & where) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(where + ": expected a number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
            throw ConfigError(where + ": expected a non-negative integer");
          }
        }
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(where + ": expected a string");
      }
      return v.get<T>();
    } catch (const json::exception & e) {
      throw ConfigError(where + ": " + e.what());
    }
  }

 private:
  const json & j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<int> intList(const json & v, const std::string & where) {
  if (v.is_number_integer()) return {v.get<int>()};
  if (!v.is_array()) throw ConfigError(where + ": expected an integer or a list");
  std::vector<int> out;
  for (const auto & e : v) out.push_back(Block::as<int>(e, where));
  return out;
}

std::vector<double> numberList(const json & v, const std::string & where) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ConfigError(where + ": expected a number or a list");
  std::vector<double> out;
  for (const auto & e : v) out.push_back(Block::as<double>(e, where));
  return out;
}

void require(bool ok, const std::string & message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

// -----------------------------------------------------------------------------

RunConfig RunConfig::fromJson(const json & doc) {
  RunConfig cfg;
  Block top(doc, "config");

  if (top.has("grid")) {
    Block b(top.raw("grid"), "grid");
    b.get("dim", cfg.grid.dim);
    if (b.has("n_cells")) cfg.grid.nCells = intList(b.raw("n_cells"), b.path("n_cells"));
    b.get("spacing", cfg.grid.spacing);
    if (b.has("origin")) cfg.grid.origin = numberList(b.raw("origin"), b.path("origin"));
    b.get("compositions", cfg.grid.compositions);
    b.finish();
  }

  if (top.has("dynamics")) {
    Block b(top.raw("dynamics"), "dynamics");
    b.get("kind", cfg.dynamics.kind);
    b.get("advection", cfg.dynamics.advection);
    b.get("diffusion", cfg.dynamics.diffusion);
    b.get("decay", cfg.dynamics.decay);
    b.get("quadratic_gain", cfg.dynamics.quadraticGain);
    b.get("dt", cfg.dynamics.dt);
    if (b.has("matrix")) {
      const json & m = b.raw("matrix");
      std::vector<std::vector<double>> rows;
      if (m.is_number()) {
        rows.push_back({m.get<double>()});
      } else if (m.is_array()) {
        for (const auto & r : m) rows.push_back(numberList(r, b.path("matrix")));
      } else {
        throw ConfigError("dynamics.matrix: expected a number or a list of rows");
      }
      cfg.dynamics.matrix = rows;
    }
    b.finish();
  }

  if (top.has("observations")) {
    Block b(top.raw("observations"), "observations");
    b.get("placement", cfg.observations.placement);
    b.get("count", cfg.observations.count);
    b.get("compositions", cfg.observations.compositions);
    b.get("offsets", cfg.observations.offsets);
    if (b.has("sites")) {
      const json & s = b.raw("sites");
      if (!s.is_array()) throw ConfigError("observations.sites: expected a list");
      for (const auto & e : s) {
        Block site(e, "observations.sites[]");
        SiteConfig sc;
        if (site.has("location")) sc.location = numberList(site.raw("location"),
                                                           site.path("location"));
        site.get("composition", sc.composition);
        site.finish();
        cfg.observations.sites.push_back(sc);
      }
    }
    b.finish();
  }

  if (top.has("covariances")) {
    Block b(top.raw("covariances"), "covariances");
    b.get("sigma_b", cfg.covariances.sigmaB);
    b.get("length_b", cfg.covariances.lengthB);
    b.get("sigma_r", cfg.covariances.sigmaR);
    b.finish();
  }

  if (top.has("cycle")) {
    Block b(top.raw("cycle"), "cycle");
    b.get("window_steps", cfg.cycle.windowSteps);
    b.get("n_cycles", cfg.cycle.nCycles);
    if (b.has("initial_guess")) {
      const json & g = b.raw("initial_guess");
      if (g.is_string()) {
        cfg.cycle.guess.kind = g.get<std::string>();
      } else if (g.is_array() || g.is_number()) {
        cfg.cycle.guess.kind = "values";
        cfg.cycle.guess.values = numberList(g, "cycle.initial_guess");
      } else if (g.is_object()) {
        Block gb(g, "cycle.initial_guess");
        require(gb.has("perturbed_truth"),
                "cycle.initial_guess: object form must be {\"perturbed_truth\": sigma}");
        cfg.cycle.guess.kind = "perturbed_truth";
        gb.get("perturbed_truth", cfg.cycle.guess.sigma);
        gb.finish();
      } else {
        throw ConfigError("cycle.initial_guess: unsupported value");
      }
    }
    b.finish();
  }

  if (top.has("world")) {
    Block b(top.raw("world"), "world");
    b.get("truth_dynamics", cfg.world.truthDynamics);
    b.get("sigma_w", cfg.world.sigmaW);
    b.get("length_s", cfg.world.lengthS);
    b.get("sigma_r", cfg.world.sigmaR);
    b.get("initial_level", cfg.world.initialLevel);
    b.get("initial_amplitude", cfg.world.initialAmplitude);
    b.get("vary_truth", cfg.world.varyTruth);
    b.finish();
  }

  if (top.has("lab")) {
    Block b(top.raw("lab"), "lab");
    b.get("members", cfg.lab.members);
    b.get("significance", cfg.lab.significance);
    b.get("bootstrap", cfg.lab.bootstrap);
    b.get("confidence", cfg.lab.confidence);
    b.get("affine_trials", cfg.lab.affineTrials);
    b.get("threads", cfg.lab.threads);
    b.get("variogram_bins", cfg.lab.variogramBins);
    b.finish();
  }

  top.get("master_seed", cfg.masterSeed);
  top.get("output_dir", cfg.outputDir);
  top.finish();

  cfg.validate();
  return cfg;
}

RunConfig RunConfig::fromFile(const std::string & path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error & e) {
    throw ConfigError(path + ": " + e.what());
  }
  return fromJson(doc);
}

// -----------------------------------------------------------------------------

void RunConfig::validate() const {
  require(grid.dim == 1 || grid.dim == 2, "grid.dim must be 1 or 2");
  require(static_cast<int>(grid.nCells.size()) == grid.dim,
          "grid.n_cells must give one count per dimension");
  for (int n : grid.nCells) require(n >= 1, "grid.n_cells must be positive");
  require(grid.spacing > 0.0 && std::isfinite(grid.spacing), "grid.spacing must be positive");
  require(grid.origin.empty() || static_cast<int>(grid.origin.size()) == grid.dim,
          "grid.origin must give one coordinate per dimension");
  require(!grid.compositions.empty(), "grid.compositions must not be empty");

  try {
    const ModelKind kind = modelKindFromString(dynamics.kind);
    require(kind == ModelKind::QuadraticPerturbed || dynamics.quadraticGain == 0.0,
            "dynamics.quadratic_gain must be 0 for the linear kind");
  } catch (const ConfigError & e) {
    throw ConfigError(std::string("dynamics.kind: ") + e.what());
  }
  require(dynamics.dt > 0.0, "dynamics.dt must be positive");
  require(dynamics.diffusion >= 0.0, "dynamics.diffusion must be nonnegative");
  if (dynamics.matrix) {
    int n = 1;
    for (int c : grid.nCells) n *= c;
    n *= static_cast<int>(grid.compositions.size());
    require(static_cast<int>(dynamics.matrix->size()) == n, "dynamics.matrix must have n rows");
    for (const auto & r : *dynamics.matrix) {
      require(static_cast<int>(r.size()) == n, "dynamics.matrix must be square");
    }
  }

  const auto & o = observations;
  require(o.placement == "centroid" || o.placement == "uniform_random" || o.placement == "fixed",
          "observations.placement must be centroid, uniform_random or fixed");
  require(o.count >= 0, "observations.count must be nonnegative");
  require(o.placement != "uniform_random" || o.count > 0,
          "observations.count must be positive for uniform_random placement");
  require(o.placement != "fixed" || !o.sites.empty(),
          "observations.sites must be given for fixed placement");
  for (const auto & s : o.sites) {
    require(static_cast<int>(s.location.size()) == grid.dim,
            "observations.sites[].location must have grid.dim coordinates");
  }
  for (int off : o.offsets) {
    require(off >= 0 && off <= cycle.windowSteps,
            "observations.offsets must lie in [0, window_steps]");
  }

  require(covariances.sigmaB > 0.0, "covariances.sigma_b must be positive");
  require(!covariances.lengthB || *covariances.lengthB > 0.0,
          "covariances.length_b must be positive");
  require(covariances.sigmaR > 0.0, "covariances.sigma_r must be positive");

  require(cycle.windowSteps >= 1, "cycle.window_steps must be at least 1");
  require(cycle.nCycles >= 1, "cycle.n_cycles must be at least 1");
  const auto & g = cycle.guess.kind;
  require(g == "zeros" || g == "truth" || g == "perturbed_truth" || g == "values",
          "cycle.initial_guess must be zeros, truth, {perturbed_truth: sigma} or a list");
  require(cycle.guess.sigma >= 0.0, "cycle.initial_guess perturbation must be nonnegative");

  require(world.truthDynamics == "nonlinear" || world.truthDynamics == "tangent_linear",
          "world.truth_dynamics must be nonlinear or tangent_linear");
  require(world.sigmaW >= 0.0, "world.sigma_w must be nonnegative");
  require(!world.lengthS || *world.lengthS > 0.0, "world.length_s must be positive");
  require(!world.sigmaR || *world.sigmaR >= 0.0, "world.sigma_r must be nonnegative");

  require(lab.members >= 2, "lab.members must be at least 2");
  require(lab.significance > 0.0, "lab.significance must be positive");
  require(lab.bootstrap >= 0, "lab.bootstrap must be nonnegative");
  require(lab.confidence > 0.0 && lab.confidence < 1.0, "lab.confidence must lie in (0, 1)");
  require(lab.affineTrials >= 3, "lab.affine_trials must be at least 3");
  require(lab.threads >= 0, "lab.threads must be nonnegative");
  require(lab.variogramBins >= 1, "lab.variogram_bins must be positive");
  require(!outputDir.empty(), "output_dir must not be empty");
}

// -----------------------------------------------------------------------------

json RunConfig::toJson() const {
  json j;
  j["grid"] = {{"dim", grid.dim}, {"n_cells", grid.nCells}, {"spacing", grid.spacing},
               {"compositions", grid.compositions}};
  if (!grid.origin.empty()) j["grid"]["origin"] = grid.origin;

  j["dynamics"] = {{"kind", dynamics.kind}, {"advection", dynamics.advection},
                   {"diffusion", dynamics.diffusion}, {"decay", dynamics.decay},
                   {"quadratic_gain", dynamics.quadraticGain}, {"dt", dynamics.dt}};
  if (dynamics.matrix) j["dynamics"]["matrix"] = *dynamics.matrix;

  j["observations"] = {{"placement", observations.placement}, {"count", observations.count},
                       {"compositions", observations.compositions},
                       {"offsets", observations.offsets}};
  json sites = json::array();
  for (const auto & s : observations.sites) {
    sites.push_back({{"location", s.location}, {"composition", s.composition}});
  }
  j["observations"]["sites"] = sites;

  j["covariances"] = {{"sigma_b", covariances.sigmaB},
                      {"length_b", covariances.lengthB.value_or(2.0 * grid.spacing)},
                      {"sigma_r", covariances.sigmaR}};

  json guess;
  if (cycle.guess.kind == "perturbed_truth") {
    guess = {{"perturbed_truth", cycle.guess.sigma}};
  } else if (cycle.guess.kind == "values") {
    guess = cycle.guess.values;
  } else {
    guess = cycle.guess.kind;
  }
  j["cycle"] = {{"window_steps", cycle.windowSteps}, {"n_cycles", cycle.nCycles},
                {"initial_guess", guess}};

  j["world"] = {{"truth_dynamics", world.truthDynamics}, {"sigma_w", world.sigmaW},
                {"length_s", world.lengthS.value_or(2.0 * grid.spacing)},
                {"sigma_r", world.sigmaR.value_or(covariances.sigmaR)},
                {"initial_level", world.initialLevel},
                {"initial_amplitude", world.initialAmplitude},
                {"vary_truth", world.varyTruth}};

  j["lab"] = {{"members", lab.members}, {"significance", lab.significance},
              {"bootstrap", lab.bootstrap}, {"confidence", lab.confidence},
              {"affine_trials", lab.affineTrials}, {"threads", lab.threads},
              {"variogram_bins", lab.variogramBins}};
  j["master_seed"] = masterSeed;
  j["output_dir"] = outputDir;
  return j;
}

std::string RunConfig::hash() const {
  json j = toJson();
  // Where the files go does not change what is in them.
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace varlab
