/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "varlab/Commands.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "varlab/Csv.h"
#include "varlab/Random.h"
#include "varlab/Scenario.h"
#include "varlab/Statistics.h"
#include "varlab/StochasticityLab.h"
#include "varlab/Version.h"

namespace fs = std::filesystem;

namespace varlab {

namespace {

// -----------------------------------------------------------------------------
/// Output directory plus the list of files written so far.
class Output {
 public:
  explicit Output(const RunConfig & cfg) : cfg_(cfg), dir_(cfg.outputDir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw IoError("cannot create output directory " + dir_.string()
                    + (ec ? ": " + ec.message() : ""));
    }
  }

  CsvWriter csv(const std::string & name, std::initializer_list<std::string_view> header) {
    files_.push_back(name);
    return CsvWriter((dir_ / name).string(), header);
  }

  void meta(const std::string & command, const nlohmann::json & summary = nlohmann::json::object()) {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = cfg_.toJson();
    j["config_hash"] = cfg_.hash();
    j["master_seed"] = cfg_.masterSeed;
    j["version"] = kVersion;
    j["rng"] = kRngAlgorithm;
    j["files"] = files_;
    j["summary"] = summary;
    const fs::path path = dir_ / "meta.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
  }

 private:
  const RunConfig & cfg_;
  fs::path dir_;
  std::vector<std::string> files_;
};

std::string siteText(const ObservationSite & s, int dim) {
  std::string t = formatDouble(s.location[0]);
  if (dim == 2) t += ":" + formatDouble(s.location[1]);
  return t;
}

void writeStates(CsvWriter & csv, int k, const StateVector & x, const CompositionSet & comps) {
  const Layout & layout = x.layout();
  for (int loc = 0; loc < layout.locations(); ++loc) {
    for (int c = 0; c < layout.compositions(); ++c) {
      csv.row() << k << loc << comps.name(c) << x.at(loc, c);
    }
  }
}

WindowProblem problemFor(const Scenario & sc, const MemberRun & run, int k) {
  return buildWindowProblem(k, run.series.backgrounds[k], run.windows[k], sc.system(),
                            sc.windowSteps());
}

std::string pairName(const PairCorrelation & p) {
  return toString(p.a) + "~" + toString(p.b);
}

void writeMoments(Output & out, const Scenario & sc, const EnsembleResult & ens) {
  auto csv = out.csv("moments.csv", {"k", "location", "composition", "mean", "variance"});
  const Layout & layout = sc.layout();
  for (std::size_t k = 0; k < ens.mean.size(); ++k) {
    const Eigen::VectorXd var = ens.variance(static_cast<int>(k));
    for (int loc = 0; loc < layout.locations(); ++loc) {
      for (int c = 0; c < layout.compositions(); ++c) {
        const int i = layout.flatIndex(loc, c);
        csv.row() << static_cast<int>(k) << loc << sc.compositions().name(c) << ens.mean[k][i]
                  << var[i];
      }
    }
  }
  csv.close();
}

void writeVariogram(Output & out, const Scenario & sc, const MemberRun & run) {
  auto csv = out.csv("variogram.csv", {"k", "composition", "lag", "semivariance", "pairs"});
  const Layout & layout = sc.layout();
  for (std::size_t k = 0; k < run.series.analyses.size(); ++k) {
    const StateVector & xa = run.series.analyses[k].xA;
    for (int c = 0; c < layout.compositions(); ++c) {
      std::vector<double> field(layout.locations());
      for (int loc = 0; loc < layout.locations(); ++loc) field[loc] = xa.at(loc, c);
      const Variogram v = empiricalVariogram(sc.grid(), field, sc.grid().spacing(),
                                             sc.config().lab.variogramBins);
      for (std::size_t b = 0; b < v.lags.size(); ++b) {
        csv.row() << static_cast<int>(k) << sc.compositions().name(c) << v.lags[b]
                  << v.semivariance[b] << v.pairs[b];
      }
    }
  }
  csv.close();
}

void writeShiftcheck(Output & out, const std::vector<ShiftCheck> & checks) {
  auto csv = out.csv("shiftcheck.csv", {"k", "pass"});
  for (const auto & c : checks) csv.row() << c.k << c.pass;
  csv.close();
}

void writeDissection(Output & out, const Scenario & sc, const ErrorDissection & ed) {
  auto corr = out.csv("correlations.csv", {"pair", "k", "rho", "ci_low", "ci_high"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto & p : ed.correlations) {
    corr.row() << pairName(p) << p.k << p.estimate.rho.value_or(nan)
               << p.estimate.ciLow.value_or(nan) << p.estimate.ciHigh.value_or(nan);
  }
  corr.close();

  auto ledger = out.csv("ledger.csv", {"k", "component", "norm"});
  for (const auto & r : ed.ledger) ledger.row() << r.k << toString(r.component) << r.norm;
  ledger.close();

  const Layout & layout = sc.layout();
  const Eigen::MatrixXd & C = ed.analysisErrorCorrelation;
  auto grid = out.csv("error_correlation_grid.csv",
                      {"k", "composition", "location_a", "location_b", "rho"});
  for (int c = 0; c < layout.compositions(); ++c) {
    for (int a = 0; a < layout.locations(); ++a) {
      for (int b = a; b < layout.locations(); ++b) {
        grid.row() << ed.reportCycle << sc.compositions().name(c) << a << b
                   << C(layout.flatIndex(a, c), layout.flatIndex(b, c));
      }
    }
  }
  grid.close();

  auto comp = out.csv("error_correlation_composition.csv",
                      {"k", "location", "composition_a", "composition_b", "rho"});
  for (int loc = 0; loc < layout.locations(); ++loc) {
    for (int a = 0; a < layout.compositions(); ++a) {
      for (int b = a; b < layout.compositions(); ++b) {
        comp.row() << ed.reportCycle << loc << sc.compositions().name(a)
                   << sc.compositions().name(b)
                   << C(layout.flatIndex(loc, a), layout.flatIndex(loc, b));
      }
    }
  }
  comp.close();
}

// -----------------------------------------------------------------------------
/// One verdict line of verify.csv.
struct Verdict {
  std::string suite;
  std::string check;
  int k;
  double value;
  double threshold;
  bool pass;
};

void affineSuite(const Scenario & sc, const MemberRun & run, std::vector<Verdict> & v) {
  for (int k = 0; k < sc.nCycles(); ++k) {
    const AffineReport rep = verifyAffine(problemFor(sc, run, k), sc.config().lab.affineTrials,
                                          sc.seeds());
    v.push_back({"affine", "worst_residual", k, rep.worst(), 1e-10, rep.pass});
  }
}

void shiftSuite(const Scenario & sc, const MemberRun & run, std::vector<Verdict> & v,
                Output & out) {
  const auto checks = shiftMapDemo(run.series, OmegaSequence(run.windows),
                                   sc.cycleConfig(run.guess), sc.system());
  for (const auto & c : checks) {
    v.push_back({"shift", "bitwise_replay", c.k, c.maxAbsDifference, 0.0, c.pass});
  }
  writeShiftcheck(out, checks);
}

void neighborhoodSuite(const Scenario & sc, const MemberRun & run, std::vector<Verdict> & v,
                       std::ostream & log) {
  for (int k = 0; k < sc.nCycles(); ++k) {
    const auto checks = neighborhoodShiftDemo(sc.grid(), problemFor(sc, run, k),
                                              run.series.analyses[k]);
    int failures = 0;
    for (const auto & c : checks) {
      if (!c.pass) {
        ++failures;
        log << "neighborhood mismatch at cycle " << k << ": (" << c.location << ", "
            << c.neighbor << ")\n";
      }
    }
    v.push_back({"neighborhood", "shift_equalities_" + std::to_string(checks.size()), k,
                 static_cast<double>(failures), 0.0, failures == 0});
  }
}

void errorsSuite(const Scenario & sc, std::vector<Verdict> & v, Output & out) {
  const ErrorDissection ed = errorDissection(sc, sc.config().lab.members,
                                             sc.config().lab.threads);
  for (const auto & p : ed.correlations) {
    v.push_back({"errors", (p.expectDependent ? "dependent:" : "independent:") + pairName(p), p.k,
                 p.estimate.rho.value_or(std::numeric_limits<double>::quiet_NaN()),
                 ed.threshold, p.pass});
  }
  writeDissection(out, sc, ed);
}

void covarianceSuite(const Scenario & sc, const MemberRun & run, std::vector<Verdict> & v) {
  const WindowProblem p = problemFor(sc, run, 0);
  const double sigma = sc.noise().sigmaR;
  const int m = sc.config().lab.members;
  const Eigen::MatrixXd C = analyticAnalysisCovariance(p, sigma);
  const SampleMoments mc = monteCarloAnalysisMoments(p, sigma, m, sc.seeds(),
                                                     sc.config().lab.threads);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < C.rows(); ++i) {
    for (Eigen::Index j = 0; j < C.cols(); ++j) {
      const double sd = std::sqrt((C(i, j) * C(i, j) + C(i, i) * C(j, j)) / (m - 1));
      const double diff = std::abs(mc.covariance(i, j) - C(i, j));
      const double z = sd > 0.0 ? diff / sd : (diff <= 1e-12 ? 0.0 : INFINITY);
      worst = std::max(worst, z);
    }
  }
  v.push_back({"covariance", "max_sigma_units", 0, worst, 5.0, worst <= 5.0});
}

}  // namespace

// -----------------------------------------------------------------------------

ExitCode cmdTruth(const RunConfig & cfg, std::ostream & out) {
  const Scenario sc(cfg);
  Output o(cfg);
  const Trajectory truth = sc.truth(0);
  auto csv = o.csv("truth.csv", {"time", "location", "composition", "value"});
  for (const auto & x : truth) {
    for (int loc = 0; loc < sc.layout().locations(); ++loc) {
      for (int c = 0; c < sc.layout().compositions(); ++c) {
        csv.row() << x.time(sc.dynamics().dt()) << loc << sc.compositions().name(c)
                  << x.at(loc, c);
      }
    }
  }
  csv.close();
  o.meta("truth", {{"steps", sc.totalSteps()}});
  out << "truth: " << truth.size() << " states written to " << cfg.outputDir << "\n";
  return ExitCode::Pass;
}

ExitCode cmdObserve(const RunConfig & cfg, std::ostream & out) {
  const Scenario sc(cfg);
  Output o(cfg);
  const Trajectory truth = sc.truth(0);
  const auto windows = sc.observations(0, truth);
  auto csv = o.csv("observations.csv",
                   {"window", "time", "obs_index", "location", "composition", "y"});
  int count = 0;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    for (const auto & rec : windows[k]) {
      const auto it = std::find_if(sc.schedule().begin(), sc.schedule().end(),
                                   [&](const ScheduledOperator & s) {return s.step == rec.step;});
      for (Eigen::Index i = 0; i < rec.y.size(); ++i) {
        const ObservationSite & site = it->sites.at(i);
        csv.row() << static_cast<int>(k) << rec.step * sc.dynamics().dt() << static_cast<int>(i)
                  << siteText(site, sc.grid().dim()) << sc.compositions().name(site.composition)
                  << rec.y[i];
        ++count;
      }
    }
  }
  csv.close();
  o.meta("observe", {{"observations", count}});
  out << "observe: " << count << " observations in " << windows.size() << " windows\n";
  return ExitCode::Pass;
}

ExitCode cmdAssimilate(const RunConfig & cfg, std::ostream & out) {
  const Scenario sc(cfg);
  Output o(cfg);
  const MemberRun run = sc.runMember(0);
  auto an = o.csv("analyses.csv", {"k", "location", "composition", "x_A"});
  auto bg = o.csv("backgrounds.csv", {"k", "location", "composition", "x_B"});
  auto jt = o.csv("J_trace.csv", {"k", "J_at_min", "grad_norm"});
  double maxErr = 0.0;
  for (int k = 0; k < sc.nCycles(); ++k) {
    const AnalysisResult & a = run.series.analyses[k];
    writeStates(an, k, a.xA, sc.compositions());
    writeStates(bg, k, run.series.backgrounds[k], sc.compositions());
    jt.row() << k << a.costAtMin << a.gradientNorm;
    const Eigen::VectorXd d = a.xA.values() - run.truth[k * sc.windowSteps()].values();
    maxErr = std::max(maxErr, d.cwiseAbs().maxCoeff());
  }
  an.close();
  bg.close();
  jt.close();
  o.meta("assimilate", {{"max_abs_analysis_error", maxErr}});
  out << "assimilate: " << sc.nCycles() << " cycles, max |x_A - truth| = "
      << formatDouble(maxErr) << "\n";
  return ExitCode::Pass;
}

ExitCode cmdEnsemble(const RunConfig & cfg, std::ostream & out) {
  const Scenario sc(cfg);
  Output o(cfg);
  const EnsembleResult ens = ensembleAnalysis(sc, cfg.lab.members, cfg.lab.threads);
  writeMoments(o, sc, ens);
  writeVariogram(o, sc, sc.runMember(0));
  o.meta("ensemble", {{"members", ens.members}});
  out << "ensemble: " << ens.members << " members, " << ens.mean.size() << " cycles\n";
  return ExitCode::Pass;
}

ExitCode cmdVerify(const RunConfig & cfg, const std::string & suite, std::ostream & out) {
  std::vector<std::string> suites;
  if (suite == "all") {
    suites = kVerifySuites;
  } else if (std::find(kVerifySuites.begin(), kVerifySuites.end(), suite) != kVerifySuites.end()) {
    suites = {suite};
  } else {
    throw ConfigError("unknown verify suite '" + suite + "'");
  }
  const Scenario sc(cfg);
  Output o(cfg);
  const MemberRun run = sc.runMember(0);
  std::vector<Verdict> verdicts;
  for (const auto & s : suites) {
    if (s == "affine") affineSuite(sc, run, verdicts);
    if (s == "shift") shiftSuite(sc, run, verdicts, o);
    if (s == "neighborhood") neighborhoodSuite(sc, run, verdicts, out);
    if (s == "errors") errorsSuite(sc, verdicts, o);
    if (s == "covariance") covarianceSuite(sc, run, verdicts);
  }
  auto csv = o.csv("verify.csv", {"suite", "check", "k", "value", "threshold", "pass"});
  int failed = 0;
  for (const auto & v : verdicts) {
    csv.row() << v.suite << v.check << v.k << v.value << v.threshold << v.pass;
    if (!v.pass) ++failed;
  }
  csv.close();
  o.meta("verify", {{"suite", suite}, {"checks", verdicts.size()}, {"failed", failed}});
  out << "verify " << suite << ": " << verdicts.size() - failed << "/" << verdicts.size()
      << " checks pass\n";
  return failed == 0 ? ExitCode::Pass : ExitCode::PropertyFailure;
}

ExitCode cmdReport(const RunConfig & cfg, std::ostream & out) {
  const Scenario sc(cfg);
  Output o(cfg);
  const EnsembleResult ens = ensembleAnalysis(sc, cfg.lab.members, cfg.lab.threads);
  writeMoments(o, sc, ens);
  const MemberRun run = sc.runMember(0);
  writeVariogram(o, sc, run);
  writeShiftcheck(o, shiftMapDemo(run.series, OmegaSequence(run.windows),
                                  sc.cycleConfig(run.guess), sc.system()));
  bool dissected = false;
  if (cfg.lab.members >= 200) {
    writeDissection(o, sc, errorDissection(sc, cfg.lab.members, cfg.lab.threads));
    dissected = true;
  } else {
    out << "report: error dissection skipped, it needs at least 200 members\n";
  }
  o.meta("report", {{"members", ens.members}, {"error_dissection", dissected}});
  out << "report: written to " << cfg.outputDir << "\n";
  return ExitCode::Pass;
}

// -----------------------------------------------------------------------------

ExitCode runCommand(const std::string & name, const RunConfig & cfg, const std::string & suite,
                    std::ostream & out, std::ostream & err) {
  try {
    if (name == "truth") return cmdTruth(cfg, out);
    if (name == "observe") return cmdObserve(cfg, out);
    if (name == "assimilate") return cmdAssimilate(cfg, out);
    if (name == "ensemble") return cmdEnsemble(cfg, out);
    if (name == "verify") return cmdVerify(cfg, suite, out);
    if (name == "report") return cmdReport(cfg, out);
    throw ConfigError("unknown command '" + name + "'");
  } catch (const std::exception & e) {
    err << "error: " << e.what() << "\n";
    return exitCodeFor(e);
  }
}

}  // namespace varlab
