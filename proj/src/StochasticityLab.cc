/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "varlab/StochasticityLab.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

#include "varlab/Exceptions.h"

namespace varlab {

namespace {

bool bitwiseEqual(const Eigen::VectorXd & a, const Eigen::VectorXd & b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

double relativeMax(const Eigen::VectorXd & diff, double scale) {
  return diff.size() == 0 ? 0.0 : diff.cwiseAbs().maxCoeff() / std::max(1.0, scale);
}

double maxAbs(const Eigen::VectorXd & v) {return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();}

}  // namespace

// -----------------------------------------------------------------------------

void parallelFor(int n, int threads, const std::function<void(int)> & body) {
  if (n <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex errorMutex;
  auto work = [&]() {
    for (int i = next++; i < n && !failed; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(errorMutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto & t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// -----------------------------------------------------------------------------

EnsembleResult ensembleAnalysis(const Scenario & scenario, int members, int threads,
                                std::vector<MemberRun> * runs) {
  if (members < 2) throw ConfigError("an ensemble needs at least 2 members");
  const int K = scenario.nCycles();
  const int n = scenario.layout().size();
  std::vector<Eigen::MatrixXd> xa(K, Eigen::MatrixXd(members, n));
  std::vector<std::optional<MemberRun>> kept(runs ? members : 0);
  OperatorCache cache;
  parallelFor(members, threads, [&](int m) {
    MemberRun run = scenario.runMember(static_cast<std::uint32_t>(m), &cache);
    for (int k = 0; k < K; ++k) xa[k].row(m) = run.series.analyses[k].xA.values().transpose();
    if (runs) kept[m] = std::move(run);
  });
  if (runs) {
    runs->clear();
    for (auto & r : kept) runs->push_back(std::move(*r));
  }
  EnsembleResult out;
  out.members = members;
  for (int k = 0; k < K; ++k) {
    SampleMoments mom = sampleMoments(xa[k]);
    out.mean.push_back(std::move(mom.mean));
    out.covariance.push_back(std::move(mom.covariance));
  }
  return out;
}

// -----------------------------------------------------------------------------

Eigen::MatrixXd analyticAnalysisCovariance(const GainOperators & gains,
                                           const std::vector<Eigen::MatrixXd> & Rtrue) {
  if (gains.K.size() != Rtrue.size()) {
    throw DomainError("one true error covariance is needed per observation time");
  }
  const Eigen::Index n = gains.L.rows();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < Rtrue.size(); ++i) {
    if (Rtrue[i].rows() != gains.K[i].cols() || Rtrue[i].cols() != gains.K[i].cols()) {
      throw DomainError("true error covariance does not match the gain");
    }
    P.noalias() += gains.K[i] * Rtrue[i] * gains.K[i].transpose();
  }
  return 0.5 * (P + P.transpose());
}

Eigen::MatrixXd analyticAnalysisCovariance(const WindowProblem & p, double sigmaRTrue) {
  if (!(sigmaRTrue >= 0.0)) throw DomainError("true observation sigma must be nonnegative");
  const GainOperators gains = gainOperators(p);
  std::vector<Eigen::MatrixXd> R;
  for (const auto & K : gains.K) {
    R.push_back(sigmaRTrue * sigmaRTrue * Eigen::MatrixXd::Identity(K.cols(), K.cols()));
  }
  return analyticAnalysisCovariance(gains, R);
}

SampleMoments monteCarloAnalysisMoments(const WindowProblem & p, double sigmaRTrue, int members,
                                        const SeedPlan & seeds, int threads) {
  if (members < 2) throw DomainError("need at least 2 members");
  Eigen::MatrixXd xa(members, p.size());
  // Build the factorization once, before the workers share it.
  p.operators().hessianFactor();
  parallelFor(members, threads, [&](int m) {
    std::vector<Eigen::VectorXd> ys = p.observations();
    for (std::size_t i = 0; i < ys.size(); ++i) {
      RandomStream rng = seeds.stream(static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(i),
                                      StreamPurpose::ObservationNoise);
      ys[i] += sigmaRTrue * rng.normals(static_cast<int>(ys[i].size()));
    }
    xa.row(m) = solveWindow(p.withObservations(std::move(ys))).xA.values().transpose();
  });
  return sampleMoments(xa);
}

// -----------------------------------------------------------------------------

double AffineReport::worst() const {
  return std::max({offsetResidual, gainResidual, superpositionResidual, scalingResidual});
}

AffineReport verifyAffine(const WindowProblem & p, int trials, const SeedPlan & seeds,
                          double tol) {
  if (trials < 3) throw DomainError("affinity check needs at least 3 trials");
  const auto & base = p.observations();
  auto G = [&](const std::vector<Eigen::VectorXd> & ys) -> Eigen::VectorXd {
    return solveWindow(p.withObservations(ys)).xA.values();
  };
  auto zerosLike = [&]() {
    std::vector<Eigen::VectorXd> z;
    for (const auto & y : base) z.push_back(Eigen::VectorXd::Zero(y.size()));
    return z;
  };

  AffineReport rep;
  const GainOperators gains = gainOperators(p);

  // Offset C_t = L x^B.
  const Eigen::VectorXd c = G(zerosLike());
  const Eigen::VectorXd Lxb = gains.L * p.background().values();
  rep.offsetResidual = relativeMax(c - Lxb, std::max(maxAbs(c), maxAbs(Lxb)));
  ++rep.probes;

  // Unit probes give the columns of each K_i.
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (Eigen::Index j = 0; j < base[i].size(); ++j) {
      std::vector<Eigen::VectorXd> ys = zerosLike();
      ys[i][j] = 1.0;
      const Eigen::VectorXd col = G(ys) - c;
      const Eigen::VectorXd ref = gains.K[i].col(j);
      rep.gainResidual = std::max(rep.gainResidual,
                                  relativeMax(col - ref, std::max(maxAbs(col), maxAbs(ref))));
      ++rep.probes;
    }
  }

  // Superposition on random probes, and scaling by 3.
  for (int t = 0; t < trials; ++t) {
    RandomStream rng = seeds.stream(0, static_cast<std::uint32_t>(t), StreamPurpose::Bootstrap);
    std::vector<Eigen::VectorXd> y1, y2, mix, tripled;
    const double a = 2.0 * rng.uniform() - 1.0;
    const double b = 2.0 * rng.uniform() - 1.0;
    for (const auto & y : base) {
      y1.push_back(rng.normals(static_cast<int>(y.size())));
      y2.push_back(rng.normals(static_cast<int>(y.size())));
      mix.push_back(a * y1.back() + b * y2.back());
      tripled.push_back(3.0 * y1.back());
    }
    const Eigen::VectorXd d1 = G(y1) - c;
    const Eigen::VectorXd d2 = G(y2) - c;
    const Eigen::VectorXd dm = G(mix) - c;
    const Eigen::VectorXd d3 = G(tripled) - c;
    const Eigen::VectorXd lin = a * d1 + b * d2;
    rep.superpositionResidual = std::max(rep.superpositionResidual,
                                         relativeMax(dm - lin, std::max(maxAbs(dm), maxAbs(lin))));
    rep.scalingResidual = std::max(rep.scalingResidual,
                                   relativeMax(d3 - 3.0 * d1, maxAbs(d3)));
    rep.probes += 4;
  }
  rep.pass = rep.worst() <= tol;
  return rep;
}

// -----------------------------------------------------------------------------

OmegaSequence OmegaSequence::shifted(int k) const {
  if (k < 0 || k > size()) throw DomainError("shift beyond the stored sequence");
  OmegaSequence out(std::vector<ObservationSet>(windows_.begin() + k, windows_.end()));
  out.head_ = head_ + k;
  return out;
}

std::vector<ShiftCheck> shiftMapDemo(const AnalysisSeries & series, const OmegaSequence & omega,
                                     const CycleConfig & cfg, const AssimilationSystem & system) {
  const int K = static_cast<int>(series.analyses.size());
  if (omega.size() < K) throw DomainError("omega sequence is shorter than the series");
  std::vector<ShiftCheck> out;
  std::optional<AnalysisResult> previous;
  for (int k = 0; k < K; ++k) {
    const OmegaSequence shifted = omega.shifted(k);
    // The window map only sees the head of the shifted sequence.
    const StateVector background = makeBackground(shifted.head(), previous ? &*previous : nullptr,
                                                  cfg.initialGuess, system.M, cfg.windowSteps);
    const WindowProblem p = buildWindowProblem(shifted.head(), background, shifted[0], system,
                                               cfg.windowSteps);
    AnalysisResult replay = solveWindow(p);
    const Eigen::VectorXd & stored = series.analyses[k].xA.values();
    const bool same = bitwiseEqual(replay.xA.values(), stored);
    out.push_back({k, same, maxAbs(replay.xA.values() - stored)});
    previous = std::move(replay);
  }
  return out;
}

// -----------------------------------------------------------------------------

namespace {

/// omega_s: a location together with the window data it was drawn with.
struct LocationSample {
  int location;
  const WindowProblem * window;
};

/// The window map read at the sample element's location.
Eigen::VectorXd evaluateAt(const LocationSample & w, const Layout & layout) {
  const Eigen::VectorXd xa = solveWindow(*w.window).xA.values();
  Eigen::VectorXd out(layout.compositions());
  for (int c = 0; c < layout.compositions(); ++c) out[c] = xa[layout.flatIndex(w.location, c)];
  return out;
}

Eigen::VectorXd storedAt(const AnalysisResult & a, int location) {
  const Layout & layout = a.xA.layout();
  Eigen::VectorXd out(layout.compositions());
  for (int c = 0; c < layout.compositions(); ++c) out[c] = a.xA.at(location, c);
  return out;
}

}  // namespace

std::vector<NeighborCheck> neighborhoodShiftDemo(const GridGeometry & grid,
                                                 const WindowProblem & window,
                                                 const AnalysisResult & analysis) {
  const Layout & layout = analysis.xA.layout();
  if (layout.locations() != grid.size()) throw DomainError("analysis does not match grid");
  std::vector<LocationSample> omega;
  for (int s = 0; s < grid.size(); ++s) omega.push_back({s, &window});

  std::vector<NeighborCheck> out;
  if (grid.dim() == 1) {
    // T(omega_{s0}, omega_{s1}, ...) = (omega_{s1}, omega_{s2}, ...)
    const std::vector<LocationSample> shifted(omega.begin() + 1, omega.end());
    for (int j = 0; j + 1 < grid.size(); ++j) {
      const bool ok = bitwiseEqual(evaluateAt(shifted[j], layout), storedAt(analysis, j + 1));
      out.push_back({j, j + 1, ok});
    }
    return out;
  }

  const int nx = grid.shape()[0];
  const int ny = grid.shape()[1];
  const int dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int s = 0; s < grid.size(); ++s) {
    const auto cell = grid.cellIndex(s);
    for (const auto & d : dirs) {
      const int ix = cell[0] + d[0];
      const int iy = cell[1] + d[1];
      if (ix < 0 || ix >= nx || iy < 0 || iy >= ny) continue;
      // Directional shift: (T_d omega)_s = omega_{s + d}.
      const LocationSample & moved = omega[grid.locationAt(ix, iy)];
      const int neighbor = grid.locationAt(ix, iy);
      const bool ok = bitwiseEqual(evaluateAt(moved, layout), storedAt(analysis, neighbor));
      out.push_back({s, neighbor, ok});
    }
  }
  return out;
}

// -----------------------------------------------------------------------------

std::string toString(ErrorComponent c) {
  switch (c) {
    case ErrorComponent::InputError: return "input_error";
    case ErrorComponent::ModelDiscrepancy: return "model_discrepancy";
    case ErrorComponent::ObservationError: return "obs_error";
  }
  return "unknown";
}

ErrorSample dissectCycle(const Scenario & scenario, const MemberRun & run, int k) {
  const int W = scenario.windowSteps();
  const int start = k * W;
  const StateVector & xb = run.series.backgrounds.at(k);
  const Eigen::MatrixXd & M = scenario.system().M.matrix();
  const NonlinearModel & truthModel = scenario.world().model();

  ErrorSample e;
  e.inputError = xb.values() - run.truth.at(start).values();

  e.discrepancy = Eigen::VectorXd::Zero(xb.size());
  Eigen::VectorXd x = xb.values();
  for (int j = 0; j < W; ++j) {
    const Eigen::VectorXd Mx = M * x;
    e.discrepancy += truthModel.step(x) - Mx;
    x = Mx;
  }

  Eigen::Index total = 0;
  for (const auto & rec : run.windows.at(k)) total += rec.y.size();
  e.observationError.resize(total);
  Eigen::Index pos = 0;
  for (const auto & rec : run.windows.at(k)) {
    const Eigen::VectorXd r = rec.y - predictObservations(rec.H, run.truth.at(rec.step));
    e.observationError.segment(pos, r.size()) = r;
    pos += r.size();
  }
  return e;
}

bool ErrorDissection::pass() const {
  return std::all_of(correlations.begin(), correlations.end(),
                     [](const PairCorrelation & c) {return c.pass;});
}

ErrorDissection errorDissection(const Scenario & scenario, int members, int threads) {
  if (members < 200) {
    throw ConfigError("error dissection needs at least 200 members, got "
                      + std::to_string(members));
  }
  const int K = scenario.nCycles();
  const int n = scenario.layout().size();
  const LabConfig & lab = scenario.config().lab;

  // norms[k][component] holds one value per member.
  std::vector<std::array<std::vector<double>, 3>> norms(K);
  for (auto & byComp : norms) {
    for (auto & v : byComp) v.resize(members);
  }
  const int reportCycle = K - 1;
  Eigen::MatrixXd analysisError(members, n);

  OperatorCache cache;
  parallelFor(members, threads, [&](int m) {
    const MemberRun run = scenario.runMember(static_cast<std::uint32_t>(m), &cache);
    for (int k = 0; k < K; ++k) {
      const ErrorSample e = dissectCycle(scenario, run, k);
      norms[k][0][m] = e.inputError.norm();
      norms[k][1][m] = e.discrepancy.norm();
      norms[k][2][m] = e.observationError.norm();
    }
    analysisError.row(m) = (run.series.analyses[reportCycle].xA.values()
                            - run.truth[reportCycle * scenario.windowSteps()].values()).transpose();
  });

  ErrorDissection out;
  out.members = members;
  out.threshold = lab.significance / std::sqrt(static_cast<double>(members));
  out.reportCycle = reportCycle;

  const ErrorComponent comps[3] = {ErrorComponent::InputError, ErrorComponent::ModelDiscrepancy,
                                   ErrorComponent::ObservationError};
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int k = 0; k < K; ++k) {
    for (int c = 0; c < 3; ++c) {
      CompensatedSum sum(1);
      for (double v : norms[k][c]) sum.add(Eigen::ArrayXd::Constant(1, v));
      out.ledger.push_back({k, comps[c], sum.value()[0] / members});
    }
    for (int p = 0; p < 3; ++p) {
      const int a = pairs[p][0];
      const int b = pairs[p][1];
      RandomStream rng = scenario.seeds().stream(static_cast<std::uint32_t>(k),
                                                 static_cast<std::uint32_t>(p),
                                                 StreamPurpose::Bootstrap);
      PairCorrelation pc{k, comps[a], comps[b],
                         bootstrapCorrelation(norms[k][a], norms[k][b], lab.bootstrap,
                                              lab.confidence, rng),
                         k >= 1 && a == 0 && b == 1, false};
      if (pc.expectDependent) {
        pc.pass = pc.estimate.rho && std::abs(*pc.estimate.rho) > out.threshold;
      } else {
        // A constant component is independent of everything.
        pc.pass = !pc.estimate.rho || std::abs(*pc.estimate.rho) <= out.threshold;
      }
      out.correlations.push_back(pc);
    }
  }
  out.analysisErrorCorrelation = correlationFromCovariance(sampleMoments(analysisError).covariance);
  return out;
}

}  // namespace varlab
