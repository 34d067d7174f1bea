#pragma once

#include <utility>
#include <vector>

#include "mmwsim/learning.hpp"
#include "mmwsim/scenario.hpp"
#include "mmwsim/sim_baseline.hpp"
#include "mmwsim/sim_dualband.hpp"
#include "mmwsim/sim_rrh.hpp"

namespace mmwsim {

struct LearnedState {
  FingerprintDatabases dbs;
  std::vector<std::vector<ExemplarSet>> exemplars;
};

inline LearnedState build_learning(const Environment& env,
                                   const RadioConfig& rc,
                                   const LearningConfig& lc) {
  LearnedState out;
  out.dbs = build_databases(env, rc);
  out.exemplars.resize(env.num_aps());
  for (int n = 0; n < env.num_aps(); ++n)
    out.exemplars[n] = build_exemplars(out.dbs, n, lc.ap_params);
  return out;
}

inline RunResult run_scenario(const Scenario& sc, Protocol protocol) {
  switch (protocol) {
    case Protocol::Baseline:
      return BaselineSim(sc).run();
    case Protocol::CentralizedRrh:
      return RrhSim(sc).run();
    case Protocol::DualBand: {
      auto learned = build_learning(sc.env, sc.radio, sc.learn);
      return DualBandSim(sc, learned.dbs, std::move(learned.exemplars)).run();
    }
  }
  throw ConfigError("unknown protocol");
}

}  // namespace mmwsim
