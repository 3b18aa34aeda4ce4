#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "cwrs/cf.hpp"

namespace cwrs {

struct AblationConfig {
  TrainConfig base;                       // mode/heads overridden per cell
  std::vector<uint64_t> seeds = {1, 2, 3};
};

// one sweep: a list of cells, each trained once per seed
struct AblationRun {
  std::string name;
  std::vector<std::string> cells;
  std::vector<std::vector<double>> hits;  // [cell][seed], protocol Hit@1; NaN on failure
  std::vector<std::string> errors;        // per cell, empty when all seeds trained
  bool complete = true;
};

// enhancement variants vs the plain-embedding and convolution baselines
AblationRun run_mode_grid(const CwkgStore& store, const AblationConfig& cfg);
// attention head counts 1, 3, 5, 8
AblationRun run_head_sweep(const CwkgStore& store, const AblationConfig& cfg);
// two-stage cascades
AblationRun run_cascades(const CwkgStore& store, const AblationConfig& cfg);

// Qualitative claims checked per seed; a claim holds when a majority of seeds
// satisfies it. tol absorbs run-to-run noise in Hit@1 differences.
struct OrderingReport {
  bool enhancement_helps = false;  // attn(1) and invo both >= krl_only - tol
  bool heads_monotone = false;     // Hit@1 non-decreasing in H within tol
  bool cascade_best = false;       // invo_then_attn(3) >= other cascades - tol
  int votes_enhancement = 0, votes_heads = 0, votes_cascade = 0;
  int n_seeds = 0;
};

OrderingReport check_orderings(const AblationRun& modes, const AblationRun& heads,
                               const AblationRun& cascades, double tol = 0.01);

std::string format_table(const AblationRun& run);

}  // namespace cwrs
