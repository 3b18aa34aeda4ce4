#include "cwrs/ablate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cwrs/errors.hpp"

namespace cwrs {
namespace {

struct Cell {
  std::string label;
  EreMode mode;
  int heads;
};

AblationRun run_cells(const std::string& name, const std::vector<Cell>& cells,
                      const CwkgStore& store, const AblationConfig& cfg) {
  if (cfg.seeds.empty()) throw InvalidValue("ablation needs at least one seed");
  AblationRun run;
  run.name = name;
  for (const Cell& cell : cells) {
    run.cells.push_back(cell.label);
    std::vector<double> hits;
    std::string error;
    for (uint64_t seed : cfg.seeds) {
      TrainConfig tc = cfg.base;
      tc.pipe.mode = cell.mode;
      tc.pipe.ere.heads = cell.heads;
      tc.seed = seed;
      try {
        hits.push_back(train(store, tc).report.hit_protocol);
      } catch (const Error& e) {
        hits.push_back(std::numeric_limits<double>::quiet_NaN());
        if (error.empty()) error = std::string("seed ") + std::to_string(seed) + ": " + e.what();
        run.complete = false;
      }
    }
    run.hits.push_back(std::move(hits));
    run.errors.push_back(std::move(error));
  }
  return run;
}

double cell_mean(const std::vector<double>& hits) {
  double s = 0;
  int n = 0;
  for (double h : hits)
    if (std::isfinite(h)) s += h, n++;
  return n ? s / n : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

AblationRun run_mode_grid(const CwkgStore& store, const AblationConfig& cfg) {
  return run_cells("enhancement modes",
                   {{"krl_only", EreMode::krl_only, 1},
                    {"conv", EreMode::conv, 1},
                    {"attn(H=1)", EreMode::attn, 1},
                    {"invo", EreMode::invo, 1}},
                   store, cfg);
}

AblationRun run_head_sweep(const CwkgStore& store, const AblationConfig& cfg) {
  std::vector<Cell> cells;
  for (int h : {1, 3, 5, 8})
    cells.push_back({"attn(H=" + std::to_string(h) + ")", EreMode::attn, h});
  return run_cells("attention heads", cells, store, cfg);
}

AblationRun run_cascades(const CwkgStore& store, const AblationConfig& cfg) {
  return run_cells("cascades",
                   {{"invo_then_attn(H=1)", EreMode::invo_then_attn, 1},
                    {"attn_then_invo(H=1)", EreMode::attn_then_invo, 1},
                    {"invo_then_attn(H=3)", EreMode::invo_then_attn, 3}},
                   store, cfg);
}

OrderingReport check_orderings(const AblationRun& modes, const AblationRun& heads,
                               const AblationRun& cascades, double tol) {
  OrderingReport rep;
  rep.n_seeds = modes.hits.empty() ? 0 : static_cast<int>(modes.hits[0].size());
  auto find = [](const AblationRun& run, const std::string& label) {
    for (size_t i = 0; i < run.cells.size(); ++i)
      if (run.cells[i] == label) return i;
    throw InvalidValue("ablation table lacks cell " + label);
  };
  size_t krl = find(modes, "krl_only"), attn1 = find(modes, "attn(H=1)"),
         invo = find(modes, "invo");
  size_t ia1 = find(cascades, "invo_then_attn(H=1)"), ai1 = find(cascades, "attn_then_invo(H=1)"),
         ia3 = find(cascades, "invo_then_attn(H=3)");
  for (int s = 0; s < rep.n_seeds; ++s) {
    auto ok = [](double a, double b, double t) {
      return std::isfinite(a) && std::isfinite(b) && a >= b - t;
    };
    if (ok(modes.hits[attn1][s], modes.hits[krl][s], tol) &&
        ok(modes.hits[invo][s], modes.hits[krl][s], tol))
      rep.votes_enhancement++;
    bool mono = true;
    for (size_t i = 0; i + 1 < heads.hits.size(); ++i)
      mono = mono && ok(heads.hits[i + 1][s], heads.hits[i][s], tol);
    if (mono && !heads.hits.empty()) rep.votes_heads++;
    if (ok(cascades.hits[ia3][s], cascades.hits[ia1][s], tol) &&
        ok(cascades.hits[ia3][s], cascades.hits[ai1][s], tol))
      rep.votes_cascade++;
  }
  rep.enhancement_helps = 2 * rep.votes_enhancement > rep.n_seeds;
  rep.heads_monotone = 2 * rep.votes_heads > rep.n_seeds;
  rep.cascade_best = 2 * rep.votes_cascade > rep.n_seeds;
  return rep;
}

std::string format_table(const AblationRun& run) {
  size_t width = 4;
  for (const std::string& c : run.cells) width = std::max(width, c.size());
  std::ostringstream out;
  out << "# " << run.name << (run.complete ? "" : " (INCOMPLETE)") << "\n";
  out << std::string(width, ' ') << "  ";
  size_t n_seeds = run.hits.empty() ? 0 : run.hits[0].size();
  for (size_t s = 0; s < n_seeds; ++s) out << "   run" << s + 1 << "  ";
  out << "   mean\n";
  for (size_t i = 0; i < run.cells.size(); ++i) {
    out << run.cells[i] << std::string(width - run.cells[i].size(), ' ') << "  ";
    for (double h : run.hits[i]) {
      if (std::isfinite(h)) {
        std::string v = format_double(std::round(h * 1e4) / 1e4);
        out << "  " << v << std::string(v.size() < 6 ? 6 - v.size() : 0, ' ');
      } else {
        out << "  FAILED";
      }
      out << "  ";
    }
    double m = cell_mean(run.hits[i]);
    out << "  " << (std::isfinite(m) ? format_double(std::round(m * 1e4) / 1e4) : "FAILED");
    if (!run.errors[i].empty()) out << "   [" << run.errors[i] << "]";
    out << "\n";
  }
  return out.str();
}

}  // namespace cwrs
