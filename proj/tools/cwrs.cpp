#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cwrs/ablate.hpp"
#include "cwrs/cf.hpp"
#include "cwrs/checkpoint.hpp"
#include "cwrs/errors.hpp"
#include "cwrs/kg.hpp"
#include "cwrs/synth.hpp"

namespace fs = std::filesystem;
using namespace cwrs;

namespace {

// 0 success, 1 usage, 2 data error, 3 numeric failure
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int classify(const Error& e) {
  if (dynamic_cast<const DivergenceDetected*>(&e) || dynamic_cast<const NonFiniteValue*>(&e) ||
      dynamic_cast<const NonFiniteGradient*>(&e))
    return kExitNumeric;
  return kExitData;
}

void echo_config(const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) std::cout << "config " << k << "=" << v << "\n";
}

std::pair<int, int> parse_split(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError("--split", "expected a:b, got '" + s + "'");
  try {
    int a = std::stoi(s.substr(0, colon));
    int b = std::stoi(s.substr(colon + 1));
    if (a < 1 || b < 0) throw std::invalid_argument("negative");
    return {a, b};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--split", "expected a:b with a>=1, b>=0, got '" + s + "'");
  }
}

std::vector<uint64_t> parse_seed_list(const std::string& s) {
  std::vector<uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoull(item));
  }
  if (out.empty()) throw CLI::ValidationError("--seeds", "no seeds in '" + s + "'");
  return out;
}

std::string fmt4(double v) { return format_double(std::round(v * 1e4) / 1e4); }

// relation=value lines; # starts a comment, blank lines ignored
std::vector<std::pair<std::string, std::string>> read_env_description(const std::string& path,
                                                                      const CwkgStore& store) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int ln = 0;
  while (std::getline(f, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string core = line.substr(0, line.find('#'));
    auto strip = [](std::string s) {
      size_t a = s.find_first_not_of(" \t");
      if (a == std::string::npos) return std::string();
      size_t b = s.find_last_not_of(" \t");
      return s.substr(a, b - a + 1);
    };
    if (strip(core).empty()) continue;
    auto eq = core.find('=');
    if (eq == std::string::npos) throw ParseError("expected relation=value, got '" + line + "'", ln);
    std::string rel = strip(core.substr(0, eq));
    std::string value = strip(core.substr(eq + 1));
    if (rel.empty() || value.empty())
      throw ParseError("expected relation=value, got '" + line + "'", ln);
    const RelationDef* def = store.find_relation(rel);
    if (!def || def->side != Side::environment)
      throw ParseError("'" + rel + "' is not an environment relation", ln);
    out.emplace_back(rel, value);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> metrics_from_report(const EvalReport& rep) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("hit@1", format_double(rep.hit_at_1));
  for (const auto& [k, v] : rep.hit_at_k)
    if (k != 1) kv.emplace_back("hit@" + std::to_string(k), format_double(v));
  kv.emplace_back("hit@1_protocol", format_double(rep.hit_protocol));
  kv.emplace_back("convergence_epoch", std::to_string(rep.convergence_epoch));
  kv.emplace_back("n_test_environments", std::to_string(rep.n_test));
  if (!rep.l1_curve.empty())
    kv.emplace_back("final_l1", format_double(rep.l1_curve.back()));
  if (!rep.l2_curve.empty())
    kv.emplace_back("final_l2", format_double(rep.l2_curve.back()));
  for (const auto& [k, v] : rep.config) kv.emplace_back(k, v);
  return kv;
}

int cmd_synth(int n_wf, int n_env, uint64_t seed, const std::string& out,
              const std::string& oracle_path) {
  OracleConfig oracle =
      oracle_path.empty() ? default_oracle_config() : load_oracle_config(oracle_path);
  echo_config({{"waveforms", std::to_string(n_wf)},
               {"environments", std::to_string(n_env)},
               {"seed", std::to_string(seed)},
               {"oracle", oracle_path.empty() ? "<default>" : oracle_path},
               {"out", out}});
  CwkgStore store = gen_corpus(n_wf, n_env, oracle, seed);
  store.save(out);
  int n_edges = static_cast<int>(store.subgraph_triples(Subgraph::EWBG).size());
  std::cout << "waveforms=" << n_wf << " environments=" << n_env
            << " entities=" << store.entities().size() << " triples=" << store.triples().size()
            << " feasible_edges=" << n_edges << " density=" << fmt4(ewbg_density(store)) << "\n"
            << "wrote " << out << "\n";
  return 0;
}

int cmd_train(const std::string& kg_path, const std::string& out_dir, TrainConfig cfg) {
  CwkgStore store = CwkgStore::load(kg_path);
  fs::create_directories(out_dir);
  echo_config(config_echo(cfg));
  TrainResult res = train(store, cfg);
  const EvalReport& rep = res.report;

  std::string ckpt = (fs::path(out_dir) / "model.ckpt").string();
  std::map<std::string, std::string> extra;
  extra["kg_file"] = fs::path(kg_path).filename().string();
  extra["train_seed"] = std::to_string(cfg.seed);
  extra["epochs"] = std::to_string(cfg.epochs);
  save_model(ckpt, res.model, extra);
  write_metrics((fs::path(out_dir) / "metrics.txt").string(), metrics_from_report(rep));

  std::cout << "train_edges=" << res.train_edges.size() << " test_edges=" << res.test_edges.size()
            << " test_environments=" << rep.n_test << "\n";
  if (!rep.l1_curve.empty())
    std::cout << "final ranking loss " << fmt4(rep.l1_curve.back()) << ", final cross-entropy "
              << fmt4(rep.l2_curve.back()) << "\n";
  std::cout << "hit@1 " << fmt4(rep.hit_at_1);
  for (const auto& [k, v] : rep.hit_at_k)
    if (k != 1) std::cout << "  hit@" << k << " " << fmt4(v);
  std::cout << "  (protocol average " << fmt4(rep.hit_protocol) << ", convergence epoch "
            << rep.convergence_epoch << ")\n";
  std::cout << "wrote " << ckpt << " and " << (fs::path(out_dir) / "metrics.txt").string() << "\n";
  return 0;
}

int cmd_recommend(const std::string& model_path, const std::string& kg_path,
                  const std::string& env_path, int top_k) {
  Model model = load_model(model_path);
  CwkgStore store = CwkgStore::load(kg_path);
  auto description = read_env_description(env_path, store);
  int n_wf = static_cast<int>(store.entities_of_kind(EntityKind::waveform_head).size());
  if (top_k > n_wf) {
    std::cerr << "warning: --top-k " << top_k << " clamped to the " << n_wf
              << " known waveforms\n";
    top_k = n_wf;
  }
  echo_config({{"model", model_path},
               {"kg", kg_path},
               {"env", env_path},
               {"top_k", std::to_string(top_k)}});
  auto ranked = recommend(description, model, store, top_k);
  std::cout << "rank  waveform  probability\n";
  for (size_t i = 0; i < ranked.size(); ++i) {
    std::ostringstream row;
    row << i + 1;
    std::cout << row.str() << std::string(row.str().size() < 4 ? 4 - row.str().size() : 1, ' ')
              << "  " << ranked[i].first
              << std::string(ranked[i].first.size() < 8 ? 8 - ranked[i].first.size() : 1, ' ')
              << "  " << format_double(ranked[i].second) << "\n";
  }
  return 0;
}

int cmd_ablate(const std::string& kg_path, const std::string& out_dir, AblationConfig cfg) {
  CwkgStore store = CwkgStore::load(kg_path);
  fs::create_directories(out_dir);
  auto echo = config_echo(cfg.base);
  echo.erase("seed");
  std::string seeds;
  for (size_t i = 0; i < cfg.seeds.size(); ++i)
    seeds += (i ? "," : "") + std::to_string(cfg.seeds[i]);
  echo["seeds"] = seeds;
  echo_config(echo);

  AblationRun modes = run_mode_grid(store, cfg);
  AblationRun heads = run_head_sweep(store, cfg);
  AblationRun cascades = run_cascades(store, cfg);
  OrderingReport ord = check_orderings(modes, heads, cascades);

  std::ostringstream text;
  text << format_table(modes) << "\n" << format_table(heads) << "\n" << format_table(cascades)
       << "\n"
       << "enhancement_helps=" << (ord.enhancement_helps ? 1 : 0) << " ("
       << ord.votes_enhancement << "/" << ord.n_seeds << " runs)\n"
       << "heads_monotone=" << (ord.heads_monotone ? 1 : 0) << " (" << ord.votes_heads << "/"
       << ord.n_seeds << " runs)\n"
       << "cascade_best=" << (ord.cascade_best ? 1 : 0) << " (" << ord.votes_cascade << "/"
       << ord.n_seeds << " runs)\n";
  std::cout << text.str();
  std::ofstream f(fs::path(out_dir) / "ablation.txt", std::ios::binary);
  if (!f) throw IoFailure("cannot write ablation table");
  f << text.str();

  if (!modes.complete || !heads.complete || !cascades.complete) {
    std::cerr << "error: some ablation cells failed; tables marked incomplete\n";
    return kExitNumeric;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"knowledge-graph waveform recommendation pipeline"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  int n_wf = 40, n_env = 2000;
  uint64_t synth_seed = 0;
  std::string synth_out = "kg.txt", oracle_path;
  synth->add_option("--waveforms", n_wf, "waveform count")->check(CLI::Range(2, 100000));
  synth->add_option("--environments", n_env, "environment count")->check(CLI::Range(2, 10000000));
  synth->add_option("--seed", synth_seed, "corpus seed");
  synth->add_option("-o,--out", synth_out, "output file");
  synth->add_option("--oracle-config", oracle_path, "feasibility rule configuration");

  // train
  auto* tr = app.add_subcommand("train", "train the recommendation pipeline");
  std::string kg_path, out_dir = ".", mode_str = "invo_then_attn", split_str = "10:2";
  TrainConfig tc;
  tr->add_option("--kg", kg_path, "corpus file")->required();
  tr->add_option("--out-dir", out_dir, "output directory");
  tr->add_option("--ere-mode", mode_str,
                 "krl_only|attn|invo|conv|invo_then_attn|attn_then_invo");
  tr->add_option("--heads", tc.pipe.ere.heads, "attention heads")->check(CLI::Range(1, 64));
  tr->add_option("--epochs", tc.epochs, "training epochs")->check(CLI::Range(0, 1000000));
  tr->add_option("--lr", tc.lr, "Adam learning rate");
  tr->add_option("--split", split_str, "train:test environment ratio");
  tr->add_option("--seed", tc.seed, "training seed");
  tr->add_option("--n-emb", tc.pipe.n_emb, "embedding width")->check(CLI::Range(2, 512));
  tr->add_option("--kernel", tc.pipe.ere.K, "involution kernel size (odd)");
  tr->add_option("--groups", tc.pipe.ere.G, "involution kernel groups");
  tr->add_option("--l1-chunk", tc.l1_chunk, "ranking pairs per optimizer step");
  tr->add_option("--l2-batch", tc.l2_batch, "environments per optimizer step");
  bool paper_sign = false, train_emb_l2 = false, no_epoch_eval = false;
  tr->add_flag("--bpr-paper-sign", paper_sign, "flip the ranking-loss margin sign");
  tr->add_flag("--train-embeddings-in-l2", train_emb_l2,
               "update entity vectors during the cross-entropy pass");
  tr->add_flag("--no-epoch-eval", no_epoch_eval,
               "skip per-epoch test evaluation (faster; no protocol curve)");

  // recommend
  auto* rec = app.add_subcommand("recommend", "rank waveforms for an environment");
  std::string model_path, rec_kg, env_path;
  int top_k = 3;
  rec->add_option("--model", model_path, "trained checkpoint")->required();
  rec->add_option("--kg", rec_kg, "corpus file")->required();
  rec->add_option("--env", env_path, "environment description (relation=value lines)")
      ->required();
  rec->add_option("--top-k", top_k, "listing length")->check(CLI::Range(1, 1000000));

  // ablate
  auto* ab = app.add_subcommand("ablate", "run the enhancement ablation sweeps");
  std::string ab_kg, ab_out = ".", ab_split = "10:2", seeds_str = "1,2,3";
  AblationConfig ac;
  ab->add_option("--kg", ab_kg, "corpus file")->required();
  ab->add_option("--out-dir", ab_out, "output directory");
  ab->add_option("--epochs", ac.base.epochs, "epochs per cell")->check(CLI::Range(1, 1000000));
  ab->add_option("--lr", ac.base.lr, "Adam learning rate");
  ab->add_option("--split", ab_split, "train:test environment ratio");
  ab->add_option("--seeds", seeds_str, "comma-separated run seeds");
  ab->add_option("--n-emb", ac.base.pipe.n_emb, "embedding width")->check(CLI::Range(2, 512));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitUsage : 0;
  }

  try {
    if (*synth) return cmd_synth(n_wf, n_env, synth_seed, synth_out, oracle_path);
    if (*tr) {
      auto mode = ere_mode_from(mode_str);
      if (!mode) {
        std::cerr << "error: unknown --ere-mode '" << mode_str << "'\n";
        return kExitUsage;
      }
      tc.pipe.mode = *mode;
      std::tie(tc.split_a, tc.split_b) = parse_split(split_str);
      tc.pipe.bpr_paper_sign = paper_sign;
      tc.pipe.freeze_embeddings_in_l2 = !train_emb_l2;
      tc.eval_each_epoch = !no_epoch_eval;
      return cmd_train(kg_path, out_dir, tc);
    }
    if (*rec) return cmd_recommend(model_path, rec_kg, env_path, top_k);
    if (*ab) {
      std::tie(ac.base.split_a, ac.base.split_b) = parse_split(ab_split);
      ac.seeds = parse_seed_list(seeds_str);
      return cmd_ablate(ab_kg, ab_out, ac);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
