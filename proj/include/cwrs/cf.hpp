#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cwrs/ere.hpp"
#include "cwrs/kg.hpp"
#include "cwrs/krl.hpp"
#include "cwrs/params.hpp"

namespace cwrs {

struct PipelineConfig {
  int n_emb = 16;
  EreMode mode = EreMode::invo_then_attn;
  EreConfig ere;                        // K=5, G=1, heads=3 defaults
  std::vector<int> mlp_hidden = {64, 32};
  double mlp_leaky_slope = 0.01;
  bool bpr_paper_sign = false;          // see bpr_loss_var
  bool freeze_embeddings_in_l2 = true;  // entity vectors fixed during the CF pass
};

struct TrainConfig {
  PipelineConfig pipe;
  int epochs = 150;
  double lr = 0.001;
  int split_a = 10;
  int split_b = 2;
  uint64_t seed = 0;
  int l1_chunk = 2048;  // ranking-loss pairs per optimizer step
  int l2_batch = 64;    // environments per optimizer step
  bool eval_each_epoch = true;
  std::vector<int> k_list = {1, 3};
};

struct Model {
  ParamStore params;
  PipelineConfig pipe;

  explicit Model(uint64_t seed = 0) : params(seed) {}
};

struct ScoreVector {
  std::string env;
  std::vector<std::string> waveforms;  // sorted ids, length M
  Tensor s;                            // raw scores
  Tensor y;                            // softmax probabilities
};

struct EvalReport {
  double hit_at_1 = 0;
  std::map<int, double> hit_at_k;
  int n_test = 0;
  int n_hit = 0;
  std::vector<double> l1_curve, l2_curve, hit_curve;
  double hit_protocol = -1;    // trailing-window average of hit_curve
  int convergence_epoch = -1;  // -1 = moving average never settled
  std::map<std::string, std::string> config;
  uint64_t seed = 0;
};

struct TrainResult {
  Model model;
  EvalReport report;
  std::vector<Triple> train_edges, test_edges;

  explicit TrainResult(uint64_t seed = 0) : model(seed) {}
};

struct CfBatchItem {
  std::string env, wf;
  double label = 0;  // 1 available, 0 unavailable/unknown
};

// enhancement output for one head under the model's config
Var enhanced_rep(const CwkgStore& store, const std::string& head, Model& model,
                 bool train_embeddings);

// perceptron cascade then inner product with the coefficient vector
Var cf_score(const Var& z_u, const Var& z_v, ParamStore& ps, const PipelineConfig& pipe);

// batched scores for (z_u ++ z_v) rows, shape (B,)
Var cf_scores_batch(const Var& X, ParamStore& ps, const PipelineConfig& pipe);

// sum of per-pair binary cross-entropies over a balanced batch (equal counts
// of available and unavailable samples); probabilities are per-pair sigmoids
Var ce_loss(const std::vector<CfBatchItem>& batch, const CwkgStore& store, Model& model);

// One unavailable waveform per positive edge, uniform over the waveforms with
// no training edge to that environment; |negatives| == |positives|. Throws
// NoNegativeAvailable when some environment connects to every waveform.
std::vector<std::pair<std::string, std::string>> sample_cf_negatives(
    const std::vector<Triple>& positives, const CwkgStore& store, uint64_t seed);

// full pipeline over all M waveforms, then softmax
ScoreVector score_all(const std::string& env_id, const CwkgStore& store, Model& model);

TrainResult train(const CwkgStore& store, const TrainConfig& cfg);

EvalReport evaluate(Model& model, const std::vector<Triple>& test_triples,
                    const CwkgStore& store, const std::vector<int>& k_list);

// env_description: (relation, value) pairs over the environment schema; may
// reference never-seen tail values. The store is left untouched and no
// parameter is created or modified.
std::vector<std::pair<std::string, double>> recommend(
    const std::vector<std::pair<std::string, std::string>>& env_description, Model& model,
    const CwkgStore& store, int top_k);

// Reported-metric protocol: convergence is the first epoch where a short
// moving average moves less than tol; the result averages the span epochs
// after it (or whatever the curve still has).
struct ProtocolResult {
  double average = 0;
  int convergence_epoch = -1;
};
ProtocolResult trailing_average(const std::vector<double>& curve, int window = 20,
                                double tol = 0.002, int span = 100);

void save_model(const std::string& path, const Model& model,
                const std::map<std::string, std::string>& extra_manifest);
Model load_model(const std::string& path);

std::map<std::string, std::string> config_echo(const TrainConfig& cfg);

void write_metrics(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& kv);

}  // namespace cwrs
