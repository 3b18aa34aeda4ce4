#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "cwrs/autodiff.hpp"
#include "cwrs/kg.hpp"
#include "cwrs/params.hpp"
#include "cwrs/rng.hpp"

namespace cwrs {

// checkpoint names of the representation-learning parameters
std::string entity_emb_name(const std::string& id);       // entity/<id>/e
std::string entity_proj_name(const std::string& id);      // entity/<id>/p
std::string relation_emb_name(const std::string& name);   // relation/<name>/e
std::string relation_proj_name(const std::string& name);  // relation/<name>/p
std::string numeric_dir_name(const std::string& rel);     // numeric_dir/<relation>

// Embeddings start uniform in +-0.5/sqrt(N); projection vectors start at zero
// so training begins from the plain translation (identity projection) model.
Param& entity_emb(ParamStore& ps, const std::string& id, int n_emb);
Param& entity_proj(ParamStore& ps, const std::string& id, int n_emb);
Param& relation_emb(ParamStore& ps, const std::string& name, int n_emb);
Param& relation_proj(ParamStore& ps, const std::string& name, int n_emb);
Param& numeric_dir(ParamStore& ps, const std::string& rel, int n_emb);

// materialize vectors for every entity and relation of the store up front
void init_transd_params(ParamStore& ps, const CwkgStore& store, int n_emb);

// e_perp = (r_p e_p^T + I) e, computed as e + r_p (e_p . e)
Tensor transd_project(const Tensor& e, const Tensor& e_p, const Tensor& r_p);

// squared distance ||h_perp + r - t_perp||^2; lower = more plausible
double transd_score(const Tensor& h, const Tensor& h_p, const Tensor& r, const Tensor& r_p,
                    const Tensor& t, const Tensor& t_p);
double transd_score(const Triple& t, ParamStore& ps, int n_emb);

// tape version: one fused node reading the six vectors from the store
Var transd_score_var(const Triple& t, ParamStore& ps, int n_emb);

struct NegativePair {
  Triple positive;
  Triple neg_head;  // head replaced
  Triple neg_tail;  // tail replaced
};

// One head- and one tail-corrupted triple, uniform over entities of the same
// kind, rejecting corruptions that exist as true triples.
NegativePair sample_negatives(const Triple& t, const CwkgStore& store, uint64_t seed);

// same sampler with the per-kind candidate lists built once (training loops)
class NegSampler {
 public:
  explicit NegSampler(const CwkgStore& store);
  NegativePair sample(const Triple& t, Rng& rng) const;

 private:
  const CwkgStore* store_;
  std::map<EntityKind, std::vector<std::string>> candidates_;
};

// Pairwise ranking loss, mean of -ln sigmoid(margin) over the 2 samples each
// pair contributes. paper_sign=false uses margin = neg - pos, the orientation
// consistent with distance scores; true flips it to match the printed formula.
Var bpr_loss_var(const std::vector<NegativePair>& pairs, ParamStore& ps, int n_emb,
                 bool paper_sign);

// deterministic unit-norm token embedding (stands in for a trained text model)
Tensor text_embed(const std::string& token, int n_emb);

// normalized scalar times a learned per-relation direction vector
double numeric_norm(double value, const RelationDef& rel);  // clamped to [0,1]
Var numeric_embed_var(double value, const RelationDef& rel, ParamStore& ps, int n_emb);

// Multi-channel feature block of one head: rows follow the side schema, with
// channels [numeric, entity-embedding, text] for waveforms and [numeric, text]
// for environments. Missing relations give all-zero row slices.
struct BlockVar {
  Var x;  // shape (rows, n_emb, channels)
  int rows = 0;
  int channels = 0;
  std::vector<bool> missing;
};

BlockVar assemble_block(const CwkgStore& store, const std::string& head, ParamStore& ps,
                        int n_emb, bool train_embeddings);

struct TransdTrainConfig {
  int n_emb = 16;
  int epochs = 200;
  double lr = 0.001;
  int chunk = 2048;  // pairs per optimizer step
  bool paper_sign = false;
  uint64_t seed = 0;
};

// One full ranking-loss pass: shuffled triples, fresh negatives, one optimizer
// step per chunk of pairs. Returns the mean per-sample loss of the pass.
double transd_pass(const NegSampler& sampler, const std::vector<Triple>& triples,
                   ParamStore& ps, const std::vector<Param*>& params, AdamState& adam,
                   Rng& rng, int chunk, int n_emb, bool paper_sign);

// one ranking-loss pass per epoch over the given triples with fresh negatives;
// returns the per-epoch mean loss curve
std::vector<double> train_transd(const CwkgStore& store, const std::vector<Triple>& triples,
                                 ParamStore& ps, const TransdTrainConfig& cfg);

}  // namespace cwrs
