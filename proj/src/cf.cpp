#include "cwrs/cf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "cwrs/checkpoint.hpp"
#include "cwrs/errors.hpp"
#include "cwrs/rng.hpp"

namespace cwrs {
namespace {

double sigmoid_stable(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

std::string side_tag_of(const CwkgStore& store, const std::string& head) {
  switch (store.entity_at(head).kind) {
    case EntityKind::waveform_head: return "waveform";
    case EntityKind::environment_head: return "environment";
    default: throw SchemaViolation("entity " + head + " is a tail value, not a head");
  }
}

// sum of clamped binary cross-entropies over per-pair sigmoid probabilities.
// One fused node; the gradient wrt each score is (sigmoid(s) - y).
Var bce_sum(const Var& s, std::vector<double> y) {
  if (s->value.rank() != 1) throw ShapeMismatch("scores must be a vector, got " + s->value.shape_str());
  size_t n = s->value.numel();
  if (n != y.size()) throw ShapeMismatch("scores and labels disagree in length");
  if (n == 0) throw InvalidValue("empty batch");
  std::vector<double> sig(n);
  double total = 0;
  for (size_t i = 0; i < n; ++i) {
    double p = sigmoid_stable(s->value[i]);
    sig[i] = p;
    double pc = std::min(1.0 - 1e-12, std::max(1e-12, p));
    total -= y[i] * std::log(pc) + (1.0 - y[i]) * std::log(1.0 - pc);
  }
  return make_node(Tensor::scalar(total), {s},
                   [sig = std::move(sig), y = std::move(y), n](Node& node) {
                     double g = node.grad.scalar_value();
                     Tensor gs(node.parents[0]->value.shape());
                     for (size_t i = 0; i < n; ++i) gs[i] = g * (sig[i] - y[i]);
                     accumulate_grad(node.parents[0], gs);
                   });
}

std::map<std::string, std::string> pipe_manifest(const PipelineConfig& p) {
  std::map<std::string, std::string> m;
  m["n_emb"] = std::to_string(p.n_emb);
  m["ere_mode"] = to_text(p.mode);
  m["ere_k"] = std::to_string(p.ere.K);
  m["ere_g"] = std::to_string(p.ere.G);
  m["ere_hidden"] = std::to_string(p.ere.hidden);
  m["ere_heads"] = std::to_string(p.ere.heads);
  m["ere_scale_by_sqrt_d"] = p.ere.scale_by_sqrt_d ? "1" : "0";
  m["ere_leaky_slope"] = format_double(p.ere.leaky_slope);
  std::string hidden;
  for (size_t i = 0; i < p.mlp_hidden.size(); ++i)
    hidden += (i ? "," : "") + std::to_string(p.mlp_hidden[i]);
  m["mlp_hidden"] = hidden;
  m["mlp_leaky_slope"] = format_double(p.mlp_leaky_slope);
  m["bpr_paper_sign"] = p.bpr_paper_sign ? "1" : "0";
  m["freeze_embeddings_in_l2"] = p.freeze_embeddings_in_l2 ? "1" : "0";
  return m;
}

const std::string& manifest_need(const std::map<std::string, std::string>& man,
                                 const std::string& key) {
  auto it = man.find(key);
  if (it == man.end()) throw CheckpointError("manifest is missing key " + key);
  return it->second;
}

long long manifest_int(const std::map<std::string, std::string>& man, const std::string& key) {
  const std::string& s = manifest_need(man, key);
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw CheckpointError("manifest key " + key + " is not an integer: " + s);
  return v;
}

double manifest_dbl(const std::map<std::string, std::string>& man, const std::string& key) {
  const std::string& s = manifest_need(man, key);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw CheckpointError("manifest key " + key + " is not a number: " + s);
  return v;
}

}  // namespace

Var enhanced_rep(const CwkgStore& store, const std::string& head, Model& model,
                 bool train_embeddings) {
  BlockVar block =
      assemble_block(store, head, model.params, model.pipe.n_emb, train_embeddings);
  return enhance(block.x, model.pipe.mode, model.pipe.ere, model.params,
                 side_tag_of(store, head));
}

Var cf_scores_batch(const Var& X, ParamStore& ps, const PipelineConfig& pipe) {
  if (X->value.rank() != 2)
    throw ShapeMismatch("expected a (batch, features) matrix, got " + X->value.shape_str());
  int prev = X->value.dim(1);
  Var z = X;
  for (size_t i = 0; i < pipe.mlp_hidden.size(); ++i) {
    int width = pipe.mlp_hidden[i];
    if (width < 1) throw InvalidValue("perceptron layer width must be positive");
    Param& w = ps.get_or_create("cf/w" + std::to_string(i), {prev, width}, Init::fan_in);
    Param& b = ps.get_or_create("cf/b" + std::to_string(i), {width}, Init::zeros);
    z = leaky_relu(linear(z, leaf(w), leaf(b)), pipe.mlp_leaky_slope);
    prev = width;
  }
  Param& h = ps.get_or_create("cf/h", {prev}, Init::fan_in);
  return matmul(z, leaf(h));
}

Var cf_score(const Var& z_u, const Var& z_v, ParamStore& ps, const PipelineConfig& pipe) {
  Var X = stack_rows({concat({z_u, z_v}, 0)});
  return pick(cf_scores_batch(X, ps, pipe), 0);
}

Var ce_loss(const std::vector<CfBatchItem>& batch, const CwkgStore& store, Model& model) {
  if (batch.empty()) throw InvalidValue("empty batch");
  size_t pos = 0, neg = 0;
  for (const CfBatchItem& it : batch) (it.label > 0.5 ? pos : neg)++;
  if (pos != neg)
    throw UnbalancedBatch("batch holds " + std::to_string(pos) + " available vs " +
                          std::to_string(neg) + " unavailable samples");
  bool train_emb = !model.pipe.freeze_embeddings_in_l2;
  std::map<std::string, Var> urep, vrep;
  for (const CfBatchItem& it : batch) {
    if (!urep.count(it.env)) urep[it.env] = enhanced_rep(store, it.env, model, train_emb);
    if (!vrep.count(it.wf)) vrep[it.wf] = enhanced_rep(store, it.wf, model, train_emb);
  }
  std::vector<Var> rows;
  std::vector<double> labels;
  rows.reserve(batch.size());
  labels.reserve(batch.size());
  for (const CfBatchItem& it : batch) {
    rows.push_back(concat({urep[it.env], vrep[it.wf]}, 0));
    labels.push_back(it.label);
  }
  Var scores = cf_scores_batch(stack_rows(rows), model.params, model.pipe);
  return bce_sum(scores, std::move(labels));
}

std::vector<std::pair<std::string, std::string>> sample_cf_negatives(
    const std::vector<Triple>& positives, const CwkgStore& store, uint64_t seed) {
  std::vector<std::string> wfs = store.entities_of_kind(EntityKind::waveform_head);
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(positives.size());
  std::map<std::string, std::vector<const std::string*>> cand_cache;
  for (const Triple& t : positives) {
    auto it = cand_cache.find(t.head);
    if (it == cand_cache.end()) {
      std::vector<const std::string*> cands;
      for (const std::string& w : wfs)
        if (!store.has_triple(t.head, kFeasible, w)) cands.push_back(&w);
      it = cand_cache.emplace(t.head, std::move(cands)).first;
    }
    if (it->second.empty())
      throw NoNegativeAvailable("environment " + t.head + " connects to every waveform");
    Rng rng(mix64(seed, fnv1a(t.head + '\x1f' + t.tail)));
    out.emplace_back(t.head, *it->second[rng.below(it->second.size())]);
  }
  return out;
}

ScoreVector score_all(const std::string& env_id, const CwkgStore& store, Model& model) {
  std::vector<std::string> wfs = store.entities_of_kind(EntityKind::waveform_head);
  if (wfs.empty()) throw UnknownEntity("store has no waveforms to rank");
  Var zu = enhanced_rep(store, env_id, model, false);
  std::vector<Var> rows;
  rows.reserve(wfs.size());
  for (const std::string& w : wfs)
    rows.push_back(concat({zu, enhanced_rep(store, w, model, false)}, 0));
  Var s = cf_scores_batch(stack_rows(rows), model.params, model.pipe);
  Var y = softmax(s);
  ScoreVector sv;
  sv.env = env_id;
  sv.waveforms = std::move(wfs);
  sv.s = s->value;
  sv.y = y->value;
  return sv;
}

EvalReport evaluate(Model& model, const std::vector<Triple>& test_triples,
                    const CwkgStore& store, const std::vector<int>& k_list) {
  if (test_triples.empty()) throw EmptyTestSet("evaluation needs at least one feasibility edge");
  std::map<std::string, std::set<std::string>> truth;
  for (const Triple& t : test_triples) truth[t.head].insert(t.tail);
  std::vector<std::string> wfs = store.entities_of_kind(EntityKind::waveform_head);
  int M = static_cast<int>(wfs.size());
  if (M == 0) throw UnknownEntity("store has no waveforms to rank");

  // waveform-side representations do not depend on the environment: build the
  // forward pass once per waveform and reuse the values for every test row
  std::vector<Tensor> zv;
  zv.reserve(wfs.size());
  for (const std::string& w : wfs) zv.push_back(enhanced_rep(store, w, model, false)->value);
  int dv = static_cast<int>(zv[0].numel());

  EvalReport rep;
  rep.n_test = static_cast<int>(truth.size());
  std::map<int, int> hits;
  for (int k : k_list) hits[k] = 0;
  for (const auto& [env, pos] : truth) {
    Tensor zu = enhanced_rep(store, env, model, false)->value;
    int du = static_cast<int>(zu.numel());
    Tensor X({M, du + dv});
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < du; ++j) X.at(i, j) = zu[j];
      for (int j = 0; j < dv; ++j) X.at(i, du + j) = zv[static_cast<size_t>(i)][j];
    }
    Tensor s = cf_scores_batch(constant(std::move(X)), model.params, model.pipe)->value;
    std::vector<int> order(static_cast<size_t>(M));
    std::iota(order.begin(), order.end(), 0);
    // stable on the id-sorted list: equal scores keep the smaller waveform id
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return s.at(a) > s.at(b); });
    if (pos.count(wfs[static_cast<size_t>(order[0])])) rep.n_hit++;
    for (int k : k_list) {
      bool hit = false;
      for (int j = 0; j < std::min(k, M) && !hit; ++j)
        hit = pos.count(wfs[static_cast<size_t>(order[static_cast<size_t>(j)])]) > 0;
      hits[k] += hit ? 1 : 0;
    }
  }
  rep.hit_at_1 = static_cast<double>(rep.n_hit) / rep.n_test;
  for (int k : k_list) rep.hit_at_k[k] = static_cast<double>(hits[k]) / rep.n_test;
  return rep;
}

ProtocolResult trailing_average(const std::vector<double>& curve, int window, double tol,
                                int span) {
  ProtocolResult out;
  int n = static_cast<int>(curve.size());
  if (n == 0) return out;
  auto ma = [&](int i) {
    double s = 0;
    for (int j = i - window + 1; j <= i; ++j) s += curve[static_cast<size_t>(j)];
    return s / window;
  };
  for (int i = window; i < n; ++i) {
    if (std::fabs(ma(i) - ma(i - 1)) < tol) {
      out.convergence_epoch = i;
      break;
    }
  }
  int start = out.convergence_epoch >= 0 ? out.convergence_epoch + 1 : std::max(0, n - span);
  if (start >= n) start = n - 1;
  int end = std::min(n, start + span);
  double s = 0;
  for (int i = start; i < end; ++i) s += curve[static_cast<size_t>(i)];
  out.average = s / (end - start);
  return out;
}

TrainResult train(const CwkgStore& store, const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw InvalidValue("epochs must be non-negative");
  if (cfg.l2_batch < 1 || cfg.l1_chunk < 1) throw InvalidValue("batch sizes must be positive");
  auto [train_edges, test_edges] = store.split_ewbg(cfg.split_a, cfg.split_b, cfg.seed);
  if (test_edges.empty()) throw EmptyTestSet("the requested split leaves no test edges");

  // training view: same schema, entities and knowledge triples, but only the
  // train half of the feasibility edges — nothing below may see a test edge
  CwkgStore tview;
  for (RelationDef def : store.schema()) {
    def.row_index = -1;
    tview.add_relation(def);
  }
  for (const auto& [id, e] : store.entities()) tview.add_entity(e);
  for (const Triple& t : store.triples())
    if (t.subgraph != Subgraph::EWBG) tview.add_triple(t);
  for (const Triple& t : train_edges) tview.add_triple(t);

  TrainResult res(cfg.seed);
  res.model.pipe = cfg.pipe;
  res.train_edges = train_edges;
  res.test_edges = test_edges;
  ParamStore& ps = res.model.params;
  init_transd_params(ps, tview, cfg.pipe.n_emb);

  std::vector<Param*> l1_params = ps.matching("entity/");
  for (Param* p : ps.matching("relation/")) l1_params.push_back(p);
  auto l2_params = [&] {
    std::vector<Param*> out = ps.matching("ere/");
    for (Param* p : ps.matching("cf/")) out.push_back(p);
    for (Param* p : ps.matching("numeric_dir/")) out.push_back(p);
    if (!cfg.pipe.freeze_embeddings_in_l2)
      for (Param* p : ps.matching("entity/")) out.push_back(p);
    return out;
  };

  // one forward through the whole pipeline materializes the lazily created
  // enhancement/perceptron parameters, so even a 0-epoch checkpoint carries
  // the complete initialized model
  {
    std::vector<std::string> envs = tview.entities_of_kind(EntityKind::environment_head);
    if (!envs.empty()) score_all(envs.front(), tview, res.model);
  }

  NegSampler sampler(tview);
  const std::vector<Triple>& l1_triples = tview.triples();
  size_t n_wf = tview.entities_of_kind(EntityKind::waveform_head).size();
  std::map<std::string, std::vector<std::string>> env_pos;
  for (const Triple& t : train_edges) env_pos[t.head].push_back(t.tail);
  std::vector<std::string> train_envs;
  train_envs.reserve(env_pos.size());
  // environments connected to every waveform carry no contrastive signal and
  // would starve the balanced sampler, so the cross-entropy pass skips them
  for (const auto& [env, tails] : env_pos)
    if (tails.size() < n_wf) train_envs.push_back(env);

  AdamState adam1, adam2;
  adam1.lr = adam2.lr = cfg.lr;
  std::vector<double> l1_curve, l2_curve, hit_curve;
  auto check_diverged = [](std::vector<double>& curve, const char* tag, int epoch) {
    double v = curve.back();
    if (!std::isfinite(v) || (curve.size() > 1 && v > 10.0 * curve.front()))
      throw DivergenceDetected(std::string(tag) + " loss " + format_double(v) + " at epoch " +
                               std::to_string(epoch) + " (initial " +
                               format_double(curve.front()) + ")");
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    try {
      Rng r1(mix64(mix64(cfg.seed, fnv1a("ranking_pass")), static_cast<uint64_t>(epoch)));
      l1_curve.push_back(transd_pass(sampler, l1_triples, ps, l1_params, adam1, r1,
                                     cfg.l1_chunk, cfg.pipe.n_emb, cfg.pipe.bpr_paper_sign));
      check_diverged(l1_curve, "ranking", epoch);

      Rng r2(mix64(mix64(cfg.seed, fnv1a("cf_pass")), static_cast<uint64_t>(epoch)));
      std::vector<std::string> order = train_envs;
      r2.shuffle(order);
      uint64_t neg_seed =
          mix64(cfg.seed, mix64(fnv1a("cf_negatives"), static_cast<uint64_t>(epoch)));
      double total = 0;
      size_t count = 0;
      for (size_t i0 = 0; i0 < order.size(); i0 += static_cast<size_t>(cfg.l2_batch)) {
        size_t i1 = std::min(order.size(), i0 + static_cast<size_t>(cfg.l2_batch));
        std::vector<Triple> positives;
        for (size_t i = i0; i < i1; ++i)
          for (const std::string& wf : env_pos[order[i]])
            positives.push_back({order[i], kFeasible, wf, Subgraph::EWBG});
        if (positives.empty()) continue;
        auto negatives = sample_cf_negatives(positives, tview, neg_seed);
        std::vector<CfBatchItem> batch;
        batch.reserve(2 * positives.size());
        for (size_t i = 0; i < positives.size(); ++i) {
          batch.push_back({positives[i].head, positives[i].tail, 1.0});
          batch.push_back({negatives[i].first, negatives[i].second, 0.0});
        }
        Var loss = ce_loss(batch, tview, res.model);
        ps.zero_all_grads();
        backward(loss);
        adam_step(adam2, l2_params());
        total += loss->value.scalar_value();  // curve stays a per-sample mean
        count += batch.size();
      }
      if (count == 0)
        throw NoNegativeAvailable("every training environment connects to every waveform");
      l2_curve.push_back(total / static_cast<double>(count));
      check_diverged(l2_curve, "cross-entropy", epoch);

      if (cfg.eval_each_epoch)
        hit_curve.push_back(evaluate(res.model, test_edges, tview, {1}).hit_at_1);
    } catch (const NonFiniteValue& e) {
      throw DivergenceDetected("epoch " + std::to_string(epoch) + ": " + e.what());
    } catch (const NonFiniteGradient& e) {
      throw DivergenceDetected("epoch " + std::to_string(epoch) + ": " + e.what());
    }
  }

  EvalReport rep = evaluate(res.model, test_edges, tview, cfg.k_list);
  rep.l1_curve = std::move(l1_curve);
  rep.l2_curve = std::move(l2_curve);
  rep.hit_curve = std::move(hit_curve);
  ProtocolResult pr = trailing_average(rep.hit_curve.empty()
                                           ? std::vector<double>{rep.hit_at_1}
                                           : rep.hit_curve);
  rep.hit_protocol = pr.average;
  rep.convergence_epoch = pr.convergence_epoch;
  rep.config = config_echo(cfg);
  rep.seed = cfg.seed;
  res.report = std::move(rep);
  return res;
}

std::vector<std::pair<std::string, double>> recommend(
    const std::vector<std::pair<std::string, std::string>>& env_description, Model& model,
    const CwkgStore& store, int top_k) {
  if (env_description.empty()) throw InvalidValue("empty environment description");
  if (top_k < 1) throw InvalidValue("top_k must be positive");
  CwkgStore view = store;  // the caller's store stays untouched
  const std::string qid = "__query__";
  if (view.find_entity(qid))
    throw InvalidValue("entity id " + qid + " is reserved for transient queries");
  view.add_entity({qid, EntityKind::environment_head, std::nullopt, ""});

  // numeric tails already connected through the same relation can be reused so
  // that a query repeating a known environment reproduces its representation
  std::map<std::string, std::map<double, std::string>> known_tails;
  for (const Triple& t : view.triples()) {
    if (t.subgraph != Subgraph::EKG) continue;
    const Entity& tail = view.entity_at(t.tail);
    if (tail.numeric_value) known_tails[t.relation].emplace(*tail.numeric_value, t.tail);
  }

  std::set<std::string> seen;
  for (const auto& [rel_name, value] : env_description) {
    const RelationDef* relp = view.find_relation(rel_name);
    if (!relp) throw SchemaViolation("unknown relation " + rel_name);
    const RelationDef& rel = *relp;
    if (rel.side != Side::environment)
      throw SchemaViolation("relation " + rel_name + " does not describe environments");
    if (!seen.insert(rel_name).second)
      throw InvalidValue("relation " + rel_name + " appears twice in the description");
    std::string tail_id;
    if (rel.kind == RelKind::numeric) {
      double v = 0;
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || p != value.data() + value.size())
        throw InvalidValue("relation " + rel_name + " needs a number, got '" + value + "'");
      if (auto rt = known_tails.find(rel_name); rt != known_tails.end()) {
        auto vt = rt->second.find(v);
        if (vt != rt->second.end()) tail_id = vt->second;
      }
      if (tail_id.empty()) {
        tail_id = "__query_" + rel_name + "__";
        view.add_entity({tail_id, EntityKind::tail_value, v, ""});
      }
    } else {
      tail_id = value;
      view.entity_at(tail_id);  // throws UnknownEntity for unknown vocabulary
    }
    view.add_triple({qid, rel_name, tail_id, Subgraph::EKG});
  }

  ScoreVector sv = score_all(qid, view, model);
  int M = static_cast<int>(sv.waveforms.size());
  std::vector<int> order(static_cast<size_t>(M));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return sv.y.at(a) > sv.y.at(b); });
  std::vector<std::pair<std::string, double>> out;
  for (int j = 0; j < std::min(top_k, M); ++j) {
    int i = order[static_cast<size_t>(j)];
    out.emplace_back(sv.waveforms[static_cast<size_t>(i)], sv.y.at(i));
  }
  return out;
}

void save_model(const std::string& path, const Model& model,
                const std::map<std::string, std::string>& extra_manifest) {
  std::map<std::string, std::string> man = extra_manifest;
  for (const auto& [k, v] : pipe_manifest(model.pipe)) man[k] = v;
  man["param_seed"] = std::to_string(model.params.seed());
  save_checkpoint(path, model.params, man);
}

Model load_model(const std::string& path) {
  LoadedCheckpoint lc = load_checkpoint(path);
  Model m(static_cast<uint64_t>(manifest_int(lc.manifest, "param_seed")));
  PipelineConfig& p = m.pipe;
  p.n_emb = static_cast<int>(manifest_int(lc.manifest, "n_emb"));
  auto mode = ere_mode_from(manifest_need(lc.manifest, "ere_mode"));
  if (!mode) throw CheckpointError("unknown ere_mode " + manifest_need(lc.manifest, "ere_mode"));
  p.mode = *mode;
  p.ere.K = static_cast<int>(manifest_int(lc.manifest, "ere_k"));
  p.ere.G = static_cast<int>(manifest_int(lc.manifest, "ere_g"));
  p.ere.hidden = static_cast<int>(manifest_int(lc.manifest, "ere_hidden"));
  p.ere.heads = static_cast<int>(manifest_int(lc.manifest, "ere_heads"));
  p.ere.scale_by_sqrt_d = manifest_int(lc.manifest, "ere_scale_by_sqrt_d") != 0;
  p.ere.leaky_slope = manifest_dbl(lc.manifest, "ere_leaky_slope");
  p.mlp_hidden.clear();
  const std::string& hidden = manifest_need(lc.manifest, "mlp_hidden");
  for (size_t i = 0; i < hidden.size();) {
    size_t j = hidden.find(',', i);
    if (j == std::string::npos) j = hidden.size();
    int w = 0;
    auto [q, ec] = std::from_chars(hidden.data() + i, hidden.data() + j, w);
    if (ec != std::errc() || q != hidden.data() + j)
      throw CheckpointError("manifest key mlp_hidden is malformed: " + hidden);
    p.mlp_hidden.push_back(w);
    i = j + 1;
  }
  p.mlp_leaky_slope = manifest_dbl(lc.manifest, "mlp_leaky_slope");
  p.bpr_paper_sign = manifest_int(lc.manifest, "bpr_paper_sign") != 0;
  p.freeze_embeddings_in_l2 = manifest_int(lc.manifest, "freeze_embeddings_in_l2") != 0;
  for (const auto& [name, t] : lc.tensors) m.params.adopt(name, t);
  return m;
}

std::map<std::string, std::string> config_echo(const TrainConfig& cfg) {
  std::map<std::string, std::string> m = pipe_manifest(cfg.pipe);
  m["epochs"] = std::to_string(cfg.epochs);
  m["lr"] = format_double(cfg.lr);
  m["split_a"] = std::to_string(cfg.split_a);
  m["split_b"] = std::to_string(cfg.split_b);
  m["seed"] = std::to_string(cfg.seed);
  m["l1_chunk"] = std::to_string(cfg.l1_chunk);
  m["l2_batch"] = std::to_string(cfg.l2_batch);
  return m;
}

void write_metrics(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream f(path, std::ios::binary);  // binary: LF line endings everywhere
  if (!f) throw IoFailure("cannot open " + path + " for writing");
  for (const auto& [k, v] : kv) f << k << "=" << v << "\n";
  if (!f) throw IoFailure("failed writing " + path);
}

}  // namespace cwrs
