#include "cwrs/krl.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "cwrs/errors.hpp"

namespace cwrs {

namespace {

constexpr uint64_t kTextSalt = 0x7e87a1b3c5d9e117ULL;

double sigmoid_s(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double softplus_s(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

std::string triple_tag(const Triple& t) {
  return t.head + '\x1f' + t.relation + '\x1f' + t.tail;
}

}  // namespace

std::string entity_emb_name(const std::string& id) { return "entity/" + id + "/e"; }
std::string entity_proj_name(const std::string& id) { return "entity/" + id + "/p"; }
std::string relation_emb_name(const std::string& name) { return "relation/" + name + "/e"; }
std::string relation_proj_name(const std::string& name) { return "relation/" + name + "/p"; }
std::string numeric_dir_name(const std::string& rel) { return "numeric_dir/" + rel; }

Param& entity_emb(ParamStore& ps, const std::string& id, int n_emb) {
  return ps.get_or_create(entity_emb_name(id), {n_emb}, Init::uniform_symmetric,
                          0.5 / std::sqrt(static_cast<double>(n_emb)));
}
Param& entity_proj(ParamStore& ps, const std::string& id, int n_emb) {
  return ps.get_or_create(entity_proj_name(id), {n_emb}, Init::zeros);
}
Param& relation_emb(ParamStore& ps, const std::string& name, int n_emb) {
  return ps.get_or_create(relation_emb_name(name), {n_emb}, Init::uniform_symmetric,
                          0.5 / std::sqrt(static_cast<double>(n_emb)));
}
Param& relation_proj(ParamStore& ps, const std::string& name, int n_emb) {
  return ps.get_or_create(relation_proj_name(name), {n_emb}, Init::zeros);
}
Param& numeric_dir(ParamStore& ps, const std::string& rel, int n_emb) {
  return ps.get_or_create(numeric_dir_name(rel), {n_emb}, Init::fan_in);
}

void init_transd_params(ParamStore& ps, const CwkgStore& store, int n_emb) {
  for (const auto& [id, e] : store.entities()) {
    (void)e;
    entity_emb(ps, id, n_emb);
    entity_proj(ps, id, n_emb);
  }
  for (const auto& rel : store.schema()) {
    relation_emb(ps, rel.name, n_emb);
    relation_proj(ps, rel.name, n_emb);
    if (rel.kind == RelKind::numeric) numeric_dir(ps, rel.name, n_emb);
  }
  relation_emb(ps, kFeasible, n_emb);
  relation_proj(ps, kFeasible, n_emb);
}

Tensor transd_project(const Tensor& e, const Tensor& e_p, const Tensor& r_p) {
  if (e.rank() != 1 || !e.same_shape(e_p) || !e.same_shape(r_p))
    throw ShapeMismatch("projection needs three equal-length vectors");
  double s = 0;
  for (size_t i = 0; i < e.numel(); ++i) s += e_p[i] * e[i];
  Tensor out = e;
  for (size_t i = 0; i < out.numel(); ++i) out[i] += r_p[i] * s;
  return out;
}

double transd_score(const Tensor& h, const Tensor& h_p, const Tensor& r, const Tensor& r_p,
                    const Tensor& t, const Tensor& t_p) {
  Tensor hp = transd_project(h, h_p, r_p);
  Tensor tp = transd_project(t, t_p, r_p);
  if (!hp.same_shape(r)) throw ShapeMismatch("relation vector length mismatch");
  double f = 0;
  for (size_t i = 0; i < hp.numel(); ++i) {
    double d = hp[i] + r[i] - tp[i];
    f += d * d;
  }
  return f;
}

namespace {

struct TripleParams {
  Param *h, *hp, *r, *rp, *t, *tp;
};

TripleParams fetch_params(ParamStore& ps, const Triple& t) {
  auto ent = [&](const std::string& name, const std::string& id) {
    Param* p = ps.find(name);
    if (!p) throw UnknownEntity("no trained vectors for entity " + id);
    return p;
  };
  auto rel = [&](const std::string& name) {
    Param* p = ps.find(name);
    if (!p) throw UnknownRelation("no trained vectors for relation " + t.relation);
    return p;
  };
  return {ent(entity_emb_name(t.head), t.head),   ent(entity_proj_name(t.head), t.head),
          rel(relation_emb_name(t.relation)),     rel(relation_proj_name(t.relation)),
          ent(entity_emb_name(t.tail), t.tail),   ent(entity_proj_name(t.tail), t.tail)};
}

// chain rule of the fused score: w is dL/dscore, accumulated into Param grads
void transd_accumulate(ParamStore& ps, const Triple& tr, double w) {
  TripleParams p = fetch_params(ps, tr);
  const Tensor& h = p.h->value;
  const Tensor& hp = p.hp->value;
  const Tensor& r = p.r->value;
  const Tensor& rp = p.rp->value;
  const Tensor& t = p.t->value;
  const Tensor& tp = p.tp->value;
  size_t n = h.numel();
  double s_h = 0, s_t = 0;
  for (size_t i = 0; i < n; ++i) s_h += hp[i] * h[i];
  for (size_t i = 0; i < n; ++i) s_t += tp[i] * t[i];
  std::vector<double> a(n);
  double alpha = 0;
  for (size_t i = 0; i < n; ++i) {
    double d = (h[i] + rp[i] * s_h) + r[i] - (t[i] + rp[i] * s_t);
    a[i] = 2.0 * w * d;
    alpha += a[i] * rp[i];
  }
  for (size_t i = 0; i < n; ++i) {
    p.h->grad[i] += a[i] + alpha * hp[i];
    p.hp->grad[i] += alpha * h[i];
    p.r->grad[i] += a[i];
    p.rp->grad[i] += (s_h - s_t) * a[i];
    p.t->grad[i] += -a[i] - alpha * tp[i];
    p.tp->grad[i] += -alpha * t[i];
  }
}

}  // namespace

double transd_score(const Triple& t, ParamStore& ps, int n_emb) {
  (void)n_emb;
  TripleParams p = fetch_params(ps, t);
  return transd_score(p.h->value, p.hp->value, p.r->value, p.rp->value, p.t->value,
                      p.tp->value);
}

Var transd_score_var(const Triple& t, ParamStore& ps, int n_emb) {
  double f = transd_score(t, ps, n_emb);
  ParamStore* psp = &ps;
  Triple tr = t;
  Var v = make_node(Tensor::scalar(f), {},
                    [psp, tr](Node& n) { transd_accumulate(*psp, tr, n.grad[0]); });
  v->requires_grad = true;
  return v;
}

NegSampler::NegSampler(const CwkgStore& store) : store_(&store) {
  for (EntityKind k : {EntityKind::waveform_head, EntityKind::environment_head,
                       EntityKind::tail_value})
    candidates_[k] = store.entities_of_kind(k);
}

namespace {

const std::string& draw_corruption(const std::vector<std::string>& cands, Rng& rng,
                                   const std::function<bool(const std::string&)>& ok) {
  if (cands.empty()) throw ExhaustedCandidates("no candidate entities of the needed kind");
  for (int attempt = 0; attempt < 64; ++attempt) {
    const std::string& c = cands[rng.below(cands.size())];
    if (ok(c)) return c;
  }
  size_t start = rng.below(cands.size());
  for (size_t i = 0; i < cands.size(); ++i) {
    const std::string& c = cands[(start + i) % cands.size()];
    if (ok(c)) return c;
  }
  throw ExhaustedCandidates("every candidate corruption is a true triple");
}

}  // namespace

NegativePair NegSampler::sample(const Triple& t, Rng& rng) const {
  EntityKind head_kind = store_->entity_at(t.head).kind;
  EntityKind tail_kind = store_->entity_at(t.tail).kind;
  const auto& head_cands = candidates_.at(head_kind);
  const auto& tail_cands = candidates_.at(tail_kind);
  const std::string& nh = draw_corruption(head_cands, rng, [&](const std::string& c) {
    return !store_->has_triple(c, t.relation, t.tail);
  });
  const std::string& nt = draw_corruption(tail_cands, rng, [&](const std::string& c) {
    return !store_->has_triple(t.head, t.relation, c);
  });
  NegativePair out;
  out.positive = t;
  out.neg_head = Triple{nh, t.relation, t.tail, t.subgraph};
  out.neg_tail = Triple{t.head, t.relation, nt, t.subgraph};
  return out;
}

NegativePair sample_negatives(const Triple& t, const CwkgStore& store, uint64_t seed) {
  NegSampler sampler(store);
  Rng rng(mix64(seed, fnv1a(triple_tag(t))));
  return sampler.sample(t, rng);
}

Var bpr_loss_var(const std::vector<NegativePair>& pairs, ParamStore& ps, int n_emb,
                 bool paper_sign) {
  if (pairs.empty()) throw InvalidValue("ranking loss needs at least one pair");
  double n_s = 2.0 * static_cast<double>(pairs.size());
  double total = 0;
  for (const auto& pr : pairs) {
    double fpos = transd_score(pr.positive, ps, n_emb);
    for (const Triple* neg : {&pr.neg_head, &pr.neg_tail}) {
      double fneg = transd_score(*neg, ps, n_emb);
      double m = paper_sign ? fpos - fneg : fneg - fpos;
      total += softplus_s(-m);  // = -ln sigmoid(m)
    }
  }
  ParamStore* psp = &ps;
  auto pairs_copy = pairs;
  Var v = make_node(
      Tensor::scalar(total / n_s), {}, [psp, pairs_copy, n_emb, paper_sign, n_s](Node& n) {
        double g = n.grad[0];
        for (const auto& pr : pairs_copy) {
          double fpos = transd_score(pr.positive, *psp, n_emb);
          for (const Triple* neg : {&pr.neg_head, &pr.neg_tail}) {
            double fneg = transd_score(*neg, *psp, n_emb);
            double m = paper_sign ? fpos - fneg : fneg - fpos;
            double dm = -sigmoid_s(-m) * g / n_s;  // d softplus(-m) / dm
            double dpos = paper_sign ? dm : -dm;
            double dneg = -dpos;
            transd_accumulate(*psp, pr.positive, dpos);
            transd_accumulate(*psp, *neg, dneg);
          }
        }
      });
  v->requires_grad = true;
  return v;
}

Tensor text_embed(const std::string& token, int n_emb) {
  if (token.empty()) throw EmptyLabel("text embedding of an empty token");
  Rng rng(mix64(kTextSalt, fnv1a(token)));
  Tensor v({n_emb});
  double norm2 = 0;
  for (int i = 0; i < n_emb; ++i) {
    v.at(i) = rng.uniform(-1.0, 1.0);
    norm2 += v.at(i) * v.at(i);
  }
  double norm = std::sqrt(norm2);
  for (int i = 0; i < n_emb; ++i) v.at(i) /= norm;
  return v;
}

double numeric_norm(double value, const RelationDef& rel) {
  if (rel.kind != RelKind::numeric)
    throw NonNumericRelation(rel.name + " carries no numeric values");
  double v = value;
  if (v < rel.range_min || v > rel.range_max) {
    std::cerr << "warning: " << rel.name << " value " << value << " clamped to ["
              << rel.range_min << ", " << rel.range_max << "]\n";
    v = std::clamp(v, rel.range_min, rel.range_max);
  }
  return (v - rel.range_min) / (rel.range_max - rel.range_min);
}

Var numeric_embed_var(double value, const RelationDef& rel, ParamStore& ps, int n_emb) {
  return scale(leaf(numeric_dir(ps, rel.name, n_emb)), numeric_norm(value, rel));
}

BlockVar assemble_block(const CwkgStore& store, const std::string& head, ParamStore& ps,
                        int n_emb, bool train_embeddings) {
  const Entity& h = store.entity_at(head);
  bool waveform_side = h.kind == EntityKind::waveform_head;
  if (!waveform_side && h.kind != EntityKind::environment_head)
    throw SchemaViolation("feature block only defined for head entities: " + head);
  int channels = waveform_side ? 3 : 2;

  auto rows = store.feature_rows(head);
  Var zero = constant(Tensor::zeros({n_emb}));
  std::vector<Var> row_vars;
  BlockVar out;
  for (const auto& row : rows) {
    const RelationDef& rel = store.relation_at(row.relation);
    std::vector<Var> chans;
    if (!row.missing && rel.kind == RelKind::numeric && row.numeric_value)
      chans.push_back(numeric_embed_var(*row.numeric_value, rel, ps, n_emb));
    else
      chans.push_back(zero);
    if (waveform_side) {
      if (!row.missing) {
        Param& pe = entity_emb(ps, row.tail_id, n_emb);
        chans.push_back(train_embeddings ? leaf(pe) : constant(pe.value));
      } else {
        chans.push_back(zero);
      }
    }
    if (!row.missing) {
      const Entity& tail = store.entity_at(row.tail_id);
      const std::string& lbl = tail.text_label.empty() ? tail.id : tail.text_label;
      chans.push_back(constant(text_embed(lbl, n_emb)));
    } else {
      chans.push_back(zero);
    }
    row_vars.push_back(reshape(transpose(stack_rows(chans)), {n_emb * channels}));
    out.missing.push_back(row.missing);
  }
  out.rows = static_cast<int>(rows.size());
  out.channels = channels;
  out.x = reshape(stack_rows(row_vars), {out.rows, n_emb, channels});
  return out;
}

double transd_pass(const NegSampler& sampler, const std::vector<Triple>& triples,
                   ParamStore& ps, const std::vector<Param*>& params, AdamState& adam,
                   Rng& rng, int chunk, int n_emb, bool paper_sign) {
  if (triples.empty()) throw InvalidValue("no triples to train on");
  std::vector<size_t> order(triples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  double weighted = 0;
  size_t samples = 0;
  for (size_t start = 0; start < order.size(); start += static_cast<size_t>(chunk)) {
    size_t stop = std::min(order.size(), start + static_cast<size_t>(chunk));
    std::vector<NegativePair> pairs;
    pairs.reserve(stop - start);
    for (size_t i = start; i < stop; ++i) {
      // triples whose every corruption is itself true (e.g. a feasibility edge
      // of an environment linked to all waveforms) carry no ranking signal
      try {
        pairs.push_back(sampler.sample(triples[order[i]], rng));
      } catch (const ExhaustedCandidates&) {
      }
    }
    if (pairs.empty()) continue;
    Var loss = bpr_loss_var(pairs, ps, n_emb, paper_sign);
    zero_grads(params);
    backward(loss);
    adam_step(adam, params);
    weighted += loss->value.scalar_value() * 2.0 * static_cast<double>(pairs.size());
    samples += 2 * pairs.size();
  }
  if (samples == 0) throw ExhaustedCandidates("no triple in this pass admits a negative sample");
  return weighted / static_cast<double>(samples);
}

std::vector<double> train_transd(const CwkgStore& store, const std::vector<Triple>& triples,
                                 ParamStore& ps, const TransdTrainConfig& cfg) {
  NegSampler sampler(store);
  std::vector<Param*> tparams = ps.matching("entity/");
  for (Param* p : ps.matching("relation/")) tparams.push_back(p);
  AdamState adam;
  adam.lr = cfg.lr;
  std::vector<double> curve;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(mix64(mix64(cfg.seed, fnv1a("transd_epoch")), static_cast<uint64_t>(epoch)));
    curve.push_back(transd_pass(sampler, triples, ps, tparams, adam, rng, cfg.chunk,
                                cfg.n_emb, cfg.paper_sign));
  }
  return curve;
}

}  // namespace cwrs
