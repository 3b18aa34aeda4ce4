#include "cwrs/kg.hpp"

#include <algorithm>
#include <charconv>
#include <climits>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cwrs/errors.hpp"
#include "cwrs/rng.hpp"

namespace cwrs {

namespace {

std::string triple_key(const std::string& h, const std::string& r, const std::string& t) {
  std::string k = h;
  k += '\x1f';
  k += r;
  k += '\x1f';
  k += t;
  return k;
}

bool has_space(const std::string& s) {
  return s.find_first_of(" \t\r\n") != std::string::npos;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string to_text(RelKind k) {
  switch (k) {
    case RelKind::categorical: return "categorical";
    case RelKind::numeric: return "numeric";
    case RelKind::boolean_flag: return "boolean";
  }
  return "?";
}
std::string to_text(Side s) { return s == Side::waveform ? "waveform" : "environment"; }
std::string to_text(EntityKind k) {
  switch (k) {
    case EntityKind::waveform_head: return "waveform_head";
    case EntityKind::environment_head: return "environment_head";
    case EntityKind::tail_value: return "tail_value";
  }
  return "?";
}
std::string to_text(Subgraph g) {
  switch (g) {
    case Subgraph::WKG: return "WKG";
    case Subgraph::EKG: return "EKG";
    case Subgraph::EWBG: return "EWBG";
  }
  return "?";
}

std::optional<RelKind> rel_kind_from(const std::string& s) {
  if (s == "categorical") return RelKind::categorical;
  if (s == "numeric") return RelKind::numeric;
  if (s == "boolean") return RelKind::boolean_flag;
  return std::nullopt;
}
std::optional<Side> side_from(const std::string& s) {
  if (s == "waveform") return Side::waveform;
  if (s == "environment") return Side::environment;
  return std::nullopt;
}
std::optional<EntityKind> entity_kind_from(const std::string& s) {
  if (s == "waveform_head") return EntityKind::waveform_head;
  if (s == "environment_head") return EntityKind::environment_head;
  if (s == "tail_value") return EntityKind::tail_value;
  return std::nullopt;
}
std::optional<Subgraph> subgraph_from(const std::string& s) {
  if (s == "WKG") return Subgraph::WKG;
  if (s == "EKG") return Subgraph::EKG;
  if (s == "EWBG") return Subgraph::EWBG;
  return std::nullopt;
}

void CwkgStore::add_relation(RelationDef def) {
  if (def.name.empty() || has_space(def.name))
    throw SchemaViolation("bad relation name: '" + def.name + "'");
  if (def.name == kFeasible)
    throw SchemaViolation("'" + kFeasible + "' is reserved for the bipartite subgraph");
  if (relation_pos_.count(def.name))
    throw SchemaViolation("duplicate relation: " + def.name);
  if (def.kind == RelKind::numeric) {
    if (!def.has_range || !(def.range_min < def.range_max) || !std::isfinite(def.range_min) ||
        !std::isfinite(def.range_max))
      throw SchemaViolation("numeric relation needs finite min < max: " + def.name);
  } else if (def.has_range) {
    throw SchemaViolation("value range only allowed on numeric relations: " + def.name);
  }
  def.row_index = n_features(def.side);
  relation_pos_[def.name] = schema_.size();
  schema_.push_back(std::move(def));
}

void CwkgStore::add_entity(Entity e) {
  if (e.id.empty() || has_space(e.id)) throw SchemaViolation("bad entity id: '" + e.id + "'");
  if (entities_.count(e.id)) throw SchemaViolation("duplicate entity: " + e.id);
  if (e.numeric_value && !std::isfinite(*e.numeric_value))
    throw SchemaViolation("non-finite numeric value on entity " + e.id);
  if (e.text_label.find_first_of("\n\r") != std::string::npos)
    throw SchemaViolation("newline in entity label: " + e.id);
  entities_.emplace(e.id, std::move(e));
}

const RelationDef* CwkgStore::find_relation(const std::string& name) const {
  auto it = relation_pos_.find(name);
  return it == relation_pos_.end() ? nullptr : &schema_[it->second];
}
const Entity* CwkgStore::find_entity(const std::string& id) const {
  auto it = entities_.find(id);
  return it == entities_.end() ? nullptr : &it->second;
}
const RelationDef& CwkgStore::relation_at(const std::string& name) const {
  const RelationDef* r = find_relation(name);
  if (!r) throw UnknownRelation("unknown relation: " + name);
  return *r;
}
const Entity& CwkgStore::entity_at(const std::string& id) const {
  const Entity* e = find_entity(id);
  if (!e) throw UnknownEntity("unknown entity: " + id);
  return *e;
}

void CwkgStore::add_triple(const Triple& t) {
  const Entity& head = entity_at(t.head);
  const Entity& tail = entity_at(t.tail);

  if (t.subgraph == Subgraph::EWBG || t.relation == kFeasible) {
    if (t.subgraph != Subgraph::EWBG || t.relation != kFeasible)
      throw SubgraphMismatch("'" + kFeasible + "' edges live in EWBG and vice versa");
    if (head.kind != EntityKind::environment_head || tail.kind != EntityKind::waveform_head)
      throw SubgraphMismatch("EWBG edge must run environment -> waveform: " + t.head + " -> " +
                             t.tail);
  } else {
    const RelationDef& rel = relation_at(t.relation);
    EntityKind want = rel.side == Side::waveform ? EntityKind::waveform_head
                                                 : EntityKind::environment_head;
    Subgraph want_g = rel.side == Side::waveform ? Subgraph::WKG : Subgraph::EKG;
    if (t.subgraph != want_g)
      throw SubgraphMismatch("relation " + t.relation + " belongs to " + to_text(want_g));
    if (head.kind != want)
      throw SubgraphMismatch("head of " + t.relation + " must be a " + to_text(want));
    if (tail.kind != EntityKind::tail_value)
      throw SubgraphMismatch("tail of " + t.relation + " must be a tail value");
  }

  std::string key = triple_key(t.head, t.relation, t.tail);
  if (triple_keys_.count(key))
    throw DuplicateTriple("duplicate triple: (" + t.head + ", " + t.relation + ", " + t.tail +
                          ")");
  triple_keys_.insert(std::move(key));
  triples_.push_back(t);
  adjacency_[t.head].emplace_back(t.relation, t.tail);
}

bool CwkgStore::has_triple(const std::string& head, const std::string& relation,
                           const std::string& tail) const {
  return triple_keys_.count(triple_key(head, relation, tail)) > 0;
}

std::vector<std::pair<std::string, std::string>> CwkgStore::neighbors(
    const std::string& head) const {
  entity_at(head);
  auto it = adjacency_.find(head);
  if (it == adjacency_.end()) return {};
  auto out = it->second;
  auto order = [this](const std::pair<std::string, std::string>& e) {
    const RelationDef* r = find_relation(e.first);
    return r ? r->row_index : INT_MAX;  // feasibility edges last
  };
  std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
    int ia = order(a), ib = order(b);
    if (ia != ib) return ia < ib;
    return a.second < b.second;
  });
  return out;
}

std::vector<const RelationDef*> CwkgStore::side_schema(Side side) const {
  std::vector<const RelationDef*> out;
  for (const auto& r : schema_)
    if (r.side == side) out.push_back(&r);
  std::sort(out.begin(), out.end(),
            [](const RelationDef* a, const RelationDef* b) { return a->row_index < b->row_index; });
  return out;
}

int CwkgStore::n_features(Side side) const {
  int n = 0;
  for (const auto& r : schema_)
    if (r.side == side) ++n;
  return n;
}

std::vector<FeatureRow> CwkgStore::feature_rows(const std::string& head) const {
  const Entity& h = entity_at(head);
  Side side;
  if (h.kind == EntityKind::waveform_head)
    side = Side::waveform;
  else if (h.kind == EntityKind::environment_head)
    side = Side::environment;
  else
    throw SchemaViolation("feature rows only defined for head entities: " + head);

  std::map<std::string, std::string> first_tail;  // relation -> smallest tail id
  if (auto it = adjacency_.find(head); it != adjacency_.end()) {
    for (const auto& [rel, tail] : it->second) {
      auto f = first_tail.find(rel);
      if (f == first_tail.end() || tail < f->second) first_tail[rel] = tail;
    }
  }

  std::vector<FeatureRow> rows;
  for (const RelationDef* rel : side_schema(side)) {
    FeatureRow row;
    row.relation = rel->name;
    auto f = first_tail.find(rel->name);
    if (f == first_tail.end()) {
      row.missing = true;
    } else {
      row.tail_id = f->second;
      row.numeric_value = entity_at(f->second).numeric_value;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Triple> CwkgStore::subgraph_triples(Subgraph g) const {
  std::vector<Triple> out;
  for (const auto& t : triples_)
    if (t.subgraph == g) out.push_back(t);
  return out;
}

std::vector<std::string> CwkgStore::entities_of_kind(EntityKind k) const {
  std::vector<std::string> out;
  for (const auto& [id, e] : entities_)
    if (e.kind == k) out.push_back(id);
  return out;  // map order = sorted
}

CwkgStore::Adjacency CwkgStore::rebuild_adjacency() const {
  Adjacency adj;
  for (const auto& t : triples_) adj[t.head].emplace_back(t.relation, t.tail);
  return adj;
}

std::pair<std::vector<Triple>, std::vector<Triple>> CwkgStore::split_ewbg(int a, int b,
                                                                          uint64_t seed) const {
  if (a < 1 || b < 0) throw InvalidValue("split ratio must be a>=1, b>=0");
  std::vector<Triple> edges = subgraph_triples(Subgraph::EWBG);
  if (edges.empty()) throw EmptyEwbg("no feasibility edges to split");

  std::set<std::string> env_set;
  for (const auto& t : edges) env_set.insert(t.head);
  std::vector<std::string> envs(env_set.begin(), env_set.end());

  Rng rng(mix64(seed, fnv1a("split_ewbg")));
  rng.shuffle(envs);
  size_t n_test = static_cast<size_t>(
      std::llround(static_cast<double>(envs.size()) * b / (a + b)));
  if (b > 0 && n_test == 0) n_test = 1;
  if (n_test >= envs.size() && b > 0) n_test = envs.size() - 1;
  std::set<std::string> test_envs(envs.begin(), envs.begin() + static_cast<long>(n_test));

  std::vector<Triple> train, test;
  for (const auto& t : edges)
    (test_envs.count(t.head) ? test : train).push_back(t);
  return {train, test};
}

void CwkgStore::save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoFailure("cannot open for writing: " + path);
  os << "# cwkg store: R(elations) then E(ntities) then T(riples)\n";
  for (const auto& r : schema_) {
    os << "R " << to_text(r.side) << " " << to_text(r.kind) << " " << r.name;
    if (r.kind == RelKind::numeric)
      os << " " << format_double(r.range_min) << " " << format_double(r.range_max);
    if (!r.units.empty()) os << " " << r.units;
    os << "\n";
  }
  for (const auto& [id, e] : entities_) {
    os << "E " << to_text(e.kind) << " " << id;
    if (e.numeric_value) os << " " << format_double(*e.numeric_value);
    if (!e.text_label.empty()) os << " " << e.text_label;
    os << "\n";
  }
  for (const auto& t : triples_)
    os << "T " << to_text(t.subgraph) << " " << t.head << " " << t.relation << " " << t.tail
       << "\n";
  if (!os) throw IoFailure("failed writing " + path);
}

CwkgStore CwkgStore::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot open: " + path);

  CwkgStore store;
  std::string line;
  int lineno = 0;
  char phase = 'R';
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::istringstream ss(line);
    std::vector<std::string> tok;
    std::string w;
    while (ss >> w) tok.push_back(w);
    if (tok.empty()) continue;
    const std::string& rec = tok[0];

    try {
      if (rec == "R") {
        if (phase != 'R') throw ParseError("schema record after entity/triple block", lineno);
        if (tok.size() < 4) throw ParseError("schema record needs side, kind, name", lineno);
        RelationDef def;
        auto side = side_from(tok[1]);
        auto kind = rel_kind_from(tok[2]);
        if (!side) throw ParseError("unknown side: " + tok[1], lineno);
        if (!kind) throw ParseError("unknown relation kind: " + tok[2], lineno);
        def.side = *side;
        def.kind = *kind;
        def.name = tok[3];
        size_t next = 4;
        if (def.kind == RelKind::numeric) {
          if (tok.size() < 6) throw ParseError("numeric relation needs min and max", lineno);
          auto mn = parse_double(tok[4]), mx = parse_double(tok[5]);
          if (!mn || !mx) throw ParseError("bad value range on " + def.name, lineno);
          def.has_range = true;
          def.range_min = *mn;
          def.range_max = *mx;
          next = 6;
        }
        for (size_t i = next; i < tok.size(); ++i) {
          if (!def.units.empty()) def.units += ' ';
          def.units += tok[i];
        }
        store.add_relation(std::move(def));
      } else if (rec == "E") {
        if (phase == 'T') throw ParseError("entity record after triple block", lineno);
        if (phase == 'R' && store.schema_.empty())
          throw SchemaViolation("schema block required before entities");
        phase = 'E';
        if (tok.size() < 3) throw ParseError("entity record needs kind and id", lineno);
        Entity e;
        auto kind = entity_kind_from(tok[1]);
        if (!kind) throw ParseError("unknown entity kind: " + tok[1], lineno);
        e.kind = *kind;
        e.id = tok[2];
        size_t next = 3;
        if (next < tok.size()) {
          if (auto v = parse_double(tok[next])) {
            e.numeric_value = v;
            ++next;
          }
        }
        for (size_t i = next; i < tok.size(); ++i) {
          if (!e.text_label.empty()) e.text_label += ' ';
          e.text_label += tok[i];
        }
        store.add_entity(std::move(e));
      } else if (rec == "T") {
        phase = 'T';
        if (tok.size() != 5)
          throw ParseError("triple record needs subgraph, head, relation, tail", lineno);
        auto g = subgraph_from(tok[1]);
        if (!g) throw ParseError("unknown subgraph: " + tok[1], lineno);
        store.add_triple(Triple{tok[2], tok[3], tok[4], *g});
      } else {
        throw ParseError("unknown record type: " + rec, lineno);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const SchemaViolation&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (store.schema_.empty()) throw SchemaViolation("schema block required: " + path);
  return store;
}

}  // namespace cwrs
