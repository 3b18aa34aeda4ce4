#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cwrs {

enum class RelKind { categorical, numeric, boolean_flag };
enum class Side { waveform, environment };
enum class EntityKind { waveform_head, environment_head, tail_value };
enum class Subgraph { WKG, EKG, EWBG };

// the one relation of the environment-waveform bipartite graph
inline const std::string kFeasible = "feasible";

struct RelationDef {
  std::string name;
  RelKind kind = RelKind::categorical;
  Side side = Side::waveform;
  std::string units;            // empty = none
  bool has_range = false;       // required for numeric relations
  double range_min = 0;
  double range_max = 0;
  int row_index = -1;           // position in the per-side feature matrix

  bool operator==(const RelationDef&) const = default;
};

struct Entity {
  std::string id;
  EntityKind kind = EntityKind::tail_value;
  std::optional<double> numeric_value;  // numeric tails only
  std::string text_label;

  bool operator==(const Entity&) const = default;
};

struct Triple {
  std::string head;
  std::string relation;  // kFeasible for EWBG edges
  std::string tail;
  Subgraph subgraph = Subgraph::WKG;

  bool operator==(const Triple&) const = default;
};

struct FeatureRow {
  std::string relation;
  std::string tail_id;  // empty when missing
  std::optional<double> numeric_value;
  bool missing = false;
};

// Typed triplet store: waveform subgraph + environment subgraph + feasibility
// edges, with a fixed relation schema per side. Build once, then read-only.
class CwkgStore {
 public:
  // schema first, then entities, then triples (the file format keeps that order)
  void add_relation(RelationDef def);  // row_index assigned per side in call order
  void add_entity(Entity e);
  void add_triple(const Triple& t);

  const RelationDef* find_relation(const std::string& name) const;
  const Entity* find_entity(const std::string& id) const;
  const RelationDef& relation_at(const std::string& name) const;  // throws UnknownRelation
  const Entity& entity_at(const std::string& id) const;           // throws UnknownEntity

  // all triples with this head, ordered by relation row_index then tail id;
  // feasibility edges sort last
  std::vector<std::pair<std::string, std::string>> neighbors(const std::string& head) const;

  // one row per schema relation of the head's side, in row_index order
  std::vector<FeatureRow> feature_rows(const std::string& head) const;

  // Partition the feasibility edges for training/testing. Environments move
  // atomically (a test environment never appears in the train half), the
  // environment counts split within one of a:(a+b), and every selected test
  // environment has at least one feasible waveform by construction.
  std::pair<std::vector<Triple>, std::vector<Triple>> split_ewbg(int a, int b,
                                                                 uint64_t seed) const;

  void save(const std::string& path) const;
  static CwkgStore load(const std::string& path);

  const std::vector<RelationDef>& schema() const { return schema_; }
  std::vector<const RelationDef*> side_schema(Side side) const;  // row_index order
  int n_features(Side side) const;
  const std::map<std::string, Entity>& entities() const { return entities_; }
  const std::vector<Triple>& triples() const { return triples_; }
  std::vector<Triple> subgraph_triples(Subgraph g) const;
  std::vector<std::string> entities_of_kind(EntityKind k) const;  // sorted ids
  bool has_triple(const std::string& head, const std::string& relation,
                  const std::string& tail) const;

  using Adjacency = std::map<std::string, std::vector<std::pair<std::string, std::string>>>;
  const Adjacency& adjacency() const { return adjacency_; }
  Adjacency rebuild_adjacency() const;  // from triples alone; must equal adjacency()

  bool operator==(const CwkgStore& o) const {
    return schema_ == o.schema_ && entities_ == o.entities_ && triples_ == o.triples_;
  }

 private:
  std::vector<RelationDef> schema_;  // insertion order; row_index contiguous per side
  std::map<std::string, size_t> relation_pos_;
  std::map<std::string, Entity> entities_;
  std::vector<Triple> triples_;
  std::set<std::string> triple_keys_;
  Adjacency adjacency_;
};

// enum <-> text, shared with the file format and the corpus generator
std::string to_text(RelKind k);
std::string to_text(Side s);
std::string to_text(EntityKind k);
std::string to_text(Subgraph g);
std::optional<RelKind> rel_kind_from(const std::string& s);
std::optional<Side> side_from(const std::string& s);
std::optional<EntityKind> entity_kind_from(const std::string& s);
std::optional<Subgraph> subgraph_from(const std::string& s);

// shortest round-trip decimal form (used by every text artifact)
std::string format_double(double v);

}  // namespace cwrs
