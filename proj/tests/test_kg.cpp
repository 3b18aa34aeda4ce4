#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "cwrs/errors.hpp"
#include "cwrs/kg.hpp"

using namespace cwrs;

namespace {

RelationDef rel(Side side, RelKind kind, const std::string& name, double mn = 0, double mx = 0) {
  RelationDef d;
  d.side = side;
  d.kind = kind;
  d.name = name;
  if (kind == RelKind::numeric) {
    d.has_range = true;
    d.range_min = mn;
    d.range_max = mx;
  }
  return d;
}

// two waveforms, two environments, a handful of knowledge triples, one edge
CwkgStore toy_store() {
  CwkgStore s;
  s.add_relation(rel(Side::waveform, RelKind::categorical, "modulation"));
  s.add_relation(rel(Side::waveform, RelKind::numeric, "coding_rate", 0, 1));
  s.add_relation(rel(Side::waveform, RelKind::boolean_flag, "suppression"));
  s.add_relation(rel(Side::environment, RelKind::categorical, "channel"));
  s.add_relation(rel(Side::environment, RelKind::numeric, "jsr", 0, 40));
  s.add_entity({"W1", EntityKind::waveform_head, std::nullopt, "first waveform"});
  s.add_entity({"W2", EntityKind::waveform_head, std::nullopt, ""});
  s.add_entity({"E1", EntityKind::environment_head, std::nullopt, ""});
  s.add_entity({"E2", EntityKind::environment_head, std::nullopt, ""});
  s.add_entity({"QPSK", EntityKind::tail_value, std::nullopt, ""});
  s.add_entity({"1/3", EntityKind::tail_value, 1.0 / 3, "one third"});
  s.add_entity({"yes", EntityKind::tail_value, std::nullopt, ""});
  s.add_entity({"awgn", EntityKind::tail_value, std::nullopt, ""});
  s.add_entity({"db_30", EntityKind::tail_value, 30.0, ""});
  s.add_triple({"W1", "modulation", "QPSK", Subgraph::WKG});
  s.add_triple({"W1", "coding_rate", "1/3", Subgraph::WKG});
  s.add_triple({"W2", "suppression", "yes", Subgraph::WKG});
  s.add_triple({"E1", "channel", "awgn", Subgraph::EKG});
  s.add_triple({"E1", "jsr", "db_30", Subgraph::EKG});
  s.add_triple({"E2", "channel", "awgn", Subgraph::EKG});
  s.add_triple({"E1", kFeasible, "W1", Subgraph::EWBG});
  return s;
}

}  // namespace

TEST_CASE("schema validation and per-side row indexing") {
  CwkgStore s = toy_store();
  CHECK(s.relation_at("modulation").row_index == 0);
  CHECK(s.relation_at("coding_rate").row_index == 1);
  CHECK(s.relation_at("suppression").row_index == 2);
  CHECK(s.relation_at("channel").row_index == 0);  // indices restart per side
  CHECK(s.relation_at("jsr").row_index == 1);
  CHECK(s.n_features(Side::waveform) == 3);
  CHECK(s.n_features(Side::environment) == 2);

  CHECK_THROWS_AS(s.add_relation(rel(Side::waveform, RelKind::categorical, "modulation")),
                  SchemaViolation);
  CHECK_THROWS_AS(s.add_relation(rel(Side::waveform, RelKind::categorical, kFeasible)),
                  SchemaViolation);
  CHECK_THROWS_AS(s.add_relation(rel(Side::waveform, RelKind::categorical, "two words")),
                  SchemaViolation);
  RelationDef bad = rel(Side::waveform, RelKind::numeric, "power", 5, 5);
  CHECK_THROWS_AS(s.add_relation(bad), SchemaViolation);
  RelationDef ranged = rel(Side::waveform, RelKind::categorical, "ranged");
  ranged.has_range = true;
  ranged.range_max = 1;
  CHECK_THROWS_AS(s.add_relation(ranged), SchemaViolation);
  CHECK(s.find_relation("nope") == nullptr);
  CHECK_THROWS_AS(s.relation_at("nope"), UnknownRelation);
}

TEST_CASE("entity registry rejects duplicates and junk") {
  CwkgStore s = toy_store();
  CHECK_THROWS_AS(s.add_entity({"W1", EntityKind::waveform_head, std::nullopt, ""}),
                  SchemaViolation);
  CHECK_THROWS_AS(s.add_entity({"", EntityKind::tail_value, std::nullopt, ""}), SchemaViolation);
  CHECK_THROWS_AS(s.add_entity({"a b", EntityKind::tail_value, std::nullopt, ""}),
                  SchemaViolation);
  CHECK_THROWS_AS(s.add_entity({"nan", EntityKind::tail_value, NAN, ""}), SchemaViolation);
  CHECK(*s.entity_at("1/3").numeric_value == doctest::Approx(1.0 / 3));
  CHECK_THROWS_AS(s.entity_at("ghost"), UnknownEntity);
  std::vector<std::string> wfs = s.entities_of_kind(EntityKind::waveform_head);
  CHECK(wfs == std::vector<std::string>{"W1", "W2"});
}

TEST_CASE("triple invariants mirror the three subgraphs") {
  CwkgStore s = toy_store();
  CHECK(s.has_triple("E1", kFeasible, "W1"));

  CHECK_THROWS_AS(s.add_triple({"E1", kFeasible, "W1", Subgraph::EWBG}), DuplicateTriple);
  // direction rule: feasibility runs environment -> waveform
  CHECK_THROWS_AS(s.add_triple({"W1", kFeasible, "E1", Subgraph::EWBG}), SubgraphMismatch);
  CHECK_THROWS_AS(s.add_triple({"E1", kFeasible, "W2", Subgraph::WKG}), SubgraphMismatch);
  CHECK_THROWS_AS(s.add_triple({"E1", "modulation", "QPSK", Subgraph::WKG}), SubgraphMismatch);
  CHECK_THROWS_AS(s.add_triple({"W2", "channel", "awgn", Subgraph::EKG}), SubgraphMismatch);
  CHECK_THROWS_AS(s.add_triple({"W2", "modulation", "E1", Subgraph::WKG}), SubgraphMismatch);
  CHECK_THROWS_AS(s.add_triple({"W2", "modulation", "QPSK", Subgraph::EKG}), SubgraphMismatch);
  CHECK_THROWS_AS(s.add_triple({"W2", "modulation", "ghost", Subgraph::WKG}), UnknownEntity);
  CHECK_THROWS_AS(s.add_triple({"W2", "nope", "QPSK", Subgraph::WKG}), UnknownRelation);

  s.add_triple({"E2", kFeasible, "W2", Subgraph::EWBG});
  CHECK(s.subgraph_triples(Subgraph::EWBG).size() == 2);
}

TEST_CASE("neighbors are ordered by schema row index with feasibility last") {
  CwkgStore s = toy_store();
  auto n1 = s.neighbors("W1");
  REQUIRE(n1.size() == 2);
  CHECK(n1[0] == std::pair<std::string, std::string>{"modulation", "QPSK"});
  CHECK(n1[1] == std::pair<std::string, std::string>{"coding_rate", "1/3"});

  auto e1 = s.neighbors("E1");
  REQUIRE(e1.size() == 3);
  CHECK(e1[0].first == "channel");
  CHECK(e1[1].first == "jsr");
  CHECK(e1[2] == std::pair<std::string, std::string>{kFeasible, "W1"});

  CHECK(s.neighbors("QPSK").empty());
  CHECK_THROWS_AS(s.neighbors("ghost"), UnknownEntity);
}

TEST_CASE("feature rows are rectangular per side") {
  CwkgStore s = toy_store();
  auto rows = s.feature_rows("W1");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].relation == "modulation");
  CHECK(rows[0].tail_id == "QPSK");
  CHECK_FALSE(rows[0].missing);
  CHECK(rows[1].relation == "coding_rate");
  CHECK(*rows[1].numeric_value == doctest::Approx(1.0 / 3));
  CHECK(rows[2].relation == "suppression");
  CHECK(rows[2].missing);
  CHECK(rows[2].tail_id.empty());

  auto w2 = s.feature_rows("W2");
  REQUIRE(w2.size() == 3);  // same length for every head of the side
  CHECK(w2[0].missing);
  CHECK(w2[2].tail_id == "yes");

  auto e2 = s.feature_rows("E2");
  REQUIRE(e2.size() == 2);  // environment schema only
  CHECK(e2[0].relation == "channel");
  CHECK(e2[1].missing);

  CHECK_THROWS_AS(s.feature_rows("QPSK"), SchemaViolation);
}

TEST_CASE("adjacency is rebuildable from the triples") {
  CwkgStore s = toy_store();
  CHECK(s.rebuild_adjacency() == s.adjacency());
}

TEST_CASE("the split partitions edges with environments moving atomically") {
  CwkgStore s;
  s.add_relation(rel(Side::environment, RelKind::categorical, "channel"));
  s.add_entity({"awgn", EntityKind::tail_value, std::nullopt, ""});
  for (int w = 0; w < 3; ++w)
    s.add_entity({"W" + std::to_string(w), EntityKind::waveform_head, std::nullopt, ""});
  // 120 environments with exactly one edge each -> the 10:2 ratio is exact
  for (int e = 0; e < 120; ++e) {
    std::string id = "E" + std::to_string(100 + e);
    s.add_entity({id, EntityKind::environment_head, std::nullopt, ""});
    s.add_triple({id, "channel", "awgn", Subgraph::EKG});
    s.add_triple({id, kFeasible, "W" + std::to_string(e % 3), Subgraph::EWBG});
  }

  auto [train, test] = s.split_ewbg(10, 2, 7);
  CHECK(train.size() == 100);
  CHECK(test.size() == 20);

  std::set<std::string> train_envs, test_envs;
  for (const Triple& t : train) train_envs.insert(t.head);
  for (const Triple& t : test) test_envs.insert(t.head);
  for (const std::string& e : test_envs) CHECK(train_envs.count(e) == 0);

  // partition: union restores the edge set exactly
  std::set<std::string> seen;
  for (const Triple& t : train) seen.insert(t.head + "|" + t.tail);
  for (const Triple& t : test) seen.insert(t.head + "|" + t.tail);
  CHECK(seen.size() == 120);

  auto [train2, test2] = s.split_ewbg(10, 2, 7);
  CHECK(train2 == train);
  CHECK(test2 == test);
  auto [train3, test3] = s.split_ewbg(10, 2, 8);
  CHECK(train3 != train);

  auto [all_train, no_test] = s.split_ewbg(1, 0, 7);
  CHECK(all_train.size() == 120);
  CHECK(no_test.empty());

  CHECK_THROWS_AS(s.split_ewbg(0, 2, 7), InvalidValue);
  CwkgStore no_edges;
  no_edges.add_relation(rel(Side::waveform, RelKind::categorical, "modulation"));
  CHECK_THROWS_AS(no_edges.split_ewbg(10, 2, 7), EmptyEwbg);
}

TEST_CASE("every test environment keeps a feasible waveform") {
  CwkgStore s = toy_store();
  s.add_triple({"E2", kFeasible, "W2", Subgraph::EWBG});
  for (uint64_t seed = 0; seed < 12; ++seed) {
    auto [train, test] = s.split_ewbg(10, 2, seed);
    CHECK(train.size() + test.size() == 2);
    for (const Triple& t : test) CHECK_FALSE(s.neighbors(t.head).empty());
  }
}

TEST_CASE("save/load is the identity on stores") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "cwrs_kg_test";
  fs::create_directories(dir);
  std::string path = (dir / "toy.kg").string();

  CwkgStore s = toy_store();
  s.save(path);
  CwkgStore back = CwkgStore::load(path);
  CHECK(back == s);
  CHECK(back.entity_at("W1").text_label == "first waveform");  // labels keep spaces
  CHECK(*back.entity_at("1/3").numeric_value == doctest::Approx(1.0 / 3));
  CHECK(back.relation_at("jsr").range_max == 40.0);
  CHECK(back.rebuild_adjacency() == back.adjacency());

  // byte-identical re-serialization
  std::string path2 = (dir / "toy2.kg").string();
  back.save(path2);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  fs::remove_all(dir);
}

TEST_CASE("the parser reports line numbers and enforces block order") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "cwrs_kg_parse";
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream f(dir / name, std::ios::binary);
    f << body;
    return (dir / name).string();
  };

  // unknown relation inside a triple record: the error names it and the line
  std::string bad = write("bad.kg",
                          "R waveform categorical modulation\n"
                          "E waveform_head W1\n"
                          "E tail_value QPSK\n"
                          "T WKG W1 modulatin QPSK\n");
  try {
    CwkgStore::load(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
    CHECK(std::string(e.what()).find("modulatin") != std::string::npos);
  }

  CHECK_THROWS_AS(CwkgStore::load(write("empty.kg", "")), SchemaViolation);
  CHECK_THROWS_AS(CwkgStore::load(write("comment.kg", "# nothing else\n")), SchemaViolation);
  CHECK_THROWS_AS(CwkgStore::load(write("late_schema.kg",
                                        "R waveform categorical modulation\n"
                                        "E waveform_head W1\n"
                                        "R waveform categorical crc\n")),
                  ParseError);
  CHECK_THROWS_AS(CwkgStore::load(write("bad_kind.kg", "R waveform sideways modulation\n")),
                  ParseError);
  CHECK_THROWS_AS(CwkgStore::load((dir / "missing.kg").string()), IoFailure);

  // comments, blank lines and CRLF endings are tolerated
  CwkgStore ok = CwkgStore::load(write("ok.kg",
                                       "# header comment\r\n"
                                       "R waveform categorical modulation\r\n"
                                       "\n"
                                       "E waveform_head W1\n"
                                       "E tail_value QPSK\n"
                                       "T WKG W1 modulation QPSK\n"));
  CHECK(ok.triples().size() == 1);
  CHECK(ok.entity_at("W1").kind == EntityKind::waveform_head);
  fs::remove_all(dir);
}

TEST_CASE("enum text round trips") {
  for (Subgraph g : {Subgraph::WKG, Subgraph::EKG, Subgraph::EWBG})
    CHECK(subgraph_from(to_text(g)) == g);
  for (Side side : {Side::waveform, Side::environment}) CHECK(side_from(to_text(side)) == side);
  for (RelKind k : {RelKind::categorical, RelKind::numeric, RelKind::boolean_flag})
    CHECK(rel_kind_from(to_text(k)) == k);
  for (EntityKind k :
       {EntityKind::waveform_head, EntityKind::environment_head, EntityKind::tail_value})
    CHECK(entity_kind_from(to_text(k)) == k);
  CHECK_FALSE(subgraph_from("XKG").has_value());
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-3.0) == "-3");
}
