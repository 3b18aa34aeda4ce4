#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cwrs/errors.hpp"
#include "cwrs/rng.hpp"
#include "cwrs/synth.hpp"

using namespace cwrs;

namespace {

WaveformSpec wf_qpsk_ldpc13_supp() {
  WaveformSpec wf;
  wf.id = "Wq";
  wf.modulation = Modulation::QPSK;
  wf.coding_type = CodingType::LDPC;
  wf.coding_rate = CodingRate::r1_3;
  wf.crc = CrcType::crc8;
  wf.jamming_suppression = true;
  wf.soft_demodulation = true;
  wf.supported_rate_bps = 16e6;
  return wf;
}

EnvironmentSpec env_single_tone_jsr30() {
  EnvironmentSpec env;
  env.id = "Es";
  env.channel_type = ChannelType::Gaussian;
  env.jamming_type = JammingType::single_tone;
  env.num_tones = 1;
  env.jsr_db = 30;
  env.ebn0_db = 4;
  env.required_rate_bps = 5e6;
  env.required_ber_exponent = -6;
  return env;
}

// rebuild a store, dropping the EWBG edge at `skip` and optionally adding one
CwkgStore rebuild_edges(const CwkgStore& src, size_t skip,
                        const Triple* extra = nullptr) {
  CwkgStore out;
  for (RelationDef def : src.schema()) {
    def.row_index = -1;
    out.add_relation(std::move(def));
  }
  for (const auto& [id, e] : src.entities()) out.add_entity(e);
  size_t edge_i = 0;
  for (const Triple& t : src.triples()) {
    if (t.subgraph == Subgraph::EWBG && edge_i++ == skip) continue;
    out.add_triple(t);
  }
  if (extra) out.add_triple(*extra);
  return out;
}

}  // namespace

TEST_CASE("margin arithmetic on hand-worked scenarios") {
  OracleConfig cfg = default_oracle_config();
  EnvironmentSpec env = env_single_tone_jsr30();
  WaveformSpec wf = wf_qpsk_ldpc13_supp();

  // suppressed single-tone at 30 dB JSR: 0.6*30 = 18 < 25 dB gain, no penalty
  // 4 - 9.6 + 7.5 - 0 - 0 = 1.9
  CHECK(oracle_margin_db(env, wf, cfg) == doctest::Approx(1.9));
  CHECK(oracle_feasible(env, wf, cfg));

  WaveformSpec nosupp = wf;
  nosupp.jamming_suppression = false;
  CHECK(oracle_margin_db(env, nosupp, cfg) == doctest::Approx(4 - 9.6 + 7.5 - 18));
  CHECK_FALSE(oracle_feasible(env, nosupp, cfg));

  WaveformSpec turbo = wf;
  turbo.modulation = Modulation::BPSK;
  turbo.coding_type = CodingType::Turbo;
  turbo.supported_rate_bps = 6.8246e6;
  CHECK(oracle_margin_db(env, turbo, cfg) == doctest::Approx(4 - 9.6 + 8.0));

  // no jamming: the suppression flag is inert
  EnvironmentSpec quiet;
  quiet.id = "Eq";
  quiet.ebn0_db = 10;
  quiet.required_rate_bps = 1e6;
  WaveformSpec plain;
  plain.id = "Wp";
  plain.modulation = Modulation::BPSK;
  plain.coding_type = CodingType::Turbo;
  plain.coding_rate = CodingRate::r1_2;
  plain.supported_rate_bps = 2e6;
  CHECK(oracle_margin_db(quiet, plain, cfg) == doctest::Approx(7.4));
  plain.jamming_suppression = true;
  CHECK(oracle_margin_db(quiet, plain, cfg) == doctest::Approx(7.4));

  // channel penalties stack linearly
  EnvironmentSpec fading = quiet;
  fading.ebn0_db = 12;
  WaveformSpec qam;
  qam.id = "W16";
  qam.modulation = Modulation::QAM16;
  qam.coding_type = CodingType::RS;
  qam.coding_rate = CodingRate::r2_3;
  CHECK(oracle_margin_db(fading, qam, cfg) == doctest::Approx(12 - 13.4 + 3.5));
  fading.channel_type = ChannelType::Rician;
  CHECK(oracle_margin_db(fading, qam, cfg) == doctest::Approx(12 - 13.4 + 3.5 - 2.5));
  fading.channel_type = ChannelType::Rayleigh;
  CHECK(oracle_margin_db(fading, qam, cfg) == doctest::Approx(12 - 13.4 + 3.5 - 6));
}

TEST_CASE("suppression clamps at zero and respects the jamming-specific gain") {
  OracleConfig cfg = default_oracle_config();
  WaveformSpec wf = wf_qpsk_ldpc13_supp();
  EnvironmentSpec env = env_single_tone_jsr30();

  // any suppressed single-tone JSR up to 25/0.6 dB leaves the margin at 1.9
  for (double jsr : {0.0, 10.0, 30.0, 40.0}) {
    env.jsr_db = jsr;
    CHECK(oracle_margin_db(env, wf, cfg) == doctest::Approx(1.9));
  }

  // multi-tone gain is only 20 dB, so 40 dB JSR leaks 4 dB through
  env.jamming_type = JammingType::multi_tone;
  env.num_tones = 4;
  env.jsr_db = 40;
  CHECK(oracle_margin_db(env, wf, cfg) == doctest::Approx(1.9 - 4));
}

TEST_CASE("the rate gate is independent of the margin") {
  OracleConfig cfg = default_oracle_config();
  WaveformSpec wf = wf_qpsk_ldpc13_supp();
  EnvironmentSpec env = env_single_tone_jsr30();
  env.required_rate_bps = 20e6;  // wf supports 16
  CHECK(oracle_margin_db(env, wf, cfg) == doctest::Approx(1.9));
  CHECK_FALSE(oracle_feasible(env, wf, cfg));
  env.required_rate_bps = 16e6;  // equal rates pass
  CHECK(oracle_feasible(env, wf, cfg));
}

TEST_CASE("margins are monotone in ebn0 and jsr") {
  OracleConfig cfg = default_oracle_config();
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    EnvironmentSpec env = env_single_tone_jsr30();
    env.ebn0_db = rng.uniform(0, 20);
    env.jsr_db = rng.uniform(0, 30);
    WaveformSpec wf = wf_qpsk_ldpc13_supp();
    wf.jamming_suppression = false;
    double base = oracle_margin_db(env, wf, cfg);

    EnvironmentSpec up = env;
    up.ebn0_db += 3;
    CHECK(oracle_margin_db(up, wf, cfg) == doctest::Approx(base + 3));
    EnvironmentSpec jam = env;
    jam.jsr_db += 5;
    CHECK(oracle_margin_db(jam, wf, cfg) == doctest::Approx(base - 0.6 * 5));
  }
}

TEST_CASE("labels parse back to their enums") {
  for (Modulation m : {Modulation::BPSK, Modulation::QPSK, Modulation::MSK, Modulation::QAM16})
    CHECK(modulation_from(label(m)) == m);
  for (CodingType c : {CodingType::RS, CodingType::Turbo, CodingType::LDPC})
    CHECK(coding_type_from(label(c)) == c);
  for (CodingRate r : {CodingRate::r2_3, CodingRate::r1_2, CodingRate::r1_3})
    CHECK(coding_rate_from(label(r)) == r);
  for (CrcType c : {CrcType::crc4, CrcType::crc8, CrcType::crc64})
    CHECK(crc_from(label(c)) == c);
  for (ChannelType c : {ChannelType::Gaussian, ChannelType::Rician, ChannelType::Rayleigh})
    CHECK(channel_from(label(c)) == c);
  for (JammingType j : {JammingType::none, JammingType::single_tone, JammingType::multi_tone,
                        JammingType::partial_band, JammingType::gaussian_pulse})
    CHECK(jamming_from(label(j)) == j);
  CHECK(label(Modulation::QAM16) == "16QAM");
  CHECK_FALSE(modulation_from("8PSK").has_value());
  CHECK_FALSE(jamming_from("").has_value());
  CHECK(rate_value(CodingRate::r2_3) == doctest::Approx(2.0 / 3));
  CHECK(rate_value(CodingRate::r1_2) == 0.5);
  CHECK(rate_value(CodingRate::r1_3) == doctest::Approx(1.0 / 3));
}

TEST_CASE("spec validation rejects inconsistent fields") {
  WaveformSpec wf = wf_qpsk_ldpc13_supp();
  CHECK_NOTHROW(validate(wf));
  wf.supported_rate_bps = 0;
  CHECK_THROWS_AS(validate(wf), InvalidValue);

  EnvironmentSpec env = env_single_tone_jsr30();
  CHECK_NOTHROW(validate(env));
  env.num_tones = 0;  // single-tone must have exactly one tone
  CHECK_THROWS_AS(validate(env), InvalidValue);
  env.num_tones = 2;
  CHECK_THROWS_AS(validate(env), InvalidValue);

  env = env_single_tone_jsr30();
  env.jamming_type = JammingType::multi_tone;
  CHECK_THROWS_AS(validate(env), InvalidValue);  // still one tone
  env.num_tones = 3;
  CHECK_NOTHROW(validate(env));

  env = env_single_tone_jsr30();
  env.bandwidth_factor = 1.5;
  CHECK_THROWS_AS(validate(env), InvalidValue);
  env = env_single_tone_jsr30();
  env.required_ber_exponent = 0;
  CHECK_THROWS_AS(validate(env), InvalidValue);
  env = env_single_tone_jsr30();
  env.jsr_db = NAN;
  CHECK_THROWS_AS(validate(env), InvalidValue);
  env = env_single_tone_jsr30();
  env.required_rate_bps = -1;
  CHECK_THROWS_AS(validate(env), InvalidValue);
}

TEST_CASE("oracle tables survive a save/load round trip") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "cwrs_synth_cfg";
  fs::create_directories(dir);
  std::string path = (dir / "oracle.cfg").string();

  OracleConfig cfg = default_oracle_config();
  save_oracle_config(path, cfg);
  OracleConfig back = load_oracle_config(path);
  CHECK(back.base_threshold_db == cfg.base_threshold_db);
  CHECK(back.coding_gain_db == cfg.coding_gain_db);
  CHECK(back.channel_penalty_db == cfg.channel_penalty_db);
  CHECK(back.suppression_gain_db == cfg.suppression_gain_db);
  CHECK(back.jsr_penalty_slope == cfg.jsr_penalty_slope);

  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream f(dir / name, std::ios::binary);
    f << body;
    return (dir / name).string();
  };
  CHECK_THROWS_AS(load_oracle_config(write("slope_only.cfg", "jsr_penalty_slope=0.6\n")),
                  InvalidValue);
  // a full table minus the slope is also incomplete
  std::ifstream in(path);
  std::string full((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string noslope = full.substr(0, full.find("jsr_penalty_slope"));
  CHECK_THROWS_AS(load_oracle_config(write("no_slope.cfg", noslope)), InvalidValue);

  CHECK_THROWS_AS(load_oracle_config(write("eqless.cfg", "garbage\n")), ParseError);
  CHECK_THROWS_AS(load_oracle_config(write("nan.cfg", "jsr_penalty_slope=abc\n")), ParseError);
  CHECK_THROWS_AS(load_oracle_config(write("mod.cfg", "base_threshold_db.8PSK=1\n")), ParseError);
  CHECK_THROWS_AS(load_oracle_config(write("key.cfg", "mystery=1\n")), ParseError);
  CHECK_THROWS_AS(load_oracle_config((dir / "absent.cfg").string()), IoFailure);
  fs::remove_all(dir);
}

TEST_CASE("waveform and environment specs round trip through the store") {
  CwkgStore store;
  add_base_schema(store);
  add_vocab_entities(store);

  WaveformSpec wf = wf_qpsk_ldpc13_supp();
  add_waveform(store, wf);
  WaveformSpec wback = waveform_spec_from_store(store, "Wq");
  CHECK(wback.modulation == wf.modulation);
  CHECK(wback.coding_type == wf.coding_type);
  CHECK(wback.coding_rate == wf.coding_rate);
  CHECK(wback.crc == wf.crc);
  CHECK(wback.jamming_suppression == wf.jamming_suppression);
  CHECK(wback.soft_demodulation == wf.soft_demodulation);
  CHECK(wback.supported_rate_bps == doctest::Approx(wf.supported_rate_bps));

  EnvironmentSpec env;
  env.id = "Eb";
  env.channel_type = ChannelType::Rician;
  env.jamming_type = JammingType::partial_band;
  env.bandwidth_factor = 0.4;
  env.jsr_db = 22.5;
  env.ebn0_db = 7.5;
  env.required_rate_bps = 6.8246e6;
  env.required_ber_exponent = -8;
  add_environment(store, env);
  EnvironmentSpec eback = environment_spec_from_store(store, "Eb");
  CHECK(eback.channel_type == env.channel_type);
  CHECK(eback.jamming_type == env.jamming_type);
  CHECK(eback.num_tones == env.num_tones);
  CHECK(eback.bandwidth_factor == doctest::Approx(env.bandwidth_factor));
  CHECK(eback.jsr_db == doctest::Approx(env.jsr_db));
  CHECK(eback.ebn0_db == doctest::Approx(env.ebn0_db));
  CHECK(eback.required_rate_bps == doctest::Approx(env.required_rate_bps));
  CHECK(eback.required_ber_exponent == env.required_ber_exponent);

  // equal numeric values share one tail entity
  WaveformSpec twin = wf;
  twin.id = "Wr";
  add_waveform(store, twin);
  CHECK(store.find_entity("mbps_16") != nullptr);
  CHECK(store.has_triple("Wq", "supported_rate", "mbps_16"));
  CHECK(store.has_triple("Wr", "supported_rate", "mbps_16"));

  CHECK_THROWS_AS(waveform_spec_from_store(store, "Eb"), SpecReconstructionError);
}

TEST_CASE("generated corpora are reproducible and label-consistent") {
  namespace fs = std::filesystem;
  OracleConfig cfg = default_oracle_config();
  CwkgStore a = gen_corpus(12, 60, cfg, 5);
  CwkgStore b = gen_corpus(12, 60, cfg, 5);
  CHECK(a == b);

  fs::path dir = fs::temp_directory_path() / "cwrs_synth_gen";
  fs::create_directories(dir);
  a.save((dir / "a.kg").string());
  b.save((dir / "b.kg").string());
  std::ifstream f1(dir / "a.kg", std::ios::binary), f2(dir / "b.kg", std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  fs::remove_all(dir);

  CHECK(gen_corpus(12, 60, cfg, 6) != a);

  CHECK(a.entities_of_kind(EntityKind::waveform_head).size() == 12);
  CHECK(a.entities_of_kind(EntityKind::environment_head).size() == 60);
  CHECK(recount_ewbg(a, cfg) == 0);

  double density = ewbg_density(a);
  CHECK(density > 0.05);
  CHECK(density < 0.8);

  // the generator redraws until every environment has an answer
  for (const std::string& env : a.entities_of_kind(EntityKind::environment_head)) {
    int feasible = 0;
    for (const auto& [rel, tail] : a.neighbors(env))
      if (rel == kFeasible) ++feasible;
    CHECK(feasible >= 1);
  }
}

TEST_CASE("label recounts catch single-edge tampering") {
  OracleConfig cfg = default_oracle_config();
  CwkgStore a = gen_corpus(8, 20, cfg, 5);
  REQUIRE(recount_ewbg(a, cfg) == 0);

  CwkgStore dropped = rebuild_edges(a, 0);
  CHECK(recount_ewbg(dropped, cfg) == 1);

  // graft one oracle-negative edge onto an untampered rebuild
  auto envs = a.entities_of_kind(EntityKind::environment_head);
  auto wfs = a.entities_of_kind(EntityKind::waveform_head);
  Triple extra;
  bool found = false;
  for (const auto& e : envs) {
    for (const auto& w : wfs)
      if (!a.has_triple(e, kFeasible, w)) {
        extra = Triple{e, kFeasible, w, Subgraph::EWBG};
        found = true;
        break;
      }
    if (found) break;
  }
  REQUIRE(found);
  CwkgStore grafted = rebuild_edges(a, a.subgraph_triples(Subgraph::EWBG).size(), &extra);
  CHECK(recount_ewbg(grafted, cfg) == 1);
}

TEST_CASE("degenerate oracles and tiny corpora are rejected") {
  OracleConfig cfg = default_oracle_config();
  CHECK_THROWS_AS(gen_corpus(1, 10, cfg, 5), InvalidValue);
  CHECK_THROWS_AS(gen_corpus(10, 1, cfg, 5), InvalidValue);

  OracleConfig impossible = cfg;
  for (auto& [m, v] : impossible.base_threshold_db) v = 1000;
  CHECK_THROWS_AS(gen_corpus(2, 2, impossible, 5), DegenerateCorpus);
}
