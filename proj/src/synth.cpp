#include "cwrs/synth.hpp"

#include <cmath>
#include <fstream>
#include <vector>

#include "cwrs/errors.hpp"
#include "cwrs/rng.hpp"

namespace cwrs {

namespace {

const std::vector<Modulation> kModulations = {Modulation::BPSK, Modulation::QPSK,
                                              Modulation::MSK, Modulation::QAM16};
const std::vector<CodingType> kCodingTypes = {CodingType::RS, CodingType::Turbo,
                                              CodingType::LDPC};
const std::vector<CodingRate> kCodingRates = {CodingRate::r2_3, CodingRate::r1_2,
                                              CodingRate::r1_3};
const std::vector<CrcType> kCrcs = {CrcType::crc4, CrcType::crc8, CrcType::crc64};
const std::vector<ChannelType> kChannels = {ChannelType::Gaussian, ChannelType::Rician,
                                            ChannelType::Rayleigh};
const std::vector<JammingType> kJammings = {JammingType::none, JammingType::single_tone,
                                            JammingType::multi_tone, JammingType::partial_band,
                                            JammingType::gaussian_pulse};

// Mbps menu shared by supported and required rates (keeps the rate gate
// learnable: equal values compare feasible)
const std::vector<double> kRateMenuMbps = {0.5, 1, 2, 5, 6.8246, 10, 16};

std::string num_tail_id(const std::string& prefix, double v) {
  return prefix + "_" + format_double(v);
}

void ensure_num_tail(CwkgStore& store, const std::string& id, double v) {
  if (store.find_entity(id)) return;
  Entity e;
  e.id = id;
  e.kind = EntityKind::tail_value;
  e.numeric_value = v;
  e.text_label = format_double(v);
  store.add_entity(std::move(e));
}

void add_value_entity(CwkgStore& store, const std::string& id) {
  Entity e;
  e.id = id;
  e.kind = EntityKind::tail_value;
  e.text_label = id;
  store.add_entity(std::move(e));
}

}  // namespace

std::string label(Modulation m) {
  switch (m) {
    case Modulation::BPSK: return "BPSK";
    case Modulation::QPSK: return "QPSK";
    case Modulation::MSK: return "MSK";
    case Modulation::QAM16: return "16QAM";
  }
  return "?";
}
std::string label(CodingType c) {
  switch (c) {
    case CodingType::RS: return "RS";
    case CodingType::Turbo: return "Turbo";
    case CodingType::LDPC: return "LDPC";
  }
  return "?";
}
std::string label(CodingRate r) {
  switch (r) {
    case CodingRate::r2_3: return "2/3";
    case CodingRate::r1_2: return "1/2";
    case CodingRate::r1_3: return "1/3";
  }
  return "?";
}
std::string label(CrcType c) {
  switch (c) {
    case CrcType::crc4: return "CRC-4";
    case CrcType::crc8: return "CRC-8";
    case CrcType::crc64: return "CRC-64";
  }
  return "?";
}
std::string label(ChannelType c) {
  switch (c) {
    case ChannelType::Gaussian: return "Gaussian";
    case ChannelType::Rician: return "Rician";
    case ChannelType::Rayleigh: return "Rayleigh";
  }
  return "?";
}
std::string label(JammingType j) {
  switch (j) {
    case JammingType::none: return "none";
    case JammingType::single_tone: return "single_tone";
    case JammingType::multi_tone: return "multi_tone";
    case JammingType::partial_band: return "partial_band";
    case JammingType::gaussian_pulse: return "gaussian_pulse";
  }
  return "?";
}

double rate_value(CodingRate r) {
  switch (r) {
    case CodingRate::r2_3: return 2.0 / 3.0;
    case CodingRate::r1_2: return 0.5;
    case CodingRate::r1_3: return 1.0 / 3.0;
  }
  return 0;
}

namespace {
template <typename T, typename F>
std::optional<T> from_label(const std::vector<T>& all, F lab, const std::string& s) {
  for (T v : all)
    if (lab(v) == s) return v;
  return std::nullopt;
}
}  // namespace

std::optional<Modulation> modulation_from(const std::string& s) {
  return from_label(kModulations, [](Modulation v) { return label(v); }, s);
}
std::optional<CodingType> coding_type_from(const std::string& s) {
  return from_label(kCodingTypes, [](CodingType v) { return label(v); }, s);
}
std::optional<CodingRate> coding_rate_from(const std::string& s) {
  return from_label(kCodingRates, [](CodingRate v) { return label(v); }, s);
}
std::optional<CrcType> crc_from(const std::string& s) {
  return from_label(kCrcs, [](CrcType v) { return label(v); }, s);
}
std::optional<ChannelType> channel_from(const std::string& s) {
  return from_label(kChannels, [](ChannelType v) { return label(v); }, s);
}
std::optional<JammingType> jamming_from(const std::string& s) {
  return from_label(kJammings, [](JammingType v) { return label(v); }, s);
}

void validate(const WaveformSpec& wf) {
  if (!(wf.supported_rate_bps > 0) || !std::isfinite(wf.supported_rate_bps))
    throw InvalidValue("supported rate must be positive: " + wf.id);
}

void validate(const EnvironmentSpec& env) {
  if ((env.num_tones == 1) != (env.jamming_type == JammingType::single_tone))
    throw InvalidValue("num_tones must be 1 exactly for single-tone jamming: " + env.id);
  if ((env.num_tones > 1) != (env.jamming_type == JammingType::multi_tone))
    throw InvalidValue("num_tones must exceed 1 exactly for multi-tone jamming: " + env.id);
  if (env.num_tones < 0) throw InvalidValue("negative num_tones: " + env.id);
  if (!(env.bandwidth_factor >= 0 && env.bandwidth_factor <= 1))
    throw InvalidValue("bandwidth factor outside [0,1]: " + env.id);
  if (!(env.required_rate_bps > 0) || !std::isfinite(env.required_rate_bps))
    throw InvalidValue("required rate must be positive: " + env.id);
  if (env.required_ber_exponent >= 0)
    throw InvalidValue("BER exponent must be negative: " + env.id);
  if (!std::isfinite(env.jsr_db) || !std::isfinite(env.ebn0_db))
    throw InvalidValue("non-finite dB value: " + env.id);
}

OracleConfig default_oracle_config() {
  OracleConfig cfg;
  cfg.base_threshold_db = {{Modulation::BPSK, 9.6},
                           {Modulation::QPSK, 9.6},
                           {Modulation::MSK, 10.4},
                           {Modulation::QAM16, 13.4}};
  cfg.coding_gain_db = {{{CodingType::RS, CodingRate::r2_3}, 3.5},
                        {{CodingType::RS, CodingRate::r1_2}, 4.5},
                        {{CodingType::RS, CodingRate::r1_3}, 5.5},
                        {{CodingType::Turbo, CodingRate::r2_3}, 6.0},
                        {{CodingType::Turbo, CodingRate::r1_2}, 7.0},
                        {{CodingType::Turbo, CodingRate::r1_3}, 8.0},
                        {{CodingType::LDPC, CodingRate::r2_3}, 5.5},
                        {{CodingType::LDPC, CodingRate::r1_2}, 6.5},
                        {{CodingType::LDPC, CodingRate::r1_3}, 7.5}};
  cfg.channel_penalty_db = {{ChannelType::Gaussian, 0},
                            {ChannelType::Rician, 2.5},
                            {ChannelType::Rayleigh, 6}};
  cfg.suppression_gain_db = {{JammingType::single_tone, 25},
                             {JammingType::multi_tone, 20},
                             {JammingType::partial_band, 15},
                             {JammingType::gaussian_pulse, 10}};
  cfg.jsr_penalty_slope = 0.6;
  return cfg;
}

void save_oracle_config(const std::string& path, const OracleConfig& cfg) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoFailure("cannot open for writing: " + path);
  os << "# feasibility oracle tables, all values in dB\n";
  for (const auto& [m, v] : cfg.base_threshold_db)
    os << "base_threshold_db." << label(m) << "=" << format_double(v) << "\n";
  for (const auto& [k, v] : cfg.coding_gain_db)
    os << "coding_gain_db." << label(k.first) << "." << label(k.second) << "="
       << format_double(v) << "\n";
  for (const auto& [c, v] : cfg.channel_penalty_db)
    os << "channel_penalty_db." << label(c) << "=" << format_double(v) << "\n";
  for (const auto& [j, v] : cfg.suppression_gain_db)
    os << "suppression_gain_db." << label(j) << "=" << format_double(v) << "\n";
  os << "jsr_penalty_slope=" << format_double(cfg.jsr_penalty_slope) << "\n";
  if (!os) throw IoFailure("failed writing " + path);
}

OracleConfig load_oracle_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot open: " + path);
  OracleConfig cfg;
  cfg.jsr_penalty_slope = 0;
  std::string line;
  int lineno = 0;
  bool have_slope = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", lineno);
    std::string key = line.substr(0, eq);
    auto val_s = line.substr(eq + 1);
    double val = 0;
    try {
      size_t used = 0;
      val = std::stod(val_s, &used);
      if (used != val_s.size()) throw std::invalid_argument("");
    } catch (...) {
      throw ParseError("bad number: " + val_s, lineno);
    }
    auto field = [&](const std::string& prefix) {
      return key.rfind(prefix + ".", 0) == 0 ? key.substr(prefix.size() + 1) : std::string();
    };
    if (std::string f = field("base_threshold_db"); !f.empty()) {
      auto m = modulation_from(f);
      if (!m) throw ParseError("unknown modulation: " + f, lineno);
      cfg.base_threshold_db[*m] = val;
    } else if (std::string f2 = field("coding_gain_db"); !f2.empty()) {
      auto dot = f2.find('.');
      if (dot == std::string::npos) throw ParseError("expected coding type.rate", lineno);
      auto ct = coding_type_from(f2.substr(0, dot));
      auto cr = coding_rate_from(f2.substr(dot + 1));
      if (!ct || !cr) throw ParseError("unknown coding key: " + f2, lineno);
      cfg.coding_gain_db[{*ct, *cr}] = val;
    } else if (std::string f3 = field("channel_penalty_db"); !f3.empty()) {
      auto c = channel_from(f3);
      if (!c) throw ParseError("unknown channel: " + f3, lineno);
      cfg.channel_penalty_db[*c] = val;
    } else if (std::string f4 = field("suppression_gain_db"); !f4.empty()) {
      auto j = jamming_from(f4);
      if (!j || *j == JammingType::none)
        throw ParseError("unknown jamming type: " + f4, lineno);
      cfg.suppression_gain_db[*j] = val;
    } else if (key == "jsr_penalty_slope") {
      cfg.jsr_penalty_slope = val;
      have_slope = true;
    } else {
      throw ParseError("unknown key: " + key, lineno);
    }
  }
  for (Modulation m : kModulations)
    if (!cfg.base_threshold_db.count(m))
      throw InvalidValue("oracle config missing base_threshold_db." + label(m));
  for (CodingType ct : kCodingTypes)
    for (CodingRate cr : kCodingRates)
      if (!cfg.coding_gain_db.count({ct, cr}))
        throw InvalidValue("oracle config missing coding_gain_db." + label(ct) + "." + label(cr));
  for (ChannelType c : kChannels)
    if (!cfg.channel_penalty_db.count(c))
      throw InvalidValue("oracle config missing channel_penalty_db." + label(c));
  for (JammingType j : kJammings)
    if (j != JammingType::none && !cfg.suppression_gain_db.count(j))
      throw InvalidValue("oracle config missing suppression_gain_db." + label(j));
  if (!have_slope) throw InvalidValue("oracle config missing jsr_penalty_slope");
  return cfg;
}

double oracle_margin_db(const EnvironmentSpec& env, const WaveformSpec& wf,
                        const OracleConfig& cfg) {
  double jam_penalty = 0;
  if (env.jamming_type != JammingType::none) {
    double raw = cfg.jsr_penalty_slope * env.jsr_db;
    if (wf.jamming_suppression)
      jam_penalty = std::max(0.0, raw - cfg.suppression_gain_db.at(env.jamming_type));
    else
      jam_penalty = raw;
  }
  return env.ebn0_db - cfg.base_threshold_db.at(wf.modulation) +
         cfg.coding_gain_db.at({wf.coding_type, wf.coding_rate}) -
         cfg.channel_penalty_db.at(env.channel_type) - jam_penalty;
}

bool oracle_feasible(const EnvironmentSpec& env, const WaveformSpec& wf,
                     const OracleConfig& cfg) {
  if (wf.supported_rate_bps < env.required_rate_bps) return false;
  return oracle_margin_db(env, wf, cfg) >= 0;
}

void add_base_schema(CwkgStore& store) {
  auto rel = [&](Side side, RelKind kind, const std::string& name, double mn = 0, double mx = 0,
                 const std::string& units = "") {
    RelationDef def;
    def.side = side;
    def.kind = kind;
    def.name = name;
    if (kind == RelKind::numeric) {
      def.has_range = true;
      def.range_min = mn;
      def.range_max = mx;
    }
    def.units = units;
    store.add_relation(std::move(def));
  };
  rel(Side::waveform, RelKind::categorical, "crc");
  rel(Side::waveform, RelKind::categorical, "modulation");
  rel(Side::waveform, RelKind::categorical, "coding_type");
  rel(Side::waveform, RelKind::numeric, "coding_rate", 0, 1);
  rel(Side::waveform, RelKind::boolean_flag, "jamming_suppression");
  rel(Side::waveform, RelKind::boolean_flag, "soft_demodulation");
  rel(Side::waveform, RelKind::numeric, "supported_rate", 0, 20, "Mbps");
  rel(Side::environment, RelKind::categorical, "channel_type");
  rel(Side::environment, RelKind::categorical, "jamming_type");
  rel(Side::environment, RelKind::numeric, "num_tones", 0, 16);
  rel(Side::environment, RelKind::numeric, "bandwidth_factor", 0, 1);
  rel(Side::environment, RelKind::numeric, "jsr", 0, 40, "dB");
  rel(Side::environment, RelKind::numeric, "ebn0", 0, 20, "dB");
  rel(Side::environment, RelKind::numeric, "required_rate", 0, 20, "Mbps");
  rel(Side::environment, RelKind::numeric, "required_ber_exp", -9, -3);
}

void add_vocab_entities(CwkgStore& store) {
  for (CrcType c : kCrcs) add_value_entity(store, label(c));
  for (Modulation m : kModulations) add_value_entity(store, label(m));
  for (CodingType c : kCodingTypes) add_value_entity(store, label(c));
  for (CodingRate r : kCodingRates) {
    Entity e;
    e.id = label(r);
    e.kind = EntityKind::tail_value;
    e.numeric_value = rate_value(r);
    e.text_label = label(r);
    store.add_entity(std::move(e));
  }
  add_value_entity(store, "yes");
  add_value_entity(store, "no");
  for (ChannelType c : kChannels) add_value_entity(store, label(c));
  for (JammingType j : kJammings) add_value_entity(store, label(j));
}

void add_waveform(CwkgStore& store, const WaveformSpec& wf) {
  validate(wf);
  Entity head;
  head.id = wf.id;
  head.kind = EntityKind::waveform_head;
  head.text_label = wf.id;
  store.add_entity(std::move(head));

  double mbps = wf.supported_rate_bps / 1e6;
  std::string rate_id = num_tail_id("mbps", mbps);
  ensure_num_tail(store, rate_id, mbps);

  auto t = [&](const std::string& rel, const std::string& tail) {
    store.add_triple(Triple{wf.id, rel, tail, Subgraph::WKG});
  };
  t("crc", label(wf.crc));
  t("modulation", label(wf.modulation));
  t("coding_type", label(wf.coding_type));
  t("coding_rate", label(wf.coding_rate));
  t("jamming_suppression", wf.jamming_suppression ? "yes" : "no");
  t("soft_demodulation", wf.soft_demodulation ? "yes" : "no");
  t("supported_rate", rate_id);
}

void add_environment(CwkgStore& store, const EnvironmentSpec& env) {
  validate(env);
  Entity head;
  head.id = env.id;
  head.kind = EntityKind::environment_head;
  head.text_label = env.id;
  store.add_entity(std::move(head));

  auto num = [&](const std::string& rel, const std::string& prefix, double v) {
    std::string id = num_tail_id(prefix, v);
    ensure_num_tail(store, id, v);
    store.add_triple(Triple{env.id, rel, id, Subgraph::EKG});
  };
  store.add_triple(Triple{env.id, "channel_type", label(env.channel_type), Subgraph::EKG});
  store.add_triple(Triple{env.id, "jamming_type", label(env.jamming_type), Subgraph::EKG});
  num("num_tones", "tones", env.num_tones);
  num("bandwidth_factor", "bw", env.bandwidth_factor);
  num("jsr", "db", env.jsr_db);
  num("ebn0", "db", env.ebn0_db);
  num("required_rate", "mbps", env.required_rate_bps / 1e6);
  num("required_ber_exp", "ber", env.required_ber_exponent);
}

namespace {

const FeatureRow& row_of(const std::vector<FeatureRow>& rows, const std::string& rel,
                         const std::string& head) {
  for (const auto& r : rows)
    if (r.relation == rel) {
      if (r.missing) throw SpecReconstructionError(head + " missing " + rel);
      return r;
    }
  throw SpecReconstructionError("no schema relation " + rel);
}

double num_of(const std::vector<FeatureRow>& rows, const std::string& rel,
              const std::string& head) {
  const FeatureRow& r = row_of(rows, rel, head);
  if (!r.numeric_value)
    throw SpecReconstructionError(head + ": tail of " + rel + " has no numeric value");
  return *r.numeric_value;
}

bool bool_of(const std::vector<FeatureRow>& rows, const std::string& rel,
             const std::string& head) {
  const std::string& t = row_of(rows, rel, head).tail_id;
  if (t == "yes") return true;
  if (t == "no") return false;
  throw SpecReconstructionError(head + ": non-boolean tail for " + rel + ": " + t);
}

}  // namespace

WaveformSpec waveform_spec_from_store(const CwkgStore& store, const std::string& id) {
  auto rows = store.feature_rows(id);
  WaveformSpec wf;
  wf.id = id;
  auto crc = crc_from(row_of(rows, "crc", id).tail_id);
  auto mod = modulation_from(row_of(rows, "modulation", id).tail_id);
  auto ct = coding_type_from(row_of(rows, "coding_type", id).tail_id);
  auto cr = coding_rate_from(row_of(rows, "coding_rate", id).tail_id);
  if (!crc || !mod || !ct || !cr)
    throw SpecReconstructionError("unrecognized categorical tail on " + id);
  wf.crc = *crc;
  wf.modulation = *mod;
  wf.coding_type = *ct;
  wf.coding_rate = *cr;
  wf.jamming_suppression = bool_of(rows, "jamming_suppression", id);
  wf.soft_demodulation = bool_of(rows, "soft_demodulation", id);
  wf.supported_rate_bps = num_of(rows, "supported_rate", id) * 1e6;
  return wf;
}

EnvironmentSpec environment_spec_from_store(const CwkgStore& store, const std::string& id) {
  auto rows = store.feature_rows(id);
  EnvironmentSpec env;
  env.id = id;
  auto ch = channel_from(row_of(rows, "channel_type", id).tail_id);
  auto jam = jamming_from(row_of(rows, "jamming_type", id).tail_id);
  if (!ch || !jam) throw SpecReconstructionError("unrecognized categorical tail on " + id);
  env.channel_type = *ch;
  env.jamming_type = *jam;
  env.num_tones = static_cast<int>(std::llround(num_of(rows, "num_tones", id)));
  env.bandwidth_factor = num_of(rows, "bandwidth_factor", id);
  env.jsr_db = num_of(rows, "jsr", id);
  env.ebn0_db = num_of(rows, "ebn0", id);
  env.required_rate_bps = num_of(rows, "required_rate", id) * 1e6;
  env.required_ber_exponent = static_cast<int>(std::llround(num_of(rows, "required_ber_exp", id)));
  return env;
}

namespace {

std::string padded_id(char prefix, int i, int n_total) {
  size_t width = 1;
  for (int v = n_total - 1; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(i);
  std::string pad(width > digits.size() ? width - digits.size() : 0, '0');
  return prefix + pad + digits;
}

WaveformSpec sample_waveform(const std::string& id, Rng& rng) {
  WaveformSpec wf;
  wf.id = id;
  wf.crc = kCrcs[rng.below(kCrcs.size())];
  wf.modulation = kModulations[rng.below(kModulations.size())];
  wf.coding_type = kCodingTypes[rng.below(kCodingTypes.size())];
  wf.coding_rate = kCodingRates[rng.below(kCodingRates.size())];
  wf.jamming_suppression = rng.bernoulli(0.5);
  wf.soft_demodulation = rng.bernoulli(0.5);
  wf.supported_rate_bps = kRateMenuMbps[rng.below(kRateMenuMbps.size())] * 1e6;
  return wf;
}

EnvironmentSpec sample_environment(const std::string& id, Rng& rng) {
  EnvironmentSpec env;
  env.id = id;
  env.channel_type = kChannels[rng.below(kChannels.size())];
  env.jamming_type = kJammings[rng.below(kJammings.size())];
  switch (env.jamming_type) {
    case JammingType::single_tone: env.num_tones = 1; break;
    case JammingType::multi_tone: env.num_tones = 2 + static_cast<int>(rng.below(7)); break;
    default: env.num_tones = 0;
  }
  env.bandwidth_factor =
      env.jamming_type == JammingType::partial_band ? (1 + static_cast<int>(rng.below(10))) / 10.0
                                                    : 0.0;
  env.jsr_db = env.jamming_type == JammingType::none ? 0 : static_cast<double>(rng.below(41));
  env.ebn0_db = static_cast<double>(rng.below(41)) * 0.5;
  env.required_rate_bps = kRateMenuMbps[rng.below(kRateMenuMbps.size())] * 1e6;
  env.required_ber_exponent = -3 - static_cast<int>(rng.below(7));
  return env;
}

}  // namespace

CwkgStore gen_corpus(int n_waveforms, int n_environments, const OracleConfig& cfg,
                     uint64_t seed) {
  if (n_waveforms < 2 || n_environments < 2)
    throw InvalidValue("corpus needs at least 2 waveforms and 2 environments");

  CwkgStore store;
  add_base_schema(store);
  add_vocab_entities(store);

  std::vector<WaveformSpec> wfs;
  for (int i = 0; i < n_waveforms; ++i) {
    Rng rng(mix64(seed, fnv1a("waveform") + static_cast<uint64_t>(i)));
    wfs.push_back(sample_waveform(padded_id('W', i, n_waveforms), rng));
    add_waveform(store, wfs.back());
  }

  constexpr int kMaxRedraws = 500;
  std::vector<EnvironmentSpec> envs;
  for (int j = 0; j < n_environments; ++j) {
    Rng rng(mix64(seed, fnv1a("environment") + static_cast<uint64_t>(j)));
    std::string id = padded_id('E', j, n_environments);
    bool placed = false;
    for (int attempt = 0; attempt < kMaxRedraws && !placed; ++attempt) {
      EnvironmentSpec env = sample_environment(id, rng);
      for (const auto& wf : wfs)
        if (oracle_feasible(env, wf, cfg)) {
          envs.push_back(env);
          add_environment(store, env);
          placed = true;
          break;
        }
    }
    if (!placed)
      throw DegenerateCorpus("no feasible waveform found for " + id + " after " +
                             std::to_string(kMaxRedraws) + " redraws");
  }

  for (const auto& env : envs)
    for (const auto& wf : wfs)
      if (oracle_feasible(env, wf, cfg))
        store.add_triple(Triple{env.id, kFeasible, wf.id, Subgraph::EWBG});

  return store;
}

int recount_ewbg(const CwkgStore& store, const OracleConfig& cfg) {
  auto wf_ids = store.entities_of_kind(EntityKind::waveform_head);
  auto env_ids = store.entities_of_kind(EntityKind::environment_head);
  std::vector<WaveformSpec> wfs;
  for (const auto& id : wf_ids) wfs.push_back(waveform_spec_from_store(store, id));
  int disagreements = 0;
  for (const auto& env_id : env_ids) {
    EnvironmentSpec env = environment_spec_from_store(store, env_id);
    for (const auto& wf : wfs) {
      bool want = oracle_feasible(env, wf, cfg);
      bool have = store.has_triple(env_id, kFeasible, wf.id);
      if (want != have) ++disagreements;
    }
  }
  return disagreements;
}

double ewbg_density(const CwkgStore& store) {
  double n_wf = static_cast<double>(store.entities_of_kind(EntityKind::waveform_head).size());
  double n_env = static_cast<double>(store.entities_of_kind(EntityKind::environment_head).size());
  if (n_wf == 0 || n_env == 0) return 0;
  return static_cast<double>(store.subgraph_triples(Subgraph::EWBG).size()) / (n_wf * n_env);
}

}  // namespace cwrs
