#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "cwrs/kg.hpp"

namespace cwrs {

enum class Modulation { BPSK, QPSK, MSK, QAM16 };
enum class CodingType { RS, Turbo, LDPC };
enum class CodingRate { r2_3, r1_2, r1_3 };
enum class CrcType { crc4, crc8, crc64 };
enum class ChannelType { Gaussian, Rician, Rayleigh };
enum class JammingType { none, single_tone, multi_tone, partial_band, gaussian_pulse };

std::string label(Modulation m);
std::string label(CodingType c);
std::string label(CodingRate r);
std::string label(CrcType c);
std::string label(ChannelType c);
std::string label(JammingType j);
double rate_value(CodingRate r);  // 2/3, 1/2, 1/3

std::optional<Modulation> modulation_from(const std::string& s);
std::optional<CodingType> coding_type_from(const std::string& s);
std::optional<CodingRate> coding_rate_from(const std::string& s);
std::optional<CrcType> crc_from(const std::string& s);
std::optional<ChannelType> channel_from(const std::string& s);
std::optional<JammingType> jamming_from(const std::string& s);

struct WaveformSpec {
  std::string id;
  Modulation modulation = Modulation::BPSK;
  CodingType coding_type = CodingType::RS;
  CodingRate coding_rate = CodingRate::r1_2;
  CrcType crc = CrcType::crc8;
  bool jamming_suppression = false;
  bool soft_demodulation = false;
  double supported_rate_bps = 1e6;
};

struct EnvironmentSpec {
  std::string id;
  ChannelType channel_type = ChannelType::Gaussian;
  JammingType jamming_type = JammingType::none;
  int num_tones = 0;            // 1 iff single-tone, >1 iff multi-tone
  double bandwidth_factor = 0;  // in [0,1]
  double jsr_db = 0;
  double ebn0_db = 0;
  double required_rate_bps = 1e6;
  int required_ber_exponent = -6;  // BER = 10^exponent
};

void validate(const WaveformSpec& wf);   // throws InvalidValue
void validate(const EnvironmentSpec& env);

// Analytic dB-margin feasibility rule. Linear in dB space, monotone in
// ebn0/jsr; exists to produce labels, not channel fidelity.
struct OracleConfig {
  std::map<Modulation, double> base_threshold_db;  // required Eb/N0 at target BER
  std::map<std::pair<CodingType, CodingRate>, double> coding_gain_db;
  std::map<ChannelType, double> channel_penalty_db;
  std::map<JammingType, double> suppression_gain_db;  // applies when wf suppresses
  double jsr_penalty_slope = 0.5;  // margin dB lost per JSR dB when unsuppressed
};

OracleConfig default_oracle_config();
void save_oracle_config(const std::string& path, const OracleConfig& cfg);
OracleConfig load_oracle_config(const std::string& path);

double oracle_margin_db(const EnvironmentSpec& env, const WaveformSpec& wf,
                        const OracleConfig& cfg);
bool oracle_feasible(const EnvironmentSpec& env, const WaveformSpec& wf,
                     const OracleConfig& cfg);

// KG plumbing shared by the generator and transient query environments
void add_base_schema(CwkgStore& store);
void add_vocab_entities(CwkgStore& store);
void add_waveform(CwkgStore& store, const WaveformSpec& wf);
void add_environment(CwkgStore& store, const EnvironmentSpec& env);  // EKG only

WaveformSpec waveform_spec_from_store(const CwkgStore& store, const std::string& id);
EnvironmentSpec environment_spec_from_store(const CwkgStore& store, const std::string& id);

// Sample a corpus whose feasibility edges are exactly the oracle-positive
// pairs. Environments with no feasible waveform are redrawn from their own
// substream (bounded), so every environment has at least one right answer.
CwkgStore gen_corpus(int n_waveforms, int n_environments, const OracleConfig& cfg,
                     uint64_t seed);

// Re-derive every label from the specs encoded in the store; returns the
// number of (env, waveform) pairs whose stored edge disagrees with the oracle.
int recount_ewbg(const CwkgStore& store, const OracleConfig& cfg);

double ewbg_density(const CwkgStore& store);  // edges / (n_env * n_wf)

}  // namespace cwrs
