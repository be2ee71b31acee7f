#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ffm/gates.hpp"
#include "ffm/readout.hpp"
#include "ffm/sweetspot.hpp"

namespace ffm::io {

/// Configuration problem with the offending line (0 if not tied to one) and field.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& source, int line, std::string field, const std::string& what);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

/// 17 significant digits, enough for exact double round trips.
std::string format_number(double v);

std::string sha256_hex(const std::string& data);

struct ConfigEntry {
  std::string value;
  int line = 0;
};

/// `key = value` lines; '#' starts a comment. Duplicate keys are errors.
std::map<std::string, ConfigEntry> parse_key_values(const std::string& text, const std::string& source);

struct RunConfig {
  CircuitParams circuit;
  int n_osc = 60, N = 50, M = 39;
  DriveParams drive{0.235394, 1.5188321};
  SweepGrid grid{0.0, 0.3, 0.005, 1.515, 1.53, 0.25e-3};
  NoiseModel noise;
  double A_gate = 4e-3;  // flux quantum
  GateAxis axis = GateAxis::X;
  int m_g = 3;
  int budget = 600;
  AncillaFluxoniumModel ancilla;
  std::string quantity = "delta2_D";  // sweep value
  std::vector<double> fractions{-0.1, -0.05, 0.0, 0.05, 0.1};
  std::string out = "ffm-out";
  int workers = 1;
  std::uint64_t seed = 1;

  /// Every field that can change a result as sorted `key = value` lines (output
  /// directory and worker count excluded); the hash is taken over this text.
  std::string canonical() const;
  std::string hash() const { return sha256_hex(canonical()); }
  void validate(const std::string& source = "<config>") const;
};

/// Overlays the entries on the defaults. Unknown keys, malformed values and
/// physical invariant violations raise ConfigError.
RunConfig run_config(const std::map<std::string, ConfigEntry>& entries, const std::string& source);
RunConfig load_run_config(const std::filesystem::path& path);

/// Known keys with their units, for help output.
std::vector<std::pair<std::string, std::string>> config_keys();

// Binary spectrum serialisation with a SHA-256 trailer.
std::string serialize_spectrum(const StaticSpectrum& spec);
/// Throws Error on a truncated or corrupted payload.
StaticSpectrum deserialize_spectrum(const std::string& bytes);

std::string spectrum_cache_key(const CircuitParams& params, int n_osc, int N);

enum class CacheStatus { Disabled, Hit, Miss, Recomputed };

/// Content-addressed store of static spectra.
class SpectrumCache {
 public:
  explicit SpectrumCache(std::filesystem::path dir);
  /// Directory from FFM_CACHE_DIR, if set and non-empty.
  static std::optional<SpectrumCache> from_environment();

  std::filesystem::path path_for(const std::string& key) const;
  /// Reads the entry or solves and stores it. Corrupt entries are recomputed and
  /// overwritten with a message passed to `warn`.
  StaticSpectrum get(const CircuitParams& params, int n_osc, int N, CacheStatus* status = nullptr,
                     const std::function<void(const std::string&)>& warn = {}) const;

 private:
  std::filesystem::path dir_;
};

StaticSpectrum cached_spectrum(const CircuitParams& params, int n_osc, int N, CacheStatus* status = nullptr,
                               const std::function<void(const std::string&)>& warn = {});

struct MapRow {
  double A = 0.0, Omega = 0.0;
  double value = 0.0;
  std::string flags;
};

/// Header `A,Omega_GHz,value,flags`.
std::string render_map_csv(const std::vector<MapRow>& rows);
/// Two columns (t_ns, value) over one period of frequency Omega (GHz).
std::string render_waveform_csv(const std::vector<double>& samples, double Omega, const std::string& column);

struct PointOutcome {
  double value = 0.0;
  std::string flags;
  bool failed = false;
};

/// Evaluates every point on up to `workers` threads. A throwing point is
/// recorded as failed; results are ordered by index whatever the schedule.
std::vector<PointOutcome> run_points(int n, int workers, const std::function<PointOutcome(int)>& fn);

struct Provenance {
  std::string kind;
  const RunConfig* config = nullptr;
  double wall_time = 0.0;  // s
};

std::string version();
/// JSON sidecar text: provenance block plus `payload` (a JSON object serialised as text).
std::string render_sidecar(const Provenance& p, const std::string& payload_json);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace ffm::io
