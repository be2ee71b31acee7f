#include "ffm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "ffm/parallel.hpp"

#ifndef FFM_VERSION
#define FFM_VERSION "0.0.0"
#endif

namespace ffm::io {

namespace fs = std::filesystem;

ConfigError::ConfigError(const std::string& source, int line, std::string field, const std::string& what)
    : InvalidArgument(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + field + ": " + what),
      line_(line),
      field_(std::move(field)) {}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
    throw std::invalid_argument("expected a finite number, got '" + s + "'");
  return v;
}

long long to_integer(const std::string& s) {
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw std::invalid_argument("expected an integer, got '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  const long long v = to_integer(s);
  if (v < -1000000000LL || v > 1000000000LL) throw std::invalid_argument("integer out of range");
  return static_cast<int>(v);
}

struct Field {
  const char* key;
  const char* unit;
  const char* group;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Get>
Field number(const char* key, const char* unit, const char* group, Get ref) {
  return {key, unit, group, [ref](RunConfig& c, const std::string& s) { ref(c) = to_double(s); },
          [ref](const RunConfig& c) { return format_number(ref(const_cast<RunConfig&>(c))); }};
}

template <class Get>
Field integer(const char* key, const char* unit, const char* group, Get ref) {
  return {key, unit, group, [ref](RunConfig& c, const std::string& s) { ref(c) = to_int(s); },
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = [] {
    std::vector<Field> v;
    v.push_back(number("circuit.E_C_GHz", "GHz", "circuit", [](RunConfig& c) -> double& { return c.circuit.E_C; }));
    v.push_back(number("circuit.E_J_GHz", "GHz", "circuit", [](RunConfig& c) -> double& { return c.circuit.E_J; }));
    v.push_back(number("circuit.E_L_GHz", "GHz", "circuit", [](RunConfig& c) -> double& { return c.circuit.E_L; }));
    v.push_back(number("circuit.E_L_prime_GHz", "GHz", "circuit",
                       [](RunConfig& c) -> double& { return c.circuit.E_L_prime; }));
    v.push_back(number("circuit.phi_C_rad", "rad", "circuit", [](RunConfig& c) -> double& { return c.circuit.phi_C; }));
    v.push_back(number("circuit.phi_D0_rad", "rad", "circuit", [](RunConfig& c) -> double& { return c.circuit.phi_D0; }));
    v.push_back(integer("cutoff.n_osc", "oscillator levels per mode", "cutoff", [](RunConfig& c) -> int& { return c.n_osc; }));
    v.push_back(integer("cutoff.N", "static levels", "cutoff", [](RunConfig& c) -> int& { return c.N; }));
    v.push_back(integer("cutoff.M", "Fourier blocks (odd)", "cutoff", [](RunConfig& c) -> int& { return c.M; }));
    v.push_back(number("drive.A_Phi0", "flux quantum", "drive", [](RunConfig& c) -> double& { return c.drive.A; }));
    v.push_back(number("drive.Omega_GHz", "GHz", "drive", [](RunConfig& c) -> double& { return c.drive.Omega; }));
    v.push_back({"drive.phase", "cosine|sine", "drive",
                 [](RunConfig& c, const std::string& s) {
                   if (s == "cosine") c.drive.phase = PhaseConvention::Cosine;
                   else if (s == "sine") c.drive.phase = PhaseConvention::Sine;
                   else throw std::invalid_argument("expected cosine or sine, got '" + s + "'");
                 },
                 [](const RunConfig& c) { return std::string(c.drive.phase == PhaseConvention::Sine ? "sine" : "cosine"); }});
    v.push_back(number("grid.A_min_Phi0", "flux quantum", "grid", [](RunConfig& c) -> double& { return c.grid.A_min; }));
    v.push_back(number("grid.A_max_Phi0", "flux quantum", "grid", [](RunConfig& c) -> double& { return c.grid.A_max; }));
    v.push_back(number("grid.dA_Phi0", "flux quantum", "grid", [](RunConfig& c) -> double& { return c.grid.dA; }));
    v.push_back(number("grid.Omega_min_GHz", "GHz", "grid", [](RunConfig& c) -> double& { return c.grid.Omega_min; }));
    v.push_back(number("grid.Omega_max_GHz", "GHz", "grid", [](RunConfig& c) -> double& { return c.grid.Omega_max; }));
    v.push_back(number("grid.dOmega_GHz", "GHz", "grid", [](RunConfig& c) -> double& { return c.grid.dOmega; }));
    v.push_back(number("noise.A_phi_C_Phi0", "flux quantum", "noise", [](RunConfig& c) -> double& { return c.noise.A_phi_C; }));
    v.push_back(number("noise.A_phi_D_Phi0", "flux quantum", "noise", [](RunConfig& c) -> double& { return c.noise.A_phi_D; }));
    v.push_back(number("noise.A_ac", "relative", "noise", [](RunConfig& c) -> double& { return c.noise.A_ac; }));
    v.push_back(number("noise.T_K", "K", "noise", [](RunConfig& c) -> double& { return c.noise.T; }));
    v.push_back(number("noise.omega_uv_rad_per_s", "rad/s, <= 0 for 2 pi Omega", "noise",
                       [](RunConfig& c) -> double& { return c.noise.omega_uv; }));
    v.push_back(number("noise.omega_ir_rad_per_s", "rad/s", "noise", [](RunConfig& c) -> double& { return c.noise.omega_ir; }));
    v.push_back(number("noise.t_int_s", "s", "noise", [](RunConfig& c) -> double& { return c.noise.t_int; }));
    v.push_back(number("noise.Q_ind_ref", "", "noise", [](RunConfig& c) -> double& { return c.noise.Q_ind_ref; }));
    v.push_back(number("noise.f_ind_ref_Hz", "Hz", "noise", [](RunConfig& c) -> double& { return c.noise.f_ind_ref; }));
    v.push_back(number("noise.Q_cap_ref", "", "noise", [](RunConfig& c) -> double& { return c.noise.Q_cap_ref; }));
    v.push_back(number("noise.f_cap_ref_Hz", "Hz", "noise", [](RunConfig& c) -> double& { return c.noise.f_cap_ref; }));
    v.push_back(number("noise.Q_cap_exponent", "", "noise", [](RunConfig& c) -> double& { return c.noise.Q_cap_exponent; }));
    v.push_back(number("noise.n_bar", "photons", "noise", [](RunConfig& c) -> double& { return c.noise.n_bar; }));
    v.push_back(number("noise.kappa_Hz", "Hz", "noise", [](RunConfig& c) -> double& { return c.noise.kappa; }));
    v.push_back(number("noise.chi_Hz", "Hz", "noise", [](RunConfig& c) -> double& { return c.noise.chi; }));
    v.push_back(number("gate.A_gate_Phi0", "flux quantum", "gate", [](RunConfig& c) -> double& { return c.A_gate; }));
    v.push_back({"gate.axis", "X|Y", "gate",
                 [](RunConfig& c, const std::string& s) {
                   if (s == "X") c.axis = GateAxis::X;
                   else if (s == "Y") c.axis = GateAxis::Y;
                   else throw std::invalid_argument("expected X or Y, got '" + s + "'");
                 },
                 [](const RunConfig& c) { return std::string(c.axis == GateAxis::X ? "X" : "Y"); }});
    v.push_back(integer("gate.m_g", "harmonics", "gate", [](RunConfig& c) -> int& { return c.m_g; }));
    v.push_back(integer("gate.budget", "objective evaluations", "gate", [](RunConfig& c) -> int& { return c.budget; }));
    v.push_back(number("ancilla.E_J_GHz", "GHz", "ancilla", [](RunConfig& c) -> double& { return c.ancilla.E_J; }));
    v.push_back(number("ancilla.E_C_GHz", "GHz", "ancilla", [](RunConfig& c) -> double& { return c.ancilla.E_C; }));
    v.push_back(number("ancilla.E_L_GHz", "GHz", "ancilla", [](RunConfig& c) -> double& { return c.ancilla.E_L; }));
    v.push_back(number("ancilla.phi_q_rad", "rad", "ancilla", [](RunConfig& c) -> double& { return c.ancilla.phi_q; }));
    v.push_back(number("ancilla.g_q_GHz", "GHz", "ancilla", [](RunConfig& c) -> double& { return c.ancilla.g_q; }));
    v.push_back(integer("ancilla.n_osc", "oscillator levels", "ancilla", [](RunConfig& c) -> int& { return c.ancilla.n_osc; }));
    v.push_back(integer("ancilla.levels", "retained levels", "ancilla", [](RunConfig& c) -> int& { return c.ancilla.levels; }));
    v.push_back({"sweep.quantity", "eps10|delta2_C|delta2_D|drift_E_J|drift_E_L_prime", "sweep",
                 [](RunConfig& c, const std::string& s) {
                   for (const char* q : {"eps10", "delta2_C", "delta2_D", "drift_E_J", "drift_E_L_prime"})
                     if (s == q) {
                       c.quantity = s;
                       return;
                     }
                   throw std::invalid_argument("unknown sweep quantity '" + s + "'");
                 },
                 [](const RunConfig& c) { return c.quantity; }});
    v.push_back({"sweep.fractions", "comma-separated relative steps", "sweep",
                 [](RunConfig& c, const std::string& s) {
                   c.fractions.clear();
                   std::stringstream ss(s);
                   for (std::string item; std::getline(ss, item, ',');) c.fractions.push_back(to_double(trim(item)));
                   if (c.fractions.empty()) throw std::invalid_argument("empty list");
                 },
                 [](const RunConfig& c) {
                   std::string out;
                   for (std::size_t i = 0; i < c.fractions.size(); ++i) out += (i ? "," : "") + format_number(c.fractions[i]);
                   return out;
                 }});
    v.push_back({"run.out", "directory", "run", [](RunConfig& c, const std::string& s) { c.out = s; },
                 [](const RunConfig& c) { return c.out; }});
    v.push_back(integer("run.workers", "threads", "run", [](RunConfig& c) -> int& { return c.workers; }));
    v.push_back({"run.seed", "integer", "run",
                 [](RunConfig& c, const std::string& s) {
                   const long long v = to_integer(s);
                   if (v < 0) throw std::invalid_argument("seed must be non-negative");
                   c.seed = static_cast<std::uint64_t>(v);
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    return v;
  }();
  return f;
}

// Physical invariants per field group; returns the group and message of the first violation.
std::optional<std::pair<std::string, std::string>> first_violation(const RunConfig& c) {
  auto check = [](const char* group, auto&& fn) -> std::optional<std::pair<std::string, std::string>> {
    try {
      fn();
    } catch (const std::exception& e) {
      return std::make_pair(std::string(group), std::string(e.what()));
    }
    return std::nullopt;
  };
  std::optional<std::pair<std::string, std::string>> r;
  if ((r = check("circuit", [&] { c.circuit.validate(); }))) return r;
  if ((r = check("cutoff", [&] {
         if (c.N < 4) throw InvalidArgument("N must be at least 4");
         if (c.M < 5 || c.M % 2 == 0) throw InvalidArgument("M must be odd and at least 5");
         BasisConfig::for_params(c.circuit, c.n_osc).validate(c.circuit);
         if (c.N > c.n_osc * c.n_osc) throw InvalidArgument("N exceeds the oscillator basis");
       })))
    return r;
  if ((r = check("drive", [&] { c.drive.validate(); }))) return r;
  if ((r = check("grid", [&] { c.grid.validate(); }))) return r;
  if ((r = check("noise", [&] { c.noise.validate(); }))) return r;
  if ((r = check("gate", [&] {
         if (!(c.A_gate > 0.0)) throw InvalidArgument("A_gate must be positive");
         if (c.m_g < 1) throw InvalidArgument("m_g must be at least 1");
         if (c.budget < 1) throw InvalidArgument("budget must be positive");
       })))
    return r;
  if ((r = check("ancilla", [&] { c.ancilla.validate(); }))) return r;
  if ((r = check("sweep", [&] {
         for (double f : c.fractions)
           if (std::abs(f) > 0.1 + 1e-12) throw InvalidArgument("drift fractions must lie within +-10%");
       })))
    return r;
  if ((r = check("run", [&] {
         if (c.workers < 1) throw InvalidArgument("workers must be at least 1");
         if (c.out.empty()) throw InvalidArgument("output directory must be set");
       })))
    return r;
  return std::nullopt;
}

}  // namespace

std::map<std::string, ConfigEntry> parse_key_values(const std::string& text, const std::string& source) {
  std::map<std::string, ConfigEntry> out;
  std::istringstream in(text);
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, line_no, line, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source, line_no, "<empty>", "missing key");
    if (value.empty()) throw ConfigError(source, line_no, key, "missing value");
    if (out.count(key))
      throw ConfigError(source, line_no, key, "duplicate key (first set on line " + std::to_string(out[key].line) + ")");
    out[key] = {value, line_no};
  }
  return out;
}

std::string RunConfig::canonical() const {
  std::map<std::string, std::string> sorted;
  for (const auto& f : fields())
    if (std::string(f.group) != "run" || std::string(f.key) == "run.seed") sorted[f.key] = f.get(*this);
  std::string out;
  for (const auto& [k, v] : sorted) out += k + " = " + v + "\n";
  return out;
}

void RunConfig::validate(const std::string& source) const {
  if (auto v = first_violation(*this)) throw ConfigError(source, 0, v->first, v->second);
}

RunConfig run_config(const std::map<std::string, ConfigEntry>& entries, const std::string& source) {
  RunConfig c;
  std::map<std::string, int> group_line;
  for (const auto& [key, entry] : entries) {
    const Field* f = nullptr;
    for (const auto& cand : fields())
      if (key == cand.key) f = &cand;
    if (!f) throw ConfigError(source, entry.line, key, "unknown key");
    try {
      f->set(c, entry.value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(source, entry.line, key, e.what());
    }
    auto& gl = group_line[f->group];
    if (gl == 0 || entry.line < gl) gl = entry.line;
  }
  if (auto v = first_violation(c)) {
    const auto it = group_line.find(v->first);
    throw ConfigError(source, it == group_line.end() ? 0 : it->second, v->first, v->second);
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    throw ConfigError(path.string(), 0, "file", e.what());
  }
  return run_config(parse_key_values(text, path.string()), path.string());
}

std::vector<std::pair<std::string, std::string>> config_keys() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.unit);
  return out;
}

// ---------------------------------------------------------------------------
// Spectrum serialisation

namespace {

constexpr char kMagic[8] = {'F', 'F', 'M', 'S', 'P', 'E', 'C', '1'};
constexpr std::size_t kDigest = 32;

class Writer {
 public:
  template <class T>
  void put(const T& v) {
    const char* p = reinterpret_cast<const char*>(&v);
    buf.append(p, sizeof(T));
  }
  template <class Mat>
  void matrix(const Mat& m) {
    put<std::int64_t>(m.rows());
    put<std::int64_t>(m.cols());
    buf.append(reinterpret_cast<const char*>(m.data()), sizeof(typename Mat::Scalar) * static_cast<std::size_t>(m.size()));
  }
  std::string buf;
};

class Reader {
 public:
  Reader(const std::string& s, std::size_t end) : s_(s), end_(end) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, s_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  template <class Mat>
  Mat matrix() {
    const auto r = get<std::int64_t>(), c = get<std::int64_t>();
    if (r < 0 || c < 0 || (r > 0 && c > static_cast<std::int64_t>(end_) / r)) throw Error("corrupt matrix header");
    Mat m(r, c);
    const std::size_t bytes = sizeof(typename Mat::Scalar) * static_cast<std::size_t>(r * c);
    need(bytes);
    std::memcpy(m.data(), s_.data() + pos_, bytes);
    pos_ += bytes;
    return m;
  }
  bool done() const { return pos_ == end_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw Error("truncated spectrum payload");
  }
  const std::string& s_;
  std::size_t end_;
  std::size_t pos_ = sizeof(kMagic);
};

std::string raw_digest(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  return std::string(reinterpret_cast<const char*>(md), len);
}

}  // namespace

std::string serialize_spectrum(const StaticSpectrum& s) {
  Writer w;
  w.buf.append(kMagic, sizeof(kMagic));
  w.matrix(s.energies);
  w.put(s.ground_energy);
  w.matrix(s.eigenvectors);
  w.put<std::int64_t>(static_cast<std::int64_t>(s.sector.size()));
  for (int v : s.sector) w.put<std::int32_t>(v);
  w.matrix(s.ops.phi_L);
  w.matrix(s.ops.phi_R);
  w.matrix(s.ops.phi_C);
  w.matrix(s.ops.phi_D);
  w.matrix(s.ops.n_L);
  w.matrix(s.ops.n_R);
  w.put<std::int32_t>(s.classified ? 1 : 0);
  for (int v : {s.g, s.e, s.h, s.f}) w.put<std::int32_t>(v);
  for (double v : {s.delta, s.Delta, s.mu, s.epsilon, s.r, s.R, s.phi0}) w.put(v);
  w.matrix(s.phi_D4);
  w.buf += raw_digest(w.buf);
  return w.buf;
}

StaticSpectrum deserialize_spectrum(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) + kDigest || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw Error("not a spectrum cache entry");
  const std::size_t end = bytes.size() - kDigest;
  if (raw_digest(bytes.substr(0, end)) != bytes.substr(end)) throw Error("spectrum checksum mismatch");
  Reader r(bytes, end);
  StaticSpectrum s;
  s.energies = r.matrix<VectorXd>();
  s.ground_energy = r.get<double>();
  s.eigenvectors = r.matrix<MatrixXd>();
  const auto ns = r.get<std::int64_t>();
  if (ns < 0 || ns > static_cast<std::int64_t>(end)) throw Error("corrupt sector table");
  s.sector.resize(static_cast<std::size_t>(ns));
  for (auto& v : s.sector) v = r.get<std::int32_t>();
  s.ops.phi_L = r.matrix<MatrixXd>();
  s.ops.phi_R = r.matrix<MatrixXd>();
  s.ops.phi_C = r.matrix<MatrixXd>();
  s.ops.phi_D = r.matrix<MatrixXd>();
  s.ops.n_L = r.matrix<MatrixXcd>();
  s.ops.n_R = r.matrix<MatrixXcd>();
  s.classified = r.get<std::int32_t>() != 0;
  for (int* v : {&s.g, &s.e, &s.h, &s.f}) *v = r.get<std::int32_t>();
  for (double* v : {&s.delta, &s.Delta, &s.mu, &s.epsilon, &s.r, &s.R, &s.phi0}) *v = r.get<double>();
  s.phi_D4 = r.matrix<MatrixXd>();
  if (!r.done()) throw Error("trailing bytes in spectrum payload");
  return s;
}

std::string spectrum_cache_key(const CircuitParams& p, int n_osc, int N) {
  std::string c = "ffm-static-spectrum/1\n";
  for (double v : {p.E_C, p.E_J, p.E_L, p.E_L_prime, p.phi_C, p.phi_D0}) c += format_number(v) + "\n";
  c += std::to_string(n_osc) + "\n" + std::to_string(N) + "\n";
  return sha256_hex(c);
}

SpectrumCache::SpectrumCache(fs::path dir) : dir_(std::move(dir)) {}

std::optional<SpectrumCache> SpectrumCache::from_environment() {
  const char* d = std::getenv("FFM_CACHE_DIR");
  if (!d || !*d) return std::nullopt;
  return SpectrumCache(d);
}

fs::path SpectrumCache::path_for(const std::string& key) const { return dir_ / (key + ".spec"); }

StaticSpectrum SpectrumCache::get(const CircuitParams& params, int n_osc, int N, CacheStatus* status,
                                  const std::function<void(const std::string&)>& warn) const {
  const auto path = path_for(spectrum_cache_key(params, n_osc, N));
  CacheStatus st = CacheStatus::Miss;
  if (fs::exists(path)) {
    try {
      auto s = deserialize_spectrum(read_text(path));
      if (status) *status = CacheStatus::Hit;
      return s;
    } catch (const Error& e) {
      if (warn) warn("cache entry " + path.string() + " unreadable (" + e.what() + "); recomputing");
      st = CacheStatus::Recomputed;
    }
  }
  auto s = solve_static(params, n_osc, N);
  fs::create_directories(dir_);
  const fs::path tmp = path.string() + ".tmp";
  write_text(tmp, serialize_spectrum(s));
  fs::rename(tmp, path);
  if (status) *status = st;
  return s;
}

StaticSpectrum cached_spectrum(const CircuitParams& params, int n_osc, int N, CacheStatus* status,
                               const std::function<void(const std::string&)>& warn) {
  if (auto c = SpectrumCache::from_environment()) return c->get(params, n_osc, N, status, warn);
  if (status) *status = CacheStatus::Disabled;
  return solve_static(params, n_osc, N);
}

// ---------------------------------------------------------------------------
// Artifacts

std::string render_map_csv(const std::vector<MapRow>& rows) {
  std::string out = "A,Omega_GHz,value,flags\n";
  for (const auto& r : rows)
    out += format_number(r.A) + "," + format_number(r.Omega) + "," + format_number(r.value) + "," + r.flags + "\n";
  return out;
}

std::string render_waveform_csv(const std::vector<double>& samples, double Omega, const std::string& column) {
  std::string out = "t_ns," + column + "\n";
  const double T = 1.0 / Omega;
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    out += format_number(T * static_cast<double>(i) / n) + "," + format_number(samples[i]) + "\n";
  return out;
}

std::vector<PointOutcome> run_points(int n, int workers, const std::function<PointOutcome(int)>& fn) {
  std::vector<PointOutcome> out(static_cast<std::size_t>(std::max(n, 0)));
  parallel_for(n, workers, [&](int i) {
    PointOutcome r;
    try {
      r = fn(i);
    } catch (const std::exception&) {
      r.value = std::nan("");
      r.flags = "failed";
      r.failed = true;
    }
    out[static_cast<std::size_t>(i)] = std::move(r);
  });
  return out;
}

std::string version() { return FFM_VERSION; }

std::string render_sidecar(const Provenance& p, const std::string& payload_json) {
  nlohmann::ordered_json j;
  j["kind"] = p.kind;
  nlohmann::ordered_json prov;
  if (p.config) {
    prov["config_hash"] = p.config->hash();
    prov["config"] = p.config->canonical();
    prov["cutoffs"] = {{"n_osc", p.config->n_osc}, {"N", p.config->N}, {"M", p.config->M}};
  }
  prov["version"] = version();
  prov["wall_time_s"] = p.wall_time;
  j["provenance"] = prov;
  j["payload"] = payload_json.empty() ? nlohmann::ordered_json::object() : nlohmann::ordered_json::parse(payload_json);
  return j.dump(2) + "\n";
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw Error("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace ffm::io
