#include "nhfloquet/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>

#include "nhfloquet/errors.hpp"

namespace nhf {

namespace {

constexpr double kCriticalTol = 1e-12;

bool near_mod(double x, double target, double period, double tol) {
  double r = std::remainder(x - target, period);
  return std::abs(r) < tol;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': expected a number, got '" + text + "'");
  }
}

}  // namespace

double to_radians(double value, Units units) {
  return units == Units::Pi4 ? value * kQuarterPi : value;
}

double from_radians(double value, Units units) {
  return units == Units::Pi4 ? value / kQuarterPi : value;
}

ModelParams make_params(double alpha_J, double beta_J, double alpha_h, double beta_h,
                        Units units) {
  for (double v : {alpha_J, beta_J, alpha_h, beta_h}) {
    if (!std::isfinite(v)) throw ValidationError("model parameters must be finite");
  }
  ModelParams p;
  p.alpha_J = to_radians(alpha_J, units);
  p.beta_J = to_radians(beta_J, units);
  p.alpha_h = to_radians(alpha_h, units);
  p.beta_h = to_radians(beta_h, units);

  p.equal_alpha = std::abs(p.alpha_J - p.alpha_h) < kCriticalTol;
  p.dual_line = p.equal_alpha && near_mod(p.alpha_J, kQuarterPi, kPi / 2, kCriticalTol);
  p.self_dual = p.dual_line && p.hermitian();
  p.identity = p.alpha_J == 0.0 && p.beta_J == 0.0 && p.alpha_h == 0.0 && p.beta_h == 0.0;
  return p;
}

std::optional<Parity> LatticeSpec::parity_sector() const {
  switch (bc) {
    case Boundary::PeriodicEvenParity: return Parity::Even;
    case Boundary::PeriodicOddParity: return Parity::Odd;
    case Boundary::Open: return std::nullopt;
  }
  return std::nullopt;
}

void LatticeSpec::validate() const {
  if (L < 2) throw ValidationError("lattice size L must be >= 2");
}

std::vector<int> SubsystemSpec::sites(const LatticeSpec& lat) const {
  if (length < 1) throw ValidationError("subsystem length must be positive");
  if (length > lat.L) throw ValidationError("subsystem longer than the lattice");
  if (start < 1 || start > lat.L) throw ValidationError("subsystem start outside [1, L]");
  if (!lat.periodic() && start + length - 1 > lat.L) {
    throw ValidationError("subsystem wraps around an open chain");
  }
  std::vector<int> out(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) out[static_cast<std::size_t>(i)] = (start - 1 + i) % lat.L;
  return out;
}

TeePartition TeePartition::quarters(int L) {
  TeePartition p;
  int q = L / 4;
  p.lengths = {q, q, q, L - 3 * q};
  return p;
}

void TeePartition::validate(int L) const {
  int sum = 0;
  for (int len : lengths) {
    if (len < 1) throw ValidationError("TEE segments must be non-empty");
    sum += len;
  }
  if (sum != L) throw ValidationError("TEE segment lengths must sum to L");
}

std::vector<int> QuenchConfig::polarizations(int L) const {
  std::vector<int> out(static_cast<std::size_t>(L), 1);
  switch (initial_state) {
    case InitialState::NeelFermion:
      // site j (1-based) occupied for odd j: Z = -1
      for (int j = 0; j < L; ++j) out[static_cast<std::size_t>(j)] = (j % 2 == 0) ? -1 : 1;
      break;
    case InitialState::AllUp:
      break;
    case InitialState::AllDown:
      std::fill(out.begin(), out.end(), -1);
      break;
    case InitialState::AntiferroSpins:
      for (int j = 0; j < L; ++j) out[static_cast<std::size_t>(j)] = (j % 2 == 0) ? 1 : -1;
      break;
    case InitialState::CustomProduct:
      out = custom;
      break;
    case InitialState::RandomProduct: {
      std::mt19937_64 rng(seed);
      std::bernoulli_distribution coin(0.5);
      for (auto& s : out) s = coin(rng) ? 1 : -1;
      break;
    }
  }
  return out;
}

Basis QuenchConfig::polarization_basis() const {
  switch (initial_state) {
    case InitialState::AntiferroSpins: return Basis::X;
    case InitialState::CustomProduct:
    case InitialState::RandomProduct: return basis;
    default: return Basis::Z;
  }
}

void QuenchConfig::validate(const LatticeSpec& lat) const {
  if (n_periods < 0) throw ValidationError("n_periods must be non-negative");
  if (!std::isfinite(K)) throw ValidationError("K must be finite");
  if (initial_state == InitialState::CustomProduct) {
    if (custom.size() != static_cast<std::size_t>(lat.L)) {
      throw ValidationError("custom product state length must equal L");
    }
    for (int s : custom) {
      if (s != 1 && s != -1) throw ValidationError("custom polarizations must be +1 or -1");
    }
  }
}

std::string to_string(PhaseLabel label) {
  switch (label) {
    case PhaseLabel::Trivial: return "trivial";
    case PhaseLabel::ZeroMode: return "0";
    case PhaseLabel::PiMode: return "pi";
    case PhaseLabel::ZeroPi: return "0pi";
    case PhaseLabel::CriticalVolume: return "critical-volume";
    case PhaseLabel::CriticalLog: return "critical-log";
    case PhaseLabel::Ambiguous: return "ambiguous";
  }
  return "ambiguous";
}

std::string to_string(Boundary bc) {
  switch (bc) {
    case Boundary::PeriodicEvenParity: return "pbc-even";
    case Boundary::PeriodicOddParity: return "pbc-odd";
    case Boundary::Open: return "obc";
  }
  return "obc";
}

std::string to_string(InitialState s) {
  switch (s) {
    case InitialState::NeelFermion: return "neel";
    case InitialState::AllUp: return "all-up";
    case InitialState::AllDown: return "all-down";
    case InitialState::AntiferroSpins: return "antiferro";
    case InitialState::CustomProduct: return "custom";
    case InitialState::RandomProduct: return "random";
  }
  return "neel";
}

Boundary parse_boundary(const std::string& text) {
  if (text == "pbc-even" || text == "pbc") return Boundary::PeriodicEvenParity;
  if (text == "pbc-odd") return Boundary::PeriodicOddParity;
  if (text == "obc") return Boundary::Open;
  throw ValidationError("unknown boundary condition '" + text + "' (pbc-even, pbc-odd, obc)");
}

Units parse_units(const std::string& text) {
  if (text == "pi4") return Units::Pi4;
  if (text == "rad") return Units::Radians;
  throw ValidationError("unknown units '" + text + "' (pi4, rad)");
}

InitialState parse_initial_state(const std::string& text) {
  if (text == "neel") return InitialState::NeelFermion;
  if (text == "all-up") return InitialState::AllUp;
  if (text == "all-down") return InitialState::AllDown;
  if (text == "antiferro") return InitialState::AntiferroSpins;
  if (text == "random") return InitialState::RandomProduct;
  if (text.starts_with("custom")) return InitialState::CustomProduct;
  throw ValidationError("unknown initial_state '" + text + "'");
}

double fold_alpha(double alpha) {
  double a = std::remainder(alpha, kPi);  // (-pi/2, pi/2]
  return std::abs(a);
}

PhaseLabel phase_label_from_params(const ModelParams& p) {
  if (!p.equal_alpha) {
    throw UnsupportedError("phase taxonomy is only defined on the alpha_J == alpha_h plane");
  }
  const double a = fold_alpha(p.alpha_J);
  if (std::abs(p.beta_J + p.beta_h) < kCriticalTol) return PhaseLabel::CriticalVolume;
  if (std::abs(a - kQuarterPi) < kCriticalTol) return PhaseLabel::CriticalVolume;
  if (std::abs(p.beta_J - p.beta_h) < kCriticalTol) return PhaseLabel::CriticalLog;

  const bool strong_bond = std::abs(p.beta_J) > std::abs(p.beta_h);
  if (a < kQuarterPi) return strong_bond ? PhaseLabel::ZeroMode : PhaseLabel::Trivial;
  return strong_bond ? PhaseLabel::PiMode : PhaseLabel::ZeroPi;
}

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  return parse(in);
}

const std::string& KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("missing config key '" + key + "'");
  return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key) const {
  return parse_double(key, get(key));
}

double KeyValueConfig::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int KeyValueConfig::get_int(const std::string& key) const {
  double v = get_double(key);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ValidationError("config key '" + key + "': expected an integer");
  }
  return static_cast<int>(v);
}

int KeyValueConfig::get_int_or(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<double> KeyValueConfig::get_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

RunConfig resolve_run_config(const KeyValueConfig& cfg) {
  RunConfig rc;
  rc.units = parse_units(cfg.get_or("units", "pi4"));
  double alpha = cfg.get_double_or("alpha", 0.0);
  rc.params = make_params(cfg.get_double_or("alpha_J", alpha), cfg.get_double_or("beta_J", 0.0),
                          cfg.get_double_or("alpha_h", alpha), cfg.get_double_or("beta_h", 0.0),
                          rc.units);
  rc.lattice.L = cfg.get_int_or("L", 16);
  rc.lattice.bc = parse_boundary(cfg.get_or("bc", "pbc-even"));
  rc.lattice.validate();

  const std::string init = cfg.get_or("initial_state", "neel");
  rc.quench.initial_state = parse_initial_state(init);
  rc.quench.basis = cfg.get_or("basis", "z") == "x" ? Basis::X : Basis::Z;
  rc.quench.seed = static_cast<std::uint64_t>(cfg.get_int_or("seed", 12345));
  rc.quench.n_periods = cfg.get_int_or("n_periods", 100);
  rc.quench.K = to_radians(cfg.get_double_or("K", 0.0), rc.units);
  if (rc.quench.initial_state == InitialState::CustomProduct) {
    // custom:+1,-1,... or a separate 'custom' key
    std::string list = init.size() > 7 ? init.substr(7) : cfg.get_or("custom", "");
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) rc.quench.custom.push_back(static_cast<int>(parse_double("custom", item)));
    }
  }
  rc.quench.validate(rc.lattice);
  return rc;
}

}  // namespace nhf
