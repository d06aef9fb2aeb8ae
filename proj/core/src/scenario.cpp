#include "qkdsim/scenario.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "json.hpp"

namespace qkdsim {

using json = nlohmann::ordered_json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Reads one JSON object, tracking which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
  }

  const json* find(const std::string& key) {
    auto it = obj_.find(key);
    if (it == obj_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(join(path_, key), "expected a number");
      out = v->get<double>();
    }
  }

  void integer(const std::string& key, std::int64_t& out) {
    if (const json* v = find(key)) {
      if (v->is_number_integer()) {
        out = v->get<std::int64_t>();
        return;
      }
      if (v->is_number_float()) {
        const double d = v->get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e18) {
          out = static_cast<std::int64_t>(d);
          return;
        }
      }
      throw ConfigError(join(path_, key), "expected an integer");
    }
  }

  void unsigned_integer(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (v->is_number_unsigned()) {
        out = v->get<std::uint64_t>();
        return;
      }
      throw ConfigError(join(path_, key), "expected a non-negative integer");
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(join(path_, key), "expected true or false");
      out = v->get<bool>();
    }
  }

  template <class E>
  void enumeration(const std::string& key, E& out,
                   std::initializer_list<std::pair<const char*, E>> names) {
    const json* v = find(key);
    if (!v) return;
    if (v->is_string()) {
      const auto s = v->get<std::string>();
      for (const auto& [name, value] : names) {
        if (s == name) {
          out = value;
          return;
        }
      }
    }
    std::string allowed;
    for (const auto& [name, value] : names) {
      if (!allowed.empty()) allowed += ", ";
      allowed += name;
    }
    throw ConfigError(join(path_, key), "expected one of: " + allowed);
  }

  const std::string& path() const { return path_; }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(join(path_, it.key()), "unknown key");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

constexpr std::initializer_list<std::pair<const char*, AliceMode>> kAliceModes{
    {"random", AliceMode::random}, {"static_0pi", AliceMode::static_0pi}};
constexpr std::initializer_list<std::pair<const char*, AttackMode>> kAttackModes{
    {"emulation", AttackMode::emulation}, {"intercept_resend", AttackMode::intercept_resend}};

const char* name_of(AliceMode m) { return m == AliceMode::random ? "random" : "static_0pi"; }
const char* name_of(AttackMode m) {
  return m == AttackMode::emulation ? "emulation" : "intercept_resend";
}

void read_detector(const json& j, const std::string& path, DetectorParams& d) {
  ObjectReader r(j, path);
  r.number("efficiency", d.efficiency);
  r.number("dark_prob_per_slot", d.dark_prob_per_slot);
  r.integer("dead_time_slots", d.dead_time_slots);
  r.number("blind_threshold_photons", d.blind_threshold_photons);
  r.integer("recovery_slots", d.recovery_slots);
  r.finish();
}

ScenarioConfig from_json_value(const json& root, const ScenarioConfig& base) {
  ScenarioConfig cfg = base;
  ObjectReader r(root, "");
  r.number("clock_hz", cfg.clock_hz);
  r.integer("n_slots", cfg.n_slots);
  r.number("mu", cfg.mu);
  r.number("channel_loss_dB", cfg.channel_loss_dB);
  r.number("receiver_loss_dB", cfg.receiver_loss_dB);
  r.number("wavelength_nm", cfg.wavelength_nm);
  r.number("phase_flip_prob", cfg.phase_flip_prob);
  r.number("ec_efficiency", cfg.ec_efficiency);
  r.number("alarm_threshold", cfg.alarm_threshold);
  r.number("expected_qber", cfg.expected_qber);
  r.enumeration("alice_mode", cfg.alice_mode, kAliceModes);
  r.unsigned_integer("seed", cfg.seed);

  if (const json* f = r.find("filter")) {
    ObjectReader fr(*f, "filter");
    fr.boolean("enabled", cfg.filter.enabled);
    fr.number("center_nm", cfg.filter.center_nm);
    fr.number("width_nm", cfg.filter.width_nm);
    fr.number("out_of_band_suppression_dB", cfg.filter.out_of_band_suppression_dB);
    fr.finish();
  }
  if (const json* c = r.find("coupler")) {
    ObjectReader cr(*c, "coupler");
    cr.number("center_wavelength_nm", cfg.coupler.center_wavelength_nm);
    cr.number("ratio_slope_per_nm", cfg.coupler.ratio_slope_per_nm);
    cr.finish();
  }
  if (const json* d = r.find("detectors")) {
    if (!d->is_array() || d->size() != 4) {
      throw ConfigError("detectors", "expected an array of exactly 4 detector objects");
    }
    for (std::size_t i = 0; i < 4; ++i) {
      read_detector((*d)[i], "detectors." + std::to_string(i), cfg.detectors[i]);
    }
  }
  if (const json* a = r.find("attack")) {
    ObjectReader ar(*a, "attack");
    AttackConfig& at = cfg.attack;
    ar.boolean("enabled", at.enabled);
    ar.enumeration("mode", at.mode, kAttackModes);
    ar.number("blind_photons_per_slot", at.blind_photons_per_slot);
    ar.integer("blinding_slots", at.blinding_slots);
    ar.integer("recovery_window_slots", at.recovery_window_slots);
    ar.number("attacked_fraction", at.attacked_fraction);
    ar.number("blind_wavelength_nm", at.blind_wavelength_nm);
    ar.finish();
  }
  r.finish();

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto sp = msg.find(' ');
    throw ConfigError(msg.substr(0, sp), sp == std::string::npos ? msg : msg.substr(sp + 1));
  }
  return cfg;
}

json to_json_value(const ScenarioConfig& cfg) {
  json j;
  j["clock_hz"] = cfg.clock_hz;
  j["n_slots"] = cfg.n_slots;
  j["mu"] = cfg.mu;
  j["channel_loss_dB"] = cfg.channel_loss_dB;
  j["receiver_loss_dB"] = cfg.receiver_loss_dB;
  j["wavelength_nm"] = cfg.wavelength_nm;
  j["phase_flip_prob"] = cfg.phase_flip_prob;
  j["ec_efficiency"] = cfg.ec_efficiency;
  j["alarm_threshold"] = cfg.alarm_threshold;
  j["expected_qber"] = cfg.expected_qber;
  j["alice_mode"] = name_of(cfg.alice_mode);
  j["seed"] = cfg.seed;
  j["filter"] = {{"enabled", cfg.filter.enabled},
                 {"center_nm", cfg.filter.center_nm},
                 {"width_nm", cfg.filter.width_nm},
                 {"out_of_band_suppression_dB", cfg.filter.out_of_band_suppression_dB}};
  j["coupler"] = {{"center_wavelength_nm", cfg.coupler.center_wavelength_nm},
                  {"ratio_slope_per_nm", cfg.coupler.ratio_slope_per_nm}};
  json dets = json::array();
  for (const auto& d : cfg.detectors) {
    dets.push_back({{"efficiency", d.efficiency},
                    {"dark_prob_per_slot", d.dark_prob_per_slot},
                    {"dead_time_slots", d.dead_time_slots},
                    {"blind_threshold_photons", d.blind_threshold_photons},
                    {"recovery_slots", d.recovery_slots}});
  }
  j["detectors"] = std::move(dets);
  const AttackConfig& a = cfg.attack;
  j["attack"] = {{"enabled", a.enabled},
                 {"mode", name_of(a.mode)},
                 {"blind_photons_per_slot", a.blind_photons_per_slot},
                 {"blinding_slots", a.blinding_slots},
                 {"recovery_window_slots", a.recovery_window_slots},
                 {"attacked_fraction", a.attacked_fraction},
                 {"blind_wavelength_nm", a.blind_wavelength_nm}};
  return j;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    parts.emplace_back(path.substr(pos, dot == std::string_view::npos ? path.npos : dot - pos));
    if (parts.back().empty()) throw ConfigError(std::string(path), "empty path component");
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return parts;
}

void assign_at(json& node, const std::vector<std::string>& parts, std::size_t i,
               const std::string& walked, const json& value) {
  const std::string& key = parts[i];
  const bool last = i + 1 == parts.size();
  if (node.is_array()) {
    auto visit = [&](std::size_t idx) {
      json& child = node[idx];
      const std::string p = join(walked, std::to_string(idx));
      if (last) {
        throw ConfigError(p, "cannot replace a whole array element");
      }
      assign_at(child, parts, i + 1, p, value);
    };
    if (key == "*") {
      for (std::size_t idx = 0; idx < node.size(); ++idx) visit(idx);
      return;
    }
    std::size_t idx = 0;
    try {
      std::size_t used = 0;
      idx = std::stoul(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw ConfigError(join(walked, key), "expected an array index or *");
    }
    if (idx >= node.size()) throw ConfigError(join(walked, key), "index out of range");
    visit(idx);
    return;
  }
  const std::string p = join(walked, key);
  if (!node.is_object() || !node.contains(key)) throw ConfigError(p, "unknown key");
  json& child = node[key];
  if (last) {
    if (child.is_object() || child.is_array()) {
      throw ConfigError(p, "cannot replace a whole section");
    }
    child = value;
  } else {
    assign_at(child, parts, i + 1, p, value);
  }
}

}  // namespace

ScenarioConfig scenario_from_json(std::string_view text, const ScenarioConfig& base) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return from_json_value(root, base);
}

std::string scenario_to_json(const ScenarioConfig& cfg) { return to_json_value(cfg).dump(2); }

void apply_override(ScenarioConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError(std::string(assignment), "expected key.path=value");
  }
  const std::string_view path = assignment.substr(0, eq);
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json j = to_json_value(cfg);
  assign_at(j, split_path(path), 0, "", value);
  cfg = from_json_value(j, cfg);
}

void set_numeric(ScenarioConfig& cfg, std::string_view path, double value) {
  if (!std::isfinite(value)) throw ConfigError(std::string(path), "value must be finite");
  json j = to_json_value(cfg);
  const auto parts = split_path(path);
  // Reject booleans/strings: probe the first matching leaf.
  json probe = j;
  assign_at(probe, parts, 0, "", json(value));
  json::json_pointer ptr;
  for (const auto& p : parts) ptr /= (p == "*" ? "0" : p);
  if (!j.at(ptr).is_number()) throw ConfigError(std::string(path), "not a numeric field");
  json v = value;
  if (j.at(ptr).is_number_integer() && value == std::floor(value) && std::abs(value) < 9.0e18) {
    v = static_cast<std::int64_t>(value);
  }
  if (j.at(ptr).is_number_unsigned() && value >= 0 && value == std::floor(value) &&
      value < 1.8e19) {
    v = static_cast<std::uint64_t>(value);
  }
  assign_at(j, parts, 0, "", v);
  cfg = from_json_value(j, cfg);
}

std::vector<std::string> preset_names() { return {"normal", "full-attack", "partial-attack"}; }

ScenarioConfig preset(std::string_view name) {
  ScenarioConfig cfg;
  if (name == "normal") {
    cfg.n_slots = 100'000'000;
    return cfg;
  }
  if (name == "full-attack" || name == "partial-attack") {
    cfg.attack.enabled = true;
    cfg.attack.mode = AttackMode::emulation;
    cfg.alice_mode = AliceMode::static_0pi;
    if (name == "full-attack") {
      cfg.n_slots = 10'000'000;
      cfg.attack.attacked_fraction = 1.0;
    } else {
      cfg.n_slots = 100'000'000;
      cfg.attack.attacked_fraction = 0.5;
    }
    return cfg;
  }
  std::string all;
  for (const auto& n : preset_names()) all += (all.empty() ? "" : ", ") + n;
  throw ConfigError("preset", "unknown preset '" + std::string(name) + "' (known: " + all + ")");
}

std::string metrics_to_json(const RunMetrics& m) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["qber"] = opt(m.qber);
  j["ccr_pair_A"] = opt(m.ccr_pair_A);
  j["ccr_pair_B"] = opt(m.ccr_pair_B);
  j["ccr_est"] = m.ccr_est;
  j["count_rates_cps"] = m.count_rates_cps;
  j["singles"] = m.singles;
  j["coincidences"] = m.coincidences;
  j["K_sift"] = m.K_sift;
  j["K_sec"] = m.K_sec;
  j["attack_fraction_est"] = opt(m.attack_fraction_est);
  j["abort"] = m.abort;
  j["abort_reason"] = m.abort_reason;
  return j.dump(2);
}

}  // namespace qkdsim
