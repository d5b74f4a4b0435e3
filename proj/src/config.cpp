/*
 * Copyright (c) 2026 The cellfree authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "cellfree/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "cellfree/errors.hpp"

namespace cellfree {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Tracks which keys of a YAML map were read so leftovers can be rejected.
class MapReader {
 public:
  MapReader(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      throw ConfigError(path_.empty() ? "<root>" : path_, "expected a mapping");
    }
  }

  bool has(const std::string& key) {
    if (!node_ || !node_.IsMap()) return false;
    const YAML::Node v = node_[key];
    if (!v) return false;
    seen_.insert(key);
    return true;
  }

  YAML::Node at(const std::string& key) const { return node_[key]; }
  std::string field(const std::string& key) const { return join(path_, key); }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = node_[key].template as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(field(key), "cannot parse value '" + scalar(key) + "'");
    }
  }

  void read_count(const std::string& key, std::size_t& out) {
    if (!has(key)) return;
    long long v = 0;
    try {
      v = node_[key].as<long long>();
    } catch (const YAML::Exception&) {
      throw ConfigError(field(key), "expected a non-negative integer, got '" + scalar(key) + "'");
    }
    if (v < 0) throw ConfigError(field(key), "must be >= 0");
    out = static_cast<std::size_t>(v);
  }

  void read_quantity(const std::string& key, Quantity kind, double& out) {
    if (!has(key)) return;
    if (!node_[key].IsScalar()) throw ConfigError(field(key), "expected a scalar");
    out = parse_quantity(node_[key].Scalar(), kind, field(key));
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
    }
  }

 private:
  std::string scalar(const std::string& key) const {
    const YAML::Node v = node_[key];
    return v.IsScalar() ? v.Scalar() : std::string("<non-scalar>");
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string mf_mode_name(MfCombinerMode m) {
  return m == MfCombinerMode::kAllOnes ? "all_ones" : "index_ramp";
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << v;
  return os.str();
}

YAML::Node to_node(const ExperimentConfig& c) {
  YAML::Node n;
  n["label"] = c.label;
  n["M"] = c.num_aps;
  n["K"] = c.num_users;
  n["tau"] = c.tau;
  n["seed"] = c.master_seed;
  n["snapshots"] = c.n_snapshots;
  n["realizations"] = c.n_realizations;
  n["power_control"] = c.power_control;
  for (Receiver r : c.receivers) n["receivers"].push_back(std::string(receiver_label(r)));
  n["mf_combiner"] = mf_mode_name(c.mf_mode);
  n["area"]["side_km"] = c.area.side_km;
  n["area"]["wrap"] = c.area.wrap;
  n["path_loss"]["frequency"] = format_double(c.path_loss.f_mhz) + "MHz";
  n["path_loss"]["h_b_m"] = c.path_loss.h_b_m;
  n["path_loss"]["h_r_m"] = c.path_loss.h_r_m;
  n["path_loss"]["d0_km"] = c.path_loss.d0_km;
  n["path_loss"]["d1_km"] = c.path_loss.d1_km;
  n["shadowing"]["sigma"] = format_double(c.shadowing.sigma_db) + "dB";
  n["shadowing"]["delta"] = c.shadowing.split_delta;
  n["shadowing"]["decorrelation_km"] = c.shadowing.d_decorr_km;
  n["shadowing"]["independent"] = c.shadowing.independent;
  n["shadowing"]["correlation_base"] = c.shadowing.correlation_base;
  n["noise"]["transmit_power"] = format_double(c.noise.transmit_power_w) + "W";
  n["noise"]["bandwidth"] = format_double(c.noise.bandwidth_hz) + "Hz";
  n["noise"]["noise_figure"] = format_double(c.noise.noise_figure_db) + "dB";
  n["noise"]["temperature_k"] = c.noise.temperature_k;
  n["de"]["tol"] = c.de.tol;
  n["de"]["max_iter"] = c.de.max_iter;
  return n;
}

std::vector<Receiver> read_receivers(const YAML::Node& node, const std::string& field) {
  if (node.IsScalar()) {
    try {
      return parse_receiver_list(node.Scalar());
    } catch (const ConfigError& e) {
      throw ConfigError(field, e.what());
    }
  }
  if (!node.IsSequence()) throw ConfigError(field, "expected a list of receiver labels");
  std::vector<Receiver> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    if (!node[i].IsScalar()) throw ConfigError(f, "expected a receiver label");
    const auto r = parse_receiver(node[i].Scalar());
    if (!r) throw ConfigError(f, "unknown receiver '" + node[i].Scalar() + "'");
    if (std::find(out.begin(), out.end(), *r) == out.end()) out.push_back(*r);
  }
  return out;
}

ExperimentConfig from_node(const YAML::Node& root, ExperimentConfig c = {}) {
  MapReader top(root, "");
  top.read("label", c.label);
  top.read_count("M", c.num_aps);
  top.read_count("K", c.num_users);
  top.read_count("tau", c.tau);
  top.read("seed", c.master_seed);
  top.read_count("snapshots", c.n_snapshots);
  top.read_count("realizations", c.n_realizations);
  top.read("power_control", c.power_control);
  if (top.has("receivers")) c.receivers = read_receivers(top.at("receivers"), "receivers");
  if (top.has("mf_combiner")) {
    std::string mode;
    top.read("mf_combiner", mode);
    if (mode == "all_ones") {
      c.mf_mode = MfCombinerMode::kAllOnes;
    } else if (mode == "index_ramp") {
      c.mf_mode = MfCombinerMode::kIndexRamp;
    } else {
      throw ConfigError("mf_combiner", "expected all_ones or index_ramp, got '" + mode + "'");
    }
  }

  if (top.has("area")) {
    MapReader r(top.at("area"), "area");
    r.read("side_km", c.area.side_km);
    r.read("wrap", c.area.wrap);
    r.finish();
  }
  if (top.has("path_loss")) {
    MapReader r(top.at("path_loss"), "path_loss");
    double f_hz = c.path_loss.f_mhz * 1e6;
    r.read_quantity("frequency", Quantity::kFrequency, f_hz);
    double hb = c.path_loss.h_b_m;
    double hr = c.path_loss.h_r_m;
    r.read("h_b_m", hb);
    r.read("h_r_m", hr);
    double d0 = c.path_loss.d0_km;
    double d1 = c.path_loss.d1_km;
    r.read("d0_km", d0);
    r.read("d1_km", d1);
    r.finish();
    if (!(f_hz > 0.0)) throw ConfigError("path_loss.frequency", "must be > 0");
    if (!(hb > 0.0)) throw ConfigError("path_loss.h_b_m", "must be > 0");
    if (!(hr > 0.0)) throw ConfigError("path_loss.h_r_m", "must be > 0");
    if (!(d0 > 0.0)) throw ConfigError("path_loss.d0_km", "must be > 0");
    if (!(d1 > d0)) throw ConfigError("path_loss.d1_km", "must exceed d0_km");
    const double f_mhz = f_hz / 1e6;
    c.path_loss = PathLossParams::cost231(f_mhz, hb, hr);
    c.path_loss.d0_km = d0;
    c.path_loss.d1_km = d1;
    // Keep the curve continuous at the configured breakpoints.
    c.path_loss.c1 = c.path_loss.c2 / std::pow(d1, c.path_loss.far_exponent - c.path_loss.near_exponent);
    c.path_loss.c0 = c.path_loss.c1 / std::pow(d0, c.path_loss.near_exponent);
  }
  if (top.has("shadowing")) {
    MapReader r(top.at("shadowing"), "shadowing");
    r.read_quantity("sigma", Quantity::kDecibel, c.shadowing.sigma_db);
    r.read("delta", c.shadowing.split_delta);
    r.read("decorrelation_km", c.shadowing.d_decorr_km);
    r.read("independent", c.shadowing.independent);
    r.read("correlation_base", c.shadowing.correlation_base);
    r.finish();
  }
  if (top.has("noise")) {
    MapReader r(top.at("noise"), "noise");
    r.read_quantity("transmit_power", Quantity::kPower, c.noise.transmit_power_w);
    r.read_quantity("bandwidth", Quantity::kFrequency, c.noise.bandwidth_hz);
    r.read_quantity("noise_figure", Quantity::kDecibel, c.noise.noise_figure_db);
    r.read("temperature_k", c.noise.temperature_k);
    r.finish();
  }
  if (top.has("de")) {
    MapReader r(top.at("de"), "de");
    r.read("tol", c.de.tol);
    r.read_count("max_iter", c.de.max_iter);
    r.finish();
    if (!(c.de.tol > 0.0)) throw ConfigError("de.tol", "must be > 0");
    if (c.de.max_iter == 0) throw ConfigError("de.max_iter", "must be >= 1");
  }
  top.finish();
  c.validate();
  return c;
}

void set_path(YAML::Node node, const std::vector<std::string>& parts, std::size_t i,
              const YAML::Node& value) {
  if (i + 1 == parts.size()) {
    node[parts[i]] = value;
    return;
  }
  YAML::Node child = node[parts[i]];
  if (!child.IsMap()) child = YAML::Node(YAML::NodeType::Map);
  set_path(child, parts, i + 1, value);
}

void merge_overrides(YAML::Node& root, const std::vector<std::string>& overrides) {
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError(ov, "override must have the form key=value");
    }
    const std::string key(trim(std::string_view(ov).substr(0, eq)));
    const std::string text(trim(std::string_view(ov).substr(eq + 1)));
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string p; std::getline(ss, p, '.');) {
      if (p.empty()) throw ConfigError(key, "empty path component");
      parts.push_back(p);
    }
    YAML::Node value;
    try {
      value = YAML::Load(text);
    } catch (const YAML::Exception& e) {
      throw ConfigError(key, std::string("malformed value: ") + e.what());
    }
    set_path(root, parts, 0, value);
  }
}

}  // namespace

double parse_quantity(std::string_view text, Quantity kind, const std::string& field) {
  const std::string_view s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || !std::isfinite(value)) {
    throw ConfigError(field, "cannot parse quantity '" + std::string(text) + "'");
  }
  const std::string_view unit = trim(s.substr(static_cast<std::size_t>(ptr - s.data())));
  auto bad_unit = [&] {
    return ConfigError(field, "unsupported unit '" + std::string(unit) + "'");
  };
  switch (kind) {
    case Quantity::kPower:
      if (unit.empty() || unit == "W") return value;
      if (unit == "mW") return value * 1e-3;
      if (unit == "dBW") return std::pow(10.0, value / 10.0);
      if (unit == "dBm") return std::pow(10.0, value / 10.0) * 1e-3;
      throw bad_unit();
    case Quantity::kFrequency:
      if (unit.empty() || unit == "Hz") return value;
      if (unit == "kHz") return value * 1e3;
      if (unit == "MHz") return value * 1e6;
      if (unit == "GHz") return value * 1e9;
      throw bad_unit();
    case Quantity::kDecibel:
      if (unit.empty() || unit == "dB") return value;
      throw bad_unit();
  }
  throw bad_unit();
}

std::vector<Receiver> parse_receiver_list(std::string_view list) {
  std::vector<Receiver> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    const std::string_view item = trim(list.substr(0, comma));
    if (!item.empty()) {
      const auto r = parse_receiver(item);
      if (!r) throw ConfigError("receivers", "unknown receiver '" + std::string(item) + "'");
      if (std::find(out.begin(), out.end(), *r) == out.end()) out.push_back(*r);
    }
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("receivers", "at least one receiver is required");
  return out;
}

ExperimentConfig parse_config_string(const std::string& yaml,
                                     const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<root>", std::string("malformed YAML: ") + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  merge_overrides(root, overrides);
  return from_node(root);
}

ExperimentConfig parse_config_file(const std::filesystem::path& path,
                                   const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), overrides);
}

ExperimentConfig apply_overrides(const ExperimentConfig& base,
                                 const std::vector<std::string>& overrides) {
  if (overrides.empty()) return base;
  YAML::Node root = to_node(base);
  merge_overrides(root, overrides);
  return from_node(root);
}

std::string config_to_yaml(const ExperimentConfig& config) {
  YAML::Emitter out;
  out << to_node(config);
  return std::string(out.c_str()) + "\n";
}

}  // namespace cellfree
