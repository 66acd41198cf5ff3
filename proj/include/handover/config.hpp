#pragma once

// Key-value configuration file:
//
//   # comment
//   r_min = 150
//   r_max = 230
//   d = 350
//   grid_pitch = 5
//   architecture = B
//   epsilon = 0.1
//   curriculum = 0.3, 0.1
//   max_steps = 20
//   reward_success = 20
//   reward_step = -1
//   reward_fail = -30
//   listen = 127.0.0.1:5555

#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "handover/env.hpp"
#include "handover/geometry.hpp"

namespace handover {

inline constexpr const char* kListenEnvVar = "HANDOVER_LISTEN";
inline constexpr const char* kDefaultListen = "127.0.0.1:5555";

struct AppConfig {
  WorkspaceConfig workspace{};
  EpisodeConfig episode{};
  CurriculumSchedule curriculum{};
  std::string listen{kDefaultListen};
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw InvalidConfig("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

}  // namespace detail

inline AppConfig parse_config(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidConfig("config: line " + std::to_string(lineno) + " lacks '='");
    kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }

  AppConfig cfg;
  double r_min = 150.0, r_max = 230.0, d = 350.0, pitch = 5.0;
  for (const auto& [key, value] : kv) {
    if (key == "r_min") r_min = detail::to_double(key, value);
    else if (key == "r_max") r_max = detail::to_double(key, value);
    else if (key == "d") d = detail::to_double(key, value);
    else if (key == "grid_pitch") pitch = detail::to_double(key, value);
    else if (key == "architecture") cfg.episode.architecture = architecture_from_string(value);
    else if (key == "epsilon") cfg.episode.epsilon = detail::to_double(key, value);
    else if (key == "max_steps") cfg.episode.max_steps = static_cast<int>(detail::to_double(key, value));
    else if (key == "reward_success") cfg.episode.reward_success = detail::to_double(key, value);
    else if (key == "reward_step") cfg.episode.reward_step = detail::to_double(key, value);
    else if (key == "reward_fail") cfg.episode.reward_fail = detail::to_double(key, value);
    else if (key == "listen") cfg.listen = value;
    else if (key == "curriculum") {
      cfg.curriculum.stages.clear();
      std::stringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ',')) cfg.curriculum.stages.push_back(detail::to_double(key, detail::trim(tok)));
    } else {
      throw InvalidConfig("config: unknown key '" + key + "'");
    }
  }
  cfg.workspace = WorkspaceConfig::symmetric(r_min, r_max, d, pitch);
  cfg.workspace.validate();
  cfg.episode.validate();
  cfg.curriculum.validate();
  return cfg;
}

inline AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  return parse_config(in);
}

/// Listen address: the environment variable wins over the configured value.
inline std::string resolve_listen_address(const std::string& configured) {
  if (const char* env = std::getenv(kListenEnvVar); env && *env) return env;
  return configured;
}

}  // namespace handover
