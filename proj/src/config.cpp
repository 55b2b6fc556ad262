#include "pidlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

namespace pidlab {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class T>
T parse_number(const std::string& text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("expected a number, got '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("expected true or false, got '" + text + "'");
}

std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

GridAxis parse_axis(const std::string& text) {
  const auto w = words(text);
  if (w.size() != 3) throw ConfigError("expected 'min max step', got '" + text + "'");
  return {parse_number<double>(w[0]), parse_number<double>(w[1]), parse_number<double>(w[2])};
}

struct Key {
  std::string name;  // section.key
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Get>
Key real_key(std::string name, Get field) {
  return {std::move(name),
          [field](RunConfig& c, const std::string& v) { field(c) = parse_number<double>(v); },
          [field](const RunConfig& c) { return shortest(field(c)); }};
}

template <class Get>
Key uint_key(std::string name, Get field) {
  return {std::move(name),
          [field](RunConfig& c, const std::string& v) {
            field(c) = parse_number<std::uint64_t>(v);
          },
          [field](const RunConfig& c) {
            return std::to_string(field(c));
          }};
}

template <class Get>
Key axis_key(std::string name, Get field) {
  return {std::move(name), [field](RunConfig& c, const std::string& v) { field(c) = parse_axis(v); },
          [field](const RunConfig& c) {
            const GridAxis& a = field(c);
            return shortest(a.min) + ' ' + shortest(a.max) + ' ' + shortest(a.step);
          }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back(real_key("plant.a1", [](auto& c) -> auto& { return c.plant.a1; }));
    k.push_back(real_key("plant.a2", [](auto& c) -> auto& { return c.plant.a2; }));
    k.push_back(real_key("plant.dt", [](auto& c) -> auto& { return c.plant.dt; }));
    k.push_back(real_key("plant.t_max", [](auto& c) -> auto& { return c.plant.t_max; }));
    k.push_back(real_key("noise.sensor_sigma",
                         [](auto& c) -> auto& { return c.plant.noise.sensor_sigma; }));
    k.push_back(real_key("noise.disturbance_amp",
                         [](auto& c) -> auto& { return c.plant.noise.disturbance_amp; }));
    k.push_back(real_key("noise.disturbance_freq",
                         [](auto& c) -> auto& { return c.plant.noise.disturbance_freq; }));
    k.push_back(uint_key("noise.seed",
                         [](auto& c) -> auto& { return c.plant.noise.seed; }));

    k.push_back({"mission.mode",
                 [](RunConfig& c, const std::string& v) {
                   auto mode = parse_mission_mode(v);
                   if (!mode) {
                     throw ConfigError("unknown mode '" + v +
                                       "' (hold, brake, circle_track, return_home)");
                   }
                   c.mission = Mission::make(*mode);
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.mission.mode)); }});
    k.push_back(real_key("mission.duration",
                         [](auto& c) -> auto& { return c.mission.duration; }));
#define PIDLAB_MISSION_REAL(field)                          \
  k.push_back(real_key("mission." #field, [](auto& c) -> auto& { \
    return (c.mission.params.field);                         \
  }))
    PIDLAB_MISSION_REAL(settle_deadline);
    PIDLAB_MISSION_REAL(hold_setpoint);
    PIDLAB_MISSION_REAL(hold_tol);
    PIDLAB_MISSION_REAL(cruise_speed);
    PIDLAB_MISSION_REAL(brake_at);
    PIDLAB_MISSION_REAL(brake_deadline);
    PIDLAB_MISSION_REAL(v_stop);
    PIDLAB_MISSION_REAL(circle_radius);
    PIDLAB_MISSION_REAL(circle_freq);
    PIDLAB_MISSION_REAL(circle_tol);
    PIDLAB_MISSION_REAL(lap_fraction);
    PIDLAB_MISSION_REAL(home_distance);
    PIDLAB_MISSION_REAL(outbound_time);
    PIDLAB_MISSION_REAL(return_start);
    PIDLAB_MISSION_REAL(return_time);
    PIDLAB_MISSION_REAL(home_radius);
    PIDLAB_MISSION_REAL(mono_eps);
#undef PIDLAB_MISSION_REAL
    k.push_back({"mission.lap_check",
                 [](RunConfig& c, const std::string& v) {
                   c.mission.params.lap_check = parse_bool(v);
                 },
                 [](const RunConfig& c) {
                   return std::string(c.mission.params.lap_check ? "true" : "false");
                 }});

    k.push_back(axis_key("space.p", [](auto& c) -> auto& { return c.space.p; }));
    k.push_back(axis_key("space.i", [](auto& c) -> auto& { return c.space.i; }));
    k.push_back(axis_key("space.d", [](auto& c) -> auto& { return c.space.d; }));

    k.push_back({"oracle.kind",
                 [](RunConfig& c, const std::string& v) {
                   auto kind = parse_oracle_kind(v);
                   if (!kind) throw ConfigError("unknown oracle kind '" + v + "' (offline, online)");
                   c.oracle.kind = *kind;
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.oracle.kind)); }});
    k.push_back(uint_key("oracle.window",
                         [](auto& c) -> auto& { return c.oracle.window; }));
    k.push_back({"oracle.repeats",
                 [](RunConfig& c, const std::string& v) { c.oracle.repeats = parse_number<int>(v); },
                 [](const RunConfig& c) { return std::to_string(c.oracle.repeats); }});
    k.push_back(uint_key("oracle.seed",
                         [](auto& c) -> auto& { return c.oracle.base_seed; }));
    k.push_back({"oracle.per_config_noise",
                 [](RunConfig& c, const std::string& v) {
                   c.oracle.per_config_noise = parse_bool(v);
                 },
                 [](const RunConfig& c) {
                   return std::string(c.oracle.per_config_noise ? "true" : "false");
                 }});

    k.push_back({"search.algorithm",
                 [](RunConfig& c, const std::string& v) { c.search.algorithm = v; },
                 [](const RunConfig& c) { return c.search.algorithm; }});
    k.push_back({"search.budget",
                 [](RunConfig& c, const std::string& v) {
                   c.search.budget = parse_number<std::uint64_t>(v);
                 },
                 [](const RunConfig& c) {
                   return c.search.budget ? std::to_string(*c.search.budget) : std::string("none");
                 }});
    k.push_back(uint_key("search.seed",
                         [](auto& c) -> auto& { return c.search.seed; }));
    k.push_back(uint_key("search.population", [](auto& c) -> auto& {
      return c.search.baseline.population;
    }));
    k.push_back(real_key("search.mutation",
                         [](auto& c) -> auto& { return c.search.baseline.mutation; }));
    k.push_back(uint_key("search.tournament", [](auto& c) -> auto& {
      return c.search.baseline.tournament;
    }));

    k.push_back({"ground_truth.stride",
                 [](RunConfig& c, const std::string& v) {
                   const auto w = words(v);
                   if (w.size() != 3) throw ConfigError("expected 'p i d' strides, got '" + v + "'");
                   c.coverage = {parse_number<std::size_t>(w[0]), parse_number<std::size_t>(w[1]),
                                 parse_number<std::size_t>(w[2])};
                   if (c.coverage.p == 0 || c.coverage.i == 0 || c.coverage.d == 0) {
                     throw ConfigError("strides must be >= 1");
                   }
                 },
                 [](const RunConfig& c) {
                   return std::to_string(c.coverage.p) + ' ' + std::to_string(c.coverage.i) + ' ' +
                          std::to_string(c.coverage.d);
                 }});

    k.push_back({"run.workers",
                 [](RunConfig& c, const std::string& v) {
                   c.workers = parse_number<std::size_t>(v);
                   if (*c.workers == 0) throw ConfigError("workers must be >= 1");
                 },
                 // Worker count never changes results, so it stays out of the hash.
                 nullptr});
    return k;
  }();
  return table;
}

const Key* find_key(const std::string& name) {
  for (const Key& k : keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& name) {
  struct Entry {
    const Key* key;
    std::string value;
    std::size_t line;
  };
  std::vector<Entry> entries;
  std::map<std::string, std::size_t> line_of;
  std::string section, raw;
  bool have_space = false;
  const auto at = [&](std::size_t line) { return name + ":" + std::to_string(line) + ": "; };

  for (std::size_t lineno = 1; std::getline(in, raw); ++lineno) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at(lineno) + "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(at(lineno) + "expected 'key = value'");
    if (section.empty()) throw ConfigError(at(lineno) + "key outside of any [section]");
    const std::string full = section + "." + trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (const auto hash = value.find(" #"); hash != std::string::npos) value = trim(value.substr(0, hash));
    const Key* key = find_key(full);
    if (key == nullptr) throw ConfigError(at(lineno) + "unknown key '" + full + "'");
    if (line_of.contains(full)) throw ConfigError(at(lineno) + "duplicate key '" + full + "'");
    line_of[full] = lineno;
    if (section == "space") have_space = true;
    entries.push_back({key, std::move(value), lineno});
  }

  RunConfig cfg;
  // The mode resets mission defaults, so it goes before any other mission key.
  std::stable_partition(entries.begin(), entries.end(),
                        [](const Entry& e) { return e.key->name == "mission.mode"; });
  for (const Entry& e : entries) {
    try {
      e.key->set(cfg, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(at(e.line) + e.key->name + ": " + err.what());
    }
  }

  const auto anchored = [&](const ConfigError& err) {
    const std::string msg = err.what();
    const std::string key = msg.substr(0, msg.find_first_of(" :"));
    if (auto it = line_of.find(key); it != line_of.end()) return ConfigError(at(it->second) + msg);
    return ConfigError(name + ": " + msg);
  };
  try {
    if (!have_space) throw ConfigError("missing [space] section");
    for (const char* axis : {"space.p", "space.i", "space.d"}) {
      if (!line_of.contains(axis)) throw ConfigError(std::string(axis) + " is required");
    }
    cfg.plant.check();
    cfg.mission.check();
    cfg.space.check();
    cfg.oracle.check();
  } catch (const ConfigError& err) {
    throw anchored(err);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  return parse_config(in, path.string());
}

std::string canonical_text(const RunConfig& cfg) {
  std::string out;
  for (const Key& k : keys()) {
    if (!k.get) continue;
    out += k.name + " = " + k.get(cfg) + '\n';
  }
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_text(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pidlab
