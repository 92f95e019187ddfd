#include "lmdc/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "lmdc/io.hpp"

namespace lmdc {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw std::invalid_argument("config key '" + key + "': cannot parse '" + value +
                              "' as " + expected);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value, "a number");
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, value, "a number");
  } catch (const std::out_of_range&) {
    bad_value(key, value, "a number");
  }
}

long long parse_integer(const std::string& key, const std::string& value) {
  long long v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    bad_value(key, value, "an integer");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    bad_value(key, value, "an unsigned integer");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "a boolean (true/false)");
}

std::vector<std::string> split_csv(const std::string& value) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) parts.push_back(item);
  return parts;
}

std::string bool_str(bool v) { return v ? "true" : "false"; }

struct Entry {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

// Field binders. Each produces a registry entry whose setter re-parses with
// the key name in the error message.
template <class Get, class Set>
Entry entry(const char* key, Get get, Set set) {
  return Entry{key, std::move(get), std::move(set)};
}

Entry dbl(const char* key, double* (*field)(RunConfig&)) {
  return entry(
      key,
      [field](const RunConfig& c) { return format_exact(*field(const_cast<RunConfig&>(c))); },
      [field](RunConfig& c, const std::string& k, const std::string& v) {
        *field(c) = parse_double(k, v);
      });
}

Entry i32(const char* key, int* (*field)(RunConfig&)) {
  return entry(
      key,
      [field](const RunConfig& c) {
        return std::to_string(*field(const_cast<RunConfig&>(c)));
      },
      [field](RunConfig& c, const std::string& k, const std::string& v) {
        const long long x = parse_integer(k, v);
        if (x < INT32_MIN || x > INT32_MAX) bad_value(k, v, "an integer");
        *field(c) = static_cast<int>(x);
      });
}

Entry i64(const char* key, long* (*field)(RunConfig&)) {
  return entry(
      key,
      [field](const RunConfig& c) {
        return std::to_string(*field(const_cast<RunConfig&>(c)));
      },
      [field](RunConfig& c, const std::string& k, const std::string& v) {
        *field(c) = static_cast<long>(parse_integer(k, v));
      });
}

Entry u64(const char* key, std::uint64_t* (*field)(RunConfig&)) {
  return entry(
      key,
      [field](const RunConfig& c) {
        return std::to_string(*field(const_cast<RunConfig&>(c)));
      },
      [field](RunConfig& c, const std::string& k, const std::string& v) {
        *field(c) = parse_u64(k, v);
      });
}

Entry usz(const char* key, std::size_t* (*field)(RunConfig&)) {
  return entry(
      key,
      [field](const RunConfig& c) {
        return std::to_string(*field(const_cast<RunConfig&>(c)));
      },
      [field](RunConfig& c, const std::string& k, const std::string& v) {
        *field(c) = static_cast<std::size_t>(parse_u64(k, v));
      });
}

Entry bol(const char* key, bool* (*field)(RunConfig&)) {
  return entry(
      key,
      [field](const RunConfig& c) { return bool_str(*field(const_cast<RunConfig&>(c))); },
      [field](RunConfig& c, const std::string& k, const std::string& v) {
        *field(c) = parse_bool(k, v);
      });
}

// Shorthand for binders: F(x) expands to a lambda returning a pointer to the
// named field of a RunConfig reference.
#define LMDC_FIELD(expr) +[](RunConfig& c) { return &(c.expr); }

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e;

    e.push_back(dbl("world.extent_x", LMDC_FIELD(train.world.extent_x)));
    e.push_back(dbl("world.extent_y", LMDC_FIELD(train.world.extent_y)));
    e.push_back(dbl("world.extent_z", LMDC_FIELD(train.world.extent_z)));
    e.push_back(i32("world.sites_x", LMDC_FIELD(train.world.sites_x)));
    e.push_back(i32("world.sites_z", LMDC_FIELD(train.world.sites_z)));
    e.push_back(dbl("world.band_x_min", LMDC_FIELD(train.world.band_x_min)));
    e.push_back(dbl("world.band_x_max", LMDC_FIELD(train.world.band_x_max)));
    e.push_back(dbl("world.band_z_min", LMDC_FIELD(train.world.band_z_min)));
    e.push_back(dbl("world.band_z_max", LMDC_FIELD(train.world.band_z_max)));
    e.push_back(dbl("world.obstacle_width_min", LMDC_FIELD(train.world.obstacle_width_min)));
    e.push_back(dbl("world.obstacle_width_max", LMDC_FIELD(train.world.obstacle_width_max)));
    e.push_back(dbl("world.obstacle_height_min", LMDC_FIELD(train.world.obstacle_height_min)));
    e.push_back(dbl("world.obstacle_height_max", LMDC_FIELD(train.world.obstacle_height_max)));
    e.push_back(dbl("world.agent_spawn_min_x", LMDC_FIELD(train.world.agent_spawn.min.x)));
    e.push_back(dbl("world.agent_spawn_min_y", LMDC_FIELD(train.world.agent_spawn.min.y)));
    e.push_back(dbl("world.agent_spawn_min_z", LMDC_FIELD(train.world.agent_spawn.min.z)));
    e.push_back(dbl("world.agent_spawn_max_x", LMDC_FIELD(train.world.agent_spawn.max.x)));
    e.push_back(dbl("world.agent_spawn_max_y", LMDC_FIELD(train.world.agent_spawn.max.y)));
    e.push_back(dbl("world.agent_spawn_max_z", LMDC_FIELD(train.world.agent_spawn.max.z)));
    e.push_back(dbl("world.target_spawn_min_x", LMDC_FIELD(train.world.target_spawn.min.x)));
    e.push_back(dbl("world.target_spawn_min_y", LMDC_FIELD(train.world.target_spawn.min.y)));
    e.push_back(dbl("world.target_spawn_min_z", LMDC_FIELD(train.world.target_spawn.min.z)));
    e.push_back(dbl("world.target_spawn_max_x", LMDC_FIELD(train.world.target_spawn.max.x)));
    e.push_back(dbl("world.target_spawn_max_y", LMDC_FIELD(train.world.target_spawn.max.y)));
    e.push_back(dbl("world.target_spawn_max_z", LMDC_FIELD(train.world.target_spawn.max.z)));
    e.push_back(dbl("world.agent_max_speed", LMDC_FIELD(train.world.agent_max_speed)));
    e.push_back(dbl("world.target_speed", LMDC_FIELD(train.world.target_speed)));
    e.push_back(dbl("world.success_radius", LMDC_FIELD(train.world.success_radius)));
    e.push_back(dbl("world.far_limit", LMDC_FIELD(train.world.far_limit)));
    e.push_back(i32("world.max_steps", LMDC_FIELD(train.world.max_steps)));
    e.push_back(dbl("world.agent_radius", LMDC_FIELD(train.world.agent_radius)));
    e.push_back(dbl("world.ground_height", LMDC_FIELD(train.world.ground_height)));

    e.push_back(i32("rays.n_horizontal", LMDC_FIELD(train.rays.n_horizontal)));
    e.push_back(bol("rays.include_down_ray", LMDC_FIELD(train.rays.include_down_ray)));
    e.push_back(dbl("rays.max_range", LMDC_FIELD(train.rays.max_range)));

    e.push_back(dbl("reward.step_penalty", LMDC_FIELD(train.reward.step_penalty)));
    e.push_back(dbl("reward.progress_gain", LMDC_FIELD(train.reward.progress_gain)));
    e.push_back(dbl("reward.success_reward", LMDC_FIELD(train.reward.success_reward)));
    e.push_back(dbl("reward.failure_reward", LMDC_FIELD(train.reward.failure_reward)));
    e.push_back(dbl("reward.obstacle_gain", LMDC_FIELD(train.reward.obstacle_gain)));
    e.push_back(dbl("reward.obstacle_distance_floor",
                    LMDC_FIELD(train.reward.obstacle_distance_floor)));

    e.push_back(i64("train.total_steps", LMDC_FIELD(train.total_steps)));
    e.push_back(i64("train.warmup_transitions", LMDC_FIELD(train.warmup_transitions)));
    e.push_back(i32("train.update_period", LMDC_FIELD(train.update_period)));
    e.push_back(i32("train.batch_size", LMDC_FIELD(train.batch_size)));
    e.push_back(usz("train.buffer_capacity", LMDC_FIELD(train.buffer_capacity)));
    e.push_back(u64("train.seed", LMDC_FIELD(train.master_seed)));
    e.push_back(i64("train.checkpoint_every", LMDC_FIELD(train.checkpoint_every)));

    e.push_back(entry(
        "train.density_schedule",
        [](const RunConfig& c) {
          return std::string(c.train.density_schedule == DensityScheduleKind::fixed
                                 ? "fixed"
                                 : "uniform-grid");
        },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "uniform-grid") {
            c.train.density_schedule = DensityScheduleKind::uniform_grid;
          } else if (v == "fixed") {
            c.train.density_schedule = DensityScheduleKind::fixed;
          } else {
            bad_value(k, v, "uniform-grid or fixed");
          }
        }));
    e.push_back(dbl("train.fixed_density", LMDC_FIELD(train.fixed_density)));

    e.push_back(entry(
        "train.hidden_dims",
        [](const RunConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.train.hidden_dims.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(c.train.hidden_dims[i]);
          }
          return s;
        },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          std::vector<int> dims;
          for (const std::string& part : split_csv(v)) {
            const long long x = parse_integer(k, part);
            if (x < 1) bad_value(k, v, "positive layer widths");
            dims.push_back(static_cast<int>(x));
          }
          if (dims.empty()) bad_value(k, v, "positive layer widths");
          c.train.hidden_dims = std::move(dims);
        }));

    e.push_back(entry(
        "train.optimizer",
        [](const RunConfig& c) {
          return std::string(c.train.optimizer == OptimizerMethod::sgd ? "sgd" : "adam");
        },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "adam") {
            c.train.optimizer = OptimizerMethod::adam;
          } else if (v == "sgd") {
            c.train.optimizer = OptimizerMethod::sgd;
          } else {
            bad_value(k, v, "adam or sgd");
          }
        }));
    e.push_back(dbl("train.actor_lr", LMDC_FIELD(train.actor_lr)));
    e.push_back(dbl("train.critic_lr", LMDC_FIELD(train.critic_lr)));
    e.push_back(dbl("train.gamma", LMDC_FIELD(train.gamma)));
    e.push_back(dbl("train.tau", LMDC_FIELD(train.tau)));

    e.push_back(entry(
        "train.noise",
        [](const RunConfig& c) {
          return std::string(c.train.noise == NoiseKind::ou ? "ou" : "gaussian");
        },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "gaussian") {
            c.train.noise = NoiseKind::gaussian;
          } else if (v == "ou") {
            c.train.noise = NoiseKind::ou;
          } else {
            bad_value(k, v, "gaussian or ou");
          }
        }));
    e.push_back(dbl("train.noise_sigma_start", LMDC_FIELD(train.noise_sigma_start)));
    e.push_back(dbl("train.noise_sigma_end", LMDC_FIELD(train.noise_sigma_end)));
    e.push_back(i64("train.noise_decay_steps", LMDC_FIELD(train.noise_decay_steps)));
    e.push_back(dbl("train.ou_theta", LMDC_FIELD(train.ou_theta)));

    e.push_back(i64("train.probe_every", LMDC_FIELD(train.probe_every)));
    e.push_back(i32("train.probe_episodes", LMDC_FIELD(train.probe_episodes)));
    e.push_back(dbl("train.probe_density", LMDC_FIELD(train.probe_density)));
    e.push_back(bol("train.blind", LMDC_FIELD(train.blind)));

    e.push_back(entry(
        "eval.densities",
        [](const RunConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.eval.densities.size(); ++i) {
            if (i) s += ',';
            s += format_exact(c.eval.densities[i]);
          }
          return s;
        },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          std::vector<double> d;
          for (const std::string& part : split_csv(v)) d.push_back(parse_double(k, part));
          if (d.empty()) bad_value(k, v, "a comma-separated density list");
          c.eval.densities = std::move(d);
        }));
    e.push_back(i32("eval.rounds", LMDC_FIELD(eval.rounds)));
    e.push_back(i32("eval.trials", LMDC_FIELD(eval.trials)));
    e.push_back(u64("eval.seed", LMDC_FIELD(eval.seed)));
    e.push_back(i32("eval.workers", LMDC_FIELD(eval.workers)));

    return e;
  }();
  return entries;
}

#undef LMDC_FIELD

const Entry& find_entry(const std::string& key) {
  for (const Entry& e : registry()) {
    if (key == e.key) return e;
  }
  throw std::invalid_argument("unknown config key '" + key + "'");
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  keys.reserve(registry().size());
  for (const Entry& e : registry()) keys.emplace_back(e.key);
  return keys;
}

std::string get_key(const RunConfig& cfg, const std::string& key) {
  return find_entry(key).get(cfg);
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  find_entry(key).set(cfg, key, value);
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const Entry& e : registry()) {
    out += e.key;
    out += " = ";
    out += e.get(cfg);
    out += '\n';
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_text(RunConfig& cfg, const std::string& text,
                       const std::string& source_name) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(source_name + ":" + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    try {
      set_key(cfg, key, value);
    } catch (const std::invalid_argument& err) {
      throw std::invalid_argument(source_name + ":" + std::to_string(line_no) + ": " +
                                  err.what());
    }
  }
}

SweepConfig sweep_config(const RunConfig& cfg) {
  SweepConfig s;
  s.densities = cfg.eval.densities;
  s.rounds = cfg.eval.rounds;
  s.trials_per_round = cfg.eval.trials;
  s.eval_seed = cfg.eval.seed;
  s.n_workers = cfg.eval.workers;
  s.world = cfg.train.world;
  s.rays = cfg.train.rays;
  s.reward = cfg.train.reward;
  return s;
}

int state_dim(const RunConfig& cfg) { return 6 + cfg.train.rays.n_readings(); }

}  // namespace lmdc
