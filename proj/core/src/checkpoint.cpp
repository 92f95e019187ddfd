#include "lmdc/checkpoint.hpp"

#include <cstring>
#include <sstream>

#include "lmdc/hash.hpp"
#include "lmdc/io.hpp"

namespace lmdc {

namespace {

constexpr char kMagic[4] = {'L', 'M', 'D', 'C'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_net(std::vector<std::uint8_t>& out, const Mlp& net) {
  const std::vector<double> params = net.flatten();
  for (double p : params) {
    const float f = static_cast<float>(p);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32(out, bits);
  }
}

std::string dims_csv(const Mlp& net) {
  std::string s;
  for (std::size_t i = 0; i < net.dims.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(net.dims[i]);
  }
  return s;
}

std::vector<int> parse_dims(const std::string& csv) {
  std::vector<int> dims;
  std::istringstream in(csv);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      dims.push_back(std::stoi(part));
    } catch (const std::exception&) {
      throw CheckpointError(CheckpointErrorKind::bad_metadata,
                            "checkpoint metadata: bad network shape '" + csv + "'");
    }
  }
  if (dims.size() < 2) {
    throw CheckpointError(CheckpointErrorKind::bad_metadata,
                          "checkpoint metadata: bad network shape '" + csv + "'");
  }
  return dims;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
  std::vector<std::uint8_t> payload;
  payload.reserve((ck.agent.actor.parameter_count() + ck.agent.critic.parameter_count()) *
                  2 * sizeof(float));
  append_net(payload, ck.agent.actor);
  append_net(payload, ck.agent.critic);
  append_net(payload, ck.agent.target_actor);
  append_net(payload, ck.agent.target_critic);

  std::string meta;
  meta += "net.actor_dims = " + dims_csv(ck.agent.actor) + "\n";
  meta += "net.critic_dims = " + dims_csv(ck.agent.critic) + "\n";
  meta += "run.trained_steps = " + std::to_string(ck.trained_steps) + "\n";
  meta += "run.seed = " + std::to_string(ck.seed) + "\n";
  meta += "payload.floats = " + std::to_string(payload.size() / sizeof(float)) + "\n";
  meta += "payload.fnv1a = " + to_hex(fnv1a64(payload.data(), payload.size())) + "\n";
  meta += serialize_config(ck.config);

  std::vector<std::uint8_t> out;
  out.reserve(12 + meta.size() + payload.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.insert(out.end(), meta.begin(), meta.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12) {
    throw CheckpointError(CheckpointErrorKind::truncated,
                          "checkpoint truncated: no room for the 12-byte header");
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError(CheckpointErrorKind::bad_magic,
                          "not a checkpoint file (magic bytes differ)");
  }
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointErrorKind::version_mismatch,
                          "checkpoint format version " + std::to_string(version) +
                              " is not supported (expected " +
                              std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint32_t meta_len = get_u32(bytes.data() + 8);
  if (bytes.size() < 12 + static_cast<std::size_t>(meta_len)) {
    throw CheckpointError(CheckpointErrorKind::truncated,
                          "checkpoint truncated inside the metadata block");
  }
  const std::string meta(bytes.begin() + 12, bytes.begin() + 12 + meta_len);

  // Pull the bookkeeping keys out of the metadata; everything else is a
  // config key and replays into the snapshot.
  Checkpoint ck;
  std::string actor_dims_csv, critic_dims_csv, hash_hex;
  long long payload_floats = -1;
  std::string config_lines;
  {
    std::istringstream in(meta);
    std::string line;
    while (std::getline(in, line)) {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const std::size_t b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const std::size_t e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      auto to_ll = [&](const std::string& v) {
        try {
          return std::stoll(v);
        } catch (const std::exception&) {
          throw CheckpointError(CheckpointErrorKind::bad_metadata,
                                "checkpoint metadata: '" + key + "' is not a number");
        }
      };
      if (key == "net.actor_dims") {
        actor_dims_csv = value;
      } else if (key == "net.critic_dims") {
        critic_dims_csv = value;
      } else if (key == "run.trained_steps") {
        ck.trained_steps = static_cast<long>(to_ll(value));
      } else if (key == "run.seed") {
        try {
          ck.seed = std::stoull(value);
        } catch (const std::exception&) {
          throw CheckpointError(CheckpointErrorKind::bad_metadata,
                                "checkpoint metadata: 'run.seed' is not a number");
        }
      } else if (key == "payload.floats") {
        payload_floats = to_ll(value);
      } else if (key == "payload.fnv1a") {
        hash_hex = value;
      } else {
        config_lines += line;
        config_lines += '\n';
      }
    }
  }
  if (actor_dims_csv.empty() || critic_dims_csv.empty() || hash_hex.empty() ||
      payload_floats < 0) {
    throw CheckpointError(CheckpointErrorKind::bad_metadata,
                          "checkpoint metadata is missing required keys");
  }
  try {
    apply_config_text(ck.config, config_lines, "checkpoint metadata");
  } catch (const std::invalid_argument& err) {
    throw CheckpointError(CheckpointErrorKind::bad_metadata, err.what());
  }

  const std::size_t payload_off = 12 + meta_len;
  const std::size_t payload_bytes = bytes.size() - payload_off;
  const std::size_t expected_bytes = static_cast<std::size_t>(payload_floats) * sizeof(float);
  if (payload_bytes < expected_bytes) {
    throw CheckpointError(CheckpointErrorKind::truncated,
                          "checkpoint truncated: payload holds " +
                              std::to_string(payload_bytes / sizeof(float)) + " of " +
                              std::to_string(payload_floats) + " parameters");
  }
  if (payload_bytes != expected_bytes) {
    throw CheckpointError(CheckpointErrorKind::bad_metadata,
                          "checkpoint payload is larger than its declared size");
  }
  const std::uint64_t digest = fnv1a64(bytes.data() + payload_off, payload_bytes);
  std::uint64_t declared;
  try {
    declared = from_hex(hash_hex);
  } catch (const std::invalid_argument&) {
    throw CheckpointError(CheckpointErrorKind::bad_metadata,
                          "checkpoint metadata: unreadable payload digest");
  }
  if (digest != declared) {
    throw CheckpointError(CheckpointErrorKind::bad_hash,
                          "checkpoint payload digest mismatch: stored " + hash_hex +
                              ", computed " + to_hex(digest) + "; file is corrupted");
  }

  const std::vector<int> actor_dims = parse_dims(actor_dims_csv);
  const std::vector<int> critic_dims = parse_dims(critic_dims_csv);
  const std::vector<int> hidden(actor_dims.begin() + 1, actor_dims.end() - 1);
  Rng scratch(0);
  ck.agent = make_agent(actor_dims.front(), actor_dims.back(), hidden, scratch);
  if (ck.agent.critic.dims != critic_dims) {
    throw CheckpointError(CheckpointErrorKind::bad_metadata,
                          "checkpoint metadata: actor and critic shapes disagree");
  }
  ck.agent.gamma = ck.config.train.gamma;
  ck.agent.tau = ck.config.train.tau;
  ck.agent.noise_sigma_start = ck.config.train.noise_sigma_start;
  ck.agent.noise_sigma_end = ck.config.train.noise_sigma_end;
  ck.agent.noise_decay_steps = ck.config.train.noise_decay_steps > 0
                                   ? ck.config.train.noise_decay_steps
                                   : ck.config.train.total_steps;

  const std::size_t total =
      ck.agent.actor.parameter_count() + ck.agent.critic.parameter_count() +
      ck.agent.target_actor.parameter_count() + ck.agent.target_critic.parameter_count();
  if (static_cast<std::size_t>(payload_floats) != total) {
    throw CheckpointError(CheckpointErrorKind::bad_metadata,
                          "checkpoint payload size does not match the network shapes");
  }

  const std::uint8_t* p = bytes.data() + payload_off;
  auto read_net = [&p](Mlp& net) {
    std::vector<double> params(net.parameter_count());
    for (double& v : params) {
      std::uint32_t bits = get_u32(p);
      p += 4;
      float f;
      std::memcpy(&f, &bits, sizeof f);
      v = static_cast<double>(f);
    }
    net.unflatten(params);
  };
  read_net(ck.agent.actor);
  read_net(ck.agent.critic);
  read_net(ck.agent.target_actor);
  read_net(ck.agent.target_critic);
  return ck;
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  write_binary_atomic(path, encode_checkpoint(ck));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_binary_file(path);
  } catch (const std::runtime_error& err) {
    throw CheckpointError(CheckpointErrorKind::io, err.what());
  }
  return decode_checkpoint(bytes);
}

}  // namespace lmdc
