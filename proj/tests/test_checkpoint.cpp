#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "lmdc/checkpoint.hpp"
#include "lmdc/hash.hpp"
#include "lmdc/rng.hpp"

using namespace lmdc;

namespace {

Checkpoint sample_checkpoint() {
  Checkpoint ck;
  ck.config.train.gamma = 0.93;
  ck.config.train.tau = 0.01;
  ck.config.train.hidden_dims = {16, 16};
  ck.config.train.noise_sigma_start = 0.25;
  ck.config.train.noise_sigma_end = 0.04;
  ck.config.train.noise_decay_steps = 0;
  ck.config.train.total_steps = 5000;
  ck.config.eval.trials = 7;
  ck.trained_steps = 1234;
  ck.seed = 99;
  Rng rng(0xC0FFEE);
  ck.agent = make_agent(15, 3, {16, 16}, rng);
  ck.agent.gamma = 0.93;
  ck.agent.tau = 0.01;
  return ck;
}

void check_net_close(const Mlp& orig, const Mlp& loaded) {
  REQUIRE(orig.dims == loaded.dims);
  const auto a = orig.flatten();
  const auto b = loaded.flatten();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    // Parameters pass through float32 on disk: half an ulp of relative error.
    CHECK(std::abs(a[i] - b[i]) <= std::abs(a[i]) * 6e-8 + 1e-30);
  }
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("checkpoints survive an encode/decode round trip") {
  const Checkpoint ck = sample_checkpoint();
  const std::vector<std::uint8_t> bytes = encode_checkpoint(ck);
  const Checkpoint back = decode_checkpoint(bytes);

  CHECK(back.trained_steps == 1234);
  CHECK(back.seed == 99);
  CHECK(serialize_config(back.config) == serialize_config(ck.config));

  check_net_close(ck.agent.actor, back.agent.actor);
  check_net_close(ck.agent.critic, back.agent.critic);
  check_net_close(ck.agent.target_actor, back.agent.target_actor);
  check_net_close(ck.agent.target_critic, back.agent.target_critic);

  // Derived agent scalars are rebuilt from the config snapshot.
  CHECK(back.agent.gamma == 0.93);
  CHECK(back.agent.tau == 0.01);
  CHECK(back.agent.noise_sigma_start == 0.25);
  CHECK(back.agent.noise_sigma_end == 0.04);
  CHECK(back.agent.noise_decay_steps == 5000);  // 0 in config means total_steps
}

TEST_CASE("a second round trip is exact") {
  // After one pass the parameters are exactly representable in float32, so
  // re-encoding is byte-identical and re-decoding changes nothing.
  const Checkpoint ck = sample_checkpoint();
  const Checkpoint once = decode_checkpoint(encode_checkpoint(ck));
  const std::vector<std::uint8_t> bytes = encode_checkpoint(once);
  CHECK(bytes == encode_checkpoint(decode_checkpoint(bytes)));
  const Checkpoint twice = decode_checkpoint(bytes);
  CHECK(twice.agent.actor.flatten() == once.agent.actor.flatten());
  CHECK(twice.agent.target_critic.flatten() == once.agent.target_critic.flatten());
}

TEST_CASE("save writes a file that load reproduces") {
  const Checkpoint ck = sample_checkpoint();
  const std::string path = temp_path("lmdc_test_roundtrip.ckpt");
  save_checkpoint(ck, path);
  const Checkpoint back = load_checkpoint(path);
  CHECK(encode_checkpoint(back) == encode_checkpoint(decode_checkpoint(encode_checkpoint(ck))));
  CHECK(std::remove(path.c_str()) == 0);
}

TEST_CASE("each corruption mode reports its own kind") {
  const std::vector<std::uint8_t> good = encode_checkpoint(sample_checkpoint());

  auto kind_of = [](const std::vector<std::uint8_t>& bytes) {
    try {
      decode_checkpoint(bytes);
    } catch (const CheckpointError& err) {
      return err.kind();
    }
    FAIL("decode accepted corrupted bytes");
    return CheckpointErrorKind::io;
  };

  SUBCASE("flipped payload byte") {
    std::vector<std::uint8_t> bad = good;
    bad.back() ^= 0x01;
    CHECK(kind_of(bad) == CheckpointErrorKind::bad_hash);
  }
  SUBCASE("unsupported version") {
    std::vector<std::uint8_t> bad = good;
    bad[4] = 2;
    try {
      decode_checkpoint(bad);
      FAIL("decode accepted a future version");
    } catch (const CheckpointError& err) {
      CHECK(err.kind() == CheckpointErrorKind::version_mismatch);
      CHECK(std::string(err.what()).find("version 2") != std::string::npos);
    }
  }
  SUBCASE("wrong magic") {
    std::vector<std::uint8_t> bad = good;
    bad[0] = 'X';
    CHECK(kind_of(bad) == CheckpointErrorKind::bad_magic);
  }
  SUBCASE("truncation at every boundary") {
    CHECK(kind_of({}) == CheckpointErrorKind::truncated);
    CHECK(kind_of(std::vector<std::uint8_t>(good.begin(), good.begin() + 5)) ==
          CheckpointErrorKind::truncated);
    CHECK(kind_of(std::vector<std::uint8_t>(good.begin(), good.begin() + 40)) ==
          CheckpointErrorKind::truncated);  // inside the metadata
    CHECK(kind_of(std::vector<std::uint8_t>(good.begin(), good.end() - 4)) ==
          CheckpointErrorKind::truncated);  // one parameter short
  }
  SUBCASE("payload longer than declared") {
    std::vector<std::uint8_t> bad = good;
    bad.insert(bad.end(), {0, 0, 0, 0});
    CHECK(kind_of(bad) == CheckpointErrorKind::bad_metadata);
  }
  SUBCASE("metadata value stops parsing") {
    std::vector<std::uint8_t> bad = good;
    const std::string needle = "train.gamma = ";
    auto it = std::search(bad.begin(), bad.end(), needle.begin(), needle.end());
    REQUIRE(it != bad.end());
    *(it + static_cast<long>(needle.size())) = 'x';
    CHECK(kind_of(bad) == CheckpointErrorKind::bad_metadata);
  }
  SUBCASE("metadata missing the required keys") {
    const std::string meta = "just a note, no keys here\n";
    std::vector<std::uint8_t> bad = {'L', 'M', 'D', 'C', 1, 0, 0, 0};
    bad.push_back(static_cast<std::uint8_t>(meta.size()));
    bad.insert(bad.end(), {0, 0, 0});
    bad.insert(bad.end(), meta.begin(), meta.end());
    CHECK(kind_of(bad) == CheckpointErrorKind::bad_metadata);
  }
}

TEST_CASE("a missing file is an io error") {
  try {
    load_checkpoint(temp_path("lmdc_test_does_not_exist.ckpt"));
    FAIL("load accepted a missing file");
  } catch (const CheckpointError& err) {
    CHECK(err.kind() == CheckpointErrorKind::io);
  }
}

TEST_CASE("payload digests use 64-bit fnv1a in hex") {
  CHECK(fnv1a64("", 0) == 14695981039346656037ULL);
  const char a = 'a';
  CHECK(fnv1a64(&a, 1) == 0xaf63dc4c8601ec8cULL);
  CHECK(to_hex(0xaf63dc4c8601ec8cULL) == "af63dc4c8601ec8c");
  CHECK(from_hex("af63dc4c8601ec8c") == 0xaf63dc4c8601ec8cULL);
  CHECK(from_hex(to_hex(0)) == 0);
  CHECK_THROWS_AS(from_hex("not hex"), std::invalid_argument);
}
