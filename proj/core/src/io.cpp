#include "lmdc/io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include "lmdc/hash.hpp"

namespace lmdc {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("read failed on " + path);
  return text;
}

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("read failed on " + path);
  return bytes;
}

namespace {

// Write to a sibling temp file, then rename over the destination so a crash
// mid-write never leaves a half-formed file at the target path.
void write_atomic(const std::string& path, const void* data, std::size_t n) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    out.flush();
    if (!out) throw std::runtime_error("write failed on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot move temp file into place at " + path);
  }
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& text) {
  write_atomic(path, text.data(), text.size());
}

void write_binary_atomic(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  write_atomic(path, bytes.data(), bytes.size());
}

std::string format_sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string format_exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::uint64_t from_hex(const std::string& s) {
  if (s.empty() || s.size() > 16) throw std::invalid_argument("bad hex string '" + s + "'");
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad hex string '" + s + "'");
  }
  return v;
}

}  // namespace lmdc
