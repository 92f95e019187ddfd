#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lmdc {

std::string read_text_file(const std::string& path);
std::vector<std::uint8_t> read_binary_file(const std::string& path);

// Both writers go through a sibling temp file and rename into place, so a
// crash mid-write never leaves a partial file at the destination.
void write_text_atomic(const std::string& path, const std::string& content);
void write_binary_atomic(const std::string& path, const std::vector<std::uint8_t>& content);

// Fixed 6-significant-digit representation used for all CSV output.
std::string format_sig6(double v);

// Shortest round-trip representation (config snapshots, metadata).
std::string format_exact(double v);

}  // namespace lmdc
