#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace polybubble::report {

inline constexpr const char* kVersion = "0.1.0";

// stable 64-bit FNV-1a of the canonical config text, embedded in every report
uint64_t fnv1a64(const std::string& data);
std::string hash_hex(const std::string& data);

// fixed shortest-roundtrip formatting so identical runs serialize identically
std::string format_double(double x);

// json with insertion order preserved; all report writers use this alias
using Json = nlohmann::ordered_json;

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace polybubble::report
