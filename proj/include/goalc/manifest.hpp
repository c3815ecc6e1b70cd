#pragma once

// Sidecar record written next to every CLI output.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace goalc {

struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> outputs;
  std::string version = GOALC_VERSION;
  std::string config_hash;  // FNV-1a 64 over the input file contents, hex

  std::string to_json() const;
  /// Writes `<output>.manifest.json`.
  void write_next_to(const std::string& output) const;
};

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Hashes the contents of every readable input, in order.
std::string hash_inputs(const std::vector<std::string>& paths);

}  // namespace goalc
