#include "goalc/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "goalc/error.hpp"

namespace goalc {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_inputs(const std::vector<std::string>& paths) {
  std::uint64_t h = fnv1a("");
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) continue;
    std::ostringstream ss;
    ss << in.rdbuf();
    h = fnv1a(ss.str(), h);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["inputs"] = inputs;
  if (seed) j["seed"] = *seed;
  else j["seed"] = nullptr;
  j["outputs"] = outputs;
  j["version"] = version;
  j["config_hash"] = config_hash;
  return j.dump(2) + "\n";
}

void RunManifest::write_next_to(const std::string& output) const {
  std::string path = output + ".manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << to_json();
}

}  // namespace goalc
