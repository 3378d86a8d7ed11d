#include "tcf/report.hpp"

#include <cstdio>
#include <fstream>

#include <Eigen/Core>
#include <boost/version.hpp>
#include "json.hpp"

#include "tcf/error.hpp"

namespace tcf {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_manifest(const std::string& dir, const std::string& command, std::uint64_t seed,
                    const std::string& canonical_config, const std::vector<std::string>& files) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_config)));

  nlohmann::ordered_json j;
  j["tool"] = "tcf";
  j["version"] = kVersion;
  j["command"] = command;
  j["seed"] = seed;
  j["config_hash"] = std::string("fnv1a64:") + hash;
  j["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)},
                    {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) +
                                  "." + std::to_string(BOOST_VERSION % 100)}};
  j["files"] = files;
  j["config"] = canonical_config;

  const std::string path = dir + "/manifest.json";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  os << j.dump(2) << '\n';
}

}  // namespace tcf
