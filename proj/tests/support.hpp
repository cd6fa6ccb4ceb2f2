#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "uvlp/aligner/types.hpp"
#include "uvlp/corpus/world.hpp"
#include "uvlp/numkernel/random.hpp"
#include "uvlp/numkernel/tensor.hpp"

namespace uvlp::test {

inline nk::Tensor<double> random_tensor(nk::Shape shape, Rng& rng, double scale = 1.0) {
  nk::Tensor<double> t(std::move(shape));
  std::normal_distribution<double> normal(0.0, scale);
  for (auto& v : t.values) v = normal(rng);
  return t;
}

/// Fresh empty directory under the system temp dir, unique per process.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("uvlp_test_" + std::to_string(::getpid()) + "_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline RegionSet random_regions(Rng& rng, std::size_t n, std::size_t dim, std::size_t classes,
                                const std::vector<std::string>& names = {}) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  RegionSet rs;
  rs.width = 200;
  rs.height = 100;
  for (std::size_t i = 0; i < n; ++i) {
    Region r;
    r.feature.resize(dim);
    for (auto& x : r.feature) x = normal(rng);
    const float x1 = static_cast<float>(uniform_index(rng, 100));
    const float y1 = static_cast<float>(uniform_index(rng, 50));
    r.box = {x1, y1, x1 + 1 + static_cast<float>(uniform_index(rng, 99)),
             y1 + 1 + static_cast<float>(uniform_index(rng, 49))};
    r.class_id = uniform_index(rng, classes);
    r.tag = names.empty() ? "c" + std::to_string(r.class_id) : names[r.class_id];
    rs.regions.push_back(std::move(r));
  }
  return rs;
}

/// A world small enough for unit tests to train on in seconds.
inline WorldSpec small_world(std::uint64_t seed = 0) {
  WorldSpec s;
  s.concepts = 12;
  s.min_concepts = 3;
  s.max_concepts = 3;
  s.images = 40;
  s.distractors = 40;
  s.heldout_images = 12;
  s.seed = seed;
  return s;
}

inline std::string cli_path() {
  const char* p = std::getenv("UVLP_CLI");
  return p ? p : "";
}

inline std::filesystem::path source_dir() {
  const char* p = std::getenv("UVLP_SOURCE_DIR");
  return p ? p : ".";
}

}  // namespace uvlp::test
