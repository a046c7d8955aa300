// Observation model Y = g theta* + sigma eps and dataset I/O.
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "orbitml/groups.hpp"

namespace orbitml {

/// Law of the latent group element used when sampling.
struct HLaw {
  enum class Kind { Uniform, Fixed, Weights };
  Kind kind = Kind::Uniform;
  int fixed_index = 0;
  Vec weights;  // length K, nonnegative, sums to 1 within 1e-12

  static HLaw uniform() { return HLaw{}; }
  static HLaw fixed(int index) {
    HLaw law;
    law.kind = Kind::Fixed;
    law.fixed_index = index;
    return law;
  }
  static HLaw from_weights(Vec w) {
    HLaw law;
    law.kind = Kind::Weights;
    law.weights = std::move(w);
    return law;
  }
};

struct DatasetMeta {
  Vec theta_star;
  std::string group_name;
  std::string h_law = "uniform";
};

struct Dataset {
  Mat Y;  // n x d, one observation per row
  double sigma = 1.0;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::optional<DatasetMeta> meta;
};

/// Draws n observations g_i theta* + sigma eps_i with iid group elements
/// and Gaussian noise. Fully determined by (G, theta_star, sigma, n, seed,
/// law); observation i depends on the seed and i only, so sampling can be
/// sharded by index.
Dataset sample_dataset(const GroupAction& G, const Vec& theta_star,
                       double sigma, std::int64_t n, std::uint64_t seed,
                       const HLaw& law = HLaw::uniform());

/// CSV with a single "#META <json>" header line; floats use 17 significant
/// digits so the round trip is bit exact.
void save_dataset_csv(const Dataset& data, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

/// Binary format: 8-byte magic "ORBML\0D1", u64 n, u64 d, f64 sigma,
/// u64 seed, then n*d little-endian f64 values row-major.
void save_dataset_bin(const Dataset& data, const std::string& path);
Dataset load_dataset_bin(const std::string& path);

}  // namespace orbitml
