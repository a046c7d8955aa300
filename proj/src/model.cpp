#include "orbitml/model.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "orbitml/parallel.hpp"
#include "orbitml/rng.hpp"

namespace orbitml {

namespace {

void check_h_law(const GroupAction& G, const HLaw& law) {
  switch (law.kind) {
    case HLaw::Kind::Uniform:
      return;
    case HLaw::Kind::Fixed:
      if (law.fixed_index < 0 || law.fixed_index >= G.K) {
        throw std::invalid_argument("sample_dataset: fixed index out of range");
      }
      return;
    case HLaw::Kind::Weights: {
      if (law.weights.size() != G.K) {
        throw std::invalid_argument(
            "sample_dataset: weight count does not match group order");
      }
      if (law.weights.minCoeff() < 0.0) {
        throw std::invalid_argument("sample_dataset: negative weight");
      }
      if (std::abs(law.weights.sum() - 1.0) > 1e-12) {
        throw std::invalid_argument("sample_dataset: weights must sum to 1");
      }
      return;
    }
  }
}

int draw_group_index(const GroupAction& G, const HLaw& law,
                     std::uint64_t seed, std::uint64_t counter) {
  switch (law.kind) {
    case HLaw::Kind::Uniform:
      return static_cast<int>(rng_below_at(seed, counter,
                                           static_cast<std::uint64_t>(G.K)));
    case HLaw::Kind::Fixed:
      return law.fixed_index;
    case HLaw::Kind::Weights: {
      const double u = rng_unit_at(seed, counter);
      double acc = 0.0;
      for (int k = 0; k < G.K; ++k) {
        acc += law.weights(k);
        if (u <= acc) return k;
      }
      return G.K - 1;
    }
  }
  return 0;
}

std::string h_law_name(const HLaw& law) {
  switch (law.kind) {
    case HLaw::Kind::Uniform: return "uniform";
    case HLaw::Kind::Fixed:
      return "fixed(" + std::to_string(law.fixed_index) + ")";
    case HLaw::Kind::Weights: return "weights";
  }
  return "uniform";
}

void append_double_17g(std::string& out, double x) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof(buf), "%.17g", x);
  out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

Dataset sample_dataset(const GroupAction& G, const Vec& theta_star,
                       double sigma, std::int64_t n, std::uint64_t seed,
                       const HLaw& law) {
  if (theta_star.size() != G.d) {
    throw std::invalid_argument("sample_dataset: theta_star dimension mismatch");
  }
  if (sigma <= 0.0) throw std::invalid_argument("sample_dataset: sigma <= 0");
  if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");
  check_h_law(G, law);

  const int d = G.d;
  // Counter layout per observation: 1 draw for the group element, then
  // 2*ceil(d/2) draws for the Box-Muller normal pairs.
  const std::uint64_t stride = 1 + 2 * ((static_cast<std::uint64_t>(d) + 1) / 2);

  Dataset data;
  data.Y.resize(n, d);
  data.sigma = sigma;
  data.n = n;
  data.seed = seed;
  data.meta = DatasetMeta{theta_star, G.name, h_law_name(law)};

  std::vector<Vec> rotated(G.K);
  for (int k = 0; k < G.K; ++k) rotated[k] = G.elements[k] * theta_star;

  const std::size_t chunks =
      (static_cast<std::size_t>(n) + kReduceChunk - 1) / kReduceChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::int64_t lo = static_cast<std::int64_t>(c * kReduceChunk);
    const std::int64_t hi =
        std::min<std::int64_t>(n, static_cast<std::int64_t>((c + 1) * kReduceChunk));
    for (std::int64_t i = lo; i < hi; ++i) {
      const std::uint64_t base = static_cast<std::uint64_t>(i) * stride;
      const int gi = draw_group_index(G, law, seed, base);
      for (int j = 0; j < d; j += 2) {
        double z0, z1;
        rng_normal_pair_at(seed, base + 1 + static_cast<std::uint64_t>(j), z0, z1);
        data.Y(i, j) = rotated[gi](j) + sigma * z0;
        if (j + 1 < d) data.Y(i, j + 1) = rotated[gi](j + 1) + sigma * z1;
      }
    }
  });
  return data;
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
  nlohmann::json meta;
  meta["n"] = data.n;
  meta["d"] = data.Y.cols();
  meta["sigma"] = data.sigma;
  meta["seed"] = data.seed;
  if (data.meta) {
    meta["group"] = data.meta->group_name;
    meta["h_law"] = data.meta->h_law;
    auto& ts = meta["theta_star"] = nlohmann::json::array();
    for (int j = 0; j < data.meta->theta_star.size(); ++j) {
      ts.push_back(data.meta->theta_star(j));
    }
  }
  std::string out;
  out += "#META ";
  out += meta.dump();
  out += "\n";
  for (std::int64_t i = 0; i < data.n; ++i) {
    for (int j = 0; j < data.Y.cols(); ++j) {
      if (j) out += ',';
      append_double_17g(out, data.Y(i, j));
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_dataset_csv: cannot open " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_dataset_csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("#META ", 0) != 0) {
    throw std::runtime_error("load_dataset_csv: missing #META header");
  }
  nlohmann::json meta = nlohmann::json::parse(line.substr(6));
  Dataset data;
  data.n = meta.at("n").get<std::int64_t>();
  const int d = meta.at("d").get<int>();
  data.sigma = meta.at("sigma").get<double>();
  data.seed = meta.at("seed").get<std::uint64_t>();
  if (meta.contains("theta_star")) {
    DatasetMeta dm;
    const auto& ts = meta["theta_star"];
    dm.theta_star.resize(static_cast<int>(ts.size()));
    for (int j = 0; j < dm.theta_star.size(); ++j) {
      dm.theta_star(j) = ts[j].get<double>();
    }
    dm.group_name = meta.value("group", "");
    dm.h_law = meta.value("h_law", "uniform");
    data.meta = std::move(dm);
  }
  data.Y.resize(data.n, d);
  std::int64_t row = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (row >= data.n) {
      throw std::runtime_error("load_dataset_csv: more rows than the header declares");
    }
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int j = 0; j < d; ++j) {
      double x = 0.0;
      auto [next, ec] = std::from_chars(p, end, x);
      if (ec != std::errc{}) {
        throw std::runtime_error("load_dataset_csv: bad value in row " +
                                 std::to_string(row));
      }
      if (!std::isfinite(x)) {
        throw std::runtime_error("load_dataset_csv: non-finite value in row " +
                                 std::to_string(row));
      }
      data.Y(row, j) = x;
      p = next;
      if (j + 1 < d) {
        if (p >= end || *p != ',') {
          throw std::runtime_error("load_dataset_csv: wrong column count in row " +
                                   std::to_string(row));
        }
        ++p;
      }
    }
    if (p != end) {
      throw std::runtime_error("load_dataset_csv: wrong column count in row " +
                               std::to_string(row));
    }
    ++row;
  }
  if (row != data.n) {
    throw std::runtime_error("load_dataset_csv: row count does not match header");
  }
  return data;
}

namespace {
constexpr char kBinMagic[8] = {'O', 'R', 'B', 'M', 'L', '\0', 'D', '1'};
}

void save_dataset_bin(const Dataset& data, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_dataset_bin: cannot open " + path);
  f.write(kBinMagic, 8);
  const std::uint64_t n = static_cast<std::uint64_t>(data.n);
  const std::uint64_t d = static_cast<std::uint64_t>(data.Y.cols());
  f.write(reinterpret_cast<const char*>(&n), 8);
  f.write(reinterpret_cast<const char*>(&d), 8);
  f.write(reinterpret_cast<const char*>(&data.sigma), 8);
  f.write(reinterpret_cast<const char*>(&data.seed), 8);
  for (std::int64_t i = 0; i < data.n; ++i) {
    for (int j = 0; j < data.Y.cols(); ++j) {
      const double x = data.Y(i, j);
      f.write(reinterpret_cast<const char*>(&x), 8);
    }
  }
}

Dataset load_dataset_bin(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_dataset_bin: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kBinMagic, 8) != 0) {
    throw std::runtime_error("load_dataset_bin: bad magic");
  }
  std::uint64_t n = 0, d = 0, seed = 0;
  double sigma = 0.0;
  f.read(reinterpret_cast<char*>(&n), 8);
  f.read(reinterpret_cast<char*>(&d), 8);
  f.read(reinterpret_cast<char*>(&sigma), 8);
  f.read(reinterpret_cast<char*>(&seed), 8);
  if (!f) throw std::runtime_error("load_dataset_bin: truncated header");
  Dataset data;
  data.n = static_cast<std::int64_t>(n);
  data.sigma = sigma;
  data.seed = seed;
  data.Y.resize(data.n, static_cast<int>(d));
  for (std::int64_t i = 0; i < data.n; ++i) {
    for (int j = 0; j < static_cast<int>(d); ++j) {
      double x = 0.0;
      f.read(reinterpret_cast<char*>(&x), 8);
      if (!f) throw std::runtime_error("load_dataset_bin: truncated data");
      data.Y(i, j) = x;
    }
  }
  return data;
}

}  // namespace orbitml
