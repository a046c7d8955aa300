// Shared plumbing for the orbit command line tool: argument parsing
// helpers, config-file validation, JSON conversions and CSV emission.
#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "orbitml/groups.hpp"
#include "orbitml/model.hpp"
#include "orbitml/optim.hpp"
#include "orbitml/tensor.hpp"

namespace orbitcli {

using nlohmann::json;

/// Parses a group description: "rotations:K", "cyclic:d", "symmetric:d",
/// "product(SPEC,SPEC)" or "file:PATH". The family(arg) spelling used in
/// group names is accepted as well. Throws std::invalid_argument.
orbitml::GroupAction parse_group(const std::string& spec);

/// Parses "1,0.5,-2" into a vector. Throws std::invalid_argument.
orbitml::Vec parse_vec(const std::string& csv);

std::vector<double> parse_double_list(const std::string& csv);

/// Parses "uniform", "fixed:INDEX" or "weights:w1,w2,..." against a group
/// of order K.
orbitml::HLaw parse_law(const std::string& spec, int K);

/// Parses "em", "gd" or "agd".
orbitml::OptMethod parse_method(const std::string& name);

/// Parses "auto" (returns 0, the library default) or a positive number.
double parse_eta(const std::string& spec);

/// Loads a dataset, choosing the binary reader for a ".bin" suffix.
orbitml::Dataset load_dataset_any(const std::string& path);

/// Standard normal vector determined by (seed, dimension) only.
orbitml::Vec random_theta(int d, std::uint64_t seed);

json vec_to_json(const orbitml::Vec& v);
json mat_to_json(const orbitml::Mat& m);
json tensor3_to_json(const orbitml::DenseTensor& t);
json tensor4_to_json(const orbitml::DenseTensor& t);
orbitml::Vec json_to_vec(const json& j);

/// Experiment configuration file: a JSON object restricted to the keys
/// {group, theta_star, sigma, n, seed, method, methods, iters, outputs},
/// with outputs itself restricted to {dir, gnuplot}. Unknown keys are
/// rejected with std::invalid_argument.
struct CliConfig {
  json raw = json::object();
  bool has(const std::string& key) const { return raw.contains(key); }
};
CliConfig load_config(const std::string& path);

void ensure_dir(const std::string& dir);

/// Formats a double with 17 significant digits, the same convention the
/// dataset writer uses.
std::string fmt17(double x);

/// One CSV output file: a "#META <json>" line, a "#COLUMNS ..." line and
/// comma separated data rows at full precision.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const json& meta,
            const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void close();
  ~CsvWriter();

 private:
  std::string path_;
  std::string buffer_;
  std::size_t ncols_ = 0;
  bool open_ = true;
};

/// Parsed back form of a CSV written by CsvWriter.
struct CsvFile {
  json meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  int column(const std::string& name) const;  // -1 when absent
};
CsvFile read_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

/// Writes pretty-printed JSON to the path, or to stdout when the path is
/// empty.
void emit_json(const std::string& path, const json& doc);

}  // namespace orbitcli
