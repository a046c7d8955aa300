#include "cli_util.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "orbitml/rng.hpp"

namespace orbitcli {

using orbitml::Dataset;
using orbitml::GroupAction;
using orbitml::HLaw;
using orbitml::Mat;
using orbitml::OptMethod;
using orbitml::Vec;

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

/// Splits "product(A,B)" arguments at the top-level comma.
std::pair<std::string, std::string> split_product_args(const std::string& body,
                                                       const std::string& spec) {
  int depth = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '(') ++depth;
    if (body[i] == ')') --depth;
    if (body[i] == ',' && depth == 0) {
      return {trim(body.substr(0, i)), trim(body.substr(i + 1))};
    }
  }
  throw std::invalid_argument("parse_group: product needs two factors in " +
                              spec);
}

int parse_int_strict(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  int value = 0;
  try {
    value = std::stoi(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(what + ": not an integer: " + s);
  }
  if (pos != s.size()) {
    throw std::invalid_argument(what + ": not an integer: " + s);
  }
  return value;
}

}  // namespace

GroupAction parse_group(const std::string& raw) {
  const std::string spec = trim(raw);
  if (spec.empty()) throw std::invalid_argument("parse_group: empty spec");

  if (spec.rfind("file:", 0) == 0) {
    return orbitml::load_group_json(spec.substr(5));
  }
  if (spec.rfind("product(", 0) == 0 && spec.back() == ')') {
    const std::string body = spec.substr(8, spec.size() - 9);
    const auto [left, right] = split_product_args(body, spec);
    return orbitml::make_product(parse_group(left), parse_group(right));
  }

  std::string family;
  std::string arg;
  const auto colon = spec.find(':');
  const auto paren = spec.find('(');
  if (colon != std::string::npos) {
    family = spec.substr(0, colon);
    arg = spec.substr(colon + 1);
  } else if (paren != std::string::npos && spec.back() == ')') {
    family = spec.substr(0, paren);
    arg = spec.substr(paren + 1, spec.size() - paren - 2);
  } else {
    throw std::invalid_argument("parse_group: cannot parse " + spec);
  }

  const int k = parse_int_strict(trim(arg), "parse_group");
  if (family == "rotations") return orbitml::make_rotations(k);
  if (family == "cyclic") return orbitml::make_cyclic(k);
  if (family == "symmetric") return orbitml::make_symmetric(k);
  throw std::invalid_argument("parse_group: unknown family " + family);
}

Vec parse_vec(const std::string& csv) {
  const std::vector<double> values = parse_double_list(csv);
  Vec v(static_cast<int>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    v(static_cast<int>(i)) = values[i];
  return v;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) {
      throw std::invalid_argument("parse_vec: empty entry in " + csv);
    }
    std::size_t pos = 0;
    double x = 0.0;
    try {
      x = std::stod(t, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("parse_vec: not a number: " + t);
    }
    if (pos != t.size()) {
      throw std::invalid_argument("parse_vec: not a number: " + t);
    }
    out.push_back(x);
  }
  if (out.empty()) throw std::invalid_argument("parse_vec: empty list");
  const std::string whole = trim(csv);
  if (!whole.empty() && whole.back() == ',') {
    throw std::invalid_argument("parse_vec: empty entry in " + csv);
  }
  return out;
}

HLaw parse_law(const std::string& spec, int K) {
  if (spec == "uniform") return HLaw::uniform();
  if (spec.rfind("fixed:", 0) == 0) {
    const int idx = parse_int_strict(spec.substr(6), "parse_law");
    if (idx < 0 || idx >= K) {
      throw std::invalid_argument("parse_law: fixed index out of range");
    }
    return HLaw::fixed(idx);
  }
  if (spec.rfind("weights:", 0) == 0) {
    const Vec w = parse_vec(spec.substr(8));
    if (w.size() != K) {
      throw std::invalid_argument("parse_law: expected " + std::to_string(K) +
                                  " weights, got " + std::to_string(w.size()));
    }
    return HLaw::from_weights(w);
  }
  throw std::invalid_argument("parse_law: cannot parse " + spec);
}

OptMethod parse_method(const std::string& name) {
  if (name == "em") return OptMethod::EM;
  if (name == "gd") return OptMethod::GD;
  if (name == "agd") return OptMethod::AGD;
  throw std::invalid_argument("parse_method: unknown method " + name);
}

double parse_eta(const std::string& spec) {
  if (spec == "auto") return 0.0;
  std::size_t pos = 0;
  double eta = 0.0;
  try {
    eta = std::stod(spec, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("parse_eta: expected auto or a number");
  }
  if (pos != spec.size() || !(eta > 0.0)) {
    throw std::invalid_argument("parse_eta: expected auto or a positive value");
  }
  return eta;
}

Dataset load_dataset_any(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw std::invalid_argument("data file not found: " + path);
  }
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".bin") {
    return orbitml::load_dataset_bin(path);
  }
  return orbitml::load_dataset_csv(path);
}

Vec random_theta(int d, std::uint64_t seed) {
  Vec v(d);
  double z0 = 0.0;
  double z1 = 0.0;
  for (int i = 0; i < d; i += 2) {
    orbitml::rng_normal_pair_at(seed, static_cast<std::uint64_t>(i), z0, z1);
    v(i) = z0;
    if (i + 1 < d) v(i + 1) = z1;
  }
  return v;
}

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json mat_to_json(const Mat& m) {
  json arr = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    arr.push_back(row);
  }
  return arr;
}

json tensor3_to_json(const orbitml::DenseTensor& t) {
  const int d = t.dim();
  json a = json::array();
  for (int i = 0; i < d; ++i) {
    json b = json::array();
    for (int j = 0; j < d; ++j) {
      json c = json::array();
      for (int k = 0; k < d; ++k) {
        const int idx[3] = {i, j, k};
        c.push_back(t.at(idx));
      }
      b.push_back(c);
    }
    a.push_back(b);
  }
  return a;
}

json tensor4_to_json(const orbitml::DenseTensor& t) {
  const int d = t.dim();
  json a = json::array();
  for (int i = 0; i < d; ++i) {
    json b = json::array();
    for (int j = 0; j < d; ++j) {
      json c = json::array();
      for (int k = 0; k < d; ++k) {
        json e = json::array();
        for (int l = 0; l < d; ++l) {
          const int idx[4] = {i, j, k, l};
          e.push_back(t.at(idx));
        }
        c.push_back(e);
      }
      b.push_back(c);
    }
    a.push_back(b);
  }
  return a;
}

Vec json_to_vec(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("json_to_vec: expected array");
  Vec v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<int>(i)) = j[i].get<double>();
  }
  return v;
}

CliConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw std::invalid_argument("config: invalid JSON in " + path + ": " +
                                e.what());
  }
  if (!doc.is_object()) {
    throw std::invalid_argument("config: top level must be an object");
  }

  static const std::vector<std::string> kTopKeys = {
      "group", "theta_star", "sigma", "n", "seed",
      "method", "methods", "iters", "outputs"};
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const std::string& k : kTopKeys) known = known || k == key;
    if (!known) throw std::invalid_argument("config: unknown key " + key);
    (void)value;
  }

  if (doc.contains("group") && !doc["group"].is_string())
    throw std::invalid_argument("config: group must be a string");
  if (doc.contains("theta_star") && !doc["theta_star"].is_array())
    throw std::invalid_argument("config: theta_star must be an array");
  if (doc.contains("sigma") && !doc["sigma"].is_number())
    throw std::invalid_argument("config: sigma must be a number");
  if (doc.contains("n") && !doc["n"].is_number_integer())
    throw std::invalid_argument("config: n must be an integer");
  if (doc.contains("seed") && !doc["seed"].is_number_unsigned())
    throw std::invalid_argument("config: seed must be a nonnegative integer");
  if (doc.contains("method") && !doc["method"].is_string())
    throw std::invalid_argument("config: method must be a string");
  if (doc.contains("methods") && !doc["methods"].is_array())
    throw std::invalid_argument("config: methods must be an array");
  if (doc.contains("iters") && !doc["iters"].is_number_integer())
    throw std::invalid_argument("config: iters must be an integer");
  if (doc.contains("outputs")) {
    const json& out = doc["outputs"];
    if (!out.is_object())
      throw std::invalid_argument("config: outputs must be an object");
    for (const auto& [key, value] : out.items()) {
      if (key != "dir" && key != "gnuplot")
        throw std::invalid_argument("config: unknown outputs key " + key);
      (void)value;
    }
    if (out.contains("dir") && !out["dir"].is_string())
      throw std::invalid_argument("config: outputs.dir must be a string");
    if (out.contains("gnuplot") && !out["gnuplot"].is_boolean())
      throw std::invalid_argument("config: outputs.gnuplot must be a boolean");
  }

  CliConfig cfg;
  cfg.raw = std::move(doc);
  return cfg;
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const json& meta,
                     const std::vector<std::string>& columns)
    : path_(path), ncols_(columns.size()) {
  buffer_ = "#META " + meta.dump() + "\n#COLUMNS ";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += columns[i];
  }
  buffer_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != ncols_) {
    throw std::invalid_argument("CsvWriter: row width mismatch");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += fmt17(values[i]);
  }
  buffer_ += '\n';
}

void CsvWriter::close() {
  if (!open_) return;
  open_ = false;
  write_text_file(path_, buffer_);
}

CsvWriter::~CsvWriter() {
  try {
    close();
  } catch (...) {
  }
}

int CsvFile::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvFile read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("read_csv: cannot open " + path);
  CsvFile out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("#META ", 0) == 0) {
      out.meta = json::parse(line.substr(6));
      continue;
    }
    if (line.rfind("#COLUMNS ", 0) == 0) {
      std::stringstream ss(line.substr(9));
      std::string name;
      while (std::getline(ss, name, ',')) out.columns.push_back(trim(name));
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    out.rows.push_back(parse_double_list(line));
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

void emit_json(const std::string& path, const json& doc) {
  const std::string text = doc.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

}  // namespace orbitcli
