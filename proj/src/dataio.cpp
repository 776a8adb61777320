#include "scpgcn/dataio.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace scpgcn::dataio {

namespace {

constexpr double kSymmetryTolerance = 1e-9;

std::string read_text_file(const std::string& path, const std::string& op) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error(op + ": cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void require_safe_id(const std::string& id) {
  if (id.empty() || id.find('/') != std::string::npos ||
      id.find('\\') != std::string::npos || id.find("..") != std::string::npos) {
    throw std::invalid_argument("save_dataset: id '" + id +
                                "' is not usable as a file name");
  }
}

/// Enforces the symmetry invariant at load time: small asymmetry (from
/// hand-edited files) is folded back to an exactly symmetric matrix, larger
/// asymmetry is a data error.
void symmetrize_checked(linalg::Matrix& m, const std::string& id,
                        const std::string& path) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const double gap = std::fabs(m(i, j) - m(j, i));
      if (!(gap <= kSymmetryTolerance)) {
        std::ostringstream msg;
        msg << "load_dataset: instance " << id << ": matrix in " << path
            << " is asymmetric at (" << i << ", " << j << ") by " << gap;
        throw std::runtime_error(msg.str());
      }
      const double mean = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = mean;
      m(j, i) = mean;
    }
  }
}

linalg::Matrix load_matrix_checked(const std::string& path,
                                   const std::string& id, std::size_t n) {
  linalg::Matrix m;
  try {
    m = read_matrix_file(path);
  } catch (const std::exception& e) {
    throw std::runtime_error("load_dataset: instance " + id + ": " + e.what());
  }
  if (m.rows() != n || m.cols() != n) {
    std::ostringstream msg;
    msg << "load_dataset: instance " << id << ": matrix in " << path << " is "
        << m.rows() << "x" << m.cols() << " but the manifest declares n = "
        << n;
    throw std::runtime_error(msg.str());
  }
  symmetrize_checked(m, id, path);
  return m;
}

std::string resolve(const std::filesystem::path& base, const std::string& ref) {
  std::filesystem::path p(ref);
  if (p.is_absolute()) {
    return p.string();
  }
  return (base / p).string();
}

}  // namespace

DatasetManifest read_manifest(const std::string& path) {
  const std::string text = read_text_file(path, "read_manifest");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("read_manifest: " + path + " is not valid JSON: " +
                             e.what());
  }

  DatasetManifest manifest;
  try {
    manifest.n = doc.at("n").get<std::size_t>();
    if (doc.contains("metadata")) {
      manifest.metadata =
          doc.at("metadata").get<std::map<std::string, std::string>>();
    }
    for (const auto& entry : doc.at("instances")) {
      ManifestRecord record;
      record.id = entry.at("id").get<std::string>();
      record.structural_path = entry.at("structural_path").get<std::string>();
      record.functional_path = entry.at("functional_path").get<std::string>();
      record.label = entry.at("label").get<int>();
      manifest.records.push_back(std::move(record));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("read_manifest: " + path +
                             " has an invalid field: " + e.what());
  }

  if (manifest.n == 0) {
    throw std::runtime_error("read_manifest: " + path +
                             " declares a node count of 0");
  }
  std::set<std::string> seen;
  for (const auto& record : manifest.records) {
    if (!seen.insert(record.id).second) {
      throw std::runtime_error("read_manifest: " + path + " lists id '" +
                               record.id + "' more than once");
    }
    if (record.label != 0 && record.label != 1) {
      throw std::runtime_error("read_manifest: " + path + " gives id '" +
                               record.id + "' a label outside {0, 1}");
    }
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
  nlohmann::json doc;
  doc["n"] = manifest.n;
  doc["metadata"] = manifest.metadata;
  doc["instances"] = nlohmann::json::array();
  for (const auto& record : manifest.records) {
    doc["instances"].push_back({{"id", record.id},
                                {"structural_path", record.structural_path},
                                {"functional_path", record.functional_path},
                                {"label", record.label}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("write_manifest: cannot open " + path);
  }
  out << doc.dump(2) << "\n";
  if (!out) {
    throw std::runtime_error("write_manifest: write to " + path + " failed");
  }
}

linalg::Matrix read_matrix_file(const std::string& path) {
  const std::string text = read_text_file(path, "read_matrix_file");

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;  // ignore blank lines (e.g. a trailing newline)
    }
    std::istringstream fields(line);
    std::size_t count = 0;
    std::string token;
    while (fields >> token) {
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) {
        throw std::runtime_error("read_matrix_file: " + path +
                                 " contains a non-numeric token '" + token +
                                 "' in row " + std::to_string(rows));
      }
      values.push_back(value);
      ++count;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      std::ostringstream msg;
      msg << "read_matrix_file: " << path << " row " << rows << " has "
          << count << " entries but row 0 has " << cols;
      throw std::runtime_error(msg.str());
    }
    ++rows;
  }
  if (rows == 0) {
    throw std::runtime_error("read_matrix_file: " + path + " is empty");
  }
  try {
    return linalg::Matrix(rows, cols, std::move(values));
  } catch (const std::exception& e) {
    throw std::runtime_error("read_matrix_file: " + path + ": " + e.what());
  }
}

void write_matrix_file(const linalg::Matrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("write_matrix_file: cannot open " + path);
  }
  std::string buffer;
  buffer.reserve(m.cols() * 26);
  char field[40];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    buffer.clear();
    const double* row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(field, sizeof(field), "%.17g", row[j]);
      if (j != 0) {
        buffer += ' ';
      }
      buffer += field;
    }
    buffer += '\n';
    out << buffer;
  }
  if (!out) {
    throw std::runtime_error("write_matrix_file: write to " + path + " failed");
  }
}

std::vector<graph::NetworkInstance> load_dataset(const std::string& manifest_path) {
  const DatasetManifest manifest = read_manifest(manifest_path);
  const std::filesystem::path base =
      std::filesystem::path(manifest_path).parent_path();

  std::vector<graph::NetworkInstance> instances;
  instances.reserve(manifest.records.size());
  for (const auto& record : manifest.records) {
    const std::string structural_path = resolve(base, record.structural_path);
    const std::string functional_path = resolve(base, record.functional_path);

    graph::NetworkInstance instance;
    instance.id = record.id;
    instance.label = record.label;
    instance.structural =
        load_matrix_checked(structural_path, record.id, manifest.n);
    instance.functional =
        load_matrix_checked(functional_path, record.id, manifest.n);
    try {
      graph::validate(instance);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("load_dataset: ") + e.what() +
                               " (structural: " + structural_path +
                               ", functional: " + functional_path + ")");
    }
    instances.push_back(std::move(instance));
  }
  return instances;
}

std::string save_dataset(const std::vector<graph::NetworkInstance>& instances,
                         const std::string& dir,
                         const std::map<std::string, std::string>& metadata) {
  if (instances.empty()) {
    throw std::invalid_argument("save_dataset: no instances given");
  }
  const std::size_t n = instances.front().structural.rows();
  std::set<std::string> seen;
  for (const auto& instance : instances) {
    require_safe_id(instance.id);
    if (!seen.insert(instance.id).second) {
      throw std::invalid_argument("save_dataset: duplicate id '" +
                                  instance.id + "'");
    }
    if (instance.structural.rows() != n) {
      throw std::invalid_argument(
          "save_dataset: instance " + instance.id +
          " has a different node count than the first instance");
    }
  }

  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);

  DatasetManifest manifest;
  manifest.n = n;
  manifest.metadata = metadata;
  for (const auto& instance : instances) {
    ManifestRecord record;
    record.id = instance.id;
    record.structural_path = instance.id + "_structural.txt";
    record.functional_path = instance.id + "_functional.txt";
    record.label = instance.label;
    write_matrix_file(instance.structural,
                      (base / record.structural_path).string());
    write_matrix_file(instance.functional,
                      (base / record.functional_path).string());
    manifest.records.push_back(std::move(record));
  }

  const std::string manifest_path = (base / "manifest.json").string();
  write_manifest(manifest, manifest_path);
  return manifest_path;
}

}  // namespace scpgcn::dataio
