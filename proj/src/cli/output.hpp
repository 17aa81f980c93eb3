#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "svarkit/numeric.hpp"

namespace svarkit::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kSchema = "svarkit.result.v1";

/// Shortest round-trip decimal, identical to the JSON rendering.
std::string num(double x);

json to_json(const Matrix& m);
json to_json(const Vector& v);
json to_json(const std::vector<Matrix>& ms);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  void write(const std::filesystem::path& path) const;
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_json(const std::filesystem::path& path, const json& j);

}  // namespace svarkit::cli
