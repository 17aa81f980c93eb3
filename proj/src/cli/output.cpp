#include "output.hpp"

#include <cmath>
#include <fstream>

#include "svarkit/errors.hpp"

namespace svarkit::cli {

std::string num(double x) {
  if (!std::isfinite(x)) return "";
  return json(x).dump();
}

json to_json(const Matrix& m) {
  json a = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

json to_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json to_json(const std::vector<Matrix>& ms) {
  json a = json::array();
  for (const Matrix& m : ms) a.push_back(to_json(m));
  return a;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace svarkit::cli
