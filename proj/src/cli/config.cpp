#include "config.hpp"

#include <fstream>
#include <sstream>

#include "svarkit/errors.hpp"

namespace svarkit::cli {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& s, const std::string& flag) {
  const std::string t = trim(s);
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw UsageError(flag, flag + ": not a number: '" + t + "'");
  }
  if (pos != t.size()) throw UsageError(flag, flag + ": not a number: '" + t + "'");
  return v;
}

}  // namespace

TimeSeriesDataset load_dataset(const DataOptions& o) {
  if (o.input.empty()) throw UsageError("--input", "--input is required");
  std::optional<std::size_t> idx;
  if (o.index_col >= 0) idx = static_cast<std::size_t>(o.index_col);
  TimeSeriesDataset ds = load_csv(o.input, !o.no_header, idx);
  if (o.transform.empty()) return ds;
  const auto parts = split(o.transform, ',');
  TransformSpec spec;
  if (parts.size() == 1) {
    spec.assign(ds.cols(), parse_column_transform(trim(parts[0])));
  } else {
    if (static_cast<Index>(parts.size()) != ds.cols())
      throw UsageError("--transform", "--transform needs one entry or one per column");
    for (const auto& p : parts) spec.push_back(parse_column_transform(trim(p)));
  }
  return transform(ds, spec);
}

Matrix parse_matrix(const std::string& text, const std::string& flag) {
  const auto rows = split(text, ';');
  if (rows.empty() || trim(text).empty()) throw UsageError(flag, flag + ": empty matrix");
  std::vector<std::vector<double>> vals;
  for (const auto& r : rows) {
    std::vector<double> row;
    for (const auto& c : split(r, ',')) row.push_back(to_double(c, flag));
    if (!vals.empty() && row.size() != vals[0].size())
      throw UsageError(flag, flag + ": ragged matrix");
    vals.push_back(std::move(row));
  }
  Matrix m(vals.size(), vals[0].size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    for (std::size_t j = 0; j < vals[i].size(); ++j) m(i, j) = vals[i][j];
  return m;
}

std::vector<Matrix> parse_matrices(const std::string& text, const std::string& flag) {
  std::vector<Matrix> out;
  for (const auto& part : split(text, '|')) out.push_back(parse_matrix(part, flag));
  return out;
}

Vector parse_vector(const std::string& text, const std::string& flag) {
  const auto parts = split(text, ',');
  Vector v(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) v(i) = to_double(parts[i], flag);
  return v;
}

Matrix read_matrix_file(const std::string& path) {
  return load_csv(path, false).values();
}

int variable_index(const TimeSeriesDataset& ds, const std::string& ref, const std::string& flag) {
  const std::string r = trim(ref);
  for (std::size_t i = 0; i < ds.names().size(); ++i)
    if (ds.names()[i] == r) return static_cast<int>(i);
  try {
    std::size_t pos = 0;
    const int k = std::stoi(r, &pos);
    if (pos == r.size() && k >= 0 && k < ds.cols()) return k;
  } catch (const std::exception&) {
  }
  throw UsageError(flag, flag + ": unknown variable '" + r + "'");
}

std::vector<int> variable_list(const TimeSeriesDataset& ds, const std::string& text,
                               const std::string& flag) {
  std::vector<int> out;
  if (trim(text).empty()) return out;
  for (const auto& p : split(text, ',')) out.push_back(variable_index(ds, p, flag));
  return out;
}

SignRestrictionSet read_restrictions(const std::string& path, const TimeSeriesDataset& ds) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open restriction file " + path);
  const Index d = ds.cols();
  std::vector<Vector> zs, ss;
  SignRestrictionSet r;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    std::string kind, var, val;
    if (!(ls >> kind)) continue;
    if (!(ls >> var)) throw ParseError(lineno, 2, "restriction line needs a variable");
    if (kind == "shock") {
      r.target_shock = variable_index(ds, var, "--restrictions");
      continue;
    }
    if (!(ls >> val)) throw ParseError(lineno, 3, "restriction line needs a value");
    Vector e = Vector::Zero(d);
    e(variable_index(ds, var, "--restrictions")) = 1.0;
    if (kind == "eq") {
      if (val != "0") throw ParseError(lineno, 3, "equality restrictions must be 0");
      zs.push_back(e);
    } else if (kind == "sign") {
      if (val == "+") ss.push_back(e);
      else if (val == "-") ss.push_back(-e);
      else throw ParseError(lineno, 3, "sign must be + or -");
    } else {
      throw ParseError(lineno, 1, "unknown restriction kind '" + kind + "'");
    }
  }
  r.z = Matrix(d, static_cast<Index>(zs.size()));
  for (std::size_t j = 0; j < zs.size(); ++j) r.z.col(j) = zs[j];
  r.s = Matrix(d, static_cast<Index>(ss.size()));
  for (std::size_t j = 0; j < ss.size(); ++j) r.s.col(j) = ss[j];
  return r;
}

}  // namespace svarkit::cli
