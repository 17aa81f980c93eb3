#include "svarkit/datamodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "svarkit/errors.hpp"

namespace svarkit {

TimeSeriesDataset::TimeSeriesDataset(Matrix values, std::vector<std::string> names,
                                     std::optional<std::vector<std::string>> index)
    : values_(std::move(values)), names_(std::move(names)), index_(std::move(index)) {
  require(values_.rows() >= 1 && values_.cols() >= 1, ErrorKind::ShapeError,
          "dataset needs T >= 1 and d >= 1");
  require(values_.allFinite(), ErrorKind::DomainError, "dataset contains non-finite values");
  if (names_.empty()) {
    for (Index j = 0; j < values_.cols(); ++j) names_.push_back("v" + std::to_string(j + 1));
  }
  require(static_cast<Index>(names_.size()) == values_.cols(), ErrorKind::ShapeError,
          "names must have one entry per column");
  require(std::set<std::string>(names_.begin(), names_.end()).size() == names_.size(),
          ErrorKind::ShapeError, "variable names must be unique");
  if (index_)
    require(static_cast<Index>(index_->size()) == values_.rows(), ErrorKind::ShapeError,
            "index must have one label per row");
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return cells;
}

bool parse_real(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

TimeSeriesDataset read_csv(std::istream& in, bool has_header,
                           std::optional<std::size_t> index_col) {
  std::vector<std::string> names;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t file_row = 0;
  std::size_t width = 0;
  bool first_line = true;
  while (std::getline(in, line)) {
    ++file_row;
    if (first_line && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
      line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split_row(line);
    if (first_line) {
      width = cells.size();
      require(!index_col || *index_col < width, ErrorKind::ShapeError,
              "index column out of range");
    } else if (cells.size() != width) {
      fail(ErrorKind::ShapeError, "ragged row " + std::to_string(file_row) + ": expected " +
                                      std::to_string(width) + " cells, got " +
                                      std::to_string(cells.size()));
    }
    if (first_line && has_header) {
      for (std::size_t c = 0; c < cells.size(); ++c)
        if (!index_col || c != *index_col) names.push_back(cells[c]);
      first_line = false;
      continue;
    }
    first_line = false;
    std::vector<double> row;
    row.reserve(width);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (index_col && c == *index_col) {
        labels.push_back(cells[c]);
        continue;
      }
      double v = 0.0;
      if (!parse_real(cells[c], v))
        throw ParseError(file_row, c + 1,
                         "cannot parse '" + cells[c] + "' as a finite real at row " +
                             std::to_string(file_row) + ", column " + std::to_string(c + 1));
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorKind::ShapeError, "CSV contains no data rows");
  const Index t = static_cast<Index>(rows.size());
  const Index d = static_cast<Index>(rows.front().size());
  require(d >= 1, ErrorKind::ShapeError, "CSV contains no data columns");
  Matrix values(t, d);
  for (Index i = 0; i < t; ++i)
    for (Index j = 0; j < d; ++j) values(i, j) = rows[i][j];
  std::optional<std::vector<std::string>> index;
  if (index_col) index = std::move(labels);
  return TimeSeriesDataset(std::move(values), std::move(names), std::move(index));
}

TimeSeriesDataset load_csv(const std::filesystem::path& path, bool has_header,
                           std::optional<std::size_t> index_col) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  return read_csv(in, has_header, index_col);
}

ColumnTransform parse_column_transform(const std::string& text) {
  const std::string s = trim(text);
  if (s == "none" || s.empty()) return {TransformOp::None, 1};
  if (s == "log") return {TransformOp::Log, 1};
  if (s == "demean") return {TransformOp::Demean, 1};
  if (s.rfind("diff", 0) == 0) {
    std::string rest = s.substr(4);
    if (rest.empty()) return {TransformOp::Diff, 1};
    if (rest.front() == '(' && rest.back() == ')') rest = rest.substr(1, rest.size() - 2);
    int k = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), k);
    require(ec == std::errc() && ptr == rest.data() + rest.size() && k >= 1,
            ErrorKind::DomainError, "bad diff order in '" + s + "'");
    return {TransformOp::Diff, k};
  }
  fail(ErrorKind::DomainError, "unknown transform '" + s + "'");
}

TimeSeriesDataset transform(const TimeSeriesDataset& ds, const TransformSpec& spec) {
  const Index t = ds.rows();
  const Index d = ds.cols();
  require(static_cast<Index>(spec.size()) == d, ErrorKind::ShapeError,
          "transform spec has " + std::to_string(spec.size()) + " entries for " +
              std::to_string(d) + " columns");

  // Each transformed column keeps the original time position of its rows,
  // expressed as an offset from the top.
  std::vector<Vector> cols(d);
  std::vector<Index> offset(d, 0);
  for (Index j = 0; j < d; ++j) {
    const ColumnTransform& ct = spec[j];
    Vector c = ds.values().col(j);
    switch (ct.op) {
      case TransformOp::None:
      case TransformOp::Demean:
        break;
      case TransformOp::Log:
        if ((c.array() <= 0.0).any())
          fail(ErrorKind::DomainError, "log of non-positive value in column '" +
                                           ds.names()[j] + "'");
        c = c.array().log();
        break;
      case TransformOp::Diff: {
        require(ct.order >= 1, ErrorKind::DomainError, "diff order must be >= 1");
        require(ct.order < t, ErrorKind::InsufficientData,
                "diff order exceeds series length");
        for (int k = 0; k < ct.order; ++k) c = (c.tail(c.size() - 1) - c.head(c.size() - 1)).eval();
        offset[j] = ct.order;
        break;
      }
    }
    cols[j] = std::move(c);
  }
  const Index drop = *std::max_element(offset.begin(), offset.end());
  const Index len = t - drop;
  Matrix out(len, d);
  for (Index j = 0; j < d; ++j) {
    out.col(j) = cols[j].segment(drop - offset[j], len);
    if (spec[j].op == TransformOp::Demean) out.col(j).array() -= out.col(j).mean();
  }
  std::optional<std::vector<std::string>> index;
  if (ds.index()) index.emplace(ds.index()->begin() + drop, ds.index()->end());
  return TimeSeriesDataset(std::move(out), ds.names(), std::move(index));
}

}  // namespace svarkit
