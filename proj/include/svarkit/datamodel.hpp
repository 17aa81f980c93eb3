#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "svarkit/numeric.hpp"

namespace svarkit {

/// T x d observations, rows are time.
class TimeSeriesDataset {
 public:
  /// Validates shape, finiteness and name uniqueness. Empty names are
  /// replaced by generated labels v1..vd.
  TimeSeriesDataset(Matrix values, std::vector<std::string> names = {},
                    std::optional<std::vector<std::string>> index = std::nullopt);

  const Matrix& values() const { return values_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::optional<std::vector<std::string>>& index() const { return index_; }

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }

 private:
  Matrix values_;
  std::vector<std::string> names_;
  std::optional<std::vector<std::string>> index_;
};

enum class TransformOp { None, Log, Diff, Demean };

struct ColumnTransform {
  TransformOp op = TransformOp::None;
  int order = 1;  // diff order
};

using TransformSpec = std::vector<ColumnTransform>;

/// Parses "none", "log", "demean", "diff", "diff2", "diff(3)".
ColumnTransform parse_column_transform(const std::string& text);

TimeSeriesDataset read_csv(std::istream& in, bool has_header,
                           std::optional<std::size_t> index_col = std::nullopt);
TimeSeriesDataset load_csv(const std::filesystem::path& path, bool has_header,
                           std::optional<std::size_t> index_col = std::nullopt);

/// Per-column transforms. Differenced columns lose their first k rows; all
/// columns are then truncated from the top to the shortest length, and demean
/// is applied on the aligned rows.
TimeSeriesDataset transform(const TimeSeriesDataset& ds, const TransformSpec& spec);

}  // namespace svarkit
