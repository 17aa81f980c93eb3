#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "svarkit/datamodel.hpp"
#include "svarkit/ident.hpp"

namespace svarkit::cli {

/// Bad flag value detected after parsing; reported as a usage error.
struct UsageError : std::runtime_error {
  UsageError(std::string flag, const std::string& what)
      : std::runtime_error(what), flag(std::move(flag)) {}
  std::string flag;
};

struct DataOptions {
  std::string input;
  bool no_header = false;
  int index_col = -1;
  std::string transform;
};

TimeSeriesDataset load_dataset(const DataOptions& o);

/// "a,b;c,d" -> 2x2 (rows split by ';', entries by ',').
Matrix parse_matrix(const std::string& text, const std::string& flag);
/// Lag matrices separated by '|'.
std::vector<Matrix> parse_matrices(const std::string& text, const std::string& flag);
Vector parse_vector(const std::string& text, const std::string& flag);
/// Headerless numeric CSV.
Matrix read_matrix_file(const std::string& path);

/// Variable reference by name or 0-based position.
int variable_index(const TimeSeriesDataset& ds, const std::string& ref, const std::string& flag);
std::vector<int> variable_list(const TimeSeriesDataset& ds, const std::string& text,
                               const std::string& flag);

/// Lines "eq <var> 0", "sign <var> +|-" and optionally "shock <k>"; '#' comments.
SignRestrictionSet read_restrictions(const std::string& path, const TimeSeriesDataset& ds);

}  // namespace svarkit::cli
