#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabsynth/matrix.hpp"

namespace tabsynth {

enum class TaskKind { kBinClass, kMultiClass, kRegression };
enum class Split : std::uint8_t { kTrain, kValidation, kTest };
enum class ColumnKind { kNumerical, kCategorical, kTarget };

std::string_view to_string(TaskKind task);
std::string_view to_string(Split split);
std::string_view to_string(ColumnKind kind);
TaskKind parse_task(std::string_view s);
Split parse_split(std::string_view s);
ColumnKind parse_column_kind(std::string_view s);

inline bool is_classification(TaskKind task) { return task != TaskKind::kRegression; }

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kNumerical;
};

struct CategoricalSpec {
  std::string name;
  std::vector<std::string> vocabulary;  // code -> label
};

// Column layout and vocabularies. `columns` is the CSV order (split column
// excluded); `numerical`/`categorical` list feature columns in that order.
struct Schema {
  TaskKind task = TaskKind::kBinClass;
  std::vector<ColumnSpec> columns;
  std::vector<std::string> numerical;
  std::vector<CategoricalSpec> categorical;
  std::string target;
  std::vector<std::string> target_vocabulary;  // classification only
  std::optional<std::string> split_column;

  std::size_t num_classes() const { return is_classification(task) ? target_vocabulary.size() : 0; }
  // Throws DataError when the label is not in the target vocabulary.
  int class_code(std::string_view label) const;
  // Throws DataError when the label is not in the vocabulary of categorical feature i.
  int category_code(std::size_t feature, std::string_view label) const;
  bool same_layout(const Schema& other) const;
};

// Metadata sidecar (JSON):
//   {"task": "binclass"|"multiclass"|"regression",
//    "columns": [{"name": "...", "kind": "numerical"|"categorical"|"target"}, ...],
//    "split_column": "split",          // optional; values train/validation/test
//    "split_seed": 0}                  // optional; used when no split column
struct Metadata {
  Schema schema;
  std::uint64_t split_seed = 0;
};

Metadata load_metadata(const std::filesystem::path& path);
Metadata parse_metadata(std::string_view json_text);

class TabularDataset {
 public:
  Schema schema;
  MatrixD numerical;                                // rows x N_num, original units
  std::vector<std::vector<std::int32_t>> categorical;  // one code vector per feature
  std::vector<double> target;                       // regression value or class code
  std::vector<Split> split;

  std::size_t num_rows() const { return target.size(); }
  std::size_t num_numerical() const { return schema.numerical.size(); }
  std::size_t num_categorical() const { return schema.categorical.size(); }

  TabularDataset select(const std::vector<std::size_t>& rows) const;
  TabularDataset subset(Split which) const;
  std::vector<std::size_t> class_counts() const;
  // Checks every invariant; throws DataError on violation.
  void validate() const;
};

// Reads a CSV whose columns are described by `meta`. With `reference`, the
// vocabularies are taken from it and unseen categories are an error;
// otherwise vocabularies are the sorted distinct labels. Rows get split tags
// from the split column, or a seeded 80/10/10 shuffle when there is none.
TabularDataset load_csv(const std::filesystem::path& path, const Metadata& meta,
                        const Schema* reference = nullptr);
TabularDataset parse_csv_dataset(std::string_view csv_text, const Metadata& meta,
                                 const Schema* reference = nullptr);

// Writes the dataset with the schema's column order (no split column).
void write_csv(const std::filesystem::path& path, const TabularDataset& data);
std::string to_csv(const TabularDataset& data);

// Shortest round-trip decimal representation.
std::string format_number(double v);

}  // namespace tabsynth
