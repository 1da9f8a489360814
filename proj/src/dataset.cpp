#include "tabsynth/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tabsynth/csv.hpp"
#include "tabsynth/errors.hpp"

namespace tabsynth {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Numeric labels sort by value, anything else lexicographically.
std::vector<std::string> make_vocabulary(const std::set<std::string>& labels) {
  std::vector<std::string> vocab(labels.begin(), labels.end());
  const bool numeric = std::all_of(vocab.begin(), vocab.end(), [](const std::string& s) {
    return parse_double(s).has_value();
  });
  if (numeric) {
    std::stable_sort(vocab.begin(), vocab.end(), [](const std::string& a, const std::string& b) {
      return *parse_double(a) < *parse_double(b);
    });
  }
  return vocab;
}

int lookup(const std::vector<std::string>& vocab, std::string_view label, const std::string& column) {
  const auto it = std::find(vocab.begin(), vocab.end(), label);
  if (it == vocab.end()) {
    throw DataError("unknown category '" + std::string(label) + "' in column '" + column + "'");
  }
  return static_cast<int>(it - vocab.begin());
}

}  // namespace

std::string_view to_string(TaskKind task) {
  switch (task) {
    case TaskKind::kBinClass: return "binclass";
    case TaskKind::kMultiClass: return "multiclass";
    case TaskKind::kRegression: return "regression";
  }
  return "?";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "?";
}

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kNumerical: return "numerical";
    case ColumnKind::kCategorical: return "categorical";
    case ColumnKind::kTarget: return "target";
  }
  return "?";
}

TaskKind parse_task(std::string_view s) {
  if (s == "binclass") return TaskKind::kBinClass;
  if (s == "multiclass") return TaskKind::kMultiClass;
  if (s == "regression") return TaskKind::kRegression;
  throw DataError("unknown task kind '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
  s = trim(s);
  if (s == "train") return Split::kTrain;
  if (s == "validation" || s == "val") return Split::kValidation;
  if (s == "test") return Split::kTest;
  throw DataError("unknown split tag '" + std::string(s) + "'");
}

ColumnKind parse_column_kind(std::string_view s) {
  if (s == "numerical") return ColumnKind::kNumerical;
  if (s == "categorical") return ColumnKind::kCategorical;
  if (s == "target") return ColumnKind::kTarget;
  throw DataError("unknown column kind '" + std::string(s) + "'");
}

int Schema::class_code(std::string_view label) const { return lookup(target_vocabulary, label, target); }

int Schema::category_code(std::size_t feature, std::string_view label) const {
  return lookup(categorical.at(feature).vocabulary, label, categorical.at(feature).name);
}

bool Schema::same_layout(const Schema& other) const {
  if (task != other.task || target != other.target || numerical != other.numerical) return false;
  if (categorical.size() != other.categorical.size()) return false;
  for (std::size_t i = 0; i < categorical.size(); ++i) {
    if (categorical[i].name != other.categorical[i].name ||
        categorical[i].vocabulary != other.categorical[i].vocabulary) {
      return false;
    }
  }
  return target_vocabulary == other.target_vocabulary;
}

Metadata parse_metadata(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("metadata is not valid JSON: ") + e.what());
  }
  static const std::set<std::string> kKeys = {"task", "columns", "split_column", "split_seed"};
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.contains(key)) throw DataError("unknown metadata key '" + key + "'");
  }
  Metadata meta;
  try {
    meta.schema.task = parse_task(j.at("task").get<std::string>());
    std::set<std::string> seen;
    for (const auto& c : j.at("columns")) {
      for (const auto& [key, _] : c.items()) {
        if (key != "name" && key != "kind") throw DataError("unknown column metadata key '" + key + "'");
      }
      ColumnSpec spec{c.at("name").get<std::string>(), parse_column_kind(c.at("kind").get<std::string>())};
      if (!seen.insert(spec.name).second) throw DataError("duplicate column '" + spec.name + "' in metadata");
      meta.schema.columns.push_back(std::move(spec));
    }
    if (j.contains("split_column")) meta.schema.split_column = j["split_column"].get<std::string>();
    if (j.contains("split_seed")) meta.split_seed = j["split_seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed metadata: ") + e.what());
  }
  const auto targets = std::count_if(meta.schema.columns.begin(), meta.schema.columns.end(),
                                     [](const ColumnSpec& c) { return c.kind == ColumnKind::kTarget; });
  if (targets != 1) throw DataError("metadata must declare exactly one target column");
  return meta;
}

Metadata load_metadata(const std::filesystem::path& path) { return parse_metadata(read_file(path)); }

TabularDataset TabularDataset::select(const std::vector<std::size_t>& rows) const {
  TabularDataset out;
  out.schema = schema;
  out.numerical.resize(static_cast<Eigen::Index>(rows.size()), numerical.cols());
  out.categorical.assign(categorical.size(), {});
  for (auto& col : out.categorical) col.reserve(rows.size());
  out.target.reserve(rows.size());
  out.split.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    if (r >= num_rows()) throw std::out_of_range("row index out of range");
    out.numerical.row(static_cast<Eigen::Index>(i)) = numerical.row(static_cast<Eigen::Index>(r));
    for (std::size_t c = 0; c < categorical.size(); ++c) out.categorical[c].push_back(categorical[c][r]);
    out.target.push_back(target[r]);
    out.split.push_back(split[r]);
  }
  return out;
}

TabularDataset TabularDataset::subset(Split which) const {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < num_rows(); ++r) {
    if (split[r] == which) rows.push_back(r);
  }
  return select(rows);
}

std::vector<std::size_t> TabularDataset::class_counts() const {
  std::vector<std::size_t> counts(schema.num_classes(), 0);
  for (double y : target) ++counts.at(static_cast<std::size_t>(y));
  return counts;
}

void TabularDataset::validate() const {
  const std::size_t n = num_rows();
  if (static_cast<std::size_t>(numerical.rows()) != n || static_cast<std::size_t>(numerical.cols()) != num_numerical()) {
    throw DataError("numerical block shape does not match the schema");
  }
  if (!numerical.allFinite()) throw DataError("numerical block contains non-finite values");
  if (categorical.size() != num_categorical()) throw DataError("categorical column count mismatch");
  for (std::size_t c = 0; c < categorical.size(); ++c) {
    if (categorical[c].size() != n) throw DataError("categorical column length mismatch");
    const auto k = static_cast<std::int32_t>(schema.categorical[c].vocabulary.size());
    for (std::int32_t code : categorical[c]) {
      if (code < 0 || code >= k) throw DataError("categorical code out of vocabulary in " + schema.categorical[c].name);
    }
  }
  if (split.size() != n) throw DataError("split tag count mismatch");
  for (double y : target) {
    if (!std::isfinite(y)) throw DataError("non-finite target value");
    if (is_classification(schema.task)) {
      if (y < 0 || y >= static_cast<double>(schema.num_classes()) || y != std::floor(y)) {
        throw DataError("class code out of range");
      }
    }
  }
}

TabularDataset parse_csv_dataset(std::string_view csv_text, const Metadata& meta, const Schema* reference) {
  const std::vector<csv::Row> rows = csv::parse(csv_text);
  if (rows.empty()) throw DataError("csv has no header row");
  const csv::Row& header = rows.front();

  std::map<std::string, ColumnKind> declared;
  for (const auto& c : meta.schema.columns) declared.emplace(c.name, c.kind);

  TabularDataset data;
  Schema& schema = data.schema;
  schema.task = meta.schema.task;
  schema.split_column = meta.schema.split_column;

  // Per CSV column: which slot it feeds.
  enum class Slot { kNumerical, kCategorical, kTarget, kSplit };
  std::vector<std::pair<Slot, std::size_t>> slots;
  std::set<std::string> found;
  for (const std::string& raw_name : header) {
    const std::string name(trim(raw_name));
    if (!found.insert(name).second) throw DataError("duplicate csv column '" + name + "'");
    if (meta.schema.split_column && name == *meta.schema.split_column) {
      slots.emplace_back(Slot::kSplit, 0);
      continue;
    }
    const auto it = declared.find(name);
    if (it == declared.end()) throw DataError("csv column '" + name + "' is not described by the metadata");
    schema.columns.push_back({name, it->second});
    switch (it->second) {
      case ColumnKind::kNumerical:
        slots.emplace_back(Slot::kNumerical, schema.numerical.size());
        schema.numerical.push_back(name);
        break;
      case ColumnKind::kCategorical:
        slots.emplace_back(Slot::kCategorical, schema.categorical.size());
        schema.categorical.push_back({name, {}});
        break;
      case ColumnKind::kTarget:
        slots.emplace_back(Slot::kTarget, 0);
        schema.target = name;
        break;
    }
  }
  for (const auto& c : meta.schema.columns) {
    if (!found.contains(c.name)) throw DataError("metadata column '" + c.name + "' missing from csv header");
  }
  if (meta.schema.split_column && !found.contains(*meta.schema.split_column)) {
    throw DataError("split column '" + *meta.schema.split_column + "' missing from csv header");
  }
  if (reference != nullptr) {
    if (reference->task != schema.task || reference->numerical != schema.numerical ||
        reference->target != schema.target || reference->categorical.size() != schema.categorical.size()) {
      throw DataError("csv schema does not match the reference schema");
    }
    for (std::size_t i = 0; i < schema.categorical.size(); ++i) {
      if (reference->categorical[i].name != schema.categorical[i].name) {
        throw DataError("csv schema does not match the reference schema");
      }
      schema.categorical[i].vocabulary = reference->categorical[i].vocabulary;
    }
    schema.target_vocabulary = reference->target_vocabulary;
  }

  const std::size_t n = rows.size() - 1;
  const bool classification = is_classification(schema.task);
  data.numerical.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(schema.numerical.size()));
  std::vector<std::vector<std::string>> cat_labels(schema.categorical.size(), std::vector<std::string>(n));
  std::vector<std::string> target_labels(classification ? n : 0);
  data.target.assign(n, 0.0);
  std::vector<std::optional<Split>> tags(n);

  std::vector<std::string> missing;
  std::size_t missing_count = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const csv::Row& row = rows[r + 1];
    const std::size_t line = r + 2;
    if (row.size() != header.size()) {
      throw DataError("csv line " + std::to_string(line) + ": expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(row.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string_view field = trim(row[c]);
      const std::string column = std::string(trim(header[c]));
      if (field.empty()) {
        if (++missing_count <= 5) missing.push_back("line " + std::to_string(line) + " column '" + column + "'");
        continue;
      }
      const auto [slot, index] = slots[c];
      switch (slot) {
        case Slot::kNumerical: {
          const auto v = parse_double(field);
          if (!v) {
            throw DataError("csv line " + std::to_string(line) + " column '" + column + "': '" + std::string(field) +
                            "' is not a finite number");
          }
          data.numerical(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(index)) = *v;
          break;
        }
        case Slot::kCategorical:
          cat_labels[index][r] = std::string(field);
          break;
        case Slot::kTarget:
          if (classification) {
            target_labels[r] = std::string(field);
          } else {
            const auto v = parse_double(field);
            if (!v) {
              throw DataError("csv line " + std::to_string(line) + " column '" + column + "': '" +
                              std::string(field) + "' is not a finite number");
            }
            data.target[r] = *v;
          }
          break;
        case Slot::kSplit:
          try {
            tags[r] = parse_split(field);
          } catch (const DataError& e) {
            throw DataError("csv line " + std::to_string(line) + ": " + e.what());
          }
          break;
      }
    }
  }
  if (missing_count > 0) {
    std::string msg = std::to_string(missing_count) + " missing value(s); first at ";
    for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : "") + missing[i];
    throw DataError(msg);
  }

  for (std::size_t c = 0; c < schema.categorical.size(); ++c) {
    auto& spec = schema.categorical[c];
    if (reference == nullptr) {
      spec.vocabulary = make_vocabulary(std::set<std::string>(cat_labels[c].begin(), cat_labels[c].end()));
    }
    data.categorical.emplace_back(n);
    for (std::size_t r = 0; r < n; ++r) data.categorical[c][r] = lookup(spec.vocabulary, cat_labels[c][r], spec.name);
  }
  if (classification) {
    if (reference == nullptr) {
      schema.target_vocabulary = make_vocabulary(std::set<std::string>(target_labels.begin(), target_labels.end()));
    }
    for (std::size_t r = 0; r < n; ++r) data.target[r] = lookup(schema.target_vocabulary, target_labels[r], schema.target);
    if (schema.task == TaskKind::kBinClass && schema.target_vocabulary.size() > 2) {
      throw DataError("binclass target has " + std::to_string(schema.target_vocabulary.size()) + " labels");
    }
  }

  data.split.resize(n);
  if (schema.split_column) {
    for (std::size_t r = 0; r < n; ++r) data.split[r] = *tags[r];
  } else {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(meta.split_seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n)));
    for (std::size_t i = 0; i < n; ++i) {
      data.split[order[i]] = i < n_train ? Split::kTrain : (i < n_train + n_val ? Split::kValidation : Split::kTest);
    }
  }
  data.validate();
  return data;
}

TabularDataset load_csv(const std::filesystem::path& path, const Metadata& meta, const Schema* reference) {
  return parse_csv_dataset(read_file(path), meta, reference);
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string to_csv(const TabularDataset& data) {
  const Schema& schema = data.schema;
  std::string out;
  csv::Row header;
  for (const auto& c : schema.columns) header.push_back(c.name);
  out += csv::format_row(header) + "\n";

  // Map column order to feature indices.
  std::vector<std::pair<ColumnKind, std::size_t>> slots;
  std::size_t num_i = 0;
  std::size_t cat_i = 0;
  for (const auto& c : schema.columns) {
    if (c.kind == ColumnKind::kNumerical) slots.emplace_back(c.kind, num_i++);
    else if (c.kind == ColumnKind::kCategorical) slots.emplace_back(c.kind, cat_i++);
    else slots.emplace_back(c.kind, 0);
  }
  csv::Row row(slots.size());
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    for (std::size_t c = 0; c < slots.size(); ++c) {
      const auto [kind, idx] = slots[c];
      switch (kind) {
        case ColumnKind::kNumerical:
          row[c] = format_number(data.numerical(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(idx)));
          break;
        case ColumnKind::kCategorical:
          row[c] = schema.categorical[idx].vocabulary.at(static_cast<std::size_t>(data.categorical[idx][r]));
          break;
        case ColumnKind::kTarget:
          row[c] = is_classification(schema.task)
                       ? schema.target_vocabulary.at(static_cast<std::size_t>(data.target[r]))
                       : format_number(data.target[r]);
          break;
      }
    }
    out += csv::format_row(row) + "\n";
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const TabularDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_csv(data);
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace tabsynth
