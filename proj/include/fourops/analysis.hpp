#pragma once

// Feature extraction, baseline classifiers and the subset-size rule.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fourops/dataset.hpp"

namespace fourops {

class NotSolvable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Degenerate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArityMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Task : std::uint8_t { Solvability, Difficulty };
enum class FeatureSet : std::uint8_t { Baseline, BaselineStructural, SubsetSizeRule };

std::string_view task_name(Task t);
std::string_view feature_set_name(FeatureSet f);
std::optional<Task> parse_task(std::string_view s);
std::optional<FeatureSet> parse_feature_set(std::string_view s);

/// Names of the solver-independent bag/target statistics, in emission order.
std::span<const std::string_view> baseline_feature_names();
/// subset_size, n_min_subsets, max_intermediate, op_add, op_sub, op_mul, op_div.
std::span<const std::string_view> structural_feature_names();
std::vector<std::string> feature_names(FeatureSet f);

/// Bag must be dataset-shaped (five small values then the large one).
std::vector<double> baseline_features(const Bag& bag, Value target);
/// Throws NotSolvable for unsolvable records.
std::vector<double> structural_features(const InstanceRecord& record);
/// Feature row for any record. The structural part of an unsolvable record
/// uses the table's sentinels (-1, 0) rather than throwing.
std::vector<double> extract_features(const InstanceRecord& record, FeatureSet f);

/// 1..3 Easy, 4..5 Medium, 6 Hard, absent Unsolvable. Throws
/// std::out_of_range outside 1..6.
Difficulty difficulty_from_subset_size(std::optional<int> subset_size);

std::size_t class_count(Task t);
/// Class index of a record: solvability 0 = unsolvable, 1 = solvable;
/// difficulty follows U, E, M, H.
int class_of(const InstanceRecord& r, Task t);
std::string_view class_name(Task t, int cls);

struct Split {
  std::vector<std::uint32_t> train;  // row indices
  std::vector<std::uint32_t> test;
  std::vector<int> test_bags;  // sorted
};

/// Partitions bags (never rows) with a seeded shuffle. The test side gets
/// round(test_fraction * distinct bags) bags.
Split split_by_bag(std::span<const InstanceRecord> data, double test_fraction, std::uint64_t seed);

struct Hyperparams {
  double learning_rate = 0.1;
  double l2 = 1e-4;
  int max_epochs = 500;
  double grad_tolerance = 1e-6;
  std::uint64_t seed = 42;
};

enum class ModelKind : std::uint8_t { BinaryLogistic, MultinomialLogistic, SubsetSizeRule };
std::string_view model_kind_name(ModelKind k);

struct ModelParams {
  ModelKind kind = ModelKind::BinaryLogistic;
  Task task = Task::Solvability;
  FeatureSet features = FeatureSet::Baseline;
  std::uint64_t seed = 42;
  /// Features kept after dropping those constant on the training split.
  std::vector<std::string> feature_names;
  std::vector<std::size_t> feature_index;  // positions in extract_features()
  std::vector<double> mean;
  std::vector<double> stddev;
  /// One row per output (1 for binary, K for multinomial): bias then weights.
  std::vector<std::vector<double>> coef;
  int epochs_run = 0;
  std::vector<double> loss_history;  // accepted steps only

  friend bool operator==(const ModelParams& a, const ModelParams& b);
};

/// Dense standardized design matrix over selected rows.
struct Design {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> x;    // row-major
  std::vector<int> labels;  // class index per row
};

/// Regularized mean cross-entropy and its gradient, laid out like
/// ModelParams::coef flattened row-major. Binary when `outputs` == 1.
double logistic_loss(const Design& d, std::span<const double> params, std::size_t outputs,
                     double l2, std::vector<double>* gradient);

ModelParams train_binary_logistic(std::span<const InstanceRecord> data, std::span<const std::uint32_t> rows,
                                  FeatureSet features, const Hyperparams& hp = {});
ModelParams train_difficulty_baseline(std::span<const InstanceRecord> data,
                                      std::span<const std::uint32_t> rows, const Hyperparams& hp = {});
/// Multinomial logistic on any learned feature set.
ModelParams train_multinomial_logistic(std::span<const InstanceRecord> data,
                                       std::span<const std::uint32_t> rows, FeatureSet features,
                                       const Hyperparams& hp = {});
ModelParams subset_size_rule_model();

int predict(const ModelParams& model, const InstanceRecord& record);

struct Metrics {
  Task task = Task::Difficulty;
  std::size_t classes = 0;
  std::uint64_t total = 0;
  double accuracy = 0.0;
  std::vector<double> precision;  // NaN-free: 0 when nothing predicted
  std::vector<double> recall;     // 0 when the class has no support
  std::vector<std::uint64_t> support;
  std::vector<std::vector<std::uint64_t>> confusion;  // [true][predicted]
};

/// Throws ArityMismatch when `features` differs from the model's feature set,
/// EmptyData when there are no rows.
Metrics evaluate(const ModelParams& model, std::span<const InstanceRecord> data,
                 std::span<const std::uint32_t> rows, FeatureSet features);
Metrics evaluate(const ModelParams& model, std::span<const InstanceRecord> data, FeatureSet features);

/// Scores an explicit prediction vector (used for reference classifiers).
Metrics score_predictions(Task task, std::span<const int> truth, std::span<const int> predicted);

void save_model(const ModelParams& model, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);
std::string format_model(const ModelParams& model);
ModelParams parse_model(std::string_view text);

}  // namespace fourops
