#pragma once

// Bag enumeration, instance labeling and the on-disk dataset table.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fourops/engine.hpp"
#include "fourops/solver.hpp"

namespace fourops {

enum class Difficulty : std::uint8_t { Unsolvable, Easy, Medium, Hard };

inline constexpr std::size_t kDifficultyCount = 4;

/// U, E, M or H.
char difficulty_code(Difficulty d);
std::optional<Difficulty> difficulty_from_code(char c);
std::string_view difficulty_name(Difficulty d);

/// Unsolvable when absent; 0-2 Easy, 3-4 Medium, 5 Hard. Throws
/// std::out_of_range for anything else.
Difficulty difficulty_label(std::optional<int> min_ops);

inline constexpr Value kTargetLo = 100;
inline constexpr Value kTargetHi = 999;
inline constexpr std::size_t kBagCount = 3861;

/// Five values from 1..9 (with repetition) plus one of 25, 50, 75. Ordered by
/// the small multiset, then the large value.
std::vector<Bag> enumerate_bags();

struct InstanceRecord {
  int bag_id = 0;
  std::array<Value, 6> bag{};  // n1..n5, big
  Value target = 0;
  bool solvable = false;
  int min_ops = -1;
  Difficulty difficulty = Difficulty::Unsolvable;
  int subset_size = -1;
  int n_min_subsets = 0;
  Value max_intermediate = -1;
  int op_add = 0;
  int op_sub = 0;
  int op_mul = 0;
  int op_div = 0;
  std::string witness;

  Bag as_bag() const { return Bag(std::vector<Value>(bag.begin(), bag.end())); }
  friend bool operator==(const InstanceRecord&, const InstanceRecord&) = default;
};

InstanceRecord label_instance(int bag_id, const SubsetTable& table, Value target);
InstanceRecord label_instance(int bag_id, const Bag& bag, Value target);

inline constexpr std::string_view kDatasetHeader =
    "bag_id,n1,n2,n3,n4,n5,big,target,solvable,min_ops,difficulty,subset_size,"
    "n_min_subsets,max_intermediate,op_add,op_sub,op_mul,op_div,witness";

void append_record(std::string& out, const InstanceRecord& r);

class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses one data row; `line_no` is only used for error reporting.
InstanceRecord parse_record(std::string_view line, std::size_t line_no);

struct IndexedBag {
  int id = 0;
  Bag bag;
};

/// Bags with ids in [lo, hi] from enumerate_bags().
std::vector<IndexedBag> bag_slice(int lo, int hi);

struct PerBagSummary {
  int min = 0;
  int max = 0;
  double mean = 0.0;
  /// 0%, 10%, ..., 100% quantiles (lower nearest rank).
  std::array<int, 11> deciles{};
};

struct GenerationStats {
  std::uint64_t total = 0;
  std::array<std::uint64_t, kDifficultyCount> label_counts{};
  std::uint64_t solvable = 0;
  double solvable_fraction = 0.0;
  std::size_t bag_count = 0;
  PerBagSummary per_bag;
  double wall_seconds = 0.0;
};

/// Labels every (bag, target) pair and writes the table to `output`.
/// Output bytes do not depend on `workers`. The file is written to a
/// temporary sibling and renamed on success; on failure nothing is left at
/// `output` and IoError is thrown.
GenerationStats generate_dataset(std::span<const IndexedBag> bags, Value target_lo, Value target_hi,
                                 const std::filesystem::path& output, unsigned workers);

/// Streams every data row of a dataset file to `visit`.
/// Throws FormatError (missing or wrong header, malformed row) or IoError.
void read_dataset(const std::filesystem::path& path,
                  const std::function<void(const InstanceRecord&)>& visit);

std::vector<InstanceRecord> load_dataset(const std::filesystem::path& path, bool keep_witness = true);

GenerationStats dataset_stats(const std::filesystem::path& path);

/// Accumulates GenerationStats from records in file order.
class StatsAccumulator {
 public:
  void add(const InstanceRecord& r);
  GenerationStats finish() const;

 private:
  GenerationStats stats_;
  std::vector<int> per_bag_solvable_;
  int current_bag_ = -1;
};

}  // namespace fourops
