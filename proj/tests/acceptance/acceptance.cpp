// Acceptance suite: one PASS/FAIL line per criterion. Runs full-scale dataset
// generation three times, so expect tens of minutes on a single core.
//
// usage: acceptance [work-dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "fourops/analysis.hpp"

using namespace fourops;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Standalone witness checker: its own parser and arithmetic, no engine code.
struct WitnessCheck {
  bool ok = false;
  long long value = 0;
  int ops = 0;
  std::vector<long long> leaves;
};

class WitnessParser {
 public:
  explicit WitnessParser(std::string_view s) : s_(s) {}

  WitnessCheck run() {
    WitnessCheck out;
    long long v = 0;
    if (!expr(v, out) || pos_ != s_.size()) return out;
    out.ok = true;
    out.value = v;
    return out;
  }

 private:
  bool expr(long long& v, WitnessCheck& out) {
    if (pos_ >= s_.size()) return false;
    if (s_[pos_] == '(') {
      ++pos_;
      long long a = 0, b = 0;
      if (!expr(a, out) || pos_ >= s_.size()) return false;
      const char op = s_[pos_++];
      if (!expr(b, out) || pos_ >= s_.size() || s_[pos_++] != ')') return false;
      ++out.ops;
      switch (op) {
        case '+': v = a + b; break;
        case '-': v = a - b; break;
        case '*': v = a * b; break;
        case '/':
          if (a % b != 0) return false;
          v = a / b;
          break;
        default: return false;
      }
      return v >= 1;
    }
    if (s_[pos_] < '1' || s_[pos_] > '9') return false;
    v = 0;
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') v = v * 10 + (s_[pos_++] - '0');
    out.leaves.push_back(v);
    return true;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

bool leaves_fit(std::vector<long long> leaves, const std::array<Value, 6>& bag) {
  std::vector<long long> pool(bag.begin(), bag.end());
  std::sort(leaves.begin(), leaves.end());
  std::sort(pool.begin(), pool.end());
  return std::includes(pool.begin(), pool.end(), leaves.begin(), leaves.end());
}

// Seeded sample of distinct dataset bags (partial Fisher-Yates over ids).
std::vector<Bag> sample_bags(std::size_t n, std::uint64_t seed) {
  const std::vector<Bag> all = enumerate_bags();
  std::vector<std::size_t> ids(all.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::mt19937_64 rng(seed);
  std::vector<Bag> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (ids.size() - i));
    std::swap(ids[i], ids[j]);
    out.push_back(all[ids[i]]);
  }
  return out;
}

bool files_equal(const fs::path& a, const fs::path& b) {
  if (fs::file_size(a) != fs::file_size(b)) return false;
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::vector<char> ba(1 << 20), bb(1 << 20);
  while (fa && fb) {
    fa.read(ba.data(), static_cast<std::streamsize>(ba.size()));
    fb.read(bb.data(), static_cast<std::streamsize>(bb.size()));
    if (fa.gcount() != fb.gcount() || !std::equal(ba.begin(), ba.begin() + fa.gcount(), bb.begin())) return false;
  }
  return true;
}

void bag_space() {
  const auto t0 = Clock::now();
  const std::vector<Bag> bags = enumerate_bags();
  const double secs = seconds_since(t0);
  report(1, "bag_space_cardinality", bags.size() == 3861 && secs < 1.0,
         std::to_string(bags.size()) + " bags in " + fmt("%.3f s", secs));
}

// Criteria 3 (desk scale) and 6 share one sample.
void desk_sample() {
  const auto t0 = Clock::now();
  const std::vector<Bag> bags = sample_bags(100, 20240601);
  std::uint64_t total = 0, solvable = 0, identity_checked = 0, identity_violations = 0, closure_mismatch = 0;
  for (const Bag& bag : bags) {
    const SubsetTable table(bag);
    const ReachMap closure = closure_reach(bag);
    for (Value t = kTargetLo; t <= kTargetHi; ++t) {
      const SolveResult r = solve(table, t);
      ++total;
      const auto it = closure.find(t);
      if (r.solvable != (it != closure.end()) || (r.solvable && *r.min_ops != it->second)) ++closure_mismatch;
      if (!r.solvable) continue;
      ++solvable;
      ++identity_checked;
      const int leaves = static_cast<int>(r.witness->leaf_count());
      if (*r.min_ops != *r.subset_size - 1 || leaves != *r.subset_size) ++identity_violations;
    }
  }
  const double frac = static_cast<double>(solvable) / static_cast<double>(total);
  const double secs = seconds_since(t0);
  report(3, "solvability_rate_desk_scale", frac >= 0.84 && frac <= 0.90 && secs < 60.0 && closure_mismatch == 0,
         fmt("fraction %.6f", frac) + " over " + std::to_string(total) + " instances in [0.84, 0.90]; " +
             fmt("%.1f s", secs) + "; closure mismatches " + std::to_string(closure_mismatch));
  report(6, "ops_size_identity", identity_violations == 0 && identity_checked > 0,
         std::to_string(identity_checked) + " solvable instances, " + std::to_string(identity_violations) +
             " violations");
}

void oracle_equivalence() {
  const auto t0 = Clock::now();
  const std::vector<Bag> bags = sample_bags(200, 777);
  std::mt19937_64 rng(4242);
  int checked = 0, disagreements = 0;
  for (const Bag& bag : bags) {
    const SubsetTable table(bag);
    for (int k = 0; k < 20; ++k) {
      const Value t = kTargetLo + static_cast<Value>(rng() % (kTargetHi - kTargetLo + 1));
      ++checked;
      if (solve(table, t).min_ops != brute_force_oracle(bag, t)) {
        ++disagreements;
        std::printf("  disagreement: %s target %lld\n", bag.to_string().c_str(), static_cast<long long>(t));
      }
    }
  }
  report(4, "oracle_equivalence", disagreements == 0 && checked == 4000,
         std::to_string(checked) + " instances, " + std::to_string(disagreements) + " disagreements, " +
             fmt("%.1f s", seconds_since(t0)));
}

void formulation_equivalence() {
  const std::vector<Bag> bags = sample_bags(200, 31337);
  int disagreements = 0;
  std::size_t values = 0;
  for (const Bag& bag : bags) {
    const ReachMap dp = SubsetTable(bag).reach();
    const ReachMap cl = closure_reach(bag);
    values += dp.size();
    if (dp != cl) ++disagreements;
  }
  report(5, "formulation_equivalence", disagreements == 0,
         "200 bags, " + std::to_string(values) + " reachable values, " + std::to_string(disagreements) +
             " disagreeing bags");
}

struct FullRun {
  fs::path path;
  GenerationStats stats;
  double seconds = 0;
};

FullRun generate_full(const fs::path& path, unsigned jobs) {
  const auto t0 = Clock::now();
  FullRun run{path, generate_dataset(bag_slice(0, static_cast<int>(kBagCount) - 1), kTargetLo, kTargetHi, path, jobs),
              0};
  run.seconds = seconds_since(t0);
  std::printf("  generated %s with %u worker(s) in %.1f s\n", path.filename().c_str(), jobs, run.seconds);
  std::fflush(stdout);
  return run;
}

void full_dataset_checks(const fs::path& data) {
  std::uint64_t rows = 0, solvable = 0, rule_mismatch = 0, witness_checked = 0, witness_violations = 0;
  read_dataset(data, [&](const InstanceRecord& r) {
    ++rows;
    solvable += r.solvable;
    const std::optional<int> size = r.solvable ? std::optional<int>(r.subset_size) : std::nullopt;
    if (difficulty_from_subset_size(size) != r.difficulty) ++rule_mismatch;
    if (!r.solvable) return;
    ++witness_checked;
    const WitnessCheck w = WitnessParser(r.witness).run();
    if (!w.ok || w.value != r.target || !leaves_fit(w.leaves, r.bag) || w.ops != r.min_ops) {
      if (++witness_violations <= 5) std::printf("  bad witness row: target %lld %s\n", static_cast<long long>(r.target), r.witness.c_str());
    }
  });
  const double frac = static_cast<double>(solvable) / static_cast<double>(rows);
  report(3, "solvability_rate_full", frac >= 0.855 && frac <= 0.885,
         fmt("fraction %.6f", frac) + " (" + std::to_string(solvable) + "/" + std::to_string(rows) +
             ") in [0.855, 0.885]");
  report(7, "subset_size_sufficiency", rule_mismatch == 0 && rows == 3474900,
         std::to_string(rows) + " rows, " + std::to_string(rule_mismatch) + " mismatches" +
             fmt(", accuracy %.6f", 1.0 - static_cast<double>(rule_mismatch) / static_cast<double>(rows)));
  report(8, "witness_validity", witness_violations == 0 && witness_checked >= 100000,
         std::to_string(witness_checked) + " solvable rows checked, " + std::to_string(witness_violations) +
             " violations");
}

double gradient_check(std::span<const InstanceRecord> data, const ModelParams& m, std::size_t outputs) {
  Design d;
  d.cols = m.feature_index.size();
  for (std::size_t i = 0; i < data.size() && d.rows < 3000; i += 997, ++d.rows) {
    const std::vector<double> f = extract_features(data[i], m.features);
    for (std::size_t j = 0; j < d.cols; ++j) d.x.push_back((f[m.feature_index[j]] - m.mean[j]) / m.stddev[j]);
    d.labels.push_back(class_of(data[i], m.task));
  }
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal(0.0, 0.5);
  std::vector<double> p(outputs * (d.cols + 1));
  for (double& v : p) v = normal(rng);
  std::vector<double> grad;
  logistic_loss(d, p, outputs, 1e-4, &grad);
  double worst = 0;
  const double h = 1e-5;
  for (std::size_t j = 0; j < p.size(); ++j) {
    std::vector<double> hi = p, lo = p;
    hi[j] += h;
    lo[j] -= h;
    const double fd = (logistic_loss(d, hi, outputs, 1e-4, nullptr) - logistic_loss(d, lo, outputs, 1e-4, nullptr)) / (2 * h);
    const double denom = std::max({std::abs(fd), std::abs(grad[j]), 1e-8});
    worst = std::max(worst, std::abs(fd - grad[j]) / denom);
  }
  return worst;
}

void baselines(const fs::path& data_path) {
  const auto t0 = Clock::now();
  const std::vector<InstanceRecord> data = load_dataset(data_path, false);
  const Split split = split_by_bag(data, 0.2, 42);

  const ModelParams solv = train_binary_logistic(data, split.train, FeatureSet::Baseline);
  const Metrics ms = evaluate(solv, data, split.test, FeatureSet::Baseline);
  const ModelParams diff = train_difficulty_baseline(data, split.train);
  const Metrics md = evaluate(diff, data, split.test, FeatureSet::Baseline);
  const double easy_recall = md.recall[static_cast<std::size_t>(Difficulty::Easy)];
  const double g = std::max(gradient_check(data, solv, 1), gradient_check(data, diff, kDifficultyCount));

  const bool pass = ms.accuracy >= 0.80 && md.accuracy >= 0.60 && easy_recall < 0.5 && g <= 1e-4;
  report(10, "baseline_reproduction", pass,
         fmt("solvability accuracy %.4f (>= 0.80)", ms.accuracy) + fmt(", difficulty accuracy %.4f (>= 0.60)", md.accuracy) +
             fmt(", easy recall %.4f (< 0.5)", easy_recall) + fmt(", gradient rel err %.2e (<= 1e-4)", g) +
             fmt(", %.0f s", seconds_since(t0)));
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "fourops_acceptance";
  fs::create_directories(work);
  const unsigned jobs = std::max(2u, std::thread::hardware_concurrency());

  try {
    bag_space();
    desk_sample();
    oracle_equivalence();
    formulation_equivalence();

    const FullRun a = generate_full(work / "run_a.csv", jobs);
    report(2, "dataset_cardinality", a.stats.total == 3474900,
           std::to_string(a.stats.total) + " rows; " + fmt("%.1f s", a.seconds) + " with " + std::to_string(jobs) +
               " workers on " + std::to_string(std::thread::hardware_concurrency()) + " core(s)");
    full_dataset_checks(a.path);

    const FullRun b = generate_full(work / "run_b.csv", jobs);
    const bool same_ab = files_equal(a.path, b.path);
    fs::remove(b.path);
    const FullRun c = generate_full(work / "run_c.csv", 1);
    const bool same_ac = files_equal(a.path, c.path);
    fs::remove(c.path);
    report(9, "determinism", same_ab && same_ac,
           std::string("repeat run ") + (same_ab ? "identical" : "DIFFERS") + ", 1-worker run " +
               (same_ac ? "identical" : "DIFFERS"));

    baselines(a.path);
    fs::remove(a.path);
  } catch (const std::exception& e) {
    std::printf("FAIL aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
