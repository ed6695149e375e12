// fourops command-line front end. Links only against the C API.
//
// Exit codes: 0 success, 1 usage error, 2 data or format error,
// 3 violated solver invariant.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fourops/fourops.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Range {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

std::int64_t parse_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw UsageError("bad " + what + ": '" + s + "'");
  }
  if (used != s.size()) throw UsageError("bad " + what + ": '" + s + "'");
  return v;
}

// "lo..hi", inclusive on both ends.
Range parse_range(const std::string& s, const std::string& what) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) throw UsageError(what + " must look like lo..hi");
  Range r{parse_int(s.substr(0, dots), what), parse_int(s.substr(dots + 2), what)};
  if (r.lo > r.hi) throw UsageError(what + ": lo exceeds hi");
  return r;
}

std::vector<std::int64_t> parse_bag(const std::string& s) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(item, "bag value"));
  if (out.empty() || out.size() > 8) throw UsageError("--bag needs 1 to 8 comma-separated values");
  for (auto v : out)
    if (v < 1) throw UsageError("bag values must be positive integers");
  return out;
}

std::string describe_error(fops_status s) {
  std::string msg = fops_status_string(s);
  if (*fops_last_error()) msg += std::string(": ") + fops_last_error();
  return msg;
}

int exit_for(fops_status s) {
  switch (s) {
    case FOPS_OK:
      return kExitOk;
    case FOPS_ERR_INVALID_ARGUMENT:
    case FOPS_ERR_OUT_OF_RANGE:
      return kExitUsage;
    case FOPS_ERR_INTERNAL:
      return kExitInvariant;
    default:
      return kExitData;
  }
}

int report_failure(fops_status s) {
  std::cerr << "error: " << describe_error(s) << "\n";
  return exit_for(s);
}

struct SolverHandle {
  fops_solver* p = nullptr;
  ~SolverHandle() { fops_solver_destroy(p); }
};

struct ReachHandle {
  fops_reach* p = nullptr;
  ~ReachHandle() { fops_reach_destroy(p); }
};

struct DatasetHandle {
  fops_dataset* p = nullptr;
  ~DatasetHandle() { fops_dataset_destroy(p); }
};

struct ModelHandle {
  fops_model* p = nullptr;
  ~ModelHandle() { fops_model_destroy(p); }
};

struct Solved {
  fops_solve_result result{};
  std::string witness;
};

fops_status solve_one(fops_solver* solver, std::int64_t target, Solved& out) {
  char buf[512];
  std::size_t len = 0;
  const fops_status s = fops_solver_solve(solver, target, &out.result, buf, sizeof buf, &len);
  if (s == FOPS_OK) out.witness.assign(buf, len);
  return s;
}

std::string solve_line(const Solved& s, bool witness) {
  if (!s.result.solvable) return "unsolvable";
  std::ostringstream out;
  out << "solvable min_ops=" << s.result.min_ops << " subset_size=" << s.result.subset_size;
  if (witness) out << " witness=" << s.witness;
  return out.str();
}

std::string feature_line(const Solved& s) {
  std::ostringstream out;
  out << "n_min_subsets=" << s.result.n_min_subsets << " max_intermediate=" << s.result.max_intermediate
      << " op_add=" << s.result.op_add << " op_sub=" << s.result.op_sub << " op_mul=" << s.result.op_mul
      << " op_div=" << s.result.op_div;
  return out.str();
}

nlohmann::json solve_json(std::int64_t target, const Solved& s, bool witness) {
  nlohmann::json j;
  j["target"] = target;
  j["solvable"] = s.result.solvable != 0;
  if (s.result.solvable) {
    j["min_ops"] = s.result.min_ops;
    j["subset_size"] = s.result.subset_size;
    j["n_min_subsets"] = s.result.n_min_subsets;
    j["max_intermediate"] = s.result.max_intermediate;
    j["op_add"] = s.result.op_add;
    j["op_sub"] = s.result.op_sub;
    j["op_mul"] = s.result.op_mul;
    j["op_div"] = s.result.op_div;
    if (witness) j["witness"] = s.witness;
  }
  return j;
}

struct SolveArgs {
  std::string bag;
  std::optional<std::int64_t> target;
  bool witness = false;
  std::string all_targets;
  bool json = false;
};

int cmd_solve(const SolveArgs& a) {
  const std::vector<std::int64_t> bag = parse_bag(a.bag);
  if (a.target && !a.all_targets.empty()) throw UsageError("use either --target or --all-targets");
  Range range;
  if (a.target) {
    if (*a.target < 1) throw UsageError("--target must be a positive integer");
    range = {*a.target, *a.target};
  } else if (!a.all_targets.empty()) {
    range = parse_range(a.all_targets, "--all-targets");
    if (range.lo < 1) throw UsageError("targets must be positive integers");
  } else {
    throw UsageError("one of --target or --all-targets is required");
  }

  SolverHandle solver;
  if (auto s = fops_solver_create(bag.data(), bag.size(), &solver.p); s != FOPS_OK) return report_failure(s);

  const bool single = static_cast<bool>(a.target);
  nlohmann::json results = nlohmann::json::array();
  for (std::int64_t t = range.lo; t <= range.hi; ++t) {
    Solved solved;
    if (auto s = solve_one(solver.p, t, solved); s != FOPS_OK) return report_failure(s);
    if (a.json) {
      results.push_back(solve_json(t, solved, a.witness));
    } else if (single) {
      std::cout << solve_line(solved, a.witness) << "\n";
      if (solved.result.solvable) std::cout << feature_line(solved) << "\n";
    } else {
      std::cout << t << ": " << solve_line(solved, a.witness);
      if (solved.result.solvable) std::cout << " " << feature_line(solved);
      std::cout << "\n";
    }
  }
  if (a.json) {
    nlohmann::json out;
    out["bag"] = bag;
    if (single)
      out["result"] = results[0];
    else
      out["results"] = results;
    std::cout << out.dump() << "\n";
  }
  return kExitOk;
}

void print_stats(const fops_dataset_stats& s) {
  std::printf("total %llu\n", static_cast<unsigned long long>(s.total));
  static const char* names[4] = {"unsolvable", "easy", "medium", "hard"};
  for (int i = 0; i < 4; ++i)
    std::printf("label %-10s %llu (%.6f)\n", names[i], static_cast<unsigned long long>(s.label_counts[i]),
                s.total ? static_cast<double>(s.label_counts[i]) / static_cast<double>(s.total) : 0.0);
  std::printf("solvable %llu\n", static_cast<unsigned long long>(s.solvable));
  std::printf("solvable_fraction %.6f\n", s.solvable_fraction);
  std::printf("bags %llu\n", static_cast<unsigned long long>(s.bag_count));
  std::printf("per_bag_solvable min=%d mean=%.3f max=%d\n", s.per_bag_min, s.per_bag_mean, s.per_bag_max);
  std::printf("per_bag_solvable deciles");
  for (int d : s.per_bag_deciles) std::printf(" %d", d);
  std::printf("\n");
}

struct GenerateArgs {
  std::string out;
  unsigned jobs = 0;
  std::string bags;
  std::string targets;
};

int cmd_generate(const GenerateArgs& a) {
  fops_generate_options opt;
  fops_generate_options_init(&opt);
  opt.out_path = a.out.c_str();
  opt.jobs = a.jobs;
  if (!a.bags.empty()) {
    const Range r = parse_range(a.bags, "--bags");
    if (r.lo < 0 || r.hi >= static_cast<std::int64_t>(fops_bag_count()))
      throw UsageError("--bags must lie within 0.." + std::to_string(fops_bag_count() - 1));
    opt.bag_lo = static_cast<int>(r.lo);
    opt.bag_hi = static_cast<int>(r.hi);
  }
  if (!a.targets.empty()) {
    const Range r = parse_range(a.targets, "--targets");
    if (r.lo < 1) throw UsageError("targets must be positive integers");
    opt.target_lo = r.lo;
    opt.target_hi = r.hi;
  }
  fops_dataset_stats stats{};
  if (auto s = fops_generate(&opt, &stats); s != FOPS_OK) return report_failure(s);
  std::printf("wrote %s\n", a.out.c_str());
  print_stats(stats);
  std::printf("wall_seconds %.3f\n", stats.wall_seconds);
  return kExitOk;
}

int cmd_stats(const std::string& in, bool json) {
  fops_dataset_stats stats{};
  if (auto s = fops_dataset_stats_file(in.c_str(), &stats); s != FOPS_OK) return report_failure(s);
  if (json) {
    nlohmann::json j;
    j["total"] = stats.total;
    j["label_counts"] = {{"U", stats.label_counts[0]},
                         {"E", stats.label_counts[1]},
                         {"M", stats.label_counts[2]},
                         {"H", stats.label_counts[3]}};
    j["solvable"] = stats.solvable;
    j["solvable_fraction"] = stats.solvable_fraction;
    j["bags"] = stats.bag_count;
    j["per_bag_solvable"] = {{"min", stats.per_bag_min},
                             {"mean", stats.per_bag_mean},
                             {"max", stats.per_bag_max},
                             {"deciles", std::vector<int>(std::begin(stats.per_bag_deciles),
                                                          std::end(stats.per_bag_deciles))}};
    std::cout << j.dump() << "\n";
  } else {
    print_stats(stats);
  }
  return kExitOk;
}

void print_metrics(const fops_metrics& m) {
  std::printf("accuracy %.6f (%llu rows)\n", m.accuracy, static_cast<unsigned long long>(m.total));
  for (int c = 0; c < m.classes; ++c)
    std::printf("class %-10s support=%llu precision=%.6f recall=%.6f\n", fops_class_name(m.task, c),
                static_cast<unsigned long long>(m.support[c]), m.precision[c], m.recall[c]);
  std::printf("confusion (rows true, columns predicted)\n");
  for (int c = 0; c < m.classes; ++c) {
    std::printf("  %-10s", fops_class_name(m.task, c));
    for (int p = 0; p < m.classes; ++p) std::printf(" %10llu", static_cast<unsigned long long>(m.confusion[c][p]));
    std::printf("\n");
  }
}

struct TrainArgs {
  std::string in;
  std::string task;
  std::string features;
  std::uint64_t seed = 42;
  std::string out;
};

int cmd_train(const TrainArgs& a) {
  fops_train_options opt;
  fops_train_options_init(&opt);
  if (a.task == "solvability")
    opt.task = FOPS_TASK_SOLVABILITY;
  else if (a.task == "difficulty")
    opt.task = FOPS_TASK_DIFFICULTY;
  else
    throw UsageError("--task must be solvability or difficulty");
  if (a.features == "baseline")
    opt.features = FOPS_FEATURES_BASELINE;
  else if (a.features == "baseline+structural")
    opt.features = FOPS_FEATURES_BASELINE_STRUCTURAL;
  else if (a.features == "subset-size-rule")
    opt.features = FOPS_FEATURES_SUBSET_SIZE_RULE;
  else
    throw UsageError("--features must be baseline, baseline+structural or subset-size-rule");
  if (opt.features == FOPS_FEATURES_SUBSET_SIZE_RULE && opt.task != FOPS_TASK_DIFFICULTY)
    throw UsageError("subset-size-rule predicts difficulty only");
  opt.seed = a.seed;

  DatasetHandle data;
  if (auto s = fops_dataset_load(a.in.c_str(), &data.p); s != FOPS_OK) return report_failure(s);
  ModelHandle model;
  fops_train_report report{};
  if (auto s = fops_train(data.p, &opt, &model.p, &report); s != FOPS_OK) {
    std::cerr << "error: " << describe_error(s) << "\n";
    return s == FOPS_ERR_INVALID_ARGUMENT ? kExitUsage : kExitData;
  }
  if (auto s = fops_model_save(model.p, a.out.c_str()); s != FOPS_OK) return report_failure(s);
  std::printf("task %s features %s seed %llu\n", a.task.c_str(), a.features.c_str(),
              static_cast<unsigned long long>(a.seed));
  std::printf("train_rows %llu test_rows %llu test_bags %llu epochs %d final_loss %.6f\n",
              static_cast<unsigned long long>(report.train_rows), static_cast<unsigned long long>(report.test_rows),
              static_cast<unsigned long long>(report.test_bags), report.epochs, report.final_loss);
  std::printf("held-out ");
  print_metrics(report.heldout);
  std::printf("model written to %s\n", a.out.c_str());
  return kExitOk;
}

struct VerifyArgs {
  long long bags = 0;
  long long targets = 0;
  std::uint64_t seed = 0;
  std::string inject_fault;
};

struct Check {
  const char* name;
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  std::string first_failure;

  void fail(const std::string& what) {
    if (violations++ == 0) first_failure = what;
  }
};

std::string bag_text(const std::int64_t* bag) {
  std::string s = "(";
  for (int i = 0; i < 6; ++i) s += (i ? "," : "") + std::to_string(bag[i]);
  return s + ")";
}

int cmd_verify(const VerifyArgs& a) {
  if (a.bags < 1 || a.targets < 1) throw UsageError("--bags and --targets must be at least 1");
  if (!a.inject_fault.empty()) {
    if (a.inject_fault != "inexact-division") throw UsageError("unknown fault '" + a.inject_fault + "'");
    fops_debug_set_fault(1);
  }

  Check oracle{"oracle_agreement"}, witness{"witness_validity"}, identity{"ops_size_identity"},
      formulations{"closure_dp_equivalence"};
  std::mt19937_64 rng(a.seed);
  const std::uint64_t n_bags = fops_bag_count();

  for (long long b = 0; b < a.bags; ++b) {
    std::int64_t bag[6];
    fops_bag_at(static_cast<std::size_t>(rng() % n_bags), bag);
    const std::string where = bag_text(bag);

    SolverHandle solver;
    if (auto s = fops_solver_create(bag, 6, &solver.p); s != FOPS_OK) return report_failure(s);

    ++formulations.checked;
    {
      ReachHandle dp, closure;
      const fops_status s1 = fops_solver_reach(solver.p, &dp.p);
      const fops_status s2 = fops_closure_reach(bag, 6, &closure.p);
      if (s1 != FOPS_OK || s2 != FOPS_OK) {
        formulations.fail(where + ": " + describe_error(s1 != FOPS_OK ? s1 : s2));
      } else if (fops_reach_size(dp.p) != fops_reach_size(closure.p)) {
        formulations.fail(where + ": reachable-set sizes differ");
      } else {
        for (std::size_t i = 0; i < fops_reach_size(dp.p); ++i) {
          std::int64_t v1 = 0, v2 = 0;
          int o1 = 0, o2 = 0;
          fops_reach_entry(dp.p, i, &v1, &o1);
          fops_reach_entry(closure.p, i, &v2, &o2);
          if (v1 != v2 || o1 != o2) {
            formulations.fail(where + ": value " + std::to_string(v1) + " differs");
            break;
          }
        }
      }
    }

    for (long long t = 0; t < a.targets; ++t) {
      const std::int64_t target = 100 + static_cast<std::int64_t>(rng() % 900);
      const std::string inst = where + " target " + std::to_string(target);
      Solved solved;
      ++oracle.checked;
      ++witness.checked;
      ++identity.checked;
      const fops_status st = solve_one(solver.p, target, solved);
      const std::string solve_error = st == FOPS_OK ? std::string() : describe_error(st);
      int expected = -1;
      fops_oracle_min_ops(bag, 6, target, &expected);
      if (st != FOPS_OK) {
        const std::string msg = inst + ": " + solve_error;
        oracle.fail(msg);
        witness.fail(msg);
        identity.fail(msg);
        continue;
      }
      const int got = solved.result.solvable ? solved.result.min_ops : -1;
      if (got != expected)
        oracle.fail(inst + ": solver " + std::to_string(got) + " oracle " + std::to_string(expected));
      if (!solved.result.solvable) continue;
      if (solved.result.min_ops != solved.result.subset_size - 1)
        identity.fail(inst + ": min_ops " + std::to_string(solved.result.min_ops) + " subset_size " +
                      std::to_string(solved.result.subset_size));

      fops_expr_info info{};
      std::int64_t leaves[8];
      std::size_t n_leaves = 0;
      if (auto s = fops_expr_eval(solved.witness.c_str(), &info); s != FOPS_OK) {
        witness.fail(inst + ": " + solved.witness + ": " + describe_error(s));
        continue;
      }
      if (info.value != target) {
        witness.fail(inst + ": " + solved.witness + " evaluates to " + std::to_string(info.value));
        continue;
      }
      if (static_cast<int>(info.leaf_count) - 1 != solved.result.min_ops) {
        witness.fail(inst + ": " + solved.witness + " has the wrong operation count");
        continue;
      }
      if (fops_expr_leaves(solved.witness.c_str(), leaves, 8, &n_leaves) != FOPS_OK ||
          !std::includes(bag, bag + 6, leaves, leaves + n_leaves)) {
        witness.fail(inst + ": " + solved.witness + " uses values outside the bag");
      }
    }
  }

  bool ok = true;
  for (const Check* c : {&oracle, &witness, &identity, &formulations}) {
    const bool pass = c->violations == 0;
    ok = ok && pass;
    std::printf("%s %s checked=%llu violations=%llu", pass ? "PASS" : "FAIL", c->name,
                static_cast<unsigned long long>(c->checked), static_cast<unsigned long long>(c->violations));
    if (!pass) std::printf(" first: %s", c->first_failure.c_str());
    std::printf("\n");
  }
  return ok ? kExitOk : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fourops: exact solver and dataset toolkit for integer arithmetic puzzles"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Solve one bag for a target or a target range");
  solve->add_option("--bag", solve_args.bag, "Comma-separated bag values, e.g. 2,2,2,2,2,50")->required();
  solve->add_option("--target", solve_args.target, "Target value");
  solve->add_flag("--witness", solve_args.witness, "Print the minimal witness");
  solve->add_option("--all-targets", solve_args.all_targets, "Inclusive target range lo..hi");
  solve->add_flag("--json", solve_args.json, "Machine-readable output");

  GenerateArgs gen_args;
  auto* generate = app.add_subcommand("generate", "Label (bag, target) instances into a dataset file");
  generate->add_option("--out", gen_args.out, "Output path")->required();
  generate->add_option("--jobs", gen_args.jobs, "Worker threads (default: hardware concurrency)");
  generate->add_option("--bags", gen_args.bags, "Inclusive bag id range lo..hi");
  generate->add_option("--targets", gen_args.targets, "Inclusive target range lo..hi (default 100..999)");

  std::string stats_in;
  bool stats_json = false;
  auto* stats = app.add_subcommand("stats", "Summarize a dataset file");
  stats->add_option("--in", stats_in, "Dataset path")->required();
  stats->add_flag("--json", stats_json, "Machine-readable output");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train and evaluate a difficulty or solvability model");
  train->add_option("--in", train_args.in, "Dataset path")->required();
  train->add_option("--task", train_args.task, "solvability | difficulty")->required();
  train->add_option("--features", train_args.features, "baseline | baseline+structural | subset-size-rule")
      ->required();
  train->add_option("--seed", train_args.seed, "Split seed (default 42)");
  train->add_option("--out", train_args.out, "Model output path")->required();

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Check solver invariants on random instances");
  verify->add_option("--bags", verify_args.bags, "Number of random bags")->required();
  verify->add_option("--targets", verify_args.targets, "Random targets per bag")->required();
  verify->add_option("--seed", verify_args.seed, "Sampling seed");
  verify->add_option("--inject-fault", verify_args.inject_fault, "Mutation test: inexact-division")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve) return cmd_solve(solve_args);
    if (*generate) return cmd_generate(gen_args);
    if (*stats) return cmd_stats(stats_in, stats_json);
    if (*train) return cmd_train(train_args);
    if (*verify) return cmd_verify(verify_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
