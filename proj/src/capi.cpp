#include "fourops/fourops.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <thread>

#include "fourops/analysis.hpp"
#include "fourops/dataset.hpp"
#include "fourops/engine.hpp"
#include "fourops/solver.hpp"

using namespace fourops;

struct fops_solver {
  explicit fops_solver(const Bag& bag) : table(bag) {}
  SubsetTable table;
};

struct fops_reach {
  std::vector<std::pair<Value, int>> entries;
};

struct fops_dataset {
  std::vector<InstanceRecord> records;
};

struct fops_model {
  ModelParams params;
};

namespace {

thread_local std::string t_error;
thread_local std::size_t t_position = 0;

fops_status fail(fops_status s, std::string msg, std::size_t position = 0) {
  t_error = std::move(msg);
  t_position = position;
  return s;
}

// Maps the core's exception types onto status codes.
template <typename F>
fops_status guarded(F&& body) {
  try {
    t_error.clear();
    t_position = 0;
    return body();
  } catch (const ParseError& e) {
    return fail(FOPS_ERR_PARSE, e.what(), e.offset());
  } catch (const ConstraintViolation& e) {
    return fail(FOPS_ERR_CONSTRAINT, e.what());
  } catch (const FormatError& e) {
    return fail(FOPS_ERR_FORMAT, e.what(), e.line());
  } catch (const IoError& e) {
    return fail(FOPS_ERR_IO, e.what());
  } catch (const NotSolvable& e) {
    return fail(FOPS_ERR_NOT_SOLVABLE, e.what());
  } catch (const Degenerate& e) {
    return fail(FOPS_ERR_DEGENERATE, e.what());
  } catch (const ArityMismatch& e) {
    return fail(FOPS_ERR_ARITY, e.what());
  } catch (const EmptyData& e) {
    return fail(FOPS_ERR_EMPTY, e.what());
  } catch (const std::overflow_error& e) {
    return fail(FOPS_ERR_OUT_OF_RANGE, e.what());
  } catch (const std::out_of_range& e) {
    return fail(FOPS_ERR_OUT_OF_RANGE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(FOPS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::logic_error& e) {
    return fail(FOPS_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(FOPS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FOPS_ERR_INTERNAL, e.what());
  }
}

Bag make_bag(const int64_t* values, size_t n) {
  if (!values && n) throw std::invalid_argument("bag pointer is null");
  return Bag(std::vector<Value>(values, values + n));
}

fops_status copy_text(const std::string& text, char* buf, size_t capacity, size_t* length) {
  if (length) *length = text.size();
  if (!buf) return FOPS_OK;
  if (capacity < text.size() + 1)
    return fail(FOPS_ERR_BUFFER_TOO_SMALL, "buffer needs " + std::to_string(text.size() + 1) + " bytes");
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return FOPS_OK;
}

void require(const void* p, const char* what) {
  if (!p) throw std::invalid_argument(std::string(what) + " is null");
}

void fill_stats(const GenerationStats& s, fops_dataset_stats* out) {
  *out = {};
  out->total = s.total;
  for (std::size_t i = 0; i < 4; ++i) out->label_counts[i] = s.label_counts[i];
  out->solvable = s.solvable;
  out->solvable_fraction = s.solvable_fraction;
  out->bag_count = s.bag_count;
  out->per_bag_min = s.per_bag.min;
  out->per_bag_max = s.per_bag.max;
  out->per_bag_mean = s.per_bag.mean;
  for (std::size_t i = 0; i < 11; ++i) out->per_bag_deciles[i] = s.per_bag.deciles[i];
  out->wall_seconds = s.wall_seconds;
}

void fill_metrics(const Metrics& m, fops_metrics* out) {
  *out = {};
  out->task = m.task == Task::Solvability ? FOPS_TASK_SOLVABILITY : FOPS_TASK_DIFFICULTY;
  out->classes = static_cast<int>(m.classes);
  out->total = m.total;
  out->accuracy = m.accuracy;
  for (std::size_t c = 0; c < m.classes; ++c) {
    out->precision[c] = m.precision[c];
    out->recall[c] = m.recall[c];
    out->support[c] = m.support[c];
    for (std::size_t p = 0; p < m.classes; ++p) out->confusion[c][p] = m.confusion[c][p];
  }
}

FeatureSet to_feature_set(int f) {
  switch (f) {
    case FOPS_FEATURES_BASELINE:
      return FeatureSet::Baseline;
    case FOPS_FEATURES_BASELINE_STRUCTURAL:
      return FeatureSet::BaselineStructural;
    case FOPS_FEATURES_SUBSET_SIZE_RULE:
      return FeatureSet::SubsetSizeRule;
  }
  throw std::invalid_argument("unknown feature set");
}

}  // namespace

extern "C" {

const char* fops_status_string(fops_status status) {
  switch (status) {
    case FOPS_OK:
      return "ok";
    case FOPS_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case FOPS_ERR_PARSE:
      return "parse error";
    case FOPS_ERR_CONSTRAINT:
      return "constraint violation";
    case FOPS_ERR_OUT_OF_RANGE:
      return "out of range";
    case FOPS_ERR_IO:
      return "i/o error";
    case FOPS_ERR_FORMAT:
      return "format error";
    case FOPS_ERR_NOT_SOLVABLE:
      return "not solvable";
    case FOPS_ERR_DEGENERATE:
      return "degenerate training data";
    case FOPS_ERR_ARITY:
      return "arity mismatch";
    case FOPS_ERR_EMPTY:
      return "empty data";
    case FOPS_ERR_BUFFER_TOO_SMALL:
      return "buffer too small";
    case FOPS_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* fops_last_error(void) { return t_error.c_str(); }
size_t fops_last_error_position(void) { return t_position; }

fops_status fops_expr_eval(const char* text, fops_expr_info* out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    const Expression e = parse_expression(text);
    const Value v = eval_expression(e);
    const OpCounts c = count_operators(e);
    *out = {v, max_intermediate(e), e.leaf_count(), c.add, c.sub, c.mul, c.div};
    return FOPS_OK;
  });
}

fops_status fops_expr_leaves(const char* text, int64_t* leaves, size_t capacity, size_t* count) {
  return guarded([&] {
    require(text, "text");
    const std::vector<Value> l = parse_expression(text).leaves();
    if (count) *count = l.size();
    if (!leaves) return FOPS_OK;
    if (capacity < l.size()) return fail(FOPS_ERR_BUFFER_TOO_SMALL, "leaf buffer too small");
    std::copy(l.begin(), l.end(), leaves);
    return FOPS_OK;
  });
}

fops_status fops_expr_canonical(const char* text, char* buf, size_t capacity, size_t* length) {
  return guarded([&] {
    require(text, "text");
    return copy_text(canonical_form(parse_expression(text)), buf, capacity, length);
  });
}

fops_status fops_solver_create(const int64_t* bag, size_t n, fops_solver** out) {
  return guarded([&] {
    require(out, "out");
    *out = new fops_solver(make_bag(bag, n));
    return FOPS_OK;
  });
}

void fops_solver_destroy(fops_solver* solver) { delete solver; }

fops_status fops_solver_solve(fops_solver* solver, int64_t target, fops_solve_result* out, char* witness,
                              size_t capacity, size_t* witness_length) {
  return guarded([&] {
    require(solver, "solver");
    require(out, "out");
    if (target < 1) throw std::invalid_argument("target must be a positive integer");
    const SolveResult r = solve(solver->table, target);
    *out = {};
    out->solvable = r.solvable ? 1 : 0;
    out->min_ops = r.min_ops.value_or(-1);
    out->subset_size = r.subset_size.value_or(-1);
    out->n_min_subsets = static_cast<int>(r.minimal_value_subsets.size());
    out->max_intermediate = r.max_intermediate.value_or(-1);
    out->op_add = r.op_counts.add;
    out->op_sub = r.op_counts.sub;
    out->op_mul = r.op_counts.mul;
    out->op_div = r.op_counts.div;
    const std::string text = r.witness ? serialize_expression(*r.witness) : std::string();
    return copy_text(text, witness, capacity, witness_length);
  });
}

fops_status fops_solver_reach(const fops_solver* solver, fops_reach** out) {
  return guarded([&] {
    require(solver, "solver");
    require(out, "out");
    const ReachMap m = solver->table.reach();
    auto* r = new fops_reach;
    r->entries.assign(m.begin(), m.end());
    *out = r;
    return FOPS_OK;
  });
}

fops_status fops_closure_reach(const int64_t* bag, size_t n, fops_reach** out) {
  return guarded([&] {
    require(out, "out");
    const ReachMap m = closure_reach(make_bag(bag, n));
    auto* r = new fops_reach;
    r->entries.assign(m.begin(), m.end());
    *out = r;
    return FOPS_OK;
  });
}

size_t fops_reach_size(const fops_reach* reach) { return reach ? reach->entries.size() : 0; }

fops_status fops_reach_entry(const fops_reach* reach, size_t index, int64_t* value, int* min_ops) {
  return guarded([&] {
    require(reach, "reach");
    if (index >= reach->entries.size()) throw std::out_of_range("reach index out of range");
    if (value) *value = reach->entries[index].first;
    if (min_ops) *min_ops = reach->entries[index].second;
    return FOPS_OK;
  });
}

void fops_reach_destroy(fops_reach* reach) { delete reach; }

fops_status fops_oracle_min_ops(const int64_t* bag, size_t n, int64_t target, int* min_ops) {
  return guarded([&] {
    require(min_ops, "min_ops");
    if (target < 1) throw std::invalid_argument("target must be a positive integer");
    *min_ops = brute_force_oracle(make_bag(bag, n), target).value_or(-1);
    return FOPS_OK;
  });
}

fops_status fops_debug_set_fault(int fault) {
  return guarded([&] {
    if (fault == 0)
      debug::set_fault(debug::Fault::None);
    else if (fault == 1)
      debug::set_fault(debug::Fault::InexactDivision);
    else
      throw std::invalid_argument("unknown fault");
    return FOPS_OK;
  });
}

size_t fops_bag_count(void) { return kBagCount; }

fops_status fops_bag_at(size_t id, int64_t out[6]) {
  return guarded([&] {
    require(out, "out");
    static const std::vector<Bag> bags = enumerate_bags();
    if (id >= bags.size()) throw std::out_of_range("bag id out of range");
    std::copy(bags[id].values().begin(), bags[id].values().end(), out);
    return FOPS_OK;
  });
}

fops_status fops_difficulty_label(int min_ops, char* code) {
  return guarded([&] {
    require(code, "code");
    *code = difficulty_code(difficulty_label(min_ops < 0 ? std::nullopt : std::optional<int>(min_ops)));
    return FOPS_OK;
  });
}

fops_status fops_difficulty_from_subset_size(int subset_size, char* code) {
  return guarded([&] {
    require(code, "code");
    const auto size = subset_size == -1 ? std::nullopt : std::optional<int>(subset_size);
    *code = difficulty_code(difficulty_from_subset_size(size));
    return FOPS_OK;
  });
}

void fops_generate_options_init(fops_generate_options* options) {
  if (!options) return;
  *options = {};
  options->jobs = 0;
  options->bag_lo = 0;
  options->bag_hi = static_cast<int>(kBagCount) - 1;
  options->target_lo = kTargetLo;
  options->target_hi = kTargetHi;
}

fops_status fops_generate(const fops_generate_options* options, fops_dataset_stats* out) {
  return guarded([&] {
    require(options, "options");
    require(options->out_path, "out_path");
    unsigned jobs = options->jobs;
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    const std::vector<IndexedBag> bags = bag_slice(options->bag_lo, options->bag_hi);
    const GenerationStats s =
        generate_dataset(bags, options->target_lo, options->target_hi, options->out_path, jobs);
    if (out) fill_stats(s, out);
    return FOPS_OK;
  });
}

fops_status fops_dataset_stats_file(const char* path, fops_dataset_stats* out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    fill_stats(dataset_stats(path), out);
    return FOPS_OK;
  });
}

void fops_train_options_init(fops_train_options* options) {
  if (!options) return;
  const Hyperparams hp;
  *options = {};
  options->task = FOPS_TASK_DIFFICULTY;
  options->features = FOPS_FEATURES_BASELINE;
  options->seed = hp.seed;
  options->test_fraction = 0.2;
  options->learning_rate = hp.learning_rate;
  options->l2 = hp.l2;
  options->max_epochs = hp.max_epochs;
  options->grad_tolerance = hp.grad_tolerance;
}

const char* fops_class_name(int task, int cls) {
  const Task t = task == FOPS_TASK_SOLVABILITY ? Task::Solvability : Task::Difficulty;
  if (cls < 0 || static_cast<std::size_t>(cls) >= class_count(t)) return "?";
  return class_name(t, cls).data();
}

fops_status fops_dataset_load(const char* path, fops_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto* d = new fops_dataset;
    try {
      d->records = load_dataset(path, false);
    } catch (...) {
      delete d;
      throw;
    }
    *out = d;
    return FOPS_OK;
  });
}

size_t fops_dataset_rows(const fops_dataset* dataset) { return dataset ? dataset->records.size() : 0; }

void fops_dataset_destroy(fops_dataset* dataset) { delete dataset; }

fops_status fops_train(const fops_dataset* dataset, const fops_train_options* options, fops_model** model,
                       fops_train_report* report) {
  return guarded([&] {
    require(dataset, "dataset");
    require(options, "options");
    require(model, "model");
    const FeatureSet features = to_feature_set(options->features);
    const Task task = options->task == FOPS_TASK_SOLVABILITY ? Task::Solvability : Task::Difficulty;
    if (options->task != FOPS_TASK_SOLVABILITY && options->task != FOPS_TASK_DIFFICULTY)
      throw std::invalid_argument("unknown task");
    if (features == FeatureSet::SubsetSizeRule && task != Task::Difficulty)
      throw std::invalid_argument("the subset-size rule predicts difficulty only");

    const Split split = split_by_bag(dataset->records, options->test_fraction, options->seed);
    Hyperparams hp;
    hp.learning_rate = options->learning_rate;
    hp.l2 = options->l2;
    hp.max_epochs = options->max_epochs;
    hp.grad_tolerance = options->grad_tolerance;
    hp.seed = options->seed;

    auto m = std::make_unique<fops_model>();
    if (features == FeatureSet::SubsetSizeRule) {
      m->params = subset_size_rule_model();
      m->params.seed = options->seed;
    } else if (task == Task::Solvability) {
      m->params = train_binary_logistic(dataset->records, split.train, features, hp);
    } else {
      m->params = train_multinomial_logistic(dataset->records, split.train, features, hp);
    }
    const Metrics held = evaluate(m->params, dataset->records, split.test, features);
    if (report) {
      *report = {};
      report->train_rows = split.train.size();
      report->test_rows = split.test.size();
      report->test_bags = split.test_bags.size();
      report->epochs = m->params.epochs_run;
      report->final_loss = m->params.loss_history.empty() ? 0.0 : m->params.loss_history.back();
      fill_metrics(held, &report->heldout);
    }
    *model = m.release();
    return FOPS_OK;
  });
}

fops_status fops_model_evaluate(const fops_model* model, const fops_dataset* dataset, fops_features features,
                                fops_metrics* out) {
  return guarded([&] {
    require(model, "model");
    require(dataset, "dataset");
    require(out, "out");
    fill_metrics(evaluate(model->params, dataset->records, to_feature_set(features)), out);
    return FOPS_OK;
  });
}

fops_status fops_model_save(const fops_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    save_model(model->params, path);
    return FOPS_OK;
  });
}

fops_status fops_model_load(const char* path, fops_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto m = std::make_unique<fops_model>();
    m->params = load_model(path);
    *out = m.release();
    return FOPS_OK;
  });
}

void fops_model_destroy(fops_model* model) { delete model; }

}  // extern "C"
