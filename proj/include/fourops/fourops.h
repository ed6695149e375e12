/*
 * fourops C API.
 *
 * Every fallible call returns an fops_status; on failure a message (and, for
 * parse and format errors, a byte offset or line number) is kept per thread
 * and can be read with fops_last_error() / fops_last_error_position().
 * Handles are opaque; each *_create / *_load has a matching *_destroy.
 * A single handle must not be used from two threads at once.
 */
#ifndef FOUROPS_H
#define FOUROPS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FOUROPS_BUILDING)
#    define FOUROPS_API __declspec(dllexport)
#  else
#    define FOUROPS_API __declspec(dllimport)
#  endif
#else
#  define FOUROPS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fops_status {
  FOPS_OK = 0,
  FOPS_ERR_INVALID_ARGUMENT = 1,
  FOPS_ERR_PARSE = 2,          /* position = byte offset */
  FOPS_ERR_CONSTRAINT = 3,     /* subtraction not positive or division inexact */
  FOPS_ERR_OUT_OF_RANGE = 4,
  FOPS_ERR_IO = 5,
  FOPS_ERR_FORMAT = 6,         /* position = line number */
  FOPS_ERR_NOT_SOLVABLE = 7,
  FOPS_ERR_DEGENERATE = 8,     /* a class is missing from training data */
  FOPS_ERR_ARITY = 9,
  FOPS_ERR_EMPTY = 10,
  FOPS_ERR_BUFFER_TOO_SMALL = 11,
  FOPS_ERR_INTERNAL = 12       /* violated solver invariant */
} fops_status;

FOUROPS_API const char* fops_status_string(fops_status status);
FOUROPS_API const char* fops_last_error(void);
FOUROPS_API size_t fops_last_error_position(void);

/* ---- expressions --------------------------------------------------------
 * Text grammar: expr := INT | "(" expr op expr ")"; op := + - * /;
 * INT := [1-9][0-9]*. No whitespace.
 */

typedef struct fops_expr_info {
  int64_t value;
  int64_t max_intermediate;
  size_t leaf_count;
  int op_add, op_sub, op_mul, op_div;
} fops_expr_info;

/* Parses and evaluates; FOPS_ERR_PARSE or FOPS_ERR_CONSTRAINT on failure. */
FOUROPS_API fops_status fops_expr_eval(const char* text, fops_expr_info* out);

/* Leaf values, ascending. *count receives the number of leaves even when
 * the buffer is too small. */
FOUROPS_API fops_status fops_expr_leaves(const char* text, int64_t* leaves, size_t capacity, size_t* count);

/* Canonical text (operands of + and * ordered). NUL-terminated; *length
 * excludes the terminator and is set even when the buffer is too small. */
FOUROPS_API fops_status fops_expr_canonical(const char* text, char* buf, size_t capacity, size_t* length);

/* ---- solver ------------------------------------------------------------- */

typedef struct fops_solver fops_solver;
typedef struct fops_reach fops_reach;

typedef struct fops_solve_result {
  int solvable;
  int min_ops;          /* -1 when unsolvable */
  int subset_size;      /* -1 when unsolvable */
  int n_min_subsets;    /* distinct value multisets of minimal size */
  int64_t max_intermediate; /* -1 when unsolvable */
  int op_add, op_sub, op_mul, op_div;
} fops_solve_result;

/* Runs the subset DP for a bag of 1..8 positive integers. */
FOUROPS_API fops_status fops_solver_create(const int64_t* bag, size_t n, fops_solver** out);
FOUROPS_API void fops_solver_destroy(fops_solver* solver);

/* witness may be NULL; otherwise receives the witness text (empty string when
 * unsolvable) and *witness_length its length. */
FOUROPS_API fops_status fops_solver_solve(fops_solver* solver, int64_t target, fops_solve_result* out,
                                          char* witness, size_t capacity, size_t* witness_length);

/* Reachable values of the subset DP, or of the independent closure search. */
FOUROPS_API fops_status fops_solver_reach(const fops_solver* solver, fops_reach** out);
FOUROPS_API fops_status fops_closure_reach(const int64_t* bag, size_t n, fops_reach** out);
FOUROPS_API size_t fops_reach_size(const fops_reach* reach);
/* Entries are in ascending value order. */
FOUROPS_API fops_status fops_reach_entry(const fops_reach* reach, size_t index, int64_t* value, int* min_ops);
FOUROPS_API void fops_reach_destroy(fops_reach* reach);

/* Exhaustive reference search (bags of at most six values). *min_ops is -1
 * when the target is unreachable. */
FOUROPS_API fops_status fops_oracle_min_ops(const int64_t* bag, size_t n, int64_t target, int* min_ops);

/* Mutation testing only: 0 = none, 1 = the DP and closure searches accept
 * inexact division. Process-wide. */
FOUROPS_API fops_status fops_debug_set_fault(int fault);

/* ---- dataset ------------------------------------------------------------ */

FOUROPS_API size_t fops_bag_count(void);
/* Bag with the given id in canonical enumeration order, ascending. */
FOUROPS_API fops_status fops_bag_at(size_t id, int64_t out[6]);

/* Difficulty codes are 'U', 'E', 'M', 'H'. Pass -1 for "absent". */
FOUROPS_API fops_status fops_difficulty_label(int min_ops, char* code);
FOUROPS_API fops_status fops_difficulty_from_subset_size(int subset_size, char* code);

typedef struct fops_dataset_stats {
  uint64_t total;
  uint64_t label_counts[4]; /* U, E, M, H */
  uint64_t solvable;
  double solvable_fraction;
  uint64_t bag_count;
  int per_bag_min;
  int per_bag_max;
  double per_bag_mean;
  int per_bag_deciles[11]; /* 0%, 10%, ..., 100% */
  double wall_seconds;
} fops_dataset_stats;

typedef struct fops_generate_options {
  const char* out_path;
  unsigned jobs;       /* 0 = hardware concurrency */
  int bag_lo, bag_hi;  /* inclusive ids */
  int64_t target_lo, target_hi;
} fops_generate_options;

/* Fills defaults: all bags, targets 100..999, jobs 0. */
FOUROPS_API void fops_generate_options_init(fops_generate_options* options);
FOUROPS_API fops_status fops_generate(const fops_generate_options* options, fops_dataset_stats* out);
FOUROPS_API fops_status fops_dataset_stats_file(const char* path, fops_dataset_stats* out);

/* ---- analysis ----------------------------------------------------------- */

typedef enum fops_task { FOPS_TASK_SOLVABILITY = 0, FOPS_TASK_DIFFICULTY = 1 } fops_task;
typedef enum fops_features {
  FOPS_FEATURES_BASELINE = 0,
  FOPS_FEATURES_BASELINE_STRUCTURAL = 1,
  FOPS_FEATURES_SUBSET_SIZE_RULE = 2
} fops_features;

typedef struct fops_dataset fops_dataset;
typedef struct fops_model fops_model;

typedef struct fops_metrics {
  int task;
  int classes;
  uint64_t total;
  double accuracy;
  double precision[4];
  double recall[4];
  uint64_t support[4];
  uint64_t confusion[4][4]; /* [true][predicted] */
} fops_metrics;

typedef struct fops_train_options {
  fops_task task;
  fops_features features;
  uint64_t seed;
  double test_fraction;
  double learning_rate;
  double l2;
  int max_epochs;
  double grad_tolerance;
} fops_train_options;

typedef struct fops_train_report {
  uint64_t train_rows;
  uint64_t test_rows;
  uint64_t test_bags;
  int epochs;
  double final_loss; /* 0 for the rule */
  fops_metrics heldout;
} fops_train_report;

FOUROPS_API void fops_train_options_init(fops_train_options* options);
FOUROPS_API const char* fops_class_name(int task, int cls);

FOUROPS_API fops_status fops_dataset_load(const char* path, fops_dataset** out);
FOUROPS_API size_t fops_dataset_rows(const fops_dataset* dataset);
FOUROPS_API void fops_dataset_destroy(fops_dataset* dataset);

/* Splits by bag, trains on the training side and scores the held-out side.
 * The subset-size rule is valid only for the difficulty task. */
FOUROPS_API fops_status fops_train(const fops_dataset* dataset, const fops_train_options* options,
                                   fops_model** model, fops_train_report* report);
FOUROPS_API fops_status fops_model_evaluate(const fops_model* model, const fops_dataset* dataset,
                                            fops_features features, fops_metrics* out);
FOUROPS_API fops_status fops_model_save(const fops_model* model, const char* path);
FOUROPS_API fops_status fops_model_load(const char* path, fops_model** out);
FOUROPS_API void fops_model_destroy(fops_model* model);

#ifdef __cplusplus
}
#endif

#endif /* FOUROPS_H */
