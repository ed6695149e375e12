#include "fourops/analysis.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace fourops {

std::string_view task_name(Task t) { return t == Task::Solvability ? "solvability" : "difficulty"; }

std::string_view feature_set_name(FeatureSet f) {
  switch (f) {
    case FeatureSet::Baseline:
      return "baseline";
    case FeatureSet::BaselineStructural:
      return "baseline+structural";
    case FeatureSet::SubsetSizeRule:
      return "subset-size-rule";
  }
  return "?";
}

std::optional<Task> parse_task(std::string_view s) {
  if (s == "solvability") return Task::Solvability;
  if (s == "difficulty") return Task::Difficulty;
  return std::nullopt;
}

std::optional<FeatureSet> parse_feature_set(std::string_view s) {
  for (FeatureSet f : {FeatureSet::Baseline, FeatureSet::BaselineStructural, FeatureSet::SubsetSizeRule})
    if (s == feature_set_name(f)) return f;
  return std::nullopt;
}

std::string_view model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::BinaryLogistic:
      return "binary-logistic";
    case ModelKind::MultinomialLogistic:
      return "multinomial-logistic";
    case ModelKind::SubsetSizeRule:
      return "subset-size-rule";
  }
  return "?";
}

namespace {

constexpr std::array<std::string_view, 14> kBaselineNames = {
    "small_sum",  "small_max",     "small_min",     "big_value",      "distinct_count",
    "even_count", "contains_5",    "target",        "target_parity",  "target_mod_5",
    "target_mod_10", "target_mod_big", "gap_big_times_max", "gap_big_times_mean"};

constexpr std::array<std::string_view, 7> kStructuralNames = {
    "subset_size", "n_min_subsets", "max_intermediate", "op_add", "op_sub", "op_mul", "op_div"};

}  // namespace

std::span<const std::string_view> baseline_feature_names() { return kBaselineNames; }
std::span<const std::string_view> structural_feature_names() { return kStructuralNames; }

std::vector<std::string> feature_names(FeatureSet f) {
  std::vector<std::string> out(kBaselineNames.begin(), kBaselineNames.end());
  if (f == FeatureSet::BaselineStructural) out.insert(out.end(), kStructuralNames.begin(), kStructuralNames.end());
  if (f == FeatureSet::SubsetSizeRule) return {"subset_size"};
  return out;
}

std::vector<double> baseline_features(const Bag& bag, Value target) {
  if (bag.size() != 6) throw std::invalid_argument("baseline features need a six-value bag");
  const auto v = bag.values();
  const auto small = v.first(5);
  const double big = static_cast<double>(v[5]);
  double sum = 0;
  for (Value x : small) sum += static_cast<double>(x);
  const double small_max = static_cast<double>(small.back());
  const double small_min = static_cast<double>(small.front());
  const auto distinct = static_cast<double>(std::set<Value>(v.begin(), v.end()).size());
  const auto even = static_cast<double>(std::count_if(v.begin(), v.end(), [](Value x) { return x % 2 == 0; }));
  const double has5 = std::find(v.begin(), v.end(), 5) != v.end() ? 1.0 : 0.0;
  const double t = static_cast<double>(target);
  return {sum,
          small_max,
          small_min,
          big,
          distinct,
          even,
          has5,
          t,
          static_cast<double>(target % 2),
          static_cast<double>(target % 5),
          static_cast<double>(target % 10),
          static_cast<double>(target % v[5]),
          std::abs(t - big * small_max),
          std::abs(t - big * sum / 5.0)};
}

std::vector<double> structural_features(const InstanceRecord& r) {
  if (!r.solvable) throw NotSolvable("structural features need a solvable record");
  return {static_cast<double>(r.subset_size), static_cast<double>(r.n_min_subsets),
          static_cast<double>(r.max_intermediate), static_cast<double>(r.op_add),
          static_cast<double>(r.op_sub), static_cast<double>(r.op_mul),
          static_cast<double>(r.op_div)};
}

std::vector<double> extract_features(const InstanceRecord& r, FeatureSet f) {
  if (f == FeatureSet::SubsetSizeRule) return {static_cast<double>(r.subset_size)};
  std::vector<double> out = baseline_features(r.as_bag(), r.target);
  if (f == FeatureSet::BaselineStructural) {
    for (double x : {static_cast<double>(r.subset_size), static_cast<double>(r.n_min_subsets),
                     static_cast<double>(r.max_intermediate), static_cast<double>(r.op_add),
                     static_cast<double>(r.op_sub), static_cast<double>(r.op_mul),
                     static_cast<double>(r.op_div)})
      out.push_back(x);
  }
  return out;
}

Difficulty difficulty_from_subset_size(std::optional<int> subset_size) {
  if (!subset_size) return Difficulty::Unsolvable;
  if (*subset_size < 1 || *subset_size > 6)
    throw std::out_of_range("subset size " + std::to_string(*subset_size) + " outside 1..6");
  if (*subset_size <= 3) return Difficulty::Easy;
  if (*subset_size <= 5) return Difficulty::Medium;
  return Difficulty::Hard;
}

std::size_t class_count(Task t) { return t == Task::Solvability ? 2 : kDifficultyCount; }

int class_of(const InstanceRecord& r, Task t) {
  if (t == Task::Solvability) return r.solvable ? 1 : 0;
  return static_cast<int>(r.difficulty);
}

std::string_view class_name(Task t, int cls) {
  if (t == Task::Solvability) return cls == 1 ? "solvable" : "unsolvable";
  return difficulty_name(static_cast<Difficulty>(cls));
}

Split split_by_bag(std::span<const InstanceRecord> data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("test fraction must lie strictly between 0 and 1");
  std::vector<int> bags;
  for (const InstanceRecord& r : data) bags.push_back(r.bag_id);
  std::sort(bags.begin(), bags.end());
  bags.erase(std::unique(bags.begin(), bags.end()), bags.end());

  // Fisher-Yates with an explicit draw so the partition does not depend on the
  // standard library's shuffle.
  std::mt19937_64 rng(seed);
  for (std::size_t i = bags.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(bags[i - 1], bags[j]);
  }
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(bags.size())));
  Split split;
  split.test_bags.assign(bags.begin(), bags.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::sort(split.test_bags.begin(), split.test_bags.end());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool test = std::binary_search(split.test_bags.begin(), split.test_bags.end(), data[i].bag_id);
    (test ? split.test : split.train).push_back(static_cast<std::uint32_t>(i));
  }
  return split;
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  return a.kind == b.kind && a.task == b.task && a.features == b.features && a.seed == b.seed &&
         a.feature_names == b.feature_names && a.feature_index == b.feature_index && a.mean == b.mean &&
         a.stddev == b.stddev && a.coef == b.coef && a.epochs_run == b.epochs_run;
}

double logistic_loss(const Design& d, std::span<const double> params, std::size_t outputs, double l2,
                     std::vector<double>* gradient) {
  const std::size_t stride = d.cols + 1;
  if (params.size() != outputs * stride) throw ArityMismatch("parameter count does not match design");
  if (gradient) gradient->assign(params.size(), 0.0);
  double loss = 0.0;
  std::vector<double> scores(outputs);
  for (std::size_t i = 0; i < d.rows; ++i) {
    const double* x = d.x.data() + i * d.cols;
    for (std::size_t k = 0; k < outputs; ++k) {
      const double* w = params.data() + k * stride;
      double z = w[0];
      for (std::size_t j = 0; j < d.cols; ++j) z += w[j + 1] * x[j];
      scores[k] = z;
    }
    const int y = d.labels[i];
    if (outputs == 1) {
      const double z = scores[0];
      // log(1 + e^z) - y z, evaluated stably.
      loss += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - (y == 1 ? z : 0.0);
      if (gradient) {
        const double p = 1.0 / (1.0 + std::exp(-z));
        scores[0] = p - (y == 1 ? 1.0 : 0.0);
      }
    } else {
      const double zmax = *std::max_element(scores.begin(), scores.end());
      double denom = 0.0;
      for (double z : scores) denom += std::exp(z - zmax);
      loss += zmax + std::log(denom) - scores[static_cast<std::size_t>(y)];
      if (gradient)
        for (std::size_t k = 0; k < outputs; ++k)
          scores[k] = std::exp(scores[k] - zmax) / denom - (static_cast<int>(k) == y ? 1.0 : 0.0);
    }
    if (gradient) {
      for (std::size_t k = 0; k < outputs; ++k) {
        double* g = gradient->data() + k * stride;
        const double r = scores[k];
        g[0] += r;
        for (std::size_t j = 0; j < d.cols; ++j) g[j + 1] += r * x[j];
      }
    }
  }
  const double inv_n = d.rows ? 1.0 / static_cast<double>(d.rows) : 0.0;
  loss *= inv_n;
  double penalty = 0.0;
  for (std::size_t k = 0; k < outputs; ++k)
    for (std::size_t j = 1; j < stride; ++j) penalty += params[k * stride + j] * params[k * stride + j];
  loss += 0.5 * l2 * penalty;
  if (gradient) {
    for (std::size_t k = 0; k < outputs; ++k)
      for (std::size_t j = 0; j < stride; ++j) {
        double& g = (*gradient)[k * stride + j];
        g *= inv_n;
        if (j > 0) g += l2 * params[k * stride + j];
      }
  }
  return loss;
}

namespace {

double standardized(double raw, double mean, double sd) { return (raw - mean) / sd; }

Design build_design(const ModelParams& m, std::span<const InstanceRecord> data,
                    std::span<const std::uint32_t> rows) {
  Design d;
  d.rows = rows.size();
  d.cols = m.feature_index.size();
  d.x.resize(d.rows * d.cols);
  d.labels.resize(d.rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const InstanceRecord& r = data[rows[i]];
    const std::vector<double> f = extract_features(r, m.features);
    for (std::size_t j = 0; j < d.cols; ++j)
      d.x[i * d.cols + j] = standardized(f[m.feature_index[j]], m.mean[j], m.stddev[j]);
    d.labels[i] = class_of(r, m.task);
  }
  return d;
}

ModelParams fit_logistic(std::span<const InstanceRecord> data, std::span<const std::uint32_t> rows, Task task,
                         FeatureSet features, const Hyperparams& hp) {
  if (features == FeatureSet::SubsetSizeRule)
    throw std::invalid_argument("the subset-size rule is not a learned feature set");
  if (rows.empty()) throw EmptyData("no training rows");
  const std::size_t classes = class_count(task);
  std::vector<std::uint64_t> seen(classes, 0);
  for (std::uint32_t i : rows) ++seen[static_cast<std::size_t>(class_of(data[i], task))];
  for (std::size_t c = 0; c < classes; ++c)
    if (seen[c] == 0)
      throw Degenerate("class '" + std::string(class_name(task, static_cast<int>(c))) + "' absent from training data");

  ModelParams m;
  m.kind = task == Task::Solvability ? ModelKind::BinaryLogistic : ModelKind::MultinomialLogistic;
  m.task = task;
  m.features = features;
  m.seed = hp.seed;

  // Standardization statistics on the training rows; constant features dropped.
  const std::vector<std::string> names = feature_names(features);
  std::vector<double> sum(names.size(), 0.0), sumsq(names.size(), 0.0);
  for (std::uint32_t i : rows) {
    const std::vector<double> f = extract_features(data[i], features);
    for (std::size_t j = 0; j < f.size(); ++j) sum[j] += f[j];
  }
  const double n = static_cast<double>(rows.size());
  std::vector<double> mean(names.size());
  for (std::size_t j = 0; j < names.size(); ++j) mean[j] = sum[j] / n;
  for (std::uint32_t i : rows) {
    const std::vector<double> f = extract_features(data[i], features);
    for (std::size_t j = 0; j < f.size(); ++j) sumsq[j] += (f[j] - mean[j]) * (f[j] - mean[j]);
  }
  for (std::size_t j = 0; j < names.size(); ++j) {
    const double sd = std::sqrt(sumsq[j] / n);
    if (!(sd > 1e-12)) continue;
    m.feature_names.push_back(names[j]);
    m.feature_index.push_back(j);
    m.mean.push_back(mean[j]);
    m.stddev.push_back(sd);
  }

  const Design d = build_design(m, data, rows);
  const std::size_t outputs = task == Task::Solvability ? 1 : classes;
  const std::size_t stride = d.cols + 1;
  std::vector<double> params(outputs * stride, 0.0);
  std::vector<double> grad, trial_grad, trial(params.size());
  double loss = logistic_loss(d, params, outputs, hp.l2, &grad);
  m.loss_history.push_back(loss);
  double lr = hp.learning_rate;
  for (int epoch = 0; epoch < hp.max_epochs; ++epoch) {
    double norm = 0.0;
    for (double g : grad) norm += g * g;
    if (std::sqrt(norm) < hp.grad_tolerance) break;
    m.epochs_run = epoch + 1;
    bool accepted = false;
    for (int halving = 0; halving < 60 && !accepted; ++halving) {
      for (std::size_t j = 0; j < params.size(); ++j) trial[j] = params[j] - lr * grad[j];
      const double trial_loss = logistic_loss(d, trial, outputs, hp.l2, &trial_grad);
      if (trial_loss <= loss) {
        params.swap(trial);
        grad.swap(trial_grad);
        loss = trial_loss;
        m.loss_history.push_back(loss);
        accepted = true;
      } else {
        lr *= 0.5;
      }
    }
    if (!accepted) break;
  }
  m.coef.resize(outputs);
  for (std::size_t k = 0; k < outputs; ++k)
    m.coef[k].assign(params.begin() + static_cast<std::ptrdiff_t>(k * stride),
                     params.begin() + static_cast<std::ptrdiff_t>((k + 1) * stride));
  return m;
}

}  // namespace

ModelParams train_binary_logistic(std::span<const InstanceRecord> data, std::span<const std::uint32_t> rows,
                                  FeatureSet features, const Hyperparams& hp) {
  return fit_logistic(data, rows, Task::Solvability, features, hp);
}

ModelParams train_multinomial_logistic(std::span<const InstanceRecord> data,
                                       std::span<const std::uint32_t> rows, FeatureSet features,
                                       const Hyperparams& hp) {
  return fit_logistic(data, rows, Task::Difficulty, features, hp);
}

ModelParams train_difficulty_baseline(std::span<const InstanceRecord> data,
                                      std::span<const std::uint32_t> rows, const Hyperparams& hp) {
  return fit_logistic(data, rows, Task::Difficulty, FeatureSet::Baseline, hp);
}

ModelParams subset_size_rule_model() {
  ModelParams m;
  m.kind = ModelKind::SubsetSizeRule;
  m.task = Task::Difficulty;
  m.features = FeatureSet::SubsetSizeRule;
  m.feature_names = {"subset_size"};
  m.feature_index = {0};
  return m;
}

int predict(const ModelParams& m, const InstanceRecord& r) {
  if (m.kind == ModelKind::SubsetSizeRule) {
    const auto size = r.solvable ? std::optional<int>(r.subset_size) : std::nullopt;
    return static_cast<int>(difficulty_from_subset_size(size));
  }
  const std::vector<double> f = extract_features(r, m.features);
  std::vector<double> scores(m.coef.size());
  for (std::size_t k = 0; k < m.coef.size(); ++k) {
    const std::vector<double>& w = m.coef[k];
    double z = w[0];
    for (std::size_t j = 0; j < m.feature_index.size(); ++j)
      z += w[j + 1] * standardized(f[m.feature_index[j]], m.mean[j], m.stddev[j]);
    scores[k] = z;
  }
  if (m.kind == ModelKind::BinaryLogistic) return scores[0] >= 0.0 ? 1 : 0;
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

Metrics score_predictions(Task task, std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw ArityMismatch("truth and prediction lengths differ");
  if (truth.empty()) throw EmptyData("no rows to evaluate");
  Metrics m;
  m.task = task;
  m.classes = class_count(task);
  m.total = truth.size();
  m.confusion.assign(m.classes, std::vector<std::uint64_t>(m.classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i)
    ++m.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  std::uint64_t correct = 0;
  m.support.assign(m.classes, 0);
  m.precision.assign(m.classes, 0.0);
  m.recall.assign(m.classes, 0.0);
  for (std::size_t c = 0; c < m.classes; ++c) {
    correct += m.confusion[c][c];
    std::uint64_t predicted_c = 0;
    for (std::size_t t = 0; t < m.classes; ++t) {
      m.support[c] += m.confusion[c][t];
      predicted_c += m.confusion[t][c];
    }
    if (m.support[c]) m.recall[c] = static_cast<double>(m.confusion[c][c]) / static_cast<double>(m.support[c]);
    if (predicted_c) m.precision[c] = static_cast<double>(m.confusion[c][c]) / static_cast<double>(predicted_c);
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
  return m;
}

Metrics evaluate(const ModelParams& model, std::span<const InstanceRecord> data,
                 std::span<const std::uint32_t> rows, FeatureSet features) {
  if (features != model.features)
    throw ArityMismatch("model was trained on '" + std::string(feature_set_name(model.features)) +
                        "', not '" + std::string(feature_set_name(features)) + "'");
  for (const auto& w : model.coef)
    if (w.size() != model.feature_index.size() + 1) throw ArityMismatch("coefficient arity mismatch");
  if (rows.empty()) throw EmptyData("no rows to evaluate");
  std::vector<int> truth, pred;
  truth.reserve(rows.size());
  pred.reserve(rows.size());
  for (std::uint32_t i : rows) {
    truth.push_back(class_of(data[i], model.task));
    pred.push_back(predict(model, data[i]));
  }
  return score_predictions(model.task, truth, pred);
}

Metrics evaluate(const ModelParams& model, std::span<const InstanceRecord> data, FeatureSet features) {
  std::vector<std::uint32_t> rows(data.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<std::uint32_t>(i);
  return evaluate(model, data, rows, features);
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError(line, "bad number '" + s + "'");
  return v;
}

constexpr std::string_view kModelMagic = "fourops-model 1";

}  // namespace

std::string format_model(const ModelParams& m) {
  std::ostringstream out;
  out << kModelMagic << '\n';
  out << "kind " << model_kind_name(m.kind) << '\n';
  out << "task " << task_name(m.task) << '\n';
  out << "features " << feature_set_name(m.features) << '\n';
  out << "seed " << m.seed << '\n';
  out << "epochs " << m.epochs_run << '\n';
  out << "outputs " << m.coef.size() << '\n';
  for (std::size_t j = 0; j < m.mean.size(); ++j)
    out << "standardize " << m.feature_names[j] << ' ' << m.feature_index[j] << ' ' << format_double(m.mean[j])
        << ' ' << format_double(m.stddev[j]) << '\n';
  for (std::size_t k = 0; k < m.coef.size(); ++k) {
    out << "coef " << k << " (bias) " << format_double(m.coef[k][0]) << '\n';
    for (std::size_t j = 0; j < m.feature_names.size(); ++j)
      out << "coef " << k << ' ' << m.feature_names[j] << ' ' << format_double(m.coef[k][j + 1]) << '\n';
  }
  return out.str();
}

ModelParams parse_model(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::istringstream {
    if (!std::getline(in, line)) throw FormatError(line_no + 1, "unexpected end of model file");
    ++line_no;
    return std::istringstream(line);
  };
  auto expect_key = [&](std::istringstream& ls, std::string_view key) {
    std::string k;
    ls >> k;
    if (k != key) throw FormatError(line_no, "expected '" + std::string(key) + "'");
    std::string v;
    ls >> v;
    return v;
  };

  if (!std::getline(in, line) || line != kModelMagic) throw FormatError(1, "not a model file");
  ++line_no;
  ModelParams m;
  {
    auto ls = next_line();
    const std::string kind = expect_key(ls, "kind");
    bool ok = false;
    for (ModelKind k : {ModelKind::BinaryLogistic, ModelKind::MultinomialLogistic, ModelKind::SubsetSizeRule})
      if (kind == model_kind_name(k)) m.kind = k, ok = true;
    if (!ok) throw FormatError(line_no, "unknown model kind '" + kind + "'");
  }
  {
    auto ls = next_line();
    auto t = parse_task(expect_key(ls, "task"));
    if (!t) throw FormatError(line_no, "unknown task");
    m.task = *t;
  }
  {
    auto ls = next_line();
    auto f = parse_feature_set(expect_key(ls, "features"));
    if (!f) throw FormatError(line_no, "unknown feature set");
    m.features = *f;
  }
  {
    auto ls = next_line();
    m.seed = std::stoull(expect_key(ls, "seed"));
  }
  {
    auto ls = next_line();
    m.epochs_run = std::stoi(expect_key(ls, "epochs"));
  }
  std::size_t outputs = 0;
  {
    auto ls = next_line();
    outputs = std::stoul(expect_key(ls, "outputs"));
  }
  m.coef.assign(outputs, {});
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "standardize") {
      std::string name, idx, mean, sd;
      if (!(ls >> name >> idx >> mean >> sd)) throw FormatError(line_no, "malformed standardize line");
      m.feature_names.push_back(name);
      m.feature_index.push_back(std::stoul(idx));
      m.mean.push_back(parse_double(mean, line_no));
      m.stddev.push_back(parse_double(sd, line_no));
    } else if (key == "coef") {
      std::size_t k = 0;
      std::string name, value;
      if (!(ls >> k >> name >> value) || k >= outputs) throw FormatError(line_no, "malformed coef line");
      const std::size_t expected = m.coef[k].size();
      const std::string want = expected == 0 ? "(bias)" : (expected - 1 < m.feature_names.size() ? m.feature_names[expected - 1] : "");
      if (name != want) throw FormatError(line_no, "coefficient '" + name + "' out of order");
      m.coef[k].push_back(parse_double(value, line_no));
    } else {
      throw FormatError(line_no, "unknown key '" + key + "'");
    }
  }
  if (m.kind == ModelKind::SubsetSizeRule && m.feature_names.empty()) {
    m.feature_names = {"subset_size"};
    m.feature_index = {0};
  }
  for (const auto& w : m.coef)
    if (w.size() != m.feature_names.size() + 1) throw ArityMismatch("model coefficient arity mismatch");
  for (double sd : m.stddev)
    if (!(sd > 0)) throw FormatError(line_no, "standard deviation must be positive");
  return m;
}

void save_model(const ModelParams& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << format_model(model);
  if (!out) throw IoError("write to " + path.string() + " failed");
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace fourops
