#include "fourops/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

namespace fourops {

char difficulty_code(Difficulty d) {
  switch (d) {
    case Difficulty::Unsolvable:
      return 'U';
    case Difficulty::Easy:
      return 'E';
    case Difficulty::Medium:
      return 'M';
    case Difficulty::Hard:
      return 'H';
  }
  return '?';
}

std::optional<Difficulty> difficulty_from_code(char c) {
  switch (c) {
    case 'U':
      return Difficulty::Unsolvable;
    case 'E':
      return Difficulty::Easy;
    case 'M':
      return Difficulty::Medium;
    case 'H':
      return Difficulty::Hard;
  }
  return std::nullopt;
}

std::string_view difficulty_name(Difficulty d) {
  switch (d) {
    case Difficulty::Unsolvable:
      return "unsolvable";
    case Difficulty::Easy:
      return "easy";
    case Difficulty::Medium:
      return "medium";
    case Difficulty::Hard:
      return "hard";
  }
  return "?";
}

Difficulty difficulty_label(std::optional<int> min_ops) {
  if (!min_ops) return Difficulty::Unsolvable;
  if (*min_ops < 0 || *min_ops > 5)
    throw std::out_of_range("min_ops " + std::to_string(*min_ops) + " outside 0..5");
  if (*min_ops <= 2) return Difficulty::Easy;
  if (*min_ops <= 4) return Difficulty::Medium;
  return Difficulty::Hard;
}

std::vector<Bag> enumerate_bags() {
  std::vector<Bag> out;
  out.reserve(kBagCount);
  std::vector<Value> small(5);
  for (small[0] = 1; small[0] <= 9; ++small[0])
    for (small[1] = small[0]; small[1] <= 9; ++small[1])
      for (small[2] = small[1]; small[2] <= 9; ++small[2])
        for (small[3] = small[2]; small[3] <= 9; ++small[3])
          for (small[4] = small[3]; small[4] <= 9; ++small[4])
            for (Value big : {25, 50, 75}) {
              std::vector<Value> v = small;
              v.push_back(big);
              out.emplace_back(std::move(v));
            }
  return out;
}

std::vector<IndexedBag> bag_slice(int lo, int hi) {
  const std::vector<Bag> all = enumerate_bags();
  if (lo < 0 || hi < lo || hi >= static_cast<int>(all.size()))
    throw std::out_of_range("bag range must lie within 0.." + std::to_string(all.size() - 1));
  std::vector<IndexedBag> out;
  for (int i = lo; i <= hi; ++i) out.push_back({i, all[static_cast<std::size_t>(i)]});
  return out;
}

InstanceRecord label_instance(int bag_id, const SubsetTable& table, Value target) {
  const Bag& bag = table.bag();
  if (bag.size() != 6) throw std::invalid_argument("dataset bags hold six values");
  InstanceRecord r;
  r.bag_id = bag_id;
  std::copy(bag.values().begin(), bag.values().end(), r.bag.begin());
  r.target = target;
  const SolveResult s = solve(table, target);
  r.solvable = s.solvable;
  r.difficulty = difficulty_label(s.min_ops);
  if (s.solvable) {
    r.min_ops = *s.min_ops;
    r.subset_size = *s.subset_size;
    r.n_min_subsets = static_cast<int>(s.minimal_value_subsets.size());
    r.max_intermediate = *s.max_intermediate;
    r.op_add = s.op_counts.add;
    r.op_sub = s.op_counts.sub;
    r.op_mul = s.op_counts.mul;
    r.op_div = s.op_counts.div;
    r.witness = serialize_expression(*s.witness);
  }
  return r;
}

InstanceRecord label_instance(int bag_id, const Bag& bag, Value target) {
  return label_instance(bag_id, SubsetTable(bag), target);
}

namespace {

template <typename Int>
void append_int(std::string& out, Int v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

}  // namespace

void append_record(std::string& out, const InstanceRecord& r) {
  append_int(out, r.bag_id);
  for (Value v : r.bag) {
    out += ',';
    append_int(out, v);
  }
  out += ',';
  append_int(out, r.target);
  out += r.solvable ? ",1," : ",0,";
  append_int(out, r.min_ops);
  out += ',';
  out += difficulty_code(r.difficulty);
  for (auto v : {Value{r.subset_size}, Value{r.n_min_subsets}, r.max_intermediate, Value{r.op_add},
                 Value{r.op_sub}, Value{r.op_mul}, Value{r.op_div}}) {
    out += ',';
    append_int(out, v);
  }
  out += ',';
  out += r.witness;
  out += '\n';
}

FormatError::FormatError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

constexpr std::size_t kFieldCount = 19;

template <typename Int>
Int parse_int_field(std::string_view field, std::size_t line_no, std::string_view name) {
  Int v{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    throw FormatError(line_no, "bad integer in column " + std::string(name) + ": '" + std::string(field) + "'");
  return v;
}

}  // namespace

InstanceRecord parse_record(std::string_view line, std::size_t line_no) {
  std::array<std::string_view, kFieldCount> f;
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (count == kFieldCount) throw FormatError(line_no, "too many columns");
    if (comma == std::string_view::npos) {
      f[count++] = line.substr(start);
      break;
    }
    f[count++] = line.substr(start, comma - start);
    start = comma + 1;
  }
  if (count != kFieldCount)
    throw FormatError(line_no, "expected 19 columns, found " + std::to_string(count));

  InstanceRecord r;
  r.bag_id = parse_int_field<int>(f[0], line_no, "bag_id");
  static constexpr std::array<std::string_view, 6> bag_cols = {"n1", "n2", "n3", "n4", "n5", "big"};
  for (std::size_t i = 0; i < 6; ++i) r.bag[i] = parse_int_field<Value>(f[1 + i], line_no, bag_cols[i]);
  r.target = parse_int_field<Value>(f[7], line_no, "target");
  const int solvable = parse_int_field<int>(f[8], line_no, "solvable");
  if (solvable != 0 && solvable != 1) throw FormatError(line_no, "solvable must be 0 or 1");
  r.solvable = solvable == 1;
  r.min_ops = parse_int_field<int>(f[9], line_no, "min_ops");
  if (f[10].size() != 1 || !difficulty_from_code(f[10][0]))
    throw FormatError(line_no, "bad difficulty code '" + std::string(f[10]) + "'");
  r.difficulty = *difficulty_from_code(f[10][0]);
  r.subset_size = parse_int_field<int>(f[11], line_no, "subset_size");
  r.n_min_subsets = parse_int_field<int>(f[12], line_no, "n_min_subsets");
  r.max_intermediate = parse_int_field<Value>(f[13], line_no, "max_intermediate");
  r.op_add = parse_int_field<int>(f[14], line_no, "op_add");
  r.op_sub = parse_int_field<int>(f[15], line_no, "op_sub");
  r.op_mul = parse_int_field<int>(f[16], line_no, "op_mul");
  r.op_div = parse_int_field<int>(f[17], line_no, "op_div");
  r.witness = std::string(f[18]);
  if (r.solvable == r.witness.empty())
    throw FormatError(line_no, "witness must be present exactly when solvable");
  return r;
}

namespace {

std::string render_bag(const IndexedBag& ib, Value lo, Value hi) {
  const SubsetTable table(ib.bag);
  std::string chunk;
  chunk.reserve(static_cast<std::size_t>(hi - lo + 1) * 64);
  for (Value t = lo; t <= hi; ++t) append_record(chunk, label_instance(ib.id, table, t));
  return chunk;
}

// Hands out bag indices to workers and releases finished chunks in index order.
class OrderedMerge {
 public:
  OrderedMerge(std::size_t jobs, std::size_t window) : jobs_(jobs), window_(window) {}

  // Next index to work on, or nullopt when done. Blocks while the writer lags
  // more than `window` chunks behind.
  std::optional<std::size_t> claim() {
    std::unique_lock lock(mu_);
    if (next_claim_ >= jobs_ || failed_) return std::nullopt;
    const std::size_t idx = next_claim_++;
    space_.wait(lock, [&] { return idx < next_write_ + window_ || failed_; });
    if (failed_) return std::nullopt;
    return idx;
  }

  void complete(std::size_t idx, std::string chunk) {
    std::lock_guard lock(mu_);
    done_.emplace(idx, std::move(chunk));
    ready_.notify_all();
  }

  void fail(std::exception_ptr e) {
    std::lock_guard lock(mu_);
    if (!error_) error_ = e;
    failed_ = true;
    ready_.notify_all();
    space_.notify_all();
  }

  // Writer side: waits for chunk `next_write_`; nullopt once all are written.
  std::optional<std::string> next() {
    std::unique_lock lock(mu_);
    if (next_write_ >= jobs_) return std::nullopt;
    ready_.wait(lock, [&] { return failed_ || done_.count(next_write_) != 0; });
    if (failed_) return std::nullopt;
    auto node = done_.extract(next_write_);
    ++next_write_;
    space_.notify_all();
    return std::move(node.mapped());
  }

  std::exception_ptr error() const {
    std::lock_guard lock(mu_);
    return error_;
  }

 private:
  const std::size_t jobs_;
  const std::size_t window_;
  mutable std::mutex mu_;
  std::condition_variable ready_;
  std::condition_variable space_;
  std::map<std::size_t, std::string> done_;
  std::size_t next_claim_ = 0;
  std::size_t next_write_ = 0;
  bool failed_ = false;
  std::exception_ptr error_;
};

// Splits a chunk back into rows to update the statistics without re-solving.
void accumulate_chunk(StatsAccumulator& acc, std::string_view chunk) {
  std::size_t start = 0;
  while (start < chunk.size()) {
    const std::size_t nl = chunk.find('\n', start);
    acc.add(parse_record(chunk.substr(start, nl - start), 0));
    start = nl + 1;
  }
}

}  // namespace

GenerationStats generate_dataset(std::span<const IndexedBag> bags, Value target_lo, Value target_hi,
                                 const std::filesystem::path& output, unsigned workers) {
  if (workers < 1) throw std::invalid_argument("worker count must be at least 1");
  if (target_lo < 1 || target_hi < target_lo) throw std::invalid_argument("invalid target range");
  for (const IndexedBag& ib : bags)
    if (ib.bag.size() != 6) throw std::invalid_argument("dataset bags hold six values");
  const auto started = std::chrono::steady_clock::now();

  std::filesystem::path partial = output;
  partial += ".partial";
  std::ofstream out(partial, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + partial.string() + " for writing");

  auto abort_with = [&](const std::string& msg) {
    out.close();
    std::error_code ec;
    std::filesystem::remove(partial, ec);
    throw IoError(msg);
  };

  out << kDatasetHeader << '\n';
  OrderedMerge merge(bags.size(), std::size_t{4} * workers);
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        while (auto idx = merge.claim()) merge.complete(*idx, render_bag(bags[*idx], target_lo, target_hi));
      } catch (...) {
        merge.fail(std::current_exception());
      }
    });
  }

  StatsAccumulator acc;
  bool write_failed = false;
  while (auto chunk = merge.next()) {
    accumulate_chunk(acc, *chunk);
    if (!write_failed) {
      out.write(chunk->data(), static_cast<std::streamsize>(chunk->size()));
      if (!out) {
        write_failed = true;
        merge.fail(std::make_exception_ptr(IoError("write to " + partial.string() + " failed")));
      }
    }
  }
  pool.clear();

  if (auto err = merge.error()) {
    out.close();
    std::error_code ec;
    std::filesystem::remove(partial, ec);
    std::rethrow_exception(err);
  }
  out.flush();
  if (!out) abort_with("write to " + partial.string() + " failed");
  out.close();
  std::error_code ec;
  std::filesystem::rename(partial, output, ec);
  if (ec) abort_with("cannot move " + partial.string() + " to " + output.string() + ": " + ec.message());

  GenerationStats stats = acc.finish();
  stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return stats;
}

void StatsAccumulator::add(const InstanceRecord& r) {
  ++stats_.total;
  ++stats_.label_counts[static_cast<std::size_t>(r.difficulty)];
  if (r.bag_id != current_bag_) {
    per_bag_solvable_.push_back(0);
    current_bag_ = r.bag_id;
  }
  if (r.solvable) {
    ++stats_.solvable;
    ++per_bag_solvable_.back();
  }
}

GenerationStats StatsAccumulator::finish() const {
  GenerationStats s = stats_;
  s.solvable_fraction = s.total ? static_cast<double>(s.solvable) / static_cast<double>(s.total) : 0.0;
  s.bag_count = per_bag_solvable_.size();
  if (!per_bag_solvable_.empty()) {
    std::vector<int> sorted = per_bag_solvable_;
    std::sort(sorted.begin(), sorted.end());
    s.per_bag.min = sorted.front();
    s.per_bag.max = sorted.back();
    double sum = 0.0;
    for (int c : sorted) sum += c;
    s.per_bag.mean = sum / static_cast<double>(sorted.size());
    for (std::size_t q = 0; q <= 10; ++q) s.per_bag.deciles[q] = sorted[q * (sorted.size() - 1) / 10];
  }
  return s;
}

void read_dataset(const std::filesystem::path& path,
                  const std::function<void(const InstanceRecord&)>& visit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(1, "missing header");
  if (line != kDatasetHeader) throw FormatError(1, "unexpected header");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (in.eof()) throw FormatError(line_no, "truncated row (no line terminator)");
    visit(parse_record(line, line_no));
  }
  if (in.bad()) throw IoError("read error in " + path.string());
}

std::vector<InstanceRecord> load_dataset(const std::filesystem::path& path, bool keep_witness) {
  std::vector<InstanceRecord> out;
  read_dataset(path, [&](const InstanceRecord& r) {
    out.push_back(r);
    if (!keep_witness) out.back().witness.clear();
  });
  return out;
}

GenerationStats dataset_stats(const std::filesystem::path& path) {
  StatsAccumulator acc;
  read_dataset(path, [&](const InstanceRecord& r) { acc.add(r); });
  return acc.finish();
}

}  // namespace fourops
