#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fourops/dataset.hpp"

using namespace fourops;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fourops_test_dataset";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

// n-multichoose-k by Pascal's rule, not the closed form.
std::uint64_t multichoose(int n, int k) {
  std::vector<std::vector<std::uint64_t>> c(n + k + 1, std::vector<std::uint64_t>(k + 1, 0));
  for (int i = 0; i <= n + k; ++i) {
    c[i][0] = 1;
    for (int j = 1; j <= std::min(i, k); ++j) c[i][j] = c[i - 1][j - 1] + (j <= i - 1 ? c[i - 1][j] : 0);
  }
  return c[n + k - 1][k];
}

const std::string kTwoRowFile = std::string(kDatasetHeader) + "\n" +
                                "0,1,1,1,1,1,25,100,1,4,M,5,1,100,3,0,1,0,(((1+1)+(1+1))*25)\n";

}  // namespace

TEST_CASE("enumerate_bags") {
  const std::vector<Bag> bags = enumerate_bags();
  CHECK(bags.size() == kBagCount);
  CHECK(multichoose(9, 5) == 1287);
  CHECK(bags.size() == 3 * multichoose(9, 5));
  CHECK(bags.front().to_string() == "(1,1,1,1,1,25)");
  CHECK(bags[1].to_string() == "(1,1,1,1,1,50)");
  CHECK(bags.back().to_string() == "(9,9,9,9,9,75)");
  std::set<std::vector<Value>> distinct;
  for (const Bag& b : bags) {
    REQUIRE(b.size() == 6);
    for (std::size_t i = 0; i < 5; ++i) CHECK((b[i] >= 1 && b[i] <= 9));
    CHECK((b[5] == 25 || b[5] == 50 || b[5] == 75));
    distinct.emplace(b.values().begin(), b.values().end());
  }
  CHECK(distinct.size() == kBagCount);
}

TEST_CASE("difficulty_label") {
  CHECK(difficulty_label(std::nullopt) == Difficulty::Unsolvable);
  CHECK(difficulty_label(0) == Difficulty::Easy);
  CHECK(difficulty_label(2) == Difficulty::Easy);
  CHECK(difficulty_label(3) == Difficulty::Medium);
  CHECK(difficulty_label(4) == Difficulty::Medium);
  CHECK(difficulty_label(5) == Difficulty::Hard);
  CHECK_THROWS_AS(difficulty_label(6), std::out_of_range);
  CHECK_THROWS_AS(difficulty_label(-1), std::out_of_range);
  for (Difficulty d : {Difficulty::Unsolvable, Difficulty::Easy, Difficulty::Medium, Difficulty::Hard})
    CHECK(difficulty_from_code(difficulty_code(d)) == d);
  CHECK_FALSE(difficulty_from_code('X').has_value());
}

TEST_CASE("label_instance examples") {
  const InstanceRecord a = label_instance(7, Bag{2, 2, 2, 2, 2, 50}, 100);
  CHECK(a.bag_id == 7);
  CHECK(a.solvable);
  CHECK(a.min_ops == 1);
  CHECK(a.difficulty == Difficulty::Easy);
  CHECK(a.subset_size == 2);
  CHECK(a.n_min_subsets == 1);
  CHECK(a.max_intermediate == 100);
  CHECK(a.op_mul == 1);
  CHECK(a.op_add + a.op_sub + a.op_div == 0);
  CHECK(a.witness == "(2*50)");

  const InstanceRecord b = label_instance(0, Bag{1, 1, 1, 1, 1, 25}, 999);
  CHECK_FALSE(b.solvable);
  CHECK(b.min_ops == -1);
  CHECK(b.difficulty == Difficulty::Unsolvable);
  CHECK(b.subset_size == -1);
  CHECK(b.n_min_subsets == 0);
  CHECK(b.max_intermediate == -1);
  CHECK(b.witness.empty());

  const InstanceRecord c = label_instance(0, Bag{1, 2, 3, 4, 5, 75}, 100);
  CHECK(c.difficulty == Difficulty::Easy);
  CHECK(c.subset_size == 3);
}

TEST_CASE("record rows round-trip") {
  for (Value t : {100, 150, 151, 999}) {
    const InstanceRecord r = label_instance(0, Bag{1, 1, 1, 1, 1, 25}, t);
    std::string row;
    append_record(row, r);
    REQUIRE(row.back() == '\n');
    row.pop_back();
    CHECK(parse_record(row, 2) == r);
  }
  std::string row;
  append_record(row, label_instance(3, Bag{3, 6, 7, 8, 8, 25}, 512));
  CHECK(row.rfind("3,3,6,7,8,8,25,512,", 0) == 0);
}

TEST_CASE("parse_record rejects malformed rows with the line number") {
  auto line_of = [](std::string_view row) -> std::size_t {
    try {
      parse_record(row, 42);
    } catch (const FormatError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("0,1,1,1,1,1,25,100") == 42);
  CHECK(line_of("0,1,1,1,1,1,25,100,2,3,M,4,1,100,1,0,1,0,(1+1)") == 42);
  CHECK(line_of("0,1,1,1,1,1,25,100,1,3,Q,4,1,100,1,0,1,0,(1+1)") == 42);
  CHECK(line_of("0,1,1,1,1,1,25,100,1,3,M,4,1,100,1,0,1,0,") == 42);
  CHECK(line_of("0,1,1,1,1,1,25,999,0,-1,U,-1,0,-1,0,0,0,0,(1+1)") == 42);
  CHECK(line_of("x,1,1,1,1,1,25,100,1,3,M,4,1,100,1,0,1,0,(1+1)") == 42);
  CHECK(line_of("0,1,1,1,1,1,25,100,1,3,M,4,1,100,1,0,1,0,(1+1),extra") == 42);
}

TEST_CASE("bag_slice") {
  const auto s = bag_slice(3, 5);
  REQUIRE(s.size() == 3);
  CHECK(s[0].id == 3);
  CHECK(s[2].id == 5);
  CHECK(s[1].bag == enumerate_bags()[4]);
  CHECK_THROWS(bag_slice(5, 3));
  CHECK_THROWS(bag_slice(0, static_cast<int>(kBagCount)));
}

TEST_CASE("generation on a small slice") {
  const auto bags = bag_slice(0, 3);
  const fs::path one = scratch("one.csv");
  const fs::path four = scratch("four.csv");
  const GenerationStats s1 = generate_dataset(bags, kTargetLo, kTargetHi, one, 1);
  const GenerationStats s4 = generate_dataset(bags, kTargetLo, kTargetHi, four, 4);
  CHECK(s1.total == 3600);
  CHECK(slurp(one) == slurp(four));
  CHECK_FALSE(fs::exists(one.string() + ".partial"));

  const std::string bytes = slurp(one);
  CHECK(std::count(bytes.begin(), bytes.end(), '\n') == 3601);
  CHECK(bytes.rfind(std::string(kDatasetHeader) + "\n", 0) == 0);

  // Labels agree with an independently computed closure map per bag.
  const std::vector<InstanceRecord> rows = load_dataset(one);
  REQUIRE(rows.size() == 3600);
  std::map<int, ReachMap> reach;
  for (const auto& ib : bags) reach[ib.id] = closure_reach(ib.bag);
  std::map<int, int> per_bag;
  std::uint64_t solvable = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const InstanceRecord& r = rows[i];
    CHECK(r.bag_id == static_cast<int>(i / 900));
    CHECK(r.target == kTargetLo + static_cast<Value>(i % 900));
    const ReachMap& m = reach.at(r.bag_id);
    const auto it = m.find(r.target);
    CHECK(r.solvable == (it != m.end()));
    if (it != m.end()) CHECK(r.min_ops == it->second);
    per_bag[r.bag_id] += r.solvable;
    solvable += r.solvable;
  }
  CHECK(s1.solvable == solvable);
  CHECK(s1.solvable_fraction == doctest::Approx(static_cast<double>(solvable) / 3600.0));

  std::vector<int> counts;
  for (const auto& kv : per_bag) counts.push_back(kv.second);
  std::sort(counts.begin(), counts.end());
  CHECK(s1.bag_count == 4);
  CHECK(s1.per_bag.min == counts.front());
  CHECK(s1.per_bag.max == counts.back());
  for (int q = 0; q <= 10; ++q) CHECK(s1.per_bag.deciles[q] == counts[q * (counts.size() - 1) / 10]);

  const GenerationStats reread = dataset_stats(one);
  CHECK(reread.total == s1.total);
  CHECK(reread.label_counts == s1.label_counts);
  CHECK(reread.per_bag.deciles == s1.per_bag.deciles);
  CHECK(reread.per_bag.mean == doctest::Approx(s1.per_bag.mean));
  std::uint64_t labelled = 0;
  for (auto c : s1.label_counts) labelled += c;
  CHECK(labelled == s1.total);
  CHECK(s1.label_counts[0] == s1.total - s1.solvable);
  CHECK(s4.total == s1.total);
}

TEST_CASE("solvable count of the first bag") {
  // (1,1,1,1,1,25) reaches at most 150; count its solvable targets directly.
  const ReachMap m = closure_reach(Bag{1, 1, 1, 1, 1, 25});
  int expected = 0;
  for (const auto& [v, ops] : m) expected += (v >= kTargetLo && v <= kTargetHi);
  const fs::path p = scratch("bag0.csv");
  const GenerationStats s = generate_dataset(bag_slice(0, 0), kTargetLo, kTargetHi, p, 2);
  CHECK(s.total == 900);
  CHECK(s.solvable == static_cast<std::uint64_t>(expected));
}

TEST_CASE("generation to an unwritable path leaves nothing behind") {
  const fs::path bad = fs::path("/nonexistent-fourops-dir") / "out.csv";
  CHECK_THROWS_AS(generate_dataset(bag_slice(0, 0), kTargetLo, kTargetHi, bad, 1), IoError);
  CHECK_FALSE(fs::exists(bad));
  CHECK_FALSE(fs::exists(bad.string() + ".partial"));
}

TEST_CASE("reading malformed files") {
  const fs::path empty = scratch("empty.csv");
  spit(empty, "");
  try {
    dataset_stats(empty);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 1);
  }

  const fs::path wrong = scratch("wrong.csv");
  spit(wrong, "a,b,c\n");
  CHECK_THROWS_AS(dataset_stats(wrong), FormatError);

  const fs::path ok = scratch("ok.csv");
  spit(ok, kTwoRowFile);
  CHECK(dataset_stats(ok).total == 1);

  const fs::path truncated = scratch("truncated.csv");
  spit(truncated, kTwoRowFile + "0,1,1,1,1,1,25,101,1,3");
  try {
    dataset_stats(truncated);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 3);
  }

  // A complete final row without its newline is still truncated.
  const fs::path unterminated = scratch("unterminated.csv");
  std::string text = kTwoRowFile;
  text.pop_back();
  spit(unterminated, text);
  CHECK_THROWS_AS(dataset_stats(unterminated), FormatError);

  CHECK_THROWS_AS(dataset_stats(scratch("missing.csv")), IoError);
}
