#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include "cilfair/data.hpp"
#include "cilfair/error.hpp"
#include "cilfair/report_io.hpp"

using namespace cilfair;

namespace {

std::map<int, std::size_t> label_counts(const LabeledDataset& ds) {
  std::map<int, std::size_t> counts;
  for (const auto& s : ds.samples) counts[s.label] += 1;
  return counts;
}

std::set<std::int64_t> id_set(const LabeledDataset& ds) {
  std::set<std::int64_t> ids;
  for (const auto& s : ds.samples) ids.insert(s.id);
  return ids;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("make_dataset validates ids, dims, and declared classes") {
  std::vector<Sample> good = {{0, {1.0, 2.0}, 3}, {1, {0.0, 0.5}, 1}};
  const LabeledDataset ds = make_dataset(good, 2);
  CHECK(ds.class_set == std::vector<int>{1, 3});  // sorted, derived

  std::vector<Sample> dup = {{5, {1.0}, 0}, {5, {2.0}, 0}};
  CHECK_THROWS_AS(make_dataset(dup, 1), InputError);

  std::vector<Sample> wrong_dim = {{0, {1.0}, 0}};
  CHECK_THROWS_AS(make_dataset(wrong_dim, 2), InputError);

  std::vector<Sample> outside = {{0, {1.0}, 7}};
  CHECK_THROWS_AS(make_dataset(outside, 1, {0, 1}), InputError);
  CHECK_NOTHROW(make_dataset(outside, 1, {5, 7, 9}));  // declared superset
}

TEST_CASE("synth_generate counts, ids, determinism, and spread 0") {
  const LabeledDataset ds = synth_generate(2, 3, 4, 1.0, 9);
  REQUIRE(ds.size() == 6);
  const auto counts = label_counts(ds);
  CHECK(counts.at(0) == 3);
  CHECK(counts.at(1) == 3);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(ds.samples[i].id == static_cast<std::int64_t>(i));
  }

  const LabeledDataset again = synth_generate(2, 3, 4, 1.0, 9);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(ds.samples[i].features == again.samples[i].features);
  }

  const LabeledDataset tight = synth_generate(3, 4, 2, 0.0, 1);
  for (const auto& s : tight.samples) {
    const auto& first = tight.samples[static_cast<std::size_t>(s.label) * 4].features;
    CHECK(s.features == first);  // all samples collapse onto the class center
  }

  CHECK_THROWS_AS(synth_generate(0, 3, 2, 1.0, 0), ParamError);
  CHECK_THROWS_AS(synth_generate(2, 3, 2, -0.5, 0), ParamError);
}

TEST_CASE("synth_generate_split shares centers and keeps ids unique") {
  const SynthSplit split = synth_generate_split(3, 5, 2, 4, 0.0, 7);
  CHECK(split.train.size() == 15);
  CHECK(split.test.size() == 6);
  // spread 0: train and test samples of a class are the identical center
  for (const auto& t : split.test.samples) {
    const auto& train_first =
        split.train.samples[static_cast<std::size_t>(t.label) * 5].features;
    CHECK(t.features == train_first);
  }
  auto train_ids = id_set(split.train);
  auto test_ids = id_set(split.test);
  for (auto id : test_ids) CHECK(train_ids.count(id) == 0);
}

TEST_CASE("split_incremental produces disjoint label blocks") {
  const LabeledDataset ds = synth_generate(20, 10, 3, 1.0, 3);
  const IncrementalSchedule sched{5, 4, 1};
  const auto parts = split_incremental(ds, sched);
  REQUIRE(parts.size() == 5);
  std::set<int> seen;
  for (const auto& part : parts) {
    CHECK(part.class_set.size() == 4);
    CHECK(part.size() == 40);
    for (int c : part.class_set) {
      CHECK(seen.insert(c).second);  // disjoint across steps
    }
  }
  CHECK(seen.size() == 20);

  // the permutation is deterministic and matches the blocks
  const auto perm = class_permutation(ds, sched);
  CHECK(perm == class_permutation(ds, sched));
  for (std::size_t k = 0; k < 5; ++k) {
    std::vector<int> block(perm.begin() + 4 * k, perm.begin() + 4 * (k + 1));
    std::sort(block.begin(), block.end());
    CHECK(block == parts[k].class_set);
  }

  // one step covering everything is the whole dataset
  const auto whole = split_incremental(ds, {1, 20, 0});
  REQUIRE(whole.size() == 1);
  CHECK(whole[0].size() == ds.size());
  CHECK(whole[0].class_set == ds.class_set);

  CHECK_THROWS_AS(split_incremental(ds, {6, 4, 0}), ParamError);
}

TEST_CASE("random_exemplar_sample allocation rules") {
  const LabeledDataset ds = synth_generate(4, 30, 2, 1.0, 5);

  // floor + remainder: capacity 10 over 4 classes -> (3,3,2,2)
  const ExemplarMemory mem = random_exemplar_sample(ds, 10, 1);
  CHECK(mem.samples.size() == 10);
  const auto counts = label_counts(mem.as_dataset(2));
  CHECK(counts.at(0) == 3);
  CHECK(counts.at(1) == 3);
  CHECK(counts.at(2) == 2);
  CHECK(counts.at(3) == 2);

  // a different seed changes membership, not sizes
  const ExemplarMemory other = random_exemplar_sample(ds, 10, 2);
  CHECK(label_counts(other.as_dataset(2)) == counts);
  CHECK(id_set(mem.as_dataset(2)) != id_set(other.as_dataset(2)));

  // saturation keeps every sample exactly once, even past the pool size
  const ExemplarMemory all = random_exemplar_sample(ds, ds.size(), 3);
  CHECK(id_set(all.as_dataset(2)) == id_set(ds));
  const ExemplarMemory over = random_exemplar_sample(ds, 500, 0);
  CHECK(id_set(over.as_dataset(2)) == id_set(ds));

  // capacity below the class count cannot give every class a slot
  CHECK_THROWS_AS(random_exemplar_sample(ds, 3, 0), ParamError);
}

TEST_CASE("random_exemplar_sample re-offers capacity from short classes") {
  // class 0 has 2 samples, class 1 has 10; capacity 8 would split 4/4, but
  // class 0 can only give 2, so the freed budget goes back to class 1
  std::vector<Sample> samples;
  for (int i = 0; i < 2; ++i) samples.push_back({i, {0.0}, 0});
  for (int i = 2; i < 12; ++i) samples.push_back({i, {1.0}, 1});
  const LabeledDataset ds = make_dataset(samples, 1);
  const ExemplarMemory mem = random_exemplar_sample(ds, 8, 4);
  CHECK(mem.samples.size() == 8);
  const auto counts = label_counts(mem.as_dataset(1));
  CHECK(counts.at(0) == 2);
  CHECK(counts.at(1) == 6);
}

TEST_CASE("mask_features zeroes the rounded coordinate count") {
  const LabeledDataset ds = synth_generate(2, 5, 8, 1.0, 6);

  const LabeledDataset same = mask_features(ds, 0.0, 1);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(same.samples[i].features == ds.samples[i].features);
  }

  const LabeledDataset gone = mask_features(ds, 1.0, 1);
  for (const auto& s : gone.samples) {
    for (double v : s.features) CHECK(v == 0.0);
  }

  const LabeledDataset half = mask_features(ds, 0.5, 1);
  for (const auto& s : half.samples) {
    std::size_t zeros = 0;
    for (double v : s.features) zeros += (v == 0.0) ? 1 : 0;
    CHECK(zeros == 4);
  }

  CHECK_THROWS_AS(mask_features(ds, 1.5, 0), ParamError);
}

TEST_CASE("imbalance_subsample takes exact per-class counts") {
  const LabeledDataset ds = synth_generate(2, 500, 2, 1.0, 8);

  const LabeledDataset cut = imbalance_subsample(ds, {{0, 50}, {1, 500}}, 1);
  const auto counts = label_counts(cut);
  CHECK(counts.at(0) == 50);
  CHECK(counts.at(1) == 500);

  // classes absent from the map keep everything; count 0 removes the class
  const LabeledDataset drop = imbalance_subsample(ds, {{0, 0}}, 1);
  const auto drop_counts = label_counts(drop);
  CHECK(drop_counts.count(0) == 0);
  CHECK(drop_counts.at(1) == 500);

  CHECK_THROWS_AS(imbalance_subsample(ds, {{0, 501}}, 1), ParamError);
}

TEST_CASE("filter_classes, concat, remap_labels") {
  const LabeledDataset ds = synth_generate(4, 3, 2, 1.0, 2);
  const LabeledDataset two = filter_classes(ds, {1, 3});
  CHECK(two.size() == 6);
  CHECK(two.class_set == std::vector<int>{1, 3});

  const LabeledDataset a = filter_classes(ds, {0});
  const LabeledDataset b = filter_classes(ds, {2});
  const LabeledDataset ab = concat(a, b);
  CHECK(ab.size() == 6);
  CHECK_THROWS_AS(concat(a, a), InputError);  // duplicate ids

  const LabeledDataset renamed = remap_labels(two, {{1, 0}, {3, 1}});
  CHECK(renamed.class_set == std::vector<int>{0, 1});
  CHECK_THROWS_AS(remap_labels(two, {{1, 0}}), InputError);
}

TEST_CASE("csv round trip preserves the dataset exactly") {
  const LabeledDataset ds = synth_generate(3, 4, 5, 1.0, 10);
  const std::string path = temp_path("cilfair_test_data.csv");
  save_csv(ds, path);
  const LabeledDataset back = load_csv(path);
  REQUIRE(back.size() == ds.size());
  CHECK(back.feature_dim == ds.feature_dim);
  CHECK(back.class_set == ds.class_set);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.samples[i].id == ds.samples[i].id);
    CHECK(back.samples[i].label == ds.samples[i].label);
    CHECK(back.samples[i].features == ds.samples[i].features);  // bit-exact
  }
  std::remove(path.c_str());
}

TEST_CASE("csv header-only and malformed rows") {
  const std::string path = temp_path("cilfair_test_header.csv");
  write_text_file(path, "id,label,f0,f1\n");
  const LabeledDataset empty = load_csv(path);
  CHECK(empty.empty());
  CHECK(empty.feature_dim == 2);

  write_text_file(path, "id,label,f0,f1\n0,1,0.5\n");
  try {
    load_csv(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::remove(path.c_str());
}
