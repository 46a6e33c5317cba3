// Copyright 2026 The whisqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "test_util.hpp"
#include "whisqa/errors.hpp"
#include "whisqa/data.hpp"
#include "whisqa/objectives.hpp"

namespace whisqa {
namespace {

DatasetRecord record(const std::string& id, const std::string& tag, double mos, Subset subset = Subset::train) {
  DatasetRecord r;
  r.id = id;
  r.feature_path = id + ".wsqf";
  r.labels[0] = mos;
  r.dataset = tag;
  r.subset = subset;
  return r;
}

std::vector<DatasetRecord> corpus(const std::string& tag, std::size_t n, Subset subset = Subset::train) {
  std::vector<DatasetRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(record(tag + "_" + std::to_string(i), tag, 1.0 + static_cast<double>(i % 9) * 0.5, subset));
  }
  return out;
}

std::vector<DatasetRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_manifest(in, "m.csv", "/data");
}

const std::string kHeader = "id,feature_path,mos,noi,col,dis,loud,scale,dataset,subset\n";

// Normalization --------------------------------------------------------------------

TEST(Normalize, MosEndpointsAndMidpoint) {
  EXPECT_EQ(normalize_label(5, LabelScale::mos_1_5), 1.0);
  EXPECT_EQ(normalize_label(1, LabelScale::mos_1_5), 0.2);
  EXPECT_NEAR(normalize_label(3, LabelScale::mos_1_5), 0.6, 1e-15);
}

TEST(Normalize, MushraLinearMap) {
  EXPECT_EQ(normalize_label(10, LabelScale::mushra_0_10), 1.0);
  EXPECT_NEAR(normalize_label(0, LabelScale::mushra_0_10), 0.2, 1e-15);
  EXPECT_NEAR(normalize_label(5, LabelScale::mushra_0_10), 0.6, 1e-15);
}

TEST(Normalize, NormalizedIsIdentity) {
  EXPECT_EQ(normalize_label(0.37, LabelScale::normalized), 0.37);
  EXPECT_THROW(normalize_label(0.1, LabelScale::normalized), RangeError);
}

TEST(Normalize, OutOfBounds) {
  EXPECT_THROW(normalize_label(5.5, LabelScale::mos_1_5), RangeError);
  EXPECT_THROW(normalize_label(0.5, LabelScale::mos_1_5), RangeError);
  EXPECT_THROW(normalize_label(-1, LabelScale::mushra_0_10), RangeError);
}

TEST(Denormalize, Cases) {
  EXPECT_EQ(denormalize(0.2), 1.0);
  EXPECT_EQ(denormalize(1.0), 5.0);
  EXPECT_NEAR(denormalize(0.7), 3.5, 1e-15);
  EXPECT_THROW(denormalize(0.1), RangeError);
  EXPECT_THROW(denormalize(1.01), RangeError);
}

TEST(Denormalize, InverseOfNormalize) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(1, 5);
    EXPECT_NEAR(denormalize(normalize_label(v, LabelScale::mos_1_5)), v, 1e-14);
    const double q = rng.uniform(0.2, 1);
    EXPECT_NEAR(normalize_label(denormalize(q), LabelScale::mos_1_5), q, 1e-15);
  }
}

// Manifest ------------------------------------------------------------------------------

TEST(Manifest, ParsesRowsInOrder) {
  const auto recs = parse(kHeader +
                          "a,a.wsqf,3.0,,,,,mos_1_5,NISQA,train\n"
                          "b,sub/b.wsqf,4.5,2,3,4,5,mos_1_5,TENCENT,val\n"
                          "c,/abs/c.wsqf,7.5,,,,,mushra_0_10,IUB,test\n");
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0].id, "a");
  EXPECT_EQ(*recs[0].labels[0], 3.0);
  EXPECT_FALSE(recs[0].labels[1].has_value());
  EXPECT_EQ(recs[0].feature_path, std::filesystem::path("/data/a.wsqf"));
  EXPECT_EQ(recs[1].feature_path, std::filesystem::path("/data/sub/b.wsqf"));
  EXPECT_EQ(recs[2].feature_path, std::filesystem::path("/abs/c.wsqf"));
  EXPECT_EQ(*recs[1].labels[4], 5.0);
  EXPECT_EQ(recs[1].subset, Subset::val);
  EXPECT_EQ(recs[2].scale, LabelScale::mushra_0_10);
  EXPECT_NEAR(recs[2].normalized(0), 0.8, 1e-15);
}

TEST(Manifest, ColumnOrderIsFree) {
  const auto recs = parse("dataset,subset,scale,mos,feature_path,id\nX,train,mos_1_5,2,f.wsqf,r1\n");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].id, "r1");
  EXPECT_EQ(*recs[0].labels[0], 2.0);
}

TEST(Manifest, OutOfRangeLabelNamesRow) {
  try {
    parse(kHeader + "a,a.wsqf,3.0,,,,,mos_1_5,N,train\nb,b.wsqf,6.0,,,,,mos_1_5,N,train\n");
    FAIL();
  } catch (const RangeError& e) {
    EXPECT_NE(std::string(e.what()).find("m.csv:3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("mos"), std::string::npos);
  }
}

TEST(Manifest, Errors) {
  EXPECT_THROW(parse("id,feature_path,scale,dataset,subset\na,a,mos_1_5,N,train\n"), DataError);
  EXPECT_THROW(parse(kHeader + "a,a.wsqf,3,,,,,likert,N,train\n"), DataError);
  EXPECT_THROW(parse(kHeader + "a,a.wsqf,,2,,,,mos_1_5,N,train\n"), DataError);
  EXPECT_THROW(parse(kHeader + "a,a.wsqf,abc,,,,,mos_1_5,N,train\n"), DataError);
  EXPECT_THROW(parse(kHeader + "a,a.wsqf,3,,,,,mos_1_5,N\n"), DataError);
  EXPECT_THROW(parse(kHeader + "a,a.wsqf,3,,,,,mos_1_5,N,holdout\n"), DataError);
  EXPECT_THROW(parse("id,feature_path,mos,scale,dataset,subset,extra\n"), DataError);
  EXPECT_THROW(parse(""), DataError);
  EXPECT_THROW(parse_manifest("/nonexistent/manifest.csv"), DataError);
}

TEST(Manifest, WriteThenParseRoundTrip) {
  auto recs = corpus("RT", 5);
  recs[2].labels[3] = 1.5;
  recs[4].scale = LabelScale::normalized;
  recs[4].labels[0] = 0.55;
  std::ostringstream out;
  write_manifest(out, recs);
  std::istringstream in(out.str());
  const auto back = parse_manifest(in, "rt.csv", "");
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].id, recs[i].id);
    EXPECT_EQ(back[i].labels, recs[i].labels);
    EXPECT_EQ(back[i].scale, recs[i].scale);
  }
}

// Combination and splitting ---------------------------------------------------------------

TEST(Combine, SizesFollowSelection) {
  auto all = corpus("NISQA", 11020);
  const auto tencent = corpus("TENCENT", 9250);
  all.insert(all.end(), tencent.begin(), tencent.end());
  const auto test = corpus("NISQA", 40, Subset::test);
  all.insert(all.end(), test.begin(), test.end());

  const auto one = combine_datasets(all, {"NISQA"});
  EXPECT_EQ(one.total, 11020u);
  EXPECT_EQ(one.train.size(), 11020u);
  EXPECT_EQ(one.sizes.at("NISQA"), 11020u);

  const auto two = combine_datasets(all, {"NISQA", "TENCENT"});
  EXPECT_EQ(two.total, 20270u);
  std::size_t sum = 0;
  for (const auto& [tag, n] : two.sizes) sum += n;
  EXPECT_EQ(sum, two.total);
  for (const auto& r : two.train) EXPECT_TRUE(r.dataset == "NISQA" || r.dataset == "TENCENT");
}

TEST(Combine, Errors) {
  const auto all = corpus("A", 20);
  EXPECT_THROW(combine_datasets(all, {}), DataError);
  EXPECT_THROW(combine_datasets(all, {"B"}), DataError);
}

TEST(Split, NinetyTen) {
  const auto ds = combine_datasets(corpus("A", 100), {"A"});
  const auto s = split_validation(ds, 0.1, 7);
  EXPECT_EQ(s.train.size(), 90u);
  EXPECT_EQ(s.val.size(), 10u);
  EXPECT_EQ(s.sizes.at("A"), 90u);
}

TEST(Split, DeterministicPerSeed) {
  const auto ds = combine_datasets(corpus("A", 57), {"A"});
  const auto ids = [](const CombinedDataset& c) {
    std::vector<std::string> v;
    for (const auto& r : c.val) v.push_back(r.id);
    return v;
  };
  EXPECT_EQ(ids(split_validation(ds, 0.1, 3)), ids(split_validation(ds, 0.1, 3)));
  EXPECT_NE(ids(split_validation(ds, 0.1, 3)), ids(split_validation(ds, 0.1, 4)));
}

TEST(Split, PartitionPropertyPerTag) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<DatasetRecord> all;
    std::vector<std::string> tags;
    const std::size_t k = 1 + rng.below(4);
    for (std::size_t t = 0; t < k; ++t) {
      tags.push_back("T" + std::to_string(t));
      const auto c = corpus(tags.back(), 10 + rng.below(300));
      all.insert(all.end(), c.begin(), c.end());
    }
    const auto ds = combine_datasets(all, tags);
    const auto s = split_validation(ds, 0.1, rng.next());
    std::multiset<std::string> in, out;
    for (const auto& r : ds.train) in.insert(r.id);
    for (const auto& r : s.train) out.insert(r.id);
    for (const auto& r : s.val) {
      EXPECT_EQ(out.count(r.id), 0u);
      out.insert(r.id);
    }
    EXPECT_EQ(in, out);
    for (const auto& tag : tags) {
      const double n = static_cast<double>(ds.sizes.at(tag));
      const auto nval = std::count_if(s.val.begin(), s.val.end(), [&](const auto& r) { return r.dataset == tag; });
      EXPECT_LE(std::abs(static_cast<double>(nval) - 0.1 * n), 1.0) << tag;
      EXPECT_EQ(s.sizes.at(tag), static_cast<std::size_t>(n) - static_cast<std::size_t>(nval));
    }
  }
}

TEST(Split, PredefinedValidationPassesThrough) {
  auto all = corpus("NISQA", 50);
  const auto val = corpus("NISQA_val", 8, Subset::val);
  for (auto r : val) {
    r.dataset = "NISQA";
    all.push_back(r);
  }
  const auto other = corpus("TENCENT", 30);
  all.insert(all.end(), other.begin(), other.end());
  const auto ds = combine_datasets(all, {"NISQA", "TENCENT"});
  const auto s = split_validation(ds, 0.1, 1);
  EXPECT_EQ(s.sizes.at("NISQA"), 50u);
  EXPECT_EQ(s.sizes.at("TENCENT"), 27u);
  std::size_t nisqa_val = 0;
  for (const auto& r : s.val) nisqa_val += r.dataset == "NISQA";
  EXPECT_EQ(nisqa_val, 8u);
}

TEST(Split, TooFewRecords) {
  const auto ds = combine_datasets(corpus("A", 9), {"A"});
  EXPECT_THROW(split_validation(ds, 0.1, 1), DataError);
}

// Batching ----------------------------------------------------------------------------------

TEST(Batches, SizesForThreeHundred) {
  const auto b = make_batches(300, 128, 1, 0);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].size(), 128u);
  EXPECT_EQ(b[1].size(), 128u);
  EXPECT_EQ(b[2].size(), 44u);
}

TEST(Batches, DeterministicAndEpochDependent) {
  EXPECT_EQ(make_batches(300, 128, 5, 2), make_batches(300, 128, 5, 2));
  const auto e0 = make_batches(300, 128, 5, 0), e1 = make_batches(300, 128, 5, 1);
  EXPECT_NE(e0, e1);
  std::multiset<std::size_t> m0, m1;
  for (const auto& b : e0) m0.insert(b.begin(), b.end());
  for (const auto& b : e1) m1.insert(b.begin(), b.end());
  EXPECT_EQ(m0, m1);
}

TEST(Batches, CoverEveryIndexOnce) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(500), batch = 1 + rng.below(200);
    const auto bs = make_batches(n, batch, rng.next(), rng.below(10));
    std::vector<int> seen(n, 0);
    for (std::size_t i = 0; i < bs.size(); ++i) {
      EXPECT_TRUE(bs[i].size() == batch || (i + 1 == bs.size() && bs[i].size() <= batch));
      for (auto idx : bs[i]) ++seen[idx];
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  }
}

TEST(Batches, Errors) {
  EXPECT_THROW(make_batches(0, 4, 1, 0), DataError);
  EXPECT_THROW(make_batches(4, 0, 1, 0), RangeError);
}

// Synthetic data ------------------------------------------------------------------------------

TEST(Synth, NoiselessLabelsEqualPlantedFunction) {
  SynthSpec spec;
  spec.n = 100;
  const auto ds = synth_dataset(spec);
  ASSERT_EQ(ds.records.size(), 100u);
  std::vector<double> level, label;
  for (std::size_t i = 0; i < 100; ++i) {
    const double z = ds.levels[i][0];
    EXPECT_EQ(ds.records[i].normalized(0), planted_quality(z));
    EXPECT_NEAR(planted_quality(z), 0.2 + 0.8 / (1 + std::exp(-z)), 1e-15);
    level.push_back(z);
    label.push_back(ds.records[i].normalized(0));
  }
  EXPECT_EQ(spearman(level, label), 1.0);
}

TEST(Synth, SameSeedSameDataset) {
  SynthSpec spec;
  spec.n = 20;
  spec.noise_sd = 0.05;
  const auto a = synth_dataset(spec), b = synth_dataset(spec);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(a.records[i].labels, b.records[i].labels);
    EXPECT_TRUE(std::equal(a.stacks[i]->data().begin(), a.stacks[i]->data().end(), b.stacks[i]->data().begin()));
  }
  spec.seed = 2;
  const auto c = synth_dataset(spec);
  EXPECT_NE(a.records[0].labels, c.records[0].labels);
}

TEST(Synth, NoisyLabelsClippedAndCorrelatedDimensions) {
  SynthSpec spec;
  spec.n = 500;
  spec.noise_sd = 0.05;
  const auto ds = synth_dataset(spec);
  std::vector<std::vector<double>> dims(kLabelDims);
  for (const auto& r : ds.records) {
    for (std::size_t d = 0; d < kLabelDims; ++d) {
      const double q = r.normalized(d);
      EXPECT_GE(q, 0.2);
      EXPECT_LE(q, 1.0);
      dims[d].push_back(q);
    }
  }
  for (std::size_t d = 1; d < kLabelDims; ++d) {
    const double r = spearman(dims[0], dims[d]);
    EXPECT_GT(r, 0.4);
    EXPECT_LT(r, 0.8);
  }
}

TEST(Synth, HeavyNoiseStillClipped) {
  SynthSpec spec;
  spec.n = 300;
  spec.noise_sd = 0.5;
  for (const auto& r : synth_dataset(spec).records) {
    for (std::size_t d = 0; d < kLabelDims; ++d) {
      EXPECT_GE(r.normalized(d), 0.2);
      EXPECT_LE(r.normalized(d), 1.0);
    }
  }
}

TEST(Synth, Errors) {
  SynthSpec spec;
  spec.n = 0;
  EXPECT_THROW(synth_dataset(spec), DataError);
  spec.n = 3;
  spec.dims = {2, 0, 3};
  EXPECT_THROW(synth_dataset(spec), ShapeError);
}

TEST(Synth, WrittenCorpusLoadsBack) {
  SynthSpec spec;
  spec.n = 12;
  auto ds = synth_dataset(spec);
  const auto dir = testing::scratch_dir("synth_write");
  const auto manifest = write_synth_dataset(ds, dir);
  const auto recs = parse_manifest(manifest);
  ASSERT_EQ(recs.size(), 12u);
  const auto ex = load_examples(recs, {"MOS", "LOUD"});
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_TRUE(std::equal(ex[i].features->data().begin(), ex[i].features->data().end(),
                           ds.stacks[i]->data().begin()));
    EXPECT_EQ(ex[i].targets[0], ds.records[i].normalized(0));
    EXPECT_EQ(ex[i].targets[1], ds.records[i].normalized(4));
  }
}

TEST(LoadExamples, MissingHeadLabel) {
  SynthSpec spec;
  spec.n = 2;
  auto ds = synth_dataset(spec);
  const auto dir = testing::scratch_dir("missing_head");
  write_synth_dataset(ds, dir);
  auto recs = parse_manifest(dir / "manifest.csv");
  recs[1].labels[2].reset();
  EXPECT_THROW(load_examples(recs, {"MOS", "NOI", "COL", "DIS", "LOUD"}), DataError);
}

// Distribution ----------------------------------------------------------------------------------

TEST(Distribution, SingleRecord) {
  const std::vector<DatasetRecord> one = {record("x", "A", 3.0)};
  const auto rows = distribution_summary(one);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0].min, 0.6, 1e-15);
  EXPECT_EQ(rows[0].min, rows[0].mean);
  EXPECT_EQ(rows[0].mean, rows[0].max);
  EXPECT_EQ(rows[1].tag, "COMBINED");
}

TEST(Distribution, UniformLabelsMeanWithinThreeStandardErrors) {
  Rng rng(4);
  std::vector<DatasetRecord> recs;
  const std::size_t n = 4000;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = record("u" + std::to_string(i), i % 3 ? "A" : "B", 0);
    r.scale = LabelScale::normalized;
    r.labels[0] = rng.uniform(0.2, 1.0);
    recs.push_back(r);
  }
  const auto rows = distribution_summary(recs);
  ASSERT_EQ(rows.size(), 3u);
  const double se = 0.8 / std::sqrt(12.0) / std::sqrt(static_cast<double>(n));
  EXPECT_NEAR(rows.back().mean, 0.6, 3 * se);
  EXPECT_EQ(rows.back().count, rows[0].count + rows[1].count);
  for (const auto& row : rows) {
    EXPECT_LE(row.min, row.mean);
    EXPECT_LE(row.mean, row.max);
    std::size_t total = 0;
    for (auto c : row.histogram) total += c;
    EXPECT_EQ(total, row.count);
  }
}

TEST(Distribution, CsvHeaderAndEmptyInput) {
  std::ostringstream os;
  const std::vector<DatasetRecord> one = {record("x", "A", 5.0)};
  write_distribution_csv(os, distribution_summary(one));
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "tag,count,min,mean,max,bin00,bin01,bin02,bin03,bin04,bin05,bin06,bin07,bin08,bin09,bin10,bin11,"
            "bin12,bin13,bin14,bin15,bin16,bin17,bin18,bin19");
  EXPECT_THROW(distribution_summary(std::vector<DatasetRecord>{}), DataError);
}

}  // namespace
}  // namespace whisqa
