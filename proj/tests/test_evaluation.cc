/*
 * Copyright 2026 The tempeq Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>

#include "tempeq/error.h"
#include "tempeq/evaluation.h"
#include "tempeq/metrics.h"
#include "test_util.h"

namespace tempeq {
namespace {

using testing::TempDir;
using testing::tiny_generator;

EncoderParams identity_encoder(std::size_t d) {
  EncoderParams enc;
  Tensor2 w(d, d);
  for (std::size_t i = 0; i < d; ++i) w(i, i) = 1.0;
  enc.mlp.layers.push_back({w, std::vector<double>(d, 0.0), Activation::kIdentity});
  return enc;
}

PredictorParams zero_predictor(std::size_t d) {
  PredictorParams p{init_mlp(std::vector<std::size_t>{d + 1, 4, d}, 3)};
  zero_last_layer(p.mlp);
  return p;
}

// 1-D table whose single feature is the label plus a small offset.
EmbeddingTable separable_table(std::size_t n, int window, std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingTable t;
  t.reps = Tensor2(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const char y = i % 4 == 0;
    t.patient_ids.push_back(static_cast<std::int64_t>(i));
    t.months.push_back(0);
    t.labels[window].push_back(y);
    t.reps(i, 0) = (y ? 1.0 : -1.0) + rng.uniform(-0.5, 0.5);
  }
  return t;
}

TEST(Extract, RowCountIsPreConversionVisits) {
  const Dataset ds = generate_cohort(tiny_generator(30));
  const auto enc = identity_encoder(ds.config.obs_dim);
  const auto table = extract_representations(enc, ds, Split::kTest);
  std::size_t expected = 0;
  for (auto id : ds.splits.test)
    for (const auto& v : ds.patient_visits(ds.patient_index(id))) expected += !v.is_converted_already;
  EXPECT_EQ(table.size(), expected);
  EXPECT_EQ(table.labels.size(), 2u);
}

TEST(Extract, IdentityEncoderReturnsRawObservations) {
  const Dataset ds = generate_cohort(tiny_generator(10));
  const auto table = extract_representations(identity_encoder(ds.config.obs_dim), ds, Split::kTrain);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& v = ds.patient_visits(ds.patient_index(table.patient_ids[i]))[table.months[i]];
    EXPECT_FALSE(v.is_converted_already);
    for (std::size_t j = 0; j < v.x.size(); ++j) EXPECT_EQ(table.reps(i, j), v.x[j]);
    EXPECT_EQ(table.labels.at(6)[i], v.converted_within.at(6));
  }
}

TEST(Extract, DeterministicPerCheckpoint) {
  const Dataset ds = generate_cohort(tiny_generator(10));
  const ModelParams m = init_model(testing::tiny_dims(), 9);
  EXPECT_EQ(extract_representations(m.encoder, ds, Split::kVal),
            extract_representations(m.encoder, ds, Split::kVal));
}

TEST(Extract, EmptySplitIsADataError) {
  GeneratorConfig g = tiny_generator(3);
  const Dataset ds = generate_cohort(g);
  Dataset empty = ds;
  empty.splits.val.clear();
  EXPECT_THROW(extract_representations(identity_encoder(g.obs_dim), empty, Split::kVal), DataError);
}

TEST(Extract, EmbeddingsCsvLayout) {
  const Dataset ds = generate_cohort(tiny_generator(6));
  const auto table = extract_representations(identity_encoder(ds.config.obs_dim), ds, Split::kTrain);
  TempDir dir("emb");
  write_embeddings_csv(table, dir.path() / "e.csv");
  const std::string text = testing::slurp(dir.path() / "e.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "patient_id,t,label_6,label_12,r0,r1,r2,r3,r4,r5,r6,r7,r8,r9,r10,r11");
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), table.size() + 1);
}

TEST(Probe, SeparableOneDimensionalTableScoresPerfectly) {
  const auto train = separable_table(80, 6, 1);
  const auto test = separable_table(40, 6, 2);
  const ProbeParams p = train_linear_probe(train, 6, ProbeConfig{});
  EXPECT_EQ(auroc(probe_scores(p, test.reps), test.labels.at(6)), 1.0);
  EXPECT_GT(p.weights[0], 0.0);
}

TEST(Probe, IdenticalEmbeddingsGiveChanceAuroc) {
  auto t = separable_table(40, 6, 3);
  for (double& v : t.reps.flat()) v = 0.25;
  const ProbeParams p = train_linear_probe(t, 6, ProbeConfig{});
  EXPECT_EQ(auroc(probe_scores(p, t.reps), t.labels.at(6)), 0.5);
}

TEST(Probe, DeterministicGivenSeed) {
  const auto t = separable_table(60, 6, 4);
  ProbeConfig c;
  EXPECT_EQ(train_linear_probe(t, 6, c), train_linear_probe(t, 6, c));
  ProbeConfig other = c;
  other.seed = 99;
  other.batch_size = 7;
  EXPECT_NE(train_linear_probe(t, 6, c).weights, train_linear_probe(t, 6, other).weights);
}

TEST(Probe, Errors) {
  auto t = separable_table(10, 6, 5);
  for (char& y : t.labels[6]) y = 0;
  EXPECT_THROW(train_linear_probe(t, 6, ProbeConfig{}), DataError);
  EXPECT_THROW(train_linear_probe(t, 12, ProbeConfig{}), ConfigError);
  ProbeConfig bad;
  bad.folds = 1;
  EXPECT_THROW(bad.validate(), ConfigError);
  ProbeParams p{{1.0, 2.0}, 0.0, {}, {}};
  EXPECT_THROW(probe_scores(p, Tensor2(2, 3)), ShapeError);
}

TEST(Probe, UnstandardizedProbeKeepsNoFeatureStats) {
  const auto t = separable_table(20, 6, 6);
  ProbeConfig c;
  c.standardize = false;
  const auto p = train_linear_probe(t, 6, c);
  EXPECT_TRUE(p.feature_mean.empty());
  EXPECT_TRUE(p.feature_scale.empty());
}

TEST(CrossValidation, FoldsAndSummary) {
  auto pool = separable_table(120, 6, 7);
  // Four visits per patient so folds group rows.
  for (std::size_t i = 0; i < pool.size(); ++i) pool.patient_ids[i] = static_cast<std::int64_t>(i / 4);
  const auto test = separable_table(40, 6, 8);
  const WindowResult r = cross_validated_probe(pool, test, 6, ProbeConfig{});
  ASSERT_EQ(r.folds.size(), 4u);
  double mean = 0.0;
  for (const auto& f : r.folds) {
    EXPECT_EQ(f.auroc, 1.0);
    mean += f.prauc / 4.0;
  }
  EXPECT_NEAR(r.mean.prauc, mean, 1e-15);
  EXPECT_EQ(r.std.auroc, 0.0);
}

TEST(TcSyn, ZeroDisplacementLeavesTableUnchanged) {
  const Dataset ds = generate_cohort(tiny_generator(8));
  const ModelParams m = init_model(testing::tiny_dims(), 5);
  const auto table = extract_representations(m.encoder, ds, Split::kTrain);
  const auto syn = tc_syn_table(table, zero_predictor(8));
  EXPECT_EQ(syn, table);
}

TEST(TcSyn, AveragesWithPropagatedRepresentation) {
  const Dataset ds = generate_cohort(tiny_generator(8));
  const ModelParams m = init_model(testing::tiny_dims(), 5);
  const auto table = extract_representations(m.encoder, ds, Split::kTrain);
  const PredictorParams pred{init_mlp(std::vector<std::size_t>{9, 4, 8}, 6)};
  const auto syn = tc_syn_table(table, pred, 6);
  ASSERT_EQ(syn.size(), table.size());
  EXPECT_EQ(syn.labels, table.labels);
  const Tensor2 moved = propagate(pred, table.reps, std::vector<double>(table.size(), 0.5));
  for (std::size_t i = 0; i < syn.reps.size(); ++i)
    EXPECT_NEAR(syn.reps.flat()[i], 0.5 * (table.reps.flat()[i] + moved.flat()[i]), 1e-15);
}

TEST(TcSyn, RejectsArmsWithoutDisplacementMap) {
  const Dataset ds = generate_cohort(tiny_generator(8));
  Checkpoint ck;
  ck.model = init_model(testing::tiny_dims(), 5);
  const auto table = extract_representations(ck.model.encoder, ds, Split::kTrain);
  ck.arm = Arm::kVicregOnly;
  EXPECT_THROW(tc_syn_table(table, ck), ConfigError);
  ck.arm = Arm::kTcNoDm;
  EXPECT_THROW(tc_syn_table(table, ck), ConfigError);
  ck.arm = Arm::kTcNoReg;
  EXPECT_NO_THROW(tc_syn_table(table, ck));
}

TEST(Diagnostics, ZeroPredictorShowsCollapseFingerprint) {
  const Dataset ds = generate_cohort(tiny_generator(12));
  const ModelParams m = init_model(testing::tiny_dims(), 5);
  const auto d = equivariance_diagnostics(m.encoder, zero_predictor(8), ds,
                                          ds.patient_ids(Split::kTest), DiagnosticsConfig{});
  EXPECT_EQ(d.collapse.mean_dm_norm, 0.0);
  EXPECT_EQ(d.collapse.max_dm_norm, 0.0);
  EXPECT_EQ(d.collapse.sensitivity, 0.0);
  ASSERT_EQ(d.distances.size(), 9u);
  for (const auto& row : d.distances) EXPECT_EQ(row.mean_distance, 0.0);
}

TEST(Diagnostics, DistanceTableEqualsDisplacementNorms) {
  const Dataset ds = generate_cohort(tiny_generator(12));
  const ModelParams m = init_model(testing::tiny_dims(), 5);
  const PredictorParams pred{init_mlp(std::vector<std::size_t>{9, 8, 8}, 7)};
  const auto ids = ds.patient_ids(Split::kPool);
  DiagnosticsConfig cfg;
  cfg.max_patients = 5;
  const auto d = equivariance_diagnostics(m.encoder, pred, ds, ids, cfg);

  std::vector<std::int64_t> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  Tensor2 obs(5, ds.config.obs_dim);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& x = ds.patient_visits(ds.patient_index(sorted[i]))[0].x;
    std::copy(x.begin(), x.end(), obs.row(i).begin());
  }
  const Tensor2 r0 = encode(m.encoder, obs);
  double all = 0.0;
  for (const auto& row : d.distances) {
    const auto norms = row_norms(predict_displacement(pred, r0, std::vector<double>(5, row.dt_months / 12.0)));
    double mean = 0.0;
    for (double v : norms) mean += v / 5.0;
    EXPECT_NEAR(row.mean_distance, mean, 1e-12);
    EXPECT_GE(row.std_distance, 0.0);
    all += mean / 9.0;
  }
  EXPECT_NEAR(d.collapse.mean_dm_norm, all, 1e-12);
  EXPECT_GT(d.collapse.sensitivity, 0.0);
  EXPECT_LE(d.collapse.min_dm_norm, d.collapse.max_dm_norm);
}

TEST(Diagnostics, DistanceCsvHeader) {
  Diagnostics d;
  d.distances = {{1, 0.5, 0.1}, {2, 0.75, 0.0}};
  TempDir dir("dist");
  write_distance_table(d, dir.path() / "t.csv");
  const std::string text = testing::slurp(dir.path() / "t.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "dt_months,mean_distance,std_distance");
  EXPECT_NE(text.find("\n2,0.75,0"), std::string::npos);
}

TEST(Diagnostics, ConfigValidation) {
  DiagnosticsConfig c;
  c.months = {0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = DiagnosticsConfig{};
  c.composition_months = 7;
  EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
}  // namespace tempeq
