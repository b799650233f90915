//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <atomic>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "molr/dataset.h"
#include "molr/random.h"
#include "support/test_support.h"

namespace molr {
namespace {

using testing::TempDir;
using testing::slurp;
using testing::spit;

TraceRecord make_trace(int i) {
  TraceRecord r;
  r.id = "rec-" + std::to_string(i);
  r.caption = "caption \"" + std::to_string(i) + "\" with ünïcode\nand newline";
  r.smiles = i % 2 ? "CCO" : "c1ccccc1";
  r.trace = "step " + std::to_string(i) + "\ttab";
  r.iteration = i % 4;
  r.provenance = static_cast<Provenance>(i % 3);
  if (i % 5)
    r.judge_score = (i % 11) * 0.9;
  return r;
}

RawPair make_raw(int i) {
  return RawPair { "p" + std::to_string(i), "caption " + std::to_string(i),
                   i % 3 ? "CCO" : "CC(=O)O" };
}

TEST(Serialization, FieldOrder) {
  TraceRecord r = make_trace(1);
  r.caption = "c";
  r.trace = "t";
  r.judge_score = 8.5;
  EXPECT_EQ(to_json_line(r),
            R"({"id":"rec-1","caption":"c","smiles":"CCO","trace":"t",)"
            R"("iteration":1,"provenance":"resampled","judge_score":8.5})");
  r.judge_score.reset();
  EXPECT_NE(to_json_line(r).find(R"("judge_score":null)"), std::string::npos);
  EXPECT_EQ(to_json_line(RawPair { "a", "b", "C" }),
            R"({"id":"a","caption":"b","smiles":"C"})");
}

TEST(Serialization, Errors) {
  try {
    trace_record_from_json("{not json");
    FAIL();
  } catch (const DatasetError &e) {
    EXPECT_EQ(e.kind(), DatasetErrorKind::kMalformedLine);
  }
  try {
    validate(raw_pair_from_json(R"({"id":"x","caption":"c","smiles":"C("})"));
    FAIL();
  } catch (const DatasetError &e) {
    EXPECT_EQ(e.kind(), DatasetErrorKind::kValidationFailure);
    EXPECT_EQ(e.id(), "x");
  }
  TraceRecord bad = make_trace(2);
  bad.trace = "";
  EXPECT_THROW(validate(bad), DatasetError);
  bad = make_trace(2);
  bad.judge_score = 11.0;
  EXPECT_THROW(validate(bad), DatasetError);
  bad = make_trace(2);
  bad.iteration = -1;
  EXPECT_THROW(validate(bad), DatasetError);
  EXPECT_EQ(provenance_from_string("expert"), Provenance::kExpert);
  EXPECT_FALSE(provenance_from_string("human").has_value());
}

TEST(Store, RoundTripThousandRecords) {
  TempDir dir;
  std::vector<TraceRecord> records;
  for (int i = 0; i < 1000; ++i)
    records.push_back(make_trace(i));
  {
    TraceStore store = TraceStore::open_or_create(dir / "r.jsonl");
    EXPECT_EQ(store.append(records), 1000u);
  }
  TraceStore back = TraceStore::load(dir / "r.jsonl");
  EXPECT_EQ(back.records(), records);
  EXPECT_EQ(back.find("rec-17"), records[17]);
  EXPECT_FALSE(back.contains("rec-1000"));
}

TEST(Store, InvalidLineNamesTheId) {
  TempDir dir;
  spit(dir / "d.jsonl", to_json_line(make_raw(0)) + "\n\n"
                            + R"({"id":"bad","caption":"c","smiles":"C1CC"})" + "\n");
  try {
    RawStore::load(dir / "d.jsonl");
    FAIL();
  } catch (const DatasetError &e) {
    EXPECT_EQ(e.kind(), DatasetErrorKind::kValidationFailure);
    EXPECT_EQ(e.id(), "bad");
    EXPECT_EQ(e.line(), 3u);
  }
  spit(dir / "m.jsonl", "{\"id\":\n");
  try {
    RawStore::load(dir / "m.jsonl");
    FAIL();
  } catch (const DatasetError &e) {
    EXPECT_EQ(e.kind(), DatasetErrorKind::kMalformedLine);
    EXPECT_EQ(e.line(), 1u);
  }
  try {
    RawStore::load(dir / "missing.jsonl");
    FAIL();
  } catch (const DatasetError &e) {
    EXPECT_EQ(e.kind(), DatasetErrorKind::kIo);
  }
}

TEST(Store, DuplicateFileLinesRejected) {
  TempDir dir;
  spit(dir / "d.jsonl", to_json_line(make_raw(1)) + "\n" + to_json_line(make_raw(1)) + "\n");
  try {
    RawStore::load(dir / "d.jsonl");
    FAIL();
  } catch (const DatasetError &e) {
    EXPECT_EQ(e.kind(), DatasetErrorKind::kDuplicateId);
  }
}

TEST(Store, FailedAppendWritesNothing) {
  TempDir dir;
  RawStore store = RawStore::open_or_create(dir / "d.jsonl");
  std::vector<RawPair> first { make_raw(1), make_raw(2) };
  store.append(first);
  std::string before = slurp(dir / "d.jsonl");

  std::vector<RawPair> dup_in_batch { make_raw(3), make_raw(3) };
  try {
    store.append(dup_in_batch);
    FAIL();
  } catch (const DatasetError &e) {
    EXPECT_EQ(e.kind(), DatasetErrorKind::kDuplicateId);
  }
  std::vector<RawPair> dup_existing { make_raw(4), make_raw(1) };
  EXPECT_THROW(store.append(dup_existing), DatasetError);
  std::vector<RawPair> invalid { make_raw(5), RawPair { "p6", "c", "C(" } };
  EXPECT_THROW(store.append(invalid), DatasetError);

  EXPECT_EQ(slurp(dir / "d.jsonl"), before);
  EXPECT_EQ(store.size(), 2u);
  EXPECT_FALSE(std::filesystem::exists(dir / "d.jsonl.tmp"));
  EXPECT_EQ(RawStore::load(dir / "d.jsonl").records(), first);
}

TEST(Store, ConcurrentReadersDuringAppends) {
  TempDir dir;
  RawStore store = RawStore::open_or_create(dir / "d.jsonl");
  std::atomic<bool> done { false };
  std::atomic<int> bad_reads { 0 };
  std::thread reader([&] {
    while (!done) {
      auto recs = store.records();
      for (std::size_t i = 0; i < recs.size(); ++i) {
        if (recs[i].id != "p" + std::to_string(i))
          ++bad_reads;
      }
    }
  });
  for (int i = 0; i < 50; ++i) {
    std::vector<RawPair> one { make_raw(i) };
    store.append(one);
  }
  done = true;
  reader.join();
  EXPECT_EQ(bad_reads, 0);
  EXPECT_EQ(RawStore::load(dir / "d.jsonl").size(), 50u);
}

TEST(Subset, DeterministicUniformSample) {
  TempDir dir;
  RawStore store = RawStore::open_or_create(dir / "d.jsonl");
  std::vector<RawPair> all;
  for (int i = 0; i < 200; ++i)
    all.push_back(make_raw(i));
  store.append(all);

  auto a = sample_subset(store, 50, 7), b = sample_subset(store, 50, 7);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, sample_subset(store, 50, 8));
  std::set<std::string> ids;
  for (const auto &p: a)
    ids.insert(p.id);
  EXPECT_EQ(ids.size(), 50u);

  auto whole = sample_subset(store, 200, 1);
  EXPECT_NE(whole, all);
  std::sort(whole.begin(), whole.end(),
            [](const RawPair &x, const RawPair &y) {
              return std::stoi(x.id.substr(1)) < std::stoi(y.id.substr(1));
            });
  EXPECT_EQ(whole, all);

  try {
    sample_subset(store, 201, 1);
    FAIL();
  } catch (const DatasetError &e) {
    EXPECT_EQ(e.kind(), DatasetErrorKind::kSubsetTooLarge);
  }
}

TEST(Subset, EachItemEquallyLikely) {
  TempDir dir;
  RawStore store = RawStore::open_or_create(dir / "d.jsonl");
  std::vector<RawPair> all;
  for (int i = 0; i < 10; ++i)
    all.push_back(make_raw(i));
  store.append(all);
  std::vector<int> hits(10, 0);
  const int trials = 20000;
  for (int s = 0; s < trials; ++s) {
    for (const auto &p: sample_subset(store, 3, s))
      ++hits[std::stoi(p.id.substr(1))];
  }
  // Expected 6000 each; the binomial standard deviation is about 65.
  for (int h: hits)
    EXPECT_NEAR(h, trials * 3 / 10, 400);
}

TEST(Subset, SelectByIdsAndDangling) {
  TempDir dir;
  RawStore store = RawStore::open_or_create(dir / "d.jsonl");
  std::vector<RawPair> all { make_raw(0), make_raw(1) };
  store.append(all);
  std::vector<std::string> ids { "p1", "p0" };
  auto sel = select_by_ids(store, ids);
  ASSERT_EQ(sel.size(), 2u);
  EXPECT_EQ(sel[0].id, "p1");
  std::vector<std::string> unknown { "p9" };
  EXPECT_THROW(select_by_ids(store, unknown), DatasetError);

  TraceRecord ok = make_trace(0);
  ok.id = "p1";
  ok.smiles = "OCC";  // canonically equal to p1's CCO
  TraceRecord wrong_smiles = ok;
  wrong_smiles.id = "p0";
  wrong_smiles.smiles = "CCN";
  TraceRecord missing = ok;
  missing.id = "p7";
  std::vector<TraceRecord> traces { ok, wrong_smiles, missing };
  EXPECT_EQ(dangling_traces(traces, store), (std::vector<std::string> { "p0", "p7" }));
}

TEST(AtomicWrite, ReplacesWholeFile) {
  TempDir dir;
  write_file_atomic(dir / "f.txt", "first");
  write_file_atomic(dir / "f.txt", "second");
  EXPECT_EQ(slurp(dir / "f.txt"), "second");
  EXPECT_FALSE(std::filesystem::exists(dir / "f.txt.tmp"));
}

}  // namespace
}  // namespace molr
