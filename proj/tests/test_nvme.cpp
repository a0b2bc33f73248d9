/*
 * Copyright 2026 The nandcam Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <random>

#include "doctest.h"
#include "nandcam/error.hpp"
#include "nandcam/nvme.hpp"
#include "oracles.hpp"

using namespace nandcam;

namespace {

struct Fixture {
  Controller ctl{oracle::tiny_config()};
  std::vector<std::string> text;
  std::vector<bool> live;
  RegionId id = 0;

  explicit Fixture(std::size_t n, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    AllocateCmd a;
    a.element_bits = 10;
    a.entry_bytes = 4;
    a.element_count = n;
    for (std::size_t i = 0; i < n; ++i) {
      text.push_back(oracle::random_binary(rng, 10));
      a.elements.push_back(TernaryValue::parse(text.back()));
      a.entries.push_back(Entry{static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(i >> 8),
                                0, 0});
    }
    live.assign(n, true);
    const CompletionEntry ce = ctl.submit(a);
    REQUIRE(ce.ok());
    id = ce.region;
  }
};

}  // namespace

TEST_CASE("every command pays the NVMe initialization") {
  Fixture f(100);
  const double init = oracle::tiny_config().t_nvme_init.count();
  const CompletionEntry ce = f.ctl.submit(SimpleSearchCmd{f.id, TernaryValue::parse("1"), 1000});
  REQUIRE(ce.ok());
  CHECK(ce.latency[Component::Nvme].count() == doctest::Approx(init));
  CHECK(ce.latency.total.count() >= init + oracle::tiny_config().t_search.count());
  const CompletionEntry bad = f.ctl.submit(SimpleSearchCmd{77, TernaryValue::parse("1"), 4});
  CHECK(bad.status == Status::UnknownRegion);
  CHECK(bad.latency.total.count() == doctest::Approx(init));
  CHECK(f.ctl.submitted() == 3);
}

TEST_CASE("continuation chain returns the full match set") {
  Fixture f(1000);
  for (std::uint64_t buffer : {1ULL, 3ULL, 50ULL, 5000ULL}) {
    const std::string key = "X1XXXXXXX0";
    std::uint64_t submits = 0;
    const auto entries = tcam_search(f.ctl, f.id, TernaryValue::parse(key), buffer, &submits);
    const auto expect = oracle::scan(key, f.text, f.live);
    REQUIRE(entries.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) {
      CHECK((entries[i][0] | entries[i][1] << 8) == static_cast<int>(expect[i]));
    }
    CHECK(submits == (expect.size() + buffer - 1) / buffer + (expect.empty() ? 1 : 0));
  }
}

TEST_CASE("simple search key limits") {
  Fixture f(10);
  CHECK(f.ctl.submit(SimpleSearchCmd{f.id, TernaryValue::wildcard(128), 4}).status ==
        Status::MalformedCommand);
  CHECK(f.ctl.submit(SimpleSearchCmd{f.id, TernaryValue{}, 4}).status ==
        Status::MalformedCommand);
  CHECK(f.ctl.submit(SimpleSearchCmd{f.id, TernaryValue::wildcard(11), 4}).status ==
        Status::KeyTooWide);
  CHECK(f.ctl.submit(SimpleSearchCmd{f.id, TernaryValue::wildcard(3), 0}).status ==
        Status::MalformedCommand);
  CHECK(f.ctl.submit(SearchCmd{f.id, {}, Reduction::Single, 4}).status ==
        Status::MalformedCommand);
}

TEST_CASE("mutations invalidate pending continuations") {
  Fixture f(600);
  const CompletionEntry first = f.ctl.submit(SimpleSearchCmd{f.id, TernaryValue::parse("X"), 10});
  REQUIRE(first.buffer_exceeded);
  REQUIRE(first.continuation);
  const ContinuationToken token = *first.continuation;

  CHECK(f.ctl.submit(DeleteCmd{f.id, TernaryValue::parse("1111111111")}).ok());
  CHECK(f.ctl.submit(SearchContinueCmd{f.id, token, 10}).status == Status::MalformedCommand);

  const CompletionEntry again = f.ctl.submit(SimpleSearchCmd{f.id, TernaryValue::parse("X"), 10});
  REQUIRE(again.continuation);
  AppendCmd app;
  app.region = f.id;
  app.elements = {TernaryValue::parse("0000000000")};
  app.entries = {Entry(4, 0)};
  CHECK(f.ctl.submit(app).ok());
  CHECK(f.ctl.submit(SearchContinueCmd{f.id, *again.continuation, 10}).status ==
        Status::StaleContinuation);

  ContinuationToken wrong = token;
  wrong.region = f.id + 1;
  CHECK(f.ctl.submit(SearchContinueCmd{f.id, wrong, 10}).status == Status::MalformedCommand);
}

TEST_CASE("delete, append and update through commands") {
  Fixture f(300, 4);
  const std::string key = "11XXXXXXXX";
  const auto hits = oracle::scan(key, f.text, f.live);
  const CompletionEntry d = f.ctl.submit(DeleteCmd{f.id, TernaryValue::parse(key)});
  CHECK(d.affected == hits.size());
  CHECK(tcam_search(f.ctl, f.id, TernaryValue::parse(key), 16).empty());

  AllocateCmd a;
  a.element_bits = 4;
  a.entry_bytes = 8;
  a.element_count = 16;
  a.numeric_entries = true;
  for (std::uint64_t i = 0; i < 16; ++i) {
    a.elements.push_back(TernaryValue::from_uint(i, 4));
    a.entries.push_back(Entry(8, 0));
  }
  const RegionId counters = f.ctl.submit(a).region;
  CHECK(tcam_update(f.ctl, counters, TernaryValue::parse("1XXX"), UpdateOp::Add, 5) == 8);
  const auto got = tcam_search(f.ctl, counters, TernaryValue::parse("1000"), 4);
  REQUIRE(got.size() == 1);
  CHECK(got[0][0] == 5);
  CHECK(f.ctl.submit(AssocUpdateCmd{f.id, TernaryValue::parse("1"), UpdateOp::Add, 1}).status ==
        Status::NonNumericEntries);

  CHECK(f.ctl.submit(DeallocateCmd{counters}).ok());
  CHECK(f.ctl.submit(DeallocateCmd{counters}).status == Status::UnknownRegion);
  CHECK_THROWS_AS(tcam_search(f.ctl, counters, TernaryValue::parse("1"), 4), Error);
}

TEST_CASE("status names") {
  CHECK(status_name(Status::StaleContinuation) == "StaleContinuation");
  CHECK(status_name(Status::Success) == "Success");
}
