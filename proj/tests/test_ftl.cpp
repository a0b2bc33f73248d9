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

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "nandcam/error.hpp"
#include "nandcam/ftl.hpp"
#include "oracles.hpp"

using namespace nandcam;

namespace {

Errc code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Io;
}

Entry tag_entry(std::uint64_t i, std::uint32_t bytes) {
  Entry e(bytes, 0);
  for (std::uint32_t b = 0; b < bytes && b < 8; ++b) e[b] = static_cast<std::uint8_t>(i >> (8 * b));
  return e;
}

// Host-side mirror of a region: element text, entry and liveness per ordinal.
struct Mirror {
  std::vector<std::string> text;
  std::vector<Entry> entries;
  std::vector<bool> live;

  std::vector<std::uint64_t> scan(const std::string& key) const {
    return oracle::scan(key, text, live);
  }
};

void add(Mirror& m, std::vector<TernaryValue>& elems, std::vector<Entry>& entries,
         std::mt19937_64& rng, std::size_t n, std::uint32_t bits, std::uint32_t entry_bytes) {
  for (std::size_t i = 0; i < n; ++i) {
    m.text.push_back(oracle::random_binary(rng, bits));
    m.entries.push_back(tag_entry(m.text.size() - 1, entry_bytes));
    m.live.push_back(true);
    elems.push_back(TernaryValue::parse(m.text.back()));
    entries.push_back(m.entries.back());
  }
}

SearchResult search(SearchManager& ftl, RegionId id, const std::string& key,
                    std::uint64_t max_results = UINT64_MAX, std::uint64_t resume = 0) {
  SearchRequest req;
  req.keys = {TernaryValue::parse(key)};
  req.max_results = max_results;
  req.resume_ordinal = resume;
  return ftl.execute_search(id, req);
}

}  // namespace

TEST_CASE("search and data placement") {
  const SsdConfig cfg;
  std::set<std::pair<std::uint32_t, std::uint32_t>> dies;
  for (std::uint64_t s = 0; s < 64; ++s) {
    const auto a = search_slot_address(cfg, s);
    dies.insert({a.channel, a.die});
    CHECK(a.block == 0);
    CHECK(a.plane == 0);
  }
  CHECK(dies.size() == 64);
  CHECK(search_slot_address(cfg, 64).block == 1);
  CHECK(search_slot_address(cfg, 0).channel != search_slot_address(cfg, 1).channel);

  const auto d0 = data_page_address(cfg, 0);
  CHECK(d0.plane == 1);
  CHECK(d0.block == 2047);
  CHECK(data_page_address(cfg, 1).channel == 1);
  CHECK(data_page_address(cfg, 8).die == 1);
  CHECK(data_page_address(cfg, 64).page == 1);
  CHECK(code_of([&] { search_slot_address(cfg, 64ULL * 4096); }) == Errc::OffsetOutOfRange);
  CHECK(code_of([&] { data_page_address(cfg, 64ULL * 196 * 4096); }) == Errc::OffsetOutOfRange);
}

TEST_CASE("early termination keeps every set bit") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t bits = 512 * (1 + rng() % 8);
    std::vector<bool> ref(bits, false);
    MatchVector v(bits);
    const double density = (rng() % 4 == 0) ? 0.0 : std::ldexp(1.0, -static_cast<int>(rng() % 12));
    std::uniform_real_distribution<double> u(0, 1);
    for (std::size_t i = 0; i < bits; ++i) {
      if (u(rng) < density) {
        ref[i] = true;
        v.set(i);
      }
    }
    const std::uint32_t burst = 8U << (rng() % 4);
    const DecodedMatches d = decode_match_vector(v, burst);
    CHECK(d.ordinals == oracle::set_bits(ref));
    CHECK(reconstruct(d) == d.ordinals);
    CHECK(d.total_bursts == bits / 8 / burst);
    CHECK(d.bursts.size() + d.zero_bursts == d.total_bursts);
    CHECK(d.buffered_bytes() + d.saved_bytes() == bits / 8);
    // Oracle: count bursts with at least one set bit.
    std::uint64_t nonzero = 0;
    for (std::size_t b = 0; b < d.total_bursts; ++b) {
      bool any = false;
      for (std::size_t i = b * burst * 8; i < (b + 1) * burst * 8; ++i) any = any || ref[i];
      nonzero += any;
    }
    CHECK(d.bursts.size() == nonzero);
  }
  CHECK(code_of([] { decode_match_vector(MatchVector(512), 48); }) == Errc::InvalidArgument);
}

TEST_CASE("expected buffered bytes follows the empirical mean") {
  std::mt19937_64 rng(11);
  for (double p : {0.0001, 0.001, 0.01}) {
    const std::size_t bits = 131072;
    double sum = 0;
    const int trials = 40;
    std::bernoulli_distribution bern(p);
    for (int t = 0; t < trials; ++t) {
      MatchVector v(bits);
      for (std::size_t i = 0; i < bits; ++i) {
        if (bern(rng)) v.set(i);
      }
      sum += static_cast<double>(decode_match_vector(v, 64).buffered_bytes());
    }
    CHECK(sum / trials == doctest::Approx(expected_buffered_bytes(bits, 64, p)).epsilon(0.05));
  }
  CHECK(expected_buffered_bytes(131072, 64, 0.0) == 0.0);
  CHECK(expected_buffered_bytes(131072, 64, 1.0) == doctest::Approx(16384.0));
}

TEST_CASE("result compaction packs entries back to back") {
  std::vector<Entry> entries;
  Entry flat;
  for (std::uint8_t i = 0; i < 13; ++i) {
    entries.push_back(Entry(7, i));
    flat.insert(flat.end(), 7, i);
  }
  const auto blocks = compact_results(entries, 16);
  CHECK(blocks.size() == host_blocks_needed(13, 7, 16));
  Entry joined;
  for (const auto& b : blocks) {
    CHECK(b.size() <= 16);
    joined.insert(joined.end(), b.begin(), b.end());
  }
  CHECK(joined == flat);
  CHECK(host_blocks_needed(0, 7, 16) == 0);
  CHECK(host_blocks_needed(1, 512, 4096) == 1);
  CHECK(host_blocks_needed(9, 512, 4096) == 2);

  HostBlockStream hs(13 * 7, 16);
  std::uint64_t sent = 0;
  for (int i = 0; i < 13; ++i) sent += hs.push(7);
  sent += hs.flush();
  CHECK(sent == hs.total());
  CHECK(sent == 16 * host_blocks_needed(13, 7, 16));
}

TEST_CASE("execute_search matches a host scan across widths and block counts") {
  const SsdConfig cfg = oracle::tiny_config();
  std::mt19937_64 rng(5);
  for (std::uint32_t bits : {4U, 9U, 10U, 20U, 36U}) {
    SearchManager ftl(cfg);
    Mirror m;
    std::vector<TernaryValue> elems;
    std::vector<Entry> entries;
    add(m, elems, entries, rng, 700, bits, 6);
    const RegionId id = ftl.allocate_region(bits, 6, elems.size(), elems, entries);
    CHECK(ftl.descriptor(id).blocks_per_element == (bits + 8) / 9);
    for (int k = 0; k < 60; ++k) {
      const std::string key = oracle::random_key(rng, bits, 0.5, &m.text[rng() % m.text.size()]);
      const SearchResult r = search(ftl, id, key);
      const auto expect = m.scan(key);
      REQUIRE(r.ordinals == expect);
      REQUIRE(r.entries.size() == expect.size());
      for (std::size_t i = 0; i < expect.size(); ++i) CHECK(r.entries[i] == m.entries[expect[i]]);
    }
  }
}

TEST_CASE("append stages, flushes and stays searchable") {
  const SsdConfig cfg = oracle::tiny_config();
  std::mt19937_64 rng(9);
  SearchManager ftl(cfg);
  const RegionId id = ftl.allocate_region(8, 4, 0);
  Mirror m;
  for (int round = 0; round < 6; ++round) {
    std::vector<TernaryValue> elems;
    std::vector<Entry> entries;
    add(m, elems, entries, rng, 150, 8, 4);
    ftl.append(id, elems, entries);
    CHECK(ftl.staged_count(id) == m.text.size() % 512);
    for (int k = 0; k < 20; ++k) {
      const std::string key = oracle::random_key(rng, 8, 0.5, &m.text[rng() % m.text.size()]);
      CHECK(search(ftl, id, key).ordinals == m.scan(key));
    }
  }
  ftl.flush(id);
  CHECK(ftl.staged_count(id) == 0);
  for (int k = 0; k < 20; ++k) {
    const std::string key = oracle::random_key(rng, 8, 0.3, &m.text[rng() % m.text.size()]);
    const auto r = search(ftl, id, key);
    CHECK(r.ordinals == m.scan(key));
    for (std::size_t i = 0; i < r.ordinals.size(); ++i) {
      CHECK(r.entries[i] == m.entries[r.ordinals[i]]);
    }
  }
  CHECK(ftl.search_blocks_in_use() == 2);

  std::vector<TernaryValue> x{TernaryValue::parse("1X000000")};
  std::vector<Entry> e{Entry(4, 0)};
  CHECK(code_of([&] { ftl.append(id, x, e); }) == Errc::DontCareStored);
  std::vector<TernaryValue> shortv{TernaryValue::parse("1")};
  CHECK(code_of([&] { ftl.append(id, shortv, e); }) == Errc::WidthMismatch);
}

TEST_CASE("deletes interleaved with searches") {
  const SsdConfig cfg = oracle::tiny_config();
  std::mt19937_64 rng(21);
  SearchManager ftl(cfg);
  Mirror m;
  std::vector<TernaryValue> elems;
  std::vector<Entry> entries;
  add(m, elems, entries, rng, 900, 12, 8);
  const RegionId id = ftl.allocate_region(12, 8, elems.size(), elems, entries);
  for (int k = 0; k < 200; ++k) {
    const std::string key = oracle::random_key(rng, 12, 0.3, &m.text[rng() % m.text.size()]);
    if (k % 10 == 9) {
      const auto hits = m.scan(key);
      const MutationResult d = ftl.delete_matching(id, TernaryValue::parse(key));
      CHECK(d.count == hits.size());
      for (auto o : hits) m.live[o] = false;
    } else {
      CHECK(search(ftl, id, key).ordinals == m.scan(key));
    }
  }
}

TEST_CASE("pagination returns every match exactly once in order") {
  const SsdConfig cfg = oracle::tiny_config();
  std::mt19937_64 rng(4);
  SearchManager ftl(cfg);
  Mirror m;
  std::vector<TernaryValue> elems;
  std::vector<Entry> entries;
  add(m, elems, entries, rng, 1500, 6, 4);
  const RegionId id = ftl.allocate_region(6, 4, elems.size(), elems, entries);
  for (std::uint64_t page : {1ULL, 7ULL, 64ULL, 1000ULL}) {
    const std::string key = "1XXXX0";
    std::vector<std::uint64_t> all;
    std::uint64_t resume = 0;
    for (;;) {
      const SearchResult r = search(ftl, id, key, page, resume);
      CHECK(r.ordinals.size() <= page);
      all.insert(all.end(), r.ordinals.begin(), r.ordinals.end());
      if (!r.continuation) break;
      CHECK(r.remaining.front() == *r.continuation);
      resume = *r.continuation;
    }
    CHECK(all == m.scan(key));
  }
}

TEST_CASE("sub-key reductions") {
  const SsdConfig cfg = oracle::tiny_config();
  std::mt19937_64 rng(8);
  SearchManager ftl(cfg);
  Mirror m;
  std::vector<TernaryValue> elems;
  std::vector<Entry> entries;
  add(m, elems, entries, rng, 600, 16, 4);
  const RegionId id = ftl.allocate_region(16, 4, elems.size(), elems, entries);
  for (int k = 0; k < 30; ++k) {
    const std::string a = oracle::random_key(rng, 16, 0.7);
    const std::string b = oracle::random_key(rng, 16, 0.7);
    const auto sa = m.scan(a);
    const auto sb = m.scan(b);
    std::vector<std::uint64_t> both;
    std::vector<std::uint64_t> either;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(both));
    std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(either));
    SearchRequest req;
    req.keys = {TernaryValue::parse(a), TernaryValue::parse(b)};
    req.reduction = Reduction::And;
    CHECK(ftl.execute_search(id, req).ordinals == both);
    req.reduction = Reduction::Or;
    CHECK(ftl.execute_search(id, req).ordinals == either);
  }
}

TEST_CASE("associative update changes entries in place") {
  const SsdConfig cfg = oracle::tiny_config();
  SearchManager ftl(cfg);
  std::vector<TernaryValue> elems;
  std::vector<Entry> entries;
  for (std::uint64_t i = 0; i < 40; ++i) {
    elems.push_back(TernaryValue::from_uint(i % 4, 2));
    entries.push_back(tag_entry(i, 4));
  }
  RegionOptions opt;
  opt.numeric_entries = true;
  const RegionId id = ftl.allocate_region(2, 4, elems.size(), elems, entries, opt);
  const MovementCounters before = ftl.counters();
  CHECK(ftl.associative_update(id, TernaryValue::parse("01"), UpdateOp::Add, 100).count == 10);
  CHECK(ftl.associative_update(id, TernaryValue::parse("10"), UpdateOp::Set, -1).count == 10);
  CHECK(ftl.counters().cpu_fe_bytes == before.cpu_fe_bytes);

  std::vector<std::uint64_t> all(40);
  for (std::uint64_t i = 0; i < 40; ++i) all[i] = i;
  const SearchResult r = ftl.fetch(id, all);
  for (std::uint64_t i = 0; i < 40; ++i) {
    std::int64_t v = static_cast<std::int32_t>(r.entries[i][0] | r.entries[i][1] << 8 |
                                               r.entries[i][2] << 16 |
                                               static_cast<std::uint32_t>(r.entries[i][3]) << 24);
    const std::int64_t expect = i % 4 == 1 ? static_cast<std::int64_t>(i) + 100
                                : i % 4 == 2 ? -1
                                             : static_cast<std::int64_t>(i);
    CHECK(v == expect);
  }

  const RegionId plain = ftl.allocate_region(2, 4, elems.size(), elems, entries);
  CHECK(code_of([&] { ftl.associative_update(plain, TernaryValue::parse("01"), UpdateOp::Add, 1); }) ==
        Errc::NonNumericEntries);
}

TEST_CASE("region bookkeeping and errors") {
  const SsdConfig cfg = oracle::tiny_config();
  SearchManager ftl(cfg);
  const RegionId reserved = ftl.allocate_region(8, 16, 1200);
  CHECK(ftl.search_blocks_in_use() == 3);
  CHECK(ftl.link_table(reserved).size() == 3);
  CHECK(ftl.link_table_bytes() == 3 * kLinkTableEntryBytes);
  CHECK(search(ftl, reserved, "XXXXXXXX").ordinals.empty());

  CHECK(code_of([&] { search(ftl, 99, "1"); }) == Errc::UnknownRegion);
  CHECK(code_of([&] { search(ftl, reserved, "111111111"); }) == Errc::KeyTooWide);
  CHECK(code_of([&] { ftl.allocate_region(9 * 4 + 1, 4, 1); }) == Errc::ElementWiderThanSupported);
  CHECK(code_of([&] { ftl.allocate_region(8, 4, 512ULL * 1000); }) == Errc::CapacityExhausted);
  CHECK(ftl.search_blocks_in_use() == 3);

  ftl.deallocate_region(reserved);
  CHECK_FALSE(ftl.has_region(reserved));
  CHECK(ftl.search_blocks_in_use() == 0);
  const RegionId again = ftl.allocate_region(8, 16, 10);
  CHECK(ftl.descriptor(again).blocks.front() == search_slot_address(cfg, 0));
}

TEST_CASE("counters close over operations") {
  const SsdConfig cfg = oracle::tiny_config();
  std::mt19937_64 rng(2);
  SearchManager ftl(cfg);
  Mirror m;
  std::vector<TernaryValue> elems;
  std::vector<Entry> entries;
  add(m, elems, entries, rng, 800, 8, 8);
  const RegionId id = ftl.allocate_region(8, 8, elems.size(), elems, entries);
  MovementCounters sum = ftl.counters();
  for (int k = 0; k < 20; ++k) {
    const SearchResult r = search(ftl, id, oracle::random_key(rng, 8, 0.5));
    sum += r.movement;
    CHECK(r.movement.srch_count == 2);
    CHECK(r.movement.cpu_fe_bytes == 64 * r.host_blocks);
    CHECK(r.latency.total.count() <= r.latency.component_sum().count() + 1e-9);
    CHECK(r.latency.total.count() >= cfg.t_search.count());
  }
  sum += ftl.delete_matching(id, TernaryValue::parse("1XXXXXXX")).movement;
  CHECK(sum == ftl.counters());
}
