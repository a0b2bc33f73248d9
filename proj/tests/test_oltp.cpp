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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "nandcam/error.hpp"
#include "nandcam/workloads/oltp.hpp"

using namespace nandcam;
using namespace nandcam::oltp;

TEST_CASE("trace CSV round-trips and reports bad lines") {
  Trace t{{1, "stock", "42", 3}, {2, "customer", "7", 1}};
  std::stringstream ss;
  write_trace(ss, t);
  const Trace back = read_trace(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].index == "stock");
  CHECK(back[1].baseline_pages == 1);

  std::istringstream no_header("5,i,k,2\n");
  CHECK(read_trace(no_header).size() == 1);
  std::istringstream bad("query_id,index,key,baseline_pages\n1,a,b,2\n2,a,b\n");
  try {
    read_trace(bad);
    FAIL("expected MalformedTrace");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MalformedTrace);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream zero("1,a,b,0\n");
  CHECK_THROWS_AS(read_trace(zero), Error);
}

TEST_CASE("zipf exponent hits the requested tail share") {
  const double s = solve_zipf_exponent(16, 3, 0.735);
  double z = 0;
  double tail = 0;
  for (int k = 1; k <= 16; ++k) {
    const double w = std::pow(k, -s);
    z += w;
    if (k > 3) tail += w;
  }
  CHECK(tail / z == doctest::Approx(0.735).epsilon(1e-6));
}

TEST_CASE("generated traces are seeded and match the tail share") {
  GenParams p;
  p.queries = 20000;
  const Trace a = generate_trace(p);
  const Trace b = generate_trace(p);
  REQUIRE(a.size() == 20000);
  std::size_t above = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].baseline_pages == b[i].baseline_pages);
    above += a[i].baseline_pages > 3;
  }
  CHECK(static_cast<double>(above) / a.size() == doctest::Approx(0.735).epsilon(0.02));
  p.seed = 2;
  const Trace c = generate_trace(p);
  bool differs = false;
  for (std::size_t i = 0; i < a.size() && !differs; ++i) differs = a[i].key != c[i].key;
  CHECK(differs);

  const auto cdf = page_cdf(a);
  CHECK(cdf.back().second == doctest::Approx(1.0));
  for (std::size_t i = 1; i < cdf.size(); ++i) CHECK(cdf[i].second >= cdf[i - 1].second);
}

TEST_CASE("baseline latency grows with every extra page") {
  const SsdConfig cfg;
  MovementCounters c;
  double prev = 0;
  for (std::uint32_t k = 1; k <= 8; ++k) {
    const LatencyReport r = baseline_query(cfg, k, 0, c);
    CHECK(r.total.count() > prev);
    CHECK(r.total.count() <= r.component_sum().count() + 1e-9);
    prev = r.total.count();
  }
  CHECK(c.read_count == 36);
}

TEST_CASE("TCAM query cost does not depend on the baseline chain length") {
  const SsdConfig cfg;
  const Setup setup;
  const Database db = build_database(cfg, setup);
  CHECK(db.ftl.search_blocks_in_use() == 23);
  MovementCounters c;
  Query q{1, "stock", "1", 1};
  const double t1 = tcam_query(db, q, setup, c).total.count();
  q.baseline_pages = 9;
  CHECK(tcam_query(db, q, setup, c).total.count() == doctest::Approx(t1));
  CHECK(c.srch_count == 2);
  const std::uint32_t cross = crossover_pages(cfg, setup);
  MovementCounters s;
  CHECK(baseline_query(cfg, cross, 0, s).total.count() <= t1);
  CHECK(baseline_query(cfg, cross + 1, 0, s).total.count() > t1);
}

TEST_CASE("replay accounting") {
  const SsdConfig cfg;
  GenParams p;
  p.queries = 500;
  const Trace t = generate_trace(p);
  const ReplayResult b = replay(cfg, t, Mode::Baseline);
  const ReplayResult r = replay(cfg, t, Mode::Tcam);
  CHECK(b.latencies_us.size() == 500);
  double sum = 0;
  for (double v : r.latencies_us) sum += v;
  CHECK(r.total_us() == doctest::Approx(sum));
  CHECK(r.breakdown.total.count() == doctest::Approx(sum));
  std::uint64_t pages = 0;
  for (const auto& q : t) pages += q.baseline_pages;
  CHECK(b.counters.read_count == pages);
  CHECK(r.counters.srch_count == 500);
  CHECK(r.search_blocks == 23);

  const auto cdf = latency_cdf(b.latencies_us);
  REQUIRE(!cdf.empty());
  CHECK(cdf.size() <= 500);
  CHECK(cdf.back().second == doctest::Approx(1.0));
  for (std::size_t i = 1; i < cdf.size(); ++i) {
    CHECK(cdf[i].first > cdf[i - 1].first);
    CHECK(cdf[i].second > cdf[i - 1].second);
  }
  CHECK(latency_cdf({2.0, 1.0, 2.0, 3.0}) ==
        std::vector<std::pair<double, double>>{{1.0, 0.25}, {2.0, 0.75}, {3.0, 1.0}});
}
