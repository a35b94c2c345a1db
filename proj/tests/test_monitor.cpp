#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "adp/monitor.hpp"

using namespace adp;

namespace {

VisitBatch batch_at(int index, std::int64_t timestamp,
                    std::initializer_list<std::int64_t> locations) {
  static std::int64_t next_user = 900000000;  // clear of hand-picked ids
  VisitBatch b;
  b.batch_index = index;
  for (std::int64_t loc : locations)
    b.records.push_back(VisitRecord{next_user++, loc, timestamp});
  return b;
}

bool within_binomial(double observed, double expected, int n) {
  double sigma = std::sqrt(expected * (1.0 - expected) / n);
  return std::abs(observed - expected) <= 3.0 * sigma + 1.0 / n;
}

}  // namespace

TEST_CASE("zero-count stream trips the threshold at the exponential tail rate") {
  // No visits ever hit the monitored location; the per-update Unsafe
  // probability is e^(-T*eps) with T=5, eps=1.
  const int updates = 20000;
  RandomSource rng(301, 0);
  LocationMonitor monitor(0, 5.0, PrivacyBudget(1.0), 1);
  int unsafe = 0, considered = 0;
  std::int64_t user = 0;
  for (int u = 0; u < updates; ++u) {
    VisitBatch b;
    b.batch_index = u;
    b.records.push_back(VisitRecord{user++, 1, u});
    MonitorEmission e = monitor.step(b, rng);
    CHECK(monitor.true_count() == 0);
    if (e.verdict == SafetyVerdict::Abstain) continue;
    ++considered;
    unsafe += e.verdict == SafetyVerdict::Unsafe;
  }
  double expected = std::exp(-5.0);
  CHECK(within_binomial(static_cast<double>(unsafe) / considered, expected,
                        considered));
}

TEST_CASE("an over-threshold batch forces unsafe, then suppression, then recovery") {
  RandomSource rng(302, 0);
  LocationMonitor monitor(7, 5.0, PrivacyBudget(1.0), /*expiry=*/3);

  VisitBatch spike;
  spike.batch_index = 0;
  for (int i = 0; i < 8; ++i) spike.records.push_back(VisitRecord{i, 7, 0});
  MonitorEmission first = monitor.step(spike, rng);
  CHECK(first.verdict == SafetyVerdict::Unsafe);  // 8 + nonnegative noise >= 5
  CHECK(first.value >= 8.0);
  CHECK(monitor.max_record_spend() == doctest::Approx(1.0));

  // While the marked visits are live the monitor abstains.
  MonitorEmission second = monitor.step(batch_at(1, 1, {9}), rng);
  CHECK(second.verdict == SafetyVerdict::Abstain);
  MonitorEmission third = monitor.step(batch_at(2, 2, {9}), rng);
  CHECK(third.verdict == SafetyVerdict::Abstain);

  // At time 3 the spike (timestamp 0, expiry 3) has aged out; output resumes
  // and the true count is back to zero.
  MonitorEmission fourth = monitor.step(batch_at(3, 3, {9}), rng);
  CHECK(fourth.verdict != SafetyVerdict::Abstain);
  CHECK(monitor.true_count() == 0);
  CHECK(monitor.max_record_spend() == doctest::Approx(1.0));
}

TEST_CASE("safe emissions are never wrong, across random streams") {
  RandomSource stream_rng(303, 0);
  for (int trial = 0; trial < 50; ++trial) {
    RandomSource rng(304, static_cast<std::uint64_t>(trial));
    LocationMonitor monitor(0, 4.0, PrivacyBudget(0.5), 4);
    std::int64_t user = 1000000 + trial * 1000;
    for (int u = 0; u < 40; ++u) {
      VisitBatch b;
      b.batch_index = u;
      int visits = static_cast<int>(stream_rng.next_below(6));
      for (int i = 0; i < visits; ++i)
        b.records.push_back(VisitRecord{user++, stream_rng.next_below(2) ? 0 : 1,
                                        u});
      MonitorEmission e = monitor.step(b, rng);
      if (e.verdict == SafetyVerdict::Safe) CHECK(monitor.true_count() < 4.0);
      if (e.verdict == SafetyVerdict::Unsafe) CHECK(e.value >= monitor.true_count());
    }
    CHECK(monitor.max_record_spend() <= 0.5 + 1e-12);
  }
}

TEST_CASE("out-of-order batches are rejected") {
  RandomSource rng(305, 0);
  LocationMonitor monitor(0, 5.0, PrivacyBudget(1.0), 10);
  monitor.step(batch_at(0, 10, {0, 1}), rng);
  CHECK_THROWS_AS(monitor.step(batch_at(1, 9, {0}), rng), std::invalid_argument);
}

TEST_CASE("false-negative rate falls with margin and with budget") {
  // First-update Unsafe probability for a safe count c is e^(-(T-c)*eps).
  auto unsafe_rate = [](double count, double threshold, double epsilon) {
    const int n = 4000;
    int unsafe = 0;
    for (int t = 0; t < n; ++t) {
      RandomSource rng(306, static_cast<std::uint64_t>(
                                t + static_cast<int>(count * 131 + epsilon * 17)));
      LocationMonitor monitor(0, threshold, PrivacyBudget(epsilon), 100);
      VisitBatch b;
      b.batch_index = 0;
      for (int i = 0; i < static_cast<int>(count); ++i)
        b.records.push_back(VisitRecord{i, 0, 0});
      unsafe += monitor.step(b, rng).verdict == SafetyVerdict::Unsafe;
    }
    return static_cast<double>(unsafe) / n;
  };

  double margin1 = unsafe_rate(4, 5, 1.0);
  double margin2 = unsafe_rate(3, 5, 1.0);
  double margin3 = unsafe_rate(2, 5, 1.0);
  CHECK(margin1 > margin2);
  CHECK(margin2 > margin3);

  double eps_half = unsafe_rate(3, 5, 0.5);
  double eps_one = unsafe_rate(3, 5, 1.0);
  double eps_two = unsafe_rate(3, 5, 2.0);
  CHECK(eps_half > eps_one);
  CHECK(eps_one > eps_two);
}

TEST_CASE("replaying a stream with the same seed reproduces emissions") {
  auto run = [] {
    RandomSource rng(307, 5);
    LocationMonitor monitor(0, 3.0, PrivacyBudget(1.0), 2);
    std::vector<MonitorEmission> out;
    std::int64_t user = 0;
    for (int u = 0; u < 30; ++u) {
      VisitBatch b;
      b.batch_index = u;
      for (int i = 0; i < (u % 4); ++i)
        b.records.push_back(VisitRecord{user++, i % 2, u});
      out.push_back(monitor.step(b, rng));
    }
    return out;
  };
  std::vector<MonitorEmission> a = run(), b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].verdict == b[i].verdict);
    CHECK(a[i].value == b[i].value);
  }
}

TEST_CASE("map monitor: hot location flagged, cold location almost surely safe") {
  std::vector<std::int64_t> locations{0, 1};
  const int n = 20000;
  int loc0_unsafe = 0, loc1_unsafe = 0;
  for (int t = 0; t < n; ++t) {
    RandomSource rng(308, static_cast<std::uint64_t>(t));
    MapMonitor monitor(locations, 10.0, PrivacyBudget(1.0));
    VisitBatch b;
    b.batch_index = 0;
    for (int i = 0; i < 12; ++i) b.records.push_back(VisitRecord{i, 0, 0});
    std::vector<MonitorEmission> emissions = monitor.step(b, rng);
    REQUIRE(emissions.size() == 2);
    loc0_unsafe += emissions[0].verdict == SafetyVerdict::Unsafe;
    loc1_unsafe += emissions[1].verdict == SafetyVerdict::Unsafe;
  }
  CHECK(loc0_unsafe == n);  // count 12 >= 10 before noise
  // Safe probability 1 - e^(-10): about 0.9 false flags in 20000 runs.
  CHECK(loc1_unsafe <= 8);
}

TEST_CASE("map monitor: marked locations go silent and users spend once") {
  RandomSource rng(309, 0);
  MapMonitor monitor({0, 1}, 5.0, PrivacyBudget(1.0));
  VisitBatch b0;
  b0.batch_index = 0;
  for (int i = 0; i < 7; ++i) b0.records.push_back(VisitRecord{i, 0, 0});
  std::vector<MonitorEmission> first = monitor.step(b0, rng);
  CHECK(first[0].verdict == SafetyVerdict::Unsafe);
  CHECK(monitor.marked(0));

  std::vector<MonitorEmission> second = monitor.step(batch_at(1, 0, {1}), rng);
  CHECK(second[0].verdict == SafetyVerdict::Abstain);
  CHECK(monitor.true_count(0) == 7);
  CHECK(monitor.max_user_spend() <= 1.0 + 1e-12);
}

TEST_CASE("map monitor rejects a second visit by the same user") {
  RandomSource rng(310, 0);
  MapMonitor monitor({0, 1}, 5.0, PrivacyBudget(1.0));
  VisitBatch b;
  b.batch_index = 0;
  b.records.push_back(VisitRecord{1, 0, 0});
  b.records.push_back(VisitRecord{1, 1, 0});
  CHECK_THROWS_AS(monitor.step(b, rng), std::invalid_argument);
}

TEST_CASE("map monitor reproduces ground truth at huge budget") {
  RandomSource rng(311, 0);
  MapMonitor monitor({0, 1, 2}, 5.0, PrivacyBudget(1e6));
  VisitBatch b;
  b.batch_index = 0;
  for (int i = 0; i < 6; ++i) b.records.push_back(VisitRecord{i, 0, 0});
  for (int i = 6; i < 9; ++i) b.records.push_back(VisitRecord{i, 1, 0});
  std::vector<MonitorEmission> emissions = monitor.step(b, rng);
  CHECK(emissions[0].verdict == SafetyVerdict::Unsafe);  // 6 >= 5
  CHECK(emissions[1].verdict == SafetyVerdict::Safe);    // 3 < 5
  CHECK(emissions[2].verdict == SafetyVerdict::Safe);    // 0 < 5
}

TEST_CASE("visit stream parsing: fixed-size and blank-line batching") {
  std::istringstream fixed("1,10,0\n2,11,0\n3,10,1\n4,12,1\n5,10,2\n");
  std::vector<VisitBatch> by_size = read_visit_stream(fixed, 2);
  REQUIRE(by_size.size() == 3);
  CHECK(by_size[0].records.size() == 2);
  CHECK(by_size[2].records.size() == 1);
  CHECK(by_size[1].batch_index == 1);
  CHECK(by_size[1].records[0].location_id == 10);

  std::istringstream marked("1,10,0\n2,11,0\n\n3,10,1\n");
  std::vector<VisitBatch> by_marker = read_visit_stream(marked, 0);
  REQUIRE(by_marker.size() == 2);
  CHECK(by_marker[0].records.size() == 2);
  CHECK(by_marker[1].records.size() == 1);

  std::istringstream bad("1,10,0\nnope\n");
  CHECK_THROWS_WITH_AS(read_visit_stream(bad, 0),
                       "malformed visit record at line 2", std::invalid_argument);
}

TEST_CASE("emission serialization format") {
  std::ostringstream out;
  write_emissions(out, {{0, 42, SafetyVerdict::Unsafe, 12.375},
                        {1, 42, SafetyVerdict::Safe, 0.0},
                        {2, 42, SafetyVerdict::Abstain, 0.0}});
  CHECK(out.str() == "0,42,unsafe,12.375\n1,42,safe,0\n2,42,abstain,0\n");
}
