#include "churn/error.hpp"
#include "churn/labeling.hpp"
#include "support.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace churn;

namespace {

RawDataset three_customers() {
  RawDataset d;
  d.observation_end = parse_date("2020-04-09");
  Eigen::VectorXd inactive = Eigen::VectorXd::Zero(100);
  inactive[0] = 2;
  inactive[2] = 3;
  d.series = {test::series("active", "2020-01-01", Eigen::VectorXd::Ones(100)),
              test::series("inactive", "2020-01-01", inactive),
              test::series("never", "2020-01-01", Eigen::VectorXd::Zero(100))};
  return d;
}

RawDataset random_dataset(Rng& rng) {
  RawDataset d;
  d.observation_end = parse_date("2021-01-01");
  const int n = test::uniform_int(rng, 1, 15);
  for (int c = 0; c < n; ++c) {
    const int len = test::uniform_int(rng, 1, 200);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(len);
    // Sparse activity with a random quiet tail.
    const int active_until = test::uniform_int(rng, -1, len - 1);
    for (int t = 0; t <= active_until; ++t)
      if (uniform_below(rng, 4) == 0) counts[t] = test::uniform_int(rng, 1, 9);
    const Date start = d.observation_end - std::chrono::days{len - 1 + test::uniform_int(rng, 0, 20)};
    d.series.push_back({"c" + std::to_string(100 + c), start, counts});
  }
  return d;
}

}  // namespace

TEST_CASE("classify_activity examples") {
  const Date end = parse_date("2020-03-01");
  const auto on_end = test::series("A", "2020-02-20", test::vec({0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1}));
  REQUIRE(on_end.last_date() == end);
  CHECK(classify_activity(on_end, end, 30) == ActivityLabel::Active);
  CHECK(last_download_offset(on_end, end) == 0);

  Eigen::VectorXd c = Eigen::VectorXd::Zero(60);
  c[14] = 4;  // 45 days before the last day
  const auto quiet = DownloadSeries{"B", end - std::chrono::days{59}, c};
  CHECK(last_download_offset(quiet, end) == 45);
  CHECK(classify_activity(quiet, end, 30) == ActivityLabel::Inactive);
  CHECK(classify_activity(quiet, end, 45) == ActivityLabel::Inactive);
  CHECK(classify_activity(quiet, end, 46) == ActivityLabel::Active);

  const auto zero = test::series("C", "2020-02-20", Eigen::VectorXd::Zero(5));
  CHECK(classify_activity(zero, end, 30) == ActivityLabel::Excluded);
  CHECK_FALSE(last_download_offset(zero, end).has_value());
  CHECK_THROWS_AS(classify_activity(on_end, end, 0), DomainError);
}

TEST_CASE("a series ending before observation_end counts the missing days as quiet") {
  const Date end = parse_date("2020-03-01");
  const auto early = test::series("A", "2020-01-01", test::vec({1, 1}));
  CHECK(last_download_offset(early, end) == 59);
  CHECK(classify_activity(early, end, 30) == ActivityLabel::Inactive);
}

TEST_CASE("align_and_label truncates inactive series at the last download") {
  const auto labeled = align_and_label(three_customers(), 30);
  REQUIRE(labeled.entries.size() == 2);
  REQUIRE(labeled.excluded_ids == std::vector<std::string>{"never"});
  CHECK(labeled.entries[0].customer_id == "active");
  CHECK(labeled.entries[0].label == ActivityLabel::Active);
  CHECK(labeled.entries[0].counts.size() == 100);
  CHECK(labeled.entries[1].label == ActivityLabel::Inactive);
  CHECK(equal_values(labeled.entries[1].counts, test::vec({2, 0, 3})));
  CHECK(labeled.entries[1].last_download_offset_days == 97);
  CHECK(labeled.count(ActivityLabel::Active) == 1);
  CHECK(labeled.count(ActivityLabel::Inactive) == 1);
}

TEST_CASE("align_and_label errors") {
  RawDataset empty;
  CHECK_THROWS_AS(align_and_label(empty, 30), EmptyDatasetError);
  RawDataset zeros;
  zeros.observation_end = parse_date("2020-01-02");
  zeros.series = {test::series("z", "2020-01-01", test::vec({0, 0}))};
  CHECK_THROWS_AS(align_and_label(zeros, 30), EmptyDatasetError);
  CHECK_THROWS_AS(align_and_label(three_customers(), 0), DomainError);
}

TEST_CASE("labeling properties on random datasets: partition, alignment, idempotence, gap monotonicity") {
  Rng rng(77);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto raw = random_dataset(rng);
    const int gap = test::uniform_int(rng, 1, 60);
    LabeledDataset labeled;
    try {
      labeled = align_and_label(raw, gap);
    } catch (const EmptyDatasetError&) {
      for (const auto& s : raw.series) CHECK(s.counts.isZero());
      continue;
    }
    ++checked;
    // Partition.
    CHECK(labeled.entries.size() + labeled.excluded_ids.size() == raw.series.size());
    std::set<std::string> ids;
    for (const auto& e : labeled.entries) ids.insert(e.customer_id);
    for (const auto& id : labeled.excluded_ids) ids.insert(id);
    CHECK(ids.size() == raw.series.size());
    for (const auto& e : labeled.entries) {
      CHECK(e.counts.size() > 0);
      CHECK_FALSE(e.counts.isZero());
      if (e.label == ActivityLabel::Inactive) CHECK(e.counts[e.counts.size() - 1] > 0);
      CHECK(e.label == classify_activity(*raw.find(e.customer_id), raw.observation_end, gap));
    }
    // Idempotence: relabeling the kept entries changes nothing.
    const auto again = align_and_label(to_raw(labeled), gap);
    CHECK(again.entries == labeled.entries);
    CHECK(again.excluded_ids.empty());
    // Growing the gap never turns an active customer inactive.
    const auto wider = align_and_label(raw, gap + test::uniform_int(rng, 1, 40));
    CHECK(wider.count(ActivityLabel::Inactive) <= labeled.count(ActivityLabel::Inactive));
    for (std::size_t i = 0; i < wider.entries.size(); ++i)
      if (labeled.entries[i].label == ActivityLabel::Active) CHECK(wider.entries[i].label == ActivityLabel::Active);
  }
  CHECK(checked > 200);
}

TEST_CASE("labels CSV lists every customer with its offset") {
  std::ostringstream out;
  write_labels_csv(out, align_and_label(three_customers(), 30));
  CHECK(out.str() ==
        "customer_id,label,last_download_offset_days\n"
        "active,active,0\n"
        "inactive,inactive,97\n"
        "never,excluded,\n");
}

TEST_CASE("labeling recovers synthetic ground truth") {
  SynthConfig c;
  c.n_customers = 300;
  c.horizon_days = 700;
  c.size_mu = 3.0;
  c.size_sigma = 0.5;
  c.seed = 8;
  const auto s = generate_synthetic(c);
  const auto labeled = align_and_label(s.data, 30);
  CHECK(labeled.excluded_ids.empty());
  for (const auto& e : labeled.entries)
    CHECK((e.label == ActivityLabel::Inactive) == s.churn_dates.at(e.customer_id).has_value());
}
