#include "churn/labeling.hpp"

#include "churn/error.hpp"

#include <algorithm>
#include <ostream>

namespace churn {

std::string_view to_string(ActivityLabel label) {
  switch (label) {
    case ActivityLabel::Active: return "active";
    case ActivityLabel::Inactive: return "inactive";
    case ActivityLabel::Excluded: return "excluded";
  }
  return "unknown";
}

namespace {

std::optional<Eigen::Index> last_positive_index(const Eigen::VectorXd& counts) {
  for (Eigen::Index i = counts.size(); i-- > 0;)
    if (counts[i] > 0.0) return i;
  return std::nullopt;
}

}  // namespace

std::optional<int> last_download_offset(const DownloadSeries& series, Date observation_end) {
  const auto last = last_positive_index(series.counts);
  if (!last) return std::nullopt;
  return static_cast<int>((observation_end - (series.start_date + std::chrono::days{*last})).count());
}

ActivityLabel classify_activity(const DownloadSeries& series, Date observation_end, int gap_days) {
  if (gap_days < 1) throw DomainError("gap_days must be at least 1");
  const auto offset = last_download_offset(series, observation_end);
  if (!offset) return ActivityLabel::Excluded;
  return *offset >= gap_days ? ActivityLabel::Inactive : ActivityLabel::Active;
}

bool operator==(const LabeledEntry& a, const LabeledEntry& b) {
  return a.customer_id == b.customer_id && a.start_date == b.start_date && equal_values(a.counts, b.counts) &&
         a.label == b.label && a.last_download_offset_days == b.last_download_offset_days;
}

std::size_t LabeledDataset::count(ActivityLabel label) const {
  if (label == ActivityLabel::Excluded) return excluded_ids.size();
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [&](const LabeledEntry& e) { return e.label == label; }));
}

LabeledDataset align_and_label(const RawDataset& dataset, int gap_days) {
  if (dataset.series.empty()) throw EmptyDatasetError("dataset has no customers");
  LabeledDataset out;
  out.observation_end = dataset.observation_end;
  out.inactivity_gap_days = gap_days;
  for (const auto& s : dataset.series) {
    const auto label = classify_activity(s, dataset.observation_end, gap_days);
    if (label == ActivityLabel::Excluded) {
      out.excluded_ids.push_back(s.customer_id);
      continue;
    }
    LabeledEntry e{s.customer_id, s.start_date, s.counts, label, *last_download_offset(s, dataset.observation_end)};
    if (label == ActivityLabel::Inactive) e.counts = s.counts.head(*last_positive_index(s.counts) + 1).eval();
    out.entries.push_back(std::move(e));
  }
  if (out.entries.empty()) throw EmptyDatasetError("every customer is excluded (no downloads at all)");
  return out;
}

RawDataset to_raw(const LabeledDataset& labeled) {
  RawDataset out;
  out.observation_end = labeled.observation_end;
  out.series.reserve(labeled.entries.size());
  for (const auto& e : labeled.entries) out.series.push_back({e.customer_id, e.start_date, e.counts});
  return out;
}

void write_labels_csv(std::ostream& out, const LabeledDataset& labeled) {
  struct Row {
    std::string_view id;
    ActivityLabel label;
    std::optional<int> offset;
  };
  std::vector<Row> rows;
  for (const auto& e : labeled.entries) rows.push_back({e.customer_id, e.label, e.last_download_offset_days});
  for (const auto& id : labeled.excluded_ids) rows.push_back({id, ActivityLabel::Excluded, std::nullopt});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.id < b.id; });
  out << "customer_id,label,last_download_offset_days\n";
  for (const auto& r : rows) {
    out << r.id << ',' << to_string(r.label) << ',';
    if (r.offset) out << *r.offset;
    out << '\n';
  }
}

}  // namespace churn
