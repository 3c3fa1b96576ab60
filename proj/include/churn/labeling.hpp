#pragma once

#include "churn/dataset.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace churn {

enum class ActivityLabel : int { Active = 1, Inactive = -1, Excluded = 0 };

std::string_view to_string(ActivityLabel label);

/// Offset in days from the last positive-count day to observation_end;
/// nullopt for an all-zero series.
std::optional<int> last_download_offset(const DownloadSeries& series, Date observation_end);

/// Excluded for all-zero series, Inactive when the last positive count is at
/// least gap_days before observation_end, Active otherwise.
ActivityLabel classify_activity(const DownloadSeries& series, Date observation_end, int gap_days);

struct LabeledEntry {
  std::string customer_id;
  Date start_date{};
  /// Inactive: ends on the last positive day. Active: ends at observation_end.
  Eigen::VectorXd counts;
  ActivityLabel label = ActivityLabel::Active;
  int last_download_offset_days = 0;

  friend bool operator==(const LabeledEntry& a, const LabeledEntry& b);
};

struct LabeledDataset {
  std::vector<LabeledEntry> entries;  ///< sorted by customer_id
  std::vector<std::string> excluded_ids;
  Date observation_end{};
  int inactivity_gap_days = 30;

  std::size_t count(ActivityLabel label) const;
  bool operator==(const LabeledDataset&) const = default;
};

/// Labels every customer, moves never-downloaders into excluded_ids and
/// truncates inactive series at their last download. Throws
/// EmptyDatasetError when nothing remains.
LabeledDataset align_and_label(const RawDataset& dataset, int gap_days = 30);

/// Rebuilds a raw dataset from the aligned entries (excluded customers are
/// not recoverable and are dropped).
RawDataset to_raw(const LabeledDataset& labeled);

/// `customer_id,label,last_download_offset_days`; excluded rows have an empty offset.
void write_labels_csv(std::ostream& out, const LabeledDataset& labeled);

}  // namespace churn
