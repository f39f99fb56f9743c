#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "soco/marl/trainer.hpp"

namespace soco::cli {

inline constexpr const char* kMetricsHeader =
    "step,mean_return,std_return,critic_loss_1,critic_loss_2,actor_loss,mean_edit_norm,"
    "gating_entropy";

// printf "%#.9g": 9 significant digits, trailing zeros kept.
std::string format_metric(double value);
std::string format_metrics_row(const marl::MetricsRow& row);

// Streams rows to `<path>.tmp`, flushing each one; finish() renames the file
// into place. Steps must be strictly increasing.
class MetricsWriter {
 public:
  explicit MetricsWriter(std::filesystem::path path);
  MetricsWriter(const MetricsWriter&) = delete;
  MetricsWriter& operator=(const MetricsWriter&) = delete;

  void write(const marl::MetricsRow& row);
  void finish();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  std::optional<std::size_t> last_step_;
};

// Parses a file produced by MetricsWriter (FormatError otherwise).
std::vector<marl::MetricsRow> read_metrics(const std::filesystem::path& path);

// Per-step mean and population std of mean_return across seeds. All runs
// must share the same step column.
struct AggregateRow {
  std::size_t step = 0;
  double mean = 0.0;
  double std = 0.0;
  std::size_t seeds = 0;
};
std::vector<AggregateRow> aggregate_runs(const std::vector<std::vector<marl::MetricsRow>>& runs);
void write_aggregate(const std::filesystem::path& path, const std::vector<AggregateRow>& rows);

}  // namespace soco::cli
