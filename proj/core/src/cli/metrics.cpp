#include "soco/cli/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "soco/error.hpp"
#include "soco/io.hpp"

namespace soco::cli {

std::string format_metric(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.9g", value);
  return buf;
}

std::string format_metrics_row(const marl::MetricsRow& row) {
  std::string s = std::to_string(row.step);
  for (double v : {row.mean_return, row.std_return, row.critic_loss_1, row.critic_loss_2,
                   row.actor_loss, row.mean_edit_norm, row.gating_entropy}) {
    s += ',';
    s += format_metric(v);
  }
  return s;
}

MetricsWriter::MetricsWriter(std::filesystem::path path) : path_(std::move(path)) {
  tmp_ = path_;
  tmp_ += ".tmp";
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error("cannot open " + tmp_.string() + " for writing");
  out_ << kMetricsHeader << '\n' << std::flush;
}

void MetricsWriter::write(const marl::MetricsRow& row) {
  if (last_step_ && row.step <= *last_step_) {
    throw Error("metrics: step " + std::to_string(row.step) + " does not increase");
  }
  last_step_ = row.step;
  out_ << format_metrics_row(row) << '\n' << std::flush;
  if (!out_) throw Error("metrics: write to " + tmp_.string() + " failed");
}

void MetricsWriter::finish() {
  out_.close();
  if (!out_) throw Error("metrics: closing " + tmp_.string() + " failed");
  std::filesystem::rename(tmp_, path_);
}

std::vector<marl::MetricsRow> read_metrics(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw FormatError(path.string() + ": missing metrics header");
  }
  std::vector<marl::MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw FormatError(path.string() + ": bad metrics row '" + line + "'");
    marl::MetricsRow r;
    try {
      r.step = std::stoull(cells[0]);
      double* fields[] = {&r.mean_return, &r.std_return, &r.critic_loss_1, &r.critic_loss_2,
                          &r.actor_loss, &r.mean_edit_norm, &r.gating_entropy};
      for (std::size_t k = 0; k < 7; ++k) *fields[k] = std::stod(cells[k + 1]);
    } catch (const std::logic_error&) {
      throw FormatError(path.string() + ": bad metrics row '" + line + "'");
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<AggregateRow> aggregate_runs(const std::vector<std::vector<marl::MetricsRow>>& runs) {
  if (runs.empty()) return {};
  const std::size_t n = runs.front().size();
  for (const auto& run : runs) {
    if (run.size() != n) throw Error("aggregate: runs have different lengths");
  }
  std::vector<AggregateRow> out;
  for (std::size_t i = 0; i < n; ++i) {
    AggregateRow a;
    a.step = runs.front()[i].step;
    a.seeds = runs.size();
    for (const auto& run : runs) {
      if (run[i].step != a.step) throw Error("aggregate: runs have different steps");
      a.mean += run[i].mean_return;
    }
    a.mean /= static_cast<double>(runs.size());
    double var = 0.0;
    for (const auto& run : runs) var += (run[i].mean_return - a.mean) * (run[i].mean_return - a.mean);
    a.std = std::sqrt(var / static_cast<double>(runs.size()));
    out.push_back(a);
  }
  return out;
}

void write_aggregate(const std::filesystem::path& path, const std::vector<AggregateRow>& rows) {
  std::string text = "step,mean_return_mean,mean_return_std,seeds\n";
  for (const auto& r : rows) {
    text += std::to_string(r.step) + ',' + format_metric(r.mean) + ',' + format_metric(r.std) + ',' +
            std::to_string(r.seeds) + '\n';
  }
  io::write_file_atomic(path, text);
}

}  // namespace soco::cli
