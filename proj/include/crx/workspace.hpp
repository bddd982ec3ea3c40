#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crx/dataset.hpp"
#include "crx/disambiguation.hpp"
#include "crx/spectroscopy.hpp"
#include "crx/wos_import.hpp"

namespace crx {

enum class ManualAction { Same, Different, Extract };

inline std::optional<ManualAction> parse_manual_action(std::string_view name) {
  if (name == "same") return ManualAction::Same;
  if (name == "different") return ManualAction::Different;
  if (name == "extract") return ManualAction::Extract;
  return std::nullopt;
}

struct AttributeToggles {
  bool volume = false;
  bool page = false;
  bool doi = false;
};

struct ChartRequest {
  int half_window = 2;
  std::optional<int> from_year;
  std::optional<int> to_year;
};

// A dataset together with its current partition: the state behind one
// command-line run or one service session. Every operation keeps the
// dataset's ClusterID columns in step with the partition.
class Workspace {
 public:
  bool loaded() const noexcept { return loaded_; }
  const Dataset& dataset() const noexcept { return dataset_; }
  const Partition& partition() const noexcept { return partition_; }
  DatasetInfo info() const { return crx::info(dataset_); }

  void load(Dataset ds) {
    dataset_ = recompute_statistics(std::move(ds));
    partition_ = Partition::from_dataset(dataset_);
    manual_edits_ = false;
    loaded_ = true;
  }

  std::vector<FileIssue> import_files(const std::vector<std::string>& files, const ImportConfig& cfg) {
    ImportResult result = import_wos(files, cfg);
    load(std::move(result.dataset));
    return std::move(result.issues);
  }

  void open_table(std::string_view csv_text) { load(open_csv(csv_text)); }

  void remove_ids(std::span<const RefId> ids) { replace(remove_selected(dataset_, ids)); }
  void remove_years(std::span<const YearRange> ranges) { replace(remove_by_year(dataset_, ranges)); }
  void retain_years(int from, int to) { replace(retain_by_year(dataset_, from, to)); }
  void remove_below_count(std::int64_t min_n) { replace(crx::remove_below_count(dataset_, min_n)); }
  void remove_below_pct_in_year(double min_pct) {
    replace(crx::remove_below_pct_in_year(dataset_, min_pct));
  }

  // Re-runs automatic clustering from scratch. Returns warnings, including
  // one when manual edits are discarded.
  std::vector<std::string> cluster(const SimilarityConfig& cfg) {
    std::vector<std::string> warnings;
    if (manual_edits_) warnings.push_back("re-clustering discards previous manual corrections");
    Partition next = crx::cluster(dataset_, cfg, &warnings);
    commit(std::move(next));
    manual_edits_ = false;
    return warnings;
  }

  // Keeps the threshold of the last clustering.
  void refine(const AttributeToggles& toggles) {
    SimilarityConfig cfg = partition_.config;
    cfg.require_volume = toggles.volume;
    cfg.require_page = toggles.page;
    cfg.require_doi = toggles.doi;
    commit(refine_by_attributes(dataset_, partition_, cfg));
  }

  void manual(ManualAction action, std::span<const RefId> ids) {
    switch (action) {
      case ManualAction::Same: commit(manual_same(partition_, ids)); break;
      case ManualAction::Different: commit(manual_different(partition_, ids)); break;
      case ManualAction::Extract: commit(manual_extract(partition_, ids)); break;
    }
    manual_edits_ = true;
  }

  // False when there was nothing to undo.
  bool undo() {
    UndoOutcome outcome = crx::undo(partition_);
    if (!outcome.applied) return false;
    commit(std::move(outcome.partition));
    return true;
  }

  void merge() {
    dataset_ = crx::merge(dataset_, partition_);
    partition_ = Partition::from_dataset(dataset_);
    manual_edits_ = false;
  }

  std::string table_csv() const { return save_csv(dataset_); }

  YearSeries series(const ChartRequest& req) const {
    return slice(year_series(dataset_, req.half_window), req.from_year, req.to_year);
  }

  std::string chart_csv(const ChartRequest& req) const { return export_chart_csv(series(req)); }

  // The year range of the request clamps the x axis.
  std::string chart_svg(const ChartRequest& req, ChartOptions options) const {
    options.from_year = req.from_year;
    options.to_year = req.to_year;
    return render_chart_svg(year_series(dataset_, req.half_window), options);
  }

 private:
  void replace(Dataset ds) {
    partition_ = restrict_to(std::move(partition_), ds);
    dataset_ = apply_partition(std::move(ds), partition_);
  }

  void commit(Partition p) {
    dataset_ = apply_partition(dataset_, p);
    partition_ = std::move(p);
  }

  Dataset dataset_;
  Partition partition_;
  bool loaded_ = false;
  bool manual_edits_ = false;
};

}  // namespace crx
