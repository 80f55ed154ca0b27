#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mohin/factorization.hpp"
#include "mohin/fm.hpp"
#include "mohin/ingestion.hpp"
#include "mohin/memp.hpp"

namespace mohin {

struct SplitConfig {
  double train_frac = 0.8;
  double valid_frac = 0.1;
  double test_frac = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DataSplit {
  RatingDataset train;
  RatingDataset valid;
  RatingDataset test;
};

// Seeded shuffle of the triples, then contiguous partitions of
// floor(n·train), floor(n·valid) and the remainder.
DataSplit split(const RatingDataset& dataset, const SplitConfig& cfg);

// The network the recommender sees in one repeat: all trust edges, and
// rating-existence edges from `train` only.
HinGraph training_graph(const HinGraph& graph, const RatingDataset& train);

double rmse(std::span<const double> pred, std::span<const double> truth);
double mae(std::span<const double> pred, std::span<const double> truth);

// Inclusive grid `start:stop:step`, or a comma-separated list.
std::vector<double> parse_grid(std::string_view spec);

std::vector<double> default_alpha_grid();
std::vector<double> default_lambda_grid();

// P1 plain and P2 enhanced with `motif` (when given).
std::vector<MempConfig> default_memp_configs(std::optional<MotifId> motif);

struct ExperimentConfig {
  std::vector<MempConfig> memp_configs = default_memp_configs(std::nullopt);
  MfConfig mf;
  FmConfig fm;
  SplitConfig split;
  std::size_t repeats = 5;
  std::vector<double> alpha_grid = default_alpha_grid();
  // λ_w = λ_v = λ for every grid value.
  std::vector<double> lambda_grid = default_lambda_grid();
  std::uint64_t seed = 0;
  bool clamp = true;
  unsigned jobs = 1;
  std::size_t max_nnz_per_row = 0;

  void validate() const;
};

struct GridScore {
  double alpha = 0.0;
  double lambda = 0.0;
  double valid_rmse = 0.0;
};

struct RunResult {
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double lambda = 0.0;
  double valid_rmse = 0.0;
  double test_rmse = 0.0;
  double test_mae = 0.0;
  std::vector<GridScore> grid;
};

struct StageTimes {
  double split = 0.0;
  double similarity = 0.0;
  double factorize = 0.0;
  double fm = 0.0;
  double score = 0.0;
};

struct MetricReport {
  std::vector<RunResult> runs;
  double mean_rmse = 0.0;
  double mean_mae = 0.0;
  double std_rmse = 0.0;
  double std_mae = 0.0;
  // Wall-clock per repeat; never part of the deterministic report files.
  std::vector<StageTimes> timings;
};

// Partition access events emitted during an experiment, in order:
// "train", "valid" and "test" with the repeat index.
using AccessTrace = std::function<void(std::string_view partition, std::size_t repeat)>;

// For each repeat: split, select (alpha, lambda) by validation RMSE (ties go
// to the smaller alpha, then the smaller lambda), then score the selected
// configuration on the test partition. Similarity matrices use train ratings
// only; the trust relation is shared.
MetricReport run_experiment(const HinGraph& graph, const ExperimentConfig& cfg,
                            const AccessTrace& trace = {});

struct SweepCell {
  MotifId motif = MotifId::kM1;
  double alpha = 0.0;
  std::vector<double> lambdas;  // per repeat
  std::vector<double> test_rmse;
  std::vector<double> test_mae;
  double mean_rmse = 0.0;
  double mean_mae = 0.0;
};

struct SweepReport {
  std::vector<MotifId> motifs;
  std::vector<double> alphas;
  std::vector<SweepCell> cells;  // motif-major, alpha-minor

  const SweepCell& cell(std::size_t motif_idx, std::size_t alpha_idx) const {
    return cells.at(motif_idx * alphas.size() + alpha_idx);
  }
};

// Test RMSE/MAE for every (motif, alpha) pair. With more than one lambda in
// the experiment's grid, lambda is tuned per cell on validation. The motif of
// `cfg.memp_configs` entries is replaced by each swept motif.
SweepReport run_sweep(const HinGraph& graph, const ExperimentConfig& cfg,
                      std::span<const MotifId> motifs);

// `key = value` lines.
void write_report(std::ostream& out, const MetricReport& report);
// One JSON object per run.
void write_runs_jsonl(std::ostream& out, const MetricReport& report);
void write_timings(std::ostream& out, const MetricReport& report);
// Human-readable RMSE/MAE table row set.
void print_summary(std::ostream& out, const MetricReport& report,
                   std::string_view label);
void write_sweep_tsv(std::ostream& out, const SweepReport& report);
void print_sweep_table(std::ostream& out, const SweepReport& report);

}  // namespace mohin
