#include "mohin/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include <json.hpp>

#include "mohin/error.hpp"
#include "mohin/text.hpp"

namespace mohin {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// splitmix64 finalizer; derives independent stream seeds from a base seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kFmStream = 1000;
constexpr std::uint64_t kMfStream = 2000;

[[noreturn]] void rethrow_in_stage(std::string_view stage, const Error& e) {
  if (std::string_view(e.what()).starts_with(stage)) throw;
  rethrow_with_prefix(e, std::string(stage) + ": ");
}

template <class Fn>
auto in_stage(std::string_view stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    rethrow_in_stage(stage, e);
  }
}

// Runs fn(0..n-1) on up to `jobs` threads; the first exception (by index) is
// rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(std::max(1u, jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) guarded(i);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<MempConfig> with_alpha(std::vector<MempConfig> configs, double alpha) {
  for (auto& c : configs) {
    if (c.motif) c.alpha = alpha;
  }
  return configs;
}

std::vector<MempConfig> with_motif(std::vector<MempConfig> configs, MotifId m) {
  for (auto& c : configs) {
    if (c.meta_path.has_same_type_step()) c.motif = m;
  }
  return configs;
}

struct StageClock {
  std::mutex mu;
  StageTimes times;

  void add(double StageTimes::*field, double secs) {
    std::lock_guard lock(mu);
    times.*field += secs;
  }
};

// Everything the recommender needs for one repeat, built from train ratings.
class RepeatContext {
 public:
  RepeatContext(const HinGraph& graph, DataSplit data, const ExperimentConfig& cfg,
                std::uint64_t repeat_seed)
      : data_(std::move(data)),
        train_graph_(training_graph(graph, data_.train)),
        cache_(train_graph_.w_uu),
        cfg_(cfg),
        seed_(repeat_seed) {}

  const DataSplit& data() const { return data_; }

  std::vector<LatentFeatures> latents(const std::vector<MempConfig>& configs,
                                      StageClock& clock) {
    std::vector<SimilarityMatrix> sims;
    auto t0 = Clock::now();
    in_stage("similarity", [&] {
      SimilarityOptions opts{cfg_.max_nnz_per_row, &cache_};
      for (const auto& c : configs) sims.push_back(commuting_matrix(train_graph_, c, opts));
    });
    clock.add(&StageTimes::similarity, seconds_since(t0));
    t0 = Clock::now();
    std::vector<LatentFeatures> out;
    in_stage("factorize", [&] {
      for (std::size_t l = 0; l < sims.size(); ++l) {
        MfConfig mf = cfg_.mf;
        mf.seed = mix_seed(seed_, kMfStream + l);
        if (sims[l].matrix.nnz() == 0) {
          // No path instances at all: every user and item is cold.
          const auto& m = sims[l].matrix;
          out.push_back({DenseMatrix(m.rows(), mf.rank), DenseMatrix(m.cols(), mf.rank),
                         sims[l].config, {}});
          continue;
        }
        out.push_back(factorize(sims[l], mf));
      }
    });
    clock.add(&StageTimes::factorize, seconds_since(t0));
    return out;
  }

  FmModel train_fm(const std::vector<FmSample>& samples, double lambda,
                   StageClock& clock) const {
    const auto t0 = Clock::now();
    FmConfig fm = cfg_.fm;
    fm.lambda_w = lambda;
    fm.lambda_v = lambda;
    fm.seed = mix_seed(seed_, kFmStream);
    auto model = in_stage("fm", [&] { return fm_train(samples, fm).model; });
    clock.add(&StageTimes::fm, seconds_since(t0));
    return model;
  }

 private:
  DataSplit data_;
  HinGraph train_graph_;
  MotifCache cache_;
  const ExperimentConfig& cfg_;
  std::uint64_t seed_;
};

std::vector<FmSample> make_samples(const std::vector<LatentFeatures>& latents,
                                   const RatingDataset& ds) {
  std::vector<FmSample> out;
  out.reserve(ds.triples.size());
  for (const auto& r : ds.triples) {
    out.push_back({assemble_features(latents, r.user, r.item), r.rating});
  }
  return out;
}

struct Scores {
  double rmse = 0.0;
  double mae = 0.0;
};

Scores score(const FmModel& model, const std::vector<FmSample>& samples, bool clamp) {
  std::vector<double> pred;
  std::vector<double> truth;
  pred.reserve(samples.size());
  truth.reserve(samples.size());
  for (const auto& s : samples) {
    double p = fm_predict(model, s.features);
    if (clamp) p = std::clamp(p, 1.0, 5.0);
    pred.push_back(p);
    truth.push_back(s.rating);
  }
  return {rmse(pred, truth), mae(pred, truth)};
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / n)};
}

bool better(const GridScore& a, const GridScore& b) {
  if (a.valid_rmse != b.valid_rmse) return a.valid_rmse < b.valid_rmse;
  if (a.alpha != b.alpha) return a.alpha < b.alpha;
  return a.lambda < b.lambda;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

void SplitConfig::validate() const {
  if (!(train_frac > 0.0 && valid_frac > 0.0 && test_frac > 0.0)) {
    throw ValidationError("split fractions must be positive");
  }
  if (std::abs(train_frac + valid_frac + test_frac - 1.0) > 1e-9) {
    throw ValidationError("split fractions must sum to 1");
  }
}

DataSplit split(const RatingDataset& dataset, const SplitConfig& cfg) {
  cfg.validate();
  if (dataset.triples.empty()) throw ValidationError("split: dataset is empty");
  std::vector<Rating> shuffled = dataset.triples;
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const double n = static_cast<double>(shuffled.size());
  // The epsilon keeps exact products like 10·0.8 from flooring to 7.
  const auto n_train = static_cast<std::size_t>(std::floor(n * cfg.train_frac + 1e-9));
  const auto n_valid = static_cast<std::size_t>(std::floor(n * cfg.valid_frac + 1e-9));
  const auto mid = shuffled.begin() + static_cast<std::ptrdiff_t>(n_train);
  const auto end_valid = mid + static_cast<std::ptrdiff_t>(n_valid);
  DataSplit out;
  out.train = dataset.with_triples({shuffled.begin(), mid});
  out.valid = dataset.with_triples({mid, end_valid});
  out.test = dataset.with_triples({end_valid, shuffled.end()});
  return out;
}

HinGraph training_graph(const HinGraph& graph, const RatingDataset& train) {
  return build_hin(train, graph.w_uu);
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.empty()) {
    throw ShapeError("rmse: inputs must be non-empty and of equal length");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - truth[i];
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(pred.size()));
}

double mae(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.empty()) {
    throw ShapeError("mae: inputs must be non-empty and of equal length");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - truth[i]);
  return s / static_cast<double>(pred.size());
}

std::vector<double> parse_grid(std::string_view spec) {
  spec = text::trim(spec);
  std::vector<double> out;
  if (spec.find(':') != std::string_view::npos) {
    const auto parts = text::split(spec, ':');
    if (parts.size() != 3) throw UsageError("grid must be start:stop:step");
    const auto start = text::parse_double(parts[0]);
    const auto stop = text::parse_double(parts[1]);
    const auto step = text::parse_double(parts[2]);
    if (!start || !stop || !step || !(*step > 0.0) || *stop < *start) {
      throw UsageError("invalid grid '" + std::string(spec) + "'");
    }
    const auto n = static_cast<std::size_t>(std::floor((*stop - *start) / *step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) {
      // Round away accumulated binary error (0.1·3 -> 0.3).
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.12g", *start + static_cast<double>(i) * *step);
      out.push_back(*text::parse_double(buf));
    }
    return out;
  }
  for (auto field : text::split(spec, ',')) {
    const auto v = text::parse_double(field);
    if (!v) throw UsageError("invalid grid value '" + std::string(field) + "'");
    out.push_back(*v);
  }
  if (out.empty()) throw UsageError("empty grid");
  return out;
}

std::vector<double> default_alpha_grid() { return parse_grid("0:1:0.1"); }

std::vector<double> default_lambda_grid() { return {0.001, 0.01, 0.1, 1.0}; }

std::vector<MempConfig> default_memp_configs(std::optional<MotifId> motif) {
  return {MempConfig{user_item_path(), std::nullopt, 0.0},
          MempConfig{user_user_item_path(), motif, 0.0}};
}

void ExperimentConfig::validate() const {
  if (memp_configs.empty()) throw ValidationError("no meta-path configured");
  for (const auto& c : memp_configs) c.validate();
  mf.validate();
  fm.validate();
  split.validate();
  if (repeats < 1) throw ValidationError("repeats must be >= 1");
  if (alpha_grid.empty()) throw ValidationError("alpha grid is empty");
  for (double a : alpha_grid) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw ValidationError("alpha grid value " + text::format_double(a) +
                            " outside [0,1]");
    }
  }
  if (lambda_grid.empty()) throw ValidationError("lambda grid is empty");
  for (double l : lambda_grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw ValidationError("lambda grid values must be non-negative");
    }
  }
}

MetricReport run_experiment(const HinGraph& graph, const ExperimentConfig& cfg,
                            const AccessTrace& trace) {
  cfg.validate();
  auto note = [&](std::string_view part, std::size_t r) {
    if (trace) trace(part, r);
  };
  // Without a motif every alpha gives the same similarities.
  const bool any_motif = std::any_of(cfg.memp_configs.begin(), cfg.memp_configs.end(),
                                     [](const MempConfig& c) { return c.motif.has_value(); });
  const std::vector<double> alphas = any_motif ? cfg.alpha_grid : std::vector<double>{0.0};
  MetricReport report;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    StageClock clock;
    const std::uint64_t repeat_seed = mix_seed(cfg.seed, r);
    auto t0 = Clock::now();
    SplitConfig sc = cfg.split;
    sc.seed = repeat_seed;
    DataSplit data = in_stage("split", [&] { return split(graph.ratings, sc); });
    // Only the selection stage below may look at train/valid.
    RatingDataset test = std::move(data.test);
    data.test = graph.ratings.with_triples({});
    clock.add(&StageTimes::split, seconds_since(t0));
    RepeatContext ctx(graph, std::move(data), cfg, repeat_seed);

    const std::size_t n_lambda = cfg.lambda_grid.size();
    std::vector<GridScore> grid(alphas.size() * n_lambda);
    std::mutex trace_mu;
    parallel_for(alphas.size(), cfg.jobs, [&](std::size_t a) {
      const double alpha = alphas[a];
      {
        std::lock_guard lock(trace_mu);
        note("train", r);
      }
      const auto latents = ctx.latents(with_alpha(cfg.memp_configs, alpha), clock);
      const auto train_samples = make_samples(latents, ctx.data().train);
      {
        std::lock_guard lock(trace_mu);
        note("valid", r);
      }
      const auto valid_samples = make_samples(latents, ctx.data().valid);
      for (std::size_t l = 0; l < n_lambda; ++l) {
        const double lambda = cfg.lambda_grid[l];
        const FmModel model = ctx.train_fm(train_samples, lambda, clock);
        const auto t1 = Clock::now();
        const double v = valid_samples.empty()
                             ? std::numeric_limits<double>::infinity()
                             : score(model, valid_samples, cfg.clamp).rmse;
        clock.add(&StageTimes::score, seconds_since(t1));
        grid[a * n_lambda + l] = {alpha, lambda, v};
      }
    });

    GridScore best = grid.front();
    for (const auto& g : grid) {
      if (better(g, best)) best = g;
    }

    // Refit the selected point; every fit is deterministic so this reproduces
    // the model that won on validation.
    const auto latents = ctx.latents(with_alpha(cfg.memp_configs, best.alpha), clock);
    const FmModel model =
        ctx.train_fm(make_samples(latents, ctx.data().train), best.lambda, clock);
    note("test", r);
    t0 = Clock::now();
    const Scores s = in_stage("score", [&] {
      return score(model, make_samples(latents, test), cfg.clamp);
    });
    clock.add(&StageTimes::score, seconds_since(t0));

    RunResult run;
    run.repeat = r;
    run.seed = repeat_seed;
    run.alpha = best.alpha;
    run.lambda = best.lambda;
    run.valid_rmse = best.valid_rmse;
    run.test_rmse = s.rmse;
    run.test_mae = s.mae;
    run.grid = std::move(grid);
    report.runs.push_back(std::move(run));
    report.timings.push_back(clock.times);
  }
  std::vector<double> rmses;
  std::vector<double> maes;
  for (const auto& run : report.runs) {
    rmses.push_back(run.test_rmse);
    maes.push_back(run.test_mae);
  }
  std::tie(report.mean_rmse, report.std_rmse) = mean_std(rmses);
  std::tie(report.mean_mae, report.std_mae) = mean_std(maes);
  return report;
}

SweepReport run_sweep(const HinGraph& graph, const ExperimentConfig& cfg,
                      std::span<const MotifId> motifs) {
  cfg.validate();
  if (motifs.empty()) throw ValidationError("sweep: no motifs given");
  SweepReport report;
  report.motifs.assign(motifs.begin(), motifs.end());
  report.alphas = cfg.alpha_grid;
  const std::size_t n_alpha = cfg.alpha_grid.size();
  report.cells.resize(motifs.size() * n_alpha);
  for (std::size_t m = 0; m < motifs.size(); ++m) {
    for (std::size_t a = 0; a < n_alpha; ++a) {
      report.cells[m * n_alpha + a].motif = motifs[m];
      report.cells[m * n_alpha + a].alpha = cfg.alpha_grid[a];
    }
  }
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    StageClock clock;
    const std::uint64_t repeat_seed = mix_seed(cfg.seed, r);
    SplitConfig sc = cfg.split;
    sc.seed = repeat_seed;
    DataSplit data = in_stage("split", [&] { return split(graph.ratings, sc); });
    RepeatContext ctx(graph, std::move(data), cfg, repeat_seed);
    struct CellResult {
      double lambda = 0.0;
      Scores test;
    };
    std::vector<CellResult> results(report.cells.size());
    parallel_for(report.cells.size(), cfg.jobs, [&](std::size_t c) {
      const auto& cell = report.cells[c];
      const auto configs = with_alpha(with_motif(cfg.memp_configs, cell.motif), cell.alpha);
      const auto latents = ctx.latents(configs, clock);
      const auto train_samples = make_samples(latents, ctx.data().train);
      const auto valid_samples = make_samples(latents, ctx.data().valid);
      const auto test_samples = make_samples(latents, ctx.data().test);
      GridScore best{cell.alpha, 0.0, std::numeric_limits<double>::infinity()};
      FmModel best_model;
      for (double lambda : cfg.lambda_grid) {
        FmModel model = ctx.train_fm(train_samples, lambda, clock);
        const double v = (cfg.lambda_grid.size() == 1 || valid_samples.empty())
                             ? 0.0
                             : score(model, valid_samples, cfg.clamp).rmse;
        const GridScore g{cell.alpha, lambda, v};
        if (best_model.dim() == 0 || better(g, best)) {
          best = g;
          best_model = std::move(model);
        }
      }
      results[c] = {best.lambda, score(best_model, test_samples, cfg.clamp)};
    });
    for (std::size_t c = 0; c < results.size(); ++c) {
      report.cells[c].lambdas.push_back(results[c].lambda);
      report.cells[c].test_rmse.push_back(results[c].test.rmse);
      report.cells[c].test_mae.push_back(results[c].test.mae);
    }
  }
  for (auto& cell : report.cells) {
    cell.mean_rmse = mean_std(cell.test_rmse).first;
    cell.mean_mae = mean_std(cell.test_mae).first;
  }
  return report;
}

void write_report(std::ostream& out, const MetricReport& report) {
  using text::format_double;
  out << "repeats = " << report.runs.size() << '\n';
  for (const auto& run : report.runs) {
    const std::string p = "run." + std::to_string(run.repeat) + ".";
    out << p << "seed = " << run.seed << '\n';
    out << p << "alpha = " << format_double(run.alpha) << '\n';
    out << p << "lambda = " << format_double(run.lambda) << '\n';
    out << p << "valid_rmse = " << format_double(run.valid_rmse) << '\n';
    out << p << "test_rmse = " << format_double(run.test_rmse) << '\n';
    out << p << "test_mae = " << format_double(run.test_mae) << '\n';
  }
  out << "mean.rmse = " << format_double(report.mean_rmse) << '\n';
  out << "mean.mae = " << format_double(report.mean_mae) << '\n';
  out << "std.rmse = " << format_double(report.std_rmse) << '\n';
  out << "std.mae = " << format_double(report.std_mae) << '\n';
}

void write_runs_jsonl(std::ostream& out, const MetricReport& report) {
  for (const auto& run : report.runs) {
    nlohmann::ordered_json j;
    j["repeat"] = run.repeat;
    j["seed"] = run.seed;
    j["alpha"] = run.alpha;
    j["lambda"] = run.lambda;
    j["valid_rmse"] = run.valid_rmse;
    j["rmse"] = run.test_rmse;
    j["mae"] = run.test_mae;
    auto grid = nlohmann::ordered_json::array();
    for (const auto& g : run.grid) {
      grid.push_back({{"alpha", g.alpha}, {"lambda", g.lambda}, {"valid_rmse", g.valid_rmse}});
    }
    j["grid"] = std::move(grid);
    out << j.dump() << '\n';
  }
}

void write_timings(std::ostream& out, const MetricReport& report) {
  out << "repeat\tsplit\tsimilarity\tfactorize\tfm\tscore\n";
  for (std::size_t r = 0; r < report.timings.size(); ++r) {
    const auto& t = report.timings[r];
    out << r << '\t' << fixed(t.split, 3) << '\t' << fixed(t.similarity, 3) << '\t'
        << fixed(t.factorize, 3) << '\t' << fixed(t.fm, 3) << '\t' << fixed(t.score, 3)
        << '\n';
  }
}

void print_summary(std::ostream& out, const MetricReport& report,
                   std::string_view label) {
  out << std::left << std::setw(20) << "Method" << std::setw(10) << "RMSE"
      << std::setw(10) << "MAE" << '\n';
  out << std::left << std::setw(20) << label << std::setw(10)
      << fixed(report.mean_rmse, 4) << std::setw(10) << fixed(report.mean_mae, 4)
      << '\n';
  for (const auto& run : report.runs) {
    out << "  run " << run.repeat << ": rmse " << fixed(run.test_rmse, 4) << "  mae "
        << fixed(run.test_mae, 4) << "  alpha " << text::format_double(run.alpha)
        << "  lambda " << text::format_double(run.lambda) << '\n';
  }
}

void write_sweep_tsv(std::ostream& out, const SweepReport& report) {
  out << "motif\talpha\tmean_rmse\tmean_mae\tlambdas\n";
  for (const auto& c : report.cells) {
    out << to_string(c.motif) << '\t' << text::format_double(c.alpha) << '\t'
        << text::format_double(c.mean_rmse) << '\t' << text::format_double(c.mean_mae)
        << '\t';
    for (std::size_t i = 0; i < c.lambdas.size(); ++i) {
      if (i > 0) out << ',';
      out << text::format_double(c.lambdas[i]);
    }
    out << '\n';
  }
}

void print_sweep_table(std::ostream& out, const SweepReport& report) {
  out << "test RMSE (mean over repeats)\n" << std::left << std::setw(8) << "motif";
  for (double a : report.alphas) out << std::setw(9) << text::format_double(a);
  out << '\n';
  for (std::size_t m = 0; m < report.motifs.size(); ++m) {
    out << std::setw(8) << to_string(report.motifs[m]);
    for (std::size_t a = 0; a < report.alphas.size(); ++a) {
      out << std::setw(9) << fixed(report.cell(m, a).mean_rmse, 4);
    }
    out << '\n';
  }
}

}  // namespace mohin
