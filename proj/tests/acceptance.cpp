// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// gating criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "helpers.hpp"
#include "mohin/eval.hpp"
#include "mohin/factorization.hpp"
#include "mohin/fm.hpp"
#include "mohin/memp.hpp"
#include "mohin/motif.hpp"
#include "mohin/synthetic.hpp"

namespace fs = std::filesystem;
using namespace mohin;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mohinrec");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

Outcome motif_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> size(3, 40);
  std::size_t graphs = 0, mismatches = 0;
  for (const double p : {0.05, 0.1, 0.2}) {
    for (int trial = 0; trial < 70; ++trial) {
      const auto a = testing::random_digraph(size(rng), p, rng);
      ++graphs;
      for (const auto m : kAllMotifs) {
        if (!(motif_adjacency(a, m) == motif_adjacency_bruteforce(a, m))) ++mismatches;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && graphs >= 200 && secs < 60.0,
          std::to_string(graphs) + " graphs x 7 motifs, " + std::to_string(mismatches) +
              " mismatches, " + fmt("%.1f s", secs)};
}

Outcome five_node_example() {
  const auto w = motif_adjacency(testing::five_node_graph(), MotifId::kM6);
  std::ifstream golden(testing::data_path("five_node_m6.coo"));
  const auto expected = read_coo(golden);
  const bool anchor = entry(w, 0, 2) == 2.0 && entry(w, 2, 0) == 2.0;
  return {anchor && w == expected,
          "(v1,v3) = " + fmt("%g", entry(w, 0, 2)) + ", full matrix " +
              (w == expected ? "matches" : "differs")};
}

Outcome path_counts() {
  std::mt19937_64 rng(20240602);
  std::uniform_int_distribution<std::size_t> size(2, 25);
  std::size_t hins = 0, entries = 0, mismatches = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = testing::random_hin(size(rng), size(rng), 0.15, 0.2, rng);
    ++hins;
    for (const auto& path : {user_item_path(), user_user_item_path()}) {
      const auto s = commuting_matrix(g, {path, std::nullopt, 0.0}).matrix;
      for (std::size_t u = 0; u < g.n_users(); ++u) {
        for (std::size_t b = 0; b < g.n_items(); ++b) {
          ++entries;
          if (entry(s, u, b) != double(path_count_bruteforce(g, path, u, b))) ++mismatches;
        }
      }
    }
  }
  const auto toy = testing::toy_network();
  const auto s = commuting_matrix(toy, {user_user_item_path(), std::nullopt, 0.0}).matrix;
  const Index u1 = *toy.user_labels().find("u1");
  bool toy_ok = true;
  for (const char* b : {"b2", "b3", "b4"}) {
    toy_ok = toy_ok && entry(s, u1, *toy.item_labels().find(b)) == 1.0;
  }
  return {mismatches == 0 && hins >= 50 && toy_ok,
          std::to_string(hins) + " HINs, " + std::to_string(entries) + " entries, " +
              std::to_string(mismatches) + " mismatches; toy (u1,b2..b4) " +
              (toy_ok ? "= 1" : "wrong")};
}

Outcome blend_endpoints() {
  std::mt19937_64 rng(20240603);
  std::size_t failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto w = testing::random_digraph(30, 0.15, rng);
    const auto wm = motif_adjacency(w, kAllMotifs[trial % 7]);
    const auto scaled = add_scaled(w, 0.3, wm, 1.7);
    if (!(blend(w, wm, 0.0) == w) || !(blend(w, wm, 1.0) == wm)) ++failures;
    if (!(blend(scaled, wm, 0.0) == scaled) || !(blend(wm, scaled, 1.0) == scaled)) ++failures;
  }

  SyntheticConfig sc;
  sc.n_users = 80;
  sc.n_items = 50;
  sc.n_ratings = 700;
  sc.seed = 4;
  const auto g = generate_synthetic(sc);
  ExperimentConfig cfg;
  cfg.memp_configs = default_memp_configs(MotifId::kM1);
  cfg.repeats = 2;
  cfg.alpha_grid = {0.0, 0.5, 1.0};
  cfg.lambda_grid = {0.1};
  cfg.mf.rank = 4;
  cfg.mf.epochs = 20;
  cfg.mf.learning_rate = 0.002;
  cfg.fm.k_factors = 4;
  cfg.fm.epochs = 20;
  cfg.fm.learning_rate = 0.001;
  cfg.seed = 11;
  const auto sweep = run_sweep(g, cfg, kAllMotifs);
  bool column_ok = true;
  for (std::size_t m = 1; m < kAllMotifs.size(); ++m) {
    column_ok = column_ok && sweep.cell(m, 0).test_rmse == sweep.cell(0, 0).test_rmse &&
                sweep.cell(m, 0).test_mae == sweep.cell(0, 0).test_mae;
  }
  return {failures == 0 && column_ok,
          std::to_string(failures) + " endpoint failures over 200 blends; sweep alpha=0 column " +
              (column_ok ? "identical" : "differs") + " across 7 motifs"};
}

double naive_fm(const FmModel& m, const std::vector<double>& x) {
  double y = m.w0;
  for (std::size_t i = 0; i < x.size(); ++i) y += m.w[i] * x[i];
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      double dot = 0.0;
      for (std::size_t f = 0; f < m.k(); ++f) dot += m.v(i, f) * m.v(j, f);
      y += dot * x[i] * x[j];
    }
  }
  return y;
}

Outcome gradients() {
  std::mt19937_64 rng(20240604);
  std::normal_distribution<double> g(0.0, 0.6);
  const double h = 1e-5;

  // MF: per-entry objective (s - u.v)^2 + reg (|u|^2 + |v|^2).
  std::size_t mf_probes = 0;
  double mf_worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rank = 1 + trial % 5;
    const auto s = testing::random_matrix(8, 6, 0.4, 5, rng);
    LatentFeatures f{DenseMatrix(8, rank), DenseMatrix(6, rank), {}, {}};
    for (auto& x : f.user_factors.data()) x = g(rng);
    for (auto& x : f.item_factors.data()) x = g(rng);
    const double reg = 0.05 * (trial % 3);
    for (const auto& t : s.to_triplets()) {
      const auto grad = mf_gradient(s, f, reg, t.row, t.col);
      auto u = f.user_factors.row(t.row);
      auto v = f.item_factors.row(t.col);
      auto objective = [&] {
        double dot = 0.0, uu = 0.0, vv = 0.0;
        for (std::size_t k = 0; k < rank; ++k) {
          dot += u[k] * v[k];
          uu += u[k] * u[k];
          vv += v[k] * v[k];
        }
        return (t.value - dot) * (t.value - dot) + reg * (uu + vv);
      };
      for (std::size_t k = 0; k < rank; ++k) {
        for (auto [param, analytic] : {std::pair{&u[k], grad.d_user[k]},
                                       std::pair{&v[k], grad.d_item[k]}}) {
          const double keep = *param;
          *param = keep + h;
          const double up = objective();
          *param = keep - h;
          const double dn = objective();
          *param = keep;
          mf_worst = std::max(mf_worst, relative_error(analytic, (up - dn) / (2 * h)));
          ++mf_probes;
        }
      }
    }
  }

  // FM: per-sample objective (y_hat - y)^2 + lw |w|^2 + lv |v|^2.
  std::size_t fm_probes = 0;
  double fm_worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 4 + trial % 9, k = 1 + trial % 5;
    FmModel m{g(rng), std::vector<double>(d), DenseMatrix(d, k)};
    for (auto& a : m.w) a = g(rng);
    for (auto& a : m.v.data()) a = g(rng);
    std::vector<double> x(d);
    for (auto& a : x) a = g(rng);
    const double y = 1.0 + trial % 5, lw = 0.1 * (trial % 2), lv = 0.03 * (trial % 3);
    const auto grad = fm_gradient(m, x, y, lw, lv);
    auto objective = [&] {
      double ww = 0.0;
      for (double a : m.w) ww += a * a;
      const double r = naive_fm(m, x) - y;
      return r * r + lw * ww + lv * m.v.squared_norm();
    };
    auto probe = [&](double& param, double analytic) {
      const double keep = param;
      param = keep + h;
      const double up = objective();
      param = keep - h;
      const double dn = objective();
      param = keep;
      fm_worst = std::max(fm_worst, relative_error(analytic, (up - dn) / (2 * h)));
      ++fm_probes;
    };
    probe(m.w0, grad.w0);
    for (std::size_t i = 0; i < d; ++i) probe(m.w[i], grad.w[i]);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t f = 0; f < k; ++f) probe(m.v(i, f), grad.v(i, f));
    }
  }

  // O(dK) prediction against the pairwise double loop.
  double pred_worst = 0.0;
  std::uniform_int_distribution<std::size_t> dim(1, 60), rank(1, 12);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t d = dim(rng), k = rank(rng);
    FmModel m{g(rng), std::vector<double>(d), DenseMatrix(d, k)};
    for (auto& a : m.w) a = g(rng);
    for (auto& a : m.v.data()) a = g(rng);
    std::vector<double> x(d);
    for (auto& a : x) a = g(rng);
    const double slow = naive_fm(m, x);
    pred_worst = std::max(pred_worst, std::abs(fm_predict(m, x) - slow) / (1.0 + std::abs(slow)));
  }
  const bool pass = mf_probes >= 100 && fm_probes >= 100 && mf_worst < 1e-4 &&
                    fm_worst < 1e-4 && pred_worst < 1e-10;
  return {pass, "MF " + std::to_string(mf_probes) + " probes max rel err " +
                    fmt("%.2e", mf_worst) + "; FM " + std::to_string(fm_probes) +
                    " probes max rel err " + fmt("%.2e", fm_worst) +
                    "; prediction max rel diff " + fmt("%.2e", pred_worst) +
                    " over 2000 instances"};
}

ExperimentConfig lift_config() {
  ExperimentConfig cfg;
  cfg.memp_configs = default_memp_configs(MotifId::kM4);
  cfg.repeats = 5;
  cfg.alpha_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  cfg.lambda_grid = {0.1};
  cfg.fm.learning_rate = 0.001;
  cfg.seed = 2024;
  return cfg;
}

Outcome synthetic_lift(std::string& extra) {
  const auto t0 = Clock::now();
  const auto g = generate_synthetic(SyntheticConfig{});
  const auto cfg = lift_config();
  const std::vector<MotifId> motif = {MotifId::kM4};
  const auto sweep = run_sweep(g, cfg, motif);
  const double base = sweep.cell(0, 0).mean_rmse;
  std::size_t best = 1;
  for (std::size_t a = 1; a < sweep.alphas.size(); ++a) {
    if (sweep.cell(0, a).mean_rmse < sweep.cell(0, best).mean_rmse) best = a;
  }
  const double lifted = sweep.cell(0, best).mean_rmse;

  std::ostringstream curve;
  for (std::size_t a = 0; a < sweep.alphas.size(); ++a) {
    curve << (a ? " " : "") << fmt("%g", sweep.alphas[a]) << ":"
          << fmt("%.4f", sweep.cell(0, a).mean_rmse);
  }
  extra = "        M4 mean test RMSE by alpha (5 repeats): " + curve.str();
  const double secs = seconds_since(t0);
  return {lifted < base && secs < 300.0,
          "alpha=" + fmt("%g", sweep.alphas[best]) + " RMSE " + fmt("%.4f", lifted) +
              " < alpha=0 RMSE " + fmt("%.4f", base) + ", " + fmt("%.0f s", secs)};
}

Outcome evaluate_determinism() {
  const auto dir = fs::temp_directory_path() / "mohin_acceptance_determinism";
  fs::remove_all(dir);
  const std::string data = (dir / "data").string();
  if (run_cli({"generate", "--out", data, "--users", "120", "--items", "80", "--ratings",
               "1200", "--seed", "5"}) != 0) {
    return {false, "generate failed"};
  }
  const std::vector<std::string> first = {
      "evaluate",   "--data",      data,        "--out",         (dir / "a").string(),
      "--motif",    "M3",          "--repeats", "2",             "--alpha-grid",
      "0,0.5,1",    "--lambda-grid", "0.01,0.1", "--mf-epochs",  "30",
      "--fm-epochs", "30",         "--fm-lr",   "0.001",         "--seed",
      "7"};
  if (run_cli(first) != 0) return {false, "evaluate failed"};
  const auto manifest = (dir / "a" / "manifest.txt").string();
  if (run_cli({"evaluate", "--config", manifest, "--out", (dir / "b").string()}) != 0 ||
      run_cli({"evaluate", "--config", manifest, "--out", (dir / "c").string()}) != 0) {
    return {false, "manifest replay failed"};
  }
  bool same = true;
  for (const char* f : {"report.txt", "runs.jsonl", "manifest.txt"}) {
    const auto a = slurp(dir / "a" / f);
    same = same && !a.empty() && a == slurp(dir / "b" / f) && a == slurp(dir / "c" / f);
  }
  fs::remove_all(dir);
  return {same, same ? "report.txt, runs.jsonl and manifest.txt byte-identical across 3 runs"
                     : "outputs differ"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(std::string&)> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "motif closed forms equal brute-force enumeration",
       [](std::string&) { return motif_oracle(); }},
      {2, "five-node worked example under M6", [](std::string&) { return five_node_example(); }},
      {3, "commuting matrices equal path enumeration", [](std::string&) { return path_counts(); }},
      {4, "blend endpoints and alpha=0 sweep column", [](std::string&) { return blend_endpoints(); }},
      {5, "analytic gradients and factored FM prediction", [](std::string&) { return gradients(); }},
      {6, "synthetic end-to-end lift from motif blending", synthetic_lift},
      {7, "evaluate reproducible from its manifest",
       [](std::string&) { return evaluate_determinism(); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    std::string extra;
    Outcome o;
    try {
      o = c.check(extra);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << ": "
              << o.detail << std::endl;
    if (!extra.empty()) std::cout << extra << std::endl;
  }
  std::cout << "[SKIP] 8. public-dataset reproduction: not gating; needs the Epinions and "
               "CiaoDVD dumps, which are not bundled"
            << std::endl;
  std::cout << (failed == 0 ? "all gating criteria passed" : std::to_string(failed) +
                                                                 " gating criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
