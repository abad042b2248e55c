// Acceptance suite: one PASS/FAIL line per criterion. Run all criteria, or
// pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "nansde/checkpoint.hpp"
#include "nansde/csv.hpp"
#include "nansde/error.hpp"
#include "nansde/experiment/commands.hpp"
#include "nansde/integrator.hpp"
#include "nansde/metrics.hpp"
#include "nansde/mlp.hpp"
#include "nansde/noise.hpp"
#include "nansde/training.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace nansde;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nansde_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double grad_rel_err(double analytic, double numeric, double scale_floor) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), scale_floor});
}

NansdeModel random_model(const std::vector<std::size_t>& widths, const TimeGrid& grid, double x0,
                         std::uint64_t seed, double scale) {
  NansdeModel m = make_model(ModelArchitecture{widths, false}, grid, x0, seed);
  std::vector<double> theta = m.parameters();
  RandomStream rng({seed, 99});
  for (double& v : theta) v = scale * (2.0 * rng.uniform() - 1.0);
  m.assign_parameters(theta);
  return m;
}

// ---------------------------------------------------------------------------

Outcome gradient_suite() {
  // (a) standalone MLPs, 100 random draws, central differences at 1e-5.
  RandomStream rng({2024, 0});
  const std::vector<std::vector<std::size_t>> shapes{{1, 20, 1}, {2, 5, 3}, {3, 4, 4, 2}, {1, 1}};
  double worst_mlp = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const auto& widths = shapes[static_cast<std::size_t>(draw) % shapes.size()];
    MlpParams p = MlpParams::zeros(widths);
    std::vector<double> theta(p.parameter_count());
    for (double& v : theta) v = 2.0 * rng.uniform() - 1.0;
    p.assign_from(theta);
    std::vector<double> x(widths.front()), adj(widths.back());
    for (double& v : x) v = rng.normal();
    for (double& v : adj) v = rng.normal();
    auto objective = [&] {
      const std::vector<double> y = mlp_forward(p, x);
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += adj[i] * y[i];
      return s;
    };
    MlpTape tape;
    mlp_forward(p, x, tape);
    std::vector<double> analytic(p.parameter_count());
    mlp_backward(tape, adj).copy_to(analytic);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double saved = theta[i];
      theta[i] = saved + 1e-5;
      p.assign_from(theta);
      const double up = objective();
      theta[i] = saved - 1e-5;
      p.assign_from(theta);
      const double down = objective();
      theta[i] = saved;
      p.assign_from(theta);
      worst_mlp = std::max(worst_mlp, grad_rel_err(analytic[i], (up - down) / 2e-5, 1e-2));
    }
  }

  // (b) full loss, T = 20, M = 8, widths [1,4,1], bandwidths held at the
  // values of the unperturbed evaluation.
  const TimeGrid grid = TimeGrid::over(0.0, 1.0, 20);
  NansdeModel target = random_model({1, 4, 1}, grid, 2.0, 1, 0.5);
  target.diffusion.layer(1).bias[0] -= 1.5;
  const LogReturnSeries obs = log_returns(simulate_path(target, {1, 1000}));
  NansdeModel model = random_model({1, 4, 1}, grid, 2.0, 2, 0.5);
  model.diffusion.layer(1).bias[0] -= 1.5;
  const NoiseSeed seed{5, 0};
  const LossGradient lg = loss_and_gradient(model, obs, 8, seed, 1e-12, 1);
  std::vector<double> theta = model.parameters();
  double worst_loss = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + 1e-6;
    model.assign_parameters(theta);
    const double up = evaluate_loss(model, obs, 8, seed, 1e-12, 1, lg.bandwidths);
    theta[i] = saved - 1e-6;
    model.assign_parameters(theta);
    const double down = evaluate_loss(model, obs, 8, seed, 1e-12, 1, lg.bandwidths);
    theta[i] = saved;
    model.assign_parameters(theta);
    worst_loss = std::max(worst_loss, grad_rel_err(lg.gradient[i], (up - down) / 2e-6, 1e-4));
  }
  return {worst_mlp < 1e-6 && worst_loss < 1e-3 && lg.dropped == 0,
          "worst MLP rel err " + fmt(worst_mlp) + " (< 1e-6), worst loss rel err " +
              fmt(worst_loss) + " (< 1e-3) over " + std::to_string(theta.size()) + " parameters"};
}

Outcome kernel_oracle() {
  const auto rows =
      test::load_arma_oracle(std::string(NANSDE_TEST_DATA_DIR) + "/arma_ell_oracle.csv");
  double worst = 0.0;
  double max_pu = 0.0;
  for (const auto& r : rows) {
    worst = std::max(worst, test::rel_err(arma_ell(r.u, ArmaKernelParams(r.p, r.q)), r.ell));
    max_pu = std::max(max_pu, r.p * r.u);
  }
  return {rows.size() == 100 && worst <= 1e-12,
          std::to_string(rows.size()) + " points, max p*u " + fmt(max_pu) + ", worst rel err " +
              fmt(worst)};
}

Outcome noise_law_oracle() {
  const TimeGrid g(0.0, 0.005, 200);
  const ArmaKernelParams params(2.0, 1.0);
  std::vector<double> terminal;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    terminal.push_back(arma_noise_path(g, params, {8128, i}).z.back());
  }
  const double var = test::sample_variance(terminal);
  const double se = test::variance_standard_error(terminal);
  const double z = std::abs(var - test::kArmaVarianceAtOne) / se;
  return {z < 3.0, "Var Z(1) = " + fmt(var, 6) + " vs quadrature " +
                       fmt(test::kArmaVarianceAtOne, 6) + ", |diff| = " + fmt(z, 3) + " SE"};
}

Outcome hurst_recovery() {
  bool ok = true;
  std::string detail;
  for (double h : {0.2, 0.3, 0.5, 0.8}) {
    const FbmConfig cfg(h, TimeGrid::over(0.0, 1.0, 1000));
    std::vector<double> est;
    for (std::uint64_t i = 0; i < 100; ++i) est.push_back(estimate_hurst(fbm_path(cfg, {55, i})));
    const double med = test::median(est);
    ok = ok && std::abs(med - h) <= 0.05;
    detail += (detail.empty() ? "" : ", ") + std::string("H=") + fmt(h) + " -> " + fmt(med);
  }
  return {ok, "medians over 100 paths: " + detail};
}

Outcome reductions() {
  const TimeGrid grid = TimeGrid::over(0.0, 1.0, 1000);
  std::size_t mismatches = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    NansdeModel model = random_model({1, 20, 1}, grid, 1.0, s, 0.8);
    model.ell2_clamped = true;
    const NoiseSeed seed{s, 7};
    const Path x = simulate_path(model, seed);
    const std::vector<double> dw = brownian_increments(grid, seed);
    double xs = model.x0;
    for (std::size_t k = 0; k < dw.size(); ++k) {
      xs = xs + model.drift_at(xs) * grid.dt() + model.diffusion_at(xs) * dw[k];
      if (x[k + 1] != xs) ++mismatches;
    }
  }
  std::size_t arma_mismatches = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const ArmaNoisePath noise = arma_noise_path(grid, ArmaKernelParams(1.0 + s, 0.0), {s, 3});
    const Path bm = Path::from_increments(grid, 0.0, brownian_increments(grid, {s, 3}));
    for (std::size_t k = 0; k < grid.n_points(); ++k) {
      if (noise.z[k] != bm[k]) ++arma_mismatches;
    }
  }
  return {mismatches == 0 && arma_mismatches == 0,
          "clamped-l2 vs collapsed scheme: " + std::to_string(mismatches) +
              " differing values; q=0 ARMA vs Brownian: " + std::to_string(arma_mismatches) +
              " (5 paths x 1001 points each)"};
}

Outcome metric_identities() {
  RandomStream rng({6, 0});
  LogReturnSeries obs;
  for (int i = 0; i < 400; ++i) obs.r.push_back(0.01 * rng.normal());
  const BinSpec bins = bins_for(obs);
  const std::vector<LogReturnSeries> same(5, obs);
  const double tv_same = tv_distance(obs, same, bins);
  LogReturnSeries far = obs;
  for (double& v : far.r) v += 10.0;
  const std::vector<LogReturnSeries> disjoint(3, far);
  const double tv_far = tv_distance(obs, disjoint, bins);
  const AcfScores acf = acf_scores(obs, same, default_lag_count(obs.size()));
  double worst_w = 0.0;
  for (std::size_t s : {1u, 10u, 100u}) {
    const std::vector<double> w = acf_weights(s);
    double sum = 0.0;
    for (double v : w) sum += v;
    worst_w = std::max(worst_w, std::abs(sum / static_cast<double>(s) - 1.0));
  }
  const std::vector<double> test_r(obs.r.end() - 80, obs.r.end());
  const double r2_perfect = r2_from_predictions(test_r, test_r);
  const double r2_mean =
      r2_from_predictions(test_r, std::vector<double>(test_r.size(), test::sample_mean(test_r)));
  const bool ok = std::abs(tv_same) < 1e-12 && std::abs(tv_far - 1.0) < 1e-12 && acf.acf < 1e-14 &&
                  acf.weighted_acf < 1e-14 && worst_w < 1e-14 && r2_perfect == 1.0 &&
                  std::abs(r2_mean) < 1e-14;
  return {ok, "TV(p,p)=" + fmt(tv_same) + ", TV(disjoint)=" + fmt(tv_far, 17) + ", ACF=" +
                  fmt(acf.acf) + ", wACF=" + fmt(acf.weighted_acf) + ", max |mean w - 1|=" +
                  fmt(worst_w) + ", R2 perfect=" + fmt(r2_perfect) + ", R2 mean=" + fmt(r2_mean)};
}

Outcome table_direction() {
  const fs::path dir = scratch("c7");
  experiment::FbmOptions fbm;
  fbm.hurst = 0.2;
  fbm.seed = 2024;
  fbm.out = dir / "fbm_h02.csv";
  experiment::cmd_generate_fbm(fbm);
  std::vector<double> nansde_h, sde_h;
  double observed = 0.0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    experiment::ExperimentConfig cfg;
    cfg.data_file = fbm.out.string();
    cfg.output_dir = (dir / ("seed" + std::to_string(s))).string();
    cfg.init_seed = s;
    cfg.train_seed = 100 + s;
    cfg.eval_seed = 200 + s;
    cfg.train_m = 64;
    cfg.max_iters = 300;
    cfg.patience = 60;
    const auto rows = experiment::cmd_compare(cfg);
    sde_h.push_back(rows[0].report.hurst_mean);
    nansde_h.push_back(rows[1].report.hurst_mean);
    observed = rows[1].report.observed_hurst;
    std::cout << "  seed " << s << ": nansde hurst " << fmt(rows[1].report.hurst_mean) << " +- "
              << fmt(rows[1].report.hurst_std) << ", sde hurst " << fmt(rows[0].report.hurst_mean)
              << " +- " << fmt(rows[0].report.hurst_std) << "\n";
  }
  fs::remove_all(dir);
  const double med = test::median(nansde_h);
  return {med >= 0.30 && med <= 0.60,
          "median ensemble Hurst: nansde " + fmt(med) + " (corridor [0.30, 0.60]), sde " +
              fmt(test::median(sde_h)) + ", observed path " + fmt(observed)};
}

Outcome training_smoke() {
  const TimeGrid grid = TimeGrid::over(0.0, 1.0, 1000);
  // Frozen generator: random initialisation, x0 = 5, unchanged networks.
  const NansdeModel truth = make_model(ModelArchitecture{}, grid, 5.0, 777);
  const Path data = simulate_path(truth, {4242, 0});
  if (!strictly_positive(data.values())) return {false, "frozen model produced a non-positive path"};
  const LogReturnSeries obs = log_returns(data);
  int loss_better = 0, tv_better = 0;
  std::string detail;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const NansdeModel start = make_model(ModelArchitecture{}, grid, data.front(), 100 + s);
    TrainConfig cfg;
    cfg.m = 64;
    cfg.max_iters = 300;
    cfg.patience = 300;
    cfg.seed = {300 + s, 0};
    const FitResult fit_result = fit(start, data, cfg);
    const NoiseSeed eval{derive_seed(500 + s, 1), 0};
    const double loss0 = evaluate_loss(start, obs, 256, eval, cfg.kde_floor, 1);
    const double loss1 = evaluate_loss(fit_result.model, obs, 256, eval, cfg.kde_floor, 1);
    MetricSettings ms;
    ms.seed = eval;
    ms.r2_m_pred = 10;
    const double tv0 = evaluate_model(start, data, ms).tv;
    const double tv1 = evaluate_model(fit_result.model, data, ms).tv;
    loss_better += loss1 < loss0;
    tv_better += tv1 < tv0;
    std::cout << "  seed " << s << ": loss " << fmt(loss0) << " -> " << fmt(loss1) << ", TV "
              << fmt(tv0) << " -> " << fmt(tv1) << "\n";
  }
  return {loss_better >= 4 && tv_better >= 4,
          "loss improved in " + std::to_string(loss_better) + "/5 seeds, TV improved in " +
              std::to_string(tv_better) + "/5 seeds (need >= 4 each)"};
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<fs::path> files_a, files_b;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) files_a.push_back(fs::relative(e.path(), a));
  }
  for (const auto& e : fs::recursive_directory_iterator(b)) {
    if (e.is_regular_file()) files_b.push_back(fs::relative(e.path(), b));
  }
  std::sort(files_a.begin(), files_a.end());
  std::sort(files_b.begin(), files_b.end());
  if (files_a != files_b) {
    why = "file sets differ under " + a.string();
    return false;
  }
  for (const fs::path& f : files_a) {
    if (read_file(a / f) != read_file(b / f)) {
      why = "bytes differ: " + f.string();
      return false;
    }
  }
  return !files_a.empty();
}

Outcome reproducibility() {
  const fs::path dir = scratch("c9");
  const std::string cli = NANSDE_CLI_PATH;
  auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args + " -q";
    if (std::system(cmd.c_str()) != 0) throw Error("command failed: " + cmd);
  };
  const std::string d = dir.string();
  std::vector<std::string> checked;
  std::string why;
  bool ok = true;

  run("generate-fbm --hurst 0.2 --n-paths 4 --seed 9 --threads 1 --out " + d + "/g1/fbm.csv");
  run("generate-fbm --hurst 0.2 --n-paths 4 --seed 9 --threads 4 --out " + d + "/g4/fbm.csv");
  ok = ok && same_tree(dir / "g1", dir / "g4", why);
  checked.push_back("generate-fbm");

  const std::string data = "--data.file " + d + "/g1/fbm.csv --data.column 2";
  const std::string budget =
      "--model.widths 1,8,1 --train.m 24 --train.max_iters 25 --train.patience 25 --eval.m 24 "
      "--eval.r2_m_pred 10";
  run("train " + data + " " + budget + " --model.init_seed 3 --train.seed 4 --threads 1 "
      "--output.dir " + d + "/t1");
  run("train --config " + d + "/t1/manifest.json --threads 4 --output.dir " + d + "/t4");
  ok = ok && same_tree(dir / "t1", dir / "t4", why);
  checked.push_back("train");

  run("evaluate " + data + " --checkpoint " + d + "/t1/checkpoint --eval.seed 5 --eval.m 48 "
      "--threads 1 --output.dir " + d + "/e1");
  run("evaluate --config " + d + "/e1/manifest.json --threads 3 --output.dir " + d + "/e3");
  ok = ok && same_tree(dir / "e1", dir / "e3", why);
  checked.push_back("evaluate");

  run("compare " + data + " " + budget + " --model.init_seed 3 --train.seed 4 --eval.seed 5 "
      "--threads 1 --output.dir " + d + "/c1 > /dev/null");
  run("compare --config " + d + "/c1/manifest.json --threads 4 --output.dir " + d + "/c4"
      " > /dev/null");
  ok = ok && same_tree(dir / "c1", dir / "c4", why);
  checked.push_back("compare");

  fs::remove_all(dir);
  std::string names;
  for (const auto& c : checked) names += (names.empty() ? "" : ", ") + c;
  return {ok, ok ? "byte-identical outputs with 1 vs 3-4 threads, rerun from manifest: " + names
                 : why};
}

struct Criterion {
  int id;
  const char* title;
  double limit_seconds;  // 0: no limit
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "gradient suite", 60, gradient_suite},
      {2, "kernel oracle", 30, kernel_oracle},
      {3, "noise-law oracle", 120, noise_law_oracle},
      {4, "Hurst recovery", 120, hurst_recovery},
      {5, "reductions", 30, reductions},
      {6, "metric identities", 30, metric_identities},
      {7, "Hurst direction on fBm(H=0.2)", 1800, table_direction},
      {8, "training smoke test", 1800, training_smoke},
      {9, "reproducibility", 0, reproducibility},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) {
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds > 0 && secs > c.limit_seconds) {
      out.pass = false;
      out.detail += "; runtime limit " + fmt(c.limit_seconds) + " s exceeded";
    }
    std::cout << "CRITERION " << c.id << " " << (out.pass ? "PASS" : "FAIL") << ": " << c.title
              << " - " << out.detail << " [" << fmt(secs, 3) << " s]" << std::endl;
    failures += out.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
