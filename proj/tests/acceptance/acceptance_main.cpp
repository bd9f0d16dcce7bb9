// Acceptance suite: runs every release criterion end to end against the
// bundled demo config and prints one PASS/FAIL line per criterion.
//
//   acceptance --config configs/demo.json --cli <path-to-cli> [--workdir DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dualview/caption_metrics.hpp"
#include "dualview/config.hpp"
#include "dualview/errors.hpp"
#include "dualview/gradcheck.hpp"
#include "dualview/losses.hpp"
#include "dualview/metrics.hpp"
#include "dualview/pipeline.hpp"
#include "dualview/rng.hpp"

namespace fs = std::filesystem;
using namespace dualview;

namespace {

struct Outcome {
  int id;
  std::string name;
  bool pass;
  std::string detail;
  double seconds;
};

std::vector<Outcome> results;
double now_elapsed(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class Fn>
void criterion(int id, const std::string& name, Fn fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out{id, name, false, "", 0};
  try {
    auto [pass, detail] = fn();
    out.pass = pass;
    out.detail = detail;
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  out.seconds = now_elapsed(t0);
  results.push_back(out);
  std::printf("[%s] C%-2d %-28s %6.1fs  %s\n", out.pass ? "PASS" : "FAIL", id, name.c_str(),
              out.seconds, out.detail.c_str());
  std::fflush(stdout);
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string fmt_vec(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(3);
  os << std::fixed << "[";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  os << "]";
  return os.str();
}

// ---- shared training grid for criteria 5-9 ----

struct GridResult {
  // recall@10 per seed for each variant
  std::vector<double> both, a_only, w_only, fix2, fix4, fix10, t1;
  // criterion 8/9 inputs, per seed
  std::vector<double> ap_trained, ap_random, bleu_trained, bleu_random;
  double views_seconds = 0;  // time spent on the three text-view variants
};

GridResult run_grid(const RunConfig& base_cfg) {
  GridResult grid;
  const int n_seeds = 5;
  struct Task {
    int seed_index;
    int variant;  // 0 both, 1 a, 2 w, 3 fix2, 4 fix4, 5 fix10, 6 t1
  };
  std::vector<Task> tasks;
  for (int s = 0; s < n_seeds; ++s) {
    for (int v = 0; v < 7; ++v) tasks.push_back({s, v});
  }
  grid.both.resize(n_seeds);
  grid.a_only.resize(n_seeds);
  grid.w_only.resize(n_seeds);
  grid.fix2.resize(n_seeds);
  grid.fix4.resize(n_seeds);
  grid.fix10.resize(n_seeds);
  grid.t1.resize(n_seeds);
  grid.ap_trained.resize(n_seeds);
  grid.ap_random.resize(n_seeds);
  grid.bleu_trained.resize(n_seeds);
  grid.bleu_random.resize(n_seeds);

  // the three text-view variants run first so criterion 5 gets its own timing
  std::stable_partition(tasks.begin(), tasks.end(),
                        [](const Task& t) { return t.variant <= 2; });
  int n_view_tasks = 0;
  for (const auto& t : tasks) n_view_tasks += t.variant <= 2;

  auto run_task = [&](int ti) {
    const auto task = tasks[static_cast<std::size_t>(ti)];
    RunConfig cfg = base_cfg;
    cfg.seed = base_cfg.seed + static_cast<std::uint64_t>(task.seed_index);
    cfg.world.seed = cfg.seed;

    const auto train_world = pipeline::make_train_world(cfg);
    const auto val_world = pipeline::make_val_world(cfg);

    auto views = objective::Views::both;
    auto len = cfg.clip_length;
    int frames = cfg.hyper.frames_per_clip;
    switch (task.variant) {
      case 1: views = objective::Views::a_only; break;
      case 2: views = objective::Views::w_only; break;
      case 3: len.fixed = true; len.fixed_s = 2.0; break;
      case 4: len.fixed = true; len.fixed_s = 4.0; break;
      case 5: len.fixed = true; len.fixed_s = 10.0; break;
      case 6: frames = 1; break;
      default: break;
    }
    const auto model = pipeline::train_model(train_world, cfg, views, len, frames, cfg.seed);
    const double r10 =
        pipeline::eval_retrieval_core(val_world, model.params, model.vocab, cfg).recall10;

    switch (task.variant) {
      case 0: grid.both[static_cast<std::size_t>(task.seed_index)] = r10; break;
      case 1: grid.a_only[static_cast<std::size_t>(task.seed_index)] = r10; break;
      case 2: grid.w_only[static_cast<std::size_t>(task.seed_index)] = r10; break;
      case 3: grid.fix2[static_cast<std::size_t>(task.seed_index)] = r10; break;
      case 4: grid.fix4[static_cast<std::size_t>(task.seed_index)] = r10; break;
      case 5: grid.fix10[static_cast<std::size_t>(task.seed_index)] = r10; break;
      case 6: grid.t1[static_cast<std::size_t>(task.seed_index)] = r10; break;
    }

    if (task.variant == 0) {
      // zero-shot and captioning comparisons reuse the both-views model
      const auto prompts = pipeline::synthetic_prompts(cfg.world, "tool");
      grid.ap_trained[static_cast<std::size_t>(task.seed_index)] =
          pipeline::eval_zeroshot_core(val_world, model.params, model.vocab, prompts, cfg).mean_ap;
      const auto untrained = pipeline::random_model(train_world, cfg, cfg.seed);
      grid.ap_random[static_cast<std::size_t>(task.seed_index)] =
          pipeline::eval_zeroshot_core(val_world, untrained.params, untrained.vocab, prompts, cfg)
              .mean_ap;

      const auto decoder =
          pipeline::train_captioner_core(train_world, model.params, model.vocab, cfg, cfg.seed);
      grid.bleu_trained[static_cast<std::size_t>(task.seed_index)] =
          pipeline::eval_caption_core(val_world, model.params, model.vocab, decoder, cfg).bleu1;
      const auto rand_decoder = pipeline::train_captioner_core(train_world, untrained.params,
                                                               untrained.vocab, cfg, cfg.seed);
      grid.bleu_random[static_cast<std::size_t>(task.seed_index)] =
          pipeline::eval_caption_core(val_world, untrained.params, untrained.vocab, rand_decoder,
                                      cfg)
              .bleu1;
    }
  };

  const auto t_views0 = std::chrono::steady_clock::now();
  pipeline::parallel_for(n_view_tasks, run_task);
  grid.views_seconds = now_elapsed(t_views0);
  pipeline::parallel_for(static_cast<int>(tasks.size()) - n_view_tasks,
                         [&](int i) { run_task(n_view_tasks + i); });
  return grid;
}

// ---- criterion 2 oracle: direct evaluation of the printed formulas ----

double cosine_oracle(const std::vector<double>& u, const std::vector<double>& v) {
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double info_nce_oracle(const std::vector<std::vector<double>>& chi,
                       const std::vector<std::vector<double>>& beta, double tau) {
  const std::size_t b = chi.size();
  double loss = 0;
  for (std::size_t i = 0; i < b; ++i) {
    double denom = 0;
    for (std::size_t j = 0; j < b; ++j) denom += std::exp(cosine_oracle(chi[i], beta[j]) / tau);
    loss += -std::log(std::exp(cosine_oracle(chi[i], beta[i]) / tau) / denom);
  }
  return loss / static_cast<double>(b);
}

double mil_nce_oracle(const std::vector<std::vector<double>>& chi,
                      const std::vector<std::vector<std::vector<double>>>& gamma, double tau) {
  const std::size_t b = chi.size();
  double loss = 0;
  for (std::size_t i = 0; i < b; ++i) {
    double pos = 0, denom = 0;
    for (std::size_t m = 0; m < gamma[i].size(); ++m) {
      pos += std::exp(cosine_oracle(chi[i], gamma[i][m]) / tau);
    }
    for (std::size_t j = 0; j < b; ++j) {
      for (std::size_t m = 0; m < gamma[j].size(); ++m) {
        denom += std::exp(cosine_oracle(chi[i], gamma[j][m]) / tau);
      }
    }
    loss += -std::log(pos / denom);
  }
  return loss / static_cast<double>(b);
}

grad::Var latents_to_var(const std::vector<std::vector<double>>& rows) {
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return grad::make_tensor({static_cast<int>(rows.size()), static_cast<int>(rows[0].size())},
                           std::move(flat));
}

}  // namespace

int main(int argc, char** argv) {
  std::string config_path = "configs/demo.json";
  std::string cli_path;
  std::string workdir = "acceptance_work";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--config") config_path = argv[i + 1];
    if (flag == "--cli") cli_path = argv[i + 1];
    if (flag == "--workdir") workdir = argv[i + 1];
  }
  const auto total0 = std::chrono::steady_clock::now();
  const auto base_cfg = RunConfig::from_file(config_path);

  // C1 ----------------------------------------------------------------
  criterion(1, "gradient correctness", []() -> std::pair<bool, std::string> {
    const auto t0 = std::chrono::steady_clock::now();
    const auto report = objective::check_gradients(20);
    const double secs = now_elapsed(t0);
    char buf[160];
    std::snprintf(buf, sizeof buf, "max rel err %.3g over %lld entries, %.1fs",
                  report.max_rel_err, report.entries_checked, secs);
    return {report.max_rel_err < 1e-4 && secs < 30.0, buf};
  });

  // C2 ----------------------------------------------------------------
  criterion(2, "loss value oracles", []() -> std::pair<bool, std::string> {
    Rng rng(4242);
    double worst = 0;
    for (int rep = 0; rep < 100; ++rep) {
      const int b = rng.uniform_int(1, 4);
      const int m = rng.uniform_int(1, 3);
      const int d = rng.uniform_int(3, 8);
      const double tau = 0.1 + rng.uniform() * 0.9;
      const double eps = rng.uniform();
      std::vector<std::vector<double>> chi, beta;
      std::vector<std::vector<std::vector<double>>> gamma;
      auto draw = [&] {
        std::vector<double> v(static_cast<std::size_t>(d));
        for (auto& x : v) x = rng.gauss(0, 1);
        return v;
      };
      for (int i = 0; i < b; ++i) {
        chi.push_back(draw());
        beta.push_back(draw());
        gamma.emplace_back();
        for (int k = 0; k < m; ++k) gamma.back().push_back(draw());
      }
      std::vector<std::vector<double>> gamma_flat;
      for (const auto& g : gamma)
        for (const auto& r : g) gamma_flat.push_back(r);

      grad::Tape tape;
      const double info =
          objective::info_nce(tape, latents_to_var(chi), latents_to_var(beta), tau)->value[0];
      const double mil =
          objective::mil_nce(tape, latents_to_var(chi), latents_to_var(gamma_flat), m, tau)
              ->value[0];
      const double comb = objective::combined_loss(tape, latents_to_var(chi),
                                                   latents_to_var(beta),
                                                   latents_to_var(gamma_flat), m, tau, eps)
                              ->value[0];
      tape.clear();
      worst = std::max(worst, std::abs(info - info_nce_oracle(chi, beta, tau)));
      worst = std::max(worst, std::abs(mil - mil_nce_oracle(chi, gamma, tau)));
      worst = std::max(worst, std::abs(comb - (eps * info_nce_oracle(chi, beta, tau) +
                                               (1 - eps) * mil_nce_oracle(chi, gamma, tau))));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max abs diff %.3g over 100 instances", worst);
    return {worst < 1e-9, buf};
  });

  // C3 ----------------------------------------------------------------
  criterion(3, "loss identities", []() -> std::pair<bool, std::string> {
    Rng rng(1717);
    grad::Tape tape;
    bool ok = true;
    std::string detail;

    // B = 1: numerator equals denominator
    {
      auto one = grad::make_tensor({1, 5}, {0.3, -1.2, 0.7, 2.0, -0.4});
      const double v = objective::info_nce(tape, one, one, 0.3)->value[0];
      ok = ok && std::abs(v) < 1e-12;
      if (std::abs(v) >= 1e-12) detail += "B=1 loss nonzero; ";
    }
    // identical latents: uniform softmax, loss = ln B
    for (int b : {2, 5, 8}) {
      std::vector<double> row{1.0, 2.0, -0.5};
      std::vector<double> flat;
      for (int i = 0; i < b; ++i) flat.insert(flat.end(), row.begin(), row.end());
      auto latents = grad::make_tensor({b, 3}, flat);
      const double v = objective::info_nce(tape, latents, latents, 0.3)->value[0];
      if (std::abs(v - std::log(b)) > 1e-9) {
        ok = false;
        detail += "uniform softmax != ln B; ";
      }
    }
    // M = 1 collapses to the single-positive loss
    for (int rep = 0; rep < 20; ++rep) {
      const int b = rng.uniform_int(2, 4), d = 6;
      std::vector<double> cf(static_cast<std::size_t>(b * d)), gf(static_cast<std::size_t>(b * d));
      for (auto& x : cf) x = rng.gauss(0, 1);
      for (auto& x : gf) x = rng.gauss(0, 1);
      auto chi = grad::make_tensor({b, d}, cf);
      auto gam = grad::make_tensor({b, d}, gf);
      const double mil = objective::mil_nce(tape, chi, gam, 1, 0.4)->value[0];
      const double info = objective::info_nce(tape, chi, gam, 0.4)->value[0];
      if (std::abs(mil - info) > 1e-12) {
        ok = false;
        detail += "M=1 mismatch; ";
      }
    }
    // duplicated positives: the group factor cancels
    {
      const int b = 3, d = 5;
      std::vector<double> cf(b * d), gf(b * d);
      for (auto& x : cf) x = rng.gauss(0, 1);
      for (auto& x : gf) x = rng.gauss(0, 1);
      std::vector<double> gdup;
      for (int i = 0; i < b; ++i) {
        for (int copy = 0; copy < 2; ++copy)
          gdup.insert(gdup.end(), gf.begin() + i * d, gf.begin() + (i + 1) * d);
      }
      grad::Tape t2;
      const double m1 = objective::mil_nce(t2, grad::make_tensor({b, d}, cf),
                                           grad::make_tensor({b, d}, gf), 1, 0.3)
                            ->value[0];
      const double m2 = objective::mil_nce(t2, grad::make_tensor({b, d}, cf),
                                           grad::make_tensor({b * 2, d}, gdup), 2, 0.3)
                            ->value[0];
      t2.clear();
      if (std::abs(m1 - m2) > 1e-9) {
        ok = false;
        detail += "duplicate-group shift; ";
      }
    }
    // epsilon endpoints reduce exactly
    {
      const int b = 3, m = 2, d = 4;
      std::vector<double> cf(b * d), bf(b * d), gf(b * m * d);
      for (auto& x : cf) x = rng.gauss(0, 1);
      for (auto& x : bf) x = rng.gauss(0, 1);
      for (auto& x : gf) x = rng.gauss(0, 1);
      grad::Tape t2;
      auto chi = grad::make_tensor({b, d}, cf);
      auto beta = grad::make_tensor({b, d}, bf);
      auto gam = grad::make_tensor({b * m, d}, gf);
      const double info = objective::info_nce(t2, chi, beta, 0.3)->value[0];
      const double mil = objective::mil_nce(t2, chi, gam, m, 0.3)->value[0];
      const double c1 = objective::combined_loss(t2, chi, beta, gam, m, 0.3, 1.0)->value[0];
      const double c0 = objective::combined_loss(t2, chi, beta, gam, m, 0.3, 0.0)->value[0];
      t2.clear();
      if (c1 != info || c0 != mil) {
        ok = false;
        detail += "epsilon endpoints differ; ";
      }
    }
    tape.clear();
    return {ok, ok ? "B=1, ln B, M=1, duplication, endpoints" : detail};
  });

  // C4 ----------------------------------------------------------------
  criterion(4, "metric oracles", []() -> std::pair<bool, std::string> {
    Rng rng(99);
    bool ok = true;
    std::string detail;

    // recall@k and median rank vs brute-force rank scan
    for (int rep = 0; rep < 50 && ok; ++rep) {
      const int n = rng.uniform_int(3, 30);
      std::vector<zeroshot::RankedResult> results_list;
      std::map<std::string, std::string> gt;
      std::vector<long> ranks;
      for (int q = 0; q < 6; ++q) {
        zeroshot::RankedResult r;
        r.query_id = "q" + std::to_string(q);
        std::vector<double> scores(static_cast<std::size_t>(n));
        for (auto& s : scores) s = rng.uniform();
        for (int g = 0; g < n; ++g) r.ranking.emplace_back("g" + std::to_string(g), scores[static_cast<std::size_t>(g)]);
        std::sort(r.ranking.begin(), r.ranking.end(), [](const auto& a, const auto& b) {
          if (a.second != b.second) return a.second > b.second;
          return a.first < b.first;
        });
        const int target = rng.uniform_int(0, n - 1);
        gt[r.query_id] = "g" + std::to_string(target);
        for (std::size_t i = 0; i < r.ranking.size(); ++i) {
          if (r.ranking[i].first == gt[r.query_id]) ranks.push_back(static_cast<long>(i) + 1);
        }
        results_list.push_back(std::move(r));
      }
      for (int k : {1, 3, 10}) {
        long hits = 0;
        for (long rk : ranks) hits += rk <= k;
        const double want = static_cast<double>(hits) / static_cast<double>(ranks.size());
        if (zeroshot::recall_at_k(results_list, gt, k) != want) {
          ok = false;
          detail = "recall mismatch";
        }
      }
      auto sorted = ranks;
      std::sort(sorted.begin(), sorted.end());
      if (zeroshot::median_rank(results_list, gt) != sorted[(sorted.size() - 1) / 2]) {
        ok = false;
        detail = "median mismatch";
      }
    }

    // AP vs brute-force precision sum on random 200-item lists
    for (int rep = 0; rep < 30 && ok; ++rep) {
      std::vector<double> scores(200);
      std::vector<int> labels(200);
      for (auto& s : scores) s = rng.uniform();
      int positives = 0;
      for (auto& l : labels) {
        l = rng.uniform() < 0.3 ? 1 : 0;
        positives += l;
      }
      if (positives == 0) labels[0] = 1;
      std::vector<std::size_t> order(scores.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
      double want = 0;
      long seen = 0, total = 0;
      for (auto& l : labels) total += l;
      for (std::size_t k = 0; k < order.size(); ++k) {
        if (labels[order[k]] == 1) {
          ++seen;
          want += static_cast<double>(seen) / static_cast<double>(k + 1);
        }
      }
      want /= static_cast<double>(total);
      if (std::abs(zeroshot::average_precision(scores, labels) - want) > 1e-12) {
        ok = false;
        detail = "AP mismatch";
      }
    }

    // F1 vs confusion-matrix replay
    for (int rep = 0; rep < 30 && ok; ++rep) {
      const int n_classes = rng.uniform_int(2, 6);
      std::vector<int> pred(80), gold(80);
      for (auto& p : pred) p = rng.uniform_int(0, n_classes - 1);
      for (auto& g : gold) g = rng.uniform_int(0, n_classes - 1);
      const auto got = zeroshot::f1_per_class(pred, gold, n_classes);
      for (int c = 0; c < n_classes; ++c) {
        long tp = 0, fp = 0, fn = 0;
        for (int i = 0; i < 80; ++i) {
          tp += pred[static_cast<std::size_t>(i)] == c && gold[static_cast<std::size_t>(i)] == c;
          fp += pred[static_cast<std::size_t>(i)] == c && gold[static_cast<std::size_t>(i)] != c;
          fn += pred[static_cast<std::size_t>(i)] != c && gold[static_cast<std::size_t>(i)] == c;
        }
        double want = 0;
        if (tp + fp > 0 && tp + fn > 0) {
          const double p = static_cast<double>(tp) / (tp + fp);
          const double r = static_cast<double>(tp) / (tp + fn);
          want = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
        }
        if (std::abs(got.per_class[static_cast<std::size_t>(c)] - want) > 1e-12) {
          ok = false;
          detail = "F1 mismatch";
        }
      }
    }

    // caption metric hand fixtures
    if (ok) {
      const double b1 = caption::bleu_n("the the the", {"the cat"}, 1);
      if (std::abs(b1 - 1.0 / 3.0) > 1e-12) {
        ok = false;
        detail = "bleu clipped-precision fixture";
      }
      if (caption::bleu_n("a b c d e", {"a b c d e"}, 4) != 1.0) {
        ok = false;
        detail = "bleu identity";
      }
      if (caption::bleu_n("x y z", {"a b c"}, 2) != 0.0) {
        ok = false;
        detail = "bleu disjoint";
      }
      // rouge: lcs 3 of "a b c d" vs "a c d"
      const double p = 3.0 / 4.0, r = 3.0 / 3.0, beta2 = 1.2 * 1.2;
      const double want_rouge = (1 + beta2) * p * r / (r + beta2 * p);
      if (std::abs(caption::rouge_l("a b c d", "a c d") - want_rouge) > 1e-12) {
        ok = false;
        detail = "rouge lcs fixture";
      }
      // meteor: 3 stemmed matches, one chunk
      const double fmean = 10.0 * 1.0 * 1.0 / (1.0 + 9.0 * 1.0);
      const double want_meteor = fmean * (1.0 - 0.5 * std::pow(1.0 / 3.0, 3));
      if (std::abs(caption::meteor_basic("clipping the duct", "clip the ducts") - want_meteor) >
          1e-12) {
        ok = false;
        detail = "meteor stemming fixture";
      }
      if (caption::meteor_basic("x y", "a b") != 0.0) {
        ok = false;
        detail = "meteor zero-match";
      }
    }
    return {ok, ok ? "recall/median/AP/F1/BLEU/ROUGE/METEOR all match" : detail};
  });

  // C5-C9: shared training grid over five seeds ------------------------
  GridResult grid;
  {
    const auto t0 = std::chrono::steady_clock::now();
    grid = run_grid(base_cfg);
    std::printf("       grid: 35 trainings in %.1fs (text-view block %.1fs)\n",
                now_elapsed(t0), grid.views_seconds);
  }

  criterion(5, "text-view ordering", [&]() -> std::pair<bool, std::string> {
    const double both = mean_of(grid.both), a = mean_of(grid.a_only), w = mean_of(grid.w_only);
    char buf[256];
    std::snprintf(buf, sizeof buf, "R@10 both %.3f > a %.3f, w %.3f | both %s a %s w %s",
                  both, a, w, fmt_vec(grid.both).c_str(), fmt_vec(grid.a_only).c_str(),
                  fmt_vec(grid.w_only).c_str());
    const bool timing_ok = grid.views_seconds < 300.0;
    return {both > a && both > w && timing_ok, buf};
  });

  criterion(6, "clip-length ordering", [&]() -> std::pair<bool, std::string> {
    const double rnd = mean_of(grid.both);
    const double f2 = mean_of(grid.fix2), f4 = mean_of(grid.fix4), f10 = mean_of(grid.fix10);
    char buf[160];
    std::snprintf(buf, sizeof buf, "R@10 random %.3f >= fixed2 %.3f, fixed4 %.3f, fixed10 %.3f",
                  rnd, f2, f4, f10);
    return {rnd >= f2 && rnd >= f4 && rnd >= f10, buf};
  });

  criterion(7, "frame-count ordering", [&]() -> std::pair<bool, std::string> {
    const double t4 = mean_of(grid.both), t1 = mean_of(grid.t1);
    char buf[96];
    std::snprintf(buf, sizeof buf, "R@10 T=4 %.3f >= T=1 %.3f", t4, t1);
    return {t4 >= t1, buf};
  });

  criterion(8, "zero-shot AP margin", [&]() -> std::pair<bool, std::string> {
    const double trained = mean_of(grid.ap_trained), baseline = mean_of(grid.ap_random);
    char buf[128];
    std::snprintf(buf, sizeof buf, "mean AP trained %.3f vs random %.3f (margin %.3f >= 0.10)",
                  trained, baseline, trained - baseline);
    return {trained - baseline >= 0.10, buf};
  });

  criterion(9, "captioning BLEU-1 margin", [&]() -> std::pair<bool, std::string> {
    const double trained = mean_of(grid.bleu_trained), baseline = mean_of(grid.bleu_random);
    char buf[128];
    std::snprintf(buf, sizeof buf, "BLEU-1 trained %.3f vs random %.3f (ratio %.2f >= 2)",
                  trained, baseline, baseline > 0 ? trained / baseline : 1e9);
    return {trained >= 2.0 * baseline, buf};
  });

  // C10 ----------------------------------------------------------------
  criterion(10, "pairing invariants", [&]() -> std::pair<bool, std::string> {
    Rng rng(31337);
    bool ok = true;
    std::string detail;

    // 1e4 fuzzed pairs satisfy every type invariant
    pairing::ClipLengthConfig len;
    long built = 0;
    while (built < 10000 && ok) {
      const double duration = rng.uniform(30.0, 120.0);
      corpus::TranscriptSentence a;
      a.video_id = "fuzz";
      a.source = 'A';
      a.start_s = rng.uniform(0.0, duration - 3.0);
      a.end_s = a.start_s + rng.uniform(0.3, 3.0);
      std::vector<corpus::TranscriptSentence> pool;
      const int n_w = rng.uniform_int(1, 5);
      for (int k = 0; k < n_w; ++k) {
        corpus::TranscriptSentence w;
        w.video_id = "fuzz";
        w.source = 'W';
        // built to intersect the A interval
        w.start_s = std::max(0.0, a.start_s - rng.uniform(0.0, 4.0));
        w.end_s = std::min(duration, a.end_s + rng.uniform(0.1, 4.0));
        pool.push_back(w);
      }
      std::sort(pool.begin(), pool.end(),
                [](const auto& x, const auto& y) { return x.start_s < y.start_s; });
      const auto overlaps = pairing::find_overlaps(a, pool);
      if (overlaps.empty()) continue;
      const auto pair = pairing::sample_clip(a, overlaps, rng, len, duration);
      try {
        pair.validate(duration, len.max_s);
      } catch (const std::exception& e) {
        ok = false;
        detail = std::string("fuzz invariant: ") + e.what();
      }
      ++built;
    }

    // overlap results equal the O(n^2) oracle
    for (int rep = 0; rep < 20 && ok; ++rep) {
      std::vector<corpus::TranscriptSentence> pool;
      for (int k = 0; k < 500; ++k) {
        corpus::TranscriptSentence w;
        w.video_id = "fuzz";
        w.source = 'W';
        w.start_s = rng.uniform(0.0, 100.0);
        w.end_s = w.start_s + rng.uniform(0.1, 8.0);
        pool.push_back(w);
      }
      std::sort(pool.begin(), pool.end(),
                [](const auto& x, const auto& y) { return x.start_s < y.start_s; });
      corpus::TranscriptSentence a;
      a.video_id = "fuzz";
      a.source = 'A';
      a.start_s = rng.uniform(0.0, 95.0);
      a.end_s = a.start_s + rng.uniform(0.2, 6.0);
      const auto got = pairing::find_overlaps(a, pool);
      std::vector<corpus::TranscriptSentence> want;
      for (const auto& w : pool) {
        if (std::min(w.end_s, a.end_s) - std::max(w.start_s, a.start_s) > 0.0) want.push_back(w);
      }
      if (got.size() != want.size()) {
        ok = false;
        detail = "overlap oracle size mismatch";
        break;
      }
      for (std::size_t i = 0; i < got.size(); ++i) {
        if (got[i].start_s != want[i].start_s || got[i].end_s != want[i].end_s) {
          ok = false;
          detail = "overlap oracle order mismatch";
        }
      }
    }

    // center timestamps are uniform over the merged boundary (KS < 0.02)
    double ks = 0;
    if (ok) {
      corpus::TranscriptSentence a;
      a.video_id = "fuzz";
      a.source = 'A';
      a.start_s = 20.0;
      a.end_s = 24.0;
      corpus::TranscriptSentence w1 = a, w2 = a;
      w1.source = w2.source = 'W';
      w1.start_s = 17.0;
      w1.end_s = 21.5;
      w2.start_s = 21.0;
      w2.end_s = 27.0;
      const std::vector<corpus::TranscriptSentence> pool{w1, w2};
      const double lo = 17.0, hi = 27.0;
      std::vector<double> centers;
      centers.reserve(100000);
      for (int i = 0; i < 100000; ++i) {
        centers.push_back(pairing::sample_clip(a, pool, rng, len, 60.0).center_s);
      }
      std::sort(centers.begin(), centers.end());
      for (std::size_t i = 0; i < centers.size(); ++i) {
        const double f_emp_hi = static_cast<double>(i + 1) / static_cast<double>(centers.size());
        const double f_emp_lo = static_cast<double>(i) / static_cast<double>(centers.size());
        const double f_uni = (centers[i] - lo) / (hi - lo);
        ks = std::max({ks, std::abs(f_emp_hi - f_uni), std::abs(f_emp_lo - f_uni)});
      }
      if (ks >= 0.02) {
        ok = false;
        detail = "KS " + std::to_string(ks);
      }
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "1e4 pairs valid, overlap oracle exact, KS %.4f < 0.02", ks);
    return {ok, ok ? buf : detail};
  });

  // C11 ----------------------------------------------------------------
  criterion(11, "pipeline determinism", [&]() -> std::pair<bool, std::string> {
    if (cli_path.empty()) return {false, "no --cli path given"};
    const fs::path work = fs::absolute(workdir);
    fs::remove_all(work);
    fs::create_directories(work);
    auto run_pipeline = [&](const fs::path& out) -> bool {
      const std::string base = "\"" + cli_path + "\"";
      const std::string common =
          " --config \"" + config_path + "\" --out \"" + out.string() + "\"";
      const char* steps[] = {"gen-data",      "build-pairs",   "train",
                             "eval-retrieval", "eval-grounding", "eval-zeroshot",
                             "train-captioner", "eval-caption"};
      for (const char* step : steps) {
        const std::string cmd = base + " " + step + common + " > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) return false;
      }
      return true;
    };
    if (!run_pipeline(work / "run1")) return {false, "first pipeline run failed"};
    if (!run_pipeline(work / "run2")) return {false, "second pipeline run failed"};
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::ostringstream os;
      os << in.rdbuf();
      return os.str();
    };
    const char* outputs[] = {"retrieval/metrics.csv", "grounding/metrics.csv",
                             "zeroshot/metrics.csv",  "zeroshot/per_class.csv",
                             "caption/caption_metrics.csv", "train_report.csv"};
    for (const char* rel : outputs) {
      const auto a = slurp(work / "run1" / rel);
      const auto b = slurp(work / "run2" / rel);
      if (a.empty() || a != b) {
        return {false, std::string("mismatch or empty: ") + rel};
      }
    }
    return {true, "two full pipeline runs byte-identical across 6 metric files"};
  });

  // C12 ----------------------------------------------------------------
  const double total_secs = now_elapsed(total0);
  {
    Outcome out{12, "total runtime budget", total_secs < 600.0, "", 0};
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.1fs < 600s", total_secs);
    out.detail = buf;
    out.seconds = total_secs;
    results.push_back(out);
    std::printf("[%s] C%-2d %-28s %6.1fs  %s\n", out.pass ? "PASS" : "FAIL", out.id,
                "total runtime budget", out.seconds, out.detail.c_str());
  }

  int failed = 0;
  for (const auto& r : results) failed += !r.pass;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed,
              results.size());
  return failed == 0 ? 0 : 1;
}
