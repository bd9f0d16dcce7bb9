// dualview: dual-text-view clip-text contrastive pretraining at desk scale.
// gen-data -> build-pairs -> train -> eval-* / train-captioner / ablate

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "dualview/config.hpp"
#include "dualview/errors.hpp"
#include "dualview/pipeline.hpp"

namespace {

struct CommonFlags {
  std::string config_file;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool has_seed = false;
  bool force = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_file, "run config JSON")->required();
  cmd->add_option("--out", flags.out_override, "output directory (overrides config)");
  cmd->add_option("--seed", flags.seed_override, "master seed (overrides config)")
      ->each([&](const std::string&) { flags.has_seed = true; });
  cmd->add_flag("--force", flags.force, "overwrite existing outputs");
}

dualview::RunConfig load(const CommonFlags& flags) {
  auto cfg = dualview::RunConfig::from_file(flags.config_file);
  if (!flags.out_override.empty()) {
    const auto old_out = cfg.out_dir;
    cfg.out_dir = flags.out_override;
    // keep the corpus inside the new output tree when it was relative
    auto rel = std::filesystem::relative(cfg.corpus_dir, old_out);
    if (!rel.empty() && rel.native()[0] != '.') cfg.corpus_dir = cfg.out_dir / rel;
  }
  if (flags.has_seed) {
    cfg.seed = flags.seed_override;
    cfg.world.seed = cfg.seed;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-text-view clip-text contrastive pretraining"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string ckpt_override, prompts_override;

  auto* gen = app.add_subcommand("gen-data", "generate the synthetic corpus");
  add_common(gen, flags);
  auto* pairs = app.add_subcommand("build-pairs", "build clip-text pairs from transcripts");
  add_common(pairs, flags);
  auto* train = app.add_subcommand("train", "contrastive pretraining");
  add_common(train, flags);
  auto* retrieval = app.add_subcommand("eval-retrieval", "text-based clip retrieval");
  add_common(retrieval, flags);
  retrieval->add_option("--ckpt", ckpt_override, "checkpoint directory");
  auto* grounding = app.add_subcommand("eval-grounding", "temporal grounding + activation maps");
  add_common(grounding, flags);
  grounding->add_option("--ckpt", ckpt_override, "checkpoint directory");
  auto* zeroshot = app.add_subcommand("eval-zeroshot", "prompt-based classification");
  add_common(zeroshot, flags);
  zeroshot->add_option("--ckpt", ckpt_override, "checkpoint directory");
  zeroshot->add_option("--prompts", prompts_override, "prompt class set JSON");
  auto* traincap = app.add_subcommand("train-captioner", "text-only caption decoder training");
  add_common(traincap, flags);
  traincap->add_option("--ckpt", ckpt_override, "checkpoint directory");
  auto* evalcap = app.add_subcommand("eval-caption", "caption generation + metrics");
  add_common(evalcap, flags);
  evalcap->add_option("--ckpt", ckpt_override, "checkpoint directory");
  auto* ablate = app.add_subcommand("ablate", "text views x clip length x frame count grid");
  add_common(ablate, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = load(flags);
    const auto ckpt = ckpt_override.empty() ? cfg.out_dir / "ckpt"
                                            : std::filesystem::path(ckpt_override);
    const auto prompts = prompts_override.empty() ? cfg.corpus_dir / "prompts_tool.json"
                                                  : std::filesystem::path(prompts_override);
    using namespace dualview::pipeline;
    if (gen->parsed()) {
      cmd_gen_data(cfg, flags.force);
      std::printf("corpus written to %s\n", cfg.corpus_dir.string().c_str());
    } else if (pairs->parsed()) {
      const auto stats = cmd_build_pairs(cfg, flags.force);
      std::printf("pairs=%ld (A kept %ld/%ld, W kept %ld/%ld, skipped %ld)\n", stats.pairs,
                  stats.a_kept, stats.a_segments, stats.w_kept, stats.w_segments,
                  stats.a_no_overlap);
    } else if (train->parsed()) {
      cmd_train(cfg, flags.force);
      std::printf("checkpoint written to %s\n", (cfg.out_dir / "ckpt").string().c_str());
    } else if (retrieval->parsed()) {
      cmd_eval_retrieval(cfg, ckpt, flags.force);
      std::printf("retrieval metrics written to %s\n",
                  (cfg.out_dir / "retrieval" / "metrics.csv").string().c_str());
    } else if (grounding->parsed()) {
      cmd_eval_grounding(cfg, ckpt, flags.force);
      std::printf("grounding metrics written to %s\n",
                  (cfg.out_dir / "grounding" / "metrics.csv").string().c_str());
    } else if (zeroshot->parsed()) {
      cmd_eval_zeroshot(cfg, ckpt, prompts, flags.force);
      std::printf("zero-shot metrics written to %s\n",
                  (cfg.out_dir / "zeroshot" / "metrics.csv").string().c_str());
    } else if (traincap->parsed()) {
      cmd_train_captioner(cfg, ckpt, flags.force);
      std::printf("decoder written to %s\n", ckpt.string().c_str());
    } else if (evalcap->parsed()) {
      cmd_eval_caption(cfg, ckpt, flags.force);
      std::printf("caption metrics written to %s\n",
                  (cfg.out_dir / "caption" / "caption_metrics.csv").string().c_str());
    } else if (ablate->parsed()) {
      cmd_ablate(cfg, flags.force);
      std::printf("ablation grid written to %s\n",
                  (cfg.out_dir / "ablation.csv").string().c_str());
    }
  } catch (const dualview::TrainingDivergedError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
