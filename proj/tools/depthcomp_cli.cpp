// Copyright 2026 The depthcomp Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// depthcomp command line.
//
//   depthcomp generate  --out DIR [--config F] [--seed N] [--density D]
//   depthcomp train-cpn --config F [--seed N] [--out DIR]
//   depthcomp train-dcn --config F --mode M [--cpn CKPT] [--seed N] [--out DIR]
//   depthcomp eval      --checkpoint CKPT --manifest F [--density D] [--csv F]
//   depthcomp ablate    --config F [--alphas a,b,...] [--out DIR]
//   depthcomp predict   --checkpoint CKPT --image F --sparse F --out DIR
//                       [--gt F] [--cpn CKPT]

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "depthcomp/config.hpp"
#include "depthcomp/harness.hpp"
#include "depthcomp/image_io.hpp"

namespace fs = std::filesystem;
using namespace depthcomp;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "INI run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "run seed");
  cmd->add_option("--out", c.out, "output directory");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_run_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.out_dir = c.out;
  return cfg;
}

void print_train(const TrainResult& r, const char* metric) {
  std::printf("steps %lld\n%s %.6f\nbest_checkpoint %s\nlast_checkpoint %s\n",
              static_cast<long long>(r.last_step), metric, r.best_val,
              r.best_checkpoint.string().c_str(), r.last_checkpoint.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-to-dense depth completion with a learned conditional prior"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "print validation progress to stderr");

  Common gen_c, cpn_c, dcn_c, abl_c;
  double gen_density = 0.05;

  auto* gen = app.add_subcommand("generate", "write a synthetic dataset as PNGs plus manifest");
  add_common(gen, gen_c);
  gen->add_option("--density", gen_density, "density of the sparse_<i>.png inputs");

  auto* tcpn = app.add_subcommand("train-cpn", "train the conditional prior network");
  add_common(tcpn, cpn_c);

  std::string mode;
  std::string cpn_ckpt;
  auto* tdcn = app.add_subcommand("train-dcn", "train the depth completion network");
  add_common(tdcn, dcn_c);
  tdcn->add_option("--mode", mode, "supervised | unsupervised | stereo")
      ->check(CLI::IsMember({"supervised", "unsupervised", "stereo"}));
  tdcn->add_option("--cpn", cpn_ckpt, "frozen CPN checkpoint");

  EvalOptions eval_opt;
  std::string eval_ckpt, eval_manifest, eval_csv;
  bool pooled = false;
  auto* ev = app.add_subcommand("eval", "evaluate a DCN checkpoint on a manifest");
  ev->add_option("--checkpoint", eval_ckpt, "DCN checkpoint")->required();
  ev->add_option("--manifest", eval_manifest, "dataset manifest")->required();
  ev->add_option("--density", eval_opt.density, "sparse input density");
  ev->add_option("--seed", eval_opt.seed, "sparse sampling seed");
  ev->add_option("--csv", eval_csv, "write the CSV here instead of stdout");
  ev->add_flag("--pooled", pooled, "aggregate over pooled pixels instead of per image");

  std::vector<double> alphas{0.0, 0.01, 0.045, 0.1, 0.5};
  int cpn_steps = 300;
  auto* abl = app.add_subcommand("ablate", "norm / prior-weight grid of short unsupervised runs");
  add_common(abl, abl_c);
  abl->add_option("--alphas", alphas, "prior weights")->delimiter(',');
  abl->add_option("--cpn-steps", cpn_steps, "CPN training steps per eta");

  PredictOptions pred;
  std::string p_ckpt, p_image, p_sparse, p_gt, p_cpn, p_out;
  auto* pr = app.add_subcommand("predict", "complete one sparse depth map");
  pr->add_option("--checkpoint", p_ckpt, "DCN checkpoint")->required();
  pr->add_option("--image", p_image, "8-bit RGB PNG")->required();
  pr->add_option("--sparse", p_sparse, "16-bit sparse depth PNG")->required();
  pr->add_option("--gt", p_gt, "16-bit ground-truth depth PNG");
  pr->add_option("--cpn", p_cpn, "CPN checkpoint for the posterior score");
  pr->add_option("--out", p_out, "output directory")->required();
  pr->add_option("--alpha", pred.alpha, "prior weight in the posterior score");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  std::ostream* progress = verbose ? &std::cerr : nullptr;

  try {
    if (*gen) {
      RunConfig cfg = resolve(gen_c);
      cfg.data.scene.validate();
      std::vector<Scene> scenes;
      for (int i = 0; i < cfg.data.scenes; ++i) {
        scenes.push_back(generate_scene(scene_seed(cfg.data.seed, i), cfg.data.scene));
      }
      const fs::path manifest = write_dataset(cfg.out_dir, scenes);
      for (std::size_t i = 0; i < scenes.size(); ++i) {
        const SparseSample sp = sample_sparse(scenes[i], gen_density, scene_seed(cfg.seed, i));
        write_depth_png(cfg.out_dir / ("sparse_" + std::to_string(i) + ".png"), sp.z_map,
                        sp.validity);
      }
      std::printf("manifest %s\n", manifest.string().c_str());
    } else if (*tcpn) {
      RunConfig cfg = resolve(cpn_c);
      cfg.mode = Mode::cpn;
      print_train(cmd_train_cpn(cfg, progress), "best_val_penalty");
    } else if (*tdcn) {
      RunConfig cfg = resolve(dcn_c);
      if (!mode.empty()) cfg.mode = parse_mode(mode);
      if (!cpn_ckpt.empty()) cfg.cpn_checkpoint = cpn_ckpt;
      print_train(cmd_train_dcn(cfg, progress), "best_val_rmse_mm");
    } else if (*ev) {
      eval_opt.checkpoint = eval_ckpt;
      eval_opt.manifest = eval_manifest;
      eval_opt.out_csv = eval_csv;
      eval_opt.aggregation = pooled ? Aggregation::per_pixel : Aggregation::per_image;
      const EvalReport rep = cmd_eval(eval_opt);
      if (eval_csv.empty()) std::fputs(rep.csv.c_str(), stdout);
    } else if (*abl) {
      RunConfig cfg = resolve(abl_c);
      AblationOptions opt;
      opt.grid = {{1, 1}, {1, 2}, {2, 1}, {2, 2}};
      opt.alphas = alphas;
      opt.cpn_steps = cpn_steps;
      std::fputs(ablation_csv(cmd_ablate(cfg, opt, progress)).c_str(), stdout);
    } else if (*pr) {
      pred.checkpoint = p_ckpt;
      pred.image = p_image;
      pred.sparse_depth = p_sparse;
      pred.gt_depth = p_gt;
      pred.cpn_checkpoint = p_cpn;
      pred.out_dir = p_out;
      const PredictResult r = cmd_predict(pred);
      std::printf("depth %s\n", r.depth_png.string().c_str());
      if (!r.error_png.empty()) std::printf("error_map %s\n", r.error_png.string().c_str());
      if (r.posterior) std::printf("posterior_score %.17g\n", *r.posterior);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
