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

#include "depthcomp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "depthcomp/checkpoint.hpp"
#include "depthcomp/image_io.hpp"
#include "depthcomp/losses.hpp"
#include "depthcomp/optim.hpp"

namespace depthcomp {
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return scene_seed(a, b); }

Scene scene_from_sample(Sample s, std::uint64_t seed) {
  Scene sc;
  sc.image = std::move(s.image);
  sc.depth = std::move(s.depth);
  sc.validity = std::move(s.validity);
  sc.stereo_image = std::move(s.stereo_image);
  sc.rig = s.rig;
  sc.seed = seed;
  return sc;
}

void append_file(const fs::path& path, const std::string& header,
                 const std::string& rows, bool fresh) {
  const bool exists = fs::exists(path);
  std::ofstream f(path, fresh ? std::ios::trunc : std::ios::app);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  if (fresh || !exists) f << header;
  f << rows;
}

// Optimizer moments travel with the checkpoint so a resumed run continues
// the same trajectory.
void store_adam(Checkpoint& ck, const std::vector<Parameter*>& params,
                const AdamState& st) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    ck.tensors.emplace_back("adam.m." + params[i]->name, st.m[i]);
    ck.tensors.emplace_back("adam.v." + params[i]->name, st.v[i]);
  }
  ck.config["adam_t"] = std::to_string(st.t);
}

void restore_adam(const Checkpoint& ck, const std::vector<Parameter*>& params,
                  AdamState& st) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor* m = ck.find("adam.m." + params[i]->name);
    const Tensor* v = ck.find("adam.v." + params[i]->name);
    if (!m || !v) return;  // parameters only; restart the moments
    st.m[i] = *m;
    st.v[i] = *v;
  }
  if (auto it = ck.config.find("adam_t"); it != ck.config.end()) {
    st.t = std::stoll(it->second);
  }
}

struct BatchItem {
  Augmented data;
};

// Deterministic per-(step, slot) choice of scene, sparse sample and
// augmentation, so resumed runs see the same batches.
BatchItem draw_item(const RunConfig& cfg, const std::vector<Scene>& train,
                    std::int64_t step, int slot) {
  const std::uint64_t key =
      mix(cfg.seed, static_cast<std::uint64_t>(step) * 1024u + slot);
  const Scene& sc = train[key % train.size()];
  SparseSample sp = sample_sparse(sc.depth, cfg.data.density, mix(key, 1), sc.validity);
  return {augment(sc, sp, cfg.data.augment, mix(key, 2))};
}

void write_config(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  if (cfg.resume.empty()) {
    // A fresh run must not inherit a previous run's best checkpoint.
    fs::remove(cfg.out_dir / "best.ckpt");
    fs::remove(cfg.out_dir / "best.bin");
  }
  write_file_atomic(cfg.out_dir / "config.ini", to_ini(cfg));
}

}  // namespace

// ---------------------------------------------------------------------------

Dataset build_dataset(const DataConfig& cfg) {
  Dataset d;
  std::vector<Scene> all;
  if (!cfg.manifest.empty()) {
    auto samples = load_manifest(cfg.manifest);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      all.push_back(scene_from_sample(std::move(samples[i]), i));
    }
  } else {
    for (int i = 0; i < cfg.scenes; ++i) {
      all.push_back(generate_scene(scene_seed(cfg.seed, i), cfg.scene));
    }
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    (i % 10 == 9 ? d.val : d.train).push_back(std::move(all[i]));
  }
  if (d.train.empty() || d.val.empty()) {
    throw std::invalid_argument("dataset of " + std::to_string(all.size()) +
                                " samples is too small to split");
  }
  return d;
}

std::uint64_t validation_sample_seed(std::uint64_t data_seed, std::size_t index) {
  return mix(data_seed ^ 0x5a5a5a5a5a5a5a5aULL, index);
}

double validation_rmse(const DcnModel& m, const std::vector<Scene>& val,
                       double density, std::uint64_t data_seed) {
  std::vector<EvalResult> rows;
  for (std::size_t i = 0; i < val.size(); ++i) {
    const Scene& sc = val[i];
    const SparseSample sp = sample_sparse(
        sc.depth, density, validation_sample_seed(data_seed, i), sc.validity);
    Graph g;
    Var d = m.forward(g, g.constant_ref(sp.z_map), g.constant_ref(sc.image));
    rows.push_back(compute_metrics(d.value(), sc.depth, sc.validity));
  }
  return mean_of(rows).rmse_mm;
}

double validation_penalty(const CpnModel& m, const std::vector<Scene>& val) {
  if (val.empty()) throw std::invalid_argument("empty validation set");
  double acc = 0.0;
  for (const auto& sc : val) {
    Graph g;
    Var r = m.forward(g, g.constant_ref(sc.depth), g.constant_ref(sc.image));
    acc += power_penalty(sub(r, g.constant_ref(sc.depth)), m.eta(), &sc.validity)
               .value()
               .item();
  }
  return acc / static_cast<double>(val.size());
}

// ---------------------------------------------------------------------------
// CPN training

TrainResult cmd_train_cpn(const RunConfig& cfg, std::ostream* progress) {
  if (cfg.mode != Mode::cpn) {
    throw std::invalid_argument("train-cpn needs mode = cpn, got " +
                                std::string(to_string(cfg.mode)));
  }
  cfg.validate();
  return train_cpn(cfg, build_dataset(cfg.data), progress);
}

TrainResult train_cpn(const RunConfig& cfg, const Dataset& data,
                      std::ostream* progress) {
  if (cfg.mode != Mode::cpn) throw std::invalid_argument("train_cpn: mode must be cpn");
  cfg.validate();
  const Shape s0 = data.train.front().depth.shape();
  const int h = cfg.data.augment.crop_height > 0 ? cfg.data.augment.crop_height : s0.h;
  const int w = cfg.data.augment.crop_width > 0 ? cfg.data.augment.crop_width : s0.w;

  std::optional<CpnModel> model;
  std::int64_t start = 0;
  Checkpoint resumed;
  if (!cfg.resume.empty()) {
    resumed = load_checkpoint(cfg.resume);
    model.emplace(cpn_from_checkpoint(resumed));
    start = resumed.step;
  } else {
    model.emplace(cpn_preset(cfg.cpn_preset, h, w, cfg.norms.eta), cfg.seed);
  }
  CpnModel& m = *model;
  if (m.eta() != cfg.norms.eta) {
    throw std::invalid_argument("resumed CPN has eta " + std::to_string(m.eta()) +
                                ", config asks for " + std::to_string(cfg.norms.eta));
  }
  auto params = m.param_ptrs();
  AdamState adam = make_adam_state(params, cfg.optim.lr);
  if (!cfg.resume.empty()) restore_adam(resumed, params, adam);
  const LrSchedule sched{cfg.optim.lr, cfg.optim.half_every};

  write_config(cfg);
  TrainResult res;
  res.best_checkpoint = cfg.out_dir / "best.ckpt";
  res.last_checkpoint = cfg.out_dir / "last.ckpt";
  std::ostringstream log, evals;
  const bool fresh = cfg.resume.empty();

  auto validate_and_save = [&](std::int64_t step) {
    const double v = validation_penalty(m, data.val);
    res.final_val = v;
    evals << step << "," << fmt(v) << "\n";
    if (progress) *progress << "cpn step " << step << " val_penalty " << v << "\n";
    if (v < res.best_val) {
      res.best_val = v;
      save_checkpoint(res.best_checkpoint, make_checkpoint(m, step));
    }
  };

  if (start == 0 && cfg.optim.steps == 0) validate_and_save(0);
  for (std::int64_t step = start; step < cfg.optim.steps; ++step) {
    std::vector<BatchItem> items;
    items.reserve(cfg.optim.batch);
    for (int b = 0; b < cfg.optim.batch; ++b) {
      items.push_back(draw_item(cfg, data.train, step, b));
    }
    Graph g;
    Var total;
    for (const auto& it : items) {
      const Scene& sc = it.data.scene;
      Var d = g.constant_ref(sc.depth);
      Var r = m.forward(g, d, g.constant_ref(sc.image), true);
      Var l = power_penalty(sub(r, d), m.eta(), &sc.validity);
      total = total.valid() ? add(total, l) : l;
    }
    total = scale(total, 1.0 / cfg.optim.batch);
    g.backward(total);
    adam.lr = sched.at(step);
    adam_step(params, adam);
    const double loss = total.value().item();
    if (step == start) res.first_train_loss = loss;
    res.last_train_loss = loss;
    log << step << "," << fmt(adam.lr) << "," << fmt(loss) << "\n";
    if ((step + 1) % cfg.optim.eval_every == 0 || step + 1 == cfg.optim.steps) {
      validate_and_save(step + 1);
    }
  }
  res.last_step = std::max<std::int64_t>(start, cfg.optim.steps);
  Checkpoint last = make_checkpoint(m, res.last_step);
  store_adam(last, params, adam);
  save_checkpoint(res.last_checkpoint, last);
  if (!fs::exists(cfg.out_dir / "best.bin")) {
    save_checkpoint(res.best_checkpoint, make_checkpoint(m, res.last_step));
  }
  append_file(cfg.out_dir / "log.csv", "step,lr,total\n", log.str(), fresh);
  append_file(cfg.out_dir / "eval.csv", "step,val_penalty\n", evals.str(), fresh);
  return res;
}

// ---------------------------------------------------------------------------
// DCN training

TrainResult cmd_train_dcn(const RunConfig& cfg, std::ostream* progress) {
  if (cfg.mode == Mode::cpn) {
    throw std::invalid_argument("train-dcn needs mode supervised, unsupervised or stereo");
  }
  cfg.validate();
  if (cfg.mode != Mode::supervised && cfg.cpn_checkpoint.empty()) {
    throw std::invalid_argument(std::string(to_string(cfg.mode)) +
                                " mode needs a CPN checkpoint");
  }
  return train_dcn(cfg, build_dataset(cfg.data), progress);
}

TrainResult train_dcn(const RunConfig& cfg, const Dataset& data,
                      std::ostream* progress) {
  if (cfg.mode == Mode::cpn) throw std::invalid_argument("train_dcn: mode must not be cpn");
  cfg.validate();
  std::optional<CpnModel> cpn;
  if (cfg.mode != Mode::supervised) {
    if (cfg.cpn_checkpoint.empty()) {
      throw std::invalid_argument(std::string(to_string(cfg.mode)) +
                                  " mode needs a CPN checkpoint");
    }
    cpn.emplace(cpn_from_checkpoint(load_checkpoint(cfg.cpn_checkpoint)));
    if (cpn->eta() != cfg.norms.eta) {
      throw std::invalid_argument("CPN checkpoint has eta " +
                                  std::to_string(cpn->eta()) + ", config asks for " +
                                  std::to_string(cfg.norms.eta));
    }
  }
  if (cfg.mode == Mode::stereo) {
    for (const auto& sc : data.train) {
      if (!sc.has_stereo()) {
        throw std::invalid_argument("stereo mode needs stereo pairs in every training sample");
      }
    }
  }

  std::optional<DcnModel> model;
  std::int64_t start = 0;
  Checkpoint resumed;
  if (!cfg.resume.empty()) {
    resumed = load_checkpoint(cfg.resume);
    model.emplace(dcn_from_checkpoint(resumed));
    start = resumed.step;
  } else {
    model.emplace(dcn_preset(cfg.preset, cfg.unsupervised_variant), cfg.seed);
  }
  DcnModel& m = *model;
  auto params = m.param_ptrs();
  AdamState adam = make_adam_state(params, cfg.optim.lr);
  if (!cfg.resume.empty()) restore_adam(resumed, params, adam);
  const LrSchedule sched{cfg.optim.lr, cfg.optim.half_every};

  write_config(cfg);
  TrainResult res;
  res.best_checkpoint = cfg.out_dir / "best.ckpt";
  res.last_checkpoint = cfg.out_dir / "last.ckpt";
  std::ostringstream log, evals;
  const bool fresh = cfg.resume.empty();

  auto validate_and_save = [&](std::int64_t step) {
    const double v = validation_rmse(m, data.val, cfg.data.density, cfg.data.seed);
    res.final_val = v;
    evals << step << "," << fmt(v) << "\n";
    if (progress) *progress << to_string(cfg.mode) << " step " << step << " val_rmse_mm " << v << "\n";
    if (v < res.best_val) {
      res.best_val = v;
      save_checkpoint(res.best_checkpoint, make_checkpoint(m, step));
    }
  };

  if (start == 0 && cfg.optim.steps == 0) validate_and_save(0);
  const double inv_b = 1.0 / cfg.optim.batch;
  for (std::int64_t step = start; step < cfg.optim.steps; ++step) {
    std::vector<BatchItem> items;
    items.reserve(cfg.optim.batch);
    for (int b = 0; b < cfg.optim.batch; ++b) {
      items.push_back(draw_item(cfg, data.train, step, b));
    }
    Graph g;
    Var total;
    // Component sums over the batch, for logging.
    double fidelity = 0, prior = 0, psi_c = 0, psi_s = 0, supervised = 0;
    for (const auto& it : items) {
      const Scene& sc = it.data.scene;
      const SparseSample& sp = it.data.sample;
      Var image = g.constant_ref(sc.image);
      Var d = m.forward(g, g.constant_ref(sp.z_map), image, true);
      Var l;
      switch (cfg.mode) {
        case Mode::supervised:
          l = supervised_loss(d, sc.depth, sc.validity);
          supervised += l.value().item();
          break;
        case Mode::unsupervised: {
          auto t = unsupervised_loss(d, sp.z_map, sp.validity, image, *cpn,
                                     cfg.norms, cfg.weights);
          fidelity += t.fidelity.value().item();
          prior += t.prior.value().item();
          l = t.total;
          break;
        }
        case Mode::stereo: {
          auto t = stereo_loss(d, sp.z_map, sp.validity, image,
                               g.constant_ref(sc.stereo_image), *sc.rig, *cpn,
                               cfg.norms, cfg.weights, sc.warp_sign);
          fidelity += t.unsupervised.fidelity.value().item();
          prior += t.unsupervised.prior.value().item();
          psi_c += t.psi_c.value().item();
          psi_s += t.psi_s.value().item();
          l = t.total;
          break;
        }
        case Mode::cpn:
          break;
      }
      total = total.valid() ? add(total, l) : l;
    }
    total = scale(total, inv_b);
    g.backward(total);
    adam.lr = sched.at(step);
    adam_step(params, adam);
    const double loss = total.value().item();
    if (step == start) res.first_train_loss = loss;
    res.last_train_loss = loss;
    log << step << "," << fmt(adam.lr) << "," << fmt(loss) << ","
        << fmt(fidelity * inv_b) << "," << fmt(prior * inv_b) << ","
        << fmt(psi_c * inv_b) << "," << fmt(psi_s * inv_b) << ","
        << fmt(supervised * inv_b) << "\n";
    if ((step + 1) % cfg.optim.eval_every == 0 || step + 1 == cfg.optim.steps) {
      validate_and_save(step + 1);
    }
  }
  res.last_step = std::max<std::int64_t>(start, cfg.optim.steps);
  Checkpoint last = make_checkpoint(m, res.last_step);
  store_adam(last, params, adam);
  save_checkpoint(res.last_checkpoint, last);
  if (!fs::exists(cfg.out_dir / "best.bin")) {
    save_checkpoint(res.best_checkpoint, make_checkpoint(m, res.last_step));
  }
  append_file(cfg.out_dir / "log.csv",
              "step,lr,total,fidelity,prior,psi_c,psi_s,supervised\n", log.str(),
              fresh);
  append_file(cfg.out_dir / "eval.csv", "step,val_rmse_mm\n", evals.str(), fresh);
  return res;
}

// ---------------------------------------------------------------------------

EvalReport cmd_eval(const EvalOptions& opt) {
  const DcnModel m = dcn_from_checkpoint(load_checkpoint(opt.checkpoint));
  const auto entries = read_manifest(opt.manifest);
  if (entries.empty()) {
    throw std::invalid_argument("manifest " + opt.manifest.string() + " lists no samples");
  }
  EvalReport rep;
  std::vector<MetricSums> sums;
  std::ostringstream csv;
  write_metrics_header(csv);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Sample s = load_sample(entries[i]);
    const SparseSample sp =
        sample_sparse(s.depth, opt.density, mix(opt.seed, i), s.validity);
    Graph g;
    Var d = m.forward(g, g.constant_ref(sp.z_map), g.constant_ref(s.image));
    MetricSums ms;
    ms.add(d.value(), s.depth, s.validity);
    sums.push_back(ms);
    rep.per_image.push_back(ms.finish());
    write_metrics_row(csv, entries[i].image.filename().string(), rep.per_image.back());
  }
  rep.aggregate = aggregate(rep.per_image, sums, opt.aggregation);
  write_metrics_row(csv, opt.aggregation == Aggregation::per_image ? "mean" : "pooled",
                    rep.aggregate);
  rep.csv = csv.str();
  if (!opt.out_csv.empty()) write_file_atomic(opt.out_csv, rep.csv);
  return rep;
}

// ---------------------------------------------------------------------------

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << "gamma,eta,alpha,val_rmse_mm\n";
  for (const auto& r : rows) {
    os << r.gamma << "," << r.eta << "," << fmt(r.alpha) << "," << fmt(r.val_rmse_mm)
       << "\n";
  }
  return os.str();
}

std::vector<AblationRow> cmd_ablate(const RunConfig& base, const AblationOptions& opt,
                                    std::ostream* progress) {
  if (opt.grid.empty() || opt.alphas.empty()) {
    throw std::invalid_argument("ablation grid is empty");
  }
  for (const auto& [gamma, eta] : opt.grid) NormSpec{gamma, eta}.validate();
  const Dataset data = build_dataset(base.data);

  std::map<int, fs::path> cpns;
  for (const auto& [gamma, eta] : opt.grid) {
    if (cpns.count(eta)) continue;
    RunConfig c = base;
    c.mode = Mode::cpn;
    c.norms.eta = eta;
    c.resume.clear();
    c.optim.steps = opt.cpn_steps;
    c.out_dir = base.out_dir / ("cpn_eta" + std::to_string(eta));
    cpns[eta] = train_cpn(c, data, progress).best_checkpoint;
  }

  std::vector<AblationRow> rows;
  for (const auto& [gamma, eta] : opt.grid) {
    for (std::size_t a = 0; a < opt.alphas.size(); ++a) {
      RunConfig c = base;
      c.mode = Mode::unsupervised;
      c.norms = {gamma, eta};
      c.weights.alpha = opt.alphas[a];
      c.cpn_checkpoint = cpns[eta];
      c.resume.clear();
      c.out_dir = base.out_dir / ("dcn_g" + std::to_string(gamma) + "_e" +
                                  std::to_string(eta) + "_a" + std::to_string(a));
      const TrainResult r = train_dcn(c, data, progress);
      rows.push_back({gamma, eta, opt.alphas[a], r.final_val});
    }
  }
  write_file_atomic(base.out_dir / "ablation.csv", ablation_csv(rows));
  return rows;
}

// ---------------------------------------------------------------------------

std::array<double, 3> error_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  // Piecewise-linear blue -> cyan -> yellow -> red.
  static const std::array<std::array<double, 3>, 4> stops = {{
      {0.0, 0.0, 1.0}, {0.0, 1.0, 1.0}, {1.0, 1.0, 0.0}, {1.0, 0.0, 0.0}}};
  const double x = t * 3.0;
  const int i = std::min(2, static_cast<int>(x));
  const double a = x - i;
  std::array<double, 3> c{};
  for (int k = 0; k < 3; ++k) c[k] = (1 - a) * stops[i][k] + a * stops[i + 1][k];
  return c;
}

Tensor error_map(const Tensor& pred, const Tensor& gt, const Tensor& validity,
                 double scale) {
  require_same_shape(pred.shape(), gt.shape(), "error_map");
  require_same_shape(pred.shape(), validity.shape(), "error_map validity");
  if (!(scale > 0.0)) throw std::invalid_argument("error_map scale must be > 0");
  const Shape s = pred.shape();
  Tensor out({1, 3, s.h, s.w});
  for (int y = 0; y < s.h; ++y) {
    for (int x = 0; x < s.w; ++x) {
      if (validity.at(0, 0, y, x) == 0.0) continue;
      const double e = std::abs(pred.at(0, 0, y, x) - gt.at(0, 0, y, x)) / scale;
      const auto c = error_color(e);
      for (int k = 0; k < 3; ++k) out.at(0, k, y, x) = c[k];
    }
  }
  return out;
}

PredictResult cmd_predict(const PredictOptions& opt) {
  for (const auto* p : {&opt.checkpoint, &opt.image, &opt.sparse_depth}) {
    if (p->empty()) throw std::invalid_argument("predict: missing required path");
    if (!fs::exists(*p)) throw std::runtime_error("predict: no such file " + p->string());
  }
  for (const auto* p : {&opt.gt_depth, &opt.cpn_checkpoint}) {
    if (!p->empty() && !fs::exists(*p)) {
      throw std::runtime_error("predict: no such file " + p->string());
    }
  }
  const DcnModel m = dcn_from_checkpoint(load_checkpoint(opt.checkpoint));
  const Tensor image = read_rgb_png(opt.image);
  const DepthMap sparse = read_depth_png(opt.sparse_depth);
  if (sparse.depth.shape().h != image.shape().h || sparse.depth.shape().w != image.shape().w) {
    throw std::invalid_argument("predict: " + opt.sparse_depth.string() +
                                " and " + opt.image.string() + " differ in size");
  }
  PredictResult res;
  {
    Graph g;
    res.prediction =
        m.forward(g, g.constant_ref(sparse.depth), g.constant_ref(image)).value();
  }
  fs::create_directories(opt.out_dir);
  res.depth_png = opt.out_dir / "depth.png";
  write_depth_png(res.depth_png, res.prediction, Tensor(res.prediction.shape(), 1.0));
  if (!opt.gt_depth.empty()) {
    const DepthMap gt = read_depth_png(opt.gt_depth);
    res.error_png = opt.out_dir / "error.png";
    write_rgb_png(res.error_png,
                  error_map(res.prediction, gt.depth, gt.validity, opt.error_scale_m));
  }
  if (!opt.cpn_checkpoint.empty()) {
    const CpnModel cpn = cpn_from_checkpoint(load_checkpoint(opt.cpn_checkpoint));
    res.posterior = posterior_score(res.prediction, sparse.depth, sparse.validity,
                                    image, cpn, NormSpec{opt.gamma, cpn.eta()},
                                    opt.alpha);
  }
  return res;
}

}  // namespace depthcomp
