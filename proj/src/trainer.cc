/*
 * Copyright 2026 The tempeq Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tempeq/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "io_util.h"
#include "json.hpp"
#include "tempeq/config.h"
#include "tempeq/error.h"
#include "tempeq/rng.h"

namespace tempeq {

using nlohmann::json;

namespace {

constexpr std::uint64_t kInitStream = 21;
constexpr std::uint64_t kStepStream = 22;
constexpr std::string_view kCheckpointFormat = "tempeq-checkpoint/1";

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void add_into(Tensor2& dst, const Tensor2& src) {
  auto d = dst.flat();
  auto s = src.flat();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

std::string_view arm_name(Arm arm) {
  switch (arm) {
    case Arm::kTc:
      return "tc";
    case Arm::kTcNoDm:
      return "tc_no_dm";
    case Arm::kTcNoReg:
      return "tc_no_reg";
    case Arm::kVicregOnly:
      return "vicreg_only";
  }
  return "?";
}

Arm parse_arm(std::string_view name) {
  for (Arm a : {Arm::kTc, Arm::kTcNoDm, Arm::kTcNoReg, Arm::kVicregOnly})
    if (arm_name(a) == name) return a;
  throw ConfigError("unknown arm '" + std::string(name) +
                    "' (expected tc, tc_no_dm, tc_no_reg or vicreg_only)");
}

bool arm_has_displacement_map(Arm arm) { return arm == Arm::kTc || arm == Arm::kTcNoReg; }

TcWeights effective_weights(Arm arm, const TcWeights& configured) {
  TcWeights w = configured;
  switch (arm) {
    case Arm::kTc:
      break;
    case Arm::kTcNoDm:
    case Arm::kTcNoReg:
      w.upsilon = 0.0;
      break;
    case Arm::kVicregOnly:
      w.beta = 0.0;
      break;
  }
  return w;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("trainer.epochs must be >= 1");
  if (batch_size < 2) throw ConfigError("trainer.batch_size must be >= 2");
  if (!(base_lr > 0.0) || !std::isfinite(base_lr))
    throw ConfigError("trainer.base_lr must be > 0");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay))
    throw ConfigError("trainer.weight_decay must be >= 0");
  if (warmup_epochs < 0) throw ConfigError("trainer.warmup_epochs must be >= 0");
  vicreg.validate();
  tc.validate();
}

ObjectiveResult tc_objective(const ModelParams& model, const Tensor2& view_a,
                             const Tensor2& view_b, std::span<const double> dt_norm, Arm arm,
                             const VicregWeights& vicreg, const TcWeights& weights,
                             bool with_grads) {
  require_same_shape(view_a, view_b, "tc_objective views");
  const std::size_t n = view_a.rows();
  if (n < 2) throw ShapeError("tc_objective: batch needs at least two pairs");
  if (dt_norm.size() != n) throw ShapeError("tc_objective: dt_norm length != batch");
  const TcWeights w = effective_weights(arm, weights);

  // Both views share one encoder/projector pass.
  const MlpForward enc = mlp_apply(model.encoder.mlp, vconcat(view_a, view_b));
  const MlpForward proj = mlp_apply(model.projector.mlp, enc.output);
  const Tensor2 z = row_slice(proj.output, 0, n);
  const Tensor2 zp = row_slice(proj.output, n, 2 * n);
  const Tensor2 r_a = row_slice(enc.output, 0, n);
  const Tensor2 r_b = row_slice(enc.output, n, 2 * n);

  const MlpForward pred = mlp_apply(model.predictor.mlp, predictor_input(r_a, dt_norm));
  const Tensor2& dm = pred.output;
  const bool additive = arm != Arm::kTcNoDm;
  Tensor2 predicted = dm;
  if (additive) add_into(predicted, r_a);

  ObjectiveResult out;
  out.breakdown = vicreg_loss(z, zp, vicreg);
  out.breakdown.equivariance = equivariance_loss(r_b, predicted);
  out.breakdown.regularization = additive ? dm_regularization(dm) : 0.0;
  out.breakdown.total = total_loss(out.breakdown.contrastive, out.breakdown.equivariance,
                                   out.breakdown.regularization, w);
  if (additive) {
    out.mean_dm_norm = mean_of(row_norms(dm));
  } else {
    Tensor2 implied = predicted;
    auto p = implied.flat();
    auto r = r_a.flat();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= r[i];
    out.mean_dm_norm = mean_of(row_norms(implied));
  }
  if (!with_grads) return out;

  // Projector side.
  Tensor2 dz(n, z.cols());
  Tensor2 dzp(n, z.cols());
  vicreg_loss_grad(z, zp, vicreg, 1.0, dz, dzp);
  MlpBackward proj_back = mlp_backward(model.projector.mlp, proj.trace, vconcat(dz, dzp));

  // Equivariance side.
  Tensor2 dr_b(n, r_b.cols());
  Tensor2 dpred(n, r_b.cols());
  equivariance_loss_grad(r_b, predicted, w.beta, dr_b, dpred);
  Tensor2 dr_a(n, r_a.cols());
  Tensor2 ddm = dpred;
  if (additive) {
    dr_a = dpred;
    dm_regularization_grad(dm, w.beta * w.upsilon, ddm);
  }
  MlpBackward pred_back = mlp_backward(model.predictor.mlp, pred.trace, ddm);
  const std::size_t rep = r_a.cols();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < rep; ++j) dr_a(i, j) += pred_back.input_grad(i, j);

  Tensor2 dr = proj_back.input_grad;
  add_into(dr, vconcat(dr_a, dr_b));
  MlpBackward enc_back = mlp_backward(model.encoder.mlp, enc.trace, dr);

  out.grads = ModelGrads{std::move(enc_back.grads), std::move(proj_back.grads),
                         std::move(pred_back.grads)};
  return out;
}

// ---- training log --------------------------------------------------------

void write_training_log(const TrainingLog& log, const std::filesystem::path& path) {
  std::string text(kTrainingLogHeader);
  text += '\n';
  for (const auto& r : log.rows) {
    const double fields[] = {r.lr,
                             r.loss.s_term,
                             r.loss.v_term,
                             r.loss.c_term,
                             r.loss.contrastive,
                             r.loss.equivariance,
                             r.loss.regularization,
                             r.loss.total,
                             r.mean_dm_norm};
    text += std::to_string(r.step);
    for (double f : fields) {
      text += ',';
      text += io::format_double(f);
    }
    text += '\n';
  }
  io::write_file(path, text);
}

TrainingLog read_training_log(const std::filesystem::path& path) {
  std::istringstream in(io::read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != kTrainingLogHeader)
    throw SchemaError(path.string() + ": unexpected training log header");
  TrainingLog log;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10)
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": expected 10 fields");
    auto num = [&](std::size_t i) {
      char* end = nullptr;
      const double v = std::strtod(cells[i].c_str(), &end);
      if (end == cells[i].c_str() || *end != '\0')
        throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": bad number");
      return v;
    };
    TrainingLogRow r;
    r.step = static_cast<std::uint64_t>(num(0));
    r.lr = num(1);
    r.loss = {num(2), num(3), num(4), num(5), num(6), num(7), num(8)};
    r.mean_dm_norm = num(9);
    if (!log.rows.empty() && r.step <= log.rows.back().step)
      throw SchemaError(path.string() + ": steps are not increasing");
    log.rows.push_back(r);
  }
  return log;
}

// ---- parameter plumbing --------------------------------------------------

std::vector<ParamBlock> model_blocks(ModelParams& model) {
  std::vector<ParamBlock> out;
  for (auto [prefix, mlp] : {std::pair<const char*, MlpParams*>{"encoder.", &model.encoder.mlp},
                             {"projector.", &model.projector.mlp},
                             {"predictor.", &model.predictor.mlp}}) {
    for (auto& b : param_blocks(*mlp)) {
      b.name = prefix + b.name;
      out.push_back(std::move(b));
    }
  }
  return out;
}

std::vector<ParamBlock> grad_blocks(ModelGrads& grads) {
  std::vector<ParamBlock> out;
  for (auto [prefix, g] : {std::pair<const char*, GradStore*>{"encoder.", &grads.encoder},
                           {"projector.", &grads.projector},
                           {"predictor.", &grads.predictor}}) {
    for (auto& b : tempeq::grad_blocks(*g)) {
      b.name = prefix + b.name;
      out.push_back(std::move(b));
    }
  }
  return out;
}

std::uint64_t steps_per_epoch(std::size_t eligible_patients, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  return std::max<std::uint64_t>(1, eligible_patients / batch_size);
}

// ---- checkpoints ---------------------------------------------------------

namespace {

json config_echo(const Checkpoint& c) {
  json model = to_json(c.dims);
  model["obs_dim"] = c.dims.obs_dim;
  return {{"arm", std::string(arm_name(c.arm))},
          {"trainer", to_json(c.train)},
          {"model", model},
          {"augment", to_json(c.augment)}};
}

json layer_shapes(const MlpParams& mlp) {
  json out = json::array();
  for (const auto& l : mlp.layers)
    out.push_back({{"in", l.fan_in()},
                   {"out", l.fan_out()},
                   {"activation", std::string(activation_name(l.activation))}});
  return out;
}

MlpParams mlp_from_shapes(const json& shapes, const std::string& what) {
  if (!shapes.is_array() || shapes.empty()) throw SchemaError("checkpoint: bad " + what);
  MlpParams mlp;
  for (const auto& s : shapes) {
    Layer l;
    const auto in = s.at("in").get<std::size_t>();
    const auto out = s.at("out").get<std::size_t>();
    l.weight = Tensor2(out, in);
    l.bias.assign(out, 0.0);
    l.activation = parse_activation(s.at("activation").get<std::string>());
    mlp.layers.push_back(std::move(l));
  }
  return mlp;
}

// Ordered list of every stored tensor: parameters, then both moments.
struct NamedSpan {
  std::string name;
  std::span<double> values;
};

std::vector<NamedSpan> stored_tensors(Checkpoint& c) {
  std::vector<NamedSpan> out;
  auto blocks = model_blocks(c.model);
  for (auto& b : blocks) out.push_back({b.name, b.values});
  for (std::size_t i = 0; i < blocks.size(); ++i)
    out.push_back({"adam.m." + blocks[i].name, c.optimizer.first_moment[i]});
  for (std::size_t i = 0; i < blocks.size(); ++i)
    out.push_back({"adam.v." + blocks[i].name, c.optimizer.second_moment[i]});
  return out;
}

}  // namespace

std::string config_hash(const Checkpoint& ckpt) {
  return io::hex64(io::fnv1a64(config_echo(ckpt).dump()));
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir,
                     std::string_view echo_json) {
  Checkpoint copy = ckpt;  // spans below need mutable storage
  const auto tensors = stored_tensors(copy);
  if (copy.optimizer.first_moment.size() != model_blocks(copy.model).size())
    throw ShapeError("checkpoint: optimizer slots do not match the model");

  std::string blob;
  json index = json::array();
  for (const auto& t : tensors) {
    index.push_back({{"name", t.name}, {"offset", blob.size()}, {"count", t.values.size()}});
    blob += io::doubles_to_bytes(t.values);
  }

  json manifest;
  manifest["format"] = kCheckpointFormat;
  manifest["arm"] = arm_name(ckpt.arm);
  manifest["config_hash"] = config_hash(ckpt);
  manifest["config"] = config_echo(ckpt);
  manifest["step"] = ckpt.step;
  manifest["total_steps"] = ckpt.total_steps;
  manifest["warmup_steps"] = ckpt.warmup_steps;
  // The next step draws from derive_seed(seed, {stream, step}).
  manifest["rng"] = {{"seed", ckpt.train.seed}, {"stream", kStepStream}, {"next_step", ckpt.step}};
  manifest["optimizer"] = {{"beta1", ckpt.optimizer.beta1},
                           {"beta2", ckpt.optimizer.beta2},
                           {"eps", ckpt.optimizer.eps},
                           {"step", ckpt.optimizer.step}};
  manifest["shapes"] = {{"encoder", layer_shapes(ckpt.model.encoder.mlp)},
                        {"projector", layer_shapes(ckpt.model.projector.mlp)},
                        {"predictor", layer_shapes(ckpt.model.predictor.mlp)}};
  manifest["tensors"] = index;
  manifest["tensors_bytes"] = blob.size();
  manifest["tensors_fnv1a64"] = io::hex64(io::fnv1a64(blob));
  if (!echo_json.empty()) {
    json echo = json::parse(echo_json, nullptr, false);
    if (echo.is_discarded() || !echo.is_object())
      throw ConfigError("checkpoint echo must be a JSON object");
    manifest["echo"] = echo;
  }

  io::write_file(dir / "tensors.bin", blob);
  io::write_file(dir / "checkpoint.json", manifest.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "checkpoint.json";
  const json m = json::parse(io::read_file(manifest_path), nullptr, false);
  if (m.is_discarded() || !m.is_object())
    throw SchemaError(manifest_path.string() + ": not a JSON object");
  if (!m.contains("format") || m.at("format") != kCheckpointFormat)
    throw VersionError(manifest_path.string() + ": unsupported checkpoint format " +
                       (m.contains("format") ? m.at("format").dump() : std::string("<none>")));

  Checkpoint c;
  try {
    const json& cfg = m.at("config");
    c.arm = parse_arm(cfg.at("arm").get<std::string>());
    c.train = train_config_from_json(cfg.at("trainer"));
    json model = cfg.at("model");
    const auto obs = model.at("obs_dim").get<std::size_t>();
    model.erase("obs_dim");
    c.dims = model_dims_from_json(model, obs);
    c.augment = augment_config_from_json(cfg.at("augment"));
    c.step = m.at("step").get<std::uint64_t>();
    c.total_steps = m.at("total_steps").get<std::uint64_t>();
    c.warmup_steps = m.at("warmup_steps").get<std::uint64_t>();
    const json& opt = m.at("optimizer");
    c.optimizer.beta1 = opt.at("beta1").get<double>();
    c.optimizer.beta2 = opt.at("beta2").get<double>();
    c.optimizer.eps = opt.at("eps").get<double>();
    c.optimizer.step = opt.at("step").get<std::uint64_t>();
    const json& shapes = m.at("shapes");
    c.model.encoder.mlp = mlp_from_shapes(shapes.at("encoder"), "encoder");
    c.model.projector.mlp = mlp_from_shapes(shapes.at("projector"), "projector");
    c.model.predictor.mlp = mlp_from_shapes(shapes.at("predictor"), "predictor");
  } catch (const json::exception& e) {
    throw SchemaError(manifest_path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw SchemaError(manifest_path.string() + ": " + e.what());
  }
  validate_model(c.model);
  if (m.at("config_hash") != config_hash(c))
    throw IntegrityError(manifest_path.string() + ": config hash mismatch");

  const auto blocks = model_blocks(c.model);
  c.optimizer = [&] {
    OptimizerState s = OptimizerState::for_blocks(blocks);
    s.beta1 = c.optimizer.beta1;
    s.beta2 = c.optimizer.beta2;
    s.eps = c.optimizer.eps;
    s.step = c.optimizer.step;
    return s;
  }();

  const auto blob_path = dir / "tensors.bin";
  const std::string blob = io::read_file(blob_path);
  if (blob.size() != m.at("tensors_bytes").get<std::size_t>())
    throw IntegrityError(blob_path.string() + ": expected " +
                         std::to_string(m.at("tensors_bytes").get<std::size_t>()) +
                         " bytes, found " + std::to_string(blob.size()));
  if (io::hex64(io::fnv1a64(blob)) != m.at("tensors_fnv1a64").get<std::string>())
    throw IntegrityError(blob_path.string() + ": checksum mismatch");

  auto tensors = stored_tensors(c);
  const json& index = m.at("tensors");
  if (!index.is_array() || index.size() != tensors.size())
    throw IntegrityError(manifest_path.string() + ": tensor count does not match the shapes");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const json& e = index[i];
    const auto offset = e.at("offset").get<std::size_t>();
    const auto count = e.at("count").get<std::size_t>();
    if (e.at("name") != tensors[i].name || count != tensors[i].values.size() ||
        offset + count * sizeof(double) > blob.size())
      throw IntegrityError(manifest_path.string() + ": tensor '" + tensors[i].name +
                           "' does not match the stored layout");
    const auto values =
        io::bytes_to_doubles(std::string_view(blob).substr(offset, count * sizeof(double)));
    std::copy(values.begin(), values.end(), tensors[i].values.begin());
  }
  return c;
}

// ---- trainer -------------------------------------------------------------

Trainer::Trainer(const Dataset& dataset, std::span<const std::int64_t> patient_ids,
                 const TrainConfig& config, const ModelDims& dims, const AugmentConfig& augment)
    : dataset_(dataset), sampler_(dataset, patient_ids) {
  config.validate();
  augment.validate();
  if (dims.obs_dim != dataset.config.obs_dim)
    throw ConfigError("model obs_dim does not match the dataset");
  if (sampler_.eligible_count() < 2)
    throw DataError("pretraining needs at least two eligible patients");
  state_.arm = config.arm;
  state_.train = config;
  state_.dims = dims;
  state_.augment = augment;
  state_.model = init_model(dims, derive_seed(config.seed, {kInitStream}));
  state_.optimizer = OptimizerState::for_blocks(model_blocks(state_.model));
  const std::uint64_t spe = steps_per_epoch(sampler_.eligible_count(), config.batch_size);
  state_.total_steps = spe * static_cast<std::uint64_t>(config.epochs);
  // Short runs keep at least one post-warm-up step.
  state_.warmup_steps =
      std::min(spe * static_cast<std::uint64_t>(config.warmup_epochs), state_.total_steps - 1);
}

Trainer::Trainer(const Dataset& dataset, std::span<const std::int64_t> patient_ids,
                 Checkpoint checkpoint)
    : dataset_(dataset), sampler_(dataset, patient_ids), state_(std::move(checkpoint)) {
  validate_model(state_.model);
  if (state_.dims.obs_dim != dataset.config.obs_dim)
    throw ConfigError("checkpoint obs_dim does not match the dataset");
  if (state_.step > state_.total_steps) throw DataError("checkpoint step beyond total_steps");
}

const TrainingLogRow& Trainer::step() {
  if (done()) throw DomainError("trainer: run already complete");
  const std::uint64_t k = state_.step;
  Rng rng(derive_seed(state_.train.seed, {kStepStream, k}));
  const PairBatch batch = sampler_.sample(state_.train.batch_size, state_.augment, rng);
  const double lr =
      cosine_warmup_lr(k, state_.total_steps, state_.warmup_steps, state_.train.base_lr);

  ObjectiveResult obj;
  try {
    obj = tc_objective(state_.model, batch.view_a, batch.view_b, batch.dt_norm, state_.arm,
                       state_.train.vicreg, state_.train.tc, true);
  } catch (const NumericalError& e) {
    throw NumericalError("step " + std::to_string(k) + ": " + e.what());
  }
  if (!std::isfinite(obj.breakdown.total))
    throw NumericalError("step " + std::to_string(k) + ": non-finite loss");

  auto params = model_blocks(state_.model);
  auto grads = grad_blocks(*obj.grads);
  adamw_step(params, grads, state_.optimizer, lr, state_.train.weight_decay);
  ++state_.step;

  log_.rows.push_back({k, lr, obj.breakdown, obj.mean_dm_norm});
  return log_.rows.back();
}

void Trainer::run(std::uint64_t max_steps) {
  for (std::uint64_t i = 0; i < max_steps && !done(); ++i) step();
}

PretrainResult pretrain(const Dataset& dataset, std::span<const std::int64_t> patient_ids,
                        const TrainConfig& config, const ModelDims& dims,
                        const AugmentConfig& augment) {
  Trainer trainer(dataset, patient_ids, config, dims, augment);
  trainer.run();
  return {trainer.checkpoint(), trainer.log()};
}

}  // namespace tempeq
