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

#include "tempeq/config.h"

#include <type_traits>

#include "io_util.h"
#include "tempeq/error.h"

namespace tempeq {

using nlohmann::json;

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void reject_unknown(const json& given, const json& defaults, const std::string& path) {
  if (!given.is_object())
    throw ConfigError("'" + (path.empty() ? std::string("<root>") : path) + "': expected an object");
  for (const auto& [key, value] : given.items()) {
    if (!defaults.contains(key)) throw ConfigError("unknown config key '" + join(path, key) + "'");
    if (defaults.at(key).is_object()) reject_unknown(value, defaults.at(key), join(path, key));
  }
}

template <typename T>
T field(const json& obj, std::string_view key, const std::string& path) {
  const std::string where = join(path, key);
  if (!obj.contains(key)) throw ConfigError("missing config key '" + where + "'");
  const json& v = obj.at(std::string(key));
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError("'" + where + "' must be a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError("'" + where + "' must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_unsigned() == false && v.get<std::int64_t>() < 0)
        throw ConfigError("'" + where + "' must be >= 0");
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError("'" + where + "' must be a number");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError("'" + where + "' must be a string");
  }
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("'" + where + "': " + e.what());
  }
}

std::pair<double, double> range_field(const json& obj, std::string_view key,
                                      const std::string& path) {
  const std::string where = join(path, key);
  const json& v = obj.at(std::string(key));
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError("'" + where + "' must be a [lo, hi] pair of numbers");
  return {v[0].get<double>(), v[1].get<double>()};
}

template <typename T>
std::vector<T> list_field(const json& obj, std::string_view key, const std::string& path) {
  const std::string where = join(path, key);
  const json& v = obj.at(std::string(key));
  if (!v.is_array()) throw ConfigError("'" + where + "' must be a list");
  std::vector<T> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw ConfigError("'" + where + "' entries must be integers");
    if (std::is_unsigned_v<T> && e.get<std::int64_t>() < 0)
      throw ConfigError("'" + where + "' entries must be >= 0");
    out.push_back(e.get<T>());
  }
  return out;
}

json merged(const json& defaults, const json& given, const std::string& path) {
  reject_unknown(given, defaults, path);
  json out = defaults;
  for (const auto& [key, value] : given.items()) {
    if (defaults.at(key).is_object())
      out[key] = merged(defaults.at(key), value, join(path, key));
    else
      out[key] = value;
  }
  return out;
}

json vicreg_to_json(const VicregWeights& w) {
  return {{"lambda_s", w.lambda_s}, {"lambda_v", w.lambda_v}, {"lambda_c", w.lambda_c},
          {"eps", w.eps}};
}

json tc_to_json(const TcWeights& w) { return {{"beta", w.beta}, {"upsilon", w.upsilon}}; }

json eval_to_json(const EvalConfig& c) {
  return {{"tc_syn_months", c.tc_syn_months},
          {"diag_months", c.diagnostics.months},
          {"fd_delta", c.diagnostics.fd_delta},
          {"diag_patients", c.diagnostics.max_patients},
          {"composition_months", c.diagnostics.composition_months}};
}

json grad_check_to_json(const GradCheckConfig& c) {
  return {{"step", c.step}, {"tol", c.tol}, {"width", c.width}, {"batch", c.batch},
          {"seed", c.seed}};
}

GeneratorConfig parse_generator(const json& j, const std::string& path) {
  GeneratorConfig c;
  c.n_patients = field<std::size_t>(j, "n_patients", path);
  c.horizon_months = field<int>(j, "horizon_months", path);
  c.obs_dim = field<std::size_t>(j, "obs_dim", path);
  c.identity_dim = field<std::size_t>(j, "identity_dim", path);
  c.progression_rate_range = range_field(j, "progression_rate_range", path);
  c.initial_severity_range = range_field(j, "initial_severity_range", path);
  c.conversion_threshold = field<double>(j, "conversion_threshold", path);
  c.signal_scale = field<double>(j, "signal_scale", path);
  c.noise_std = field<double>(j, "noise_std", path);
  c.label_windows = list_field<int>(j, "label_windows", path);
  c.train_fraction = field<double>(j, "train_fraction", path);
  c.val_fraction = field<double>(j, "val_fraction", path);
  c.seed = field<std::uint64_t>(j, "seed", path);
  c.split_seed = field<std::uint64_t>(j, "split_seed", path);
  return c;
}

AugmentConfig parse_augment(const json& j, const std::string& path) {
  AugmentConfig c;
  c.noise_std = field<double>(j, "noise_std", path);
  c.mask_fraction = field<double>(j, "mask_fraction", path);
  c.scale_range = range_field(j, "scale_range", path);
  return c;
}

ModelDims parse_model(const json& j, const std::string& path, std::size_t obs_dim) {
  ModelDims c;
  c.obs_dim = obs_dim;
  c.encoder_hidden = list_field<std::size_t>(j, "encoder_hidden", path);
  c.rep_dim = field<std::size_t>(j, "rep_dim", path);
  c.proj_hidden = field<std::size_t>(j, "proj_hidden", path);
  c.pred_hidden = field<std::size_t>(j, "pred_hidden", path);
  return c;
}

TrainConfig parse_train(const json& j, const std::string& path) {
  TrainConfig c;
  c.epochs = field<int>(j, "epochs", path);
  c.batch_size = field<std::size_t>(j, "batch_size", path);
  c.base_lr = field<double>(j, "base_lr", path);
  c.weight_decay = field<double>(j, "weight_decay", path);
  c.warmup_epochs = field<int>(j, "warmup_epochs", path);
  const std::string arm = field<std::string>(j, "arm", path);
  try {
    c.arm = parse_arm(arm);
  } catch (const Error& e) {
    throw ConfigError("'" + join(path, "arm") + "': " + e.what());
  }
  c.seed = field<std::uint64_t>(j, "seed", path);
  const std::string vp = join(path, "vicreg");
  const json& v = j.at("vicreg");
  c.vicreg.lambda_s = field<double>(v, "lambda_s", vp);
  c.vicreg.lambda_v = field<double>(v, "lambda_v", vp);
  c.vicreg.lambda_c = field<double>(v, "lambda_c", vp);
  c.vicreg.eps = field<double>(v, "eps", vp);
  const std::string tp = join(path, "tc");
  const json& t = j.at("tc");
  c.tc.beta = field<double>(t, "beta", tp);
  c.tc.upsilon = field<double>(t, "upsilon", tp);
  return c;
}

ProbeConfig parse_probe(const json& j, const std::string& path) {
  ProbeConfig c;
  c.epochs = field<int>(j, "epochs", path);
  c.lr = field<double>(j, "lr", path);
  c.batch_size = field<std::size_t>(j, "batch_size", path);
  c.seed = field<std::uint64_t>(j, "seed", path);
  c.standardize = field<bool>(j, "standardize", path);
  c.class_weighted = field<bool>(j, "class_weighted", path);
  c.threshold = field<double>(j, "threshold", path);
  c.folds = field<int>(j, "folds", path);
  return c;
}

}  // namespace

json to_json(const GeneratorConfig& c) {
  return {{"n_patients", c.n_patients},
          {"horizon_months", c.horizon_months},
          {"obs_dim", c.obs_dim},
          {"identity_dim", c.identity_dim},
          {"progression_rate_range",
           {c.progression_rate_range.first, c.progression_rate_range.second}},
          {"initial_severity_range",
           {c.initial_severity_range.first, c.initial_severity_range.second}},
          {"conversion_threshold", c.conversion_threshold},
          {"signal_scale", c.signal_scale},
          {"noise_std", c.noise_std},
          {"label_windows", c.label_windows},
          {"train_fraction", c.train_fraction},
          {"val_fraction", c.val_fraction},
          {"seed", c.seed},
          {"split_seed", c.split_seed}};
}

json to_json(const AugmentConfig& c) {
  return {{"noise_std", c.noise_std},
          {"mask_fraction", c.mask_fraction},
          {"scale_range", {c.scale_range.first, c.scale_range.second}}};
}

json to_json(const ModelDims& c) {
  return {{"encoder_hidden", c.encoder_hidden},
          {"rep_dim", c.rep_dim},
          {"proj_hidden", c.proj_hidden},
          {"pred_hidden", c.pred_hidden}};
}

json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"base_lr", c.base_lr},
          {"weight_decay", c.weight_decay},
          {"warmup_epochs", c.warmup_epochs},
          {"arm", std::string(arm_name(c.arm))},
          {"seed", c.seed},
          {"vicreg", vicreg_to_json(c.vicreg)},
          {"tc", tc_to_json(c.tc)}};
}

json to_json(const ProbeConfig& c) {
  return {{"epochs", c.epochs},
          {"lr", c.lr},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"standardize", c.standardize},
          {"class_weighted", c.class_weighted},
          {"threshold", c.threshold},
          {"folds", c.folds}};
}

json to_json(const ExperimentConfig& c) {
  json arms = json::array();
  for (Arm a : c.arms) arms.push_back(std::string(arm_name(a)));
  return {{"output_dir", c.output_dir},
          {"arms", arms},
          {"generator", to_json(c.generator)},
          {"augment", to_json(c.augment)},
          {"model", to_json(c.model)},
          {"trainer", to_json(c.trainer)},
          {"probe", to_json(c.probe)},
          {"eval", eval_to_json(c.eval)},
          {"grad_check", grad_check_to_json(c.grad_check)}};
}

GeneratorConfig generator_config_from_json(const json& j) {
  return parse_generator(merged(to_json(GeneratorConfig{}), j, "generator"), "generator");
}

AugmentConfig augment_config_from_json(const json& j) {
  return parse_augment(merged(to_json(AugmentConfig{}), j, "augment"), "augment");
}

ModelDims model_dims_from_json(const json& j, std::size_t obs_dim) {
  return parse_model(merged(to_json(ModelDims{}), j, "model"), "model", obs_dim);
}

TrainConfig train_config_from_json(const json& j) {
  return parse_train(merged(to_json(TrainConfig{}), j, "trainer"), "trainer");
}

ExperimentConfig experiment_config_from_json(const json& j) {
  const json doc = merged(to_json(ExperimentConfig{}), j, "");
  ExperimentConfig c;
  c.output_dir = field<std::string>(doc, "output_dir", "");
  c.arms.clear();
  if (!doc.at("arms").is_array()) throw ConfigError("'arms' must be a list of arm names");
  for (const auto& a : doc.at("arms")) {
    if (!a.is_string()) throw ConfigError("'arms' entries must be strings");
    try {
      c.arms.push_back(parse_arm(a.get<std::string>()));
    } catch (const Error& e) {
      throw ConfigError(std::string("'arms': ") + e.what());
    }
  }
  c.generator = parse_generator(doc.at("generator"), "generator");
  c.augment = parse_augment(doc.at("augment"), "augment");
  c.model = parse_model(doc.at("model"), "model", c.generator.obs_dim);
  c.trainer = parse_train(doc.at("trainer"), "trainer");
  c.probe = parse_probe(doc.at("probe"), "probe");
  const json& e = doc.at("eval");
  c.eval.tc_syn_months = field<int>(e, "tc_syn_months", "eval");
  c.eval.diagnostics.months = list_field<int>(e, "diag_months", "eval");
  c.eval.diagnostics.fd_delta = field<double>(e, "fd_delta", "eval");
  c.eval.diagnostics.max_patients = field<std::size_t>(e, "diag_patients", "eval");
  c.eval.diagnostics.composition_months = field<int>(e, "composition_months", "eval");
  const json& g = doc.at("grad_check");
  c.grad_check.step = field<double>(g, "step", "grad_check");
  c.grad_check.tol = field<double>(g, "tol", "grad_check");
  c.grad_check.width = field<std::size_t>(g, "width", "grad_check");
  c.grad_check.batch = field<std::size_t>(g, "batch", "grad_check");
  c.grad_check.seed = field<std::uint64_t>(g, "seed", "grad_check");
  return c;
}

void ExperimentConfig::validate() const {
  if (output_dir.empty()) throw ConfigError("'output_dir' must not be empty");
  if (arms.empty()) throw ConfigError("'arms' must not be empty");
  generator.validate();
  augment.validate();
  trainer.validate();
  probe.validate();
  eval.diagnostics.validate();
  if (model.rep_dim == 0 || model.proj_hidden == 0 || model.pred_hidden == 0)
    throw ConfigError("model widths must be >= 1");
  for (std::size_t h : model.encoder_hidden)
    if (h == 0) throw ConfigError("model.encoder_hidden entries must be >= 1");
  if (eval.tc_syn_months < 1 || eval.tc_syn_months > kMaxPairGapMonths)
    throw ConfigError("eval.tc_syn_months must be in 1..12");
  if (!(grad_check.step > 0.0) || !(grad_check.tol > 0.0))
    throw ConfigError("grad_check.step and grad_check.tol must be > 0");
  if (grad_check.width == 0 || grad_check.width > 16)
    throw ConfigError("grad_check.width must be in 1..16");
  if (grad_check.batch < 2) throw ConfigError("grad_check.batch must be >= 2");
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object() || !node->contains(part))
      throw ConfigError("unknown config key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;
  *node = value;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides) {
  json given = json::object();
  if (!path.empty()) {
    std::string text;
    try {
      text = io::read_file(path);
    } catch (const IoError& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    given = json::parse(text, nullptr, false);
    if (given.is_discarded()) throw ConfigError("config: " + path.string() + " is not valid JSON");
  }
  json doc = merged(to_json(ExperimentConfig{}), given, "");
  for (const auto& o : overrides) apply_override(doc, o);
  ExperimentConfig cfg = experiment_config_from_json(doc);
  cfg.overrides = overrides;
  cfg.validate();
  return cfg;
}

}  // namespace tempeq
