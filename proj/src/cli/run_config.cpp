// Copyright 2026 The whisqa Authors
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

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>

#include "whisqa/commands.hpp"
#include "whisqa/errors.hpp"

namespace whisqa::cli {

namespace {

template <class T>
T parse_value(const std::string& text, const std::string& where) {
  T v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(where + ": cannot parse '" + text + "'");
  return v;
}

void apply_train_key(TrainConfig& t, const std::string& key, const std::string& value, const std::string& where) {
  if (key == "lr_init") t.lr_init = parse_value<double>(value, where);
  else if (key == "plateau_factor") t.plateau_factor = parse_value<double>(value, where);
  else if (key == "plateau_patience") t.plateau_patience = parse_value<std::size_t>(value, where);
  else if (key == "early_stop_patience") t.early_stop_patience = parse_value<std::size_t>(value, where);
  else if (key == "batch") t.batch = parse_value<std::size_t>(value, where);
  else if (key == "max_epochs") t.max_epochs = parse_value<std::size_t>(value, where);
  else if (key == "seed") t.seed = parse_value<std::uint64_t>(value, where);
  else if (key == "loss") t.loss = parse_loss(value);
  else if (key == "precision") t.precision = parse_precision(value);
  else if (key == "val_fraction") t.val_fraction = parse_value<double>(value, where);
  else if (key == "adam_beta1") t.adam_beta1 = parse_value<double>(value, where);
  else if (key == "adam_beta2") t.adam_beta2 = parse_value<double>(value, where);
  else if (key == "adam_eps") t.adam_eps = parse_value<double>(value, where);
  else throw ConfigError(where + ": unknown key");
}

void apply_arch_key(ArchConfig& a, const std::string& key, const std::string& value, const std::string& where) {
  if (key == "model_dim") a.model_dim = parse_value<std::size_t>(value, where);
  else if (key == "transformer_layers") a.transformer_layers = parse_value<std::size_t>(value, where);
  else if (key == "attention_heads") a.attention_heads = parse_value<std::size_t>(value, where);
  else if (key == "heads") a.head_names = heads_for(value);
  else throw ConfigError(where + ": unknown key");
}

}  // namespace

std::vector<std::string> heads_for(const std::string& mode) {
  if (mode == "single") return ArchConfig::single_head_names();
  if (mode == "multi") return ArchConfig::multi_head_names();
  throw ConfigError("unknown head mode '" + mode + "' (expected single or multi)");
}

void apply_config(RunConfig& cfg, std::istream& in, const std::string& source) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(source + ": key '" + section + "' outside a [train] or [arch] section");
    }
    for (const auto& [key, node] : body) {
      const std::string where = source + ": [" + section + "] " + key;
      const std::string value = node.data();
      if (section == "train") {
        apply_train_key(cfg.train, key, value, where);
      } else if (section == "arch") {
        apply_arch_key(cfg.arch, key, value, where);
      } else {
        throw ConfigError(source + ": unknown section [" + section + "]");
      }
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  apply_config(cfg, in, path.string());
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& file, const Overrides& flags) {
  RunConfig cfg;
  if (file) apply_config_file(cfg, *file);
  if (flags.seed) cfg.train.seed = *flags.seed;
  if (flags.loss) cfg.train.loss = parse_loss(*flags.loss);
  if (flags.heads) cfg.arch.head_names = heads_for(*flags.heads);
  if (flags.precision) cfg.train.precision = parse_precision(*flags.precision);
  if (flags.max_epochs) cfg.train.max_epochs = *flags.max_epochs;
  if (flags.batch) cfg.train.batch = *flags.batch;
  if (flags.lr) cfg.train.lr_init = *flags.lr;
  cfg.train.validate();
  return cfg;
}

}  // namespace whisqa::cli
