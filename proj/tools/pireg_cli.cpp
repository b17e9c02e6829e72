// pireg command line: thin wrapper over the C API.
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pireg/pireg.h"

namespace {

std::string flag_name(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

int report_failure(pireg_status st, const char* what) {
  std::fprintf(stderr, "pireg: %s: %s (%s)\n", what, pireg_last_error(), pireg_status_name(st));
  return st == PIREG_E_CONFIG ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-informed regularization experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", pireg_version());

  std::string config_path;
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);

  std::map<std::string, std::string> values;
  bool strict = false;
  for (size_t i = 0; i < pireg_config_key_count(); ++i) {
    const std::string key = pireg_config_key_name(i);
    if (key == "command") continue;
    std::string help = pireg_config_key_help(i);
    const std::string def = pireg_config_key_default(i);
    if (!def.empty()) help += (help.empty() ? "" : " ") + std::string("[default: ") + def + "]";
    if (key == "strict") {
      app.add_flag("--strict", strict, help);
      continue;
    }
    app.add_option(flag_name(key), values[key], help);
  }

  auto* gen = app.add_subcommand("gen-data", "generate a dataset");
  auto* train = app.add_subcommand("train", "train one configuration");
  auto* search = app.add_subcommand("search", "random hyperparameter search");
  auto* report = app.add_subcommand("report", "compare runs and report derivatives");
  std::string manifest;
  auto* rerun = app.add_subcommand("rerun", "repeat a run from its manifest.cfg");
  rerun->add_option("manifest", manifest, "manifest written by a previous run")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  std::vector<std::string> keys, vals;
  for (const auto& [k, v] : values) {
    if (app.count(flag_name(k)) == 0) continue;
    keys.push_back(k);
    vals.push_back(v);
  }
  if (strict) {
    keys.emplace_back("strict");
    vals.emplace_back("true");
  }
  std::vector<const char*> kp, vp;
  for (size_t i = 0; i < keys.size(); ++i) {
    kp.push_back(keys[i].c_str());
    vp.push_back(vals[i].c_str());
  }

  const char* command = nullptr;
  const char* file = config_path.empty() ? nullptr : config_path.c_str();
  if (gen->parsed()) command = "gen-data";
  if (train->parsed()) command = "train";
  if (search->parsed()) command = "search";
  if (report->parsed()) command = "report";
  if (rerun->parsed()) {
    if (file) {
      std::fprintf(stderr, "pireg: rerun takes the manifest instead of --config\n");
      return 2;
    }
    file = manifest.c_str();
  }

  pireg_config* cfg = nullptr;
  pireg_status st = pireg_config_resolve(file, kp.data(), vp.data(), kp.size(), &cfg);
  if (st != PIREG_OK) return report_failure(st, "config");

  int exit_code = 0;
  st = pireg_run(cfg, command, file, &exit_code);
  pireg_config_free(cfg);
  if (st != PIREG_OK) return report_failure(st, command ? command : "rerun");
  if (*pireg_last_error()) std::fprintf(stderr, "pireg: %s\n", pireg_last_error());
  return exit_code;
}
