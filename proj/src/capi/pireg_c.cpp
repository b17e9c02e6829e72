#include "pireg/pireg.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "common/text.hpp"
#include "pireg/commands.hpp"

struct pireg_config {
  pireg::Config cfg;
};

struct pireg_dataset {
  pireg::Dataset ds;
};

struct pireg_model {
  pireg::MlpParams params;
};

namespace {

thread_local std::string last_error;

pireg_status status_of(pireg::Errc code) { return static_cast<pireg_status>(static_cast<int>(code) + 1); }

template <typename F>
pireg_status guard(F&& f) {
  last_error.clear();
  try {
    f();
    return PIREG_OK;
  } catch (const pireg::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return PIREG_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PIREG_E_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) pireg::fail(pireg::Errc::invalid_argument, std::string(what) + " is NULL");
}

pireg::Split to_split(pireg_split s) {
  switch (s) {
    case PIREG_SPLIT_TRAIN: return pireg::Split::train;
    case PIREG_SPLIT_EVAL: return pireg::Split::eval;
    case PIREG_SPLIT_TEST: return pireg::Split::test;
  }
  pireg::fail(pireg::Errc::invalid_argument, "unknown split");
}

std::string normalize_key(const char* key) {
  std::string k(key);
  for (char& c : k)
    if (c == '-') c = '_';
  return k;
}

}  // namespace

extern "C" {

const char* pireg_version(void) { return "0.1.0"; }

const char* pireg_status_name(int status) {
  if (status == PIREG_OK) return "ok";
  if (status == PIREG_E_INTERNAL) return "internal";
  if (status >= 1 && status <= static_cast<int>(pireg::Errc::missing_checkpoint) + 1)
    return pireg::errc_name(static_cast<pireg::Errc>(status - 1)).data();
  return "unknown";
}

const char* pireg_last_error(void) { return last_error.c_str(); }

size_t pireg_config_key_count(void) { return pireg::config_schema().size(); }

const char* pireg_config_key_name(size_t i) {
  const auto& s = pireg::config_schema();
  return i < s.size() ? s[i].name.c_str() : nullptr;
}

const char* pireg_config_key_default(size_t i) {
  const auto& s = pireg::config_schema();
  return i < s.size() ? s[i].default_value.c_str() : nullptr;
}

const char* pireg_config_key_help(size_t i) {
  const auto& s = pireg::config_schema();
  return i < s.size() ? s[i].help.c_str() : nullptr;
}

pireg_status pireg_config_create(pireg_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new pireg_config{};
  });
}

pireg_status pireg_config_resolve(const char* path, const char* const* flag_keys, const char* const* flag_values,
                                  size_t n_flags, pireg_config** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    if (n_flags > 0) {
      need(flag_keys, "flag_keys");
      need(flag_values, "flag_values");
    }
    std::vector<std::pair<std::string, std::string>> file, flags;
    if (path) file = pireg::Config::parse_entries(pireg::detail::read_file(path));
    for (size_t i = 0; i < n_flags; ++i) {
      need(flag_keys[i], "flag key");
      need(flag_values[i], "flag value");
      flags.emplace_back(normalize_key(flag_keys[i]), flag_values[i]);
    }
    *out = new pireg_config{pireg::Config::resolve(file, flags)};
  });
}

void pireg_config_free(pireg_config* cfg) { delete cfg; }

pireg_status pireg_config_set(pireg_config* cfg, const char* key, const char* value) {
  return guard([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    cfg->cfg.set(normalize_key(key), value);
  });
}

pireg_status pireg_config_apply_preset(pireg_config* cfg, const char* name) {
  return guard([&] {
    need(cfg, "config");
    need(name, "name");
    cfg->cfg.apply_preset(name);
  });
}

pireg_status pireg_config_get(const pireg_config* cfg, const char* key, char* buf, size_t cap, size_t* needed) {
  return guard([&] {
    need(cfg, "config");
    need(key, "key");
    const std::string& v = cfg->cfg.get(normalize_key(key));
    if (needed) *needed = v.size() + 1;
    if (buf && cap > 0) {
      const size_t n = std::min(cap - 1, v.size());
      std::memcpy(buf, v.data(), n);
      buf[n] = '\0';
      if (n < v.size()) pireg::fail(pireg::Errc::invalid_argument, "buffer too small");
    }
  });
}

pireg_status pireg_dataset_load(const char* path, pireg_dataset** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new pireg_dataset{pireg::load_dataset(path)};
  });
}

pireg_status pireg_dataset_save(const pireg_dataset* ds, const char* path) {
  return guard([&] {
    need(ds, "dataset");
    need(path, "path");
    pireg::save_dataset(ds->ds, path);
  });
}

pireg_status pireg_dataset_shape(const pireg_dataset* ds, size_t* rows, size_t* inputs, size_t* outputs) {
  return guard([&] {
    need(ds, "dataset");
    if (rows) *rows = static_cast<size_t>(ds->ds.rows());
    if (inputs) *inputs = static_cast<size_t>(ds->ds.X.cols());
    if (outputs) *outputs = static_cast<size_t>(ds->ds.Y.cols());
  });
}

pireg_status pireg_dataset_split_rows(const pireg_dataset* ds, pireg_split split, size_t* rows) {
  return guard([&] {
    need(ds, "dataset");
    need(rows, "rows");
    *rows = ds->ds.rows_in(to_split(split)).size();
  });
}

void pireg_dataset_free(pireg_dataset* ds) { delete ds; }

pireg_status pireg_model_load(const char* path, pireg_model** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new pireg_model{pireg::load_checkpoint(path)};
  });
}

pireg_status pireg_model_save(const pireg_model* model, const char* path) {
  return guard([&] {
    need(model, "model");
    need(path, "path");
    pireg::save_checkpoint(model->params, path);
  });
}

pireg_status pireg_model_shape(const pireg_model* model, size_t* inputs, size_t* outputs) {
  return guard([&] {
    need(model, "model");
    if (inputs) *inputs = static_cast<size_t>(model->params.inputs());
    if (outputs) *outputs = static_cast<size_t>(model->params.outputs());
  });
}

pireg_status pireg_model_predict(const pireg_model* model, const double* x, size_t rows, double* y) {
  return guard([&] {
    need(model, "model");
    need(x, "x");
    need(y, "y");
    const auto d = model->params.inputs();
    const auto k = model->params.outputs();
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const pireg::Matrix X = Eigen::Map<const RowMajor>(x, static_cast<Eigen::Index>(rows), d);
    const pireg::Matrix Y = pireg::predict(model->params, X);
    Eigen::Map<RowMajor>(y, static_cast<Eigen::Index>(rows), k) = Y;
  });
}

pireg_status pireg_model_relative_l2(const pireg_model* model, const pireg_dataset* ds, pireg_split split,
                                     double* out) {
  return guard([&] {
    need(model, "model");
    need(ds, "dataset");
    need(out, "out");
    const pireg::Split s = to_split(split);
    *out = pireg::relative_l2(model->params, ds->ds.inputs(s), ds->ds.targets(s));
  });
}

void pireg_model_free(pireg_model* model) { delete model; }

pireg_status pireg_run(const pireg_config* cfg, const char* command, const char* config_file, int* exit_code) {
  return guard([&] {
    need(cfg, "config");
    if (exit_code) *exit_code = 1;
    pireg::Config c = cfg->cfg;
    if (command) c.set("command", command);
    const pireg::CommandResult r = pireg::run_command(c, config_file ? config_file : "");
    if (exit_code) *exit_code = r.exit_code;
    if (!r.note.empty()) last_error = r.note;
  });
}

}  // extern "C"
