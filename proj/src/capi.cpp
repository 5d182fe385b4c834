#include "pslf/pslf.h"

#include <chrono>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "data.hpp"
#include "error.hpp"
#include "report.hpp"
#include "trainer.hpp"

namespace {

thread_local std::string g_last_error;

pslf_status fail(pslf_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

pslf_status from_exception() {
  try {
    throw;
  } catch (const pslf::Error& e) {
    return fail(static_cast<pslf_status>(static_cast<int>(e.kind())), e.what());
  } catch (const std::exception& e) {
    return fail(PSLF_ERROR_NUMERIC, e.what());
  } catch (...) {
    return fail(PSLF_ERROR_NUMERIC, "unknown error");
  }
}

std::ofstream open_output(const std::string& directory, const char* name) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const fs::path path = fs::path(directory) / name;
  std::ofstream out(path);
  if (!out) throw pslf::DataError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

struct pslf_dataset {
  pslf::HdiMatrix matrix;
  std::string path;
};

struct pslf_partition {
  pslf::Partition partition;
  // Context carried into the run document.
  std::string dataset_path;
  std::size_t users = 0, items = 0, known = 0;
  pslf::SplitRatios ratios;
  double seconds = 0.0;
};

struct pslf_config {
  pslf::TrainConfig config;
};

struct pslf_report {
  pslf::RunDocument document;
};

extern "C" {

const char* pslf_version(void) { return "1.0.0"; }

const char* pslf_last_error(void) { return g_last_error.c_str(); }

pslf_status pslf_dataset_load(const char* path, const char* format,
                              pslf_dataset** out) {
  if (!path || !format || !out) return fail(PSLF_ERROR_CONFIG, "null argument");
  try {
    auto dataset = std::make_unique<pslf_dataset>();
    dataset->matrix = pslf::load_dataset(path, pslf::FormatSpec::parse(format));
    dataset->path = path;
    *out = dataset.release();
    return PSLF_OK;
  } catch (...) {
    return from_exception();
  }
}

pslf_status pslf_dataset_stats(const pslf_dataset* dataset, uint64_t* users,
                               uint64_t* items, uint64_t* known,
                               double* density) {
  if (!dataset) return fail(PSLF_ERROR_CONFIG, "null dataset");
  try {
    if (users) *users = dataset->matrix.num_users();
    if (items) *items = dataset->matrix.num_items();
    if (known) *known = dataset->matrix.num_entries();
    if (density) *density = pslf::density(dataset->matrix);
    return PSLF_OK;
  } catch (...) {
    return from_exception();
  }
}

pslf_status pslf_dataset_write_id_maps(const pslf_dataset* dataset,
                                       const char* directory) {
  if (!dataset || !directory) return fail(PSLF_ERROR_CONFIG, "null argument");
  try {
    auto users = open_output(directory, "ids_users.tsv");
    const auto& user_ids = dataset->matrix.user_ids();
    for (std::size_t u = 0; u < user_ids.size(); ++u) {
      users << u << '\t' << user_ids[u] << '\n';
    }
    auto items = open_output(directory, "ids_items.tsv");
    const auto& item_ids = dataset->matrix.item_ids();
    for (std::size_t i = 0; i < item_ids.size(); ++i) {
      items << i << '\t' << item_ids[i] << '\n';
    }
    return PSLF_OK;
  } catch (...) {
    return from_exception();
  }
}

void pslf_dataset_free(pslf_dataset* dataset) { delete dataset; }

pslf_status pslf_partition_create(const pslf_dataset* dataset,
                                  double train_fraction,
                                  double validation_fraction,
                                  double test_fraction, uint64_t seed,
                                  pslf_partition** out) {
  if (!dataset || !out) return fail(PSLF_ERROR_CONFIG, "null argument");
  try {
    auto handle = std::make_unique<pslf_partition>();
    const auto start = std::chrono::steady_clock::now();
    handle->partition = pslf::make_partition(
        dataset->matrix, {train_fraction, validation_fraction, test_fraction},
        seed);
    handle->seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    handle->dataset_path = dataset->path;
    handle->users = dataset->matrix.num_users();
    handle->items = dataset->matrix.num_items();
    handle->known = dataset->matrix.num_entries();
    handle->ratios = {train_fraction, validation_fraction, test_fraction};
    *out = handle.release();
    return PSLF_OK;
  } catch (...) {
    return from_exception();
  }
}

pslf_status pslf_partition_sizes(const pslf_partition* partition,
                                 uint64_t* train_size,
                                 uint64_t* validation_size,
                                 uint64_t* test_size) {
  if (!partition) return fail(PSLF_ERROR_CONFIG, "null partition");
  if (train_size) *train_size = partition->partition.train.num_entries();
  if (validation_size) *validation_size = partition->partition.validation.size();
  if (test_size) *test_size = partition->partition.test.size();
  return PSLF_OK;
}

pslf_status pslf_partition_write_manifest(const pslf_partition* partition,
                                          const char* directory) {
  if (!partition || !directory) return fail(PSLF_ERROR_CONFIG, "null argument");
  try {
    const auto write = [&](const char* name, const std::vector<std::uint32_t>& ids) {
      auto out = open_output(directory, name);
      for (const auto id : ids) out << id << '\n';
    };
    write("train.idx", partition->partition.train_indices);
    write("validation.idx", partition->partition.validation_indices);
    write("test.idx", partition->partition.test_indices);
    return PSLF_OK;
  } catch (...) {
    return from_exception();
  }
}

void pslf_partition_free(pslf_partition* partition) { delete partition; }

pslf_config* pslf_config_create(void) { return new pslf_config(); }

pslf_status pslf_config_set(pslf_config* config, const char* key,
                            const char* value) {
  if (!config || !key || !value) return fail(PSLF_ERROR_CONFIG, "null argument");
  try {
    const std::string k(key);
    const std::string v(value);
    pslf::TrainConfig& c = config->config;
    const auto as_double = [&] {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) throw pslf::ConfigError("bad number '" + v + "' for " + k);
      return x;
    };
    const auto as_count = [&] {
      const double x = as_double();
      if (x < 0 || x != static_cast<double>(static_cast<std::uint64_t>(x))) {
        throw pslf::ConfigError("bad count '" + v + "' for " + k);
      }
      return static_cast<std::uint64_t>(x);
    };
    if (k == "optimizer") c.optimizer = pslf::optimizer_from_name(v);
    else if (k == "f") c.f = as_count();
    else if (k == "lambda") c.lambda = as_double();
    else if (k == "gamma") c.gamma = as_double();
    else if (k == "tau") c.tau = as_double();
    else if (k == "cg-max-iters") c.cg_max_iters = as_count();
    else if (k == "cg-norm") {
      if (v == "l2") c.cg_norm = pslf::CgNorm::L2;
      else if (v == "max") c.cg_norm = pslf::CgNorm::Max;
      else throw pslf::ConfigError("cg-norm must be 'l2' or 'max'");
    }
    else if (k == "kp") c.gains.kp = as_double();
    else if (k == "ki") c.gains.ki = as_double();
    else if (k == "kd") c.gains.kd = as_double();
    else if (k == "lr") c.lr = as_double();
    else if (k == "adam-beta1") c.adam_beta1 = as_double();
    else if (k == "adam-beta2") c.adam_beta2 = as_double();
    else if (k == "sam-rho") c.sam_rho = as_double();
    else if (k == "sam-mode") {
      if (v == "per-rating") c.sam_mode = pslf::SamMode::PerRating;
      else if (v == "global") c.sam_mode = pslf::SamMode::Global;
      else throw pslf::ConfigError("sam-mode must be 'per-rating' or 'global'");
    }
    else if (k == "max-epochs") c.max_epochs = as_count();
    else if (k == "early-stop") c.early_stop_patience = as_count();
    else if (k == "seed") c.seed = as_count();
    else throw pslf::ConfigError("unknown config key '" + k + "'");
    return PSLF_OK;
  } catch (const std::invalid_argument&) {
    return fail(PSLF_ERROR_CONFIG, std::string("bad value for ") + key);
  } catch (const std::out_of_range&) {
    return fail(PSLF_ERROR_CONFIG, std::string("value out of range for ") + key);
  } catch (...) {
    return from_exception();
  }
}

pslf_status pslf_config_get(const pslf_config* config, const char* key,
                            char* buffer, size_t buffer_size) {
  if (!config || !key || !buffer || buffer_size == 0) {
    return fail(PSLF_ERROR_CONFIG, "null argument");
  }
  try {
    const nlohmann::json j = pslf::config_to_json(config->config);
    const auto snake = [](std::string s) {
      for (char& ch : s) {
        if (ch == '-') ch = '_';
      }
      return s;
    };
    const auto it = j.find(snake(key));
    if (it == j.end()) {
      throw pslf::ConfigError("unknown config key '" + std::string(key) + "'");
    }
    const std::string text = it->is_string() ? it->get<std::string>() : it->dump();
    if (text.size() + 1 > buffer_size) {
      return fail(PSLF_ERROR_CONFIG, "buffer too small");
    }
    std::memcpy(buffer, text.c_str(), text.size() + 1);
    return PSLF_OK;
  } catch (...) {
    return from_exception();
  }
}

void pslf_config_free(pslf_config* config) { delete config; }

pslf_status pslf_train(const pslf_partition* partition,
                       const pslf_config* config, pslf_report** out) {
  if (!partition || !config || !out) return fail(PSLF_ERROR_CONFIG, "null argument");
  try {
    auto report = std::make_unique<pslf_report>();
    report->document.dataset_path = partition->dataset_path;
    report->document.users = partition->users;
    report->document.items = partition->items;
    report->document.known = partition->known;
    report->document.ratios = partition->ratios;
    report->document.partition_seed = partition->partition.seed;
    report->document.train_size = partition->partition.train.num_entries();
    report->document.validation_size = partition->partition.validation.size();
    report->document.test_size = partition->partition.test.size();
    report->document.partition_seconds = partition->seconds;
    report->document.report = pslf::train(partition->partition, config->config);
    *out = report.release();
    return PSLF_OK;
  } catch (...) {
    return from_exception();
  }
}

pslf_status pslf_report_scalar(const pslf_report* report, const char* key,
                               double* out) {
  if (!report || !key || !out) return fail(PSLF_ERROR_CONFIG, "null argument");
  const pslf::TrainReport& r = report->document.report;
  const std::string k(key);
  if (k == "test_rmse") *out = r.test_rmse;
  else if (k == "best_validation_rmse") *out = r.best_validation_rmse;
  else if (k == "best_epoch") *out = static_cast<double>(r.best_epoch);
  else if (k == "epochs_run") *out = static_cast<double>(r.epochs_run());
  else if (k == "train_seconds") *out = r.train_seconds;
  else if (k == "partition_seconds") *out = report->document.partition_seconds;
  else if (k == "cg_iterations_total") {
    std::size_t total = 0;
    for (const auto& e : r.epochs) total += e.cg_iterations;
    *out = static_cast<double>(total);
  } else if (k == "stop_reason") {
    *out = static_cast<double>(static_cast<int>(r.stop_reason));
  } else {
    return fail(PSLF_ERROR_CONFIG, "unknown report key '" + k + "'");
  }
  return PSLF_OK;
}

pslf_status pslf_report_json(const pslf_report* report, char** out_json) {
  if (!report || !out_json) return fail(PSLF_ERROR_CONFIG, "null argument");
  try {
    const std::string text = pslf::run_document_to_json(report->document).dump(2);
    char* copy = new char[text.size() + 1];
    std::memcpy(copy, text.c_str(), text.size() + 1);
    *out_json = copy;
    return PSLF_OK;
  } catch (...) {
    return from_exception();
  }
}

void pslf_report_free(pslf_report* report) { delete report; }

void pslf_string_free(char* text) { delete[] text; }

}  // extern "C"
