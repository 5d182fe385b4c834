// Command-line harness over the shared-library C API: dataset inspection,
// single training runs, multi-seed benchmarks and grid searches.
//
// Exit codes: 0 success, 1 usage/config, 2 data, 3 numeric failure.

#include <pslf/pslf.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliError {
  int code;
  std::string message;
};

[[noreturn]] void throw_status(pslf_status status) {
  throw CliError{static_cast<int>(status), pslf_last_error()};
}

void check(pslf_status status) {
  if (status != PSLF_OK) throw_status(status);
}

struct DatasetHandle {
  pslf_dataset* ptr = nullptr;
  ~DatasetHandle() { pslf_dataset_free(ptr); }
};

struct PartitionHandle {
  pslf_partition* ptr = nullptr;
  ~PartitionHandle() { pslf_partition_free(ptr); }
};

struct ConfigHandle {
  pslf_config* ptr = pslf_config_create();
  ~ConfigHandle() { pslf_config_free(ptr); }
};

struct ReportHandle {
  pslf_report* ptr = nullptr;
  ~ReportHandle() { pslf_report_free(ptr); }
};

// Options shared by train/bench/grid; every flag name matches its
// config key one-to-one.
struct CommonOpts {
  std::string dataset;
  std::string format = "tsv";
  std::string out_dir = "runs";
  std::vector<double> ratios{0.6, 0.2, 0.2};
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> partition_seed;
  std::map<std::string, std::string> config_kv;  // flag -> value
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--dataset", opts.dataset, "Rating file")->required();
  cmd->add_option("--format", opts.format,
                  "ml1m, csv, tsv or delim=<s>;cols=<u>,<i>,<r>[;header]");
  cmd->add_option("--out", opts.out_dir, "Output directory");
  cmd->add_option("--ratios", opts.ratios, "train,validation,test fractions")
      ->expected(3)
      ->delimiter(',');
  cmd->add_option("--seed", opts.seed, "Run seed (init + epoch order)");
  cmd->add_option("--partition-seed", opts.partition_seed,
                  "Partition seed (defaults to --seed)");

  static const char* kKeys[] = {"f",          "lambda",     "gamma",
                                "tau",        "cg-max-iters", "cg-norm",
                                "kp",         "ki",         "kd",
                                "lr",         "adam-beta1", "adam-beta2",
                                "sam-rho",    "sam-mode",   "max-epochs",
                                "early-stop"};
  for (const char* key : kKeys) {
    cmd->add_option_function<std::string>(
        std::string("--") + key,
        [&opts, key](const std::string& value) { opts.config_kv[key] = value; },
        std::string("TrainConfig field '") + key + "'");
  }
}

DatasetHandle load_dataset(const CommonOpts& opts) {
  DatasetHandle dataset;
  check(pslf_dataset_load(opts.dataset.c_str(), opts.format.c_str(), &dataset.ptr));
  return dataset;
}

PartitionHandle make_partition(const DatasetHandle& dataset, const CommonOpts& opts) {
  PartitionHandle partition;
  const std::uint64_t pseed = opts.partition_seed.value_or(opts.seed);
  check(pslf_partition_create(dataset.ptr, opts.ratios[0], opts.ratios[1],
                              opts.ratios[2], pseed, &partition.ptr));
  return partition;
}

ConfigHandle build_config(const CommonOpts& opts, const std::string& optimizer,
                          std::uint64_t seed) {
  ConfigHandle config;
  check(pslf_config_set(config.ptr, "optimizer", optimizer.c_str()));
  check(pslf_config_set(config.ptr, "seed", std::to_string(seed).c_str()));
  for (const auto& [key, value] : opts.config_kv) {
    check(pslf_config_set(config.ptr, key.c_str(), value.c_str()));
  }
  return config;
}

double scalar(const ReportHandle& report, const char* key) {
  double value = 0.0;
  check(pslf_report_scalar(report.ptr, key, &value));
  return value;
}

void write_report_file(const ReportHandle& report, const fs::path& path) {
  char* text = nullptr;
  check(pslf_report_json(report.ptr, &text));
  std::unique_ptr<char[], void (*)(char*)> guard(text, pslf_string_free);
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw CliError{2, "cannot write '" + path.string() + "'"};
  out << text << '\n';
}

std::string format_rmse(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5f", value);
  return buf;
}

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;  // sample std; 0 for a single observation
};

Stats stats_of(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  for (const double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double acc = 0.0;
    for (const double x : xs) acc += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(acc / static_cast<double>(xs.size() - 1));
  }
  return s;
}

int cmd_inspect(const std::string& path, const std::string& format) {
  DatasetHandle dataset;
  check(pslf_dataset_load(path.c_str(), format.c_str(), &dataset.ptr));
  uint64_t users = 0, items = 0, known = 0;
  double density = 0.0;
  check(pslf_dataset_stats(dataset.ptr, &users, &items, &known, &density));
  std::printf("%llu / %llu / %llu / %.2f%%\n",
              static_cast<unsigned long long>(users),
              static_cast<unsigned long long>(items),
              static_cast<unsigned long long>(known), 100.0 * density);
  return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& optimizer) {
  const ConfigHandle config = build_config(opts, optimizer, opts.seed);
  const DatasetHandle dataset = load_dataset(opts);
  const PartitionHandle partition = make_partition(dataset, opts);

  const fs::path out_dir(opts.out_dir);
  fs::create_directories(out_dir);
  check(pslf_partition_write_manifest(partition.ptr, out_dir.string().c_str()));
  check(pslf_dataset_write_id_maps(dataset.ptr, out_dir.string().c_str()));

  ReportHandle report;
  check(pslf_train(partition.ptr, config.ptr, &report.ptr));

  const fs::path report_path =
      out_dir / ("report_" + optimizer + "_seed" + std::to_string(opts.seed) + ".json");
  write_report_file(report, report_path);

  const int stop_reason = static_cast<int>(scalar(report, "stop_reason"));
  std::printf("%s seed=%llu test_rmse=%s best_epoch=%d epochs_run=%d report=%s\n",
              optimizer.c_str(), static_cast<unsigned long long>(opts.seed),
              format_rmse(scalar(report, "test_rmse")).c_str(),
              static_cast<int>(scalar(report, "best_epoch")),
              static_cast<int>(scalar(report, "epochs_run")),
              report_path.string().c_str());
  if (stop_reason == 2) {
    std::fprintf(stderr, "error: run ended with a solver error (see report)\n");
    return 3;
  }
  return 0;
}

int cmd_bench(const CommonOpts& opts, const std::vector<std::string>& optimizers,
              const std::vector<std::uint64_t>& seeds) {
  const DatasetHandle dataset = load_dataset(opts);
  const fs::path out_dir(opts.out_dir);
  fs::create_directories(out_dir);

  const std::string dataset_id = fs::path(opts.dataset).stem().string();
  json rows = json::array();
  std::ostringstream table;
  table << "dataset\tmodel\trmse_mean\trmse_std\ttime_mean_sec\ttime_std_sec"
           "\tepochs_mean\tepochs_std\tstatus\n";
  bool any_failed = false;

  for (const std::string& optimizer : optimizers) {
    std::vector<double> rmses, times, epochs;
    bool failed = false;
    std::string failure;
    for (const std::uint64_t seed : seeds) {
      CommonOpts run_opts = opts;
      run_opts.seed = seed;
      try {
        const PartitionHandle partition = make_partition(dataset, run_opts);
        const ConfigHandle config = build_config(run_opts, optimizer, seed);
        ReportHandle report;
        check(pslf_train(partition.ptr, config.ptr, &report.ptr));
        write_report_file(report,
                          out_dir / ("report_" + optimizer + "_seed" +
                                     std::to_string(seed) + ".json"));
        if (static_cast<int>(scalar(report, "stop_reason")) == 2) {
          throw CliError{3, "solver error (seed " + std::to_string(seed) + ")"};
        }
        rmses.push_back(scalar(report, "test_rmse"));
        times.push_back(scalar(report, "train_seconds") +
                        scalar(report, "partition_seconds"));
        epochs.push_back(scalar(report, "best_epoch"));
      } catch (const CliError& e) {
        failed = true;
        failure = e.message;
        break;
      }
    }
    const Stats rmse_s = stats_of(rmses), time_s = stats_of(times),
                epoch_s = stats_of(epochs);
    char line[512];
    if (failed) {
      any_failed = true;
      std::snprintf(line, sizeof line, "%s\t%s\t-\t-\t-\t-\t-\t-\tfailed\n",
                    dataset_id.c_str(), optimizer.c_str());
      std::fprintf(stderr, "error: %s failed: %s\n", optimizer.c_str(),
                   failure.c_str());
    } else {
      std::snprintf(line, sizeof line,
                    "%s\t%s\t%.5f\t%.5f\t%.2f\t%.2f\t%.1f\t%.1f\tok\n",
                    dataset_id.c_str(), optimizer.c_str(), rmse_s.mean,
                    rmse_s.stddev, time_s.mean, time_s.stddev, epoch_s.mean,
                    epoch_s.stddev);
    }
    table << line;
    rows.push_back(json{{"dataset", dataset_id},
                        {"model", optimizer},
                        {"failed", failed},
                        {"rmse_mean", rmse_s.mean},
                        {"rmse_std", rmse_s.stddev},
                        {"time_mean_sec", time_s.mean},
                        {"time_std_sec", time_s.stddev},
                        {"epochs_mean", epoch_s.mean},
                        {"epochs_std", epoch_s.stddev},
                        {"seeds", seeds},
                        {"runs", rmses.size()}});
  }

  std::ofstream tsv(out_dir / "bench.tsv");
  tsv << table.str();
  std::ofstream js(out_dir / "bench.json");
  js << json{{"schema", "pslf-bench-v1"}, {"rows", rows}}.dump(2) << '\n';
  std::fputs(table.str().c_str(), stdout);
  return any_failed ? 3 : 0;
}

// Cartesian product of the grid file's value lists, in file key order.
std::vector<std::map<std::string, std::string>> expand_grid(const json& grid) {
  if (!grid.is_object() || grid.empty()) {
    throw CliError{1, "grid file must be a non-empty JSON object of value lists"};
  }
  std::vector<std::map<std::string, std::string>> points{{}};
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty()) {
      throw CliError{1, "grid key '" + key + "' must map to a non-empty array"};
    }
    std::vector<std::map<std::string, std::string>> next;
    for (const auto& point : points) {
      for (const auto& value : values) {
        auto extended = point;
        extended[key] = value.is_string() ? value.get<std::string>() : value.dump();
        next.push_back(std::move(extended));
      }
    }
    points = std::move(next);
  }
  return points;
}

int cmd_grid(const CommonOpts& opts, const std::string& optimizer,
             const std::string& grid_path) {
  std::ifstream grid_file(grid_path);
  if (!grid_file) throw CliError{1, "cannot open grid file '" + grid_path + "'"};
  json grid_json;
  try {
    grid_file >> grid_json;
  } catch (const json::exception& e) {
    throw CliError{1, std::string("malformed grid file: ") + e.what()};
  }
  const auto points = expand_grid(grid_json);

  const DatasetHandle dataset = load_dataset(opts);
  const PartitionHandle partition = make_partition(dataset, opts);
  const fs::path out_dir = fs::path(opts.out_dir) / "grid";
  fs::create_directories(out_dir);

  std::size_t best_index = 0;
  double best_rmse = std::numeric_limits<double>::infinity();
  bool have_best = false;
  std::ostringstream table;
  table << "point\tparams\tvalidation_rmse\tstatus\n";

  for (std::size_t idx = 0; idx < points.size(); ++idx) {
    const fs::path point_path = out_dir / ("point_" + std::to_string(idx) + ".json");
    json record;
    if (fs::exists(point_path)) {
      // Completed on a previous invocation; resume by reusing the file.
      std::ifstream in(point_path);
      try {
        in >> record;
      } catch (const json::exception&) {
        record = json{};
      }
    }
    if (!record.contains("best_validation_rmse")) {
      CommonOpts run_opts = opts;
      for (const auto& [key, value] : points[idx]) run_opts.config_kv[key] = value;
      try {
        const ConfigHandle config = build_config(run_opts, optimizer, opts.seed);
        ReportHandle report;
        check(pslf_train(partition.ptr, config.ptr, &report.ptr));
        if (static_cast<int>(scalar(report, "stop_reason")) == 2) {
          throw CliError{3, "solver error"};
        }
        char* text = nullptr;
        check(pslf_report_json(report.ptr, &text));
        std::unique_ptr<char[], void (*)(char*)> guard(text, pslf_string_free);
        record = json::parse(text);
      } catch (const CliError& e) {
        record = json{{"failed", true}, {"error", e.message}};
      }
      std::ofstream out(point_path);
      out << record.dump(2) << '\n';
    }

    std::string status = "ok";
    double rmse = std::numeric_limits<double>::quiet_NaN();
    if (record.contains("best_validation_rmse") &&
        record["best_validation_rmse"].is_number()) {
      rmse = record["best_validation_rmse"].get<double>();
      if (rmse < best_rmse) {
        best_rmse = rmse;
        best_index = idx;
        have_best = true;
      }
    } else {
      status = "failed";
    }
    json params = json::object();
    for (const auto& [key, value] : points[idx]) params[key] = value;
    table << idx << '\t' << params.dump() << '\t'
          << (status == "ok" ? format_rmse(rmse) : "-") << '\t' << status << '\n';
  }

  std::ofstream tsv(fs::path(opts.out_dir) / "grid.tsv");
  tsv << table.str();
  std::fputs(table.str().c_str(), stdout);

  if (!have_best) throw CliError{3, "every grid run failed"};

  std::ifstream winner_in(out_dir / ("point_" + std::to_string(best_index) + ".json"));
  json winner;
  winner_in >> winner;
  json summary{{"schema", "pslf-grid-winner-v1"},
               {"point", best_index},
               {"params", [&] {
                  json p = json::object();
                  for (const auto& [key, value] : points[best_index]) p[key] = value;
                  return p;
                }()},
               {"validation_rmse", best_rmse},
               {"config", winner["config"]}};
  std::ofstream winner_out(fs::path(opts.out_dir) / "winner.json");
  winner_out << summary.dump(2) << '\n';
  std::printf("winner: point %zu validation_rmse=%s\n", best_index,
              format_rmse(best_rmse).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent factor training harness (PSLF and baselines)"};
  app.require_subcommand(1);

  std::string inspect_dataset, inspect_format = "tsv";
  CLI::App* inspect = app.add_subcommand("inspect", "Print |U| / |I| / |K| / density");
  inspect->add_option("--dataset", inspect_dataset, "Rating file")->required();
  inspect->add_option("--format", inspect_format, "Input format");

  CommonOpts train_opts;
  std::string train_optimizer = "pslf";
  CLI::App* train = app.add_subcommand("train", "Run one training job");
  add_common_flags(train, train_opts);
  train->add_option("--optimizer", train_optimizer, "sgd|adam|sam|slf|pslf");

  CommonOpts bench_opts;
  std::vector<std::string> bench_optimizers{"slf", "pslf"};
  std::vector<std::uint64_t> bench_seeds{1, 2, 3, 4, 5};
  CLI::App* bench = app.add_subcommand("bench", "Multi-seed benchmark table");
  add_common_flags(bench, bench_opts);
  bench->add_option("--optimizers", bench_optimizers, "Models to run")->delimiter(',');
  bench->add_option("--seeds", bench_seeds, "Seeds to aggregate over")->delimiter(',');

  CommonOpts grid_opts;
  std::string grid_optimizer = "pslf";
  std::string grid_file;
  CLI::App* grid = app.add_subcommand("grid", "Exhaustive grid search");
  add_common_flags(grid, grid_opts);
  grid->add_option("--optimizer", grid_optimizer, "sgd|adam|sam|slf|pslf");
  grid->add_option("--grid", grid_file, "JSON file: {\"lambda\": [...], ...}")
      ->required();

  try {
    app.parse(argc, argv);
    if (inspect->parsed()) return cmd_inspect(inspect_dataset, inspect_format);
    if (train->parsed()) return cmd_train(train_opts, train_optimizer);
    if (bench->parsed()) return cmd_bench(bench_opts, bench_optimizers, bench_seeds);
    if (grid->parsed()) return cmd_grid(grid_opts, grid_optimizer, grid_file);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return e.code == 0 ? 1 : e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
