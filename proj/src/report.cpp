#include "report.hpp"

#include "error.hpp"

namespace pslf {

using nlohmann::json;

nlohmann::json config_to_json(const TrainConfig& config) {
  return json{
      {"optimizer", std::string(optimizer_name(config.optimizer))},
      {"f", config.f},
      {"lambda", config.lambda},
      {"gamma", config.gamma},
      {"tau", config.tau},
      {"cg_max_iters", config.cg_max_iters},
      {"cg_norm", config.cg_norm == CgNorm::L2 ? "l2" : "max"},
      {"kp", config.gains.kp},
      {"ki", config.gains.ki},
      {"kd", config.gains.kd},
      {"lr", config.lr},
      {"adam_beta1", config.adam_beta1},
      {"adam_beta2", config.adam_beta2},
      {"sam_rho", config.sam_rho},
      {"sam_mode", config.sam_mode == SamMode::Global ? "global" : "per-rating"},
      {"max_epochs", config.max_epochs},
      {"early_stop", config.early_stop_patience},
      {"seed", config.seed},
  };
}

TrainConfig config_from_json(const json& j) {
  TrainConfig config;
  try {
    config.optimizer = optimizer_from_name(j.at("optimizer").get<std::string>());
    config.f = j.at("f").get<std::size_t>();
    config.lambda = j.at("lambda").get<double>();
    config.gamma = j.at("gamma").get<double>();
    config.tau = j.at("tau").get<double>();
    config.cg_max_iters = j.at("cg_max_iters").get<std::size_t>();
    config.cg_norm =
        j.at("cg_norm").get<std::string>() == "max" ? CgNorm::Max : CgNorm::L2;
    config.gains.kp = j.at("kp").get<double>();
    config.gains.ki = j.at("ki").get<double>();
    config.gains.kd = j.at("kd").get<double>();
    config.lr = j.at("lr").get<double>();
    config.adam_beta1 = j.at("adam_beta1").get<double>();
    config.adam_beta2 = j.at("adam_beta2").get<double>();
    config.sam_rho = j.at("sam_rho").get<double>();
    config.sam_mode = j.at("sam_mode").get<std::string>() == "global"
                          ? SamMode::Global
                          : SamMode::PerRating;
    config.max_epochs = j.at("max_epochs").get<std::size_t>();
    config.early_stop_patience = j.at("early_stop").get<std::size_t>();
    config.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config document: ") + e.what());
  }
  return config;
}

nlohmann::json report_to_json(const TrainReport& report) {
  json epochs = json::array();
  for (const EpochRecord& r : report.epochs) {
    epochs.push_back(json{{"epoch", r.epoch},
                          {"train_rmse", r.train_rmse},
                          {"validation_rmse", r.validation_rmse},
                          {"seconds", r.seconds},
                          {"cg_iterations", r.cg_iterations}});
  }
  json j{
      {"config", config_to_json(report.config)},
      {"epochs", std::move(epochs)},
      {"epochs_run", report.epochs_run()},
      {"best_epoch", report.best_epoch},
      {"best_validation_rmse", report.best_validation_rmse},
      {"test_rmse", report.test_rmse},
      {"stop_reason", std::string(stop_reason_name(report.stop_reason))},
      {"train_seconds", report.train_seconds},
  };
  if (!report.error.empty()) j["error"] = report.error;
  return j;
}

nlohmann::json run_document_to_json(const RunDocument& doc) {
  json j = report_to_json(doc.report);
  j["schema"] = "pslf-run-v1";
  j["dataset"] = json{{"path", doc.dataset_path},
                      {"users", doc.users},
                      {"items", doc.items},
                      {"known", doc.known}};
  j["partition"] = json{{"train_ratio", doc.ratios.train},
                        {"validation_ratio", doc.ratios.validation},
                        {"test_ratio", doc.ratios.test},
                        {"seed", doc.partition_seed},
                        {"train", doc.train_size},
                        {"validation", doc.validation_size},
                        {"test", doc.test_size},
                        {"seconds", doc.partition_seconds}};
  return j;
}

}  // namespace pslf
