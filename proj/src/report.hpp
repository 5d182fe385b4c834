#pragma once

#include <string>

#include <json.hpp>

#include "data.hpp"
#include "trainer.hpp"

namespace pslf {

// On-disk run document: every config default materialized plus dataset
// and partition context, so a run is replayable from its report alone.
// Field names are frozen; see README "Report format".
struct RunDocument {
  std::string dataset_path;
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t known = 0;
  SplitRatios ratios;
  std::uint64_t partition_seed = 0;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
  std::size_t test_size = 0;
  double partition_seconds = 0.0;
  TrainReport report;
};

nlohmann::json config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const TrainReport& report);
nlohmann::json run_document_to_json(const RunDocument& doc);

}  // namespace pslf
