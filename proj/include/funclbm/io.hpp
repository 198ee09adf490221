#pragma once

// File formats: long-format dataset CSV (row_id,col_id,t,value), dataset
// JSON, coefficient-grid JSON, model JSON, the two-section partition CSV
// (column lines then row lines), likelihood-trace CSV and ICL-table CSV.
// All writers are deterministic: doubles are printed with round-trip
// precision and key order is fixed.

#include <string>
#include <vector>

#include "funclbm/inference.hpp"
#include "funclbm/model_core.hpp"
#include "funclbm/model_selection.hpp"
#include "funclbm/types.hpp"

namespace funclbm {

std::string format_double(double v);

TimeSeriesDataset load_dataset_csv(const std::string& path);
TimeSeriesDataset load_dataset_json(const std::string& path);
// Dispatches on the .json extension.
TimeSeriesDataset load_dataset(const std::string& path);
void save_dataset_csv(const TimeSeriesDataset& dataset, const std::string& path);

void save_grid_json(const CoefficientGrid& grid, const std::string& path);
CoefficientGrid load_grid_json(const std::string& path);

void save_model_json(const ModelState& state, std::size_t m, const std::string& path);
// Returns the state and the coefficient length it was fitted on.
std::pair<ModelState, std::size_t> load_model_json(const std::string& path);

struct LoadedPartition {
  PartitionPair partition;
  CoClusterStructure structure;
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
};

void save_partition_csv(const PartitionPair& partition,
                        const CoClusterStructure& structure,
                        const std::vector<std::string>& row_ids,
                        const std::vector<std::string>& col_ids,
                        const std::string& path);
LoadedPartition load_partition_csv(const std::string& path);

void save_trace_csv(const std::vector<double>& trace, const std::string& path);

void save_icl_table_csv(const std::vector<IclEntry>& table, const std::string& path);

}  // namespace funclbm
