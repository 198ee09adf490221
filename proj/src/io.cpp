#include "funclbm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace funclbm {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& context, std::size_t lineno) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidInputError(context + ": line " + std::to_string(lineno) +
                            ": cannot parse number '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& context, std::size_t lineno) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidInputError(context + ": line " + std::to_string(lineno) +
                            ": cannot parse integer '" + s + "'");
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write " + path);
  return out;
}

void check_id(const std::string& id) {
  if (id.empty() || id.find(',') != std::string::npos || id.find('|') != std::string::npos)
    throw InvalidInputError("identifier '" + id + "' must be nonempty without ',' or '|'");
}

json grid_meta(const CoefficientGrid& grid) {
  return json{{"gap", grid.grid.gap}, {"length", grid.grid.length}};
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

TimeSeriesDataset load_dataset_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw InvalidInputError(path + ": empty file");
  ++lineno;
  if (split_csv_line(line) != std::vector<std::string>{"row_id", "col_id", "t", "value"})
    throw InvalidInputError(path + ": expected header row_id,col_id,t,value");

  std::vector<std::string> row_ids, col_ids;
  std::map<std::string, std::size_t> row_index, col_index;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::pair<double, double>>> cells;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 4)
      throw InvalidInputError(path + ": line " + std::to_string(lineno) +
                              ": expected 4 fields, got " + std::to_string(fields.size()));
    check_id(fields[0]);
    check_id(fields[1]);
    const auto [rit, rnew] = row_index.try_emplace(fields[0], row_ids.size());
    if (rnew) row_ids.push_back(fields[0]);
    const auto [cit, cnew] = col_index.try_emplace(fields[1], col_ids.size());
    if (cnew) col_ids.push_back(fields[1]);
    cells[{rit->second, cit->second}].emplace_back(parse_double(fields[2], path, lineno),
                                                   parse_double(fields[3], path, lineno));
  }
  if (row_ids.empty()) throw InvalidInputError(path + ": no data rows");

  TimeSeriesDataset data;
  data.n = row_ids.size();
  data.p = col_ids.size();
  data.row_ids = std::move(row_ids);
  data.col_ids = std::move(col_ids);
  data.series.resize(data.n * data.p);
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t j = 0; j < data.p; ++j) {
      const auto it = cells.find({i, j});
      if (it == cells.end())
        throw InvalidInputError(path + ": missing cell (" + data.row_ids[i] + ", " +
                                data.col_ids[j] + ")");
      auto& samples = it->second;
      std::sort(samples.begin(), samples.end());
      TimeSeries& ts = data.cell(i, j);
      ts.values.reserve(samples.size());
      for (const auto& [t, v] : samples) ts.values.push_back(v);
      if (samples.size() < 2)
        throw InvalidInputError(path + ": cell (" + data.row_ids[i] + ", " +
                                data.col_ids[j] + ") has fewer than 2 samples");
      ts.sample_interval =
          (samples.back().first - samples.front().first) / (samples.size() - 1);
      if (!(ts.sample_interval > 0.0))
        throw InvalidInputError(path + ": cell (" + data.row_ids[i] + ", " +
                                data.col_ids[j] + ") has non-increasing timestamps");
    }
  }
  return data;
}

TimeSeriesDataset load_dataset_json(const std::string& path) {
  std::ifstream in = open_input(path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
  TimeSeriesDataset data;
  try {
    data.row_ids = root.at("rows").get<std::vector<std::string>>();
    data.col_ids = root.at("cols").get<std::vector<std::string>>();
    data.n = data.row_ids.size();
    data.p = data.col_ids.size();
    data.series.resize(data.n * data.p);
    const json& series = root.at("series");
    for (std::size_t i = 0; i < data.n; ++i) {
      for (std::size_t j = 0; j < data.p; ++j) {
        const std::string key = data.row_ids[i] + "|" + data.col_ids[j];
        const json& cell = series.at(key);
        TimeSeries& ts = data.cell(i, j);
        ts.sample_interval = cell.value("interval", 1.0);
        ts.values = cell.at("values").get<std::vector<double>>();
      }
    }
  } catch (const json::exception& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
  return data;
}

TimeSeriesDataset load_dataset(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
    return load_dataset_json(path);
  return load_dataset_csv(path);
}

void save_dataset_csv(const TimeSeriesDataset& dataset, const std::string& path) {
  for (const auto& id : dataset.row_ids) check_id(id);
  for (const auto& id : dataset.col_ids) check_id(id);
  std::ofstream out = open_output(path);
  out << "row_id,col_id,t,value\n";
  for (std::size_t i = 0; i < dataset.n; ++i) {
    for (std::size_t j = 0; j < dataset.p; ++j) {
      const TimeSeries& ts = dataset.cell(i, j);
      for (std::size_t u = 0; u < ts.values.size(); ++u) {
        out << dataset.row_ids[i] << ',' << dataset.col_ids[j] << ','
            << format_double(static_cast<double>(u) * ts.sample_interval) << ','
            << format_double(ts.values[u]) << '\n';
      }
    }
  }
}

void save_grid_json(const CoefficientGrid& grid, const std::string& path) {
  json root;
  root["n"] = grid.n;
  root["p"] = grid.p;
  root["m"] = grid.m;
  root["grid"] = grid_meta(grid);
  root["row_ids"] = grid.row_ids;
  root["col_ids"] = grid.col_ids;
  json degenerate = json::array();
  for (std::size_t i = 0; i < grid.n; ++i)
    for (std::size_t j = 0; j < grid.p; ++j)
      if (grid.degenerate[i * grid.p + j]) degenerate.push_back({i, j});
  root["degenerate"] = std::move(degenerate);
  json coeffs = json::array();
  for (std::size_t i = 0; i < grid.n; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < grid.p; ++j) {
      const auto cell = grid.cell(i, j);
      row.push_back(std::vector<double>(cell.begin(), cell.end()));
    }
    coeffs.push_back(std::move(row));
  }
  root["coeffs"] = std::move(coeffs);
  std::ofstream out = open_output(path);
  out << root.dump() << '\n';
}

CoefficientGrid load_grid_json(const std::string& path) {
  std::ifstream in = open_input(path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
  CoefficientGrid grid;
  try {
    grid.n = root.at("n").get<std::size_t>();
    grid.p = root.at("p").get<std::size_t>();
    grid.m = root.at("m").get<std::size_t>();
    grid.grid.gap = root.at("grid").at("gap").get<double>();
    grid.grid.length = root.at("grid").at("length").get<std::size_t>();
    grid.row_ids = root.at("row_ids").get<std::vector<std::string>>();
    grid.col_ids = root.at("col_ids").get<std::vector<std::string>>();
    grid.coeffs.resize(grid.n * grid.p * grid.m);
    grid.degenerate.assign(grid.n * grid.p, 0);
    for (const json& pair : root.at("degenerate"))
      grid.degenerate[pair.at(0).get<std::size_t>() * grid.p +
                      pair.at(1).get<std::size_t>()] = 1;
    const json& coeffs = root.at("coeffs");
    if (coeffs.size() != grid.n) throw InvalidInputError(path + ": coeffs shape mismatch");
    for (std::size_t i = 0; i < grid.n; ++i) {
      if (coeffs[i].size() != grid.p)
        throw InvalidInputError(path + ": coeffs shape mismatch");
      for (std::size_t j = 0; j < grid.p; ++j) {
        const auto vec = coeffs[i][j].get<std::vector<double>>();
        if (vec.size() != grid.m)
          throw InvalidInputError(path + ": coefficient vector length mismatch");
        std::copy(vec.begin(), vec.end(), grid.cell(i, j).begin());
      }
    }
  } catch (const json::exception& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
  return grid;
}

void save_model_json(const ModelState& state, std::size_t m, const std::string& path) {
  json root;
  root["structure"] = {{"L", state.structure.L}, {"K", state.structure.K}};
  root["m"] = m;
  root["rho"] = state.rho;
  root["pi"] = state.pi;
  json blocks = json::array();
  for (int ell = 0; ell < state.structure.L; ++ell) {
    for (int k = 0; k < state.structure.K[ell]; ++k) {
      const BlockParams& block = state.block(ell, k);
      // Loadings serialize row-major with explicit dimensions.
      std::vector<double> row_major(block.m() * block.d());
      for (std::size_t r = 0; r < block.m(); ++r)
        for (std::size_t c = 0; c < block.d(); ++c)
          row_major[r * block.d() + c] = block.loadings()[c * block.m() + r];
      blocks.push_back(json{{"col_cluster", ell},
                            {"row_cluster", k},
                            {"d", block.d()},
                            {"loadings", {{"rows", block.m()}, {"cols", block.d()}, {"data", row_major}}},
                            {"mean", block.mean()},
                            {"covariance",
                             {{"rows", block.d()}, {"cols", block.d()}, {"data", block.covariance()}}}});
    }
  }
  root["blocks"] = std::move(blocks);
  std::ofstream out = open_output(path);
  out << root.dump(2) << '\n';
}

std::pair<ModelState, std::size_t> load_model_json(const std::string& path) {
  std::ifstream in = open_input(path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
  ModelState state;
  std::size_t m = 0;
  try {
    state.structure.L = root.at("structure").at("L").get<int>();
    state.structure.K = root.at("structure").at("K").get<std::vector<int>>();
    m = root.at("m").get<std::size_t>();
    state.rho = root.at("rho").get<std::vector<double>>();
    state.pi = root.at("pi").get<std::vector<std::vector<double>>>();
    validate_structure(state.structure);
    state.blocks.resize(state.structure.L);
    for (int ell = 0; ell < state.structure.L; ++ell)
      state.blocks[ell].resize(state.structure.K[ell]);
    std::vector<std::vector<bool>> seen(state.structure.L);
    for (int ell = 0; ell < state.structure.L; ++ell)
      seen[ell].assign(state.structure.K[ell], false);
    for (const json& entry : root.at("blocks")) {
      const int ell = entry.at("col_cluster").get<int>();
      const int k = entry.at("row_cluster").get<int>();
      if (ell < 0 || ell >= state.structure.L || k < 0 || k >= state.structure.K[ell])
        throw InvalidInputError(path + ": block index out of range");
      const std::size_t d = entry.at("d").get<std::size_t>();
      const auto row_major = entry.at("loadings").at("data").get<std::vector<double>>();
      if (row_major.size() != m * d)
        throw InvalidInputError(path + ": loadings dimension mismatch");
      std::vector<double> col_major(m * d);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < d; ++c) col_major[c * m + r] = row_major[r * d + c];
      state.blocks[ell][k] =
          BlockParams(m, d, std::move(col_major), entry.at("mean").get<std::vector<double>>(),
                      entry.at("covariance").at("data").get<std::vector<double>>());
      seen[ell][k] = true;
    }
    for (int ell = 0; ell < state.structure.L; ++ell)
      for (int k = 0; k < state.structure.K[ell]; ++k)
        if (!seen[ell][k])
          throw InvalidInputError(path + ": missing block (" + std::to_string(ell) + "," +
                                  std::to_string(k) + ")");
    state.check_invariants();
  } catch (const json::exception& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
  return {std::move(state), m};
}

void save_partition_csv(const PartitionPair& partition,
                        const CoClusterStructure& structure,
                        const std::vector<std::string>& row_ids,
                        const std::vector<std::string>& col_ids,
                        const std::string& path) {
  validate_partition(partition, row_ids.size(), col_ids.size(), structure);
  for (const auto& id : row_ids) check_id(id);
  for (const auto& id : col_ids) check_id(id);
  std::ofstream out = open_output(path);
  out << "col_id,col_cluster\n";
  for (std::size_t j = 0; j < col_ids.size(); ++j)
    out << col_ids[j] << ',' << partition.col_labels[j] << '\n';
  out << "row_id,col_cluster,row_cluster\n";
  for (int ell = 0; ell < structure.L; ++ell)
    for (std::size_t i = 0; i < row_ids.size(); ++i)
      out << row_ids[i] << ',' << ell << ',' << partition.row_labels[ell][i] << '\n';
}

LoadedPartition load_partition_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line) ||
      split_csv_line(line) != std::vector<std::string>{"col_id", "col_cluster"})
    throw InvalidInputError(path + ": expected header col_id,col_cluster");
  ++lineno;

  LoadedPartition out;
  std::map<std::string, std::size_t> col_index;
  bool in_rows = false;
  std::map<std::string, std::size_t> row_index;
  std::vector<std::pair<std::pair<int, std::size_t>, int>> row_entries;  // ((ell,i),z)

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (!in_rows && fields == std::vector<std::string>{"row_id", "col_cluster", "row_cluster"}) {
      in_rows = true;
      continue;
    }
    if (!in_rows) {
      if (fields.size() != 2)
        throw InvalidInputError(path + ": line " + std::to_string(lineno) +
                                ": expected col_id,col_cluster");
      if (!col_index.try_emplace(fields[0], out.col_ids.size()).second)
        throw InvalidInputError(path + ": duplicate column " + fields[0]);
      out.col_ids.push_back(fields[0]);
      out.partition.col_labels.push_back(parse_int(fields[1], path, lineno));
    } else {
      if (fields.size() != 3)
        throw InvalidInputError(path + ": line " + std::to_string(lineno) +
                                ": expected row_id,col_cluster,row_cluster");
      const auto [it, added] = row_index.try_emplace(fields[0], out.row_ids.size());
      if (added) out.row_ids.push_back(fields[0]);
      row_entries.push_back(
          {{parse_int(fields[1], path, lineno), it->second}, parse_int(fields[2], path, lineno)});
    }
  }
  if (!in_rows) throw InvalidInputError(path + ": missing row section");
  if (out.col_ids.empty() || out.row_ids.empty())
    throw InvalidInputError(path + ": empty partition");

  int L = 0;
  for (int w : out.partition.col_labels) L = std::max(L, w + 1);
  for (const auto& [key, z] : row_entries) L = std::max(L, key.first + 1);
  out.structure.L = L;
  out.structure.K.assign(L, 1);
  out.partition.row_labels.assign(L, std::vector<int>(out.row_ids.size(), -1));
  for (const auto& [key, z] : row_entries) {
    const auto [ell, i] = key;
    if (ell < 0 || z < 0) throw InvalidInputError(path + ": negative cluster index");
    out.partition.row_labels[ell][i] = z;
    out.structure.K[ell] = std::max(out.structure.K[ell], z + 1);
  }
  for (int ell = 0; ell < L; ++ell)
    for (std::size_t i = 0; i < out.row_ids.size(); ++i)
      if (out.partition.row_labels[ell][i] < 0)
        throw InvalidInputError(path + ": missing row label for " + out.row_ids[i] +
                                " in column cluster " + std::to_string(ell));
  validate_partition(out.partition, out.row_ids.size(), out.col_ids.size(), out.structure);
  return out;
}

void save_trace_csv(const std::vector<double>& trace, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "iteration,log_likelihood\n";
  for (std::size_t q = 0; q < trace.size(); ++q)
    out << q << ',' << format_double(trace[q]) << '\n';
}

void save_icl_table_csv(const std::vector<IclEntry>& table, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "L,K_list,icl,loglik,converged\n";
  for (const IclEntry& entry : table) {
    out << entry.structure.L << ',';
    for (int ell = 0; ell < entry.structure.L; ++ell) {
      if (ell > 0) out << ';';
      out << entry.structure.K[ell];
    }
    out << ',' << format_double(entry.icl) << ','
        << (std::isnan(entry.loglik) ? std::string() : format_double(entry.loglik)) << ','
        << (entry.converged ? 1 : 0) << '\n';
  }
}

}  // namespace funclbm
