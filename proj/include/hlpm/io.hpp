#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "hlpm/grid.hpp"
#include "hlpm/particle.hpp"
#include "hlpm/pde.hpp"
#include "hlpm/testfn.hpp"

namespace hlpm {

// "density_t0.5000.csv" style names
[[nodiscard]] std::string snapshot_name(const std::string& prefix, double t);

void write_density_csv(const std::filesystem::path& path, const DensityField& f);
void write_eta_csv(const std::filesystem::path& path, const EtaField& eta);
// One density_t*.csv and eta_t*.csv per snapshot; returns the file names.
std::vector<std::string> write_trajectory(const std::filesystem::path& dir, const PdeTrajectory& traj,
                                          const std::vector<double>& times, const std::string& tag = "");

// columns t, then one per trace
void write_localtime_csv(const std::filesystem::path& path, const std::vector<LocalTimeTrace>& traces);

[[nodiscard]] nlohmann::json to_json(const ResidualReport& r);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

struct Column {
  std::string name;
  std::vector<double> values;
};
[[nodiscard]] std::vector<Column> read_csv(const std::filesystem::path& path);

}  // namespace hlpm
