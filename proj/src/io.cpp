#include "hlpm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hlpm/errors.hpp"

namespace hlpm {

namespace {

std::ofstream open(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.precision(17);
  return out;
}

std::string trace_column(const LocalTimeTrace& tr) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "L_%s_eps%g", tr.kind == LocalTimeKind::symmetric ? "symmetric" : "one_sided",
                tr.eps);
  return buf;
}

}  // namespace

std::string snapshot_name(const std::string& prefix, double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_t%.4f.csv", prefix.c_str(), t);
  return buf;
}

void write_density_csv(const std::filesystem::path& path, const DensityField& f) {
  auto out = open(path);
  out << "x,u\n";
  for (std::size_t i = 0; i < f.size(); ++i) out << f.grid().center(i) << ',' << f[i] << '\n';
}

void write_eta_csv(const std::filesystem::path& path, const EtaField& eta) {
  auto out = open(path);
  out << "x,eta\n";
  for (std::size_t i = 0; i < eta.values.size(); ++i) out << eta.grid.center(i) << ',' << eta.values[i] << '\n';
}

std::vector<std::string> write_trajectory(const std::filesystem::path& dir, const PdeTrajectory& traj,
                                          const std::vector<double>& times, const std::string& tag) {
  std::vector<std::string> names;
  for (double t : times) {
    const auto& s = traj.at_time(t);
    const auto d = snapshot_name("density" + tag, s.u.t());
    const auto e = snapshot_name("eta" + tag, s.u.t());
    write_density_csv(dir / d, s.u);
    write_eta_csv(dir / e, s.eta);
    names.push_back(d);
    names.push_back(e);
  }
  return names;
}

void write_localtime_csv(const std::filesystem::path& path, const std::vector<LocalTimeTrace>& traces) {
  auto out = open(path);
  out << 't';
  for (const auto& tr : traces) out << ',' << trace_column(tr);
  out << '\n';
  if (traces.empty()) return;
  const auto& times = traces.front().times;
  for (std::size_t k = 0; k < times.size(); ++k) {
    out << times[k];
    for (const auto& tr : traces) out << ',' << (k < tr.values.size() ? tr.values[k] : 0.0);
    out << '\n';
  }
}

nlohmann::json to_json(const ResidualReport& r) {
  auto arr = nlohmann::json::array();
  for (const auto& e : r.entries) {
    arr.push_back({{"form", to_string(e.form)}, {"phi_id", e.phi_id}, {"t", e.t}, {"value", e.value}, {"dx", e.dx},
                   {"dt", e.dt}});
  }
  return arr;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto out = open(path);
  out << doc.dump(2) << '\n';
}

std::vector<Column> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
  std::vector<Column> cols;
  {
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) cols.push_back({name, {}});
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= cols.size()) throw ValidationError(path.string() + ": too many fields on row " + std::to_string(row));
      cols[k++].values.push_back(std::stod(cell));
    }
    if (k != cols.size()) throw ValidationError(path.string() + ": short row " + std::to_string(row));
  }
  return cols;
}

}  // namespace hlpm
