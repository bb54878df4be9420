#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "canon4/catalog.hpp"
#include "canon4/reconstruct.hpp"

namespace canon4 {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kSchemaTag = "canon4/v1";

/// Named per-node columns on a lattice (v-major rows) plus a free-form report.
struct GridOutput {
  std::string command;
  std::string source;
  Lattice lattice;
  std::vector<std::pair<std::string, std::vector<double>>> columns;
  ojson report = ojson::object();

  void add(const std::string& name, std::vector<double> values);
  const std::vector<double>* column(const std::string& name) const;
};

ojson to_json(const GridOutput& g);
/// "# canon4/v1 grid ..." line, "# report key=value" lines, a header row, then v-major rows.
void write_csv(std::ostream& os, const GridOutput& g);
void write_json(std::ostream& os, const ojson& j);

/// Reads a grid written by write_csv or to_json (format detected from the content).
GridOutput read_grid(const std::string& text);

SurfaceDefinition surface_from_json(const nlohmann::json& j);
ojson surface_to_json(const SurfaceDefinition& s);

/// Determining data plus the optional initial frame of a data file.
struct DataFile {
  std::string name;
  DeterminingData data;
  FrameState initial;
};

DataFile data_from_json(const nlohmann::json& j, const Tolerances& tol = {});
DataFile data_from_definition(const DataDefinition& d);

/// Runs the command line `args` (without the program name). Returns the exit code:
/// 0 pass, 1 check failure, 2 input or domain error, 3 compatibility gate.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace canon4
