#pragma once

#include "aks/flow.hpp"
#include "aks/frame.hpp"
#include "aks/loop_element.hpp"
#include "aks/periodicity.hpp"
#include "aks/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace aks {

enum class InitKind { Random, Clifford, Explicit };
const char* init_kind_name(InitKind k);

// Declarative run configuration: flat key/value text with sectioned
// matrix blocks (row-major with explicit dimensions).
struct RunConfig {
  int n = 2;
  int d = 1;  // lowest degree is -d
  Rule rule = Rule::Simple;
  double z0 = 1.0;
  double h = 1e-3;
  std::uint64_t seed = 1;
  InitKind init = InitKind::Random;
  double clifford_a = 0.6;
  double clifford_b = 0.8;
  std::vector<double> grid_min = {0.0, 0.0};
  std::vector<double> grid_max = {1.0, 1.0};
  std::vector<double> spacing = {0.05, 0.05};
  std::string out = "out";
  int z_samples = 64;
  double period_tol = 1e-6;
  int column = 0;  // immersion column, 0 = default n+1
  std::vector<std::vector<double>> periods;
  std::map<int, RMatrix> matrices;  // explicit initial condition, degree -> X_deg

  GridSpec grid() const;             // validates alignment of min/max/spacing
  LoopElement initial_condition() const;
};

// Throws std::runtime_error with a line diagnostic on malformed input.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& file);
std::string serialize_config(const RunConfig& config);

// Seeded sample of the real degree span [-d, 1]: each coefficient is a
// skew-symmetrized uniform matrix with the twist-forbidden blocks zeroed,
// entries in [-1, 1]; identical output for identical seeds.
LoopElement random_initial(int n, int d, std::uint64_t seed);

// Exporters (17 significant digits, '.' decimal, LF endings).
void write_flow_residuals_csv(const std::filesystem::path& file, const FlowResult& flow);
void write_flow_elements(const std::filesystem::path& file, const FlowResult& flow);
void write_immersion_csv(const std::filesystem::path& file,
                         const std::vector<ImmersionSample>& samples);
void write_mesh(const std::filesystem::path& file, const FrameField& frames, int column);
void write_spectral_report(const std::filesystem::path& file, const SpectralRecord& record,
                           const std::vector<MuSample>& mu);
void write_drift_csv(const std::filesystem::path& file, const std::vector<DriftRow>& rows);
void write_period_report(const std::filesystem::path& file, const PeriodReport& report);

// Subcommand drivers shared by the CLI; return process exit codes
// (0 ok, 1 invariant failure, 2 config error).
int run_flow(const RunConfig& config);
int run_frame(const RunConfig& config);
int run_spectral(const RunConfig& config);
int run_period(const RunConfig& config);
int run_clifford(const RunConfig& config);

}  // namespace aks
