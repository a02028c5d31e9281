#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dcm/config.hpp"
#include "dcm/interp.hpp"
#include "dcm/scheme.hpp"

namespace dcm {

struct StudyRecord {
  double h = 0.0;
  int stencil_width = 0;
  bool ok = true;
  std::string failure;  // stage and message when !ok
  std::optional<double> sup_err_K;     // nodes with d(x, boundary) >= delta
  std::optional<double> interp_err_K;  // I(u_h) - u on a grid of K
  std::optional<double> sup_err_all;
  std::optional<double> shell_err;  // interior nodes with d(x, boundary) <= 2h
  double ma_mass = 0.0;
  double lipschitz_K = 0.0;
  double sup_norm = 0.0;
  int iters = 0;
  double seconds = 0.0;
  std::optional<double> order;  // against the previous (coarser) record
  double final_residual = 0.0;
  bool discrete_convex = true;
  double barrier_violation = 0.0;
  bool barrier_holds = true;
  double abp_empirical_C = 0.0;
  bool abp_pass = true;
};

struct ShellRow {
  double h = 0.0;
  int shell = 1;          // distance shell * h
  double distance = 0.0;  // shell * h
  std::size_t nodes = 0;
  std::optional<double> abs_err;  // max |I(u_h) - u| when u is known
  double deficit = 0.0;           // max(0, U - I(u_h))
  double barrier_excess = 0.0;    // max(0, I(u_h) - w_h)
};

struct BoundaryProbe {
  std::vector<ShellRow> rows;
  std::optional<double> alpha;  // least-squares slope of log deficit against log distance
  std::size_t fit_points = 0;
  void write_csv(std::ostream& out) const;
};

struct ConvexityProbeRow {
  double h = 0.0;
  double max_violation = 0.0;
  double eps_constant = 0.0;  // max_violation / h
};

struct ConvexityProbe {
  std::vector<ConvexityProbeRow> rows;
  bool shrinking = true;  // violation at the finest h below the coarser one (or negligible)
};

// Solutions on successively finer lattices of one domain.
BoundaryProbe boundary_adherence_probe(const std::vector<MeshFunction>& solutions,
                                       const ScalarField& g,
                                       const std::optional<ScalarField>& exact = std::nullopt);

ConvexityProbe convexity_of_limit_probe(const std::vector<MeshFunction>& solutions,
                                        const CompactSet& K, int segments, std::uint64_t seed);

struct StudyReport {
  std::string problem;
  double delta = 0.0;
  bool has_exact = false;
  std::vector<StudyRecord> records;
  BoundaryProbe boundary;
  ConvexityProbe convexity;
  bool mass_gate_ok = true;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
  void write_table_csv(std::ostream& out, bool include_timing) const;
  void write_json(std::ostream& out, bool include_timing) const;
};

// Solves on every spacing of config.h_values and assembles the diagnostics.
// Stage failures are recorded per spacing and the study continues.
StudyReport run_refinement_study(const RunConfig& config);

// Writes table.csv, report.json and boundary_probe.csv into `dir`.
void write_study_outputs(const StudyReport& report, const std::string& dir, bool include_timing);

// Write-to-temporary then rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace dcm
