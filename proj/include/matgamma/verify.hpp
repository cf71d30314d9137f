#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "matgamma/models.hpp"

namespace matgamma {

struct ExperimentConfig {
  std::string id;
  nlohmann::json params;       // dimensions, counts, tolerances
  std::uint64_t seed = 0;      // mandatory: every run is reproducible
  std::string out_path;        // report JSON destination; empty = don't write
  std::string dump_dir;        // raw-draw CSV destination; empty = no dump
  bool certifying = true;      // false when the seed was freshly drawn
};

struct ExperimentReport {
  std::string id;
  nlohmann::json inputs;                     // echoed params + seed
  std::map<std::string, double> statistics;  // named reals; pass derives from
                                             // these plus the tolerances
  bool pass = false;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  bool certifying = true;

  nlohmann::json to_json() const;
};

struct ExperimentInfo {
  std::string id;
  std::string description;
  nlohmann::json default_params;
  std::uint64_t default_seed;
};

// All registered experiments with their bundled default configs.
const std::vector<ExperimentInfo>& experiment_registry();

// Dispatches to the registered experiment; throws std::invalid_argument for
// unknown ids or schema violations.  Statistics are bitwise reproducible
// for a fixed (params, seed).
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Recomputes the pass flag from statistics and tolerances alone, so stored
// reports can be re-checked offline.
bool derive_pass(const std::string& id,
                 const std::map<std::string, double>& statistics,
                 const nlohmann::json& params);

ExperimentConfig default_config(const std::string& id);

// Shared building blocks for experiments and tests.
Matrix random_spd(int dim, RngStream& rng, double eig_lo, double eig_hi);
Matrix random_symmetric(int dim, RngStream& rng, double spectral_radius);

// T1 with A_jj = scale_j * I_n and zero off-diagonal blocks: the
// Kronecker-separable subfamily on which the closed-form S-density is exact.
T1Spec make_t1_isotropic(int n, const Vector& scales, const Matrix& frame);

// T1 with genuine off-diagonal coupling blocks of magnitude eps.
T1Spec make_t1_coupled(int n, int k, double eps, std::uint64_t seed);

}  // namespace matgamma
