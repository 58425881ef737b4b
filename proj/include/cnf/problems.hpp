#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cnf/alpf.hpp"
#include "cnf/model.hpp"

namespace cnf {

enum class CatalogId { ex1a, ex1b, ex2, ex3, ex4, ex5, ex7, ex8, ex9 };

std::string_view to_string(CatalogId id);
/// Accepts the lower-case keys ("ex7", ...); throws std::invalid_argument.
CatalogId catalog_id_from_string(std::string_view key);
std::vector<CatalogId> all_catalog_ids();

/// Zero/unset fields take the entry's default.
struct CatalogParams {
  int n = 0;
  double lambda = 0.0;
  int I = 0;  // EX3 sample count
  std::uint64_t seed = 1;
};

struct KnownSolution {
  std::string description;
  std::optional<Eigen::VectorXd> x;
  std::optional<double> value;
};

struct CatalogEntry {
  CatalogId id;
  CnfProblem problem;
  Point start;
  /// Solver parameters used for the example's reported runs.
  AlpfConfig run_config;
  /// Decomposed-run parameters (sigma_1 in rho0), where reported.
  std::optional<AlpfConfig> decomposed_config;
  std::optional<KnownSolution> known;
  /// Relaxed 0-norm column (sum of squared indicator variables), where meaningful.
  std::function<double(const Point&)> surrogate;
  /// Modeling caveats.
  std::string notes;
};

CatalogEntry build(CatalogId id, const CatalogParams& params = {});

/// Lifts x through the entry's lift map.
Point lift(const CatalogEntry& entry, const Eigen::VectorXd& x);

/// Synthetic EX3 data: rows a_i and targets b_i, deterministic in the seed.
struct Ex3Data {
  Eigen::MatrixXd a;  // I x n
  Eigen::VectorXd b;
};
Ex3Data ex3_data(int n, int I, std::uint64_t seed);

}  // namespace cnf
