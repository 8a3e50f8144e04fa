#ifndef LGDM_CLI_HPP
#define LGDM_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "lgdm/del.hpp"
#include "lgdm/systems.hpp"

namespace lgdm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kSchemaVersion = 1;

class IoError : public Error {
 public:
  using Error::Error;
};

enum class SystemKind { kPairMidpoint, kPairStormerVerlet, kRigidBody, kHeavyTop };

std::string to_string(SystemKind kind);

struct RunConfig {
  SystemKind system = SystemKind::kPairMidpoint;
  double h = 0.0;
  int steps = 0;

  // pair systems
  Vector x0;
  Vector u0;
  Matrix mass;
  Potential potential;

  // SO(3) systems
  Vector eta0;
  Vector gamma0;
  so3::Mat3 anchor = so3::Mat3::Identity();
  so3::Vec3 inertia = so3::Vec3::Ones();
  HeavyTopParameters heavy_top;

  NewtonOptions newton;
  std::filesystem::path output;
};

/// Parses a JSON config (comments allowed). Relative output paths resolve
/// against base_dir. Throws ConfigurationError naming the offending field.
RunConfig parse_config(const std::string& text,
                       const std::filesystem::path& base_dir = {});

/// Reads and parses a config file; IoError if it cannot be read.
RunConfig load_config(const std::filesystem::path& path);

/// Builds the chart + Lagrangian for a config.
std::shared_ptr<const DiscreteLagrangianSystem> build_system(const RunConfig& cfg);

int cmd_simulate(const std::filesystem::path& config_path, std::ostream& err);

/// Classical baseline for pair systems, written with the simulate CSV layout.
/// method: "midpoint", "leapfrog" or "rk2"; empty picks the classical
/// counterpart of the configured system.
int cmd_reference(const std::filesystem::path& config_path,
                  const std::string& method,
                  const std::optional<std::filesystem::path>& output,
                  std::ostream& err);

int cmd_check(const std::string& chart, int samples, double tol,
              std::uint64_t seed, std::ostream& out, std::ostream& err);

/// Full command line entry point.
int run(int argc, char** argv);

}  // namespace lgdm::cli

#endif  // LGDM_CLI_HPP
