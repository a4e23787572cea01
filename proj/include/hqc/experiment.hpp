// experiment.hpp — Configuration, ensemble runs, and CSV output

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hqc/classical.hpp"
#include "hqc/model.hpp"
#include "hqc/sme.hpp"

namespace hqc {

inline constexpr std::string_view kVersion = "hqc 0.1.0";

/// Config problem tied to a key and (when known) a 1-based source line.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string key, std::size_t line, const std::string& reason);

    const std::string& key() const { return key_; }
    /// 0 when the value did not come from a source line (default or override).
    std::size_t line() const { return line_; }

private:
    std::string key_;
    std::size_t line_;
};

/// Raised when a run cannot produce a trustworthy result.
class ExperimentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RecordMode { Shared, Independent };

struct FilterSelection {
    bool sme{true};
    bool qekf{true};

    bool any() const { return sme || qekf; }
    bool operator==(const FilterSelection&) const = default;
};

struct ExperimentConfig {
    double u{0.25};
    double v{0.125};
    double q0{0.17677669529663687};  // 1/(4 sqrt 2)
    double k1{0.55};
    std::vector<std::size_t> fock_dims{2, 2};
    double dt{1e-3};
    double t_final{20.0};
    std::size_t n_traj{500};
    std::uint64_t base_seed{1};
    double p0_scale{0.25};
    double xi{0.0};
    std::optional<Vector4> x0_override;
    FilterSelection filters;
    RecordMode record_mode{RecordMode::Shared};
    std::string out_path{"run.csv"};

    OuParams ou() const { return OuParams{u, v, q0}; }
    TimeGrid grid() const { return TimeGrid::over(t_final, dt); }
};

/// Parses flat `key = value` lines; `#` starts a comment. Unset keys keep
/// their defaults. The result is validated.
ExperimentConfig parse_config(std::string_view source);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError naming the first key that violates an invariant.
void validate(const ExperimentConfig& cfg);

/// Canonical `key = value` text; parse_config(config_to_text(c)) == c.
std::string config_to_text(const ExperimentConfig& cfg);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

struct RunOptions {
    /// Worker threads; 0 uses the hardware concurrency.
    unsigned workers{0};
    /// Number of leading trajectories whose full series are kept in the result.
    std::size_t keep_trajectories{1};
    SmeOptions sme;
};

struct TrajectoryResult {
    std::size_t index{0};
    bool aborted{false};
    std::string abort_reason;
    std::vector<double> q_hat_sme;
    std::vector<double> q_hat_qekf;
    std::vector<Vector4> quad_sme;
    std::vector<Vector4> quad_qekf;
    std::uint64_t sme_record_checksum{0};
    std::uint64_t qekf_record_checksum{0};
};

struct AbortEntry {
    std::size_t index;
    std::string reason;
};

struct RunResult {
    ExperimentConfig config;
    TimeGrid grid;
    std::string version{kVersion};

    EnsembleStats classical;
    /// Ensemble means over completed trajectories; empty when the filter is off.
    std::vector<double> q_hat_sme_mean;
    std::vector<double> q_hat_qekf_mean;
    /// Q1 estimates of trajectory 0; NaN-filled when unavailable.
    std::vector<double> q1_hat_sme;
    std::vector<double> q1_hat_qekf;

    /// Leading trajectories, up to RunOptions::keep_trajectories.
    std::vector<TrajectoryResult> trajectories;
    /// One (sme, qekf) record checksum pair per trajectory index.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> record_checksums;
    std::vector<AbortEntry> aborts;
    std::size_t completed{0};

    /// Worst SME state health over every step of every completed trajectory.
    StateHealth sme_health;
    std::size_t projected_steps{0};
    /// Worst QEKF covariance health.
    double min_eigenvalue_P{0.0};
    double max_asymmetry_P{0.0};
};

/// FNV-1a over the IEEE-754 bytes of the increments.
std::uint64_t record_checksum(std::span<const double> dy);

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// One run per xi value, otherwise identical configuration.
std::vector<RunResult> run_perturbation_sweep(const ExperimentConfig& cfg, std::span<const double> xis,
                                              const RunOptions& options = {});

inline constexpr std::string_view kCsvHeader =
    "t,q_true_mean,q_hat_sme_mean,q_hat_qekf_mean,q1_hat_sme,q1_hat_qekf,n_traj,seed";

/// Writes the CSV and a `<path>.meta` sidecar.
void write_csv(const RunResult& result, const std::filesystem::path& path);
std::string csv_text(const RunResult& result);
std::string metadata_text(const RunResult& result);
std::filesystem::path metadata_path(const std::filesystem::path& csv_path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::vector<double> column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text);

}  // namespace hqc
