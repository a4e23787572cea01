// experiment.cpp — Configuration, ensemble runs, and CSV output

#include "hqc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <system_error>
#include <thread>

#include "hqc/qekf.hpp"

namespace hqc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::string format_double(double x, bool shortest)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = shortest ? std::to_chars(buf, buf + sizeof buf, x)
                              : std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string format_hex(std::uint64_t x)
{
    char buf[16];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, 16);
    const std::string digits(buf, res.ptr);
    return std::string(16 - digits.size(), '0') + digits;
}

std::optional<double> to_double(std::string_view s)
{
    if (s == "nan") return kNaN;
    double x{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return x;
}

template <typename Int>
std::optional<Int> to_integer(std::string_view s)
{
    Int x{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return x;
}

using LineMap = std::map<std::string, std::size_t, std::less<>>;

std::size_t line_of(const LineMap& lines, const std::string& key)
{
    const auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
}

void validate_with_lines(const ExperimentConfig& c, const LineMap& lines)
{
    auto fail = [&](const std::string& key, const std::string& reason) {
        throw ConfigError(key, line_of(lines, key), reason);
    };
    if (!(c.u > 0.0) || !std::isfinite(c.u)) fail("u", "must be > 0 (the cavity analog needs a positive decay rate)");
    if (c.v == 0.0 || !std::isfinite(c.v)) fail("v", "must be finite and non-zero");
    if (!std::isfinite(c.q0)) fail("q0", "must be finite");
    if (!(c.k1 > 0.0) || !std::isfinite(c.k1)) fail("k1", "must be > 0");
    if (c.fock_dims.size() != 2) fail("fock_dims", "must list exactly two truncation dimensions");
    for (std::size_t d : c.fock_dims) {
        if (d < 2) fail("fock_dims", "each truncation dimension must be >= 2");
    }
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) fail("dt", "must be > 0");
    if (!(c.t_final >= c.dt) || !std::isfinite(c.t_final)) fail("t_final", "must be >= dt");
    if (c.n_traj < 1) fail("n_traj", "must be >= 1");
    if (!(c.p0_scale >= 0.0) || !std::isfinite(c.p0_scale)) fail("p0_scale", "must be finite and >= 0");
    if (!std::isfinite(c.xi)) fail("xi", "must be finite");
    if (c.x0_override && !c.x0_override->allFinite()) fail("x0_override", "entries must be finite");
    if (c.out_path.empty()) fail("out_path", "must not be empty");
}

void assign(ExperimentConfig& c, const std::string& key, std::string_view value, std::size_t line)
{
    auto fail = [&](const std::string& reason) { throw ConfigError(key, line, reason); };
    auto real = [&]() {
        const auto x = to_double(value);
        if (!x) fail("cannot parse '" + std::string(value) + "' as a number");
        return *x;
    };
    auto count = [&]() {
        const auto x = to_integer<std::uint64_t>(value);
        if (!x) fail("cannot parse '" + std::string(value) + "' as a non-negative integer");
        return *x;
    };

    if (key == "u") c.u = real();
    else if (key == "v") c.v = real();
    else if (key == "q0") c.q0 = real();
    else if (key == "k1") c.k1 = real();
    else if (key == "dt") c.dt = real();
    else if (key == "t_final") c.t_final = real();
    else if (key == "p0_scale") c.p0_scale = real();
    else if (key == "xi") c.xi = real();
    else if (key == "n_traj") c.n_traj = static_cast<std::size_t>(count());
    else if (key == "base_seed") c.base_seed = count();
    else if (key == "fock_dims") {
        c.fock_dims.clear();
        for (std::string_view part : split(value, ',')) {
            const auto d = to_integer<std::size_t>(part);
            if (!d) fail("cannot parse '" + std::string(part) + "' as a dimension");
            c.fock_dims.push_back(*d);
        }
    } else if (key == "x0_override") {
        if (value == "none" || value.empty()) {
            c.x0_override.reset();
        } else {
            const auto parts = split(value, ',');
            if (parts.size() != 4) fail("expected 4 comma-separated values (Q1, P1, Q2, P2) or 'none'");
            Vector4 x;
            for (std::size_t i = 0; i < 4; ++i) {
                const auto xi = to_double(parts[i]);
                if (!xi) fail("cannot parse '" + std::string(parts[i]) + "' as a number");
                x(static_cast<Eigen::Index>(i)) = *xi;
            }
            c.x0_override = x;
        }
    } else if (key == "filters") {
        c.filters = FilterSelection{false, false};
        if (value != "none" && !value.empty()) {
            for (std::string_view part : split(value, ',')) {
                if (part == "sme") c.filters.sme = true;
                else if (part == "qekf") c.filters.qekf = true;
                else fail("unknown filter '" + std::string(part) + "' (expected sme, qekf, or none)");
            }
        }
    } else if (key == "record_mode") {
        if (value == "shared") c.record_mode = RecordMode::Shared;
        else if (value == "independent") c.record_mode = RecordMode::Independent;
        else fail("expected 'shared' or 'independent'");
    } else if (key == "out_path") {
        c.out_path = std::string(value);
    } else {
        throw ConfigError(key, line, "unknown key");
    }
}

struct Outcome {
    bool aborted{false};
    std::string reason;
    std::vector<double> q_hat_sme, q_hat_qekf;
    std::vector<Vector4> quad_sme, quad_qekf;
    std::uint64_t sme_checksum{0}, qekf_checksum{0};
    StateHealth health;
    bool has_health{false};
    std::size_t projected_steps{0};
    double min_eig_P{std::numeric_limits<double>::infinity()};
    double max_asym_P{0.0};
};

struct RunContext {
    const ExperimentConfig& cfg;
    const RunOptions& options;
    TimeGrid grid;
    CombinedModel model;
    SmeSystem system;
    Readout readout;
    DensityState rho0;
    EkfState ekf0;
};

void absorb_health(Outcome& out, const SmeTrajectory& traj)
{
    out.health = out.has_health ? StateHealth::worst(out.health, traj.worst_health) : traj.worst_health;
    out.has_health = true;
    out.projected_steps += traj.projected_steps;
}

Outcome run_trajectory(const RunContext& ctx, std::size_t index)
{
    Outcome out;
    SmeOptions sme_opts = ctx.options.sme;
    sme_opts.keep_states = false;
    try {
        Rng truth_rng = make_stream(ctx.cfg.base_seed, index, StreamTag::Truth);
        SmeTrajectory truth = simulate_truth(ctx.system, ctx.readout, ctx.rho0, ctx.grid, truth_rng, sme_opts);
        truth.record.seed = ctx.cfg.base_seed;
        absorb_health(out, truth);

        if (ctx.cfg.filters.sme) {
            SmeTrajectory filtered = filter_record(ctx.system, ctx.readout, ctx.rho0, truth.record, sme_opts);
            absorb_health(out, filtered);
            out.q_hat_sme = std::move(filtered.q_hat);
            out.quad_sme = std::move(filtered.quad_hat);
            out.sme_checksum = record_checksum(truth.record.dy);
        }
        if (ctx.cfg.filters.qekf) {
            MeasurementRecord record;
            if (ctx.cfg.record_mode == RecordMode::Shared) {
                record = std::move(truth.record);
            } else {
                Rng rng = make_stream(ctx.cfg.base_seed, index, StreamTag::IndependentRecord);
                SmeTrajectory other = simulate_truth(ctx.system, ctx.readout, ctx.rho0, ctx.grid, rng, sme_opts);
                absorb_health(out, other);
                record = std::move(other.record);
            }
            out.qekf_checksum = record_checksum(record.dy);
            QekfTrajectory est = run_qekf(ctx.model, ctx.ekf0, record);
            out.q_hat_qekf = std::move(est.q_hat);
            out.quad_qekf.reserve(est.x_hat.size());
            for (const Eigen::VectorXd& x : est.x_hat) out.quad_qekf.emplace_back(x);
            out.min_eig_P = est.min_eigenvalue_P;
            out.max_asym_P = est.max_asymmetry_P;
        }
    } catch (const NumericalInstability& e) {
        out = Outcome{};
        out.aborted = true;
        out.reason = e.what();
    }
    return out;
}

std::vector<double> q1_series(const std::vector<Vector4>& quads)
{
    std::vector<double> out;
    out.reserve(quads.size());
    for (const Vector4& x : quads) out.push_back(x(index(Quadrature::Q1)));
    return out;
}

}  // namespace

ConfigError::ConfigError(std::string key, std::size_t line, const std::string& reason)
    : std::invalid_argument((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + "key '" + key +
                            "': " + reason),
      key_(std::move(key)),
      line_(line)
{
}

ExperimentConfig parse_config(std::string_view source)
{
    ExperimentConfig cfg;
    LineMap lines;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= source.size()) {
        const auto end = source.find('\n', start);
        std::string_view line = source.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        start = end == std::string_view::npos ? source.size() + 1 : end + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(std::string(line), line_no, "expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(key, line_no, "missing key before '='");
        if (lines.contains(key)) {
            throw ConfigError(key, line_no, "duplicate key (first set on line " + std::to_string(lines[key]) + ")");
        }
        assign(cfg, key, value, line_no);
        lines[key] = line_no;
    }
    validate_with_lines(cfg, lines);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open config '" + path.string() + "': " + std::generic_category().message(errno));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void validate(const ExperimentConfig& cfg) { validate_with_lines(cfg, {}); }

std::string config_to_text(const ExperimentConfig& c)
{
    auto real = [](double x) { return format_double(x, true); };
    std::ostringstream out;
    out << "u = " << real(c.u) << '\n'
        << "v = " << real(c.v) << '\n'
        << "q0 = " << real(c.q0) << '\n'
        << "k1 = " << real(c.k1) << '\n';
    out << "fock_dims = ";
    for (std::size_t i = 0; i < c.fock_dims.size(); ++i) out << (i ? "," : "") << c.fock_dims[i];
    out << '\n'
        << "dt = " << real(c.dt) << '\n'
        << "t_final = " << real(c.t_final) << '\n'
        << "n_traj = " << c.n_traj << '\n'
        << "base_seed = " << c.base_seed << '\n'
        << "p0_scale = " << real(c.p0_scale) << '\n'
        << "xi = " << real(c.xi) << '\n';
    out << "x0_override = ";
    if (c.x0_override) {
        for (Eigen::Index i = 0; i < 4; ++i) out << (i ? "," : "") << real((*c.x0_override)(i));
    } else {
        out << "none";
    }
    out << '\n';
    out << "filters = ";
    if (!c.filters.any()) out << "none";
    else if (c.filters.sme && c.filters.qekf) out << "sme,qekf";
    else out << (c.filters.sme ? "sme" : "qekf");
    out << '\n'
        << "record_mode = " << (c.record_mode == RecordMode::Shared ? "shared" : "independent") << '\n'
        << "out_path = " << c.out_path << '\n';
    return out.str();
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b)
{
    const bool x0_equal = a.x0_override.has_value() == b.x0_override.has_value() &&
                          (!a.x0_override || *a.x0_override == *b.x0_override);
    return a.u == b.u && a.v == b.v && a.q0 == b.q0 && a.k1 == b.k1 && a.fock_dims == b.fock_dims &&
           a.dt == b.dt && a.t_final == b.t_final && a.n_traj == b.n_traj && a.base_seed == b.base_seed &&
           a.p0_scale == b.p0_scale && a.xi == b.xi && x0_equal && a.filters == b.filters &&
           a.record_mode == b.record_mode && a.out_path == b.out_path;
}

std::uint64_t record_checksum(std::span<const double> dy)
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (double x : dy) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &x, sizeof x);
        for (unsigned char byte : bytes) {
            hash ^= byte;
            hash *= 0x100000001b3ULL;
        }
    }
    return hash;
}

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options)
{
    validate(cfg);
    RunResult result;
    result.config = cfg;
    result.grid = cfg.grid();
    const TimeGrid& grid = result.grid;
    const OuParams ou = cfg.ou();

    {
        EnsembleAccumulator acc(grid);
        for (std::size_t i = 0; i < cfg.n_traj; ++i) {
            Rng rng = make_stream(cfg.base_seed, i, StreamTag::Classical);
            acc.add(simulate_ou(ou, grid, rng).q);
        }
        result.classical = acc.stats();
    }
    result.q1_hat_sme.assign(grid.points(), kNaN);
    result.q1_hat_qekf.assign(grid.points(), kNaN);
    if (!cfg.filters.any()) return result;

    CombinedModel model = build_combined_model(cfg.k1, map_classical_to_cavity(ou), SpaceLayout(cfg.fock_dims));
    DensityState rho0 = default_initial_state(model.layout);
    const Vector4 x0_base = cfg.x0_override.value_or(quadrature_expectations(model, rho0));
    RunContext ctx{cfg,
                   options,
                   grid,
                   model,
                   SmeSystem::from_model(model),
                   Readout::from_model(model),
                   rho0,
                   initial_ekf_state(x0_base, cfg.xi, cfg.p0_scale)};

    EnsembleAccumulator sme_mean(grid);
    EnsembleAccumulator qekf_mean(grid);
    result.record_checksums.resize(cfg.n_traj);
    result.min_eigenvalue_P = std::numeric_limits<double>::infinity();
    bool have_health = false;

    const unsigned workers = options.workers > 0 ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    const std::size_t batch = static_cast<std::size_t>(workers) * 2;
    std::vector<Outcome> slots;

    for (std::size_t first = 0; first < cfg.n_traj; first += batch) {
        const std::size_t count = std::min(batch, cfg.n_traj - first);
        slots.assign(count, Outcome{});
        if (workers == 1) {
            for (std::size_t j = 0; j < count; ++j) slots[j] = run_trajectory(ctx, first + j);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < std::min<std::size_t>(workers, count); ++w) {
                pool.emplace_back([&] {
                    for (std::size_t j = next++; j < count; j = next++) slots[j] = run_trajectory(ctx, first + j);
                });
            }
        }

        // Ordered reduction: trajectory index order regardless of scheduling.
        for (std::size_t j = 0; j < count; ++j) {
            const std::size_t i = first + j;
            Outcome& out = slots[j];
            if (out.aborted) {
                result.aborts.push_back({i, out.reason});
                continue;
            }
            ++result.completed;
            result.record_checksums[i] = {out.sme_checksum, out.qekf_checksum};
            if (cfg.filters.sme) sme_mean.add(out.q_hat_sme);
            if (cfg.filters.qekf) qekf_mean.add(out.q_hat_qekf);
            if (out.has_health) {
                result.sme_health = have_health ? StateHealth::worst(result.sme_health, out.health) : out.health;
                have_health = true;
            }
            result.projected_steps += out.projected_steps;
            result.min_eigenvalue_P = std::min(result.min_eigenvalue_P, out.min_eig_P);
            result.max_asymmetry_P = std::max(result.max_asymmetry_P, out.max_asym_P);
            if (i == 0) {
                if (cfg.filters.sme) result.q1_hat_sme = q1_series(out.quad_sme);
                if (cfg.filters.qekf) result.q1_hat_qekf = q1_series(out.quad_qekf);
            }
            if (i < options.keep_trajectories) {
                result.trajectories.push_back(TrajectoryResult{i, false, {}, std::move(out.q_hat_sme),
                                                               std::move(out.q_hat_qekf), std::move(out.quad_sme),
                                                               std::move(out.quad_qekf), out.sme_checksum,
                                                               out.qekf_checksum});
            }
        }
    }

    if (result.aborts.size() * 100 > cfg.n_traj) {
        std::ostringstream msg;
        msg << result.aborts.size() << " of " << cfg.n_traj << " trajectories aborted (limit 1%):";
        for (const AbortEntry& a : result.aborts) msg << "\n  trajectory " << a.index << ": " << a.reason;
        throw ExperimentError(msg.str());
    }
    if (cfg.filters.sme) {
        result.q_hat_sme_mean = sme_mean.count() ? sme_mean.stats().mean : std::vector<double>(grid.points(), kNaN);
    }
    if (cfg.filters.qekf) {
        result.q_hat_qekf_mean = qekf_mean.count() ? qekf_mean.stats().mean : std::vector<double>(grid.points(), kNaN);
    }
    return result;
}

std::vector<RunResult> run_perturbation_sweep(const ExperimentConfig& cfg, std::span<const double> xis,
                                              const RunOptions& options)
{
    std::vector<RunResult> results;
    results.reserve(xis.size());
    for (double xi : xis) {
        ExperimentConfig c = cfg;
        c.xi = xi;
        results.push_back(run_experiment(c, options));
    }
    return results;
}

std::string csv_text(const RunResult& r)
{
    auto value = [](const std::vector<double>& series, std::size_t k) {
        return format_double(series.empty() ? kNaN : series[k], false);
    };
    std::string out(kCsvHeader);
    out += '\n';
    const std::string n_traj = std::to_string(r.config.n_traj);
    const std::string seed = std::to_string(r.config.base_seed);
    for (std::size_t k = 0; k < r.grid.points(); ++k) {
        out += format_double(r.grid.t(k), false);
        out += ',' + value(r.classical.mean, k);
        out += ',' + value(r.q_hat_sme_mean, k);
        out += ',' + value(r.q_hat_qekf_mean, k);
        out += ',' + value(r.q1_hat_sme, k);
        out += ',' + value(r.q1_hat_qekf, k);
        out += ',' + n_traj + ',' + seed + '\n';
    }
    return out;
}

std::string metadata_text(const RunResult& r)
{
    std::ostringstream out;
    out << config_to_text(r.config);
    out << "# version: " << r.version << '\n'
        << "# completed: " << r.completed << '\n'
        << "# aborted: " << r.aborts.size() << '\n';
    for (const AbortEntry& a : r.aborts) out << "# abort " << a.index << ": " << a.reason << '\n';
    auto checksum = [&](bool enabled, std::uint64_t value) { return enabled ? format_hex(value) : std::string("-"); };
    for (std::size_t i = 0; i < r.record_checksums.size(); ++i) {
        const bool aborted = std::any_of(r.aborts.begin(), r.aborts.end(), [i](const AbortEntry& a) { return a.index == i; });
        if (aborted) continue;
        out << "# record " << i << ": sme=" << checksum(r.config.filters.sme, r.record_checksums[i].first)
            << " qekf=" << checksum(r.config.filters.qekf, r.record_checksums[i].second) << '\n';
    }
    return out.str();
}

std::filesystem::path metadata_path(const std::filesystem::path& csv_path)
{
    return std::filesystem::path(csv_path.string() + ".meta");
}

void write_csv(const RunResult& result, const std::filesystem::path& path)
{
    auto write_file = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write '" + p.string() + "': " + std::generic_category().message(errno));
        }
        out << text;
        out.flush();
        if (!out) {
            throw std::runtime_error("write to '" + p.string() + "' failed: " + std::generic_category().message(errno));
        }
    };
    write_file(path, csv_text(result));
    write_file(metadata_path(path), metadata_text(result));
}

std::vector<double> CsvTable::column(std::string_view name) const
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw std::invalid_argument("CSV has no column '" + std::string(name) + "'");
    }
    const auto col = static_cast<std::size_t>(it - header.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row[col]);
    return out;
}

CsvTable parse_csv(std::string_view text)
{
    CsvTable table;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
        const auto end = text.find('\n', start);
        const std::string_view line = trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
        start = end == std::string_view::npos ? text.size() : end + 1;
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (table.header.empty()) {
            for (std::string_view f : fields) table.header.emplace_back(f);
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(table.header.size()) + " fields");
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::string_view f : fields) {
            const auto x = to_double(f);
            if (!x) throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": bad number '" + std::string(f) + "'");
            row.push_back(*x);
        }
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw std::invalid_argument("CSV is empty");
    return table;
}

CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "': " + std::generic_category().message(errno));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

}  // namespace hqc
