// reapkit: command-line front end for the sparse kernel library and the
// accelerator model.  All report files (JSON/CSV) are deterministic for a
// given input + flags + seed: they carry modeled times and manifests only.
// Measured wall-clock appears in human output alone.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "reap/cholesky.hpp"
#include "reap/dense.hpp"
#include "reap/matrix.hpp"
#include "reap/matrix_market.hpp"
#include "reap/report.hpp"
#include "reap/rir.hpp"
#include "reap/schedule.hpp"
#include "reap/sim.hpp"
#include "reap/spgemm.hpp"
#include "reap/version.hpp"

namespace {

using namespace reap;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

// Modeled host reformat cost, used for the overlap accounting in reports.
// Constants are assumptions (a few ns per touched element on a desktop
// core); human output additionally shows the measured wall clock.
constexpr double kPrepSecondsPerElement = 8e-9;
constexpr double kPrepSecondsPerGroup = 2e-7;

std::vector<double> modeled_prep(const SpgemmSchedule& sched) {
    std::vector<double> prep;
    prep.reserve(sched.groups.size());
    for (const SpgemmGroup& g : sched.groups) {
        std::uint64_t elems = 0;
        for (const SpgemmRowTask& t : g.rows)
            for (const RirBundle& b : t.a_bundles) elems += b.elements.size();
        for (const auto& list : g.b_bundles)
            for (const RirBundle& b : list) elems += b.elements.size();
        prep.push_back(kPrepSecondsPerGroup + kPrepSecondsPerElement * elems);
    }
    return prep;
}

std::vector<double> modeled_prep(const RirStream& stream, const SymbolicPattern& pattern) {
    std::vector<double> prep(pattern.n, kPrepSecondsPerGroup);
    std::size_t col = 0;
    for (const RirRecord& rec : stream.records) {
        if (std::holds_alternative<RirBundle>(rec)) {
            prep[col] +=
                kPrepSecondsPerElement * std::get<RirBundle>(rec).elements.size();
        } else {
            prep[col] +=
                kPrepSecondsPerElement * std::get<ExtentRecord>(rec).extents.size();
            ++col;
        }
    }
    return prep;
}

struct ConfigFlags {
    std::string preset_name;
    std::optional<std::uint32_t> pipelines;
    std::optional<double> frequency_mhz;
    std::optional<double> read_gbps;
    std::optional<double> write_gbps;
    std::optional<std::uint32_t> capacity;
    std::optional<std::uint32_t> cam_size;
    std::optional<std::uint32_t> multipliers;
    std::optional<std::uint32_t> sort_capacity;

    void attach(CLI::App* cmd) {
        cmd->add_option("--preset", preset_name, "named configuration")
            ->check(CLI::IsMember(preset_names()));
        cmd->add_option("--pipelines", pipelines, "pipeline count");
        cmd->add_option("--frequency-mhz", frequency_mhz, "clock in MHz");
        cmd->add_option("--read-gbps", read_gbps, "read bandwidth in GB/s");
        cmd->add_option("--write-gbps", write_gbps, "write bandwidth in GB/s");
        cmd->add_option("--capacity", capacity, "bundle capacity")
            ->check(CLI::Range(1u, 65535u));
        cmd->add_option("--cam-size", cam_size, "index-match table entries");
        cmd->add_option("--multipliers", multipliers, "dot-product multipliers per pipeline");
        cmd->add_option("--sort-capacity", sort_capacity, "sorter entries per pipeline");
    }

    SimConfig resolve() const {
        SimConfig cfg = preset_name.empty() ? SimConfig{} : preset(preset_name);
        if (pipelines) cfg.pipelines = *pipelines;
        if (frequency_mhz) cfg.frequency_mhz = *frequency_mhz;
        if (read_gbps) cfg.read_bandwidth_gbps = *read_gbps;
        if (write_gbps) cfg.write_bandwidth_gbps = *write_gbps;
        if (capacity) cfg.bundle_capacity = *capacity;
        if (cam_size) cfg.cam_size = *cam_size;
        if (multipliers) cfg.multipliers_per_pe = *multipliers;
        if (sort_capacity) cfg.sort_capacity = *sort_capacity;
        cfg.validate();
        return cfg;
    }
};

ordered_json make_manifest(const std::string& command, const std::vector<std::string>& inputs,
                           const ordered_json& flags) {
    ordered_json m;
    m["command"] = command;
    m["inputs"] = inputs;
    m["flags"] = flags;
    m["tool_version"] = kToolVersion;
    return m;
}

void write_json_file(const std::string& path, const ordered_json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << doc.dump(2) << '\n';
}

struct CholeskyPipeline {
    CscMatrix a;
    EliminationTree etree;
    SymbolicPattern pattern;
    RirStream stream;
    double etree_ms = 0.0;
    double symbolic_ms = 0.0;
    double schedule_ms = 0.0;
};

CholeskyPipeline cholesky_front(const CsrMatrix& input, bool coerce_spd,
                                std::uint32_t capacity) {
    CholeskyPipeline p;
    CsrMatrix base = coerce_spd ? make_spd(input) : input;
    p.a = csr_to_csc(base);
    Timer t1;
    p.etree = build_etree(p.a);
    p.etree_ms = t1.ms();
    Timer t2;
    p.pattern = symbolic_pattern(p.a, p.etree);
    p.symbolic_ms = t2.ms();
    Timer t3;
    p.stream = build_cholesky_schedule(p.a, p.pattern, capacity);
    p.schedule_ms = t3.ms();
    return p;
}

// ---------------------------------------------------------------------------

int run_convert(const std::string& in, const std::string& out, std::uint32_t capacity,
                const std::string& layout) {
    if (in.ends_with(".rir")) {
        RirStream stream = load_stream_file(in);
        CsrMatrix m;
        if (stream.kernel == StreamKernel::csr) {
            m = decompress_to_csr(stream);
        } else if (stream.kernel == StreamKernel::csc) {
            m = csc_to_csr(decompress_to_csc(stream));
        } else {
            throw std::invalid_argument("factorization schedules do not convert to matrices");
        }
        save_matrix_market_file(out, m);
        std::printf("%s -> %s: %ux%u, nnz %u, kernel %s\n", in.c_str(), out.c_str(), m.rows,
                    m.cols, m.nnz(), kernel_name(stream.kernel));
        return 0;
    }

    CsrMatrix m = coo_to_csr(load_matrix_market_file(in));
    RirStream stream;
    if (layout == "csr") {
        stream = compress_csr(m, capacity);
    } else {
        stream = compress_csc(csr_to_csc(m), capacity);
    }
    std::uint64_t bundles = 0, split_features = 0, prev_feature = ~0ull;
    bool prev_split = false;
    for (const RirRecord& rec : stream.records) {
        const RirBundle& b = std::get<RirBundle>(rec);
        ++bundles;
        if (b.shared == prev_feature && !prev_split) {
            ++split_features;
            prev_split = true;
        } else if (b.shared != prev_feature) {
            prev_feature = b.shared;
            prev_split = false;
        }
    }
    save_stream_file(out, stream);
    const std::vector<std::uint8_t> bytes = serialize(stream);
    std::printf("%s -> %s: %ux%u, nnz %u, layout %s, capacity %u\n", in.c_str(), out.c_str(),
                m.rows, m.cols, m.nnz(), layout.c_str(), capacity);
    std::printf("bundles %llu (%llu split features), stream bytes %zu\n",
                (unsigned long long)bundles, (unsigned long long)split_features, bytes.size());
    return 0;
}

int run_spgemm(const std::string& a_path, const std::string& b_path, std::uint32_t capacity,
               bool verify, const std::string& out) {
    CsrMatrix a = coo_to_csr(load_matrix_market_file(a_path));
    CsrMatrix b = b_path.empty() ? a : coo_to_csr(load_matrix_market_file(b_path));

    Timer t;
    SpgemmStats stats;
    CsrMatrix c = spgemm(a, b, capacity, &stats);
    const double compute_ms = t.ms();

    std::printf("C = A*B: %ux%u, nnz(C) %u, density %.6g\n", c.rows, c.cols, c.nnz(),
                c.rows && c.cols ? density(c) : 0.0);
    std::printf("partial products %llu, merge adds %llu, flops %llu (%.2f ms)\n",
                (unsigned long long)stats.partial_products,
                (unsigned long long)stats.merge_adds, (unsigned long long)stats.flops(),
                compute_ms);

    if (verify) {
        CsrMatrix ref = reference_spgemm(a, b);
        if (ref.row_ptr != c.row_ptr || ref.col_idx != c.col_idx) {
            std::fprintf(stderr, "verification failed: structure differs from reference\n");
            return 2;
        }
        for (std::size_t i = 0; i < c.values.size(); ++i) {
            const double got = c.values[i], want = ref.values[i];
            const double err = std::abs(got - want);
            if (err > 1e-6 && err > 1e-5 * std::abs(want)) {
                std::fprintf(stderr, "verification failed: value %zu is %.9g, expected %.9g\n",
                             i, got, want);
                return 2;
            }
        }
        if (a.rows <= 4096 && b.cols <= 4096) {
            DenseMatrix da = densify(a), db = densify(b);
            DenseMatrix dc = dense_spgemm_oracle(da, db);
            for (index_t r = 0; r < c.rows; ++r) {
                index_t ptr = c.row_ptr[r];
                for (index_t col = 0; col < c.cols; ++col) {
                    double got = 0.0;
                    if (ptr < c.row_ptr[r + 1] && c.col_idx[ptr] == col)
                        got = c.values[ptr++];
                    const double want = dc.at(r, col);
                    const double err = std::abs(got - want);
                    if (err > 1e-6 && err > 1e-5 * std::abs(want)) {
                        std::fprintf(stderr,
                                     "verification failed: entry (%u,%u) is %.9g, expected "
                                     "%.9g\n",
                                     r, col, got, want);
                        return 2;
                    }
                }
            }
            std::printf("verification: reference ok, dense oracle ok\n");
        } else {
            std::printf("verification: reference ok (dense oracle skipped above 4096)\n");
        }
    }
    if (!out.empty()) {
        save_matrix_market_file(out, c);
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

int run_cholesky(const std::string& a_path, bool verify, bool timings, bool coerce_spd,
                 const std::string& out) {
    CsrMatrix input = coo_to_csr(load_matrix_market_file(a_path));
    CholeskyPipeline p = cholesky_front(input, coerce_spd, kDefaultBundleCapacity);

    Timer tn;
    CholeskyStats stats;
    LFactor L = factorize(p.a, p.pattern, &stats);
    const double numeric_ms = tn.ms();

    const double fill = p.a.nnz() ? static_cast<double>(p.pattern.nnz()) /
                                        static_cast<double>(p.a.nnz())
                                  : 0.0;
    std::printf("factor L: %ux%u, nnz(L) %llu (fill %.2fx), flops %llu\n", p.pattern.n,
                p.pattern.n, (unsigned long long)p.pattern.nnz(), fill,
                (unsigned long long)stats.flops());
    if (timings)
        std::printf("etree %.3f ms, symbolic %.3f ms, schedule %.3f ms, numeric %.3f ms\n",
                    p.etree_ms, p.symbolic_ms, p.schedule_ms, numeric_ms);

    if (verify) {
        const FactorResidual res = verify_factor(p.a, L);
        const double bound = 1e-4 * res.max_abs_input;
        if (res.max_abs_error > bound) {
            std::fprintf(stderr, "verification failed: residual %.9g exceeds %.9g\n",
                         res.max_abs_error, bound);
            return 2;
        }
        std::printf("residual max|LLt-A| = %.6g (bound %.6g) ok\n", res.max_abs_error, bound);
    }
    if (!out.empty()) {
        save_matrix_market_file(out, factor_to_csr(L));
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

SimReport simulate_once(const CsrMatrix& input, const std::string& kernel,
                        const SimConfig& cfg, bool coerce_spd, double* prep_total,
                        double* host_ms) {
    Timer host;
    if (kernel == "spgemm") {
        SpgemmSchedule sched =
            build_spgemm_schedule(input, input, cfg.pipelines, cfg.bundle_capacity);
        std::vector<double> prep = modeled_prep(sched);
        if (host_ms) *host_ms = host.ms();
        if (prep_total) {
            *prep_total = 0.0;
            for (double v : prep) *prep_total += v;
        }
        return simulate_spgemm(sched, cfg, prep);
    }
    CholeskyPipeline p = cholesky_front(input, coerce_spd, cfg.bundle_capacity);
    std::vector<double> prep = modeled_prep(p.stream, p.pattern);
    if (host_ms) *host_ms = host.ms();
    if (prep_total) {
        *prep_total = 0.0;
        for (double v : prep) *prep_total += v;
    }
    return simulate_cholesky(p.stream, p.a, p.pattern, cfg, prep);
}

int run_simulate(const std::string& a_path, const std::string& kernel,
                 const ConfigFlags& flags, bool coerce_spd, const std::string& json_path) {
    CsrMatrix input = coo_to_csr(load_matrix_market_file(a_path));
    SimConfig cfg = flags.resolve();

    double host_ms = 0.0;
    SimReport rep = simulate_once(input, kernel, cfg, coerce_spd, nullptr, &host_ms);
    const auto [cpu_pct, fpga_pct] = prep_compute_split(rep);

    std::printf("%s on %s: %ux%u, nnz %u\n", kernel.c_str(), a_path.c_str(), input.rows,
                input.cols, input.nnz());
    std::printf("pipelines %u @ %.0f MHz, read %.1f GB/s, write %.1f GB/s\n", cfg.pipelines,
                cfg.frequency_mhz, cfg.read_bandwidth_gbps, cfg.write_bandwidth_gbps);
    std::printf("total cycles      %llu\n", (unsigned long long)rep.total_cycles);
    std::printf("compute time      %.6g s\n", rep.fpga_seconds);
    std::printf("modeled prep      %.6g s\n", rep.cpu_prep_seconds);
    std::printf("overlapped total  %.6g s (prep %.1f%% / compute %.1f%%)\n",
                rep.overlapped_total_seconds, cpu_pct, fpga_pct);
    std::printf("flops             %llu (%.4f GFLOPS, %.6f per FP unit)\n",
                (unsigned long long)rep.flops, rep.gflops, rep.gflops_per_fp_unit);
    std::printf("serial stage sum  %llu cycles (advantage %.2fx)\n",
                (unsigned long long)rep.serial_cycles, rep.advantage_vs_serial);
    std::printf("pipeline idle     %.1f%%\n", 100.0 * rep.pipeline_idle_fraction);
    std::printf("bytes read        %.0f (peak %.2f of %.2f per cycle)\n", rep.bytes_read,
                rep.peak_read_bytes_per_cycle, rep.read_budget_bytes_per_cycle);
    std::printf("bytes written     %.0f (peak %.2f of %.2f per cycle)\n", rep.bytes_written,
                rep.peak_write_bytes_per_cycle, rep.write_budget_bytes_per_cycle);
    std::printf("host prep wall    %.3f ms (measured; not in reports)\n", host_ms);

    if (!json_path.empty()) {
        ordered_json flags_echo;
        flags_echo["kernel"] = kernel;
        flags_echo["preset"] = flags.preset_name;
        flags_echo["make_spd"] = coerce_spd;
        ordered_json doc;
        doc["schema_version"] = kSchemaVersion;
        doc["tool"] = "reapkit";
        doc["manifest"] = make_manifest("simulate", {a_path}, flags_echo);
        doc["config"] = config_to_json(cfg);
        doc["report"] = report_to_json(rep);
        write_json_file(json_path, doc);
        std::printf("wrote %s\n", json_path.c_str());
    }
    return 0;
}

int run_sweep(const std::string& a_path, const std::string& kernel, const std::string& vary,
              const std::vector<double>& values, const ConfigFlags& flags, bool coerce_spd,
              std::uint64_t seed, unsigned threads, const std::string& csv_path) {
    CsrMatrix input = coo_to_csr(load_matrix_market_file(a_path));
    const SimConfig base = flags.resolve();
    if (vary == "density" && input.rows != input.cols)
        throw std::invalid_argument("density sweeps need a square input to size the matrices");

    struct Point {
        double value = 0.0;
        SimReport report;
    };
    std::vector<Point> points(values.size());

    auto run_point = [&](std::size_t i) {
        const double v = values[i];
        SimConfig cfg = base;
        CsrMatrix m = input;
        if (vary == "pipelines") {
            if (v < 1.0 || v != std::floor(v))
                throw std::invalid_argument("pipeline counts must be positive integers");
            cfg.pipelines = static_cast<std::uint32_t>(v);
        } else if (vary == "bandwidth") {
            if (v <= 0.0) throw std::invalid_argument("bandwidth must be positive");
            const double scale = v / base.read_bandwidth_gbps;
            cfg.read_bandwidth_gbps = v;
            cfg.write_bandwidth_gbps = base.write_bandwidth_gbps * scale;
        } else {
            m = random_sparse(input.rows, input.cols, v, seed);
        }
        points[i].value = v;
        points[i].report = simulate_once(m, kernel, cfg, coerce_spd || vary == "density",
                                         nullptr, nullptr);
    };

    if (threads <= 1 || values.size() <= 1) {
        for (std::size_t i = 0; i < values.size(); ++i) run_point(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const unsigned workers = std::min<unsigned>(threads, values.size());
        std::vector<std::exception_ptr> errors(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next.fetch_add(1); i < values.size();
                         i = next.fetch_add(1))
                        run_point(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (std::thread& t : pool) t.join();
        for (const std::exception_ptr& e : errors)
            if (e) std::rethrow_exception(e);
    }

    std::string csv;
    csv += "# reapkit sweep schema_version=" + std::to_string(kSchemaVersion) + "\n";
    csv += "# command=sweep kernel=" + kernel + " vary=" + vary + " input=" + a_path +
           " seed=" + std::to_string(seed) +
           (flags.preset_name.empty() ? "" : " preset=" + flags.preset_name) + "\n";
    csv += "vary,value," + sim_csv_header() + "\n";
    for (const Point& p : points)
        csv += vary + "," + format_double(p.value) + "," + sim_csv_row(p.report) + "\n";

    if (csv_path.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + csv_path + "'");
        out << csv;
        std::printf("wrote %s (%zu points)\n", csv_path.c_str(), points.size());
    }
    return 0;
}

int run_gen(const std::string& out, index_t rows, index_t cols, double density_value,
            std::uint64_t seed, bool spd) {
    if (spd && rows != cols)
        throw std::invalid_argument("positive definite outputs must be square");
    CsrMatrix m = random_sparse(rows, cols, density_value, seed);
    if (spd) m = make_spd(m);
    save_matrix_market_file(out, m);
    std::printf("wrote %s: %ux%u, nnz %u\n", out.c_str(), m.rows, m.cols, m.nnz());
    return 0;
}

unsigned default_threads() {
    if (const char* env = std::getenv("REAPKIT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse kernel toolkit and accelerator model"};
    app.set_version_flag("--version", std::string("reapkit ") + kToolVersion);
    app.require_subcommand(1);

    // convert
    std::string cv_in, cv_out, cv_layout = "csr";
    std::uint32_t cv_capacity = kDefaultBundleCapacity;
    CLI::App* convert = app.add_subcommand("convert", "convert between .mtx and .rir");
    convert->add_option("input", cv_in, "input file")->required();
    convert->add_option("output", cv_out, "output file")->required();
    convert->add_option("--capacity", cv_capacity, "bundle capacity")
        ->check(CLI::Range(1u, 65535u));
    convert->add_option("--layout", cv_layout, "compression layout")
        ->check(CLI::IsMember({"csr", "csc"}));

    // spgemm
    std::string sp_a, sp_b, sp_out;
    std::uint32_t sp_capacity = kDefaultBundleCapacity;
    bool sp_verify = false;
    CLI::App* sp = app.add_subcommand("spgemm", "sparse matrix-matrix multiply");
    sp->add_option("a", sp_a, "left matrix (.mtx)")->required();
    sp->add_option("b", sp_b, "right matrix (.mtx), defaults to a");
    sp->add_option("--capacity", sp_capacity, "bundle capacity")
        ->check(CLI::Range(1u, 65535u));
    sp->add_flag("--verify", sp_verify, "check against reference and dense oracle");
    sp->add_option("--out", sp_out, "write the product (.mtx)");

    // cholesky
    std::string ch_a, ch_out;
    bool ch_verify = false, ch_timings = false, ch_spd = false;
    CLI::App* ch = app.add_subcommand("cholesky", "sparse factorization");
    ch->add_option("a", ch_a, "symmetric positive definite matrix (.mtx)")->required();
    ch->add_flag("--verify", ch_verify, "check the reassembled product");
    ch->add_flag("--timings", ch_timings, "print per-phase wall clock");
    ch->add_flag("--make-spd", ch_spd, "symmetrize and shift the input first");
    ch->add_option("--out", ch_out, "write the factor (.mtx)");

    // simulate
    std::string si_a, si_kernel, si_json;
    bool si_spd = false;
    ConfigFlags si_flags;
    CLI::App* si = app.add_subcommand("simulate", "run the accelerator model");
    si->add_option("a", si_a, "input matrix (.mtx)")->required();
    si->add_option("--kernel", si_kernel, "spgemm or cholesky")
        ->required()
        ->check(CLI::IsMember({"spgemm", "cholesky"}));
    si_flags.attach(si);
    si->add_flag("--make-spd", si_spd, "symmetrize and shift the input first");
    si->add_option("--json", si_json, "write the full report");

    // sweep
    std::string sw_a, sw_kernel, sw_vary, sw_csv;
    std::vector<double> sw_values;
    std::uint64_t sw_seed = 1;
    unsigned sw_threads = default_threads();
    bool sw_spd = false;
    ConfigFlags sw_flags;
    CLI::App* sw = app.add_subcommand("sweep", "simulate across a parameter range");
    sw->add_option("a", sw_a, "input matrix (.mtx)")->required();
    sw->add_option("--kernel", sw_kernel, "spgemm or cholesky")
        ->required()
        ->check(CLI::IsMember({"spgemm", "cholesky"}));
    sw->add_option("--vary", sw_vary, "swept parameter")
        ->required()
        ->check(CLI::IsMember({"pipelines", "bandwidth", "density"}));
    sw->add_option("--values", sw_values, "comma-separated points")
        ->required()
        ->delimiter(',');
    sw_flags.attach(sw);
    sw->add_flag("--make-spd", sw_spd, "symmetrize and shift the input first");
    sw->add_option("--seed", sw_seed, "seed for generated matrices");
    sw->add_option("--threads", sw_threads, "worker pool size");
    sw->add_option("--csv", sw_csv, "write results as CSV");

    // gen
    std::string ge_out;
    index_t ge_rows = 0, ge_cols = 0;
    double ge_density = 0.0;
    std::uint64_t ge_seed = 1;
    bool ge_spd = false;
    CLI::App* ge = app.add_subcommand("gen", "generate a random matrix");
    ge->add_option("output", ge_out, "output file (.mtx)")->required();
    ge->add_option("--rows", ge_rows, "row count")->required()->check(CLI::PositiveNumber);
    ge->add_option("--cols", ge_cols, "column count")->required()->check(CLI::PositiveNumber);
    ge->add_option("--density", ge_density, "fill fraction")
        ->required()
        ->check(CLI::Range(0.0, 1.0));
    ge->add_option("--seed", ge_seed, "generator seed");
    ge->add_flag("--spd", ge_spd, "symmetrize and shift to positive definite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (convert->parsed()) return run_convert(cv_in, cv_out, cv_capacity, cv_layout);
        if (sp->parsed()) return run_spgemm(sp_a, sp_b, sp_capacity, sp_verify, sp_out);
        if (ch->parsed()) return run_cholesky(ch_a, ch_verify, ch_timings, ch_spd, ch_out);
        if (si->parsed()) return run_simulate(si_a, si_kernel, si_flags, si_spd, si_json);
        if (sw->parsed())
            return run_sweep(sw_a, sw_kernel, sw_vary, sw_values, sw_flags, sw_spd, sw_seed,
                             sw_threads, sw_csv);
        if (ge->parsed()) return run_gen(ge_out, ge_rows, ge_cols, ge_density, ge_seed, ge_spd);
    } catch (const NotSpdError& e) {
        std::fprintf(stderr, "reapkit: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "reapkit: error: %s\n", e.what());
        return 2;
    }
    return 1;
}
