// Cycle-approximate model of the streaming accelerator: replicated
// pipelines behind a bandwidth-capped memory, exercised per group (multiply)
// or per column (factorization), with per-stage occupancy accounting.
//
// The model is deterministic.  Transfers are enqueued in a fixed order and
// serviced FIFO against a per-cycle byte budget; compute consumes data only
// after delivery; ties break toward the lower pipeline index.  Per-stage
// cycle costs live in StageCosts and are documented assumptions: the
// hardware numbers they stand in for were never published, so tests built
// on this model check trends and conservation laws, not absolute counts.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "reap/schedule.hpp"
#include "reap/spgemm.hpp"

namespace reap {

struct StageCosts {
    std::uint32_t cam_load = 1;         // cycles per element written into a CAM
    std::uint32_t cam_lookup = 1;       // cycles per streamed element
    std::uint32_t multiply_latency = 3; // pipelined, one issue per cycle
    std::uint32_t sort_insert = 1;
    std::uint32_t merge = 1;            // compare + add per retired partial
    std::uint32_t divide_latency = 14;
    std::uint32_t sqrt_latency = 14;
    std::uint32_t serial_row_access = 25;  // irregular-access charge, serial model only
};

struct SimConfig {
    std::uint32_t pipelines = 32;
    double frequency_mhz = 250.0;
    std::uint32_t bundle_capacity = kDefaultBundleCapacity;
    std::uint32_t cam_size = 32;
    double read_bandwidth_gbps = 14.0;
    double write_bandwidth_gbps = 14.0;
    std::uint32_t multipliers_per_pe = 8;  // factorization dot units
    std::uint32_t sort_capacity = 1024;
    std::uint32_t element_bytes = 8;  // u32 index + f32 value
    StageCosts costs;

    double read_bytes_per_cycle() const {
        return read_bandwidth_gbps * 1e9 / (frequency_mhz * 1e6);
    }
    double write_bytes_per_cycle() const {
        return write_bandwidth_gbps * 1e9 / (frequency_mhz * 1e6);
    }
    double seconds(std::uint64_t cycles) const {
        return static_cast<double>(cycles) / (frequency_mhz * 1e6);
    }

    void validate() const {
        if (pipelines == 0 || bundle_capacity == 0 || cam_size == 0 ||
            multipliers_per_pe == 0 || sort_capacity == 0 || element_bytes == 0)
            throw std::invalid_argument("all unit counts must be at least 1");
        if (frequency_mhz <= 0.0 || read_bandwidth_gbps <= 0.0 || write_bandwidth_gbps <= 0.0)
            throw std::invalid_argument("frequency and bandwidths must be positive");
        if (cam_size < bundle_capacity)
            throw std::invalid_argument("cam_size must be at least bundle_capacity");
        if (costs.cam_load == 0 || costs.cam_lookup == 0 || costs.multiply_latency == 0 ||
            costs.sort_insert == 0 || costs.merge == 0 || costs.divide_latency == 0 ||
            costs.sqrt_latency == 0)
            throw std::invalid_argument("stage costs must be at least 1 cycle");
    }
};

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "reap32-spgemm", "reap64-spgemm", "reap128-spgemm", "reap32-chol", "reap64-chol"};
    return names;
}

inline SimConfig preset(const std::string& name) {
    SimConfig c;
    if (name == "reap32-spgemm") {
        c.pipelines = 32;
        c.frequency_mhz = 250.0;
        c.read_bandwidth_gbps = 14.0;
        c.write_bandwidth_gbps = 14.0;
    } else if (name == "reap64-spgemm") {
        c.pipelines = 64;
        c.frequency_mhz = 250.0;
        c.read_bandwidth_gbps = 147.0;
        c.write_bandwidth_gbps = 73.0;
    } else if (name == "reap128-spgemm") {
        c.pipelines = 128;
        c.frequency_mhz = 220.0;
        c.read_bandwidth_gbps = 147.0;
        c.write_bandwidth_gbps = 73.0;
    } else if (name == "reap32-chol") {
        // No separate single-core bandwidth was published for this variant;
        // it reuses the 14 GB/s single-core figure.
        c.pipelines = 32;
        c.frequency_mhz = 250.0;
        c.multipliers_per_pe = 8;
        c.read_bandwidth_gbps = 14.0;
        c.write_bandwidth_gbps = 14.0;
    } else if (name == "reap64-chol") {
        c.pipelines = 64;
        c.frequency_mhz = 238.0;
        c.multipliers_per_pe = 16;
        c.read_bandwidth_gbps = 147.0;
        c.write_bandwidth_gbps = 73.0;
    } else {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    return c;
}

// FIFO transfer queue with a hard per-cycle byte budget.  Transfers become
// eligible the cycle they are enqueued; completion order equals enqueue
// order.  The cap is asserted every cycle.
class MemoryChannel {
public:
    explicit MemoryChannel(double bytes_per_cycle) : budget_(bytes_per_cycle) {
        if (budget_ <= 0.0)
            throw std::invalid_argument("byte budget must be positive");
    }

    void enqueue(double bytes) {
        if (bytes < 0.0)
            throw std::invalid_argument("negative transfer");
        queue_.push_back(bytes);
    }

    // Serves up to one budget's worth of bytes; returns how many queued
    // transfers completed this cycle.
    std::size_t step() {
        double room = budget_;
        double served = 0.0;
        std::size_t completed = 0;
        while (!queue_.empty()) {
            double& remaining = queue_.front();
            const double take = std::min(remaining, room);
            remaining -= take;
            room -= take;
            served += take;
            if (remaining <= 1e-9) {
                queue_.pop_front();
                ++completed;
            }
            if (room <= 1e-9) break;
        }
        if (served > budget_ * (1.0 + 1e-9))
            throw std::logic_error("memory channel served more than its per-cycle budget");
        total_ += served;
        peak_ = std::max(peak_, served);
        return completed;
    }

    bool idle() const { return queue_.empty(); }
    double total_bytes() const { return total_; }
    double peak_bytes_per_cycle() const { return peak_; }
    double budget() const { return budget_; }

private:
    double budget_;
    double total_ = 0.0;
    double peak_ = 0.0;
    std::deque<double> queue_;
};

struct StageCycles {
    std::uint64_t busy = 0;
    std::uint64_t idle = 0;
    std::uint64_t stalled = 0;

    std::uint64_t total() const { return busy + idle + stalled; }
};

struct SimReport {
    std::string kernel;
    std::uint32_t pipelines = 0;
    std::uint32_t fp_units = 0;
    std::uint64_t total_cycles = 0;
    double fpga_seconds = 0.0;
    double cpu_prep_seconds = 0.0;
    double overlapped_total_seconds = 0.0;

    std::uint64_t flops = 0;
    std::uint64_t multiplies = 0;        // useful multiplies (engine-equivalent)
    std::uint64_t merge_adds = 0;        // multiply kernel only
    std::uint64_t divides = 0;           // factorization only
    std::uint64_t sqrts = 0;             // factorization only
    std::uint64_t redundant_multiplies = 0;  // duplicate diagonal work
    std::uint64_t redundant_sqrts = 0;
    std::uint64_t result_nonzeros = 0;
    std::uint64_t explicit_zero_outputs = 0;  // merged values equal to 0.0, kept

    double gflops = 0.0;
    double gflops_per_fp_unit = 0.0;

    double bytes_read = 0.0;
    double bytes_written = 0.0;
    double peak_read_bytes_per_cycle = 0.0;
    double peak_write_bytes_per_cycle = 0.0;
    double read_budget_bytes_per_cycle = 0.0;
    double write_budget_bytes_per_cycle = 0.0;

    std::vector<std::string> stage_names;
    std::vector<std::vector<StageCycles>> stages;  // [pipeline][stage]
    double pipeline_idle_fraction = 0.0;

    // Serial stage-sum baseline: one functional unit paying every stage
    // cost in sequence plus a per-row irregular-access charge.
    std::uint64_t serial_cycles = 0;
    double serial_seconds = 0.0;
    double serial_gflops_per_unit = 0.0;
    double advantage_vs_serial = 0.0;

    std::uint64_t group_count = 0;
    std::vector<std::uint64_t> group_cycles;  // per group / per column spans
};

// total = prep[0] + sum_{i>=1} max(prep[i], fpga[i-1]) + fpga[last]:
// reformatting of group i overlaps accelerator work on group i-1.
inline double model_overlap(std::span<const double> prep, std::span<const double> fpga) {
    if (prep.empty() || fpga.empty())
        throw std::invalid_argument("overlap model needs at least one group");
    if (prep.size() != fpga.size())
        throw std::invalid_argument("prep/fpga sequences differ in length");
    double total = prep[0];
    for (std::size_t i = 1; i < prep.size(); ++i)
        total += std::max(prep[i], fpga[i - 1]);
    return total + fpga.back();
}

// Non-overlapped accounting percentages; they sum to 100 by construction.
inline std::pair<double, double> prep_compute_split(const SimReport& r) {
    const double total = r.cpu_prep_seconds + r.fpga_seconds;
    if (total <= 0.0)
        throw std::invalid_argument("report carries no time to split");
    return {100.0 * r.cpu_prep_seconds / total, 100.0 * r.fpga_seconds / total};
}

namespace detail {

inline const std::vector<std::string>& spgemm_stage_names() {
    static const std::vector<std::string> names = {"cam_load", "match", "multiply", "sort",
                                                   "merge"};
    return names;
}

inline const std::vector<std::string>& cholesky_stage_names() {
    static const std::vector<std::string> names = {"cam_load", "dot", "divsqrt"};
    return names;
}

enum StageState : std::uint8_t { kIdle = 0, kBusy = 1, kStalled = 2 };

inline void commit_stages(std::vector<std::vector<StageCycles>>& stages,
                          const std::vector<std::vector<StageState>>& now) {
    for (std::size_t p = 0; p < stages.size(); ++p)
        for (std::size_t s = 0; s < stages[p].size(); ++s) {
            switch (now[p][s]) {
                case kBusy: stages[p][s].busy++; break;
                case kStalled: stages[p][s].stalled++; break;
                default: stages[p][s].idle++; break;
            }
        }
}

inline void finish_report(SimReport& r, const SimConfig& cfg, const MemoryChannel& rd,
                          const MemoryChannel& wr, std::span<const double> prep) {
    r.pipelines = cfg.pipelines;
    r.fpga_seconds = cfg.seconds(r.total_cycles);
    r.bytes_read = rd.total_bytes();
    r.bytes_written = wr.total_bytes();
    r.peak_read_bytes_per_cycle = rd.peak_bytes_per_cycle();
    r.peak_write_bytes_per_cycle = wr.peak_bytes_per_cycle();
    r.read_budget_bytes_per_cycle = rd.budget();
    r.write_budget_bytes_per_cycle = wr.budget();

    if (r.fpga_seconds > 0.0) {
        r.gflops = static_cast<double>(r.flops) / (r.fpga_seconds * 1e9);
        r.gflops_per_fp_unit = r.fp_units ? r.gflops / r.fp_units : 0.0;
    }
    r.serial_seconds = cfg.seconds(r.serial_cycles);
    if (r.serial_seconds > 0.0)
        r.serial_gflops_per_unit = static_cast<double>(r.flops) / (r.serial_seconds * 1e9);
    if (r.total_cycles > 0)
        r.advantage_vs_serial =
            static_cast<double>(r.serial_cycles) / static_cast<double>(r.total_cycles);

    if (!prep.empty()) {
        if (prep.size() != r.group_cycles.size())
            throw std::invalid_argument("prep times do not match the group count");
        r.cpu_prep_seconds = 0.0;
        for (double s : prep) r.cpu_prep_seconds += s;
        std::vector<double> fpga(r.group_cycles.size());
        for (std::size_t i = 0; i < fpga.size(); ++i)
            fpga[i] = cfg.seconds(r.group_cycles[i]);
        r.overlapped_total_seconds = model_overlap(prep, fpga);
    } else {
        r.overlapped_total_seconds = r.fpga_seconds;
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Multiply kernel machine
// ---------------------------------------------------------------------------

inline SimReport simulate_spgemm(const SpgemmSchedule& sched, const SimConfig& cfg,
                                 std::span<const double> prep_seconds = {},
                                 CsrMatrix* result_out = nullptr) {
    cfg.validate();
    if (sched.capacity > cfg.cam_size)
        throw std::invalid_argument("schedule capacity exceeds cam_size");
    if (sched.pipelines != cfg.pipelines)
        throw std::invalid_argument("schedule was built for a different pipeline count");

    const std::uint32_t P = cfg.pipelines;
    const StageCosts& k = cfg.costs;

    SimReport rep;
    rep.kernel = "spgemm";
    rep.fp_units = 2 * P;  // one multiplier and one merge adder per pipeline
    rep.stage_names = detail::spgemm_stage_names();
    rep.stages.assign(P, std::vector<StageCycles>(5));
    rep.group_count = sched.groups.size();

    // --- Plan: engine results per row, per-pass streams, transfer order ---
    struct Slot {  // one streamed B element
        std::uint32_t local_row;  // index into the pass's row list
        std::uint32_t xfer;       // transfer id gating delivery
    };
    struct Pass {
        std::vector<std::uint32_t> a_xfer;          // per pipeline, or kNone
        std::vector<std::uint32_t> a_len;           // CAM load length
        std::vector<Slot> stream;
        std::vector<std::vector<bool>> match;       // [local_row][pipeline]
    };
    struct GroupPlan {
        std::vector<Pass> passes;
        std::vector<std::uint32_t> row_of_pipe;       // result row per pipeline, or kNone
        std::vector<std::uint64_t> row_partials;      // engine partial count
        std::vector<std::uint64_t> row_outputs;       // merged entries
        std::vector<double> write_bytes;              // serialized output row
    };
    constexpr std::uint32_t kNone = 0xFFFFFFFFu;

    CsrMatrix c;
    c.rows = sched.result_rows;
    c.cols = sched.result_cols;
    c.row_ptr.assign(sched.result_rows + 1, 0);
    std::vector<std::vector<PartialProduct>> c_rows(sched.result_rows);

    std::vector<GroupPlan> plan(sched.groups.size());
    std::vector<double> xfer_bytes;
    SpgemmStats engine_stats;

    for (std::size_t g = 0; g < sched.groups.size(); ++g) {
        const SpgemmGroup& grp = sched.groups[g];
        GroupPlan& gp = plan[g];
        gp.row_of_pipe.assign(P, kNone);
        gp.row_partials.assign(P, 0);
        gp.row_outputs.assign(P, 0);
        gp.write_bytes.assign(P, 0.0);

        std::size_t max_bundles = 0;
        for (std::size_t p = 0; p < grp.rows.size(); ++p) {
            gp.row_of_pipe[p] = grp.rows[p].a_row;
            max_bundles = std::max(max_bundles, grp.rows[p].a_bundles.size());
        }
        gp.passes.resize(max_bundles);

        // Functional result per pipeline row (single shared compute path).
        for (std::size_t p = 0; p < grp.rows.size(); ++p) {
            std::vector<const std::vector<RirBundle>*> needed;
            std::unordered_set<index_t> cols;
            for (const RirBundle& b : grp.rows[p].a_bundles)
                for (const BundleElement& e : b.elements) cols.insert(e.distinct);
            for (std::size_t bi = 0; bi < grp.b_rows.size(); ++bi)
                if (cols.count(grp.b_rows[bi])) needed.push_back(&grp.b_bundles[bi]);

            const std::uint64_t before = engine_stats.partial_products;
            std::vector<PartialProduct> row = detail::compute_result_row(
                grp.rows[p].a_bundles, needed, cfg.cam_size, &engine_stats);
            gp.row_partials[p] = engine_stats.partial_products - before;
            gp.row_outputs[p] = row.size();
            engine_stats.merge_adds += gp.row_partials[p] - row.size();
            if (!row.empty()) {
                const std::size_t bundles = (row.size() + sched.capacity - 1) / sched.capacity;
                gp.write_bytes[p] = static_cast<double>(row.size()) * cfg.element_bytes +
                                    8.0 * static_cast<double>(bundles);
            }
            for (const PartialProduct& v : row)
                if (v.value == 0.0f) rep.explicit_zero_outputs++;
            c_rows[grp.rows[p].a_row] = std::move(row);
        }

        // Transfer order per pass: A bundles by pipeline, then the B rows
        // the pass's CAM contents can match, ascending.
        for (std::size_t t = 0; t < max_bundles; ++t) {
            Pass& pass = gp.passes[t];
            pass.a_xfer.assign(P, kNone);
            pass.a_len.assign(P, 0);

            std::unordered_set<index_t> pass_cols;
            std::vector<std::unordered_set<index_t>> keys(grp.rows.size());
            for (std::size_t p = 0; p < grp.rows.size(); ++p) {
                if (t >= grp.rows[p].a_bundles.size()) continue;
                const RirBundle& b = grp.rows[p].a_bundles[t];
                pass.a_xfer[p] = static_cast<std::uint32_t>(xfer_bytes.size());
                pass.a_len[p] = static_cast<std::uint32_t>(b.elements.size());
                xfer_bytes.push_back(static_cast<double>(bundle_wire_bytes(b.elements.size())));
                for (const BundleElement& e : b.elements) {
                    keys[p].insert(e.distinct);
                    pass_cols.insert(e.distinct);
                }
            }

            for (std::size_t bi = 0; bi < grp.b_rows.size(); ++bi) {
                if (!pass_cols.count(grp.b_rows[bi])) continue;
                const std::uint32_t local =
                    static_cast<std::uint32_t>(pass.match.size());
                std::vector<bool> m(P, false);
                for (std::size_t p = 0; p < grp.rows.size(); ++p)
                    m[p] = keys[p].count(grp.b_rows[bi]) != 0;
                pass.match.push_back(std::move(m));
                for (const RirBundle& b : grp.b_bundles[bi]) {
                    const std::uint32_t id = static_cast<std::uint32_t>(xfer_bytes.size());
                    xfer_bytes.push_back(
                        static_cast<double>(bundle_wire_bytes(b.elements.size())));
                    for (std::size_t e = 0; e < b.elements.size(); ++e)
                        pass.stream.push_back({local, id});
                }
            }
        }
    }

    if (result_out) {
        for (index_t r = 0; r < sched.result_rows; ++r) {
            for (const PartialProduct& v : c_rows[r]) {
                c.col_idx.push_back(v.col);
                c.values.push_back(v.value);
            }
            c.row_ptr[r + 1] = static_cast<index_t>(c.col_idx.size());
        }
        *result_out = std::move(c);
    }
    rep.multiplies = engine_stats.partial_products;
    rep.merge_adds = engine_stats.merge_adds;
    rep.flops = engine_stats.flops();
    rep.result_nonzeros = engine_stats.partial_products - engine_stats.merge_adds;

    // Serial stage-sum baseline from the same schedule.
    {
        std::uint64_t serial = 0;
        for (const SpgemmGroup& grp : sched.groups) {
            std::vector<std::uint64_t> b_nnz(grp.b_rows.size(), 0);
            for (std::size_t bi = 0; bi < grp.b_rows.size(); ++bi)
                for (const RirBundle& b : grp.b_bundles[bi]) b_nnz[bi] += b.elements.size();
            for (const SpgemmRowTask& task : grp.rows) {
                serial += k.serial_row_access;
                for (const RirBundle& b : task.a_bundles) {
                    serial += static_cast<std::uint64_t>(b.elements.size()) * k.cam_load;
                    for (const BundleElement& e : b.elements) {
                        const auto it = std::lower_bound(grp.b_rows.begin(), grp.b_rows.end(),
                                                         e.distinct);
                        const std::uint64_t nnz =
                            b_nnz[static_cast<std::size_t>(it - grp.b_rows.begin())];
                        serial += k.serial_row_access +
                                  nnz * (k.cam_lookup + k.multiply_latency + k.sort_insert +
                                         k.merge);
                    }
                }
            }
        }
        rep.serial_cycles = serial;
    }

    // --- Cycle machine ---
    MemoryChannel read(cfg.read_bytes_per_cycle());
    MemoryChannel write(cfg.write_bytes_per_cycle());
    for (double b : xfer_bytes) read.enqueue(b);
    std::vector<std::uint8_t> delivered(xfer_bytes.size(), 0);
    std::size_t next_delivery = 0;

    struct Pipe {
        std::uint32_t cam_left = 0;       // elements still to load
        std::uint64_t cam_ready_at = 0;   // stream may use the CAM from this cycle
        bool cam_loaded = false;
        std::uint32_t mul_queue = 0;
        std::deque<std::uint64_t> inflight;
        std::uint32_t sorter = 0;
        std::uint64_t merged = 0;
        bool flushing = false;   // mid-row forced drain
        bool draining = false;   // final drain
        bool done = false;
        std::uint32_t cam_cooldown = 0;
        std::uint32_t merge_cooldown = 0;
    };

    std::vector<Pipe> pipes(P);
    std::vector<std::vector<detail::StageState>> now(P, std::vector<detail::StageState>(5));
    std::vector<std::uint64_t> pipe_idle(P, 0);
    std::uint64_t sim_multiplies = 0, sim_inserts = 0, sim_merges = 0;

    std::size_t g = 0;          // current group
    std::size_t pass_idx = 0;   // current pass within the group
    std::size_t stream_pos = 0;
    std::uint32_t stream_cooldown = 0;
    std::uint64_t cycle = 0;
    std::uint64_t group_started = 0;
    bool group_fresh = true;
    const std::uint64_t queue_cap = cfg.bundle_capacity;

    auto matching_pending = [&](std::size_t p) {
        // Does pipeline p still have CAM/stream work in the current group?
        if (g >= plan.size()) return false;
        const GroupPlan& gp = plan[g];
        if (gp.row_of_pipe[p] == kNone) return false;
        for (std::size_t t = pass_idx; t < gp.passes.size(); ++t)
            if (gp.passes[t].a_xfer[p] != kNone) return true;
        return false;
    };

    while (g < plan.size() || !read.idle() || !write.idle()) {
        for (auto& row : now) std::fill(row.begin(), row.end(), detail::kIdle);

        // 1. reads deliver first, usable this very cycle
        const std::size_t got = read.step();
        for (std::size_t i = 0; i < got; ++i) delivered[next_delivery++] = 1;

        bool all_done = g >= plan.size();
        if (g < plan.size()) {
            GroupPlan& gp = plan[g];
            if (group_fresh) {
                for (std::uint32_t p = 0; p < P; ++p) {
                    pipes[p] = Pipe{};
                    if (gp.row_of_pipe[p] == kNone)
                        pipes[p].done = true;
                }
                pass_idx = 0;
                stream_pos = 0;
                stream_cooldown = 0;
                group_started = cycle;
                group_fresh = false;
            }
            Pass& pass = gp.passes[std::min(pass_idx, gp.passes.size() - 1)];
            const bool have_pass = pass_idx < gp.passes.size();

            // 2. drains (forced flush or final) feed the merge stage
            for (std::uint32_t p = 0; p < P; ++p) {
                Pipe& pp = pipes[p];
                if (pp.done) continue;
                if ((pp.flushing || pp.draining) && pp.sorter > 0) {
                    if (pp.merge_cooldown > 0) {
                        pp.merge_cooldown--;
                        now[p][3] = detail::kBusy;
                        now[p][4] = detail::kBusy;
                        continue;
                    }
                    pp.sorter--;
                    pp.merged++;
                    sim_merges++;
                    now[p][3] = detail::kBusy;
                    now[p][4] = detail::kBusy;
                    pp.merge_cooldown = k.merge - 1;
                    if (pp.sorter == 0) {
                        if (pp.flushing) pp.flushing = false;
                        if (pp.draining) {
                            pp.draining = false;
                            pp.done = true;
                            if (gp.write_bytes[p] > 0.0) write.enqueue(gp.write_bytes[p]);
                        }
                    }
                }
            }

            // 3. multiplier completions land in the sorter
            for (std::uint32_t p = 0; p < P; ++p) {
                Pipe& pp = pipes[p];
                while (!pp.inflight.empty() && pp.inflight.front() <= cycle) {
                    pp.inflight.pop_front();
                    pp.sorter++;
                    sim_inserts++;
                    if (now[p][3] == detail::kIdle) now[p][3] = detail::kBusy;
                }
                if (!pp.flushing && !pp.draining && pp.sorter >= cfg.sort_capacity)
                    pp.flushing = true;
            }

            // 4. multiply issue, one per cycle per pipeline
            for (std::uint32_t p = 0; p < P; ++p) {
                Pipe& pp = pipes[p];
                if (pp.done) continue;
                if (pp.mul_queue > 0) {
                    if (!pp.flushing && !pp.draining &&
                        pp.sorter + pp.inflight.size() < cfg.sort_capacity) {
                        pp.mul_queue--;
                        pp.inflight.push_back(cycle + k.multiply_latency);
                        sim_multiplies++;
                        now[p][2] = detail::kBusy;
                    } else {
                        now[p][2] = detail::kStalled;
                    }
                }
            }

            // 5. CAM loads for the current pass
            if (have_pass) {
                for (std::uint32_t p = 0; p < P; ++p) {
                    Pipe& pp = pipes[p];
                    if (pp.done || pass.a_xfer[p] == kNone || pp.cam_loaded) continue;
                    if (!delivered[pass.a_xfer[p]]) {
                        now[p][0] = detail::kStalled;
                        continue;
                    }
                    if (!pp.cam_left && !pp.cam_loaded) pp.cam_left = pass.a_len[p];
                    // pace: one element per cam_load cycles
                    if (pp.cam_cooldown > 0) {
                        pp.cam_cooldown--;
                        now[p][0] = detail::kBusy;
                        continue;
                    }
                    now[p][0] = detail::kBusy;
                    pp.cam_left--;
                    if (pp.cam_left == 0) {
                        pp.cam_loaded = true;
                        pp.cam_ready_at = cycle + 1;
                    } else {
                        pp.cam_cooldown = k.cam_load - 1;
                    }
                }
            }

            // 6. one broadcast element per cam_lookup cycles, lockstep
            if (have_pass) {
                bool cams_ready = true;
                for (std::uint32_t p = 0; p < P; ++p)
                    if (!pipes[p].done && pass.a_xfer[p] != kNone &&
                        (!pipes[p].cam_loaded || pipes[p].cam_ready_at > cycle))
                        cams_ready = false;

                if (stream_pos < pass.stream.size()) {
                    bool advanced = false;
                    if (cams_ready && stream_cooldown == 0) {
                        const Slot& slot = pass.stream[stream_pos];
                        bool blocked = !delivered[slot.xfer];
                        if (!blocked)
                            for (std::uint32_t p = 0; p < P; ++p)
                                if (pass.a_xfer[p] != kNone && pass.match[slot.local_row][p] &&
                                    pipes[p].mul_queue >= queue_cap)
                                    blocked = true;
                        if (!blocked) {
                            for (std::uint32_t p = 0; p < P; ++p) {
                                if (pass.a_xfer[p] == kNone) continue;
                                now[p][1] = detail::kBusy;
                                if (pass.match[slot.local_row][p]) pipes[p].mul_queue++;
                            }
                            stream_pos++;
                            stream_cooldown = k.cam_lookup - 1;
                            advanced = true;
                        }
                    } else if (stream_cooldown > 0) {
                        stream_cooldown--;
                        for (std::uint32_t p = 0; p < P; ++p)
                            if (pass.a_xfer[p] != kNone) now[p][1] = detail::kBusy;
                        advanced = true;
                    }
                    if (!advanced)
                        for (std::uint32_t p = 0; p < P; ++p)
                            if (pass.a_xfer[p] != kNone && !pipes[p].done)
                                now[p][1] = detail::kStalled;
                } else if (cams_ready) {
                    // pass complete: everyone moves on together
                    pass_idx++;
                    stream_pos = 0;
                    for (std::uint32_t p = 0; p < P; ++p) {
                        pipes[p].cam_loaded = false;
                        pipes[p].cam_left = 0;
                    }
                }
            }

            // 7. rows whose matching is over drain once their tail is empty
            for (std::uint32_t p = 0; p < P; ++p) {
                Pipe& pp = pipes[p];
                if (pp.done || pp.draining || pp.flushing) continue;
                if (matching_pending(p)) continue;
                if (pp.mul_queue == 0 && pp.inflight.empty()) {
                    if (pp.sorter > 0) {
                        pp.draining = true;
                        pp.merge_cooldown = 0;
                    } else {
                        pp.done = true;
                        if (gp.write_bytes[p] > 0.0) write.enqueue(gp.write_bytes[p]);
                    }
                }
            }

            all_done = true;
            for (std::uint32_t p = 0; p < P; ++p)
                if (!pipes[p].done) all_done = false;
        }

        // 8. writes are served after compute so small results never linger
        write.step();

        for (std::uint32_t p = 0; p < P; ++p) {
            bool idle = true;
            for (int s = 0; s < 5; ++s)
                if (now[p][s] != detail::kIdle) idle = false;
            if (idle) pipe_idle[p]++;
        }
        detail::commit_stages(rep.stages, now);
        ++cycle;

        if (g < plan.size() && all_done) {
            rep.group_cycles.push_back(cycle - group_started);
            ++g;
            group_fresh = true;
        }
    }

    rep.total_cycles = cycle;
    if (sim_multiplies != engine_stats.partial_products)
        throw std::logic_error("simulated multiplies disagree with the functional engine");
    if (sim_inserts != sim_multiplies || sim_merges != sim_multiplies)
        throw std::logic_error("stage element counts are not conserved");

    std::uint64_t idle_total = 0;
    for (std::uint32_t p = 0; p < P; ++p) idle_total += pipe_idle[p];
    rep.pipeline_idle_fraction =
        rep.total_cycles ? static_cast<double>(idle_total) /
                               (static_cast<double>(rep.total_cycles) * P)
                         : 0.0;

    detail::finish_report(rep, cfg, read, write, prep_seconds);
    return rep;
}

// ---------------------------------------------------------------------------
// Factorization kernel machine
// ---------------------------------------------------------------------------
//
// Columns run under a hard barrier.  Within a column the update triples are
// dealt round-robin across pipelines; every active pipeline first recomputes
// the diagonal (the published design replicates it instead of broadcasting
// the result), which the report tracks as redundant work.  Timing is purely
// structural: it needs the stream shapes and the symbolic pattern, never the
// numeric values.

inline SimReport simulate_cholesky(const RirStream& stream, const CscMatrix& a,
                                   const SymbolicPattern& pattern, const SimConfig& cfg,
                                   std::span<const double> prep_seconds = {}) {
    cfg.validate();
    if (stream.kernel != StreamKernel::cholesky)
        throw std::invalid_argument("stream does not carry a factorization schedule");
    const index_t n = pattern.n;
    if (stream.rows != n || stream.cols != n || a.rows != n || a.cols != n)
        throw std::invalid_argument("stream, matrix and pattern dimensions disagree");

    const std::uint32_t P = cfg.pipelines;
    const StageCosts& k = cfg.costs;

    SimReport rep;
    rep.kernel = "cholesky";
    rep.fp_units = P * cfg.multipliers_per_pe + P;  // dot units plus one div/sqrt unit each
    rep.stage_names = detail::cholesky_stage_names();
    rep.stages.assign(P, std::vector<StageCycles>(3));
    rep.group_count = n;
    rep.result_nonzeros = pattern.nnz();
    rep.sqrts = n;

    // --- Plan: split the stream into columns, derive per-triple work ---
    struct Triple {
        index_t row = 0;
        std::uint32_t len = 0;    // prior fill of the row, elements streamed
        std::uint64_t pairs = 0;  // dot-product multiplies
        std::uint32_t xfer = kNoParent;  // row data transfer, or none
    };
    struct Column {
        std::uint32_t fill = 0;            // prior fill of row k, CAM contents
        std::uint32_t cam_xfer = 0;        // row-k broadcast transfer
        bool has_cam_xfer = false;
        std::uint32_t gate_xfer = 0;       // last of the RA/extent transfers
        std::vector<Triple> triples;       // ascending rows, diagonal first
    };

    std::vector<double> xfer_bytes;
    std::vector<Column> cols(n);
    std::vector<std::vector<index_t>> row_cols(n);  // filled columns per row, ascending
    std::uint64_t serial = 0;

    {
        std::size_t rec = 0;
        for (index_t col = 0; col < n; ++col) {
            Column& c = cols[col];
            std::uint64_t a_col_elems = 0;
            while (rec < stream.records.size() &&
                   std::holds_alternative<RirBundle>(stream.records[rec])) {
                const RirBundle& b = std::get<RirBundle>(stream.records[rec]);
                if (b.shared != col) break;
                a_col_elems += b.elements.size();
                xfer_bytes.push_back(static_cast<double>(bundle_wire_bytes(b.elements.size())));
                ++rec;
            }
            if (rec >= stream.records.size() ||
                !std::holds_alternative<ExtentRecord>(stream.records[rec]))
                throw std::invalid_argument("stream is missing the extent record for a column");
            const ExtentRecord& ext = std::get<ExtentRecord>(stream.records[rec]);
            if (ext.column != col)
                throw std::invalid_argument("extent record is out of column order");
            ++rec;

            std::uint64_t lower_nnz = 0;
            for (index_t i = a.col_ptr[col]; i < a.col_ptr[col + 1]; ++i)
                if (a.row_idx[i] >= col) ++lower_nnz;
            if (lower_nnz != a_col_elems)
                throw std::invalid_argument("stream bundles disagree with the matrix column");

            c.gate_xfer = static_cast<std::uint32_t>(xfer_bytes.size());
            xfer_bytes.push_back(static_cast<double>(extent_wire_bytes(ext.extents.size())));

            const std::vector<index_t>& rows = pattern.column_rows[col];
            if (ext.extents.size() != rows.size())
                throw std::invalid_argument("extent record disagrees with the symbolic pattern");

            c.fill = static_cast<std::uint32_t>(row_cols[col].size());
            if (c.fill > 0) {
                c.cam_xfer = static_cast<std::uint32_t>(xfer_bytes.size());
                c.has_cam_xfer = true;
                xfer_bytes.push_back(static_cast<double>(c.fill) * cfg.element_bytes);
            }

            c.triples.resize(rows.size());
            std::uint64_t col_serial =
                2ull * k.serial_row_access +
                static_cast<std::uint64_t>(c.fill) * k.cam_load + k.sqrt_latency;

            for (std::size_t i = 0; i < rows.size(); ++i) {
                const index_t r = rows[i];
                if (ext.extents[i].row != r)
                    throw std::invalid_argument("extent rows disagree with the symbolic pattern");
                Triple& t = c.triples[i];
                t.row = r;
                t.len = static_cast<std::uint32_t>(row_cols[r].size());
                if (ext.extents[i].end - ext.extents[i].start != t.len ||
                    ext.extents[i].start != pattern.row_offsets[r])
                    throw std::invalid_argument("extent span disagrees with the factor layout");
                // pairs: columns below col filled in both row r and row k
                const auto& rr = row_cols[r];
                const auto& rk = row_cols[col];
                std::size_t x = 0, y = 0;
                while (x < rr.size() && y < rk.size()) {
                    if (rr[x] < rk[y]) ++x;
                    else if (rk[y] < rr[x]) ++y;
                    else { ++t.pairs; ++x; ++y; }
                }
                if (i > 0 && t.len > 0) {
                    t.xfer = static_cast<index_t>(xfer_bytes.size());
                    xfer_bytes.push_back(static_cast<double>(t.len) * cfg.element_bytes);
                }
                rep.multiplies += t.pairs;
                if (i == 0) {
                    col_serial += static_cast<std::uint64_t>(t.len) * k.cam_lookup +
                                  t.pairs * (k.multiply_latency + 1);
                } else {
                    col_serial += k.serial_row_access +
                                  static_cast<std::uint64_t>(t.len) * k.cam_lookup +
                                  t.pairs * (k.multiply_latency + 1) + k.divide_latency;
                    rep.divides++;
                }
            }
            serial += col_serial;
            for (index_t r : rows) row_cols[r].push_back(col);
        }
        if (rec != stream.records.size())
            throw std::invalid_argument("stream carries records beyond the last column");
    }
    rep.serial_cycles = serial;
    rep.flops = 2 * rep.multiplies + rep.divides + rep.sqrts;

    // --- Cycle machine ---
    MemoryChannel read(cfg.read_bytes_per_cycle());
    MemoryChannel write(cfg.write_bytes_per_cycle());
    for (double b : xfer_bytes) read.enqueue(b);
    std::vector<std::uint8_t> delivered(xfer_bytes.size(), 0);
    std::size_t next_delivery = 0;

    struct Work {  // one dot+divsqrt job on a pipeline
        std::uint32_t len = 0;
        std::uint64_t pairs = 0;
        std::uint32_t xfer = kNoParent;
        std::uint32_t post_latency = 0;  // sqrt or divide
        bool writes = false;             // redundant diagonals do not write
    };
    struct Pipe {
        std::vector<Work> items;
        std::size_t cur = 0;
        std::uint64_t dot_left = 0;
        bool dot_running = false;
        std::deque<Work> divq;
        std::uint64_t div_left = 0;
        bool div_writes = false;
    };

    std::vector<Pipe> pipes(P);
    std::vector<std::vector<detail::StageState>> now(P, std::vector<detail::StageState>(3));
    std::vector<std::uint64_t> pipe_idle(P, 0);

    index_t col = 0;
    bool col_fresh = true;
    std::uint64_t cam_left = 0;
    bool cam_done = false;
    std::uint32_t active = 0;
    std::uint64_t cycle = 0;
    std::uint64_t col_started = 0;

    auto dot_cycles = [&](const Column& c, const Work& w) -> std::uint64_t {
        if (c.fill == 0) return 1;  // just the input value
        const std::uint64_t chunks = (c.fill + cfg.cam_size - 1) / cfg.cam_size;
        const std::uint64_t stream_cy =
            chunks * static_cast<std::uint64_t>(w.len) * k.cam_lookup;
        const std::uint64_t mul_cy =
            (w.pairs + cfg.multipliers_per_pe - 1) / cfg.multipliers_per_pe;
        const std::uint64_t tail = w.pairs > 0 ? k.multiply_latency + 1 : 1;
        return std::max(stream_cy, mul_cy) + tail;
    };

    while (col < n || !read.idle() || !write.idle()) {
        for (auto& row : now) std::fill(row.begin(), row.end(), detail::kIdle);

        const std::size_t got = read.step();
        for (std::size_t i = 0; i < got; ++i) delivered[next_delivery++] = 1;

        bool col_done = col >= n;
        if (col < n) {
            Column& c = cols[col];
            if (col_fresh) {
                active = static_cast<std::uint32_t>(
                    std::min<std::size_t>(P, c.triples.size()));
                for (std::uint32_t p = 0; p < P; ++p) {
                    pipes[p] = Pipe{};
                    if (p >= active) continue;
                    Work diag;
                    diag.len = c.triples[0].len;
                    diag.pairs = c.triples[0].pairs;
                    diag.post_latency = k.sqrt_latency;
                    diag.writes = (p == 0);
                    pipes[p].items.push_back(diag);
                    if (p > 0) {
                        rep.redundant_multiplies += diag.pairs;
                        rep.redundant_sqrts++;
                    }
                }
                for (std::size_t i = 1; i < c.triples.size(); ++i) {
                    Work w;
                    w.len = c.triples[i].len;
                    w.pairs = c.triples[i].pairs;
                    w.xfer = c.triples[i].xfer;
                    w.post_latency = k.divide_latency;
                    w.writes = true;
                    pipes[i % P].items.push_back(w);
                }
                cam_left = static_cast<std::uint64_t>(c.fill) * k.cam_load;
                cam_done = (cam_left == 0);
                col_started = cycle;
                col_fresh = false;
            }

            // div/sqrt units retire one job at a time
            for (std::uint32_t p = 0; p < active; ++p) {
                Pipe& pp = pipes[p];
                if (pp.div_left == 0 && !pp.divq.empty()) {
                    pp.div_left = pp.divq.front().post_latency;
                    pp.div_writes = pp.divq.front().writes;
                    pp.divq.pop_front();
                }
                if (pp.div_left > 0) {
                    now[p][2] = detail::kBusy;
                    if (--pp.div_left == 0 && pp.div_writes)
                        write.enqueue(static_cast<double>(cfg.element_bytes));
                }
            }

            // column-wide CAM broadcast of row k
            bool col_inputs_ready = delivered[c.gate_xfer] &&
                                    (!c.has_cam_xfer || delivered[c.cam_xfer]);
            if (!cam_done) {
                if (!col_inputs_ready) {
                    for (std::uint32_t p = 0; p < active; ++p)
                        now[p][0] = detail::kStalled;
                } else {
                    for (std::uint32_t p = 0; p < active; ++p)
                        now[p][0] = detail::kBusy;
                    if (--cam_left == 0) cam_done = true;
                }
            } else {
                // dots run once the CAM holds row k and the column inputs landed
                for (std::uint32_t p = 0; p < active; ++p) {
                    Pipe& pp = pipes[p];
                    if (pp.dot_running) {
                        now[p][1] = detail::kBusy;
                        if (--pp.dot_left == 0) {
                            pp.dot_running = false;
                            pp.divq.push_back(pp.items[pp.cur]);
                            pp.cur++;
                        }
                        continue;
                    }
                    if (pp.cur >= pp.items.size()) continue;
                    const Work& w = pp.items[pp.cur];
                    if (!col_inputs_ready || (w.xfer != kNoParent && !delivered[w.xfer])) {
                        now[p][1] = detail::kStalled;
                        continue;
                    }
                    pp.dot_running = true;
                    pp.dot_left = dot_cycles(c, w);
                    now[p][1] = detail::kBusy;
                    if (--pp.dot_left == 0) {
                        pp.dot_running = false;
                        pp.divq.push_back(pp.items[pp.cur]);
                        pp.cur++;
                    }
                }
            }

            col_done = cam_done;
            for (std::uint32_t p = 0; p < active && col_done; ++p) {
                const Pipe& pp = pipes[p];
                if (pp.cur < pp.items.size() || pp.dot_running || !pp.divq.empty() ||
                    pp.div_left > 0)
                    col_done = false;
            }
        }

        write.step();

        for (std::uint32_t p = 0; p < P; ++p) {
            bool idle = true;
            for (int s = 0; s < 3; ++s)
                if (now[p][s] != detail::kIdle) idle = false;
            if (idle) pipe_idle[p]++;
        }
        detail::commit_stages(rep.stages, now);
        ++cycle;

        if (col < n && col_done) {
            rep.group_cycles.push_back(cycle - col_started);
            ++col;
            col_fresh = true;
        }
    }

    rep.total_cycles = cycle;
    std::uint64_t idle_total = 0;
    for (std::uint32_t p = 0; p < P; ++p) idle_total += pipe_idle[p];
    rep.pipeline_idle_fraction =
        rep.total_cycles ? static_cast<double>(idle_total) /
                               (static_cast<double>(rep.total_cycles) * P)
                         : 0.0;

    detail::finish_report(rep, cfg, read, write, prep_seconds);
    return rep;
}

}  // namespace reap
