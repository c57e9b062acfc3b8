// Deterministic report serialization.  JSON uses insertion-ordered keys and
// CSV columns are fixed per schema version, so identical runs produce
// byte-identical files (criterion: repeatable reports).  Doubles print with
// %.12g; no timestamps or host-specific fields ever enter these documents.

#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reap/sim.hpp"
#include "reap/version.hpp"

namespace reap {

using ordered_json = nlohmann::ordered_json;

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline ordered_json config_to_json(const SimConfig& c) {
    ordered_json j;
    j["pipelines"] = c.pipelines;
    j["frequency_mhz"] = c.frequency_mhz;
    j["bundle_capacity"] = c.bundle_capacity;
    j["cam_size"] = c.cam_size;
    j["read_bandwidth_gbps"] = c.read_bandwidth_gbps;
    j["write_bandwidth_gbps"] = c.write_bandwidth_gbps;
    j["multipliers_per_pe"] = c.multipliers_per_pe;
    j["sort_capacity"] = c.sort_capacity;
    j["element_bytes"] = c.element_bytes;
    ordered_json costs;
    costs["cam_load"] = c.costs.cam_load;
    costs["cam_lookup"] = c.costs.cam_lookup;
    costs["multiply_latency"] = c.costs.multiply_latency;
    costs["sort_insert"] = c.costs.sort_insert;
    costs["merge"] = c.costs.merge;
    costs["divide_latency"] = c.costs.divide_latency;
    costs["sqrt_latency"] = c.costs.sqrt_latency;
    costs["serial_row_access"] = c.costs.serial_row_access;
    j["costs"] = costs;
    return j;
}

inline ordered_json report_to_json(const SimReport& r) {
    ordered_json j;
    j["kernel"] = r.kernel;
    j["pipelines"] = r.pipelines;
    j["fp_units"] = r.fp_units;
    j["total_cycles"] = r.total_cycles;
    j["fpga_seconds"] = r.fpga_seconds;
    j["cpu_prep_seconds"] = r.cpu_prep_seconds;
    j["overlapped_total_seconds"] = r.overlapped_total_seconds;
    j["flops"] = r.flops;
    j["multiplies"] = r.multiplies;
    j["merge_adds"] = r.merge_adds;
    j["divides"] = r.divides;
    j["sqrts"] = r.sqrts;
    j["redundant_multiplies"] = r.redundant_multiplies;
    j["redundant_sqrts"] = r.redundant_sqrts;
    j["result_nonzeros"] = r.result_nonzeros;
    j["explicit_zero_outputs"] = r.explicit_zero_outputs;
    j["gflops"] = r.gflops;
    j["gflops_per_fp_unit"] = r.gflops_per_fp_unit;
    j["bytes_read"] = r.bytes_read;
    j["bytes_written"] = r.bytes_written;
    j["peak_read_bytes_per_cycle"] = r.peak_read_bytes_per_cycle;
    j["peak_write_bytes_per_cycle"] = r.peak_write_bytes_per_cycle;
    j["read_budget_bytes_per_cycle"] = r.read_budget_bytes_per_cycle;
    j["write_budget_bytes_per_cycle"] = r.write_budget_bytes_per_cycle;
    j["pipeline_idle_fraction"] = r.pipeline_idle_fraction;
    j["serial_cycles"] = r.serial_cycles;
    j["serial_seconds"] = r.serial_seconds;
    j["serial_gflops_per_unit"] = r.serial_gflops_per_unit;
    j["advantage_vs_serial"] = r.advantage_vs_serial;
    j["group_count"] = r.group_count;

    ordered_json stages = ordered_json::array();
    for (std::size_t s = 0; s < r.stage_names.size(); ++s) {
        StageCycles total;
        for (const auto& pipe : r.stages) {
            total.busy += pipe[s].busy;
            total.idle += pipe[s].idle;
            total.stalled += pipe[s].stalled;
        }
        ordered_json st;
        st["stage"] = r.stage_names[s];
        st["busy"] = total.busy;
        st["idle"] = total.idle;
        st["stalled"] = total.stalled;
        stages.push_back(st);
    }
    j["stages"] = stages;
    j["group_cycles"] = r.group_cycles;
    return j;
}

// One row per report; columns are fixed for schema version 1.
inline std::string sim_csv_header() {
    return "schema_version,kernel,pipelines,fp_units,total_cycles,fpga_seconds,"
           "cpu_prep_seconds,overlapped_total_seconds,flops,multiplies,merge_adds,"
           "divides,sqrts,redundant_multiplies,result_nonzeros,gflops,"
           "gflops_per_fp_unit,bytes_read,bytes_written,pipeline_idle_fraction,"
           "serial_cycles,advantage_vs_serial,group_count";
}

inline std::string sim_csv_row(const SimReport& r) {
    std::string out;
    out += std::to_string(kSchemaVersion);
    out += ',';
    out += r.kernel;
    auto add_u = [&](std::uint64_t v) {
        out += ',';
        out += std::to_string(v);
    };
    auto add_d = [&](double v) {
        out += ',';
        out += format_double(v);
    };
    add_u(r.pipelines);
    add_u(r.fp_units);
    add_u(r.total_cycles);
    add_d(r.fpga_seconds);
    add_d(r.cpu_prep_seconds);
    add_d(r.overlapped_total_seconds);
    add_u(r.flops);
    add_u(r.multiplies);
    add_u(r.merge_adds);
    add_u(r.divides);
    add_u(r.sqrts);
    add_u(r.redundant_multiplies);
    add_u(r.result_nonzeros);
    add_d(r.gflops);
    add_d(r.gflops_per_fp_unit);
    add_d(r.bytes_read);
    add_d(r.bytes_written);
    add_d(r.pipeline_idle_fraction);
    add_u(r.serial_cycles);
    add_d(r.advantage_vs_serial);
    add_u(r.group_count);
    return out;
}

}  // namespace reap
