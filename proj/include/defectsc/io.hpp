#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "defectsc/metrics.hpp"
#include "defectsc/montecarlo.hpp"

namespace defectsc {

inline constexpr int kChipFormatVersion = 1;

inline std::string chip_id(const Chip& chip) {
    std::ostringstream os;
    os << "d" << chip.distance() << "_y" << chip.yield() << "_s" << chip.seed();
    return os.str();
}

inline nlohmann::json chip_to_json(const Chip& chip) {
    nlohmann::json j;
    j["format"] = "defectsc-chip";
    j["version"] = kChipFormatVersion;
    j["distance"] = chip.distance();
    j["yield"] = chip.yield();
    j["seed"] = chip.seed();
    auto& dev = j["devices"] = nlohmann::json::array();
    for (int i = 0; i < chip.num_devices(); ++i)
        dev.push_back({{"role", chip.is_data(i) ? "data" : "syndrome"}, {"working", chip.working(i)}});
    return j;
}

inline Chip chip_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "defectsc-chip") throw std::runtime_error("not a chip file");
    if (j.value("version", 0) != kChipFormatVersion) throw std::runtime_error("unsupported chip file version");
    Chip chip(j.at("distance").get<int>(), j.at("yield").get<double>(), j.at("seed").get<std::uint64_t>());
    const auto& dev = j.at("devices");
    if (static_cast<int>(dev.size()) != chip.num_devices()) throw std::runtime_error("chip file: wrong device count");
    for (int i = 0; i < chip.num_devices(); ++i) {
        std::string role = dev[i].at("role").get<std::string>();
        if (role != (chip.is_data(i) ? "data" : "syndrome")) throw std::runtime_error("chip file: role mismatch");
        chip.set_working(i, dev[i].at("working").get<bool>());
    }
    return chip;
}

inline void write_chip(const Chip& chip, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << chip_to_json(chip).dump(1) << "\n";
}

inline Chip read_chip(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    return chip_from_json(nlohmann::json::parse(f));
}

// One gate per line: `step kind device[,device] owner`, ordered by (step, device).
inline void write_circuit(std::ostream& os, const WholeCircuit& wc) {
    os << "# defectsc-circuit v1 period " << wc.period << "\n";
    for (int t = 0; t < wc.period; ++t) {
        auto gs = wc.steps[t];
        std::sort(gs.begin(), gs.end(), [](const Gate& a, const Gate& b) { return a.a < b.a; });
        for (const auto& g : gs) {
            os << t << " " << gate_name(g.kind) << " " << g.a;
            if (g.b >= 0) os << "," << g.b;
            os << " " << g.owner << "\n";
        }
    }
}

inline void write_stabilizers(std::ostream& os, const StabilizerSet& set) {
    os << "# defectsc-stabilizers v1\n";
    for (const auto& s : set.stabilizers) {
        os << s.id << " " << kind_char(s.kind) << " " << s.name() << " data";
        for (int q : s.data) os << " " << q;
        os << " ancillas";
        for (int a : s.ancillas) os << " " << a;
        os << "\n";
    }
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

inline void write_metrics_header(std::ostream& os) {
    os << "# defectsc-metrics v1\nchip_id";
    for (const auto& [k, v] : ChipMetrics{}.values()) os << "," << k;
    os << ",steps_per_round\n";
}

inline void write_metrics_row(std::ostream& os, const std::string& id, const ChipMetrics& m) {
    os << id;
    for (const auto& [k, v] : m.values()) os << "," << fmt(v);
    os << "," << fmt(m.steps_per_round) << "\n";
}

inline void write_results_header(std::ostream& os) {
    os << "# defectsc-results v1\n"
          "chip_id,d,y,p,rounds,x_errors,z_errors,x_rate,z_rate,ci_low,ci_high,z_ci_low,z_ci_high\n";
}

inline void write_results_row(std::ostream& os, const Chip& chip, const PointResult& r) {
    auto cx = r.x_ci(), cz = r.z_ci();
    os << chip_id(chip) << "," << chip.distance() << "," << fmt(chip.yield()) << "," << fmt(r.p) << "," << r.rounds
       << "," << r.x_errors << "," << r.z_errors << "," << fmt(r.x_rate()) << "," << fmt(r.z_rate()) << ","
       << fmt(cx.lo) << "," << fmt(cx.hi) << "," << fmt(cz.lo) << "," << fmt(cz.hi) << "\n";
}

struct ResultRow {
    std::string chip_id;
    int d = 0;
    double y = 0, p = 0;
    long long rounds = 0, x_errors = 0, z_errors = 0;
    double x_rate = 0, z_rate = 0, ci_low = 0, ci_high = 0;
};

inline std::vector<ResultRow> read_results(std::istream& is) {
    std::vector<ResultRow> out;
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        std::stringstream ss(line);
        std::vector<std::string> f;
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() < 11) throw std::runtime_error("results: short row");
        ResultRow r;
        r.chip_id = f[0];
        r.d = std::stoi(f[1]);
        r.y = std::stod(f[2]);
        r.p = std::stod(f[3]);
        r.rounds = std::stoll(f[4]);
        r.x_errors = std::stoll(f[5]);
        r.z_errors = std::stoll(f[6]);
        r.x_rate = std::stod(f[7]);
        r.z_rate = std::stod(f[8]);
        r.ci_low = std::stod(f[9]);
        r.ci_high = std::stod(f[10]);
        out.push_back(r);
    }
    return out;
}

// CSV: cycle (round), stabilizer id, outcome (0 = +1), for lane 0 of a noisy run.
inline void write_syndrome_trace(std::ostream& os, const CompiledChip& cc, double p, int rounds, std::uint64_t seed) {
    FrameSim sim(cc.whole, cc.locations);
    NoiseSource noise(p, seed);
    std::vector<MeasRecord> recs;
    const int R = cc.whole.rounds_per_block();
    os << "# defectsc-trace v1\ncycle,stabilizer,outcome\n";
    for (int r = 0; r < rounds; ++r) {
        long long end = static_cast<long long>(r / R) * cc.whole.period + cc.whole.round_ends[r % R];
        while (sim.step() <= end) sim.run_step(&noise, nullptr, recs);
        for (const auto& m : recs) os << r << "," << m.stab << "," << (m.bits & 1) << "\n";
        recs.clear();
    }
}

}  // namespace defectsc
