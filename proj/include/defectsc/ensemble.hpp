#pragma once

#include <string>
#include <vector>

#include "defectsc/metrics.hpp"
#include "defectsc/montecarlo.hpp"

namespace defectsc {

enum class ChipStatus { ok, unencodable, uncoverable, unschedulable };

inline const char* status_name(ChipStatus s) {
    switch (s) {
        case ChipStatus::ok: return "ok";
        case ChipStatus::unencodable: return "unencodable";
        case ChipStatus::uncoverable: return "uncoverable";
        case ChipStatus::unschedulable: return "unschedulable";
    }
    return "?";
}

struct Prepared {
    ChipStatus status = ChipStatus::ok;
    std::string message;
    std::shared_ptr<CompiledChip> compiled;
};

inline Prepared prepare_chip(const Chip& chip, bool idle_noise) {
    Prepared out;
    if (!check_encodable(chip)) {
        out.status = ChipStatus::unencodable;
        out.message = "no logical qubit can be encoded";
        return out;
    }
    try {
        out.compiled = compile_chip(chip, idle_noise);
    } catch (const ChipError& e) {
        out.status = e.code() == ChipError::Code::unencodable ? ChipStatus::unencodable : ChipStatus::uncoverable;
        out.message = e.what();
    } catch (const ScheduleError& e) {
        out.status = ChipStatus::unschedulable;
        out.message = e.what();
    }
    return out;
}

struct EnsembleEntry {
    Chip chip;
    ChipStatus status = ChipStatus::ok;
    ChipMetrics metrics;
    PointResult result;
};

struct Ensemble {
    int generated = 0;
    std::vector<EnsembleEntry> entries;  // every generated chip, in seed order

    std::vector<const EnsembleEntry*> usable() const {
        std::vector<const EnsembleEntry*> out;
        for (const auto& e : entries)
            if (e.status == ChipStatus::ok) out.push_back(&e);
        return out;
    }
};

// Chips with seeds seed0, seed0+1, ...; each usable chip is simulated at cfg.ps[0] only.
inline Ensemble run_ensemble(int distance, double yield, int count, std::uint64_t seed0, const RunConfig& cfg,
                             bool idle_noise = true) {
    Ensemble ens;
    ens.generated = count;
    RunConfig one = cfg;
    one.ps.resize(1);
    for (int i = 0; i < count; ++i) {
        EnsembleEntry e;
        e.chip = generate_chip(distance, yield, seed0 + static_cast<std::uint64_t>(i));
        Prepared pr = prepare_chip(e.chip, idle_noise);
        e.status = pr.status;
        if (pr.compiled) {
            e.metrics = compute_metrics(e.chip, pr.compiled->set, pr.compiled->whole);
            one.seed = shard_seed(cfg.seed, static_cast<std::uint64_t>(i));
            e.result = run_logical_error_rate(*pr.compiled, one).front();
        }
        ens.entries.push_back(std::move(e));
    }
    return ens;
}

struct MetricCorrelation {
    std::string name;
    bool defined_linear = false, defined_log = false;
    double linear = 0.0, logarithmic = 0.0;
};

// Correlation of every metric with the logical X rate over the usable chips.
inline std::vector<MetricCorrelation> correlate_metrics(const Ensemble& ens) {
    auto use = ens.usable();
    std::vector<double> rate;
    for (auto* e : use) rate.push_back(e->result.x_rate());
    std::vector<MetricCorrelation> out;
    auto names = ChipMetrics{}.values();
    for (std::size_t k = 0; k < names.size(); ++k) {
        MetricCorrelation mc;
        mc.name = names[k].first;
        std::vector<double> x;
        for (auto* e : use) x.push_back(e->metrics.values()[k].second);
        try {
            mc.linear = correlate(x, rate, CorrelationMode::linear);
            mc.defined_linear = true;
        } catch (const UndefinedCorrelation&) {
        }
        try {
            mc.logarithmic = correlate(x, rate, CorrelationMode::logarithmic);
            mc.defined_log = true;
        } catch (const UndefinedCorrelation&) {
        }
        out.push_back(mc);
    }
    return out;
}

// 1-based rank of a metric by |linear correlation|, undefined correlations ranked last.
inline int linear_rank(const std::vector<MetricCorrelation>& cs, const std::string& name) {
    auto key = [](const MetricCorrelation& c) { return c.defined_linear ? std::abs(c.linear) : -1.0; };
    double mine = -2.0;
    for (const auto& c : cs)
        if (c.name == name) mine = key(c);
    if (mine < -1.5) throw std::invalid_argument("unknown metric " + name);
    int rank = 1;
    for (const auto& c : cs)
        if (key(c) > mine) ++rank;
    return rank;
}

struct CullLevel {
    double keep = 1.0;
    std::size_t kept = 0;
    double geo_mean_rate = 0.0;
    double mean_faulty = 0.0;
};

inline CullLevel cull_level(const Ensemble& ens, double keep) {
    auto use = ens.usable();
    std::vector<double> rates;
    for (auto* e : use) rates.push_back(e->result.x_rate());
    CullLevel cl;
    cl.keep = keep;
    std::vector<std::size_t> idx;
    if (keep >= 1.0) {
        for (std::size_t i = 0; i < use.size(); ++i) idx.push_back(i);
    } else {
        idx = cull(rates, static_cast<std::size_t>(ens.generated), keep);
    }
    cl.kept = idx.size();
    if (idx.empty()) return cl;
    std::vector<double> r;
    double f = 0;
    for (auto i : idx) {
        r.push_back(rates[i]);
        f += use[i]->metrics.n_faulty_qubits;
    }
    cl.geo_mean_rate = geometric_mean(r);
    cl.mean_faulty = f / static_cast<double>(idx.size());
    return cl;
}

}  // namespace defectsc
