#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "defectsc/circuits.hpp"
#include "defectsc/stabilizers.hpp"

namespace defectsc {

// Structural metrics of one compiled chip; Z stabilizers unless the name says otherwise.
struct ChipMetrics {
    int n_stabilizers = 0;
    int n_faulty_qubits = 0;
    int n_faulty_data = 0;
    int n_faulty_syndrome = 0;
    int reduced_distance = 0;
    int n_z_stabs = 0;
    double biggest_qubits = 0, average_qubits = 0;
    double biggest_data = 0, average_data = 0;
    double deepest_depth = 0, average_depth = 0;
    double biggest_kq = 0, average_kq = 0;
    double biggest_kdq = 0, average_kdq = 0;
    double biggest_cycle = 0, average_cycle = 0;
    double biggest_cq = 0, average_cq = 0;
    double biggest_cdq = 0, average_cdq = 0;
    double z_meas_per_step = 0;
    double steps_per_round = 0;

    // Table column order; used for CSV headers and correlation reports.
    std::vector<std::pair<std::string, double>> values() const {
        return {{"n_stabilizers", double(n_stabilizers)},
                {"n_faulty_qubits", double(n_faulty_qubits)},
                {"n_faulty_data", double(n_faulty_data)},
                {"n_faulty_syndrome", double(n_faulty_syndrome)},
                {"reduced_distance", double(reduced_distance)},
                {"n_z_stabs", double(n_z_stabs)},
                {"biggest_qubits_z", biggest_qubits},
                {"average_qubits_z", average_qubits},
                {"biggest_data_z", biggest_data},
                {"average_data_z", average_data},
                {"deepest_depth_z", deepest_depth},
                {"average_depth_z", average_depth},
                {"biggest_kq_z", biggest_kq},
                {"average_kq_z", average_kq},
                {"biggest_kdq_z", biggest_kdq},
                {"average_kdq_z", average_kdq},
                {"biggest_cycle_z", biggest_cycle},
                {"average_cycle_z", average_cycle},
                {"biggest_cq_z", biggest_cq},
                {"average_cq_z", average_cq},
                {"biggest_cdq_z", biggest_cdq},
                {"average_cdq_z", average_cdq},
                {"z_meas_per_step", z_meas_per_step}};
    }
};

inline ChipMetrics compute_metrics(const Chip& chip, const StabilizerSet& set, const WholeCircuit& wc) {
    ChipMetrics m;
    m.n_stabilizers = static_cast<int>(set.stabilizers.size());
    m.n_faulty_qubits = chip.count_faulty();
    m.n_faulty_data = chip.count_faulty(Role::data);
    m.n_faulty_syndrome = chip.count_faulty(Role::syndrome);
    m.reduced_distance = std::min(reduced_distance(set, Kind::X), reduced_distance(set, Kind::Z));
    auto upd = [](double& big, double& sum, double v) {
        big = std::max(big, v);
        sum += v;
    };
    long long z_meas = 0;
    for (const auto& s : set.stabilizers) {
        if (s.kind != Kind::Z) continue;
        ++m.n_z_stabs;
        double q = wc.q[s.id], dq = wc.dq[s.id], k = wc.depth[s.id], c = wc.cycle(s.id);
        upd(m.biggest_qubits, m.average_qubits, q);
        upd(m.biggest_data, m.average_data, static_cast<double>(s.data.size()));
        upd(m.deepest_depth, m.average_depth, k);
        upd(m.biggest_kq, m.average_kq, k * q);
        upd(m.biggest_kdq, m.average_kdq, k * dq);
        upd(m.biggest_cycle, m.average_cycle, c);
        upd(m.biggest_cq, m.average_cq, c * q);
        upd(m.biggest_cdq, m.average_cdq, c * dq);
        z_meas += static_cast<long long>(wc.meas_steps[s.id].size());
    }
    if (m.n_z_stabs > 0) {
        double n = m.n_z_stabs;
        for (double* v : {&m.average_qubits, &m.average_data, &m.average_depth, &m.average_kq, &m.average_kdq,
                          &m.average_cycle, &m.average_cq, &m.average_cdq})
            *v /= n;
    }
    m.z_meas_per_step = static_cast<double>(z_meas) / wc.period;
    m.steps_per_round = wc.steps_per_round();
    return m;
}

class UndefinedCorrelation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class CorrelationMode { linear, logarithmic };

// Pearson coefficient of (x, y), or of (x, ln y) in logarithmic mode.
inline double correlate(const std::vector<double>& x, const std::vector<double>& y, CorrelationMode mode) {
    if (x.size() != y.size()) throw std::invalid_argument("correlate: size mismatch");
    if (x.size() < 3) throw UndefinedCorrelation("correlate: fewer than 3 records");
    std::vector<double> yy = y;
    if (mode == CorrelationMode::logarithmic)
        for (double& v : yy) {
            if (!(v > 0.0)) throw UndefinedCorrelation("correlate: non-positive rate in logarithmic mode");
            v = std::log(v);
        }
    double n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(yy.begin(), yy.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double a = x[i] - mx, b = yy[i] - my;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw UndefinedCorrelation("correlate: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double geometric_mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("geometric_mean: empty");
    double s = 0;
    for (double x : v) {
        if (x < 0.0) throw std::invalid_argument("geometric_mean: negative value");
        if (x == 0.0) return 0.0;
        s += std::log(x);
    }
    return std::exp(s / static_cast<double>(v.size()));
}

// Indices of the best floor(original_count * keep) rates, never more than are available.
inline std::vector<std::size_t> cull(const std::vector<double>& rates, std::size_t original_count, double keep) {
    if (!(keep > 0.0 && keep <= 1.0)) throw std::invalid_argument("cull: keep fraction must be in (0,1]");
    if (original_count < rates.size()) throw std::invalid_argument("cull: original count below record count");
    std::vector<std::size_t> idx(rates.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rates[a] < rates[b]; });
    auto n = static_cast<std::size_t>(std::floor(static_cast<double>(original_count) * keep + 1e-9));
    idx.resize(std::min(n, idx.size()));
    return idx;
}

// (p, rate) samples of one perfect-lattice curve.
using Curve = std::vector<std::pair<double, double>>;

// ln(rate) at p, linear in ln p between bracketing samples.
inline double log_rate_at(const Curve& curve, double p) {
    Curve c = curve;
    std::sort(c.begin(), c.end());
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i].first == p) {
            if (!(c[i].second > 0.0)) throw std::domain_error("log_rate_at: zero rate");
            return std::log(c[i].second);
        }
        if (i + 1 < c.size() && c[i].first < p && p < c[i + 1].first) {
            if (!(c[i].second > 0.0 && c[i + 1].second > 0.0)) throw std::domain_error("log_rate_at: zero rate");
            double t = (std::log(p) - std::log(c[i].first)) / (std::log(c[i + 1].first) - std::log(c[i].first));
            return (1 - t) * std::log(c[i].second) + t * std::log(c[i + 1].second);
        }
    }
    throw std::out_of_range("p outside the baseline range");
}

// Perfect-lattice distance whose curve has the closest rate at p, linear in (d, ln rate) between neighbours.
inline double effective_distance(double p, double rate, const std::map<int, Curve>& baselines) {
    if (baselines.empty()) throw std::invalid_argument("effective_distance: no baselines");
    if (!(rate > 0.0)) throw std::domain_error("effective_distance: zero rate");
    std::vector<std::pair<int, double>> pts;
    for (const auto& [d, c] : baselines) pts.push_back({d, log_rate_at(c, p)});
    double lr = std::log(rate);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double a = pts[i].second, b = pts[i + 1].second;
        if ((lr - a) * (lr - b) <= 0.0 && a != b) {
            double t = (lr - a) / (b - a);
            return pts[i].first + t * (pts[i + 1].first - pts[i].first);
        }
    }
    auto best = std::min_element(pts.begin(), pts.end(), [&](const auto& u, const auto& v) {
        return std::abs(u.second - lr) < std::abs(v.second - lr);
    });
    return best->first;
}

}  // namespace defectsc
