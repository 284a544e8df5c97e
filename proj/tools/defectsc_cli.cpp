#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "defectsc/ensemble.hpp"
#include "defectsc/io.hpp"

namespace fs = std::filesystem;
using namespace defectsc;

namespace {

enum Exit { exit_ok = 0, exit_other = 1, exit_unencodable = 2, exit_uncoverable = 3 };

struct ChipArgs {
    int distance = 5;
    double yield = 1.0;
    std::uint64_t seed = 1;
    std::string chip_file;
    std::vector<std::string> faulty;  // "row,col"

    Chip load() const {
        if (!chip_file.empty()) return read_chip(chip_file);
        Chip chip = generate_chip(distance, yield, seed);
        for (const auto& f : faulty) {
            auto comma = f.find(',');
            if (comma == std::string::npos) throw CLI::ValidationError("--faulty", "expected row,col");
            int r = std::stoi(f.substr(0, comma)), c = std::stoi(f.substr(comma + 1));
            if (!chip.in_grid(r, c)) throw CLI::ValidationError("--faulty", "device outside the grid");
            chip.set_working(chip.index(r, c), false);
        }
        return chip;
    }
};

void add_chip_options(CLI::App* cmd, ChipArgs& a) {
    cmd->add_option("--distance,--d", a.distance, "code distance")->check(CLI::Range(2, 41));
    cmd->add_option("--yield", a.yield, "probability that a device works")->check(CLI::Range(1e-9, 1.0));
    cmd->add_option("--seed", a.seed, "chip seed");
    cmd->add_option("--chip-file", a.chip_file, "read the chip from a file instead")->check(CLI::ExistingFile);
    cmd->add_option("--faulty", a.faulty, "mark device row,col faulty (repeatable)");
}

std::string default_out() {
    const char* env = std::getenv("DEFECTSC_OUT");
    return env && *env ? env : "out";
}

fs::path out_dir(const std::string& o) {
    fs::path p(o.empty() ? default_out() : o);
    fs::create_directories(p);
    return p;
}

// Machine-readable failure line on stderr; returns the exit code.
int report_failure(const Chip& chip, ChipStatus s, const std::string& msg) {
    std::cerr << "error " << status_name(s) << " " << chip_id(chip) << " " << msg << "\n";
    switch (s) {
        case ChipStatus::unencodable: return exit_unencodable;
        case ChipStatus::uncoverable: return exit_uncoverable;
        default: return exit_other;
    }
}

std::ofstream open(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"defective-lattice surface code toolkit"};
    app.require_subcommand(1);

    ChipArgs chip_args;
    std::string out;
    std::vector<double> ps;
    long long target_errors = 500, max_rounds = 10'000'000;
    int workers = 1, count = 1;
    std::string idle = "on";
    std::vector<double> culls;

    auto* gen = app.add_subcommand("gen", "generate chip files");
    add_chip_options(gen, chip_args);
    gen->add_option("--count", count, "number of chips, seeds seed..seed+count-1")->check(CLI::PositiveNumber);
    gen->add_option("--out", out, "output directory");

    auto* comp = app.add_subcommand("compile", "compile a chip: circuit text, stabilizers, metrics");
    add_chip_options(comp, chip_args);
    comp->add_option("--idle-noise", idle)->check(CLI::IsMember({"on", "off"}));
    comp->add_option("--out", out, "output directory");

    auto* sim = app.add_subcommand("sim", "logical error rates for one chip");
    add_chip_options(sim, chip_args);
    sim->add_option("--p", ps, "physical error rate (repeatable)")->required()->check(CLI::Range(0.0, 0.02));
    sim->add_option("--target-errors", target_errors)->check(CLI::PositiveNumber);
    sim->add_option("--max-rounds", max_rounds)->check(CLI::PositiveNumber);
    sim->add_option("--workers", workers)->check(CLI::PositiveNumber);
    sim->add_option("--idle-noise", idle)->check(CLI::IsMember({"on", "off"}));
    sim->add_option("--out", out, "output directory");

    auto* ana = app.add_subcommand("analyze", "ensemble metrics, correlations and culling");
    add_chip_options(ana, chip_args);
    ana->add_option("--count", count, "chips in the ensemble")->check(CLI::PositiveNumber);
    ana->add_option("--p", ps, "physical error rate")->required()->check(CLI::Range(0.0, 0.02));
    ana->add_option("--target-errors", target_errors)->check(CLI::PositiveNumber);
    ana->add_option("--max-rounds", max_rounds)->check(CLI::PositiveNumber);
    ana->add_option("--workers", workers)->check(CLI::PositiveNumber);
    ana->add_option("--cull", culls, "keep fraction (repeatable)")->check(CLI::Range(1e-9, 1.0));
    ana->add_option("--idle-noise", idle)->check(CLI::IsMember({"on", "off"}));
    ana->add_option("--out", out, "output directory");

    auto* rep = app.add_subcommand("report", "gnuplot data and scripts from results CSVs");
    rep->add_option("--out", out, "directory holding results CSVs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_other;
    }

    try {
        bool idle_on = idle == "on";
        fs::path dir = out_dir(out);

        if (*gen) {
            for (int i = 0; i < count; ++i) {
                ChipArgs a = chip_args;
                a.seed = chip_args.seed + static_cast<std::uint64_t>(i);
                Chip chip = a.load();
                fs::path p = dir / (chip_id(chip) + ".json");
                write_chip(chip, p.string());
                std::cout << p.string() << " working " << chip.num_devices() - chip.count_faulty() << "/"
                          << chip.num_devices() << " encodable " << (check_encodable(chip) ? 1 : 0) << "\n";
            }
            return exit_ok;
        }

        if (*comp) {
            Chip chip = chip_args.load();
            Prepared pr = prepare_chip(chip, idle_on);
            if (!pr.compiled) return report_failure(chip, pr.status, pr.message);
            const auto& cc = *pr.compiled;
            std::string id = chip_id(chip);
            auto fc = open(dir / (id + ".circuit.txt"));
            write_circuit(fc, cc.whole);
            auto fs_ = open(dir / (id + ".stabilizers.txt"));
            write_stabilizers(fs_, cc.set);
            auto fm = open(dir / (id + ".metrics.csv"));
            write_metrics_header(fm);
            write_metrics_row(fm, id, compute_metrics(chip, cc.set, cc.whole));
            std::cout << id << " stabilizers " << cc.set.stabilizers.size() << " period " << cc.whole.period
                      << " steps_per_round " << cc.whole.steps_per_round() << "\n";
            return exit_ok;
        }

        if (*sim) {
            Chip chip = chip_args.load();
            Prepared pr = prepare_chip(chip, idle_on);
            if (!pr.compiled) return report_failure(chip, pr.status, pr.message);
            RunConfig cfg;
            cfg.ps = ps;
            cfg.target_errors = target_errors;
            cfg.max_rounds = max_rounds;
            cfg.workers = workers;
            cfg.seed = chip.seed();
            auto res = run_logical_error_rate(*pr.compiled, cfg);
            fs::path p = dir / (chip_id(chip) + ".results.csv");
            auto f = open(p);
            write_results_header(f);
            for (const auto& r : res) {
                write_results_row(f, chip, r);
                write_results_row(std::cout, chip, r);
            }
            return exit_ok;
        }

        if (*ana) {
            RunConfig cfg;
            cfg.ps = {ps.front()};
            cfg.target_errors = target_errors;
            cfg.max_rounds = max_rounds;
            cfg.workers = workers;
            cfg.seed = chip_args.seed;
            Ensemble ens = run_ensemble(chip_args.distance, chip_args.yield, count, chip_args.seed, cfg, idle_on);
            std::string tag = "d" + std::to_string(chip_args.distance) + "_y" + fmt(chip_args.yield);
            auto fe = open(dir / (tag + ".ensemble.csv"));
            fe << "# defectsc-ensemble v1\nchip_id,status";
            for (const auto& [k, v] : ChipMetrics{}.values()) fe << "," << k;
            fe << ",p,rounds,x_errors,x_rate\n";
            std::map<std::string, int> tally;
            for (const auto& e : ens.entries) {
                ++tally[status_name(e.status)];
                fe << chip_id(e.chip) << "," << status_name(e.status);
                for (const auto& [k, v] : e.metrics.values()) fe << "," << fmt(v);
                fe << "," << fmt(ps.front()) << "," << e.result.rounds << "," << e.result.x_errors << ","
                   << fmt(e.result.x_rate()) << "\n";
            }
            auto fc = open(dir / (tag + ".correlation.csv"));
            fc << "# defectsc-correlation v1\nmetric,linear,logarithmic\n";
            auto cs = correlate_metrics(ens);
            for (const auto& c : cs)
                fc << c.name << "," << (c.defined_linear ? fmt(c.linear) : "undefined") << ","
                   << (c.defined_log ? fmt(c.logarithmic) : "undefined") << "\n";
            auto fk = open(dir / (tag + ".culling.csv"));
            fk << "# defectsc-culling v1\nkeep,generated,kept,geo_mean_x_rate,mean_faulty\n";
            std::vector<double> levels{1.0};
            levels.insert(levels.end(), culls.begin(), culls.end());
            for (double k : levels) {
                CullLevel cl = cull_level(ens, k);
                fk << fmt(k) << "," << ens.generated << "," << cl.kept << "," << fmt(cl.geo_mean_rate) << ","
                   << fmt(cl.mean_faulty) << "\n";
                std::cout << "keep " << k << " kept " << cl.kept << " geo_mean_x_rate " << cl.geo_mean_rate << "\n";
            }
            for (const auto& [k, v] : tally) std::cout << k << " " << v << "\n";
            return exit_ok;
        }

        if (*rep) {
            std::map<std::string, std::vector<ResultRow>> by_chip;
            for (const auto& ent : fs::directory_iterator(dir)) {
                std::string name = ent.path().filename().string();
                if (name.size() < 12 || name.substr(name.size() - 12) != ".results.csv") continue;
                std::ifstream f(ent.path());
                for (auto& r : read_results(f)) by_chip[r.chip_id].push_back(r);
            }
            if (by_chip.empty()) throw std::runtime_error("no results CSVs in " + dir.string());
            auto gp = open(dir / "rates.gp");
            gp << "# defectsc-plot v1\nset logscale xy\nset xlabel 'physical error rate'\n"
                  "set ylabel 'logical X error rate per round'\nset key left top\nset format xy '%.0e'\n"
                  "plot x title 'break-even' with lines dashtype 2";
            for (auto& [id, rows] : by_chip) {
                std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) { return a.p < b.p; });
                auto fd = open(dir / (id + ".dat"));
                fd << "# defectsc-dat v1\n# p x_rate ci_low ci_high z_rate\n";
                for (const auto& r : rows)
                    fd << fmt(r.p) << " " << fmt(r.x_rate) << " " << fmt(r.ci_low) << " " << fmt(r.ci_high) << " "
                       << fmt(r.z_rate) << "\n";
                gp << ", \\\n  '" << id << ".dat' using 1:2:3:4 with yerrorlines title '" << id << "'";
            }
            gp << "\n";
            std::cout << "wrote " << by_chip.size() << " curves to " << dir.string() << "\n";
            return exit_ok;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error usage " << e.what() << "\n";
        return exit_other;
    } catch (const std::exception& e) {
        std::cerr << "error other " << e.what() << "\n";
        return exit_other;
    }
    return exit_other;
}
