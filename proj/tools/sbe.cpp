// sbe: command line front end for the verification suites.
//
//   sbe <subcommand> [--seed S] [--reps R] [--n N] [--m M] [--kernel K]
//       [--dist FILE] [--out FILE] [--log FILE] [--grid-max X] [--cap C] ...
//
// Exit status: 0 when every check passes, 1 when a check fails, 2 on usage
// or input errors.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "sbe/checks.hpp"

namespace {

struct Args {
    sbe::SuiteOptions opt;
    std::string dist_file;
    std::string out_file;
    std::string log_file;
};

void add_common(CLI::App& app, Args& a) {
    auto& o = a.opt;
    app.add_option("--seed", o.seed, "random seed");
    app.add_option("--reps", o.reps, "Monte Carlo replicates (at least 1000)");
    app.add_option("--n", o.n, "sample size");
    app.add_option("--m", o.m, "kernel degree");
    app.add_option("--kernel", o.kernel, "mean, variance, kendall-sign or product");
    app.add_option("--dist", a.dist_file, "distribution file (JSON, probabilities as \"p/q\")");
    app.add_option("--out", a.out_file, "CSV output (default: standard output)");
    app.add_option("--log", a.log_file, "JSON-lines audit log, one record per check");
    app.add_option("--grid-max", o.grid_max, "largest x on the sup_x grid");
    app.add_option("--cap", o.cap, "enumeration cap");
    app.add_option("--workers", o.workers, "Monte Carlo worker threads")->check(CLI::PositiveNumber);
}

int emit(const Args& a, const std::vector<sbe::SuiteResult>& suites) {
    std::vector<sbe::CheckRecord> records;
    for (const auto& s : suites) records.insert(records.end(), s.records.begin(), s.records.end());
    // a single suite with an estimate table writes that table; otherwise the records
    const bool single_table = suites.size() == 1 && suites.front().table;
    const sbe::CsvTable table = single_table ? *suites.front().table : sbe::records_table(records);
    if (a.out_file.empty()) {
        table.write(std::cout);
    } else {
        std::ofstream out(a.out_file, std::ios::binary);
        if (!out) throw sbe::ContractViolation("cannot write " + a.out_file);
        table.write(out);
    }
    if (!a.log_file.empty()) {
        std::ofstream log(a.log_file, std::ios::binary);
        if (!log) throw sbe::ContractViolation("cannot write " + a.log_file);
        sbe::write_jsonl(log, records);
    }
    bool ok = true;
    for (const auto& s : suites) {
        std::size_t failed = 0;
        for (const auto& r : s.records) failed += r.ok ? 0 : 1;
        std::cerr << s.name << ": " << s.records.size() << " checks, " << failed << " failed\n";
        for (const auto& r : s.records)
            if (!r.ok) std::cerr << "  FAIL " << r.name << " lhs=" << sbe::format_double(r.lhs) << " rhs=" << sbe::format_double(r.rhs) << '\n';
        ok = ok && s.ok();
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Berry-Esseen verification suites for self-normalized statistics"};
    app.require_subcommand(1, 1);
    Args a;
    auto& o = a.opt;

    auto* stein = app.add_subcommand("verify-stein", "Stein solution identity and the helping bounds on grids");
    auto* cens = app.add_subcommand("verify-censoring", "censoring lemmas: contraction, censored mean, Bennett");
    auto* comb = app.add_subcommand("verify-combinatorics", "binomial identities and enumeration equalities");
    auto* bound = app.add_subcommand("bound", "bound terms for a named model, one CSV row per term");
    bound->add_option("--model", o.model, "zero_remainder, self_normalized_sum, tn, tn_star, placeholder_rootn, placeholder_zero");
    bound->add_option("--estimator", o.estimator, "auto, exact or mc")->check(CLI::IsMember({"auto", "exact", "mc"}));
    auto* ustat = app.add_subcommand("ustat", "studentized U-statistics");
    ustat->add_option("--action", o.action, "statistic, bound, decomposition or lemma-check")
        ->check(CLI::IsMember({"statistic", "bound", "decomposition", "lemma-check"}));
    auto* rci = app.add_subcommand("rci", "randomized concentration inequality on enumerated instances");
    auto* scaling = app.add_subcommand("scaling-study", "KS distance of T_n and T_n* against n");
    scaling->add_option("--n-grid", o.n_grid, "sample sizes, comma separated")->delimiter(',');
    auto* all = app.add_subcommand("all", "every suite at desk-scale sizes");
    for (auto* sub : {stein, cens, comb, bound, ustat, rci, scaling, all}) add_common(*sub, a);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (o.reps != 0 && o.reps < o.cfg.min_reps)
            throw sbe::ContractViolation("--reps must be at least " + std::to_string(o.cfg.min_reps));
        if (!a.dist_file.empty()) o.dists = sbe::load_distributions(a.dist_file);
        std::vector<sbe::SuiteResult> suites;
        if (stein->parsed()) suites.push_back(sbe::verify_stein(o));
        else if (cens->parsed()) suites.push_back(sbe::verify_censoring(o));
        else if (comb->parsed()) suites.push_back(sbe::verify_combinatorics(o));
        else if (bound->parsed()) suites.push_back(sbe::bound_suite(o));
        else if (ustat->parsed()) suites.push_back(sbe::ustat_suite(o));
        else if (rci->parsed()) suites.push_back(sbe::rci_suite(o));
        else if (scaling->parsed()) suites.push_back(sbe::scaling_suite(o));
        else suites = sbe::run_all(o);
        return emit(a, suites);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
