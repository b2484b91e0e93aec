#include "xorcert/cli.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "xorcert/bdd.hpp"
#include "xorcert/benchgen.hpp"
#include "xorcert/gauss.hpp"
#include "xorcert/lrat.hpp"

namespace xorcert::cli {

int exit_code(SolveStatus s) {
    switch (s) {
    case SolveStatus::Sat:
        return kExitSat;
    case SolveStatus::Unsat:
        return kExitUnsat;
    case SolveStatus::Limit:
        return kExitLimit;
    }
    return kExitError;
}

std::optional<double> par2(SolveStatus s, double seconds, double timeout) {
    if (s != SolveStatus::Limit)
        return seconds;
    if (timeout > 0)
        return 2 * timeout;
    return std::nullopt;
}

nlohmann::json RunReport::to_json() const {
    nlohmann::json j;
    j["instance"] = instance;
    j["mode"] = mode;
    j["status"] = to_string(status);
    j["exit_code"] = exit_code(status);
    j["wall_seconds"] = wall_seconds;
    j["timeout"] = timeout;
    auto p = par2(status, wall_seconds, timeout);
    j["par2"] = p ? nlohmann::json(*p) : nlohmann::json(nullptr);
    j["seed"] = seed;
    j["xors"] = stats.xors;
    j["decisions"] = stats.decisions;
    j["conflicts"] = stats.conflicts;
    j["propagations"] = stats.propagations;
    j["parity_propagations"] = stats.parity_propagations;
    j["parity_conflicts"] = stats.parity_conflicts;
    j["proof_added"] = stats.proof_added;
    j["proof_deleted"] = stats.proof_deleted;
    j["extension_vars"] = stats.extension_vars;
    j["peak_bdd_nodes"] = stats.peak_bdd_nodes;
    j["justified_reasons"] = stats.justified_reasons;
    j["reason_cache_hits"] = stats.reason_cache_hits;
    if (!limit_reason.empty())
        j["limit_reason"] = limit_reason;
    if (verified) {
        j["verified"] = *verified;
        j["check_seconds"] = check_seconds;
    }
    return j;
}

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

uint64_t resolve_seed(const std::optional<uint64_t>& given) {
    if (given)
        return *given;
    if (const char* env = std::getenv("XORCERT_SEED")) {
        try {
            size_t used = 0;
            uint64_t v = std::stoull(env, &used);
            if (used == std::string(env).size())
                return v;
        } catch (const std::exception&) {
        }
        throw UsageError(std::string("XORCERT_SEED is not an unsigned integer: ") + env);
    }
    return 1;
}

std::vector<Var> read_var_order(const std::string& path, Var num_vars) {
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open variable order file " + path);
    std::vector<Var> order;
    std::vector<bool> seen(size_t(num_vars) + 1, false);
    std::string tok;
    while (in >> tok) {
        if (tok == "c") {
            std::getline(in, tok);
            continue;
        }
        int64_t v;
        try {
            v = std::stoll(tok);
        } catch (const std::exception&) {
            throw UsageError("variable order: not a number: " + tok);
        }
        if (v < 1 || v > int64_t(num_vars))
            throw UsageError("variable order: variable out of range: " + tok);
        if (seen[size_t(v)])
            throw UsageError("variable order: repeated variable: " + tok);
        seen[size_t(v)] = true;
        order.push_back(Var(v));
    }
    return order;
}

void write_var_order(const std::string& path, const std::vector<Var>& order) {
    std::ofstream out(path);
    if (!out)
        throw UsageError("cannot write " + path);
    for (size_t i = 0; i < order.size(); i++)
        out << order[i] << (i + 1 == order.size() || (i + 1) % 20 == 0 ? '\n' : ' ');
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UsageError("cannot write " + path);
    return out;
}

void print_stats(std::ostream& out, const SolveStats& s) {
    out << "c xors " << s.xors << "\n"
        << "c decisions " << s.decisions << "\n"
        << "c conflicts " << s.conflicts << "\n"
        << "c propagations " << s.propagations << "\n"
        << "c parity_propagations " << s.parity_propagations << "\n"
        << "c parity_conflicts " << s.parity_conflicts << "\n"
        << "c proof_added " << s.proof_added << "\n"
        << "c proof_deleted " << s.proof_deleted << "\n"
        << "c extension_vars " << s.extension_vars << "\n"
        << "c peak_bdd_nodes " << s.peak_bdd_nodes << "\n"
        << "c seconds " << s.seconds << "\n";
}

// ---------------------------------------------------------------------------

struct SolveArgs {
    std::string cnf;
    std::string proof;
    bool no_xor = false;
    std::optional<uint64_t> seed;
    uint64_t max_proof_clauses = lrat::kDefaultMaxProofClauses;
    double timeout = 0;
    std::string var_order;
    std::string report;
    bool no_model = false;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
    CnfFormula f = read_dimacs_file(a.cnf);
    SolverOptions opts;
    opts.xor_reasoning = !a.no_xor;
    opts.seed = resolve_seed(a.seed);
    opts.max_proof_clauses = a.max_proof_clauses;
    opts.timeout_seconds = a.timeout;
    if (!a.var_order.empty())
        opts.var_order = read_var_order(a.var_order, f.num_vars);

    const auto start = std::chrono::steady_clock::now();
    SolveResult r;
    if (!a.proof.empty()) {
        std::ofstream proof = open_output(a.proof);
        lrat::TextSink sink(proof);
        r = solve(f, opts, &sink);
        sink.flush();
        proof.close();
        if (!proof)
            throw std::runtime_error("failed writing proof file " + a.proof);
    } else {
        r = solve(f, opts);
    }
    const double wall = seconds_since(start);

    out << "c xorcert solve " << a.cnf << (a.no_xor ? " (no-xor)" : "") << "\n";
    print_stats(out, r.stats);
    if (!r.limit_reason.empty())
        out << "c limit: " << r.limit_reason << "\n";
    switch (r.status) {
    case SolveStatus::Sat:
        out << "s SATISFIABLE\n";
        if (!a.no_model) {
            std::string line = "v";
            for (Var v = 1; v <= f.num_vars; v++) {
                std::string tok = " " + std::to_string(r.model[v] ? int64_t(v) : -int64_t(v));
                if (line.size() + tok.size() > 78) {
                    out << line << "\n";
                    line = "v";
                }
                line += tok;
            }
            out << line << " 0\n";
        }
        break;
    case SolveStatus::Unsat:
        out << "s UNSATISFIABLE\n";
        break;
    case SolveStatus::Limit:
        out << "s UNKNOWN\n";
        break;
    }

    if (!a.report.empty()) {
        RunReport rep;
        rep.instance = a.cnf;
        rep.mode = a.no_xor ? "no-xor" : "xor";
        rep.status = r.status;
        rep.wall_seconds = wall;
        rep.timeout = a.timeout;
        rep.seed = opts.seed;
        rep.stats = r.stats;
        rep.limit_reason = r.limit_reason;
        std::ofstream rout = open_output(a.report);
        rout << rep.to_json().dump() << "\n";
    }
    return exit_code(r.status);
}

// ---------------------------------------------------------------------------

struct CheckArgs {
    std::string cnf;
    std::string proof;
    bool derivation = false;
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
    CnfFormula f = read_dimacs_file(a.cnf);
    std::ifstream in(a.proof);
    if (!in)
        throw UsageError("cannot open proof file " + a.proof);
    const auto start = std::chrono::steady_clock::now();
    auto mode = a.derivation ? lrat::CheckMode::Derivation : lrat::CheckMode::Refutation;
    lrat::CheckResult r = lrat::check(f, in, mode);
    const double secs = seconds_since(start);
    out << "c steps " << r.stats.steps << "\n"
        << "c rup_steps " << r.stats.rup_steps << "\n"
        << "c extension_steps " << r.stats.extension_steps << "\n"
        << "c rat_steps " << r.stats.rat_steps << "\n"
        << "c deletions " << r.stats.deletions << "\n"
        << "c total_hints " << r.stats.total_hints << "\n"
        << "c seconds " << secs << "\n";
    if (r.verified) {
        out << "s VERIFIED\n";
        return kExitVerified;
    }
    out << "c step " << r.failed_step << ": " << r.reason << "\n";
    out << "s REJECTED\n";
    return kExitRejected;
}

// ---------------------------------------------------------------------------

struct GenArgs {
    // urquhart
    unsigned m = 3;
    unsigned p = 50;
    size_t nodes = 0;
    bool allow_even = false;
    // lpn
    unsigned n = 8;
    unsigned rows = 0;
    double corrupt_prob = 0.125;
    bool unsat = false;
    std::string var_order;
    // shared
    std::optional<uint64_t> seed;
    std::string output;
    std::string manifest;
};

void write_formula(const std::string& path, const CnfFormula& f) {
    std::ofstream out = open_output(path);
    write_dimacs(out, f);
    out.close();
    if (!out)
        throw std::runtime_error("failed writing " + path);
}

void write_manifest_file(const std::string& path, const gen::Manifest& m) {
    std::ofstream out = open_output(path);
    gen::write_manifest(out, m);
}

int cmd_gen_urquhart(const GenArgs& a, std::ostream& out) {
    gen::UrquhartConfig cfg;
    cfg.m = a.m;
    cfg.p = a.p;
    cfg.seed = resolve_seed(a.seed);
    cfg.force_odd = !a.allow_even;
    cfg.nodes = a.nodes;
    auto inst = gen::gen_urquhart(cfg);
    write_formula(a.output, inst.formula);
    if (!a.manifest.empty())
        write_manifest_file(a.manifest, inst.manifest);
    out << "c urquhart m=" << cfg.m << " nodes=" << inst.manifest.constraints.size()
        << " odd_nodes=" << inst.odd_nodes << " vars=" << inst.formula.num_vars
        << " clauses=" << inst.formula.num_clauses() << " seed=" << cfg.seed << "\n";
    return 0;
}

int cmd_gen_lpn(const GenArgs& a, std::ostream& out) {
    gen::LpnConfig cfg;
    cfg.n = a.n;
    cfg.m = a.rows;
    cfg.corrupt_prob = a.corrupt_prob;
    cfg.unsat = a.unsat;
    cfg.seed = resolve_seed(a.seed);
    auto inst = gen::gen_lpn(cfg);
    write_formula(a.output, inst.formula);
    if (!a.manifest.empty())
        write_manifest_file(a.manifest, inst.manifest);
    if (!a.var_order.empty())
        write_var_order(a.var_order, inst.var_order);
    out << "c lpn n=" << cfg.n << " m=" << inst.manifest.constraints.size()
        << " corrupted=" << inst.corrupted << " bound=" << inst.bound
        << " vars=" << inst.formula.num_vars << " clauses=" << inst.formula.num_clauses()
        << " seed=" << cfg.seed << "\n";
    if (inst.forced_corruption)
        out << "c note: no row was corrupted; one row was flipped and every corruption bit "
               "forced to 0\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string family = "urquhart";
    std::vector<unsigned> sizes;
    std::vector<uint64_t> seeds{1};
    std::vector<std::string> modes{"xor"};
    double timeout = 60;
    bool unsat = false;
    unsigned p = 50;
    unsigned jobs = 1;
    bool no_check = false;
    uint64_t max_proof_clauses = lrat::kDefaultMaxProofClauses;
    std::string json;
};

struct BenchJob {
    unsigned size;
    uint64_t seed;
    std::string mode;
};

RunReport run_bench_job(const BenchArgs& a, const BenchJob& job, const std::filesystem::path& tmp) {
    CnfFormula f;
    std::vector<Var> order;
    std::string name;
    if (a.family == "urquhart") {
        gen::UrquhartConfig cfg;
        cfg.m = job.size;
        cfg.p = a.p;
        cfg.seed = job.seed;
        f = gen::gen_urquhart(cfg).formula;
        name = "urq-m" + std::to_string(job.size) + "-s" + std::to_string(job.seed);
    } else {
        gen::LpnConfig cfg;
        cfg.n = job.size;
        cfg.unsat = a.unsat;
        cfg.seed = job.seed;
        auto inst = gen::gen_lpn(cfg);
        f = std::move(inst.formula);
        order = std::move(inst.var_order);
        name = "lpn-n" + std::to_string(job.size) + (a.unsat ? "-unsat" : "-sat") + "-s" +
               std::to_string(job.seed);
    }

    SolverOptions opts;
    opts.xor_reasoning = job.mode == "xor";
    opts.seed = job.seed;
    opts.timeout_seconds = a.timeout;
    opts.max_proof_clauses = a.max_proof_clauses;
    opts.var_order = order;

    RunReport rep;
    rep.instance = name;
    rep.mode = job.mode;
    rep.timeout = a.timeout;
    rep.seed = job.seed;

    std::filesystem::path proof_path = tmp / (name + "-" + job.mode + ".lrat");
    const auto start = std::chrono::steady_clock::now();
    SolveResult r;
    if (a.no_check) {
        r = solve(f, opts);
    } else {
        std::ofstream proof(proof_path, std::ios::binary);
        lrat::TextSink sink(proof);
        r = solve(f, opts, &sink);
        sink.flush();
    }
    rep.wall_seconds = seconds_since(start);
    rep.status = r.status;
    rep.stats = r.stats;
    rep.limit_reason = r.limit_reason;

    if (!a.no_check && r.status == SolveStatus::Unsat) {
        const auto cstart = std::chrono::steady_clock::now();
        std::ifstream in(proof_path);
        rep.verified = lrat::check(f, in, lrat::CheckMode::Refutation).verified;
        rep.check_seconds = seconds_since(cstart);
    }
    std::error_code ec;
    std::filesystem::remove(proof_path, ec);
    return rep;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    if (a.family != "urquhart" && a.family != "lpn")
        throw UsageError("bench family must be urquhart or lpn");
    for (const auto& m : a.modes)
        if (m != "xor" && m != "no-xor")
            throw UsageError("bench mode must be xor or no-xor: " + m);

    std::vector<BenchJob> jobs;
    for (unsigned size : a.sizes)
        for (uint64_t seed : a.seeds)
            for (const auto& mode : a.modes)
                jobs.push_back({size, seed, mode});

    auto tmp = std::filesystem::temp_directory_path() /
               ("xorcert-bench-" + std::to_string(std::chrono::steady_clock::now()
                                                      .time_since_epoch()
                                                      .count()));
    std::filesystem::create_directories(tmp);

    std::vector<RunReport> reports(jobs.size());
    std::vector<std::exception_ptr> failures(jobs.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next++; i < jobs.size(); i = next++) {
            try {
                reports[i] = run_bench_job(a, jobs[i], tmp);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < std::max(1u, a.jobs); t++)
            pool.emplace_back(worker);
    }
    std::error_code ec;
    std::filesystem::remove_all(tmp, ec);
    for (auto& e : failures)
        if (e)
            std::rethrow_exception(e);

    out << std::left << std::setw(24) << "instance" << std::setw(8) << "mode" << std::setw(8)
        << "status" << std::right << std::setw(10) << "solve_s" << std::setw(10) << "check_s"
        << std::setw(10) << "verified" << std::setw(10) << "par2" << std::setw(12) << "proof"
        << "\n";
    std::map<std::string, std::pair<double, size_t>> par2_by_mode;
    bool all_verified = true;
    for (const auto& r : reports) {
        auto p = par2(r.status, r.wall_seconds, r.timeout);
        out << std::left << std::setw(24) << r.instance << std::setw(8) << r.mode << std::setw(8)
            << to_string(r.status) << std::right << std::fixed << std::setprecision(3)
            << std::setw(10) << r.wall_seconds << std::setw(10) << r.check_seconds << std::setw(10)
            << (r.verified ? (*r.verified ? "yes" : "NO") : "-") << std::setw(10)
            << (p ? *p : 0.0) << std::setw(12) << r.stats.proof_added << "\n";
        auto& acc = par2_by_mode[r.mode];
        acc.first += p ? *p : 0.0;
        acc.second++;
        if (r.verified && !*r.verified)
            all_verified = false;
    }
    for (const auto& [mode, acc] : par2_by_mode)
        out << "c mode " << mode << " runs " << acc.second << " average_par2 " << std::fixed
            << std::setprecision(3) << acc.first / double(acc.second) << "\n";

    if (!a.json.empty()) {
        std::ofstream jout = open_output(a.json);
        for (const auto& r : reports)
            jout << r.to_json().dump() << "\n";
    }
    return all_verified ? 0 : kExitRejected;
}

// ---------------------------------------------------------------------------

struct BddDumpArgs {
    std::string cnf;
    size_t index = 1;
    std::string var_order;
    std::string output;
};

int cmd_bdd_dump(const BddDumpArgs& a, std::ostream& out, std::ostream& err) {
    CnfFormula f = read_dimacs_file(a.cnf);
    auto xors = extract_xors(f);
    if (a.index < 1 || a.index > xors.size())
        throw UsageError("constraint index out of range (formula has " +
                         std::to_string(xors.size()) + " parity constraints)");
    std::vector<Var> prefix;
    if (!a.var_order.empty())
        prefix = read_var_order(a.var_order, f.num_vars);
    bdd::Engine engine(bdd::VarOrder(f.num_vars, prefix));
    const ParityConstraint& p = xors[a.index - 1];
    bdd::NodeRef root = engine.parity(p);
    err << "c constraint " << a.index << " arity " << p.vars.size() << " nodes "
        << engine.node_count(root) << "\n";
    if (a.output.empty()) {
        engine.write_dot(out, root);
    } else {
        std::ofstream dot = open_output(a.output);
        engine.write_dot(dot, root);
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct GjTraceArgs {
    std::string cnf;
    std::vector<std::string> pivots;
};

std::string format_lits(const Clause& c) {
    std::string s;
    for (Lit l : c)
        s += std::to_string(l.dimacs()) + " ";
    return s + "0";
}

std::string format_origin(const std::vector<uint32_t>& origin) {
    std::string s = "{";
    for (size_t i = 0; i < origin.size(); i++)
        s += (i ? "," : "") + std::to_string(origin[i] + 1);
    return s + "}";
}

int cmd_gj_trace(const GjTraceArgs& a, std::ostream& out) {
    CnfFormula f = read_dimacs_file(a.cnf);
    auto xors = extract_xors(f);
    gj::GaussJordan g(xors);
    out << "c columns:";
    for (Var v : g.matrix().column_var)
        out << " x" << v;
    out << "\nc initial\n";
    g.dump(out);
    if (!a.pivots.empty()) {
        for (const auto& spec : a.pivots) {
            auto colon = spec.find(':');
            if (colon == std::string::npos)
                throw UsageError("pivot must look like ROW:VAR, got " + spec);
            unsigned long row, var;
            try {
                row = std::stoul(spec.substr(0, colon));
                var = std::stoul(spec.substr(colon + 1));
            } catch (const std::exception&) {
                throw UsageError("pivot must look like ROW:VAR, got " + spec);
            }
            auto col = g.column_of(Var(var));
            if (row < 1 || row > g.num_rows() || !col)
                throw UsageError("pivot out of range: " + spec);
            if (!g.matrix().rows[row - 1].get(*col))
                throw UsageError("pivot entry is zero: " + spec);
            g.eliminate_column(uint32_t(row - 1), *col);
            out << "c eliminate row " << row << " on x" << var << "\n";
            g.dump(out);
        }
        return 0;
    }
    Trail trail(f.num_vars);
    for (const auto& rec : g.propagate(trail)) {
        out << (rec.kind == gj::ReasonKind::Conflict ? "c conflict" : "c propagate")
            << " row " << rec.row + 1 << " origin " << format_origin(rec.origin) << " clause "
            << format_lits(rec.clause) << "\n";
    }
    out << "c final\n";
    g.dump(out);
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"xorcert: parity-aware CDCL solving with checkable LRAT proofs", "xorcert"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    auto* solve_cmd = app.add_subcommand("solve", "solve a DIMACS CNF formula");
    solve_cmd->add_option("cnf", solve_args.cnf, "input formula")->required();
    solve_cmd->add_option("--proof", solve_args.proof, "write an LRAT proof");
    solve_cmd->add_flag("--no-xor", solve_args.no_xor, "disable parity reasoning");
    solve_cmd->add_option("--seed", solve_args.seed, "random seed (default: XORCERT_SEED or 1)");
    solve_cmd->add_option("--max-proof-clauses", solve_args.max_proof_clauses,
                          "abort once the proof would exceed this many added clauses");
    solve_cmd->add_option("--timeout", solve_args.timeout, "time limit in seconds");
    solve_cmd->add_option("--var-order", solve_args.var_order,
                          "file listing variables to place first in the BDD order");
    solve_cmd->add_option("--report", solve_args.report, "write a JSON run report");
    solve_cmd->add_flag("--no-model", solve_args.no_model, "omit the model on SAT");

    CheckArgs check_args;
    auto* check_cmd = app.add_subcommand("check", "check an LRAT proof against a formula");
    check_cmd->add_option("cnf", check_args.cnf, "input formula")->required();
    check_cmd->add_option("proof", check_args.proof, "LRAT proof")->required();
    check_cmd->add_flag("--derivation", check_args.derivation,
                        "accept proofs that do not derive the empty clause");

    GenArgs gen_args;
    auto* gen_cmd = app.add_subcommand("gen", "generate benchmark formulas");
    gen_cmd->require_subcommand(1);
    auto* urq_cmd = gen_cmd->add_subcommand("urquhart", "parity constraints over a cubic graph");
    urq_cmd->add_option("-m", gen_args.m, "size parameter (>= 3)");
    urq_cmd->add_option("-p", gen_args.p, "percent of odd nodes, 25..75");
    urq_cmd->add_option("--nodes", gen_args.nodes, "explicit node count (even, >= 6)");
    urq_cmd->add_flag("--allow-even", gen_args.allow_even,
                      "do not force an odd number of odd nodes");
    urq_cmd->add_option("--seed", gen_args.seed, "random seed");
    urq_cmd->add_option("-o,--output", gen_args.output, "output CNF")->required();
    urq_cmd->add_option("--manifest", gen_args.manifest, "write the constraint manifest");
    auto* lpn_cmd = gen_cmd->add_subcommand("lpn", "learning parity with noise");
    lpn_cmd->add_option("-n", gen_args.n, "solution variables (>= 4)");
    lpn_cmd->add_option("--m", gen_args.rows, "parity constraints (default 2n)");
    lpn_cmd->add_option("--corrupt-prob", gen_args.corrupt_prob, "corruption probability");
    lpn_cmd->add_flag("--unsat", gen_args.unsat, "bound corruptions by k-1");
    lpn_cmd->add_option("--seed", gen_args.seed, "random seed");
    lpn_cmd->add_option("-o,--output", gen_args.output, "output CNF")->required();
    lpn_cmd->add_option("--manifest", gen_args.manifest, "write the constraint manifest");
    lpn_cmd->add_option("--var-order", gen_args.var_order, "write the suggested BDD order");

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "generate, solve and check a suite");
    bench_cmd->add_option("--family", bench_args.family, "urquhart or lpn");
    bench_cmd->add_option("--sizes", bench_args.sizes, "m for urquhart, n for lpn")
        ->delimiter(',');
    bench_cmd->add_option("--seeds", bench_args.seeds, "generator seeds")->delimiter(',');
    bench_cmd->add_option("--modes", bench_args.modes, "xor and/or no-xor")->delimiter(',');
    bench_cmd->add_option("--timeout", bench_args.timeout, "per-run time limit in seconds");
    bench_cmd->add_flag("--unsat", bench_args.unsat, "lpn: bound corruptions by k-1");
    bench_cmd->add_option("-p", bench_args.p, "urquhart: percent of odd nodes");
    bench_cmd->add_option("--jobs", bench_args.jobs, "parallel runs");
    bench_cmd->add_flag("--no-check", bench_args.no_check, "skip proof generation and checking");
    bench_cmd->add_option("--max-proof-clauses", bench_args.max_proof_clauses,
                          "per-run proof size limit");
    bench_cmd->add_option("--json", bench_args.json, "write JSON-lines run reports");

    BddDumpArgs dump_args;
    auto* dump_cmd = app.add_subcommand("bdd-dump", "print the BDD of an extracted constraint");
    dump_cmd->add_option("cnf", dump_args.cnf, "input formula")->required();
    dump_cmd->add_option("--index", dump_args.index, "1-based constraint index");
    dump_cmd->add_option("--var-order", dump_args.var_order, "BDD order prefix file");
    dump_cmd->add_option("-o,--output", dump_args.output, "write dot to a file");

    GjTraceArgs trace_args;
    auto* trace_cmd =
        app.add_subcommand("gj-trace", "show the parity and shadow matrices during elimination");
    trace_cmd->add_option("cnf", trace_args.cnf, "input formula")->required();
    trace_cmd->add_option("--pivot", trace_args.pivots,
                          "ROW:VAR eliminations to apply in order (1-based rows)");

    std::vector<std::string> argv_store{"xorcert"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : argv_store)
        argv.push_back(s.c_str());

    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }

    try {
        if (*solve_cmd)
            return cmd_solve(solve_args, out);
        if (*check_cmd)
            return cmd_check(check_args, out);
        if (*urq_cmd)
            return cmd_gen_urquhart(gen_args, out);
        if (*lpn_cmd)
            return cmd_gen_lpn(gen_args, out);
        if (*bench_cmd)
            return cmd_bench(bench_args, out);
        if (*dump_cmd)
            return cmd_bdd_dump(dump_args, out, err);
        if (*trace_cmd)
            return cmd_gj_trace(trace_args, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; i++)
        args.emplace_back(argv[i]);
    return run(args, out, err);
}

}  // namespace xorcert::cli
