#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "xorcert/benchgen.hpp"
#include "xorcert/cli.hpp"

using namespace xorcert;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("xorcert-cli-test-" + std::to_string(std::rand()) + "-" +
                std::to_string(reinterpret_cast<uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

const char* kWorkedExample =
    "p cnf 3 8\n1 2 0\n-1 -2 0\n1 -3 0\n-1 3 0\n1 2 3 0\n1 -2 -3 0\n-1 2 -3 0\n-1 -2 3 0\n";

}  // namespace

TEST_CASE("exit code and PAR-2 contracts") {
    CHECK(cli::exit_code(SolveStatus::Sat) == 10);
    CHECK(cli::exit_code(SolveStatus::Unsat) == 20);
    CHECK(cli::exit_code(SolveStatus::Limit) == 30);
    CHECK(cli::par2(SolveStatus::Unsat, 3.5, 10) == 3.5);
    CHECK(cli::par2(SolveStatus::Limit, 1.01, 1) == 2.0);
    CHECK_FALSE(cli::par2(SolveStatus::Limit, 1.01, 0).has_value());
}

TEST_CASE("usage errors and help") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    Result help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("solve") != std::string::npos);
    CHECK(run({"solve"}).code == 1);
    Result missing = run({"solve", "/nonexistent/x.cnf"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("error") != std::string::npos);
}

TEST_CASE("solve and check round trip") {
    TempDir tmp;
    const std::string cnf = tmp.file("u3.cnf"), proof = tmp.file("u3.lrat"),
                      report = tmp.file("r.json"), manifest = tmp.file("u3.man");
    Result g = run({"gen", "urquhart", "-m", "3", "--seed", "4", "-o", cnf, "--manifest", manifest});
    REQUIRE(g.code == 0);
    CHECK(g.out.find("vars=153 clauses=408") != std::string::npos);
    CHECK(gen::parse_manifest(slurp(manifest)).constraints.size() == 102);

    Result s = run({"solve", cnf, "--proof", proof, "--report", report});
    CHECK(s.code == 20);
    CHECK(s.out.find("s UNSATISFIABLE") != std::string::npos);
    CHECK(fs::file_size(proof) > 0);

    auto j = nlohmann::json::parse(slurp(report));
    CHECK(j["status"] == "UNSAT");
    CHECK(j["exit_code"] == 20);
    CHECK(j["mode"] == "xor");
    CHECK(j["xors"] == 102);
    CHECK(j["proof_added"].get<uint64_t>() > 0);
    CHECK(j["extension_vars"].get<uint64_t>() > 0);
    CHECK(j["peak_bdd_nodes"].get<uint64_t>() > 0);
    CHECK(j["par2"].get<double>() == doctest::Approx(j["wall_seconds"].get<double>()));

    Result c = run({"check", cnf, proof});
    CHECK(c.code == 0);
    CHECK(c.out.find("s VERIFIED") != std::string::npos);

    SUBCASE("truncated proof is rejected in refutation mode") {
        std::string text = slurp(proof);
        std::string half = text.substr(0, text.rfind('\n', text.size() / 2) + 1);
        const std::string cut = tmp.file("cut.lrat");
        write(cut, half);
        Result r = run({"check", cnf, cut});
        CHECK(r.code == 2);
        CHECK(r.out.find("empty clause") != std::string::npos);
        CHECK(run({"check", cnf, cut, "--derivation"}).code == 0);
    }
    SUBCASE("corrupted hint is rejected with its step id") {
        // replace the first hint of the last add line by a bogus id
        std::string text = slurp(proof);
        std::vector<std::string> lines;
        std::istringstream in(text);
        for (std::string l; std::getline(in, l);)
            lines.push_back(l);
        size_t idx = lines.size();
        while (idx-- > 0)
            if (lines[idx].find(" d ") == std::string::npos)
                break;
        std::istringstream ls(lines[idx]);
        std::string id;
        ls >> id;
        // the empty clause line: "<id> 0 <hints> 0"
        lines[idx] = id + " 0 999999999 0";
        std::string mutated;
        for (auto& l : lines)
            mutated += l + "\n";
        const std::string bad = tmp.file("bad.lrat");
        write(bad, mutated);
        Result r = run({"check", cnf, bad});
        CHECK(r.code == 2);
        CHECK(r.out.find("c step " + id + ":") != std::string::npos);
    }
}

TEST_CASE("satisfiable instance prints a verified model") {
    TempDir tmp;
    const std::string cnf = tmp.file("l.cnf"), order = tmp.file("l.ord");
    Result g = run({"gen", "lpn", "-n", "8", "--seed", "2", "-o", cnf, "--var-order", order});
    REQUIRE(g.code == 0);
    Result s = run({"solve", cnf, "--var-order", order});
    CHECK(s.code == 10);
    CHECK(s.out.find("s SATISFIABLE") != std::string::npos);
    // collect the model and evaluate it
    CnfFormula f = read_dimacs_file(cnf);
    std::vector<bool> model(size_t(f.num_vars) + 1, false);
    std::istringstream in(s.out);
    size_t values = 0;
    for (std::string line; std::getline(in, line);) {
        if (line.rfind("v ", 0) != 0)
            continue;
        std::istringstream ls(line.substr(2));
        int64_t d;
        while (ls >> d)
            if (d != 0) {
                model[size_t(std::abs(d))] = d > 0;
                values++;
            }
    }
    CHECK(values == f.num_vars);
    CHECK(evaluate(f, model));
    CHECK(run({"solve", cnf, "--no-model"}).out.find("v ") == std::string::npos);
}

TEST_CASE("limits map to exit code 30") {
    TempDir tmp;
    const std::string cnf = tmp.file("u.cnf"), report = tmp.file("r.json"),
                      proof = tmp.file("p.lrat");
    REQUIRE(run({"gen", "urquhart", "-m", "3", "-o", cnf}).code == 0);
    Result t = run({"solve", cnf, "--no-xor", "--timeout", "1", "--report", report});
    CHECK(t.code == 30);
    CHECK(t.out.find("s UNKNOWN") != std::string::npos);
    auto j = nlohmann::json::parse(slurp(report));
    CHECK(j["status"] == "LIMIT");
    CHECK(j["par2"].get<double>() == 2.0);

    Result p = run({"solve", cnf, "--max-proof-clauses", "1000", "--proof", proof});
    CHECK(p.code == 30);
    std::string text = slurp(proof);
    REQUIRE_FALSE(text.empty());
    CHECK(text.back() == '\n');
    CHECK(run({"check", cnf, proof}).code == 2);
    CHECK(run({"check", cnf, proof, "--derivation"}).code == 0);
}

TEST_CASE("seed falls back to the environment") {
    TempDir tmp;
    const std::string a = tmp.file("a.cnf"), b = tmp.file("b.cnf");
    setenv("XORCERT_SEED", "77", 1);
    REQUIRE(run({"gen", "lpn", "-n", "6", "-o", a}).code == 0);
    unsetenv("XORCERT_SEED");
    REQUIRE(run({"gen", "lpn", "-n", "6", "--seed", "77", "-o", b}).code == 0);
    CHECK(slurp(a) == slurp(b));
    setenv("XORCERT_SEED", "seventy", 1);
    CHECK(run({"gen", "lpn", "-n", "6", "-o", a}).code == 1);
    unsetenv("XORCERT_SEED");
}

TEST_CASE("forced corruption is reported") {
    TempDir tmp;
    Result g = run({"gen", "lpn", "-n", "6", "--corrupt-prob", "0", "--unsat", "-o",
                    tmp.file("x.cnf")});
    CHECK(g.code == 0);
    CHECK(g.out.find("c note:") != std::string::npos);
    CHECK(g.out.find("bound=0") != std::string::npos);
}

TEST_CASE("bench") {
    SUBCASE("empty suite") {
        Result r = run({"bench"});
        CHECK(r.code == 0);
        CHECK(r.out.find("instance") != std::string::npos);
        CHECK(r.out.find("urq-") == std::string::npos);
    }
    SUBCASE("small urquhart suite") {
        TempDir tmp;
        const std::string json = tmp.file("b.jsonl");
        Result r = run({"bench", "--family", "urquhart", "--sizes", "3,4", "--seeds", "1,2",
                        "--jobs", "2", "--json", json});
        CHECK(r.code == 0);
        std::istringstream in(slurp(json));
        int rows = 0;
        for (std::string line; std::getline(in, line);) {
            auto j = nlohmann::json::parse(line);
            CHECK(j["status"] == "UNSAT");
            CHECK(j["verified"] == true);
            rows++;
        }
        CHECK(rows == 4);
        CHECK(r.out.find("average_par2") != std::string::npos);
    }
    SUBCASE("bad family") { CHECK(run({"bench", "--family", "sudoku", "--sizes", "3"}).code == 1); }
}

TEST_CASE("debug dumps") {
    TempDir tmp;
    const std::string cnf = tmp.file("w.cnf");
    write(cnf, kWorkedExample);
    Result t = run({"gj-trace", cnf, "--pivot", "1:1"});
    CHECK(t.code == 0);
    CHECK(t.out.find("(110|1) (100)\n(011|1) (110)\n(001|0) (101)\n") != std::string::npos);
    Result p = run({"gj-trace", cnf});
    CHECK(p.code == 0);
    CHECK(p.out.find("clause -3 0") != std::string::npos);
    CHECK(run({"gj-trace", cnf, "--pivot", "2:2"}).code == 1);

    Result d = run({"bdd-dump", cnf, "--index", "3"});
    CHECK(d.code == 0);
    CHECK(d.out.find("digraph") != std::string::npos);
    CHECK(d.err.find("nodes 5") != std::string::npos);
    CHECK(run({"bdd-dump", cnf, "--index", "4"}).code == 1);
}
