// abmc: check, bench and dump safety problems.

#include "abmc/engine.hpp"
#include "abmc/frontend.hpp"
#include "abmc/report.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <csignal>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace abmc;

namespace {

constexpr int kExitSafe = 20;
constexpr int kExitUnsafe = 10;
constexpr int kExitUnknown = 30;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 1;

struct CheckOptions {
    std::string file;
    std::string engine = "abmc-b";
    unsigned max_bound = 1000;
    long long timeout_ms = 0;
    std::string solver_cmd = "z3 -in";
    std::optional<unsigned> seed;
    std::string format = "text";
    std::string dump_smt2;
    bool validate = true;
    std::string dot;
};

int run_check(const CheckOptions &o) {
    SafetyProblem p;
    try {
        p = load_problem(o.file);
    } catch (const ParseError &e) {
        std::cerr << o.file << ":" << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << o.file << ": " << e.what() << "\n";
        return kExitUsage;
    }
    auto kind = parse_engine(o.engine);
    if (!kind) {
        std::cerr << "unknown engine '" << o.engine << "' (bmc, abmc, abmc-b)\n";
        return kExitUsage;
    }

    EngineConfig cfg;
    cfg.kind = *kind;
    cfg.max_bound = o.max_bound;
    if (o.timeout_ms > 0) cfg.wall_timeout = std::chrono::milliseconds(o.timeout_ms);
    cfg.solver.command = smt::SolverConfig::split_command(o.solver_cmd);
    cfg.solver.random_seed = o.seed;
    cfg.validate_cex = o.validate;
    const std::string stem = fs::path(o.file).stem().string() + "." + o.engine;
    if (!o.dump_smt2.empty()) {
        fs::create_directories(o.dump_smt2);
        cfg.solver.transcript_path = (fs::path(o.dump_smt2) / (stem + ".smt2")).string();
        fs::remove(cfg.solver.transcript_path);
        fs::remove(cfg.solver.transcript_path + ".scratch");
    }

    Verdict v;
    try {
        v = run_engine(p, cfg);
    } catch (const ValidationError &e) {
        std::cerr << "internal error: counterexample validation failed: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    if (!o.dot.empty()) {
        fs::create_directories(o.dot);
        std::ofstream(fs::path(o.dot) / (stem + ".dot")) << v.graph.to_dot();
    }

    RunResult r = make_result(o.file, *kind, v);
    if (o.format == "json") std::cout << verdict_json(r, v, p).dump() << "\n";
    else std::cout << verdict_text(r, v, p);
    return v.safe() ? kExitSafe : v.unsafe() ? kExitUnsafe : kExitUnknown;
}

// ---------------------------------------------------------------- bench

struct ChildOutput {
    std::string out;
    int status = -1;
    bool killed = false;
};

// Runs argv, capturing stdout; kills the child after `limit`.
ChildOutput run_child(const std::vector<std::string> &argv, std::chrono::milliseconds limit) {
    ChildOutput res;
    int pipefd[2];
    if (::pipe(pipefd) != 0) return res;
    pid_t pid = ::fork();
    if (pid < 0) return res;
    if (pid == 0) {
        ::dup2(pipefd[1], STDOUT_FILENO);
        ::close(pipefd[0]);
        ::close(pipefd[1]);
        std::vector<char *> args;
        for (const auto &a : argv) args.push_back(const_cast<char *>(a.c_str()));
        args.push_back(nullptr);
        ::execv(args[0], args.data());
        ::_exit(127);
    }
    ::close(pipefd[1]);
    auto deadline = std::chrono::steady_clock::now() + limit;
    char buf[4096];
    for (;;) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            ::kill(pid, SIGKILL);
            res.killed = true;
            break;
        }
        pollfd pfd{pipefd[0], POLLIN, 0};
        int pr = ::poll(&pfd, 1, static_cast<int>(left.count()));
        if (pr < 0 && errno == EINTR) continue;
        if (pr <= 0) continue;
        ssize_t n = ::read(pipefd[0], buf, sizeof buf);
        if (n <= 0) break;
        res.out.append(buf, static_cast<std::size_t>(n));
    }
    ::close(pipefd[0]);
    int status = 0;
    ::waitpid(pid, &status, 0);
    res.status = status;
    return res;
}

struct BenchOptions {
    std::string dir;
    std::vector<std::string> engines{"bmc", "abmc-b"};
    unsigned max_bound = 1000;
    long long timeout_ms = 10000;
    std::string solver_cmd = "z3 -in";
    std::optional<unsigned> seed;
    unsigned jobs = 1;
    std::string csv;
    std::string scatter;
};

int run_bench(const BenchOptions &o, const std::string &self) {
    std::vector<std::string> files;
    if (!fs::is_directory(o.dir)) {
        std::cerr << o.dir << ": not a directory\n";
        return kExitUsage;
    }
    for (const auto &e : fs::directory_iterator(o.dir)) {
        auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".sp" || ext == ".smt2")) files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    for (const auto &e : o.engines)
        if (!parse_engine(e)) {
            std::cerr << "unknown engine '" << e << "'\n";
            return kExitUsage;
        }

    struct Job {
        std::string file;
        std::string engine;
    };
    std::vector<Job> jobs;
    for (const auto &f : files)
        for (const auto &e : o.engines) jobs.push_back({f, e});
    std::vector<RunResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    const auto grace = std::chrono::milliseconds(5000);

    auto worker = [&] {
        for (std::size_t i; (i = next++) < jobs.size();) {
            const Job &j = jobs[i];
            std::vector<std::string> argv{self, "check", j.file, "--engine", j.engine, "--format", "json",
                                          "--max-bound", std::to_string(o.max_bound), "--timeout-ms",
                                          std::to_string(o.timeout_ms), "--solver-cmd", o.solver_cmd};
            if (o.seed) {
                argv.emplace_back("--seed");
                argv.push_back(std::to_string(*o.seed));
            }
            auto t0 = std::chrono::steady_clock::now();
            ChildOutput c = run_child(argv, std::chrono::milliseconds(o.timeout_ms) + grace);
            auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
            RunResult r;
            try {
                if (c.killed) throw std::runtime_error("killed after the time limit");
                r = RunResult::from_json(nlohmann::json::parse(c.out));
            } catch (const std::exception &e) {
                r = RunResult{};
                r.file = j.file;
                r.engine = j.engine;
                r.verdict = "unknown";
                r.wall_ms = ms;
                r.reason = c.killed ? "Timeout" : "Error";
                r.detail = e.what();
            }
            results[i] = std::move(r);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::max(1u, o.jobs); ++t) pool.emplace_back(worker);
    for (auto &t : pool) t.join();

    std::ofstream csv_file;
    if (!o.csv.empty()) csv_file.open(o.csv);
    std::ostream &csv = o.csv.empty() ? std::cout : csv_file;
    std::ostream &info = o.csv.empty() ? std::cerr : std::cout;
    csv << RunResult::csv_header() << "\n";
    for (const auto &r : results) csv << r.csv_row() << "\n";

    info << "engine    safe  unsafe  unknown\n";
    for (const auto &e : o.engines) {
        int s = 0, u = 0, k = 0;
        for (const auto &r : results) {
            if (r.engine != e) continue;
            (r.verdict == "safe" ? s : r.verdict == "unsafe" ? u : k)++;
        }
        info << std::left << std::setw(8) << e << std::right << std::setw(6) << s << std::setw(8) << u << std::setw(9)
             << k << "\n";
    }

    std::string scatter_path = o.scatter;
    if (scatter_path.empty() && !o.csv.empty())
        scatter_path = (fs::path(o.csv).parent_path() / (fs::path(o.csv).stem().string() + "_scatter.csv")).string();
    if (!scatter_path.empty()) {
        std::ofstream sc(scatter_path);
        sc << "file,abmc_b_bound,bmc_bound\n";
        for (const auto &f : files) {
            auto find = [&](const std::string &e) -> const RunResult * {
                for (const auto &r : results)
                    if (r.file == f && r.engine == e && r.verdict == "unsafe") return &r;
                return nullptr;
            };
            const RunResult *a = find("abmc-b");
            const RunResult *b = find("bmc");
            if (!a && !b) continue;
            sc << f << ',' << (a ? std::to_string(*a->bound) : "") << ',' << (b ? std::to_string(*b->bound) : "") << "\n";
        }
        info << "bound scatter written to " << scatter_path << "\n";
    }
    return 0;
}

int run_dump(const std::string &file) {
    try {
        std::cout << print_native(load_problem(file));
        return 0;
    } catch (const ParseError &e) {
        std::cerr << file << ":" << e.what() << "\n";
    } catch (const std::exception &e) {
        std::cerr << file << ": " << e.what() << "\n";
    }
    return kExitUsage;
}

std::string self_path(const char *argv0) {
    std::error_code ec;
    auto p = fs::read_symlink("/proc/self/exe", ec);
    return ec ? fs::absolute(argv0).string() : p.string();
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Bounded model checking with acceleration for integer transition systems and linear CHCs"};
    app.require_subcommand(1);

    CheckOptions co;
    auto *check = app.add_subcommand("check", "check one problem (.sp or .smt2)");
    check->add_option("file", co.file, "problem file")->required();
    check->add_option("--engine", co.engine, "bmc | abmc | abmc-b")->capture_default_str();
    check->add_option("--max-bound", co.max_bound, "give up after this many unrollings")->capture_default_str();
    check->add_option("--timeout-ms", co.timeout_ms, "wall-clock limit (0 = none)");
    check->add_option("--solver-cmd", co.solver_cmd, "SMT-LIB 2 solver command")->capture_default_str();
    check->add_option("--seed", co.seed, "solver random seed");
    check->add_option("--format", co.format, "text | json")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
    check->add_option("--dump-smt2", co.dump_smt2, "write solver transcripts to this directory");
    check->add_flag("--validate,!--no-validate", co.validate, "expand and replay counterexamples (default on)");
    check->add_option("--dot", co.dot, "write the dependency graph (DOT) to this directory");

    BenchOptions bo;
    auto *bench = app.add_subcommand("bench", "run engines over a directory of problems");
    bench->add_option("dir", bo.dir, "directory with .sp/.smt2 files")->required();
    bench->add_option("--engines", bo.engines, "engines to compare")->delimiter(',')->capture_default_str();
    bench->add_option("--max-bound", bo.max_bound)->capture_default_str();
    bench->add_option("--timeout-ms", bo.timeout_ms, "per-instance limit")->capture_default_str();
    bench->add_option("--solver-cmd", bo.solver_cmd)->capture_default_str();
    bench->add_option("--seed", bo.seed);
    bench->add_option("-j,--jobs", bo.jobs, "parallel instances")->capture_default_str();
    bench->add_option("--csv", bo.csv, "write CSV here instead of stdout");
    bench->add_option("--scatter", bo.scatter, "write the abmc-b vs bmc bound scatter here");

    std::string dump_file;
    auto *dump = app.add_subcommand("dump", "print the problem in canonical native format");
    dump->add_option("file", dump_file)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }
    try {
        if (*check) return run_check(co);
        if (*bench) return run_bench(bo, self_path(argv[0]));
        if (*dump) return run_dump(dump_file);
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
