#include "abmc/smt.hpp"

#include "abmc/sexpr.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace abmc::smt {

namespace {

using Clock = std::chrono::steady_clock;

// Extra time granted past the solver's own timeout before the process is
// considered hung and killed.
constexpr std::chrono::milliseconds kGrace{2000};

bool simple_symbol(const std::string &s) {
    static const std::string extra = "~!@$%^&*_-+=<>.?/";
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || extra.find(c) != std::string::npos;
    });
}

bool resolvable(const std::string &cmd) {
    namespace fs = std::filesystem;
    if (cmd.find('/') != std::string::npos) return ::access(cmd.c_str(), X_OK) == 0;
    const char *path = std::getenv("PATH");
    if (!path) return false;
    std::stringstream ss(path);
    std::string dir;
    while (std::getline(ss, dir, ':')) {
        if (dir.empty()) dir = ".";
        fs::path p = fs::path(dir) / cmd;
        if (::access(p.c_str(), X_OK) == 0 && !fs::is_directory(p)) return true;
    }
    return false;
}

std::int64_t parse_value(const SExpr &e) {
    auto parse_nat = [&](const SExpr &a) -> std::int64_t {
        if (!a.is_atom() || a.text.empty() ||
            !std::all_of(a.text.begin(), a.text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            throw SolverError("cannot parse model value: " + e.str());
        try {
            std::size_t used = 0;
            long long v = std::stoll(a.text, &used);
            return v;
        } catch (const std::out_of_range &) {
            throw SolverError("model value out of 64-bit range: " + e.str());
        }
    };
    if (e.is_atom()) return parse_nat(e);
    if (e.is_list() && e.items.size() == 2 && e.items[0].is_atom("-")) return -parse_nat(e.items[1]);
    throw SolverError("cannot parse model value: " + e.str());
}

}  // namespace

std::string SatResult::str() const {
    switch (kind) {
    case Kind::Sat: return "sat";
    case Kind::Unsat: return "unsat";
    case Kind::Unknown: return reason.empty() ? "unknown" : "unknown (" + reason + ")";
    }
    return "?";
}

std::vector<std::string> SolverConfig::split_command(const std::string &cmd) {
    std::vector<std::string> out;
    std::stringstream ss(cmd);
    std::string w;
    while (ss >> w) out.push_back(w);
    return out;
}

std::string symbol(const Var &v) {
    if (!v.indexed()) throw InternalError("unindexed variable " + v.str() + " sent to the solver");
    if (v.kind == VarKind::Post) throw InternalError("post variable " + v.str() + " sent to the solver");
    std::string s = v.name + "_" + std::to_string(*v.index);
    return simple_symbol(s) ? s : "|" + s + "|";
}

namespace {
const SexprStyle kStyle{[](const Var &v) { return symbol(v); }, true};
}

std::string to_smt2(const IntTerm &t) { return to_sexpr(t, kStyle); }
std::string to_smt2(const Literal &l) { return to_sexpr(l, kStyle); }
std::string to_smt2(const Formula &f) { return to_sexpr(f, kStyle); }

// ---------------------------------------------------------------- ProcessSolver

ProcessSolver::ProcessSolver(SolverConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.command.empty()) throw SolverError("solver not found: empty command");
    if (!resolvable(cfg_.command.front())) throw SolverError("solver not found: " + cfg_.command.front());
    if (!cfg_.transcript_path.empty()) {
        transcript_.open(cfg_.transcript_path, std::ios::app);
        if (!transcript_) throw SolverError("cannot open transcript " + cfg_.transcript_path);
    }
    std::signal(SIGPIPE, SIG_IGN);

    int in[2];
    int out[2];
    if (::pipe(in) != 0 || ::pipe(out) != 0) throw SolverError(std::string("pipe: ") + std::strerror(errno));
    std::vector<char *> argv;
    for (auto &a : cfg_.command) argv.push_back(a.data());
    argv.push_back(nullptr);

    pid_t pid = ::fork();
    if (pid < 0) throw SolverError(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::dup2(in[0], STDIN_FILENO);
        ::dup2(out[1], STDOUT_FILENO);
        int devnull = ::open("/dev/null", O_WRONLY);
        if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
        ::close(in[0]);
        ::close(in[1]);
        ::close(out[0]);
        ::close(out[1]);
        ::execvp(argv[0], argv.data());
        ::_exit(127);
    }
    ::close(in[0]);
    ::close(out[1]);
    pid_ = pid;
    to_child_ = in[1];
    from_child_ = out[0];
    ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
    ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);

    try {
        send("(get-info :name)");
        std::string r = read_response(Clock::now() + std::chrono::seconds(10));
        if (r.rfind("(:name", 0) != 0) die("unexpected handshake response: " + r);
        send("(set-option :produce-models true)");
        if (cfg_.z3_tuning && r.find("\"Z3\"") != std::string::npos) send("(set-option :smt.arith.solver 2)");
        for (const auto &[k, v] : cfg_.options) send("(set-option :" + k + " " + v + ")");
        if (cfg_.random_seed) {
            send("(set-option :random-seed " + std::to_string(*cfg_.random_seed) + ")");
            send("(set-option :smt.random_seed " + std::to_string(*cfg_.random_seed) + ")");
        }
        send("(set-logic " + cfg_.logic + ")");
        // A second round trip surfaces any error the setup commands caused.
        send("(get-info :name)");
        r = read_response(Clock::now() + std::chrono::seconds(10));
        if (r.rfind("(:name", 0) != 0) die("solver rejected setup: " + r);
    } catch (...) {
        stop();
        throw;
    }
}

ProcessSolver::~ProcessSolver() { stop(); }

void ProcessSolver::stop() {
    if (pid_ < 0) return;
    if (to_child_ >= 0) {
        const char bye[] = "(exit)\n";
        [[maybe_unused]] auto n = ::write(to_child_, bye, sizeof bye - 1);
        ::close(to_child_);
        to_child_ = -1;
    }
    int status = 0;
    auto until = Clock::now() + std::chrono::milliseconds(500);
    while (::waitpid(pid_, &status, WNOHANG) == 0) {
        if (Clock::now() > until) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, &status, 0);
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    if (from_child_ >= 0) ::close(from_child_);
    from_child_ = -1;
    pid_ = -1;
}

void ProcessSolver::die(const std::string &why) {
    if (pid_ >= 0) ::kill(pid_, SIGKILL);
    stop();
    throw SolverError(why);
}

void ProcessSolver::send(const std::string &line) {
    if (pid_ < 0) throw SolverError("solver process is not running");
    if (transcript_) transcript_ << line << '\n';
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
        ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            die("solver process died (write failed)");
        }
        off += static_cast<std::size_t>(n);
    }
}

std::string ProcessSolver::read_response(std::optional<Clock::time_point> deadline) {
    for (;;) {
        if (std::size_t len = complete_sexpr_length(buffer_)) {
            std::string r = buffer_.substr(0, len);
            buffer_.erase(0, len);
            r.erase(0, r.find_first_not_of(" \t\r\n"));
            if (transcript_) {
                std::string c = r;
                for (std::size_t at = 0; (at = c.find('\n', at)) != std::string::npos; at += 3) c.replace(at, 1, "\n; ");
                transcript_ << "; " << c << '\n';
            }
            return r;
        }
        int wait_ms = -1;
        if (deadline) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - Clock::now()).count();
            if (left <= 0) die("solver did not answer in time; process killed");
            wait_ms = static_cast<int>(std::min<long long>(left, 1 << 30));
        }
        pollfd pfd{from_child_, POLLIN, 0};
        int pr = ::poll(&pfd, 1, wait_ms);
        if (pr < 0) {
            if (errno == EINTR) continue;
            die(std::string("poll: ") + std::strerror(errno));
        }
        if (pr == 0) continue;  // deadline re-checked above
        char chunk[4096];
        ssize_t n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) die("solver process died");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

void ProcessSolver::declare(const Formula &f) {
    for (const auto &v : f.vars()) {
        std::string s = symbol(v);  // rejects unindexed variables
        auto it = declared_.find(s);
        if (it != declared_.end()) {
            if (it->second != v) throw InternalError("SMT symbol clash: " + v.str() + " and " + it->second.str());
            continue;
        }
        send("(declare-const " + s + " Int)");
        declared_.emplace(s, v);
        if (!frames_.empty()) frames_.back().push_back(s);
    }
}

void ProcessSolver::assert_formula(const Formula &f) {
    declare(f);
    send("(assert " + to_smt2(f) + ")");
    model_available_ = false;
}

void ProcessSolver::push() {
    send("(push 1)");
    frames_.emplace_back();
    ++depth_;
    model_available_ = false;
}

void ProcessSolver::pop() {
    if (depth_ == 0) throw SolverError("pop at stack depth 0");
    send("(pop 1)");
    for (const auto &s : frames_.back()) declared_.erase(s);
    frames_.pop_back();
    --depth_;
    model_available_ = false;
}

SatResult ProcessSolver::check(std::optional<std::chrono::milliseconds> limit) {
    std::optional<std::chrono::milliseconds> t = cfg_.query_timeout;
    if (limit && (!t || *limit < *t)) t = std::max(*limit, std::chrono::milliseconds(1));
    if (!timeout_applied_ || t != applied_timeout_) {
        // z3 reads 0 as "no timeout"
        send("(set-option :timeout " + std::to_string(t ? t->count() : 0) + ")");
        applied_timeout_ = t;
        timeout_applied_ = true;
    }
    send("(check-sat)");
    std::optional<Clock::time_point> deadline;
    if (t) deadline = Clock::now() + *t + kGrace;
    std::string r = read_response(deadline);
    model_available_ = false;
    if (r == "sat") {
        model_available_ = true;
        return SatResult::sat();
    }
    if (r == "unsat") return SatResult::unsat();
    if (r == "unknown") {
        send("(get-info :reason-unknown)");
        std::string why = read_response(Clock::now() + std::chrono::seconds(10));
        auto items = parse_sexprs(why);
        if (items.size() == 1 && items[0].is_list() && items[0].items.size() == 2) why = items[0].items[1].text;
        return SatResult::unknown(why);
    }
    die("unexpected check-sat response: " + r);
}

Valuation ProcessSolver::get_model(const std::set<Var> &vars) {
    if (!model_available_) throw SolverError("model requested without a preceding sat answer");
    Valuation out;
    std::vector<Var> asked;
    std::string query;
    for (const auto &v : vars) {
        std::string s = symbol(v);
        auto it = declared_.find(s);
        if (it == declared_.end() || it->second != v) {
            out.emplace(v, 0);
            continue;
        }
        asked.push_back(v);
        query += (query.empty() ? "" : " ") + s;
    }
    if (asked.empty()) return out;
    send("(get-value (" + query + "))");
    std::string r = read_response(Clock::now() + std::chrono::seconds(30));
    std::vector<SExpr> parsed;
    try {
        parsed = parse_sexprs(r);
    } catch (const ParseError &e) {
        throw SolverError(std::string("cannot parse get-value response: ") + e.what());
    }
    if (parsed.size() != 1 || !parsed[0].is_list() || parsed[0].head_is("error"))
        throw SolverError("get-value failed: " + r);
    std::map<std::string, std::int64_t> values;
    for (const auto &pair : parsed[0].items) {
        if (!pair.is_list() || pair.items.size() != 2 || !pair.items[0].is_atom())
            throw SolverError("malformed get-value entry: " + pair.str());
        std::string key = pair.items[0].text;
        if (!simple_symbol(key)) key = "|" + key + "|";
        values[key] = parse_value(pair.items[1]);
    }
    for (const auto &v : asked) {
        auto it = values.find(symbol(v));
        out.emplace(v, it == values.end() ? 0 : it->second);
    }
    return out;
}

SolverFactory process_solver_factory(SolverConfig cfg) {
    return [cfg = std::move(cfg)]() -> std::unique_ptr<Solver> { return std::make_unique<ProcessSolver>(cfg); };
}

}  // namespace abmc::smt
