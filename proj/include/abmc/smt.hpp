#pragma once

// Incremental SMT-LIB 2 sessions over a child-process solver.

#include "abmc/formula.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <memory>

namespace abmc::smt {

/// Solver failure that is not an answer: spawn/handshake failure, process
/// death, protocol errors. Distinct from SatResult::Unknown.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SatResult {
    enum class Kind : std::uint8_t { Sat, Unsat, Unknown };
    Kind kind = Kind::Unknown;
    std::string reason;  ///< solver's reason for Unknown

    static SatResult sat() { return {Kind::Sat, {}}; }
    static SatResult unsat() { return {Kind::Unsat, {}}; }
    static SatResult unknown(std::string why) { return {Kind::Unknown, std::move(why)}; }
    [[nodiscard]] bool is_sat() const { return kind == Kind::Sat; }
    [[nodiscard]] bool is_unsat() const { return kind == Kind::Unsat; }
    [[nodiscard]] bool is_unknown() const { return kind == Kind::Unknown; }
    [[nodiscard]] std::string str() const;
};

struct SolverConfig {
    std::vector<std::string> command{"z3", "-in"};
    std::string logic = "ALL";
    std::optional<std::chrono::milliseconds> query_timeout;
    std::optional<unsigned> random_seed;
    /// If non-empty, every command sent and every response is appended here.
    std::string transcript_path;
    /// Extra (set-option :key value) pairs sent before set-logic.
    std::vector<std::pair<std::string, std::string>> options;
    /// When the handshake identifies Z3, select its legacy arithmetic solver,
    /// which is several times faster on deep incremental unrollings.
    bool z3_tuning = true;

    /// Splits a shell-like command string on whitespace ("z3 -in").
    static std::vector<std::string> split_command(const std::string &cmd);
};

/// SMT-LIB symbol of an indexed variable: x^(3) is x_3, lbl^(5) is lbl_5.
/// Names outside the simple-symbol alphabet are |quoted|.
std::string symbol(const Var &v);

std::string to_smt2(const IntTerm &t);
std::string to_smt2(const Literal &l);
std::string to_smt2(const Formula &f);

/// The push/pop/assert/check interface the engines are written against.
class Solver {
public:
    virtual ~Solver() = default;
    /// All variables must be indexed; new ones are declared on first use.
    virtual void assert_formula(const Formula &f) = 0;
    virtual void push() = 0;
    /// Throws SolverError on underflow.
    virtual void pop() = 0;
    /// `limit` caps this query in addition to the configured per-query timeout.
    virtual SatResult check(std::optional<std::chrono::milliseconds> limit = std::nullopt) = 0;
    /// Valuation for `vars` after a Sat answer. Variables the solver never saw
    /// or did not assign are completed with 0; callers re-verify.
    virtual Valuation get_model(const std::set<Var> &vars) = 0;
    [[nodiscard]] virtual unsigned depth() const = 0;
};

using SolverFactory = std::function<std::unique_ptr<Solver>()>;

class ProcessSolver final : public Solver {
public:
    explicit ProcessSolver(SolverConfig cfg);
    ~ProcessSolver() override;
    ProcessSolver(const ProcessSolver &) = delete;
    ProcessSolver &operator=(const ProcessSolver &) = delete;

    void assert_formula(const Formula &f) override;
    void push() override;
    void pop() override;
    SatResult check(std::optional<std::chrono::milliseconds> limit = std::nullopt) override;
    Valuation get_model(const std::set<Var> &vars) override;
    [[nodiscard]] unsigned depth() const override { return depth_; }

    /// Solver process id, or -1 once stopped.
    [[nodiscard]] int pid() const { return pid_; }
    /// Sends (exit) and reaps the process. Idempotent.
    void stop();

private:
    void send(const std::string &line);
    std::string read_response(std::optional<std::chrono::steady_clock::time_point> deadline);
    void declare(const Formula &f);
    [[noreturn]] void die(const std::string &why);

    SolverConfig cfg_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    std::ofstream transcript_;
    std::map<std::string, Var> declared_;
    /// Declarations made inside each open push frame (SMT-LIB pops them).
    std::vector<std::vector<std::string>> frames_;
    unsigned depth_ = 0;
    bool model_available_ = false;
    std::optional<std::chrono::milliseconds> applied_timeout_;
    bool timeout_applied_ = false;
};

/// Factory spawning a fresh ProcessSolver per call.
SolverFactory process_solver_factory(SolverConfig cfg);

}  // namespace abmc::smt
