/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "heterotest/heterotic.hpp"

#include "heterotest/error.hpp"
#include "heterotest/json_io.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <set>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace heterotest {

namespace {

const Value kTickValue = Value::atom(kTick);
const Value kFlushValue = Value::atom(kFlush);

// Shared simulator behind the wrapped Base's function bodies.
struct Simulator {
    PSystem ps;
    WrapOptions options;

    std::optional<PConfiguration> decode(const Value& m) const
    {
        return configuration_from_value(ps, m);
    }

    std::vector<PConfiguration> successors(const PConfiguration& c) const
    {
        std::vector<PConfiguration> out;
        if (is_halted(ps, c))
            return out;
        if (options.mode == RunMode::SingleSeeded) {
            out.push_back(seeded_step(ps, c, options.seed)->result);
            return out;
        }
        std::set<PConfiguration> seen;
        for (const auto& a : maximal_rule_multisets(ps, c))
            seen.insert(apply_assignment(ps, c, a));
        return {seen.begin(), seen.end()};
    }

    // Halting configurations reached from `c`; nullopt if some branch
    // exceeds the depth cap.
    std::optional<std::vector<PConfiguration>> run_to_halt(const PConfiguration& c) const
    {
        std::set<PConfiguration> halted;
        std::set<PConfiguration> layer{c};
        for (std::size_t d = 0; d <= options.depth_cap; ++d) {
            std::set<PConfiguration> next;
            for (const auto& x : layer) {
                if (is_halted(ps, x)) {
                    halted.insert(x);
                    continue;
                }
                for (auto& y : successors(x))
                    next.insert(std::move(y));
            }
            if (next.empty())
                return std::vector<PConfiguration>(halted.begin(), halted.end());
            layer = std::move(next);
        }
        return std::nullopt;
    }
};

using SimPtr = std::shared_ptr<const Simulator>;

class StepBody final : public FunctionBody {
public:
    explicit StepBody(SimPtr sim) : sim_(std::move(sim)) {}
    std::vector<Effect> apply(const Value& memory, const Value& input,
                              const Value& in_port) const override
    {
        std::vector<Effect> out;
        auto c = in_port.is_nomem() ? sim_->decode(memory) : std::nullopt;
        if (!c)
            return out;
        const bool halted = is_halted(sim_->ps, *c);
        if (input == kTickValue && !halted) {
            for (const auto& n : sim_->successors(*c))
                out.push_back({Value::atom("step"), configuration_to_value(n), std::nullopt});
        } else if (input == kFlushValue && halted) {
            out.push_back({Value::atom("step"), memory, std::nullopt});
        }
        return out;
    }

private:
    SimPtr sim_;
};

class EmitBody final : public FunctionBody {
public:
    explicit EmitBody(SimPtr sim) : sim_(std::move(sim)) {}
    std::vector<Effect> apply(const Value& memory, const Value& input,
                              const Value& in_port) const override
    {
        std::vector<Effect> out;
        auto c = in_port.is_nomem() ? sim_->decode(memory) : std::nullopt;
        if (!c)
            return out;
        const bool halted = is_halted(sim_->ps, *c);
        if (input == kTickValue && halted) {
            out.push_back({Value::atom("halt"), memory, memory});
        } else if (input == kFlushValue && !halted) {
            if (auto finals = sim_->run_to_halt(*c)) {
                for (const auto& f : *finals) {
                    Value v = configuration_to_value(f);
                    out.push_back({Value::atom("halt"), v, v});
                }
            }
        }
        return out;
    }

private:
    SimPtr sim_;
};

class SendBody final : public FunctionBody {
public:
    std::vector<Effect> apply(const Value& memory, const Value&, const Value&) const override
    {
        return {Effect{Value::lambda(), memory, std::nullopt}};
    }
};

class RecvBody final : public FunctionBody {
public:
    explicit RecvBody(SimPtr sim) : sim_(std::move(sim)) {}
    std::vector<Effect> apply(const Value&, const Value& input,
                              const Value& in_port) const override
    {
        if (input != kTickValue || in_port.is_nomem() || !sim_->decode(in_port))
            return {};
        return {Effect{Value::atom("load"), in_port, std::nullopt}};
    }

private:
    SimPtr sim_;
};

std::string mode_name(RunMode m)
{
    return m == RunMode::SingleSeeded ? "single-seeded" : "all-branches";
}

void ignore_sigpipe()
{
    static const bool done = [] {
        std::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)done;
}

enum class ChildOutcome { Line, Timeout, NoOutput };

// Spawns argv, writes `request`, reads one line within the deadline.
ChildOutcome run_child(const std::vector<std::string>& argv, const std::string& request,
                       int timeout_ms, std::string& line)
{
    ignore_sigpipe();
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0)
        throw Error(ErrorCode::Io, std::string("pipe: ") + std::strerror(errno));
    if (pipe(from_child) != 0) {
        close(to_child[0]);
        close(to_child[1]);
        throw Error(ErrorCode::Io, std::string("pipe: ") + std::strerror(errno));
    }
    pid_t pid = fork();
    if (pid < 0)
        throw Error(ErrorCode::Io, std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        setpgid(0, 0);  // own group, so a timeout kills the whole tree
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        std::vector<char*> args;
        for (const auto& a : argv)
            args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        _exit(127);
    }
    setpgid(pid, pid);
    close(to_child[0]);
    close(from_child[1]);
    const char* p = request.data();
    std::size_t left = request.size();
    while (left > 0) {
        ssize_t n = write(to_child[1], p, left);
        if (n <= 0)
            break;
        p += n;
        left -= static_cast<std::size_t>(n);
    }
    close(to_child[1]);

    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    std::string buf;
    ChildOutcome outcome = ChildOutcome::NoOutput;
    for (;;) {
        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            outcome = ChildOutcome::Timeout;
            break;
        }
        int wait_ms = static_cast<int>(
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
        pollfd pfd{from_child[0], POLLIN, 0};
        int r = poll(&pfd, 1, wait_ms);
        if (r < 0 && errno == EINTR)
            continue;
        if (r == 0) {
            outcome = ChildOutcome::Timeout;
            break;
        }
        char chunk[4096];
        ssize_t n = read(from_child[0], chunk, sizeof chunk);
        if (n <= 0)
            break;
        buf.append(chunk, static_cast<std::size_t>(n));
        auto nl = buf.find('\n');
        if (nl != std::string::npos) {
            line = buf.substr(0, nl);
            outcome = ChildOutcome::Line;
            break;
        }
    }
    if (outcome == ChildOutcome::NoOutput && !buf.empty()) {
        line = buf;
        outcome = ChildOutcome::Line;
    }
    close(from_child[0]);
    if (outcome == ChildOutcome::Timeout)
        kill(-pid, SIGKILL);
    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    return outcome;
}

}  // namespace

Csxm wrap_psystem_as_csxm(const PSystem& ps, const WrapOptions& options)
{
    auto sim = std::make_shared<Simulator>(Simulator{ps, options});

    std::vector<PConfiguration> starts{initial_p_configuration(ps)};
    starts.insert(starts.end(), options.restarts.begin(), options.restarts.end());
    std::set<Value> sample;
    std::set<Value> halted;
    for (const auto& s : starts) {
        if (!sim->run_to_halt(s))
            throw Error(ErrorCode::DepthCapExceeded,
                        "P system does not halt within " + std::to_string(options.depth_cap) +
                            " steps from " + canonical(s),
                        {{"start", configuration_to_json(ps, s)}, {"depth_cap", options.depth_cap}});
        std::set<PConfiguration> layer{s};
        while (!layer.empty()) {
            std::set<PConfiguration> next;
            for (const auto& x : layer) {
                if (!sample.insert(configuration_to_value(x)).second)
                    continue;
                if (is_halted(ps, x))
                    halted.insert(configuration_to_value(x));
                for (auto& y : sim->successors(x))
                    next.insert(std::move(y));
            }
            layer = std::move(next);
        }
    }

    Csxm c;
    Sxm& m = c.base;
    m.inputs = {kFlushValue, kTickValue};
    std::sort(m.inputs.begin(), m.inputs.end());
    m.outputs = {Value::atom("halt"), Value::atom("load"), Value::atom("step")};
    m.states = {"exec", "send", "wait"};
    m.initial_states = {"exec"};
    m.terminal_states = {"exec", "send", "wait"};
    m.memory_domain = MemoryDomain::open({sample.begin(), sample.end()});
    m.initial_memory = configuration_to_value(initial_p_configuration(ps));
    m.functions.emplace_back("phi_emit", std::make_shared<EmitBody>(sim));
    // Without restarts nothing ever arrives, so phi_recv is left out.
    const bool receives = !options.restarts.empty();
    if (receives)
        m.functions.emplace_back("phi_recv", std::make_shared<RecvBody>(sim));
    m.functions.emplace_back("phi_send", std::make_shared<SendBody>(), 2);
    m.functions.emplace_back("phi_step", std::make_shared<StepBody>(sim));
    m.next_state[{"exec", "phi_step"}] = {"exec"};
    m.next_state[{"exec", "phi_emit"}] = {"send"};
    m.next_state[{"send", "phi_send"}] = {"wait"};
    if (receives)
        m.next_state[{"wait", "phi_recv"}] = {"exec"};
    for (const auto& r : options.restarts)
        c.in_port_domain.push_back(configuration_to_value(r));
    std::sort(c.in_port_domain.begin(), c.in_port_domain.end());
    c.in_port_domain.erase(std::unique(c.in_port_domain.begin(), c.in_port_domain.end()),
                           c.in_port_domain.end());
    c.out_port_domain.assign(halted.begin(), halted.end());
    c.ordinary_states = {"exec", "wait"};
    c.communicating_states = {"send"};
    c.ordinary_functions = {"phi_emit", "phi_step"};
    if (receives)
        c.ordinary_functions.insert(c.ordinary_functions.begin() + 1, "phi_recv");
    c.communicating_functions = {"phi_send"};
    return c;
}

HeteroticSystem build_heterotic_system(const PSystem& ps, const Csxm& control,
                                       const WrapOptions& options)
{
    auto report = validate_psystem(ps);
    if (!report.empty())
        throw Error(ErrorCode::InvalidModel, "P system fails validation: " + report.front().location +
                                                 ": " + report.front().message);
    HeteroticSystem h;
    h.psystem = ps;
    h.wrap = options;
    h.wrap.restarts.clear();
    for (const auto& v : control.out_port_domain) {
        auto c = configuration_from_value(ps, v);
        if (!c)
            throw Error(ErrorCode::PortIncompatibility,
                        "Control may send " + v.to_string() +
                            ", which is not a configuration of the P system",
                        {{"value", value_to_json(v)}});
        h.wrap.restarts.push_back(*c);
    }
    for (const auto& f : control.communicating_functions) {
        const ProcessingFunction* fn = control.base.function(f);
        if (fn && fn->target() && *fn->target() != 1)
            throw Error(ErrorCode::PortIncompatibility,
                        "Control function " + f + " does not target the Base component");
    }
    h.base = wrap_psystem_as_csxm(ps, h.wrap);
    for (const auto& v : h.base.out_port_domain) {
        if (!std::binary_search(control.in_port_domain.begin(), control.in_port_domain.end(), v))
            throw Error(ErrorCode::PortIncompatibility,
                        "Base may emit " + v.to_string() + ", which Control cannot receive",
                        {{"value", value_to_json(v)}});
    }
    h.control = control;
    h.as_system.components = {h.base, h.control};
    auto sys_report = validate_system(h.as_system);
    if (!sys_report.empty())
        throw Error(ErrorCode::InvalidModel, "heterotic system fails validation: " +
                                                 sys_report.front().location + ": " +
                                                 sys_report.front().message);
    return h;
}

HeteroticSystem load_heterotic(const nlohmann::json& j, const std::filesystem::path& base_dir)
{
    static const std::set<std::string> known{"schema", "psystem", "control", "seed", "depth_cap",
                                             "mode"};
    if (!j.is_object())
        throw Error(ErrorCode::Parse, "heterotic system must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key()))
            throw Error(ErrorCode::Parse, "$: unknown key '" + it.key() + "'");
    }
    auto load = [&](const char* key) {
        if (!j.contains(key))
            throw Error(ErrorCode::Parse, std::string("$: missing key '") + key + "'");
        const auto& v = j.at(key);
        if (v.is_string())
            return read_json_file(base_dir / v.get<std::string>());
        return v;
    };
    PSystem ps = parse_psystem(load("psystem"));
    Csxm control = parse_csxm(load("control"));
    WrapOptions opts;
    try {
        if (j.contains("seed"))
            opts.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("depth_cap"))
            opts.depth_cap = j.at("depth_cap").get<std::size_t>();
        if (j.contains("mode")) {
            auto m = j.at("mode").get<std::string>();
            if (m == "single-seeded")
                opts.mode = RunMode::SingleSeeded;
            else if (m == "all-branches")
                opts.mode = RunMode::AllBranches;
            else
                throw Error(ErrorCode::Parse, "$.mode: expected single-seeded or all-branches");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("heterotic system: ") + e.what());
    }
    return build_heterotic_system(ps, control, opts);
}

OracleResult call_oracle(const OracleBinding& oracle, const PSystem& ps,
                         const PConfiguration& initial)
{
    if (oracle.argv.empty())
        throw Error(ErrorCode::InvalidModel, "oracle command is empty");
    nlohmann::ordered_json req;
    req["initial"] = configuration_to_json(ps, initial);
    const std::string request = req.dump() + "\n";
    for (int attempt = 0; attempt <= oracle.retries; ++attempt) {
        std::string line;
        auto outcome = run_child(oracle.argv, request, oracle.timeout_ms, line);
        if (outcome == ChildOutcome::Timeout)
            continue;
        if (outcome == ChildOutcome::NoOutput)
            throw Error(ErrorCode::OracleInvalidResult, "oracle produced no response");
        nlohmann::json resp;
        try {
            resp = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw Error(ErrorCode::OracleInvalidResult, "oracle response is not JSON: " + line);
        }
        if (!resp.is_object() || !resp.contains("final"))
            throw Error(ErrorCode::OracleInvalidResult, "oracle response lacks 'final': " + line);
        OracleResult r;
        try {
            r.final = configuration_from_json(ps, resp.at("final"));
            if (resp.contains("steps"))
                r.steps = resp.at("steps").get<std::size_t>();
        } catch (const std::exception& e) {
            throw Error(ErrorCode::OracleInvalidResult,
                        std::string("oracle result is malformed: ") + e.what());
        }
        if (auto msg = check_configuration(ps, r.final); !msg.empty())
            throw Error(ErrorCode::OracleInvalidResult, "oracle result is invalid: " + msg,
                        {{"response", resp}});
        return r;
    }
    throw Error(ErrorCode::OracleTimeout,
                "oracle did not answer within " + std::to_string(oracle.timeout_ms) + " ms (" +
                    std::to_string(oracle.retries + 1) + " attempts)");
}

void serve_oracle(const PSystem& ps, std::uint64_t seed, std::size_t depth_cap, std::istream& in,
                  std::ostream& out)
{
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        nlohmann::ordered_json resp;
        try {
            auto req = nlohmann::json::parse(line);
            PConfiguration c = configuration_from_json(ps, req.at("initial"));
            if (auto msg = check_configuration(ps, c); !msg.empty())
                throw Error(ErrorCode::Parse, msg);
            std::size_t steps = 0;
            while (!is_halted(ps, c)) {
                if (steps >= depth_cap)
                    throw Error(ErrorCode::DepthCapExceeded, "no halt within the depth cap");
                c = seeded_step(ps, c, seed)->result;
                ++steps;
            }
            resp["final"] = configuration_to_json(ps, c);
            resp["steps"] = steps;
        } catch (const std::exception& e) {
            resp = nlohmann::ordered_json::object();
            resp["error"] = e.what();
        }
        out << resp.dump() << '\n';
        out.flush();
    }
}

HeteroticTrace run_heterotic(const HeteroticSystem& h, std::size_t rounds,
                             const std::optional<OracleBinding>& oracle)
{
    if (rounds < 1)
        throw std::invalid_argument("rounds must be at least 1");
    const CsxmSystem& sys = h.as_system;
    HeteroticTrace trace;
    trace.seed = h.wrap.seed;
    trace.mode = mode_name(h.wrap.mode);
    trace.rounds = rounds;

    SystemConfiguration cfg = initial_system_configuration(sys);
    std::size_t completed = 0;
    std::size_t base_steps = 0;
    const std::size_t max_moves = 1000000;
    for (std::size_t move = 0;; ++move) {
        if (move >= max_moves)
            throw Error(ErrorCode::Deadlock, "no quiescence after " + std::to_string(max_moves) +
                                                 " moves");
        SystemConfiguration fed = cfg;
        for (auto& c : fed)
            c.remaining_input = {kTickValue};
        const auto transitions = system_transitions(sys, fed);

        const SystemTransition* comm = nullptr;
        for (const auto& t : transitions) {
            if (t.kind == SystemTransition::Kind::Communicating) {
                comm = &t;
                break;
            }
        }
        if (comm) {
            const bool b2c = comm->component == 1;
            if (!b2c && completed >= rounds)
                break;  // round budget spent
            Exchange ex;
            ex.index = trace.exchanges.size() + 1;
            ex.base_to_control = b2c;
            ex.configuration = *configuration_from_value(h.psystem, cfg[comm->component - 1].out_port);
            if (b2c) {
                ++completed;
                ex.base_steps = base_steps;
                base_steps = 0;
            }
            ex.round = completed;
            trace.exchanges.push_back(std::move(ex));
            cfg = comm->successor;
            for (auto& c : cfg)
                c.remaining_input.clear();
            continue;
        }

        const SystemTransition* ord = nullptr;
        for (const auto& t : transitions) {
            if (t.kind == SystemTransition::Kind::Ordinary) {
                ord = &t;
                break;
            }
        }
        if (!ord) {
            if (!sys.components[1].base.is_terminal(cfg[1].state))
                throw Error(ErrorCode::Deadlock,
                            "no move is enabled and Control is in non-terminal state " +
                                cfg[1].state);
            break;
        }
        if (oracle && ord->component == 1 && ord->function == "phi_step") {
            auto start = configuration_from_value(h.psystem, cfg[0].memory);
            auto r = call_oracle(*oracle, h.psystem, *start);
            const Value v = configuration_to_value(r.final);
            cfg[0].memory = v;
            cfg[0].out_port = v;
            cfg[0].state = "send";
            cfg[0].output.push_back(Value::atom("halt"));
            base_steps += r.steps;
            continue;
        }
        if (ord->component == 1 && ord->function == "phi_step")
            ++base_steps;
        cfg = ord->successor;
        for (auto& c : cfg)
            c.remaining_input.clear();
    }
    for (auto& c : cfg)
        c.output.clear();
    trace.final = cfg;
    return trace;
}

nlohmann::ordered_json heterotic_trace_to_json(const HeteroticSystem& h, const HeteroticTrace& t)
{
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["seed"] = t.seed;
    j["mode"] = t.mode;
    j["rounds"] = t.rounds;
    auto ex = nlohmann::ordered_json::array();
    for (const auto& e : t.exchanges) {
        nlohmann::ordered_json x;
        x["index"] = e.index;
        x["round"] = e.round;
        x["direction"] = e.base_to_control ? "base-to-control" : "control-to-base";
        x["configuration"] = configuration_to_json(h.psystem, e.configuration);
        x["base_steps"] = e.base_steps;
        ex.push_back(std::move(x));
    }
    j["exchanges"] = ex;
    nlohmann::ordered_json fin;
    if (t.final.size() == 2) {
        nlohmann::ordered_json base;
        base["state"] = t.final[0].state;
        if (auto c = configuration_from_value(h.psystem, t.final[0].memory))
            base["configuration"] = configuration_to_json(h.psystem, *c);
        nlohmann::ordered_json control;
        control["state"] = t.final[1].state;
        control["memory"] = value_to_ojson(t.final[1].memory);
        fin["base"] = base;
        fin["control"] = control;
    }
    j["final"] = fin;
    return j;
}

std::string render_heterotic_trace(const HeteroticSystem& h, const HeteroticTrace& t)
{
    std::ostringstream os;
    os << "heterotic run: seed " << t.seed << ", " << t.mode << ", " << t.rounds << " round(s)\n";
    for (const auto& e : t.exchanges) {
        os << "  #" << e.index << " round " << e.round << "  "
           << (e.base_to_control ? "Base -> Control" : "Control -> Base") << "  "
           << canonical(e.configuration);
        if (e.base_to_control)
            os << "  (" << e.base_steps << " Base steps)";
        os << '\n';
    }
    if (t.final.size() == 2)
        os << "final: Base " << t.final[0].state << " " << t.final[0].memory.to_string()
           << ", Control " << t.final[1].state << " " << t.final[1].memory.to_string() << '\n';
    (void)h;
    return os.str();
}

TestSuite generate_integration_tests(const HeteroticSystem& h, std::size_t k)
{
    TestSuite suite = generate_csxms_test_suite(h.as_system, k);
    suite.metadata["roles"] = {{"1", "base"}, {"2", "control"}};
    suite.metadata["seed"] = h.wrap.seed;
    suite.metadata["mode"] = mode_name(h.wrap.mode);
    suite.metadata["depth_cap"] = h.wrap.depth_cap;
    return suite;
}

}  // namespace heterotest
