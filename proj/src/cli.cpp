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
#include "heterotest/cli.hpp"

#include "heterotest/csxms.hpp"
#include "heterotest/dft.hpp"
#include "heterotest/fsm_testing.hpp"
#include "heterotest/heterotic.hpp"
#include "heterotest/json_io.hpp"
#include "heterotest/mutation.hpp"
#include "heterotest/psystem.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

namespace heterotest {

namespace {

struct Common {
    std::string format = "text";
    std::string output;
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--format", c.format, "stdout rendering")
        ->check(CLI::IsMember({"json", "text"}));
    sub->add_option("-o,--output", c.output, "write the JSON artifact to this file");
}

std::uint64_t default_seed()
{
    if (const char* s = std::getenv("HETEROTEST_SEED")) {
        try {
            return std::stoull(s);
        } catch (...) {
            throw Error(ErrorCode::Parse, std::string("HETEROTEST_SEED is not an integer: ") + s);
        }
    }
    return 0;
}

/// Writes the artifact to -o and renders it on stdout.
void emit(const Common& c, std::ostream& out, const nlohmann::ordered_json& artifact,
          const std::string& text)
{
    const std::string json_text = artifact.dump(2) + "\n";
    if (!c.output.empty())
        write_text_file(c.output, json_text);
    out << (c.format == "json" ? json_text : text);
}

std::string render_violations(const ValidationReport& r)
{
    std::ostringstream os;
    for (const auto& v : r)
        os << v.location << ": " << v.message << '\n';
    return os.str();
}

nlohmann::ordered_json violations_json(const ValidationReport& r)
{
    auto a = nlohmann::ordered_json::array();
    for (const auto& v : r)
        a.push_back({{"location", v.location}, {"message", v.message}});
    return a;
}

std::string render_suite(const TestSuite& s)
{
    std::ostringstream os;
    os << "method " << s.method << ", k = " << s.k << ", " << s.cases.size() << " case(s)\n";
    for (std::size_t i = 0; i < s.cases.size(); ++i) {
        os << "  [" << i << "]";
        for (const auto& v : s.cases[i].input)
            os << ' ' << v.to_string();
        if (s.cases[i].input.empty())
            os << " ε";
        os << "  =>";
        if (s.cases[i].expected_outputs.empty())
            os << " (no complete run)";
        for (const auto& o : s.cases[i].expected_outputs) {
            os << " [";
            for (std::size_t k = 0; k < o.size(); ++k)
                os << (k ? " " : "") << o[k].to_string();
            os << "]";
        }
        os << '\n';
    }
    return os.str();
}

std::string render_coverage(const PSystem& ps, const CoverageTestSet& set)
{
    std::ostringstream os;
    os << "depth " << set.depth << ", test set {";
    for (std::size_t i = 0; i < set.members.size(); ++i)
        os << (i ? ", " : "") << canonical(set.members[i]);
    os << "}\n";
    for (const auto& rc : set.report) {
        os << "  " << rc.rule << ": ";
        if (rc.covered)
            os << canonical(*rc.configuration) << "  via " << render_trace(ps, *rc.witness);
        else
            os << "not covered";
        os << '\n';
    }
    return os.str();
}

std::vector<MutationOperator> parse_ops(const std::string& text)
{
    std::vector<MutationOperator> ops;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        auto op = parse_operator(item);
        if (!op)
            throw Error(ErrorCode::Parse, "unknown mutation operator '" + item + "'");
        ops.push_back(*op);
    }
    return ops;
}

MutableModel load_mutable(const nlohmann::json& j, const std::string& path)
{
    switch (detect_model_kind(j)) {
    case ModelKind::PSystem:
        return parse_psystem(j);
    case ModelKind::Sxm:
        return parse_sxm(j);
    case ModelKind::System:
        return parse_system(j);
    case ModelKind::Heterotic:
        return load_heterotic(j, std::filesystem::path(path).parent_path()).as_system;
    }
    return parse_sxm(j);
}

PSystem load_psystem_of(const nlohmann::json& j, const std::string& path)
{
    if (detect_model_kind(j) == ModelKind::Heterotic)
        return load_heterotic(j, std::filesystem::path(path).parent_path()).psystem;
    return parse_psystem(j);
}

std::vector<std::string> split_words(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string w;
    while (is >> w)
        out.push_back(w);
    return out;
}

}  // namespace

int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Parse:
    case ErrorCode::Io:
        return kExitIo;
    case ErrorCode::InvalidModel:
    case ErrorCode::DftFailure:
    case ErrorCode::PortIncompatibility:
    case ErrorCode::MissingSample:
        return kExitValidation;
    default:
        return kExitGeneration;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::string& self)
{
    CLI::App app{"Test generation for stream X-machines, P systems and heterotic systems",
                 "heterotest"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    std::string model;
    std::uint64_t seed = 0;
    bool seed_given = false;
    auto seed_opt = [&](CLI::App* s) {
        s->add_option_function<std::uint64_t>(
            "--seed",
            [&](const std::uint64_t& v) {
                seed = v;
                seed_given = true;
            },
            "seed (default: $HETEROTEST_SEED or 0)");
    };

    // validate
    Common c_validate;
    bool dft = false;
    auto* validate = app.add_subcommand("validate", "check a model file");
    validate->add_option("model", model, "model file")->required();
    validate->add_flag("--dft", dft, "also check the design-for-test conditions");
    add_common(validate, c_validate);

    // simulate
    Common c_sim;
    std::size_t depth = 0;
    bool all_branches = false;
    std::size_t rounds = 1;
    std::string oracle_cmd;
    int oracle_timeout = 5000;
    int oracle_retries = 0;
    auto* simulate = app.add_subcommand("simulate", "run a P system or a heterotic system");
    simulate->add_option("model", model, "P system or heterotic system file")->required();
    auto* depth_opt = simulate->add_option("--depth", depth, "maximal number of steps");
    auto* ab = simulate->add_flag("--all-branches", all_branches, "explore every branch");
    seed_opt(simulate);
    simulate->get_option("--seed")->excludes(ab);
    simulate->add_option("--rounds", rounds, "heterotic rounds")->check(CLI::PositiveNumber);
    simulate->add_option("--oracle", oracle_cmd,
                         "external Base executor command, or 'builtin'");
    simulate->add_option("--oracle-timeout", oracle_timeout, "milliseconds per oracle call");
    simulate->add_option("--oracle-retries", oracle_retries, "retries after a timeout");
    add_common(simulate, c_sim);

    // gen-tests
    Common c_gen;
    std::string kind;
    std::size_t extra_states = 0;
    std::size_t gen_depth = 3;
    auto* gen = app.add_subcommand("gen-tests", "generate a test suite or test set");
    gen->add_option("kind", kind, "sxm | system | psystem | heterotic")
        ->required()
        ->check(CLI::IsMember({"sxm", "system", "psystem", "heterotic"}));
    gen->add_option("model", model, "model file")->required();
    auto* k_opt = gen->add_option("--extra-states", extra_states, "W-method k");
    auto* d_opt = gen->add_option("--depth", gen_depth, "coverage depth (P systems)");
    k_opt->excludes(d_opt);
    add_common(gen, c_gen);

    // product
    Common c_prod;
    std::size_t max_rows = 200000;
    auto* product = app.add_subcommand("product", "build the product SXM of a system");
    product->add_option("model", model, "communicating system file")->required();
    product->add_option("--max-rows", max_rows, "cap on serialised case rows");
    add_common(product, c_prod);

    // coverage
    Common c_cov;
    std::size_t cov_depth = 3;
    auto* coverage = app.add_subcommand("coverage", "rule coverage of all computations");
    coverage->add_option("model", model, "P system file")->required();
    coverage->add_option("--depth", cov_depth, "maximal number of steps");
    add_common(coverage, c_cov);

    // mutate / score
    Common c_mut;
    std::string ops_text;
    std::size_t count = kAllMutants;
    auto* mutate = app.add_subcommand("mutate", "seed faults into a model");
    mutate->add_option("model", model, "model file")->required();
    mutate->add_option("--ops", ops_text, "comma-separated operators (default: all for the kind)");
    seed_opt(mutate);
    mutate->add_option("--count", count, "maximal number of mutants")->check(CLI::PositiveNumber);
    add_common(mutate, c_mut);

    Common c_score;
    std::string suite_path;
    std::size_t bound = 6;
    auto* score = app.add_subcommand("score", "mutation score of a suite or coverage set");
    score->add_option("model", model, "specification model file")->required();
    score->add_option("suite", suite_path, "suite or coverage set file")->required();
    score->add_option("--ops", ops_text, "comma-separated operators");
    seed_opt(score);
    score->add_option("--count", count, "maximal number of mutants")->check(CLI::PositiveNumber);
    score->add_option("--bound", bound, "bounded-equivalence input length / depth");
    add_common(score, c_score);

    // oracle-serve (hidden)
    std::size_t depth_cap = 100;
    auto* serve = app.add_subcommand("oracle-serve", "");
    serve->group("");
    serve->add_option("model", model, "P system or heterotic system file")->required();
    seed_opt(serve);
    serve->add_option("--depth-cap", depth_cap, "");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }

    try {
        if (!seed_given)
            seed = default_seed();
        const auto base_dir = std::filesystem::path(model).parent_path();

        if (*validate) {
            const auto j = read_json_file(model);
            ValidationReport report;
            nlohmann::ordered_json art;
            art["schema"] = 1;
            art["model"] = model;
            std::string text;
            bool ok = true;
            switch (detect_model_kind(j)) {
            case ModelKind::Sxm: {
                Sxm m = parse_sxm(j);
                report = validate_sxm(m);
                if (report.empty() && dft) {
                    auto d = check_dft(m);
                    art["dft"] = to_ordered(dft_report_to_json(d));
                    text += render_dft_report(d);
                    ok = d.passed();
                }
                break;
            }
            case ModelKind::System: {
                CsxmSystem sys = parse_system(j);
                report = validate_system(sys);
                if (report.empty() && dft) {
                    const CsxmSystem ext = extend_for_testing(sys);
                    auto arr = nlohmann::ordered_json::array();
                    for (std::size_t i = 0; i < ext.components.size(); ++i) {
                        DftOptions o;
                        o.in_port_values = ext.components[i].in_port_domain;
                        auto d = check_dft(ext.components[i].base, o);
                        arr.push_back(to_ordered(dft_report_to_json(d)));
                        text += "component " + std::to_string(i + 1) + ":\n" + render_dft_report(d);
                        ok = ok && d.passed();
                    }
                    art["dft"] = arr;
                }
                break;
            }
            case ModelKind::PSystem:
                report = validate_psystem(parse_psystem(j));
                break;
            case ModelKind::Heterotic: {
                auto h = load_heterotic(j, base_dir);
                if (dft) {
                    const CsxmSystem ext = extend_for_testing(h.as_system);
                    auto arr = nlohmann::ordered_json::array();
                    for (std::size_t i = 0; i < ext.components.size(); ++i) {
                        DftOptions o;
                        o.in_port_values = ext.components[i].in_port_domain;
                        auto d = check_dft(ext.components[i].base, o);
                        arr.push_back(to_ordered(dft_report_to_json(d)));
                        text += std::string(i == 0 ? "Base" : "Control") + ":\n" +
                                render_dft_report(d);
                        ok = ok && d.passed();
                    }
                    art["dft"] = arr;
                }
                break;
            }
            }
            ok = ok && report.empty();
            art["violations"] = violations_json(report);
            art["valid"] = ok;
            text = render_violations(report) + text + (ok ? "valid\n" : "invalid\n");
            emit(c_validate, out, art, text);
            return ok ? kExitOk : kExitValidation;
        }

        if (*simulate) {
            const auto j = read_json_file(model);
            if (detect_model_kind(j) == ModelKind::Heterotic) {
                auto h = load_heterotic(j, base_dir);
                std::optional<OracleBinding> oracle;
                if (!oracle_cmd.empty()) {
                    OracleBinding b;
                    if (oracle_cmd == "builtin")
                        b.argv = {self,          "oracle-serve", model,
                                  "--seed",      std::to_string(h.wrap.seed),
                                  "--depth-cap", std::to_string(h.wrap.depth_cap)};
                    else
                        b.argv = split_words(oracle_cmd);
                    b.timeout_ms = oracle_timeout;
                    b.retries = oracle_retries;
                    oracle = b;
                }
                auto t = run_heterotic(h, rounds, oracle);
                emit(c_sim, out, heterotic_trace_to_json(h, t), render_heterotic_trace(h, t));
                return kExitOk;
            }
            if (!depth_opt->count())
                throw Error(ErrorCode::Parse, "simulate: --depth is required for P systems");
            PSystem ps = parse_psystem(j);
            if (auto r = validate_psystem(ps); !r.empty()) {
                err << render_violations(r);
                return kExitValidation;
            }
            const RunMode mode = all_branches ? RunMode::AllBranches : RunMode::SingleSeeded;
            auto traces = psystem_run(ps, depth, mode, seed);
            nlohmann::ordered_json art;
            art["schema"] = 1;
            art["mode"] = all_branches ? "all-branches" : "single-seeded";
            if (!all_branches)
                art["seed"] = seed;
            art["depth"] = depth;
            art["traces"] = nlohmann::ordered_json::array();
            std::string text;
            for (const auto& t : traces) {
                art["traces"].push_back(trace_to_json(ps, t));
                text += render_trace(ps, t) + "\n";
            }
            emit(c_sim, out, art, text);
            return kExitOk;
        }

        if (*gen) {
            const auto j = read_json_file(model);
            if (kind == "psystem") {
                PSystem ps = load_psystem_of(j, model);
                if (auto r = validate_psystem(ps); !r.empty()) {
                    err << render_violations(r);
                    return kExitValidation;
                }
                auto set = generate_coverage_test_set(ps, gen_depth);
                emit(c_gen, out, coverage_to_json(ps, set), render_coverage(ps, set));
                return kExitOk;
            }
            TestSuite suite;
            if (kind == "sxm") {
                Sxm m = parse_sxm(j);
                if (auto r = validate_sxm(m); !r.empty()) {
                    err << render_violations(r);
                    return kExitValidation;
                }
                suite = generate_sxm_test_suite(m, extra_states);
            } else if (kind == "system") {
                suite = generate_csxms_test_suite(parse_system(j), extra_states);
            } else {
                suite = generate_integration_tests(load_heterotic(j, base_dir), extra_states);
            }
            emit(c_gen, out, suite_to_json(suite), render_suite(suite));
            return kExitOk;
        }

        if (*product) {
            CsxmSystem sys = parse_system(read_json_file(model));
            if (auto r = validate_system(sys); !r.empty()) {
                err << render_violations(r);
                return kExitValidation;
            }
            Sxm p = build_product_sxm(extend_for_testing(sys));
            auto art = to_ordered(product_to_json(p, max_rows));
            std::ostringstream os;
            os << "product: " << p.states.size() << " state(s), " << p.inputs.size()
               << " input(s), " << p.outputs.size() << " output(s), " << p.functions.size()
               << " function(s), " << p.memory_domain.enumerate().size()
               << " sampled memory value(s)\n";
            for (const auto& q : p.states)
                os << "  " << q << '\n';
            emit(c_prod, out, art, os.str());
            return kExitOk;
        }

        if (*coverage) {
            PSystem ps = load_psystem_of(read_json_file(model), model);
            auto traces = psystem_run(ps, cov_depth, RunMode::AllBranches);
            auto rep = rule_coverage(ps, traces);
            nlohmann::ordered_json art;
            art["schema"] = 1;
            art["kind"] = "rule-coverage-report";
            art["depth"] = cov_depth;
            art["rules"] = coverage_report_to_json(ps, rep);
            std::ostringstream os;
            std::size_t covered = 0;
            for (const auto& rc : rep) {
                covered += rc.covered;
                os << rc.rule << ": "
                   << (rc.covered ? "covered at " + canonical(*rc.configuration) : "not covered")
                   << '\n';
            }
            os << covered << "/" << rep.size() << " rules covered within depth " << cov_depth
               << '\n';
            emit(c_cov, out, art, os.str());
            return kExitOk;
        }

        if (*mutate) {
            auto m = load_mutable(read_json_file(model), model);
            auto set = mutate_model(m, parse_ops(ops_text), seed, count);
            std::ostringstream os;
            for (const auto& x : set.mutants)
                os << x.id << "  " << operator_name(x.op) << "  " << x.location << '\n';
            os << set.mutants.size() << " mutant(s) from " << set.candidates << " candidate(s); "
               << set.invalid << " invalid, " << set.duplicates << " duplicate(s)\n";
            emit(c_mut, out, mutant_set_to_json(set, seed), os.str());
            return kExitOk;
        }

        if (*score) {
            const auto mj = read_json_file(model);
            const auto sj = read_json_file(suite_path);
            ScoreOptions so;
            so.equivalence_bound = bound;
            ScoreReport r;
            if (sj.contains("kind") && sj["kind"] == "rule-coverage") {
                PSystem ps = load_psystem_of(mj, model);
                CoverageTestSet set;
                set.depth = sj.at("depth").get<std::size_t>();
                for (const auto& c : sj.at("test_set"))
                    set.members.push_back(configuration_from_json(ps, c));
                auto muts = mutate_model(ps, parse_ops(ops_text), seed, count);
                if (muts.mutants.empty())
                    throw Error(ErrorCode::EmptyMutantSet, "mutant set is empty");
                r = mutation_score(ps, muts, set, so);
            } else {
                auto spec = load_mutable(mj, model);
                auto muts = mutate_model(spec, parse_ops(ops_text), seed, count);
                r = mutation_score(spec, muts, suite_from_json(sj), so);
            }
            emit(c_score, out, score_report_to_json(r), render_score_report(r));
            return kExitOk;
        }

        if (*serve) {
            PSystem ps = load_psystem_of(read_json_file(model), model);
            serve_oracle(ps, seed, depth_cap, std::cin, out);
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        if (!e.detail().is_null())
            err << e.detail().dump(2) << '\n';
        return exit_code_for(e.code());
    } catch (const nlohmann::json::exception& e) {
        err << "error [parse]: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitOk;
}

}  // namespace heterotest
