#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "sdecv/errors.hpp"
#include "sdecv/estimators.hpp"
#include "sdecv/planner.hpp"
#include "sdecv/validation.hpp"

namespace cvsde {

using sdecv::ConfigError;

namespace {

const std::vector<std::string> kKeys = {"model", "approach", "reps", "seed", "threads", "out",  "p",
                                        "basis", "Q",        "R",    "trunc-A", "J",    "N",    "N0",
                                        "d",     "m",        "nu",   "b-nu",    "multiplier"};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool known_key(const std::string& key) {
    return key == "eps" || std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end();
}

double parse_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("--" + key + ": '" + text + "' is not a number");
}

std::int64_t parse_count(const std::string& key, const std::string& text) {
    const double v = parse_double(key, text);
    if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15) throw ConfigError("--" + key + ": expected a non-negative integer");
    return static_cast<std::int64_t>(v);
}

std::vector<double> split_eps(const std::vector<std::string>& items) {
    std::vector<double> out;
    for (const std::string& item : items) {
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, ',')) {
            part = trim(part);
            if (part.empty()) continue;
            const double eps = parse_double("eps", part);
            if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("--eps must lie in (0, 1), got " + part);
            out.push_back(eps);
        }
    }
    return out;
}

/// Config-file values overridden by command-line flags.
struct Options {
    Settings values;
    std::vector<double> eps;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::string text(const std::string& key, const std::string& fallback) const {
        return has(key) ? values.at(key) : fallback;
    }
    std::optional<double> real(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        return parse_double(key, values.at(key));
    }
    std::optional<std::int64_t> count(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        return parse_count(key, values.at(key));
    }
    std::int64_t positive(const std::string& key, std::int64_t fallback) const {
        const std::int64_t v = count(key).value_or(fallback);
        if (v < 1) throw ConfigError("--" + key + " must be positive");
        return v;
    }
    std::uint64_t seed() const {
        if (!has("seed")) return 1;
        const std::string& s = values.at("seed");
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(s, &used);
            if (used == s.size() && s.front() != '-') return v;
        } catch (const std::exception&) {
        }
        throw ConfigError("--seed: '" + s + "' is not an unsigned integer");
    }
    int threads() const { return static_cast<int>(count("threads").value_or(0)); }
};

struct CommandLine {
    Settings flags;
    std::vector<std::string> eps;
    std::string config;
    std::vector<CLI::Option*> options;
};

void add_flags(CLI::App* sub, CommandLine& cl) {
    for (const std::string& key : kKeys) cl.options.push_back(sub->add_option("--" + key, cl.flags[key]));
    sub->add_option("--eps", cl.eps, "target precision; repeatable, comma-separated lists allowed");
    sub->add_option("--config", cl.config, "key = value settings file; flags take precedence");
}

Options merge(const CommandLine& cl) {
    Options opt;
    if (!cl.config.empty()) opt.values = read_config_file(cl.config);
    std::vector<std::string> eps_items;
    if (opt.values.count("eps")) eps_items.push_back(opt.values.at("eps"));
    opt.values.erase("eps");
    for (std::size_t i = 0; i < kKeys.size(); ++i)
        if (cl.options[i]->count() > 0) opt.values[kKeys[i]] = cl.flags.at(kKeys[i]);
    if (!cl.eps.empty()) eps_items = cl.eps;
    opt.eps = split_eps(eps_items);
    return opt;
}

sdecv::Approach approach_of(const Options& opt, const std::string& fallback) {
    return sdecv::parse_approach(opt.text("approach", fallback));
}

bool piecewise(const Options& opt) {
    const std::string kind = opt.text("basis", "global");
    if (kind == "piecewise") return true;
    if (kind == "global") return false;
    throw ConfigError("--basis must be 'global' or 'piecewise', got '" + kind + "'");
}

sdecv::PlanInputs plan_inputs(const Options& opt, double eps, int d, int m, sdecv::Approach approach) {
    sdecv::PlanInputs in;
    in.epsilon = eps;
    in.d = d;
    in.m = m;
    in.p = static_cast<int>(opt.count("p").value_or(3));
    in.nu = opt.real("nu").value_or(sdecv::kInfiniteNu);
    in.b_nu = opt.real("b-nu").value_or(1.0);
    in.approach = approach;
    in.multiplier = opt.real("multiplier").value_or(1.0);
    return in;
}

/// The published recipes fix p = 3 and the global basis; anything else goes
/// through the generic planner.
bool use_recipe(const sdecv::RegisteredModel* entry, const Options& opt) {
    return entry && entry->paper_plan && !piecewise(opt) && opt.count("p").value_or(3) == 3 && !opt.has("nu") &&
           !opt.has("multiplier");
}

sdecv::Plan make_plan(const sdecv::RegisteredModel* entry, const Options& opt, double eps, int d, int m,
                      sdecv::Approach approach) {
    if (approach == sdecv::Approach::Mlmc) throw ConfigError("the mlmc approach is adaptive and has no plan");
    sdecv::Plan plan =
        use_recipe(entry, opt) ? entry->paper_plan(eps, approach) : sdecv::plan(plan_inputs(opt, eps, d, m, approach));
    if (!piecewise(opt)) {
        plan.Q.reset();
        plan.R.reset();
    }
    return plan;
}

sdecv::PipelineConfig pipeline_config(const sdecv::RegisteredModel& entry, const sdecv::SdeModel& model,
                                      const Options& opt, sdecv::Approach approach, std::optional<double> eps) {
    sdecv::PipelineConfig config;
    config.approach = approach;
    const int p = static_cast<int>(opt.count("p").value_or(3));
    if (approach == sdecv::Approach::Mlmc) {
        if (!eps) throw ConfigError("the mlmc approach needs --eps");
        config.plan.approach = approach;
        config.plan.epsilon = *eps;
        config.mlmc.epsilon = *eps;
        config.mlmc.refinement = sdecv::kPaperMlmcRefinement;
        config.mlmc.initial_paths = opt.positive("N0", entry.mlmc_initial_paths);
        return config;
    }
    if (eps) {
        config.plan = make_plan(&entry, opt, *eps, model.d, model.m, approach);
    } else {
        if (!opt.has("J") || !opt.has("N0")) throw ConfigError("run needs --eps or explicit --J and --N0");
        config.plan.approach = approach;
        config.plan.p = p;
    }
    if (opt.has("J")) config.plan.J = opt.positive("J", 1);
    if (opt.has("N0")) config.plan.N0 = opt.positive("N0", 1);
    if (opt.has("N")) config.plan.N = opt.positive("N", 1);
    const bool cv = approach == sdecv::Approach::Integral || approach == sdecv::Approach::Series;
    if (cv && config.plan.N == 0) throw ConfigError("control variate runs need --N or --eps");
    if (piecewise(opt)) {
        if (opt.has("Q")) config.plan.Q = opt.positive("Q", 1);
        if (opt.has("R")) config.plan.R = opt.real("R");
        if (!config.plan.Q || !config.plan.R) throw ConfigError("the piecewise basis needs --Q and --R");
        config.basis = sdecv::piecewise_basis(p, model.d, *config.plan.R, static_cast<int>(*config.plan.Q));
    } else {
        config.basis = sdecv::global_basis(p, model.d, true);
    }
    config.truncation = opt.real("trunc-A");
    return config;
}

/// Appends to --out (header only when the file is new or empty) or writes to `out`.
class CsvSink {
  public:
    CsvSink(const Options& opt, std::ostream& out, const char* header) {
        if (opt.has("out")) {
            const std::string path = opt.values.at("out");
            std::error_code ec;
            const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
            file_.open(path, std::ios::app);
            if (!file_) throw ConfigError("cannot open output file '" + path + "'");
            stream_ = &file_;
            if (fresh) *stream_ << header << '\n';
        } else {
            stream_ = &out;
            *stream_ << header << '\n';
        }
    }
    std::ostream& stream() { return *stream_; }

  private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

int cmd_run(const Options& opt, std::ostream& out, const sdecv::ModelRegistry& registry) {
    const sdecv::RegisteredModel& entry = registry.at(opt.text("model", ""));
    const sdecv::SdeModel model = entry.make();
    const sdecv::Approach approach = approach_of(opt, "smc");
    if (opt.eps.size() > 1) throw ConfigError("run takes a single --eps");
    std::optional<double> eps;
    if (!opt.eps.empty()) eps = opt.eps.front();
    const sdecv::PipelineConfig config = pipeline_config(entry, model, opt, approach, eps);
    sdecv::EstimatorReport report = sdecv::run_pipeline(model, config, opt.seed(), opt.threads());
    if (!eps) report.epsilon.reset();
    if (!std::isfinite(report.estimate)) throw sdecv::DataError("estimate is not finite");
    CsvSink sink(opt, out, sdecv::kRunCsvHeader);
    sdecv::write_run_row(sink.stream(), report);
    return kExitOk;
}

int cmd_study(const Options& opt, std::ostream& out, const sdecv::ModelRegistry& registry) {
    const sdecv::RegisteredModel& entry = registry.at(opt.text("model", ""));
    if (!entry.reference) throw ConfigError("model '" + entry.key + "' has no exact reference value; RMSE mode refused");
    const sdecv::SdeModel model = entry.make();
    const sdecv::Approach approach = approach_of(opt, "smc");
    if (opt.eps.empty()) throw ConfigError("study needs at least one --eps");

    sdecv::StudyOptions study;
    study.epsilons = opt.eps;
    study.repetitions = static_cast<int>(opt.positive("reps", 20));
    study.reference = *entry.reference;
    study.master_seed = opt.seed();
    study.threads = opt.threads();
    const sdecv::StudyTable table = sdecv::rmse_study(model, approach, study, [&](double eps) {
        return pipeline_config(entry, model, opt, approach, eps);
    });
    CsvSink sink(opt, out, sdecv::kStudyCsvHeader);
    sdecv::write_study_rows(sink.stream(), table);
    sdecv::write_study_footer(sink.stream(), approach, table);
    return kExitOk;
}

int cmd_plan(const Options& opt, std::ostream& out, const sdecv::ModelRegistry& registry) {
    const sdecv::Approach approach = approach_of(opt, "integral");
    if (opt.eps.empty()) throw ConfigError("plan needs at least one --eps");
    const sdecv::RegisteredModel* entry = nullptr;
    int d = static_cast<int>(opt.positive("d", 1));
    int m = static_cast<int>(opt.positive("m", d));
    if (opt.has("model")) {
        entry = &registry.at(opt.values.at("model"));
        const sdecv::SdeModel model = entry->make();
        d = model.d;
        m = model.m;
    }
    std::vector<sdecv::Plan> plans;
    for (double eps : opt.eps) plans.push_back(make_plan(entry, opt, eps, d, m, approach));
    out << "approach,epsilon,J,N,N0,Q,R,p\n";
    for (const sdecv::Plan& plan : plans) {
        const double eps = plan.epsilon;
        out << sdecv::to_string(plan.approach) << ',' << sdecv::format_number(eps) << ',' << plan.J << ',' << plan.N
            << ',' << plan.N0 << ',' << (plan.Q ? std::to_string(*plan.Q) : "") << ','
            << (plan.R ? sdecv::format_number(*plan.R) : "") << ',' << plan.p << '\n';
    }
    return kExitOk;
}

int cmd_validate(const Options& opt, std::ostream& out, const sdecv::ModelRegistry& registry) {
    const sdecv::RegisteredModel& entry = registry.at(opt.text("model", ""));
    const std::vector<sdecv::CheckResult> results = sdecv::validate_model(entry.make(), opt.seed());
    bool all = true;
    for (const sdecv::CheckResult& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ' ' << r.detail << '\n';
        all = all && r.passed;
    }
    out << (all ? "all checks passed" : "some checks failed") << '\n';
    return all ? kExitOk : kExitNumerical;
}

}  // namespace

Settings parse_config(std::istream& is) {
    Settings settings;
    std::string line;
    int number = 0;
    while (std::getline(is, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known_key(key)) throw ConfigError("config line " + std::to_string(number) + ": unknown key '" + key + "'");
        if (value.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty value for '" + key + "'");
        settings[key] = value;
    }
    return settings;
}

Settings read_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file '" + path + "'");
    return parse_config(is);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const sdecv::ModelRegistry& registry) {
    CLI::App app{"Regression-based control variates for Euler Monte Carlo"};
    app.require_subcommand(1);
    struct Command {
        const char* name;
        const char* help;
        int (*run)(const Options&, std::ostream&, const sdecv::ModelRegistry&);
    };
    const Command commands[] = {
        {"run", "train (if needed) and estimate once, append one CSV row", cmd_run},
        {"study", "repeated runs per epsilon, RMSE table and time-vs-RMSE slope", cmd_study},
        {"plan", "print the planned J, N, N0, Q, R for each epsilon", cmd_plan},
        {"validate", "run the model invariant suite", cmd_validate},
    };
    std::vector<CommandLine> lines(std::size(commands));
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        subs.push_back(app.add_subcommand(commands[i].name, commands[i].help));
        add_flags(subs.back(), lines[i]);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i]->parsed()) return commands[i].run(merge(lines[i]), out, registry);
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const sdecv::PlanError& e) {
        err << "error: plan rejected: " << e.what() << '\n';
        return kExitConfig;
    } catch (const sdecv::PreconditionError& e) {
        err << "error: precondition: " << e.what() << '\n';
        return kExitPrecondition;
    } catch (const sdecv::ContractViolation& e) {
        err << "error: precondition: " << e.what() << '\n';
        return kExitPrecondition;
    } catch (const sdecv::UnsupportedOperation& e) {
        err << "error: unsupported: " << e.what() << '\n';
        return kExitPrecondition;
    } catch (const std::exception& e) {
        err << "error: numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace cvsde
