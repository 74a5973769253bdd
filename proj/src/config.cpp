#include "fracwave/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace fracwave {

namespace {

const std::map<std::string, Command, std::less<>>& command_table()
{
    static const std::map<std::string, Command, std::less<>> table{
        {"solve", Command::solve},
        {"temporal-study", Command::temporal_study},
        {"spatial-study", Command::spatial_study},
        {"caputo-check", Command::caputo_check},
        {"bound-report", Command::bound_report},
    };
    return table;
}

double to_double(const std::string& key, std::string_view text)
{
    const std::string s(text);
    char* end = nullptr;
    const double value = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(value)) {
        throw ConfigError(key, "expected a number, got '" + s + "'");
    }
    return value;
}

std::size_t to_count(const std::string& key, std::string_view text)
{
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw ConfigError(key, "expected a non-negative integer, got '" + std::string(text) + "'");
    }
    return value;
}

std::vector<std::string_view> split_list(std::string_view text)
{
    std::vector<std::string_view> items;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::size_t stop = comma == std::string_view::npos ? text.size() : comma;
        items.push_back(text.substr(start, stop - start));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return items;
}

using Pairs = std::vector<std::pair<std::string, std::string>>;

void tokenize(std::string_view text, Pairs& pairs)
{
    std::istringstream lines{std::string(text)};
    std::string line;
    while (std::getline(lines, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream words(line);
        std::string token;
        while (words >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw ConfigError("", "expected key=value, got '" + token + "'");
            }
            pairs.emplace_back(token.substr(0, eq), token.substr(eq + 1));
        }
    }
}

void validate(RunConfig& cfg, bool has_command)
{
    for (const double a : cfg.alphas) {
        if (!(a > 1.0 && a < 2.0)) {
            std::ostringstream os;
            os << "value " << a << " outside (1, 2)";
            throw ConfigError("alpha", os.str());
        }
    }
    for (const std::size_t n : cfg.steps) {
        if (n < 2) {
            throw ConfigError("N", "every N must be >= 2");
        }
    }
    for (const std::size_t m : cfg.cells) {
        if (m < 2) {
            throw ConfigError("Ms", "every Ms must be >= 2");
        }
    }
    if (cfg.grading && !(*cfg.grading >= 1.0)) {
        throw ConfigError("r", "grading exponent must be >= 1");
    }
    if (!(cfg.tolerance > 0.0 && cfg.tolerance < 1.0)) {
        throw ConfigError("tol", "tolerance must lie in (0, 1)");
    }
    if (cfg.threads < 1) {
        throw ConfigError("threads", "need at least one thread");
    }
    if (cfg.example != "ex1" && cfg.example != "ex2") {
        throw ConfigError("example", "expected ex1 or ex2, got '" + cfg.example + "'");
    }
    if (!has_command) {
        throw ConfigError("", "command required");
    }
    const int dimension = cfg.example == "ex1" ? 1 : 2;
    try {
        quadrature_rule(dimension, cfg.quad_points);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("quadrature", e.what());
    }
    if (cfg.error_quad_points) {
        try {
            quadrature_rule(dimension, *cfg.error_quad_points);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("error_quadrature", e.what());
        }
    }

    const auto require_alpha = [&] {
        if (cfg.alphas.empty()) {
            throw ConfigError("alpha", "required for " + std::string(command_name(cfg.command)));
        }
    };
    const auto require_steps = [&] {
        if (cfg.steps.empty()) {
            throw ConfigError("N", "required for " + std::string(command_name(cfg.command)));
        }
    };
    switch (cfg.command) {
    case Command::solve:
        require_alpha();
        require_steps();
        if (cfg.alphas.size() != 1 || cfg.steps.size() != 1) {
            throw ConfigError("", "solve takes exactly one alpha and one N");
        }
        if (cfg.cells.size() > 1) {
            throw ConfigError("Ms", "solve takes at most one Ms");
        }
        break;
    case Command::temporal_study:
    case Command::bound_report:
        require_alpha();
        require_steps();
        break;
    case Command::spatial_study:
        require_alpha();
        if (cfg.cells.empty()) {
            throw ConfigError("Ms", "required for spatial-study");
        }
        if (cfg.max_steps < 2) {
            throw ConfigError("n_cap", "must be >= 2");
        }
        break;
    case Command::caputo_check:
        require_steps();
        if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) {
            throw ConfigError("beta", "must lie in (0, 1)");
        }
        if (!(cfg.sigma > 0.0) || cfg.sigma < cfg.beta) {
            throw ConfigError("sigma", "must satisfy sigma > 0 and sigma >= beta");
        }
        break;
    }
    if (cfg.output.empty()) {
        cfg.output = std::string(command_name(cfg.command)) + ".csv";
    }
}

RunConfig from_pairs(const Pairs& pairs)
{
    RunConfig cfg;
    bool has_command = false;
    for (const auto& [key, value] : pairs) {
        if (key == "command") {
            const auto it = command_table().find(value);
            if (it == command_table().end()) {
                throw ConfigError(key, "unknown command '" + value + "'");
            }
            cfg.command = it->second;
            has_command = true;
        } else if (key == "example") {
            cfg.example = value;
        } else if (key == "alpha") {
            cfg.alphas.clear();
            for (const auto item : split_list(value)) {
                cfg.alphas.push_back(to_double(key, item));
            }
        } else if (key == "N") {
            cfg.steps.clear();
            for (const auto item : split_list(value)) {
                cfg.steps.push_back(to_count(key, item));
            }
        } else if (key == "Ms") {
            cfg.cells.clear();
            for (const auto item : split_list(value)) {
                cfg.cells.push_back(to_count(key, item));
            }
        } else if (key == "r") {
            cfg.grading = to_double(key, value);
        } else if (key == "quadrature") {
            cfg.quad_points = static_cast<int>(to_count(key, value));
        } else if (key == "error_quadrature") {
            cfg.error_quad_points = static_cast<int>(to_count(key, value));
        } else if (key == "tol") {
            cfg.tolerance = to_double(key, value);
        } else if (key == "output") {
            cfg.output = value;
        } else if (key == "threads") {
            cfg.threads = static_cast<unsigned>(to_count(key, value));
        } else if (key == "beta") {
            cfg.beta = to_double(key, value);
        } else if (key == "sigma") {
            cfg.sigma = to_double(key, value);
        } else if (key == "n_cap") {
            cfg.max_steps = to_count(key, value);
        } else if (key == "timing") {
            if (value != "on" && value != "off") {
                throw ConfigError(key, "expected on or off, got '" + value + "'");
            }
            cfg.timing = value == "on";
        } else {
            throw ConfigError(key, "unknown key");
        }
    }
    validate(cfg, has_command);
    return cfg;
}

} // namespace

std::string_view command_name(Command c)
{
    for (const auto& [name, cmd] : command_table()) {
        if (cmd == c) {
            return name;
        }
    }
    return "unknown";
}

StudyOptions RunConfig::study_options() const
{
    StudyOptions o;
    o.grading = grading;
    o.quad_points = quad_points;
    o.error_quad_points = error_quad_points;
    o.tolerance = tolerance;
    o.max_steps = max_steps;
    o.threads = threads;
    o.timing = timing;
    return o;
}

RunConfig parse_config(std::string_view text)
{
    Pairs pairs;
    tokenize(text, pairs);
    return from_pairs(pairs);
}

RunConfig parse_args(int argc, const char* const* argv)
{
    Pairs pairs;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg.rfind("--", 0) == 0) {
            arg.erase(0, 2);
        }
        std::string key;
        std::string value;
        const auto eq = arg.find('=');
        if (eq != std::string::npos) {
            key = arg.substr(0, eq);
            value = arg.substr(eq + 1);
        } else {
            if (i + 1 >= argc) {
                throw ConfigError(arg, "missing value");
            }
            key = arg;
            value = argv[++i];
        }
        if (key == "config") {
            std::ifstream in(value);
            if (!in) {
                throw ConfigError(key, "cannot open '" + value + "'");
            }
            std::stringstream buffer;
            buffer << in.rdbuf();
            tokenize(buffer.str(), pairs);
        } else {
            pairs.emplace_back(key, value);
        }
    }
    if (const char* env = std::getenv("FRACWAVE_THREADS"); env != nullptr && *env != '\0') {
        pairs.emplace_back("threads", env);
    }
    return from_pairs(pairs);
}

} // namespace fracwave
