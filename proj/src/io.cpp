#include "jumpctl/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "jumpctl/errors.hpp"

namespace jumpctl {

using nlohmann::json;

namespace {

void line_column(std::string_view text, std::size_t byte, std::size_t& line, std::size_t& col) {
    line = 1;
    col = 1;
    const std::size_t end = std::min(byte, text.size());
    for (std::size_t i = 0; i + 1 < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::size_t line = 0, col = 0;
        line_column(text, e.byte, line, col);
        std::ostringstream os;
        os << "malformed JSON at line " << line << ", column " << col << ": " << e.what();
        throw ParseError(os.str(), line, col);
    }
}

const json& require(const json& doc, const char* key) {
    if (!doc.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
    return doc.at(key);
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError("expected a number at " + where);
    return v.get<double>();
}

std::vector<double> vector1(const json& v, std::size_t n, const std::string& where) {
    if (!v.is_array() || v.size() != n)
        throw ParseError(where + " must be an array of length " + std::to_string(n));
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(number(v[i], where));
    return out;
}

std::vector<std::string> labels(const json& v, const char* key) {
    if (!v.is_array() || v.empty()) throw ParseError(std::string(key) + " must be a non-empty array");
    std::vector<std::string> out;
    for (const auto& item : v) {
        if (item.is_string())
            out.push_back(item.get<std::string>());
        else if (item.is_number())
            out.push_back(item.dump());
        else
            throw ParseError(std::string(key) + " entries must be strings or numbers");
    }
    return out;
}

std::size_t depth(const json& v) {
    std::size_t d = 0;
    const json* cur = &v;
    while (cur->is_array() && !cur->empty()) {
        ++d;
        cur = &(*cur)[0];
    }
    return d;
}

}  // namespace

Problem parse_problem(std::string_view text) {
    const json doc = parse_json(text);
    if (!doc.is_object()) throw ParseError("model document must be a JSON object");

    Problem p;
    p.states = labels(require(doc, "states"), "states");
    p.actions = labels(require(doc, "actions"), "actions");
    const std::size_t ns = p.num_states();
    const std::size_t na = p.num_actions();

    const json& rates = require(doc, "rates");
    if (!rates.is_array() || rates.size() != ns) throw ParseError("rates must be [|E|][|A|][|E|]");
    p.rates.reserve(ns * na * ns);
    for (std::size_t x = 0; x < ns; ++x) {
        if (!rates[x].is_array() || rates[x].size() != na)
            throw ParseError("rates must be [|E|][|A|][|E|]");
        for (std::size_t a = 0; a < na; ++a) {
            auto row = vector1(rates[x][a], ns, "rates[" + std::to_string(x) + "][" + std::to_string(a) + "]");
            p.rates.insert(p.rates.end(), row.begin(), row.end());
        }
    }

    p.lambda0 = vector1(require(doc, "lambda0"), na, "lambda0");
    p.terminal_cost = vector1(require(doc, "g"), ns, "g");
    p.horizon = number(require(doc, "T"), "T");

    const json& f = require(doc, "f");
    if (f.is_number()) {
        p.running_cost.assign(ns * na, f.get<double>());
    } else {
        const std::size_t d = depth(f);
        if (d == 2) {
            if (f.size() != ns) throw ParseError("f must be [|E|][|A|]");
            for (std::size_t x = 0; x < ns; ++x) {
                auto row = vector1(f[x], na, "f[" + std::to_string(x) + "]");
                p.running_cost.insert(p.running_cost.end(), row.begin(), row.end());
            }
        } else if (d == 3) {
            if (f.size() < 2) throw ParseError("time-dependent f needs at least two layers");
            for (std::size_t k = 0; k < f.size(); ++k) {
                if (!f[k].is_array() || f[k].size() != ns) throw ParseError("f must be [k][|E|][|A|]");
                for (std::size_t x = 0; x < ns; ++x) {
                    auto row = vector1(f[k][x], na, "f[" + std::to_string(k) + "][" + std::to_string(x) + "]");
                    p.running_cost.insert(p.running_cost.end(), row.begin(), row.end());
                }
            }
        } else {
            throw ParseError("f must be a number, a [|E|][|A|] table, or a [k][|E|][|A|] table");
        }
    }
    return p;
}

Problem load_problem(const std::filesystem::path& path) { return parse_problem(read_file(path)); }

std::string problem_to_json(const Problem& p) {
    const std::size_t ns = p.num_states();
    const std::size_t na = p.num_actions();
    json doc;
    doc["states"] = p.states;
    doc["actions"] = p.actions;
    json rates = json::array();
    for (std::size_t x = 0; x < ns; ++x) {
        json per_action = json::array();
        for (std::size_t a = 0; a < na; ++a) {
            auto row = p.rate_row(x, a);
            per_action.push_back(std::vector<double>(row.begin(), row.end()));
        }
        rates.push_back(per_action);
    }
    doc["rates"] = rates;
    doc["lambda0"] = p.lambda0;
    json f = json::array();
    for (std::size_t k = 0; k < p.cost_layers(); ++k) {
        json layer = json::array();
        for (std::size_t x = 0; x < ns; ++x) {
            auto first = p.running_cost.begin() + static_cast<std::ptrdiff_t>((k * ns + x) * na);
            layer.push_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(na)));
        }
        f.push_back(layer);
    }
    doc["f"] = p.cost_layers() == 1 ? f[0] : f;
    doc["g"] = p.terminal_cost;
    doc["T"] = p.horizon;
    return doc.dump(2);
}

SolverConfig parse_config(std::string_view text, SolverConfig base) {
    const json doc = parse_json(text);
    if (!doc.is_object()) throw ParseError("config document must be a JSON object");
    try {
        if (doc.contains("n_steps")) base.n_steps = doc["n_steps"].get<std::size_t>();
        if (doc.contains("picard_tol")) base.picard_tol = doc["picard_tol"].get<double>();
        if (doc.contains("tol")) base.picard_tol = doc["tol"].get<double>();
        if (doc.contains("picard_max_iter")) base.picard_max_iter = doc["picard_max_iter"].get<std::size_t>();
        if (doc.contains("paths")) base.mc_paths = doc["paths"].get<std::size_t>();
        if (doc.contains("seed")) base.master_seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("levels")) base.penalization_levels = doc["levels"].get<std::vector<int>>();
        if (doc.contains("workers")) base.workers = doc["workers"].get<std::size_t>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad config value: ") + e.what());
    }
    return base;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace jumpctl
