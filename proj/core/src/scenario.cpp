#include "idashaper/scenario.hpp"

#include <cctype>
#include <set>
#include <cmath>
#include <fstream>
#include <sstream>

#include "idashaper/errors.hpp"

namespace idashaper {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

struct Value {
    enum class Kind { kNumber, kString, kBool, kArray } kind;
    double number = 0.0;
    std::string str;
    bool boolean = false;
    std::vector<double> array;
};

Value parse_value(const std::string& raw, int line_no) {
    const std::string v = trim(raw);
    if (v.empty()) throw SchemaError("line " + std::to_string(line_no) + ": empty value");
    Value out{};
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') {
            throw SchemaError("line " + std::to_string(line_no) + ": unterminated string");
        }
        out.kind = Value::Kind::kString;
        out.str = v.substr(1, v.size() - 2);
        return out;
    }
    if (v == "true" || v == "false") {
        out.kind = Value::Kind::kBool;
        out.boolean = v == "true";
        return out;
    }
    if (v.front() == '[') {
        if (v.back() != ']') {
            throw SchemaError("line " + std::to_string(line_no) + ": unterminated array");
        }
        out.kind = Value::Kind::kArray;
        std::string inner = v.substr(1, v.size() - 2);
        std::stringstream ss(inner);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string t = trim(item);
            if (t.empty()) {
                throw SchemaError("line " + std::to_string(line_no) + ": empty array item");
            }
            try {
                out.array.push_back(parse_double(t));
            } catch (const Error&) {
                throw SchemaError("line " + std::to_string(line_no) +
                                  ": bad array number '" + t + "'");
            }
        }
        return out;
    }
    out.kind = Value::Kind::kNumber;
    try {
        out.number = parse_double(v);
    } catch (const Error&) {
        throw SchemaError("line " + std::to_string(line_no) + ": bad value '" + v + "'");
    }
    return out;
}

VectorXd to_vector(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::kArray) {
        throw SchemaError("key '" + key + "' must be an array");
    }
    VectorXd out(static_cast<int>(v.array.size()));
    for (int i = 0; i < out.size(); ++i) out(i) = v.array[i];
    return out;
}

double to_number(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::kNumber) {
        throw SchemaError("key '" + key + "' must be a number");
    }
    return v.number;
}

std::string to_string_value(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::kString) {
        throw SchemaError("key '" + key + "' must be a quoted string");
    }
    return v.str;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    std::map<std::string, Value> entries;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    bool saw_any = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string content = trim(strip_comment(line));
        if (content.empty()) continue;
        saw_any = true;
        if (content.front() == '[') {
            if (content.back() != ']') {
                throw SchemaError("line " + std::to_string(line_no) + ": bad section header");
            }
            section = trim(content.substr(1, content.size() - 2));
            if (section.empty()) {
                throw SchemaError("line " + std::to_string(line_no) + ": empty section name");
            }
            continue;
        }
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw SchemaError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(content.substr(0, eq));
        if (key.empty()) {
            throw SchemaError("line " + std::to_string(line_no) + ": empty key");
        }
        const std::string full = section.empty() ? key : section + "." + key;
        if (entries.count(full)) {
            throw SchemaError("duplicate key '" + full + "'");
        }
        entries.emplace(full, parse_value(content.substr(eq + 1), line_no));
    }
    if (!saw_any) throw SchemaError("empty scenario");

    Scenario sc;
    const auto it_schema = entries.find("schema");
    if (it_schema == entries.end()) throw SchemaError("missing required key 'schema'");
    sc.schema = static_cast<int>(to_number(it_schema->second, "schema"));
    if (sc.schema != 1) {
        throw SchemaError("unsupported schema version " + std::to_string(sc.schema));
    }
    entries.erase(it_schema);

    const auto take = [&entries](const std::string& key) -> std::optional<Value> {
        const auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        Value v = it->second;
        entries.erase(it);
        return v;
    };

    if (auto v = take("seed")) sc.seed = static_cast<std::uint64_t>(to_number(*v, "seed"));
    if (auto v = take("system.name")) sc.system_name = to_string_value(*v, "system.name");
    if (sc.system_name.empty()) throw SchemaError("missing required key 'system.name'");

    if (auto v = take("md.a")) sc.md_a = to_vector(*v, "md.a");
    if (auto v = take("md.b")) sc.md_b = to_vector(*v, "md.b");
    if (auto v = take("md.lambda")) sc.lambda = to_number(*v, "md.lambda");
    if (auto v = take("md.a_offset")) sc.a_offset = to_number(*v, "md.a_offset");
    if (auto v = take("md.domain")) {
        const VectorXd d = to_vector(*v, "md.domain");
        if (d.size() != 2 || !(d(0) < d(1))) {
            throw SchemaError("md.domain must be [lo, hi] with lo < hi");
        }
        sc.domain = std::make_pair(d(0), d(1));
    }
    if (auto v = take("md.matrix")) {
        const VectorXd flat = to_vector(*v, "md.matrix");
        const int n = static_cast<int>(std::lround(std::sqrt(double(flat.size()))));
        if (n * n != flat.size()) {
            throw SchemaError("md.matrix must have n*n entries (row-major)");
        }
        MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = flat(i * n + j);
        sc.md_matrix = m;
    }

    if (auto v = take("vd.preset")) sc.vd_preset = to_string_value(*v, "vd.preset");
    if (auto v = take("vd.phi_c")) sc.phi_c = to_number(*v, "vd.phi_c");
    if (auto v = take("vd.beta1")) sc.beta1 = to_number(*v, "vd.beta1");
    if (auto v = take("vd.beta2")) sc.beta2 = to_number(*v, "vd.beta2");

    if (auto v = take("gains.kv")) sc.kv_diag = to_vector(*v, "gains.kv");

    if (auto v = take("sim.q0")) sc.q0 = to_vector(*v, "sim.q0");
    if (auto v = take("sim.p0")) sc.p0 = to_vector(*v, "sim.p0");
    if (auto v = take("sim.T")) sc.t_final = to_number(*v, "sim.T");
    if (auto v = take("sim.dt")) sc.dt = to_number(*v, "sim.dt");

    if (auto v = take("grids.count")) sc.grid_count = static_cast<int>(to_number(*v, "grids.count"));
    if (auto v = take("grids.p_scale")) sc.p_scale = to_number(*v, "grids.p_scale");
    if (auto v = take("grids.q_min")) sc.q_min = to_vector(*v, "grids.q_min");
    if (auto v = take("grids.q_max")) sc.q_max = to_vector(*v, "grids.q_max");

    // Remaining system.* keys are per-case parameter overrides.
    static const std::set<std::string> known_params = {
        "c1", "c2", "c3", "c4", "c5", "g",                        // pendubot
        "eps", "kappa", "kappa_prime", "vd_w1", "vd_w2",          // vtol
        "mring", "m", "l3", "a1", "a2", "b1", "b2",               // crane
    };
    for (auto it = entries.begin(); it != entries.end();) {
        if (it->first.rfind("system.", 0) == 0) {
            const std::string param = it->first.substr(7);
            if (!known_params.count(param)) {
                throw SchemaError("unknown system parameter '" + param + "'");
            }
            sc.system_params[param] = to_number(it->second, it->first);
            it = entries.erase(it);
        } else {
            ++it;
        }
    }
    if (!entries.empty()) {
        throw SchemaError("unknown key '" + entries.begin()->first + "'");
    }
    if (sc.grid_count < 1) throw SchemaError("grids.count must be >= 1");
    if (!(sc.dt > 0.0)) throw SchemaError("sim.dt must be positive");
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

}  // namespace idashaper
