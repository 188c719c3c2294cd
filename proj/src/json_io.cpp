#include "lrec/json_io.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace lrec {

using nlohmann::json;

std::string structure_to_json(const Structure& s) {
    StructureData d = s.to_data();
    json j;
    j["universe"] = d.universe;
    json rels = json::object();
    for (const auto& [name, rel] : d.relations) {
        json r;
        r["arity"] = rel.arity;
        r["tuples"] = rel.tuples;
        rels[name] = r;
    }
    j["relations"] = rels;
    json consts = json::object();
    for (const auto& [name, target] : d.constants) consts[name] = target;
    j["constants"] = consts;
    return j.dump(2) + "\n";
}

Structure structure_from_json(const std::string& text) {
    json j = json::parse(text);
    StructureData d;
    for (const auto& e : j.at("universe")) d.universe.push_back(e.get<std::string>());
    if (j.contains("relations")) {
        for (const auto& [name, r] : j.at("relations").items()) {
            StructureData::Rel rel;
            rel.arity = r.at("arity").get<int>();
            for (const auto& t : r.at("tuples")) {
                std::vector<std::string> tuple;
                for (const auto& e : t) tuple.push_back(e.get<std::string>());
                rel.tuples.push_back(std::move(tuple));
            }
            d.relations[name] = std::move(rel);
        }
    }
    if (j.contains("constants")) {
        for (const auto& [name, target] : j.at("constants").items())
            d.constants[name] = target.get<std::string>();
    }
    return Structure::from_data(d);
}

std::string semigraph_to_json(const LabelledSemiGraph& g) {
    json j;
    std::vector<std::string> names = g.names;
    if (names.empty()) {
        for (std::size_t i = 0; i < g.n; ++i) names.push_back("v" + std::to_string(i));
    }
    j["universe"] = names;
    json edges = json::array(), sim = json::array(), labels = json::array();
    for (const auto& [a, b] : g.edges) edges.push_back({names[a], names[b]});
    for (const auto& [a, b] : g.sim) sim.push_back({names[a], names[b]});
    for (std::size_t v = 0; v < g.labels.size(); ++v)
        for (const BigInt& x : g.labels[v]) labels.push_back({names[v], x.str()});
    j["relations"] = {{"E", {{"arity", 2}, {"tuples", edges}}},
                      {"SIM", {{"arity", 2}, {"tuples", sim}}},
                      {"C", {{"arity", 2}, {"tuples", labels}}}};
    return j.dump(2) + "\n";
}

LabelledSemiGraph semigraph_from_json(const std::string& text) {
    json j = json::parse(text);
    LabelledSemiGraph g;
    std::map<std::string, std::uint32_t> ids;
    for (const auto& e : j.at("universe")) {
        std::string name = e.get<std::string>();
        if (ids.count(name)) throw std::invalid_argument("duplicate vertex '" + name + "'");
        ids[name] = static_cast<std::uint32_t>(g.names.size());
        g.names.push_back(name);
    }
    g.n = g.names.size();
    g.labels.resize(g.n);

    auto vertex = [&](const json& e) {
        auto it = ids.find(e.get<std::string>());
        if (it == ids.end())
            throw std::invalid_argument("unknown vertex '" + e.get<std::string>() + "'");
        return it->second;
    };

    if (!j.contains("relations")) return g;
    const auto& rels = j.at("relations");
    if (rels.contains("E"))
        for (const auto& t : rels.at("E").at("tuples")) g.edges.insert({vertex(t[0]), vertex(t[1])});
    if (rels.contains("SIM"))
        for (const auto& t : rels.at("SIM").at("tuples")) g.sim.insert({vertex(t[0]), vertex(t[1])});
    if (rels.contains("C")) {
        for (const auto& t : rels.at("C").at("tuples")) {
            std::uint32_t v = vertex(t[0]);
            BigInt value = t[1].is_string() ? BigInt(t[1].get<std::string>())
                                            : BigInt(t[1].get<std::int64_t>());
            if (value < 0) throw std::invalid_argument("negative label");
            g.labels[v].insert(value);
        }
    }
    return g;
}

std::string treegroup_to_json(const TreeGroupSpec& spec) {
    json j{{"h", spec.h}, {"p", spec.p}, {"sigma", spec.sigma}, {"t", spec.t}};
    return j.dump() + "\n";
}

TreeGroupSpec treegroup_from_json(const std::string& text) {
    json j = json::parse(text);
    TreeGroupSpec spec;
    spec.h = j.at("h").get<int>();
    spec.p = j.at("p").get<int>();
    spec.t = j.at("t").get<int>();
    for (const auto& v : j.at("sigma")) spec.sigma.push_back(v.get<int>());
    auto errors = spec.validate();
    if (!errors.empty()) {
        std::string msg = "invalid tree-group spec:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::invalid_argument(msg);
    }
    return spec;
}

std::string transcript_to_text(const Transcript& t) {
    std::string out;
    for (const auto& line : t.lines) {
        out += line;
        out += '\n';
    }
    return out;
}

Transcript transcript_from_text(const std::string& text) {
    Transcript t;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty()) t.lines.push_back(line);
    }
    return t;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

}  // namespace lrec
