#include "rankforge/forms_json.hpp"

#include <fstream>
#include <sstream>

#include "rankforge/errors.hpp"

namespace rankforge {

namespace {

nlohmann::json part_json(CoordSet s, const MultilinearMap& part) {
    return {{"subset", subset_to_json(s)}, {"coeffs", std::vector<Residue>(part.coeffs().begin(), part.coeffs().end())}};
}

template <class T>
T field_as(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key)) throw InputError(std::string("missing field \"") + key + "\"");
    const auto& v = doc.at(key);
    if (!v.is_number_unsigned()) throw InputError(std::string("field \"") + key + "\" must be a non-negative integer");
    return v.get<T>();
}

} // namespace

nlohmann::json subset_to_json(CoordSet s) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < 32; ++i)
        if (contains(s, i)) out.push_back(i + 1);
    return out;
}

CoordSet subset_from_json(const nlohmann::json& doc, std::size_t arity) {
    if (!doc.is_array()) throw InputError("subset must be an array of coordinates");
    CoordSet s = 0;
    std::uint64_t last = 0;
    for (const auto& c : doc) {
        if (!c.is_number_unsigned()) throw InputError("subset entries must be positive integers");
        const auto i = c.get<std::uint64_t>();
        if (i == 0 || i > arity) throw InputError("subset coordinate " + std::to_string(i) + " is out of range");
        if (i <= last) throw InputError("subset must be sorted without repeats");
        last = i;
        s |= CoordSet{1} << (i - 1);
    }
    return s;
}

nlohmann::json map_to_json(const MultiaffineMap& f) {
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& [s, part] : multilinear_parts(f)) parts.push_back(part_json(s, part));
    return {{"p", f.p()}, {"dims", f.shape().dims()}, {"target_dim", f.target_dim()}, {"parts", parts}};
}

nlohmann::json map_to_json(const MultilinearMap& f) {
    nlohmann::json parts = nlohmann::json::array({part_json(f.shape().all(), f)});
    return {{"p", f.p()}, {"dims", f.shape().dims()}, {"target_dim", f.target_dim()}, {"parts", parts}};
}

MultiaffineMap map_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw InputError("map document must be a JSON object");
    const auto p = field_as<std::uint64_t>(doc, "p");
    if (p > PrimeField::kMaxModulus || !is_prime(p)) throw InputError("p must be a prime below 2^20");
    if (!doc.contains("dims") || !doc.at("dims").is_array()) throw InputError("missing array field \"dims\"");
    std::vector<std::uint32_t> dims;
    for (const auto& d : doc.at("dims")) {
        if (!d.is_number_unsigned() || d.get<std::uint64_t>() == 0 || d.get<std::uint64_t>() > 64) {
            throw InputError("dims entries must be integers in [1, 64]");
        }
        dims.push_back(d.get<std::uint32_t>());
    }
    if (dims.empty()) throw InputError("dims must be nonempty");
    std::uint64_t m = 1;
    if (doc.contains("target_dim")) m = field_as<std::uint64_t>(doc, "target_dim");
    if (m == 0 || m > 4096) throw InputError("target_dim must be in [1, 4096]");
    const Shape shape(static_cast<std::uint32_t>(p), dims);
    MultiaffineMap f(shape, static_cast<std::uint32_t>(m));
    if (!doc.contains("parts") || !doc.at("parts").is_array()) throw InputError("missing array field \"parts\"");
    std::vector<bool> seen(std::size_t{1} << shape.arity(), false);
    for (const auto& part : doc.at("parts")) {
        if (!part.is_object() || !part.contains("subset") || !part.contains("coeffs")) {
            throw InputError("each part needs \"subset\" and \"coeffs\"");
        }
        const CoordSet s = subset_from_json(part.at("subset"), shape.arity());
        if (seen[s]) throw InputError("subset listed twice");
        seen[s] = true;
        const auto& coeffs = part.at("coeffs");
        if (!coeffs.is_array()) throw InputError("coeffs must be an array");
        const Shape sub = shape.restrict_to(s);
        const std::uint64_t expected = sub.monomial_count(sub.all()) * m;
        if (coeffs.size() != expected) {
            throw InputError("part expects " + std::to_string(expected) + " coefficients, got " +
                             std::to_string(coeffs.size()));
        }
        std::vector<Residue> c;
        c.reserve(expected);
        for (const auto& v : coeffs) {
            if (!v.is_number_unsigned() || v.get<std::uint64_t>() >= p) {
                throw InputError("coefficients must be integers in [0, p)");
            }
            c.push_back(v.get<Residue>());
        }
        f.set_part(s, MultilinearMap(sub, static_cast<std::uint32_t>(m), std::move(c)));
    }
    return f;
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

MultiaffineMap load_map(const std::string& path) {
    return map_from_json(read_json_file(path));
}

} // namespace rankforge
