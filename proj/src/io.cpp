#include "tracial/io.hpp"

#include <algorithm>

namespace tracial {

namespace {

Json matrix_to_json(const Eigen::MatrixXd& M) {
    Json rows = Json::array();
    for (int i = 0; i < M.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw InputError(what + " must be a non-empty array of rows");
    const int n = static_cast<int>(j.size());
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i) {
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != n) {
            throw InputError(what + " must be square");
        }
        for (int k = 0; k < n; ++k) {
            if (!j[i][k].is_number()) throw InputError(what + " has a non-numeric entry");
            M(i, k) = j[i][k].get<double>();
        }
    }
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff())) {
        throw InputError(what + " is not symmetric");
    }
    return 0.5 * (M + M.transpose());
}

}  // namespace

MomentSequence sequence_from_json(const Json& j, int degree) {
    if (!j.is_object() || !j.contains("beta") || !j["beta"].is_object()) {
        throw InputError("expected an object with a \"beta\" object of moments");
    }
    MomentSequence seq(degree);
    for (const auto& [key, value] : j["beta"].items()) {
        if (!value.is_number()) throw InputError("moment " + key + " is not a number");
        Word w;
        try {
            w = word_from_key(key);
            seq.set(w, value.get<double>());
        } catch (const std::invalid_argument& e) {
            throw InputError(e.what());
        }
    }
    for (const auto& w : canonical_words(degree)) {
        if (!seq.has(w)) throw InputError("missing moment for word " + word_key(w));
    }
    return seq;
}

Json sequence_to_json(const MomentSequence& seq) {
    Json beta = Json::object();
    for (const auto& w : canonical_words(seq.degree())) {
        if (seq.has(w)) beta[word_key(w)] = seq.get(w);
    }
    Json j;
    j["beta"] = std::move(beta);
    return j;
}

Measure measure_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("atoms") || !j["atoms"].is_array()) {
        throw InputError("expected an object with an \"atoms\" array");
    }
    Measure mu;
    for (const auto& a : j["atoms"]) {
        if (!a.is_object() || !a.contains("A") || !a.contains("B") || !a.contains("density")) {
            throw InputError("each atom needs \"A\", \"B\" and \"density\"");
        }
        Atom atom;
        atom.A = matrix_from_json(a["A"], "atom matrix A");
        atom.B = matrix_from_json(a["B"], "atom matrix B");
        if (atom.A.rows() != atom.B.rows()) throw InputError("atom matrices A and B differ in size");
        if (!a["density"].is_number()) throw InputError("atom density is not a number");
        atom.density = a["density"].get<double>();
        if (!(atom.density > 0.0)) throw InputError("atom density must be positive");
        mu.atoms.push_back(std::move(atom));
    }
    return mu;
}

Json measure_to_json(const Measure& mu) {
    Json atoms = Json::array();
    for (const auto& a : mu.atoms) {
        Json o;
        o["A"] = matrix_to_json(a.A);
        o["B"] = matrix_to_json(a.B);
        o["density"] = a.density;
        atoms.push_back(std::move(o));
    }
    Json j;
    j["atoms"] = std::move(atoms);
    return j;
}

Json chain_to_json(const TransformChain& chain) {
    Json maps = Json::array();
    for (const auto& m : chain.maps) {
        Json o;
        o["name"] = m.name;
        o["a"] = m.a;
        o["b"] = m.b;
        o["c"] = m.c;
        o["d"] = m.d;
        o["e"] = m.e;
        o["f"] = m.f;
        maps.push_back(std::move(o));
    }
    Json j;
    j["target_case"] = chain.target_case;
    j["maps"] = std::move(maps);
    return j;
}

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace tracial
