#include "qat/serialize.hpp"

#include <json.hpp>

#include <stdexcept>

namespace qat {

namespace {

using nlohmann::json;

json bases_json(const BaseFrequencySet& bases) {
    json arr = json::array();
    for (const auto& [name, value] : bases.entries()) {
        arr.push_back({{"name", name}, {"value", value}});
    }
    return arr;
}

BasesPtr bases_from(const json& arr) {
    std::vector<std::pair<std::string, double>> b;
    for (const auto& e : arr) {
        b.emplace_back(e.at("name").get<std::string>(), e.at("value").get<double>());
    }
    return make_bases(std::move(b));
}

json series_json(const FourierSeries& s) {
    json j;
    j["dim"] = s.dim();
    json modes = json::array();
    for (const auto& [key, e] : s.entries()) {
        std::vector<double> re, im;
        re.reserve(static_cast<std::size_t>(e.coeff.size()));
        im.reserve(static_cast<std::size_t>(e.coeff.size()));
        for (Index r = 0; r < e.coeff.rows(); ++r) {
            for (Index c = 0; c < e.coeff.cols(); ++c) {
                re.push_back(e.coeff(r, c).real());
                im.push_back(e.coeff(r, c).imag());
            }
        }
        modes.push_back({{"freq", key}, {"value", e.value}, {"re", re}, {"im", im}});
    }
    j["modes"] = std::move(modes);
    return j;
}

FourierSeries series_from(const json& j, const BasesPtr& bases) {
    const Index dim = j.at("dim").get<Index>();
    if (dim <= 0) {
        // Absent series (e.g. phi at max order when not computed).
        return FourierSeries();
    }
    FourierSeries s(bases, dim);
    for (const auto& m : j.at("modes")) {
        const auto key = m.at("freq").get<std::vector<int>>();
        const auto re = m.at("re").get<std::vector<double>>();
        const auto im = m.at("im").get<std::vector<double>>();
        if (re.size() != static_cast<std::size_t>(dim * dim) || im.size() != re.size()) {
            throw std::runtime_error("series_from_json: coefficient array has wrong size");
        }
        Matrix c(dim, dim);
        for (Index r = 0; r < dim; ++r) {
            for (Index col = 0; col < dim; ++col) {
                const auto idx = static_cast<std::size_t>(r * dim + col);
                c(r, col) = Complex(re[idx], im[idx]);
            }
        }
        s.add(key, c);
    }
    return s;
}

json stack_json(const std::vector<FourierSeries>& stack) {
    json arr = json::array();
    for (const auto& s : stack) {
        arr.push_back(s.dim() > 0 ? series_json(s) : json{{"dim", 0}, {"modes", json::array()}});
    }
    return arr;
}

std::vector<FourierSeries> stack_from(const json& arr, const BasesPtr& bases) {
    std::vector<FourierSeries> r;
    for (const auto& e : arr) r.push_back(series_from(e, bases));
    return r;
}

}  // namespace

std::string series_to_json(const FourierSeries& series, int indent) {
    json j = series_json(series);
    j["bases"] = bases_json(*series.bases());
    return j.dump(indent);
}

FourierSeries series_from_json(const std::string& text) {
    const json j = json::parse(text);
    return series_from(j, bases_from(j.at("bases")));
}

std::string expansion_to_json(const QatExpansion& ex, int indent) {
    json j;
    j["max_order"] = ex.max_order;
    j["cutoff"] = ex.cutoff;
    j["bases"] = bases_json(*ex.bases());
    j["provenance"] = {{"input_hash", ex.provenance.input_hash},
                       {"cutoff", ex.provenance.cutoff},
                       {"rel_amp_tol", ex.provenance.rel_amp_tol},
                       {"pairing_tol", ex.provenance.pairing_tol},
                       {"bernoulli_convention", ex.provenance.bernoulli_convention},
                       {"carrier_ignored", ex.provenance.carrier_ignored}};
    j["phi"] = stack_json(ex.phi);
    j["h_eff"] = stack_json(ex.h_eff);
    return j.dump(indent);
}

QatExpansion expansion_from_json(const std::string& text) {
    const json j = json::parse(text);
    const BasesPtr bases = bases_from(j.at("bases"));
    QatExpansion ex;
    ex.max_order = j.at("max_order").get<int>();
    ex.cutoff = j.at("cutoff").get<double>();
    const json& p = j.at("provenance");
    ex.provenance.input_hash = p.at("input_hash").get<std::string>();
    ex.provenance.cutoff = p.at("cutoff").get<double>();
    ex.provenance.rel_amp_tol = p.at("rel_amp_tol").get<double>();
    ex.provenance.pairing_tol = p.at("pairing_tol").get<double>();
    ex.provenance.bernoulli_convention = p.at("bernoulli_convention").get<std::string>();
    ex.provenance.carrier_ignored = p.at("carrier_ignored").get<bool>();
    ex.phi = stack_from(j.at("phi"), bases);
    ex.h_eff = stack_from(j.at("h_eff"), bases);
    return ex;
}

}  // namespace qat
