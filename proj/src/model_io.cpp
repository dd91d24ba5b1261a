#include "fdid/model_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "fdid/error.hpp"

namespace fdid {

using nlohmann::json;

std::string exact_string(double v) { return fmt::format("{:.17g}", v); }

double parse_exact(const std::string& s) {
    if (s.empty()) throw Error(ErrorKind::Parse, "empty number");
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw Error(ErrorKind::Parse, fmt::format("invalid number '{}'", s));
    return v;
}

namespace {

json reals(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(exact_string(x));
    return a;
}

std::vector<double> reals_from(const json& a) {
    std::vector<double> v;
    for (const auto& e : a) v.push_back(parse_exact(e.get<std::string>()));
    return v;
}

double real(const json& j, const char* key) { return parse_exact(j.at(key).get<std::string>()); }

json tf_json(const std::optional<RationalTF>& tf) {
    if (!tf) return nullptr;
    return {{"axis", to_string(tf->axis)}, {"num", reals(tf->num)}, {"den", reals(tf->den)}};
}

Axis axis_from(const std::string& s) {
    if (s == to_string(Axis::Discrete)) return Axis::Discrete;
    if (s == to_string(Axis::Continuous)) return Axis::Continuous;
    throw Error(ErrorKind::Parse, fmt::format("unknown axis '{}'", s));
}

std::optional<RationalTF> tf_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return RationalTF::make(axis_from(j.at("axis").get<std::string>()), reals_from(j.at("num")), reals_from(j.at("den")));
}

const char* kind_name(BasisDescriptor::Kind k) {
    switch (k) {
        case BasisDescriptor::Kind::Input: return "input";
        case BasisDescriptor::Kind::FreqReal: return "freq_real";
        case BasisDescriptor::Kind::FreqImag: return "freq_imag";
    }
    return "";
}

BasisDescriptor descriptor_from(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    const double at = real(j, "at");
    if (kind == "input") return BasisDescriptor::input(at);
    if (kind == "freq_real") return BasisDescriptor::freq_real(at);
    if (kind == "freq_imag") return BasisDescriptor::freq_imag(at);
    throw Error(ErrorKind::Parse, fmt::format("unknown descriptor kind '{}'", kind));
}

json dataset_json(const Dataset& d) {
    json j = {{"axis", to_string(d.axis)}, {"sample_times", reals(d.sample_times)}, {"outputs", reals(d.outputs)}};
    if (d.axis == Axis::Discrete)
        j["input"] = {{"samples", reals(d.discrete_input().samples)}};
    else
        j["input"] = {{"breakpoints", reals(d.pwc_input().breakpoints)}, {"values", reals(d.pwc_input().values)}};
    return j;
}

Dataset dataset_from(const json& j) {
    Dataset d;
    d.axis = axis_from(j.at("axis").get<std::string>());
    d.sample_times = reals_from(j.at("sample_times"));
    d.outputs = reals_from(j.at("outputs"));
    const json& in = j.at("input");
    if (d.axis == Axis::Discrete)
        d.input = DiscreteInput{reals_from(in.at("samples"))};
    else
        d.input = PiecewiseConstantInput{reals_from(in.at("breakpoints")), reals_from(in.at("values"))};
    d.validate();
    return d;
}

}  // namespace

std::string model_to_json(const Model& m, int indent) {
    if (!m.ctx) throw Error(ErrorKind::Domain, "model has no evaluation context");
    json j;
    j["format"] = "fdid-model";
    j["version"] = 1;
    j["kernel"] = {{"axis", to_string(m.spec.axis)},
                   {"alpha", exact_string(m.spec.alpha)},
                   {"beta", exact_string(m.spec.beta)},
                   {"gamma", exact_string(m.spec.gamma)}};
    j["lambda"] = exact_string(m.lambda);
    j["eps"] = exact_string(m.eps);
    j["rho"] = exact_string(m.rho);
    j["gain"] = exact_string(m.gain);
    j["feedthrough"] = exact_string(m.feedthrough);
    j["constrained"] = m.constrained;
    j["certified"] = m.certified;
    j["mesh"] = exact_string(m.mesh);
    j["mesh_bound"] = exact_string(m.mesh_bound);
    j["omega_max"] = exact_string(m.omega_max);
    j["active"] = reals(m.active);
    json desc = json::array();
    for (const auto& d : m.descriptors) desc.push_back({{"kind", kind_name(d.kind)}, {"at", exact_string(d.value)}});
    j["descriptors"] = desc;
    j["coefficients"] = reals(std::vector<double>(m.x.data(), m.x.data() + m.x.size()));
    j["post_filter"] = tf_json(m.post_filter);
    j["reference"] = tf_json(m.reference);
    j["report"] = {{"objective", exact_string(m.report.objective)},
                   {"rkhs_norm_sq", exact_string(m.report.rkhs_norm_sq)},
                   {"duality_gap", exact_string(m.report.duality_gap)},
                   {"stages", m.report.stages},
                   {"newton_iterations", m.report.newton_iterations},
                   {"iterations", m.iterations()}};
    j["warnings"] = m.warnings;
    j["context"] = {{"tol", exact_string(m.ctx->tol())},
                    {"discrete_sum", m.ctx->mode() == GramContext::DiscreteSum::Closed ? "closed" : "truncated"}};
    j["data"] = dataset_json(m.ctx->dataset());
    return j.dump(indent);
}

Model model_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != "fdid-model") throw Error(ErrorKind::Parse, "not a model document");
        Model m;
        const json& k = j.at("kernel");
        const Axis axis = axis_from(k.at("axis").get<std::string>());
        m.spec = axis == Axis::Discrete ? KernelSpec::discrete(real(k, "alpha"), real(k, "gamma"))
                                        : KernelSpec::continuous(real(k, "beta"), real(k, "gamma"));
        m.lambda = real(j, "lambda");
        m.eps = real(j, "eps");
        m.rho = real(j, "rho");
        m.gain = real(j, "gain");
        m.feedthrough = real(j, "feedthrough");
        m.constrained = j.at("constrained").get<bool>();
        m.certified = j.at("certified").get<bool>();
        m.mesh = real(j, "mesh");
        m.mesh_bound = real(j, "mesh_bound");
        m.omega_max = real(j, "omega_max");
        m.active = reals_from(j.at("active"));
        for (const auto& d : j.at("descriptors")) m.descriptors.push_back(descriptor_from(d));
        const auto x = reals_from(j.at("coefficients"));
        if (x.size() != m.descriptors.size())
            throw Error(ErrorKind::Parse, "coefficient and descriptor counts differ");
        m.x = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
        m.post_filter = tf_from(j.at("post_filter"));
        m.reference = tf_from(j.at("reference"));
        const json& r = j.at("report");
        m.report.x = m.x;
        m.report.objective = real(r, "objective");
        m.report.rkhs_norm_sq = real(r, "rkhs_norm_sq");
        m.report.duality_gap = real(r, "duality_gap");
        m.report.stages = r.at("stages").get<int>();
        m.report.newton_iterations = r.at("newton_iterations").get<int>();
        m.trace.resize(r.at("iterations").get<std::size_t>());
        m.warnings = j.at("warnings").get<std::vector<std::string>>();
        const json& c = j.at("context");
        const auto mode = c.at("discrete_sum").get<std::string>() == "truncated" ? GramContext::DiscreteSum::Truncated
                                                                                 : GramContext::DiscreteSum::Closed;
        const Dataset d = dataset_from(j.at("data"));
        if (d.axis != axis) throw Error(ErrorKind::Parse, "embedded dataset and kernel are on different axes");
        m.ctx = std::make_shared<const GramContext>(d, m.spec, real(c, "tol"), mode);
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, fmt::format("model JSON: {}", e.what()));
    }
}

void save_model(const Model& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::NotFound, fmt::format("cannot write {}", path.string()));
    out << model_to_json(m) << '\n';
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::NotFound, fmt::format("model not found: {}", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace fdid
