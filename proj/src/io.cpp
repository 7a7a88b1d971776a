#include "chy/io.hpp"

#include <cstdio>
#include <fstream>

namespace chy {

namespace {

json chart_header(const GridChart& chart, const std::string& kind) {
    json j;
    j["kind"] = kind;
    j["complex_dim"] = chart.complex_dim();
    j["resolution"] = chart.resolution();
    j["periods"] = chart.periods();
    return j;
}

ChartPtr chart_from_header(const json& j) {
    return make_chart(j.at("complex_dim").get<int>(), j.at("resolution").get<int>(),
                      j.at("periods").get<std::vector<double>>());
}

} // namespace

json field_to_json(const ScalarField& f, const std::string& kind) {
    json j = chart_header(*f.chart, kind);
    j["values"] = f.v;
    if (f.band_limit) j["band_limit"] = *f.band_limit;
    return j;
}

ScalarField field_from_json(const json& j) {
    ScalarField f(chart_from_header(j));
    auto values = j.at("values").get<std::vector<double>>();
    if (values.size() != f.size()) throw ConfigError("field_from_json: value count does not match chart");
    f.v = std::move(values);
    if (j.contains("band_limit")) f.band_limit = j.at("band_limit").get<int>();
    return f;
}

json oneform_to_json(const OneFormField& f) {
    json j = chart_header(*f.chart, "one_form");
    j["components"] = f.comp;
    return j;
}

OneFormField oneform_from_json(const json& j) {
    OneFormField f(chart_from_header(j));
    auto comp = j.at("components").get<std::vector<std::vector<double>>>();
    if (comp.size() != f.comp.size()) throw ConfigError("oneform_from_json: wrong component count");
    for (const auto& c : comp)
        if (c.size() != f.chart->point_count()) throw ConfigError("oneform_from_json: wrong component size");
    f.comp = std::move(comp);
    return f;
}

json metric_to_json(const HermitianMetricField& h) {
    json j = chart_header(*h.chart(), "hermitian_metric");
    const int n = h.n();
    std::vector<double> re, im;
    re.reserve(h.points() * static_cast<std::size_t>(n * n));
    im.reserve(h.points() * static_cast<std::size_t>(n * n));
    for (std::size_t p = 0; p < h.points(); ++p)
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                re.push_back(h.entry(p, i, k).real());
                im.push_back(h.entry(p, i, k).imag());
            }
    j["entries_re"] = std::move(re);
    j["entries_im"] = std::move(im);
    if (h.conformal_factor()) j["conformal_factor"] = h.conformal_factor()->v;
    return j;
}

HermitianMetricField metric_from_json(const json& j) {
    ChartPtr chart = chart_from_header(j);
    if (j.contains("conformal_factor")) {
        ScalarField u(chart);
        u.v = j.at("conformal_factor").get<std::vector<double>>();
        if (u.v.size() != chart->point_count()) throw ConfigError("metric_from_json: bad conformal factor");
        return HermitianMetricField::conformally_flat(chart, u);
    }
    const int n = chart->complex_dim();
    auto re = j.at("entries_re").get<std::vector<double>>();
    auto im = j.at("entries_im").get<std::vector<double>>();
    const std::size_t expect = chart->point_count() * static_cast<std::size_t>(n * n);
    if (re.size() != expect || im.size() != expect)
        throw ConfigError("metric_from_json: entry count does not match chart");
    std::vector<cxd> entries(expect);
    for (std::size_t i = 0; i < expect; ++i) entries[i] = cxd(re[i], im[i]);
    return HermitianMetricField(chart, std::move(entries));
}

json report_from_gauduchon(const GauduchonReport& rep) {
    json j;
    j["iterations"] = rep.iterations;
    j["gauduchon_residual"] = rep.gauduchon_residual;
    j["balanced_residual"] = rep.balanced_residual;
    j["kernel_eigenvalue"] = rep.kernel_eigenvalue;
    j["kernel_residual"] = rep.kernel_residual;
    j["positivity_margin"] = rep.positivity_margin;
    return j;
}

json instance_to_json(const ConformalInstance& inst) {
    json j;
    j["kind"] = "conformal_instance";
    j["metric"] = metric_to_json(inst.eta);
    j["scalar_curvature"] = field_to_json(inst.scalar_curvature, "scalar");
    j["lee_form"] = oneform_to_json(inst.lee);
    j["gauduchon_potential"] = field_to_json(inst.gauduchon_potential, "scalar");
    j["degree"] = inst.degree;
    j["projection"] = report_from_gauduchon(inst.projection);
    j["synthetic"] = inst.synthetic;
    j["balanced"] = inst.balanced;
    return j;
}

ConformalInstance instance_from_json(const json& j) {
    if (j.value("kind", "") != std::string("conformal_instance"))
        throw ConfigError("instance_from_json: not a conformal instance document");
    HermitianMetricField eta = metric_from_json(j.at("metric"));
    ScalarField s = field_from_json(j.at("scalar_curvature"));
    OneFormField lee = oneform_from_json(j.at("lee_form"));
    ScalarField g = field_from_json(j.at("gauduchon_potential"));
    GauduchonReport rep;
    const json& pj = j.at("projection");
    rep.iterations = pj.at("iterations").get<int>();
    rep.gauduchon_residual = pj.at("gauduchon_residual").get<double>();
    rep.balanced_residual = pj.at("balanced_residual").get<double>();
    rep.kernel_eigenvalue = pj.at("kernel_eigenvalue").get<double>();
    rep.kernel_residual = pj.at("kernel_residual").get<double>();
    rep.positivity_margin = pj.at("positivity_margin").get<double>();
    return ConformalInstance{std::move(eta),
                             std::move(s),
                             std::move(lee),
                             std::move(g),
                             j.at("degree").get<double>(),
                             rep,
                             j.at("synthetic").get<bool>(),
                             j.at("balanced").get<bool>()};
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << "\n";
    char buf[64];
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", row[c]);
            out << (c ? "," : "") << buf;
        }
        out << "\n";
    }
}

} // namespace chy
