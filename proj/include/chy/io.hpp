#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "chy/chern.hpp"
#include "chy/solver.hpp"

namespace chy {

using json = nlohmann::ordered_json;

/// Grid fields are serialized as JSON arrays in row-major grid order with a
/// header carrying (complex_dim, resolution, periods, kind).
json field_to_json(const ScalarField& f, const std::string& kind = "scalar");
ScalarField field_from_json(const json& j);

json oneform_to_json(const OneFormField& f);
OneFormField oneform_from_json(const json& j);

json metric_to_json(const HermitianMetricField& h);
HermitianMetricField metric_from_json(const json& j);

json instance_to_json(const ConformalInstance& inst);
ConformalInstance instance_from_json(const json& j);

json report_from_gauduchon(const GauduchonReport& rep);

void write_json_file(const std::filesystem::path& path, const json& j);
json read_json_file(const std::filesystem::path& path);

/// CSV with a fixed column order and full-precision doubles.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

} // namespace chy
