#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "botcal/calibration.hpp"
#include "botcal/features.hpp"
#include "botcal/forest.hpp"
#include "botcal/posterior.hpp"

namespace botcal {

inline constexpr std::string_view kModelFormatVersion = "v1";
inline constexpr std::string_view kModelMagic = "botcal-model";

struct ModelBundle {
    SchemaPtr schema;
    ScoringModels forests;
    Calibrator calibrator;
    CapModel cap;

    bool operator==(const ModelBundle& o) const {
        return *schema == *o.schema && forests == o.forests && calibrator == o.calibrator && cap == o.cap;
    }
};

// Header `botcal-model v1`, one JSON document, trailer `end botcal-model`.
std::string serialize_model(const ModelBundle& bundle);
// Throws VersionError or ParseError; never returns a partial bundle.
ModelBundle parse_model(std::string_view text);

void save_model(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

// Short content digest of the serialized bundle, e.g. "v1-3fa2c81b09de".
std::string model_version(const ModelBundle& bundle);

// Calibrator and density documents written by `calibrate` and `cap-fit`.
std::string serialize_calibrator(const Calibrator& cal);
Calibrator parse_calibrator(std::string_view json);
std::string serialize_cap_model(const CapModel& cap);
CapModel parse_cap_model(std::string_view json);

}  // namespace botcal
