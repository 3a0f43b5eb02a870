#pragma once

#include <Eigen/Core>
#include <json.hpp>

namespace apex {

using Vec3 = Eigen::Vector3d;
using Json = nlohmann::json;

inline Json vec3_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3_from_json(const Json& j) {
    return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

/// True when every component is finite.
inline bool is_finite(const Vec3& v) { return v.allFinite(); }

}  // namespace apex
