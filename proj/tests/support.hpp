#pragma once

#include "polyflow/manifold.hpp"

#include <string>

inline std::string fixture_path(const std::string& name) { return std::string(POLYFLOW_FIXTURES) + "/" + name + ".json"; }

inline polyflow::Manifold fixture(const std::string& name) { return polyflow::load_manifold(fixture_path(name)); }

inline polyflow::Manifold from_json(const std::string& text) { return polyflow::build_manifold(polyflow::parse_description(text)); }

/// Expects build to fail and returns the error.
inline polyflow::GeometryError build_error(const std::string& text)
{
    try {
        from_json(text);
    } catch (const polyflow::GeometryError& e) {
        return e;
    }
    return polyflow::GeometryError(polyflow::GeometryErrorKind::InvalidDescription, "no error raised", -1);
}
