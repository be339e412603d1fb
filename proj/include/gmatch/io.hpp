#pragma once

// Feature files: one JSON document per image.
//
//   {
//     "format": 1,
//     "image": "wall-1",
//     "width": 640, "height": 480,          (optional)
//     "keypoints": [[x, y], ...],
//     "descriptors": [[d0, d1, ...], ...]
//   }

#include "gmatch/graph_model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace gmatch {

inline constexpr int kFeatureFormat = 1;

struct ParseOptions {
    bool normalize_descriptors = true;
};

namespace detail {

inline std::string line_col(std::string_view text, std::size_t byte)
{
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline double number_at(const nlohmann::json& v, const std::string& where)
{
    require(v.is_number(), "field '" + where + "': expected a number");
    const double d = v.get<double>();
    require(std::isfinite(d), "field '" + where + "': value is not finite");
    return d;
}

}  // namespace detail

inline FeatureSet parse_features(std::string_view text, const ParseOptions& opts = {})
{
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // e.byte is 1-based and points just past the offending character.
        const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
        throw input_error("malformed feature file at " + detail::line_col(text, at) + ": "
                          + e.what());
    }
    detail::require(doc.is_object(), "feature file: top level must be an object");

    detail::require(doc.contains("format"), "feature file: missing field 'format'");
    detail::require(doc["format"].is_number_integer(), "field 'format': expected an integer");
    const int format = doc["format"].get<int>();
    detail::require(format == kFeatureFormat,
                    "field 'format': unsupported version " + std::to_string(format));

    FeatureSet fs;
    detail::require(doc.contains("image") && doc["image"].is_string(),
                    "field 'image': expected a string");
    fs.image_id = doc["image"].get<std::string>();
    for (const char* key : {"width", "height"}) {
        if (!doc.contains(key) || doc[key].is_null()) continue;
        detail::require(doc[key].is_number_integer(),
                        std::string("field '") + key + "': expected an integer");
        (std::strcmp(key, "width") == 0 ? fs.image_width : fs.image_height) = doc[key].get<int>();
    }

    detail::require(doc.contains("keypoints") && doc["keypoints"].is_array(),
                    "field 'keypoints': expected an array");
    const auto& kps = doc["keypoints"];
    for (std::size_t i = 0; i < kps.size(); ++i) {
        const std::string where = "keypoints[" + std::to_string(i) + "]";
        detail::require(kps[i].is_array() && kps[i].size() == 2,
                        "field '" + where + "': expected [x, y]");
        fs.keypoints.push_back({detail::number_at(kps[i][0], where + "[0]"),
                                detail::number_at(kps[i][1], where + "[1]")});
    }

    detail::require(doc.contains("descriptors") && doc["descriptors"].is_array(),
                    "field 'descriptors': expected an array");
    const auto& desc = doc["descriptors"];
    const std::size_t p = desc.empty() || !desc[0].is_array() ? 0 : desc[0].size();
    fs.descriptors.resize(static_cast<Index>(desc.size()), static_cast<Index>(p));
    for (std::size_t i = 0; i < desc.size(); ++i) {
        const std::string where = "descriptors[" + std::to_string(i) + "]";
        detail::require(desc[i].is_array(), "field '" + where + "': expected an array");
        detail::require(desc[i].size() == p, "field '" + where + "': has " + std::to_string(desc[i].size())
                                                 + " components, expected " + std::to_string(p));
        for (std::size_t c = 0; c < p; ++c) {
            fs.descriptors(static_cast<Index>(i), static_cast<Index>(c)) =
                detail::number_at(desc[i][c], where + "[" + std::to_string(c) + "]");
        }
    }

    fs.validate();
    if (opts.normalize_descriptors) normalize_descriptors(fs);
    return fs;
}

/// Writes a document parse_features() reads back to identical values (with
/// normalization off). One keypoint or descriptor per line.
inline std::string serialize_features(const FeatureSet& fs)
{
    using nlohmann::json;
    std::ostringstream out;
    out << "{\n  \"format\": " << kFeatureFormat << ",\n  \"image\": " << json(fs.image_id).dump();
    if (fs.image_width) out << ",\n  \"width\": " << *fs.image_width;
    if (fs.image_height) out << ",\n  \"height\": " << *fs.image_height;
    out << ",\n  \"keypoints\": [";
    for (std::size_t i = 0; i < fs.keypoints.size(); ++i) {
        out << (i ? ",\n    " : "\n    ") << json::array({fs.keypoints[i].x, fs.keypoints[i].y}).dump();
    }
    out << "\n  ],\n  \"descriptors\": [";
    for (Index i = 0; i < fs.descriptors.rows(); ++i) {
        json row = json::array();
        for (Index c = 0; c < fs.descriptors.cols(); ++c) row.push_back(fs.descriptors(i, c));
        out << (i ? ",\n    " : "\n    ") << row.dump();
    }
    out << "\n  ]\n}\n";
    return out.str();
}

inline std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write '" + path + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

inline FeatureSet load_features(const std::string& path, const ParseOptions& opts = {})
{
    const std::string text = read_text_file(path);
    try {
        return parse_features(text, opts);
    } catch (const input_error& e) {
        throw input_error(path + ": " + e.what());
    }
}

/// FNV-1a over the node coordinates and descriptor values, as hex.
inline std::string digest(const FeatureSet& fs)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](double v) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& kp : fs.keypoints) {
        mix(kp.x);
        mix(kp.y);
    }
    for (Index i = 0; i < fs.descriptors.rows(); ++i)
        for (Index c = 0; c < fs.descriptors.cols(); ++c) mix(fs.descriptors(i, c));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace gmatch
