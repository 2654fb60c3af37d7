#include <fstream>
#include <sstream>

#include "json.hpp"
#include "voxrefine/binio.hpp"
#include "voxrefine/error.hpp"
#include "voxrefine/render.hpp"

namespace voxrefine::render {

using nlohmann::json;

std::string camera_to_json(const CameraPose& camera) {
    json j{{"extrinsic", camera.extrinsic}, {"fx", camera.fx},       {"fy", camera.fy},        {"cx", camera.cx},
           {"cy", camera.cy},               {"width", camera.width}, {"height", camera.height}};
    return j.dump(2);
}

CameraPose camera_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        for (const auto& [key, _] : j.items())
            if (key != "extrinsic" && key != "fx" && key != "fy" && key != "cx" && key != "cy" && key != "width" &&
                key != "height")
                throw ValidationError("camera: unknown key '" + key + "'");
        CameraPose cam;
        const auto ext = j.at("extrinsic").get<std::vector<double>>();
        if (ext.size() != 16) throw ValidationError("camera: extrinsic must have 16 entries");
        std::copy(ext.begin(), ext.end(), cam.extrinsic.begin());
        cam.fx = j.at("fx").get<double>();
        cam.fy = j.at("fy").get<double>();
        cam.cx = j.at("cx").get<double>();
        cam.cy = j.at("cy").get<double>();
        cam.width = j.at("width").get<int>();
        cam.height = j.at("height").get<int>();
        cam.validate();
        return cam;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("camera: ") + e.what());
    }
}

void write_camera(const std::filesystem::path& path, const CameraPose& camera) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << camera_to_json(camera) << '\n';
    if (!out) throw IoError("short write: " + path.string());
}

CameraPose read_camera(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return camera_from_json(ss.str());
    } catch (const ValidationError& e) {
        throw FormatError(path.string(), e.what());
    }
}

void write_image_index(const std::filesystem::path& path, const ImageIndex& index) {
    binio::Writer w;
    w.magic("IIX1");
    w.u32(static_cast<std::uint32_t>(index.rows));
    w.u32(static_cast<std::uint32_t>(index.cols));
    for (const auto& p : index.patches) {
        for (float c : p.coord) w.f32(c);
        w.u8(p.null ? 1 : 0);
    }
    w.save(path);
}

ImageIndex read_image_index(const std::filesystem::path& path) {
    auto r = binio::Reader::open(path);
    r.expect_magic("IIX1");
    ImageIndex idx;
    idx.rows = static_cast<int>(r.u32());
    idx.cols = static_cast<int>(r.u32());
    const std::size_t n = static_cast<std::size_t>(idx.rows) * static_cast<std::size_t>(idx.cols);
    if (n * 13 != r.remaining()) r.fail("patch payload size does not match " + std::to_string(idx.rows) + "x" + std::to_string(idx.cols));
    idx.patches.resize(n);
    for (auto& p : idx.patches) {
        for (auto& c : p.coord) c = r.f32();
        const auto flag = r.u8();
        if (flag > 1) r.fail("null flag must be 0 or 1");
        p.null = flag == 1;
    }
    return idx;
}

void write_image(const std::filesystem::path& path, const RenderImage& image) {
    binio::Writer w;
    w.magic("IMG1");
    w.u32(static_cast<std::uint32_t>(image.width));
    w.u32(static_cast<std::uint32_t>(image.height));
    for (float v : image.pixels) w.f32(v);
    w.save(path);
}

RenderImage read_image(const std::filesystem::path& path) {
    auto r = binio::Reader::open(path);
    r.expect_magic("IMG1");
    RenderImage img;
    img.width = static_cast<int>(r.u32());
    img.height = static_cast<int>(r.u32());
    const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) * 3;
    if (n * 4 != r.remaining()) r.fail("pixel payload size does not match header");
    img.pixels.resize(n);
    for (auto& v : img.pixels) v = r.f32();
    return img;
}

void write_index_map_debug(const std::filesystem::path& prefix, const IndexMap& map) {
    const auto pgm = std::filesystem::path(prefix.string() + ".pgm");
    std::ofstream out(pgm, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + pgm.string());
    out << "P5\n" << map.width << ' ' << map.height << "\n255\n";
    for (const auto& c : map.cells) out.put(static_cast<char>(c ? 255 : 0));

    const auto csv = std::filesystem::path(prefix.string() + ".csv");
    std::ofstream cs(csv, std::ios::trunc);
    if (!cs) throw IoError("cannot open for writing: " + csv.string());
    cs << "px,py,x,y,z,depth\n";
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x) {
            const auto& c = map.at(x, y);
            if (!c) continue;
            cs << x << ',' << y << ',' << (*c)[0] << ',' << (*c)[1] << ',' << (*c)[2] << ','
               << map.depth[static_cast<std::size_t>(y) * map.width + x] << '\n';
        }
}

}  // namespace voxrefine::render
