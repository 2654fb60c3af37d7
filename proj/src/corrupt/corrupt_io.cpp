#include "json.hpp"

#include "voxrefine/binio.hpp"
#include "voxrefine/corrupt.hpp"
#include "voxrefine/error.hpp"

namespace voxrefine::corrupt {

using nlohmann::json;

void write_sdf(const std::filesystem::path& path, const SdfGrid& sdf) {
    binio::Writer w;
    w.magic("SDF1");
    w.u32(static_cast<std::uint32_t>(sdf.resolution));
    for (float v : sdf.values) w.f32(v);
    w.save(path);
}

SdfGrid read_sdf(const std::filesystem::path& path) {
    auto r = binio::Reader::open(path);
    r.expect_magic("SDF1");
    const std::uint32_t res = r.u32();
    if (res < 2 || res > 1024) r.fail("invalid resolution " + std::to_string(res));
    SdfGrid sdf;
    sdf.resolution = static_cast<int>(res);
    sdf.values.resize(static_cast<std::size_t>(res) * res * res);
    for (auto& v : sdf.values) v = r.f32();
    r.expect_end();
    return sdf;
}

std::string spec_to_json(const CorruptionSpec& spec) {
    json modules = json::array();
    for (const auto& m : spec.modules) {
        if (const auto* s = std::get_if<ShellNoise>(&m)) {
            json j{{"type", "shell_noise"},   {"label", s->label},           {"range_lo", s->range_lo},
                   {"range_hi", s->range_hi}, {"probability", s->probability}, {"sign", s->sign}};
            if (!s->cluster_sizes.empty()) j["cluster_sizes"] = s->cluster_sizes;
            modules.push_back(j);
        } else if (const auto* c = std::get_if<CoarseMask>(&m)) {
            modules.push_back({{"type", "coarse_mask"}, {"mask_res", c->mask_res}, {"fg_prob", c->fg_prob},
                               {"region_z_max", c->region_z_max}});
        } else {
            const auto& h = std::get<HalfSpace>(m);
            modules.push_back({{"type", "half_space"}, {"normal", h.normal}, {"offset", h.offset}});
        }
    }
    json root{{"family", to_string(spec.family)}, {"seed", spec.seed}, {"modules", modules}};
    return root.dump(2);
}

namespace {

template <typename T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(std::string("corruption spec: missing key '") + key + "'");
    return j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ValidationError("corruption spec: unknown key '" + key + "'");
    }
}

}  // namespace

CorruptionSpec spec_from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("corruption spec: ") + e.what());
    }
    try {
        reject_unknown(root, {"family", "seed", "modules"});
        CorruptionSpec spec;
        spec.family = family_from_string(field<std::string>(root, "family"));
        spec.seed = field<std::uint64_t>(root, "seed");
        for (const auto& m : field<json>(root, "modules")) {
            const auto type = field<std::string>(m, "type");
            if (type == "shell_noise") {
                reject_unknown(m, {"type", "label", "range_lo", "range_hi", "probability", "sign", "cluster_sizes"});
                ShellNoise s;
                s.label = m.value("label", "");
                s.range_lo = field<double>(m, "range_lo");
                s.range_hi = field<double>(m, "range_hi");
                s.probability = field<double>(m, "probability");
                s.sign = field<int>(m, "sign");
                if (m.contains("cluster_sizes")) s.cluster_sizes = m.at("cluster_sizes").get<std::vector<int>>();
                spec.modules.emplace_back(s);
            } else if (type == "coarse_mask") {
                reject_unknown(m, {"type", "mask_res", "fg_prob", "region_z_max"});
                CoarseMask c;
                c.mask_res = field<int>(m, "mask_res");
                c.fg_prob = field<double>(m, "fg_prob");
                c.region_z_max = m.value("region_z_max", 0.5);
                spec.modules.emplace_back(c);
            } else if (type == "half_space") {
                reject_unknown(m, {"type", "normal", "offset"});
                HalfSpace h;
                h.normal = field<Vec3>(m, "normal");
                h.offset = field<double>(m, "offset");
                spec.modules.emplace_back(h);
            } else {
                throw ValidationError("corruption spec: unknown module type '" + type + "'");
            }
        }
        return spec;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("corruption spec: ") + e.what());
    }
}

}  // namespace voxrefine::corrupt
