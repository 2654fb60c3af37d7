#include <cmath>

#include "voxrefine/data.hpp"
#include "voxrefine/error.hpp"

namespace voxrefine::data {

namespace {

std::array<double, 9> random_rotation(Rng& rng) {
    double q[4];
    double n = 0;
    do {
        n = 0;
        for (double& v : q) {
            v = rng.normal();
            n += v * v;
        }
    } while (n < 1e-12);
    n = std::sqrt(n);
    for (double& v : q) v /= n;
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    return {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
            2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
            2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
}

std::array<double, 9> yaw_rotation(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {c, s, 0, -s, c, 0, 0, 0, 1};
}

Primitive random_primitive(Primitive::Type type, double scale, Rng& rng) {
    Primitive p;
    p.type = type;
    switch (type) {
        case Primitive::Type::sphere:
            p.size = {scale * rng.uniform(0.2, 0.42), 0, 0};
            break;
        case Primitive::Type::box:
            p.size = {scale * rng.uniform(0.12, 0.38), scale * rng.uniform(0.12, 0.38), scale * rng.uniform(0.12, 0.38)};
            p.rotation = random_rotation(rng);
            break;
        case Primitive::Type::torus:
            p.size = {scale * rng.uniform(0.18, 0.3), scale * rng.uniform(0.06, 0.12), 0};
            p.rotation = random_rotation(rng);
            break;
    }
    for (double& c : p.center) c = rng.uniform(-0.05, 0.05);
    return p;
}

}  // namespace

std::string to_string(ShapeKind k) {
    switch (k) {
        case ShapeKind::box: return "box";
        case ShapeKind::sphere: return "sphere";
        case ShapeKind::torus: return "torus";
        case ShapeKind::composite: return "composite";
        case ShapeKind::l_shape: return "l_shape";
    }
    return "?";
}

ShapeKind shape_kind_from_string(const std::string& name) {
    for (auto k : {ShapeKind::box, ShapeKind::sphere, ShapeKind::torus, ShapeKind::composite, ShapeKind::l_shape})
        if (to_string(k) == name) return k;
    throw ValidationError("unknown shape kind '" + name + "'");
}

bool Primitive::contains(const Vec3& p) const {
    const double dx = p[0] - center[0], dy = p[1] - center[1], dz = p[2] - center[2];
    const double x = rotation[0] * dx + rotation[1] * dy + rotation[2] * dz;
    const double y = rotation[3] * dx + rotation[4] * dy + rotation[5] * dz;
    const double z = rotation[6] * dx + rotation[7] * dy + rotation[8] * dz;
    switch (type) {
        case Type::sphere: return x * x + y * y + z * z <= size[0] * size[0];
        case Type::box: return std::abs(x) <= size[0] && std::abs(y) <= size[1] && std::abs(z) <= size[2];
        case Type::torus: {
            const double q = std::sqrt(x * x + y * y) - size[0];
            return q * q + z * z <= size[1] * size[1];
        }
    }
    return false;
}

bool Solid::contains(const Vec3& p) const {
    for (const auto& part : parts)
        if (part.contains(p)) return true;
    return false;
}

Solid sample_solid(ShapeKind kind, Rng& rng) {
    Solid s;
    switch (kind) {
        case ShapeKind::sphere: s.parts.push_back(random_primitive(Primitive::Type::sphere, 1.0, rng)); break;
        case ShapeKind::box: s.parts.push_back(random_primitive(Primitive::Type::box, 1.0, rng)); break;
        case ShapeKind::torus: s.parts.push_back(random_primitive(Primitive::Type::torus, 1.0, rng)); break;
        case ShapeKind::l_shape: {
            const double len = rng.uniform(0.6, 0.85), thick = rng.uniform(0.15, 0.3), depth = rng.uniform(0.1, 0.3);
            const auto rot = yaw_rotation(rng.uniform(0, 2 * std::numbers::pi));
            // Two bars sharing the corner at (-len/2, -len/2) in the local frame.
            for (int bar = 0; bar < 2; ++bar) {
                Primitive p;
                p.type = Primitive::Type::box;
                p.rotation = rot;
                const Vec3 local = bar == 0 ? Vec3{0.0, -len / 2 + thick / 2, 0.0} : Vec3{-len / 2 + thick / 2, 0.0, 0.0};
                // center = R^T * local
                for (int i = 0; i < 3; ++i)
                    p.center[static_cast<std::size_t>(i)] = rot[static_cast<std::size_t>(i)] * local[0] +
                                                            rot[static_cast<std::size_t>(3 + i)] * local[1] +
                                                            rot[static_cast<std::size_t>(6 + i)] * local[2];
                p.size = bar == 0 ? Vec3{len / 2, thick / 2, depth} : Vec3{thick / 2, len / 2, depth};
                s.parts.push_back(p);
            }
            break;
        }
        case ShapeKind::composite: {
            const int n = 2 + static_cast<int>(rng.below(3));
            for (int i = 0; i < n; ++i) {
                const auto type = static_cast<Primitive::Type>(rng.below(3));
                Primitive p = random_primitive(type, 0.6, rng);
                for (double& c : p.center) c = rng.uniform(-0.2, 0.2);
                s.parts.push_back(p);
            }
            break;
        }
    }
    return s;
}

VoxelGrid voxelize_solid(const Solid& solid, int resolution) {
    VoxelGrid g(resolution);
    for (int z = 0; z < resolution; ++z)
        for (int y = 0; y < resolution; ++y)
            for (int x = 0; x < resolution; ++x)
                if (solid.contains(g.center(x, y, z))) g.set(x, y, z, true);
    return g;
}

VoxelGrid generate_shape(ShapeKind kind, int resolution, Rng& rng) {
    if (resolution < 8) throw ValidationError("generate_shape: resolution must be >= 8");
    // Thin parts can vanish at low resolution; redraw until something is occupied.
    for (int attempt = 0; attempt < 64; ++attempt) {
        VoxelGrid g = voxelize_solid(sample_solid(kind, rng), resolution);
        if (g.count() > 0) return g;
    }
    throw ValidationError("generate_shape: could not produce a non-empty " + to_string(kind));
}

}  // namespace voxrefine::data
