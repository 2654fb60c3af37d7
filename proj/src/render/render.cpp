#include "voxrefine/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "voxrefine/error.hpp"

namespace voxrefine::render {

namespace {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
Vec3 normalized(const Vec3& a) {
    const double n = std::sqrt(dot(a, a));
    return {a[0] / n, a[1] / n, a[2] / n};
}

// Near plane in camera z; geometry behind it is skipped rather than clipped.
constexpr double kNear = 1e-6;

struct ScreenVertex {
    double x, y, z;
};

// Positive when p is on the interior side of a->b for counter-clockwise
// (in y-down screen space: clockwise) winding.
double edge(const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
    return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

bool top_left(const ScreenVertex& a, const ScreenVertex& b) { return (a.y == b.y && b.x > a.x) || b.y < a.y; }

}  // namespace

Vec3 CameraPose::position() const {
    const auto& e = extrinsic;
    const Vec3 t{e[3], e[7], e[11]};
    // -R^T t
    return {-(e[0] * t[0] + e[4] * t[1] + e[8] * t[2]), -(e[1] * t[0] + e[5] * t[1] + e[9] * t[2]),
            -(e[2] * t[0] + e[6] * t[1] + e[10] * t[2])};
}

void CameraPose::validate() const {
    if (width <= 0 || height <= 0) throw ValidationError("camera image size must be positive");
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double d = 0;
            for (int k = 0; k < 3; ++k) d += extrinsic[4 * i + k] * extrinsic[4 * j + k];
            if (std::abs(d - (i == j ? 1.0 : 0.0)) > 1e-6) throw ValidationError("camera rotation is not orthonormal");
        }
    if (!(fx > 0 && fy > 0)) throw ValidationError("camera focal lengths must be positive");
}

CameraPose make_lookat_camera(const Vec3& position, double fov_y, int width, int height) {
    const double len = std::sqrt(dot(position, position));
    if (!(len > 0.0)) throw ValidationError("camera position must not be the origin");
    if (!(fov_y > 0.0 && fov_y < 3.14159)) throw ValidationError("camera fov_y must lie in (0, pi)");
    if (width <= 0 || height <= 0) throw ValidationError("camera image size must be positive");

    const Vec3 forward{-position[0] / len, -position[1] / len, -position[2] / len};
    Vec3 right = cross(forward, {0.0, 0.0, 1.0});
    if (dot(right, right) < 1e-18) right = cross(forward, {1.0, 0.0, 0.0});
    right = normalized(right);
    const Vec3 up = cross(right, forward);

    CameraPose cam;
    const Vec3 rows[3] = {right, {-up[0], -up[1], -up[2]}, forward};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) cam.extrinsic[4 * i + j] = rows[i][j];
        cam.extrinsic[4 * i + 3] = -dot(rows[i], position);
    }
    cam.extrinsic[15] = 1.0;
    cam.fy = (height / 2.0) / std::tan(fov_y / 2.0);
    cam.fx = cam.fy;
    cam.cx = width / 2.0;
    cam.cy = height / 2.0;
    cam.width = width;
    cam.height = height;
    return cam;
}

void render_both(const CoordMesh& mesh, const CameraPose& camera, IndexMap* index, RenderImage* image) {
    camera.validate();
    const int w = camera.width, h = camera.height;
    const std::size_t npix = static_cast<std::size_t>(w) * h;
    std::vector<double> depth(npix, std::numeric_limits<double>::infinity());
    std::vector<std::int64_t> owner(npix, -1);

    const auto& e = camera.extrinsic;
    std::vector<ScreenVertex> sv(mesh.vertices.size());
    std::vector<std::uint8_t> visible(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const auto& p = mesh.vertices[i];
        const double xc = e[0] * p[0] + e[1] * p[1] + e[2] * p[2] + e[3];
        const double yc = e[4] * p[0] + e[5] * p[1] + e[6] * p[2] + e[7];
        const double zc = e[8] * p[0] + e[9] * p[1] + e[10] * p[2] + e[11];
        visible[i] = zc > kNear;
        sv[i] = {camera.fx * xc / zc + camera.cx, camera.fy * yc / zc + camera.cy, zc};
    }

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t].v;
        if (!visible[tri[0]] || !visible[tri[1]] || !visible[tri[2]]) continue;
        ScreenVertex a = sv[tri[0]], b = sv[tri[1]], c = sv[tri[2]];
        double area = edge(a, b, c.x, c.y);
        if (area == 0.0) continue;
        if (area < 0.0) {
            std::swap(b, c);
            area = -area;
        }
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}) - 0.5)));
        const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}) - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}) - 0.5)));
        const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}) - 0.5)));
        const bool tl_bc = top_left(b, c), tl_ca = top_left(c, a), tl_ab = top_left(a, b);
        for (int py = y0; py <= y1; ++py) {
            const double fy = py + 0.5;
            for (int px = x0; px <= x1; ++px) {
                const double fx = px + 0.5;
                const double w0 = edge(b, c, fx, fy), w1 = edge(c, a, fx, fy), w2 = edge(a, b, fx, fy);
                if (w0 < 0 || w1 < 0 || w2 < 0) continue;
                if ((w0 == 0 && !tl_bc) || (w1 == 0 && !tl_ca) || (w2 == 0 && !tl_ab)) continue;
                // Perspective-correct depth: 1/z is affine in screen space.
                const double inv_z = (w0 / a.z + w1 / b.z + w2 / c.z) / area;
                const double z = 1.0 / inv_z;
                const std::size_t pix = static_cast<std::size_t>(py) * w + px;
                if (z < depth[pix]) {
                    depth[pix] = z;
                    owner[pix] = static_cast<std::int64_t>(t);
                }
            }
        }
    }

    if (index) {
        index->width = w;
        index->height = h;
        index->cells.assign(npix, std::nullopt);
        index->depth = depth;
        for (std::size_t i = 0; i < npix; ++i)
            if (owner[i] >= 0) index->cells[i] = mesh.face_coord[static_cast<std::size_t>(owner[i])];
    }
    if (image) {
        image->width = w;
        image->height = h;
        image->pixels.assign(npix * 3, 0.0f);
        for (std::size_t i = 0; i < npix; ++i) {
            if (owner[i] < 0) continue;
            const auto& n = mesh.face_normal[static_cast<std::size_t>(owner[i])];
            for (int ch = 0; ch < 3; ++ch) image->pixels[i * 3 + ch] = static_cast<float>((n[ch] + 1.0) / 2.0);
        }
    }
}

IndexMap render_index_map(const CoordMesh& mesh, const CameraPose& camera) {
    IndexMap map;
    render_both(mesh, camera, &map, nullptr);
    return map;
}

RenderImage render_normal_image(const CoordMesh& mesh, const CameraPose& camera) {
    RenderImage img;
    render_both(mesh, camera, nullptr, &img);
    return img;
}

ImageIndex pool_image_index(const IndexMap& map, int patch_size) {
    if (patch_size < 1 || map.width % patch_size != 0 || map.height % patch_size != 0)
        throw ValidationError("patch size " + std::to_string(patch_size) + " does not divide image " +
                              std::to_string(map.width) + "x" + std::to_string(map.height));
    ImageIndex idx;
    idx.rows = map.height / patch_size;
    idx.cols = map.width / patch_size;
    idx.patches.resize(static_cast<std::size_t>(idx.rows) * idx.cols);
    for (int r = 0; r < idx.rows; ++r)
        for (int c = 0; c < idx.cols; ++c) {
            double sum[3] = {0, 0, 0};
            int n = 0;
            for (int y = r * patch_size; y < (r + 1) * patch_size; ++y)
                for (int x = c * patch_size; x < (c + 1) * patch_size; ++x) {
                    const auto& cell = map.at(x, y);
                    if (!cell) continue;
                    for (int a = 0; a < 3; ++a) sum[a] += (*cell)[a];
                    ++n;
                }
            auto& p = idx.patches[static_cast<std::size_t>(r) * idx.cols + c];
            p.null = n == 0;
            if (n > 0)
                for (int a = 0; a < 3; ++a) p.coord[a] = static_cast<float>(sum[a] / n);
        }
    return idx;
}

}  // namespace voxrefine::render
