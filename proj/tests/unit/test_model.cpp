#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "voxrefine/error.hpp"
#include "voxrefine/model.hpp"

using namespace voxrefine;
using namespace voxrefine::model;

namespace {

// 8 voxel tokens, 4 image tokens per view.
ModelConfig tiny_config() {
    ModelConfig c;
    c.resolution = 8;
    c.voxel_patch = 4;
    c.latent_channels = 8;
    c.width = 12;
    c.heads = 2;
    c.n_dual = 1;
    c.n_single = 1;
    c.time_embed_dim = 8;
    c.mlp_ratio = 2;
    return c;
}

ImagePatches random_view(Rng& rng, int size = 28, int patch = 14, double null_prob = 0.25) {
    render::RenderImage img{size, size, std::vector<float>(static_cast<std::size_t>(size * size * 3))};
    for (auto& p : img.pixels) p = static_cast<float>(rng.uniform());
    render::ImageIndex idx;
    idx.rows = idx.cols = size / patch;
    for (int i = 0; i < idx.rows * idx.cols; ++i) {
        render::PatchCoord pc;
        pc.null = rng.bernoulli(null_prob);
        if (!pc.null)
            for (auto& c : pc.coord) c = static_cast<float>(rng.uniform(0, 8));
        idx.patches.push_back(pc);
    }
    return extract_image_patches(img, idx, patch);
}

std::vector<ImagePatches> random_views(int n, Rng& rng) {
    std::vector<ImagePatches> v;
    for (int i = 0; i < n; ++i) v.push_back(random_view(rng, 28, 14, 0.0));
    return v;
}

// Perturb every parameter so no gradient is structurally tiny.
void randomize(ParamStore& ps, Rng& rng, double std) {
    for (auto& [_, p] : ps)
        for (auto& v : p.value.values()) v += rng.normal() * std;
}

double rel_l2(const Tensor& a, const Tensor& b) {
    double d = 0, n = 0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        d += (a[i] - b[i]) * (a[i] - b[i]);
        n += b[i] * b[i];
    }
    return std::sqrt(d / n);
}

}  // namespace

TEST_CASE("config validation and json round trip") {
    ModelConfig c;
    CHECK_NOTHROW(c.validate());
    const auto back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
    CHECK(config_from_json(R"({"width": 48, "heads": 4})").width == 48);
    CHECK_THROWS_AS(config_from_json(R"({"widht": 48})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"width": 50, "heads": 4})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"resolution": 18})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"width": 16, "heads": 4})"), ValidationError);  // head dim 4
    CHECK_THROWS_AS(config_from_json(R"({"latent_channels": 65})"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"lr": "fast"})"), ValidationError);
}

TEST_CASE("patchify encode: counts, coordinates, empty grid") {
    ModelConfig c;
    const VoxelCodec codec(c);
    const VoxelGrid empty(16);
    const auto lat = codec.encode(empty);
    CHECK(lat.tokens.shape() == num::Shape{64, 64});
    CHECK(lat.coords[0] == Vec3{1.5, 1.5, 1.5});
    CHECK(lat.coords[1] == Vec3{5.5, 1.5, 1.5});
    CHECK(lat.coords[4] == Vec3{1.5, 5.5, 1.5});
    for (std::size_t t = 1; t < 64; ++t)
        for (std::size_t j = 0; j < 64; ++j) CHECK(lat.tokens.at(t, j) == lat.tokens.at(0, j));
    CHECK(voxel_token_coords(c) == lat.coords);
    CHECK_THROWS_AS(codec.encode(VoxelGrid(8)), ValidationError);
}

TEST_CASE("codec basis is orthonormal and decoding inverts encoding") {
    ModelConfig c;
    const VoxelCodec codec(c);
    const Tensor& w = codec.basis();
    for (std::size_t a = 0; a < 64; a += 7)
        for (std::size_t b = 0; b < 64; b += 5) {
            double s = 0;
            for (std::size_t i = 0; i < 64; ++i) s += w.at(i, a) * w.at(i, b);
            CHECK(std::abs(s - (a == b ? 1.0 : 0.0)) < 1e-12);
        }
    Rng rng(4);
    for (int k = 0; k < 5; ++k) {
        const auto g = oracle::random_grid(16, 0.1 + 0.2 * k, rng);
        CHECK(codec.decode(codec.encode(g)) == g);
    }
    VoxelGrid full(16);
    for (std::size_t i = 0; i < full.size(); ++i) full.set(i, true);
    auto neg = codec.encode(full);
    for (auto& v : neg.tokens.values()) v *= -100.0;
    const auto dec = codec.decode(neg);
    CHECK(dec.resolution() == 16);
    CHECK(dec.count() == 0);
}

TEST_CASE("rope phases") {
    ModelConfig c;  // head dim 16: 2 pairs per axis, pairs 6 and 7 unrotated
    const Tensor ph = rope_phases({{0, 0, 0}, {3, 5, 7}, {3, 5, 7}, {1, 1, 1}}, {0, 0, 0, 1}, c);
    CHECK(ph.shape() == num::Shape{4, 8});
    for (std::size_t j = 0; j < 8; ++j) {
        CHECK(ph.at(0, j) == 0.0);
        CHECK(ph.at(1, j) == ph.at(2, j));
        CHECK(ph.at(3, j) == 0.0);
    }
    CHECK(ph.at(1, 0) == 3.0);
    CHECK(ph.at(1, 2) == 5.0);
    CHECK(ph.at(1, 4) == 7.0);
    CHECK(ph.at(1, 1) == doctest::Approx(3.0 / 100.0));
    CHECK(ph.at(1, 6) == 0.0);
    CHECK(ph.at(1, 7) == 0.0);

    ModelConfig six = tiny_config();  // head dim 6: one pair per axis
    const Tensor p6 = rope_phases({{2, 4, 6}}, {}, six);
    CHECK(p6.shape() == num::Shape{1, 3});
    CHECK(p6[0] == 2.0);
    CHECK(p6[2] == 6.0);

    const Tensor tiled = tiled_rope_phases({{3, 5, 7}}, {0}, c);
    CHECK(tiled.shape() == num::Shape{1, 32});
    for (std::size_t h = 0; h < 4; ++h)
        for (std::size_t j = 0; j < 8; ++j) CHECK(tiled.at(0, h * 8 + j) == ph.at(1, j));

    ModelConfig bad = c;
    bad.width = 16;
    bad.heads = 4;
    CHECK_THROWS_AS(rope_phases({{0, 0, 0}}, {0}, bad), ValidationError);
}

TEST_CASE("image token embedding") {
    ModelConfig c;
    Rng rng(8);
    render::RenderImage img{224, 224, std::vector<float>(224 * 224 * 3, 0.5f)};
    render::ImageIndex idx;
    idx.rows = idx.cols = 16;
    idx.patches.resize(256);
    auto ps = init_params(c, 1);
    Tape t(false);
    const auto patches = extract_image_patches(img, idx, 14);
    const auto s = embed_image_tokens(t, ps, patches, c);
    CHECK(s.tokens.shape() == num::Shape{256, 64});
    CHECK(std::all_of(s.null.begin(), s.null.end(), [](auto v) { return v == 1; }));

    idx.patches[17] = {{1.25f, 2.5f, 3.75f}, false};
    const auto s2 = embed_image_tokens(t, ps, extract_image_patches(img, idx, 14), c);
    CHECK(s2.coords[17] == Vec3{1.25, 2.5, 3.75});
    CHECK(s2.null[17] == 0);

    render::ImageIndex wrong = idx;
    wrong.rows = 8;
    CHECK_THROWS_AS(extract_image_patches(img, wrong, 14), ValidationError);
    CHECK_THROWS_AS(extract_image_patches(img, idx, 15), ValidationError);
}

TEST_CASE("velocity shape law for S in 0..8 and determinism") {
    const ModelConfig c = tiny_config();
    auto ps = init_params(c, 2);
    Rng rng(5);
    const Tensor z = num::randn({8, 8}, 1.0, rng);
    for (int S = 0; S <= 8; ++S) {
        const auto views = random_views(S, rng);
        const Tensor v = predict_velocity(ps, c, z, 0.3, views);
        CHECK(v.shape() == z.shape());
        CHECK(predict_velocity(ps, c, z, 0.3, views) == v);
    }
    CHECK_THROWS_AS(predict_velocity(ps, c, z, 1.5, {}), ValidationError);
    CHECK_THROWS_AS(predict_velocity(ps, c, num::randn({8, 4}, 1.0, rng), 0.3, {}), ValidationError);
}

TEST_CASE("attention trace: union law, map count, stochastic rows") {
    ModelConfig c = tiny_config();
    c.n_dual = 2;
    c.n_single = 3;
    auto ps = init_params(c, 3);
    Rng rng(6);
    const Tensor z = num::randn({8, 8}, 1.0, rng);
    for (int S : {0, 1, 3}) {
        const auto views = random_views(S, rng);
        ForwardTrace tr;
        tr.enabled = true;
        predict_velocity(ps, c, z, 0.5, views, &tr);
        const auto& sites = extract_attention_maps(tr);
        CHECK(sites.size() == static_cast<std::size_t>(c.n_dual * (1 + S) + c.n_single));
        const std::size_t L_kv = 8 + 4 * static_cast<std::size_t>(S);
        for (const auto& s : sites) {
            CHECK(s.map.dim(0) == 2);
            CHECK(s.map.dim(2) == L_kv);
            if (s.stream == "voxel") CHECK(s.map.dim(1) == 8);
            if (s.stream.rfind("image", 0) == 0) CHECK(s.map.dim(1) == 4);
            if (s.stream == "unified") CHECK(s.map.dim(1) == L_kv);
            const std::size_t rows = s.map.dim(0) * s.map.dim(1);
            for (std::size_t r = 0; r < rows; ++r) {
                double sum = 0;
                for (std::size_t j = 0; j < L_kv; ++j) sum += s.map[r * L_kv + j];
                CHECK(std::abs(sum - 1.0) <= 1e-9);
            }
        }
        CHECK(tr.unified_layout.size() == static_cast<std::size_t>(1 + S));
        CHECK(tr.unified_layout[0] == 8);
    }
    ForwardTrace off;
    predict_velocity(ps, c, z, 0.5, {}, &off);
    CHECK_THROWS_AS(extract_attention_maps(off), ValidationError);
}

TEST_CASE("single token single block is identity mixing") {
    const ModelConfig c = tiny_config();
    auto ps = init_params(c, 4);
    Rng rng(1);
    Tape t(false);
    TokenStream s;
    s.tokens = t.constant(num::randn({1, 12}, 1.0, rng));
    s.coords = {{1, 2, 3}};
    s.null = {0};
    s.phases = tiled_rope_phases(s.coords, s.null, c);
    ForwardTrace tr;
    tr.enabled = true;
    single_block(t, ps, c, 0, s, &tr);
    REQUIRE(tr.sites.size() == 1);
    CHECK(tr.sites[0].map.shape() == num::Shape{2, 1, 1});
    CHECK(tr.sites[0].map[0] == 1.0);
    CHECK(tr.sites[0].map[1] == 1.0);

    TokenStream narrow = s;
    narrow.tokens = t.constant(num::randn({1, 6}, 1.0, rng));
    CHECK_THROWS_AS(single_block(t, ps, c, 0, narrow, nullptr), ValidationError);
}

TEST_CASE("permuting image tokens with their coordinates leaves voxel output unchanged") {
    const ModelConfig c = tiny_config();
    auto ps = init_params(c, 7);
    Rng rng(11);
    const Tensor z = num::randn({8, 8}, 1.0, rng);
    auto views = random_views(2, rng);
    const Tensor base = predict_velocity(ps, c, z, 0.4, views);

    auto& v = views[1];
    const std::size_t a = 0, b = 3, D = v.pixels.dim(1);
    for (std::size_t j = 0; j < D; ++j) std::swap(v.pixels.at(a, j), v.pixels.at(b, j));
    std::swap(v.coords[a], v.coords[b]);
    std::swap(v.null[a], v.null[b]);
    const Tensor perm = predict_velocity(ps, c, z, 0.4, views);
    for (std::size_t i = 0; i < base.numel(); ++i) CHECK(std::abs(perm[i] - base[i]) <= 1e-12);
}

TEST_CASE("coordinate sensitivity probe and zero-phase ablation") {
    ModelConfig c = tiny_config();
    Rng rng(12);
    const Tensor z = num::randn({8, 8}, 1.0, rng);
    auto views = random_views(2, rng);
    auto shifted = views;
    for (auto& v : shifted)
        for (auto& p : v.coords)
            for (auto& x : p) x += 2.0;

    auto ps = init_params(c, 8);
    const Tensor a = predict_velocity(ps, c, z, 0.6, views);
    const Tensor b = predict_velocity(ps, c, z, 0.6, shifted);
    CHECK(rel_l2(b, a) >= 1e-3);

    c.image_rope = false;
    const Tensor a0 = predict_velocity(ps, c, z, 0.6, views);
    const Tensor b0 = predict_velocity(ps, c, z, 0.6, shifted);
    CHECK(rel_l2(b0, a0) == 0.0);
}

TEST_CASE("dual block with no images is voxel self-attention") {
    const ModelConfig c = tiny_config();
    auto ps = init_params(c, 9);
    Rng rng(2);
    Tape t(false);
    TokenStream vox;
    vox.tokens = t.constant(num::randn({8, 12}, 1.0, rng));
    vox.coords = voxel_token_coords(c);
    vox.null.assign(8, 0);
    vox.phases = tiled_rope_phases(vox.coords, vox.null, c);
    std::vector<TokenStream> none;
    ForwardTrace tr;
    tr.enabled = true;
    dual_block(t, ps, c, 0, vox, none, &tr);
    REQUIRE(tr.sites.size() == 1);
    CHECK(tr.sites[0].map.shape() == num::Shape{2, 8, 8});
    CHECK(vox.tokens.shape() == num::Shape{8, 12});
}

TEST_CASE("fm_loss degenerate path and oracle") {
    const ModelConfig c = tiny_config();
    auto ps = init_params(c, 10);
    Rng rng(3);
    const Tensor z = num::randn({8, 8}, 1.0, rng);
    const auto views = random_views(1, rng);
    for (double t : {0.0, 0.25, 1.0}) {
        Tape tape(false);
        const double loss = fm_loss(tape, ps, c, z, z, t, views).value().item();
        const Tensor f = predict_velocity(ps, c, z, t, views);
        double m = 0;
        for (double v : f.values()) m += v * v;
        CHECK(loss == doctest::Approx(m / static_cast<double>(f.numel())).epsilon(1e-12));
    }
    Tape tape(false);
    CHECK_THROWS_AS(fm_loss(tape, ps, c, z, num::randn({8, 4}, 1.0, rng), 0.5, views), ValidationError);
}

TEST_CASE("full tiny model gradient matches finite differences") {
    const ModelConfig c = tiny_config();
    auto ps = init_params(c, 11);
    Rng rng(13);
    randomize(ps, rng, 0.1);
    const Tensor zv = num::randn({8, 8}, 1.0, rng), zg = num::randn({8, 8}, 1.0, rng);
    const auto views = std::vector<ImagePatches>{random_view(rng)};
    const auto res = num::grad_check_report(
        [&](Tape& t, ParamStore& p) { return fm_loss(t, p, c, zv, zg, 0.37, views); }, ps, 1e-5);
    INFO("worst " << res.worst_param << "[" << res.worst_index << "] analytic " << res.analytic << " numeric " << res.numeric);
    CHECK(res.max_rel_error < 1e-4);
}

TEST_CASE("train_step is deterministic and lr = 0 freezes parameters") {
    const ModelConfig c = tiny_config();
    Rng data(14);
    PreparedSample s;
    s.z_v = num::randn({8, 8}, 0.5, data);
    s.z_gt = num::randn({8, 8}, 0.5, data);
    s.views = random_views(2, data);

    auto p1 = init_params(c, 5), p2 = init_params(c, 5);
    num::AdamW opt;
    Rng r1(77), r2(77);
    for (int i = 0; i < 3; ++i) CHECK(train_step(s, p1, c, opt, r1) == train_step(s, p2, c, opt, r2));
    for (const auto& [name, p] : p1) CHECK(p.value == p2.get(name).value);
    CHECK(p1.step == 3);

    auto frozen = init_params(c, 5);
    const auto before = init_params(c, 5);
    num::AdamW zero;
    zero.lr = 0.0;
    zero.weight_decay = 0.01;
    Rng r3(1);
    train_step(s, frozen, c, zero, r3);
    for (const auto& [name, p] : frozen) CHECK(p.value == before.get(name).value);
}

TEST_CASE("train_step reduces the loss on a fixed sample") {
    const ModelConfig c = tiny_config();
    Rng data(15);
    PreparedSample s;
    s.z_v = num::randn({8, 8}, 0.5, data);
    s.z_gt = num::randn({8, 8}, 0.5, data);
    s.views = random_views(1, data);
    auto ps = init_params(c, 6);
    num::AdamW opt;
    opt.lr = 3e-3;
    Rng rng(1);
    double first = 0, last = 0;
    for (int i = 0; i < 300; ++i) {
        const double l = train_step(s, ps, c, opt, rng);
        if (i < 20) first += l;
        if (i >= 280) last += l;
    }
    CHECK(last < 0.5 * first);
}

TEST_CASE("collapse score") {
    CHECK(collapse_score(Tensor({3, 4}, 0.25)) == 1.0);
    Tensor one_hot({3, 4});
    one_hot.at(0, 1) = one_hot.at(1, 0) = one_hot.at(2, 3) = 1.0;
    CHECK(collapse_score(one_hot) == 0.0);
    CHECK(collapse_score(Tensor({1, 4}, std::vector<double>{0.5, 0.5, 0, 0})) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(collapse_score(Tensor({2, 1}, 1.0)) == 1.0);
    CHECK_THROWS_AS(collapse_score(Tensor({1, 3}, 0.5)), ValidationError);
    CHECK_THROWS_AS(collapse_score(Tensor({1, 2}, std::vector<double>{1.5, -0.5})), ValidationError);

    Tensor m({2, 1, 2}, std::vector<double>{1, 0, 0, 1});
    const Tensor avg = mean_over_heads(m);
    CHECK(avg.shape() == num::Shape{1, 2});
    CHECK(avg[0] == 0.5);
}
