#include "doctest.h"
#include "helmsweep/mesh.hpp"

using namespace helmsweep;

TEST_CASE("build_mesh adds layer cells outside the box") {
  const double h = 1.0 / 256;
  const Mesh m = build_mesh(2, 256, h, AbsorbingLayerSpec::pml(4));
  CHECK(m.axes[0].cells() == 264);
  CHECK(m.shape()[0] == 263);
  CHECK(m.shape()[1] == 263);
  CHECK(m.shape()[2] == 1);
  CHECK(m.unknowns() == 263u * 263u);

  const Mesh plain = build_mesh(2, 8, 0.125, AbsorbingLayerSpec::none());
  CHECK(plain.axes[0].cells() == 8);
  CHECK(plain.shape()[0] == 7);

  const Mesh cube = build_mesh(3, 64, 1.0 / 64, AbsorbingLayerSpec::pml(3));
  for (int a = 0; a < 3; ++a) CHECK(cube.axes[a].cells() == 70);
}

TEST_CASE("build_mesh validates its input") {
  CHECK_THROWS_AS(build_mesh(2, 8, 0.0, AbsorbingLayerSpec::none()), InvalidArgument);
  CHECK_THROWS_AS(build_mesh(2, 8, -1.0, AbsorbingLayerSpec::none()), InvalidArgument);
  CHECK_THROWS_AS(build_mesh(4, 8, 0.1, AbsorbingLayerSpec::none()), InvalidArgument);
  AbsorbingLayerSpec bad = AbsorbingLayerSpec::pml(4);
  bad.strength = 0.0;
  CHECK_THROWS_AS(build_mesh(2, 8, 0.1, bad), InvalidArgument);
}

TEST_CASE("default PML strength is five per cell") {
  CHECK(default_pml_strength(3) == 15.0);
  CHECK(default_pml_strength(4) == 20.0);
  CHECK(default_pml_strength(5) == 25.0);
  CHECK(AbsorbingLayerSpec::pml(4).strength == 20.0);
  CHECK(AbsorbingLayerSpec::sponge().width == 36);
}

TEST_CASE("node coordinates start at the physical box") {
  const Mesh m = build_mesh(1, {8}, 0.5, {AxisLayers{AbsorbingLayerSpec::pml(2), AbsorbingLayerSpec::pml(2)}});
  const MeshAxis& ax = m.axes[0];
  CHECK(ax.lo_thickness() == doctest::Approx(1.0));
  CHECK(ax.node_x(2) == doctest::Approx(0.0));
  CHECK(ax.node_x(0) == doctest::Approx(-1.0));
  CHECK(ax.depth_lo(-0.75) == doctest::Approx(0.75));
  CHECK(ax.depth_lo(1.0) == doctest::Approx(0.0));
  CHECK(ax.depth_hi(ax.node_x(12)) == doctest::Approx(1.0));
}

TEST_CASE("coarsening keeps PML cells and merges interior cells") {
  const Mesh m = build_mesh(2, 256, 1.0 / 256, AbsorbingLayerSpec::pml(4));
  const CoarseMesh c = coarsen_mesh(m);
  CHECK(c.mesh.axes[0].cells() == 136);
  CHECK(c.mesh.level == 1);

  const Mesh plain = build_mesh(2, 8, 0.125, AbsorbingLayerSpec::none());
  const CoarseMesh pc = coarsen_mesh(plain);
  CHECK(pc.mesh.axes[0].cells() == 4);
  for (double w : pc.mesh.axes[0].width) CHECK(w == doctest::Approx(0.25));
  for (bool r : pc.map.axes[0].refined) CHECK(r);
}

TEST_CASE("fine-point map of a small PML axis") {
  const Mesh m = build_mesh(1, {4}, 1.0, {AxisLayers{AbsorbingLayerSpec::pml(2), AbsorbingLayerSpec::pml(2)}});
  const CoarseMesh c = coarsen_mesh(m);
  CHECK(c.map.axes[0].fine_point == std::vector<int>{0, 1, 2, 4, 6, 7, 8});
  CHECK(c.map.axes[0].refined == std::vector<bool>{false, false, true, true, false, false});
}

TEST_CASE("coarsening preserves length and ordering") {
  for (int w : {0, 3, 4}) {
    const AbsorbingLayerSpec layer = w ? AbsorbingLayerSpec::pml(w) : AbsorbingLayerSpec::none();
    const Mesh m = build_mesh(2, {12, 20}, 0.1, {AxisLayers{layer, layer}, AxisLayers{layer, layer}});
    const CoarseMesh c = coarsen_mesh(m);
    for (int a = 0; a < 2; ++a) {
      CHECK(c.mesh.axes[a].length() == doctest::Approx(m.axes[a].length()));
      const auto& fp = c.map.axes[a].fine_point;
      CHECK(fp.front() == 0);
      CHECK(fp.back() == m.axes[a].cells());
      for (std::size_t i = 1; i < fp.size(); ++i) CHECK(fp[i] > fp[i - 1]);
    }
  }
}

TEST_CASE("sponge cells are coarsened") {
  const Mesh m = build_mesh(2, 16, 1.0 / 16, AbsorbingLayerSpec::sponge(6, 1.0));
  const CoarseMesh c = coarsen_mesh(m);
  CHECK(c.mesh.axes[0].cells() == 14);
  CHECK(c.mesh.axes[0].lo.width == 3);
}

TEST_CASE("odd interior cell count is rejected naming the axis") {
  const Mesh m = build_mesh(2, {8, 7}, 0.1,
                            {AxisLayers{AbsorbingLayerSpec::pml(2), AbsorbingLayerSpec::pml(2)},
                             AxisLayers{AbsorbingLayerSpec::pml(2), AbsorbingLayerSpec::pml(2)}});
  try {
    coarsen_mesh(m);
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("y") != std::string::npos);
  }
}

TEST_CASE("linear index is x fastest") {
  const std::array<int, 3> s{4, 3, 2};
  CHECK(linear_index(s, 1, 0, 0) == 1);
  CHECK(linear_index(s, 0, 1, 0) == 4);
  CHECK(linear_index(s, 0, 0, 1) == 12);
}
