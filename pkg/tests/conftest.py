import numpy as np
import pytest

from artmanip import render, scene


@pytest.fixture(scope="session")
def drawer():
    return scene.build_object("drawer", 7)


@pytest.fixture(scope="session")
def door():
    return scene.build_object("door", 3)


@pytest.fixture(scope="session")
def drawer_view(drawer):
    # camera seed 1 gives a frontal view of drawer seed 7
    for cam_seed in range(20):
        view = render.render(
            drawer,
            cam=render.sample_camera(cam_seed),
            intrinsics=render.make_intrinsics(224, 224),
        )
        if (view.part_id == 1).sum() > 200:
            return view
    raise RuntimeError("no frontal drawer view found")


@pytest.fixture(scope="session")
def door_view(door):
    from artmanip import episodes

    rng = np.random.default_rng(5)
    for cam_seed in range(30):
        view = render.render(
            door,
            cam=render.sample_camera(cam_seed),
            intrinsics=render.make_intrinsics(224, 224),
        )
        if episodes.pullable_fraction(door, view, 0) >= 0.5:
            return view
    raise RuntimeError("no workable door view found")


@pytest.fixture()
def unit_box():
    """A single fixed unit cube centered at the origin (no joints)."""
    part = scene.PartGeometry(
        triangles=scene.box_triangles((0, 0, 0), (0.5, 0.5, 0.5)),
        part_id=0,
        movable=False,
    )
    return scene.ArticulatedObject(category="door", parts=(part,), joints=())
