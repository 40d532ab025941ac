import math

import numpy as np
import pytest

from softgrip.errors import ConsistencyError, StructuralError
from softgrip.export import (
    DEFAULT_LARGE_BELLOWS,
    DEFAULT_SMALL_BELLOWS,
    BellowsGeometry,
    GripperDescription,
    Joint,
    Link,
    build_description,
    description_fk,
    discretize_bellows,
    export_description,
    pose_chain,
    read_description,
    write_description,
)
from softgrip.kinematics import JointAngles, JointLimits, forward_kinematics, LinkGeometry
from softgrip.transforms import hom, rot_z

from conftest import random_angles


def rot_z4(a):
    return hom(rot_z(a))


class TestSphereChain:
    def test_fraction_spacing(self):
        chain = discretize_bellows(DEFAULT_LARGE_BELLOWS, "j")
        assert chain.fractions == (0.0, 0.25, 0.5, 0.75, 1.0)
        kinds = [a.kind for a in chain.attachments]
        assert kinds == ["lower", "proportional", "proportional", "proportional", "upper"]
        assert chain.radii == (DEFAULT_LARGE_BELLOWS.radius,) * 5

    def test_minimum_sphere_count(self):
        with pytest.raises(ValueError):
            discretize_bellows(DEFAULT_LARGE_BELLOWS, "j", n=2)

    def test_seven_spheres(self):
        chain = discretize_bellows(DEFAULT_SMALL_BELLOWS, "j", n=7)
        assert len(chain.fractions) == 7
        assert chain.fractions[1] == pytest.approx(1.0 / 6.0)


class TestPoseChain:
    GEOM = BellowsGeometry(length=40.0, radius=10.0, mount=(5.0, -12.0, 0.0))

    def test_zero_angle_collinear(self):
        chain = discretize_bellows(self.GEOM, "j")
        centers = pose_chain(chain, 0.0, np.eye(4), np.eye(4))
        expected_x = 5.0 + np.array(chain.fractions) * 40.0
        np.testing.assert_allclose(centers[:, 0], expected_x)
        np.testing.assert_allclose(centers[:, 1], -12.0)
        np.testing.assert_allclose(centers[:, 2], 0.0)

    def test_matches_rotation_matrix_oracle(self):
        chain = discretize_bellows(self.GEOM, "j")
        q = 0.6
        lower = np.eye(4)
        upper = rot_z4(q)
        centers = pose_chain(chain, q, lower, upper)
        mount = np.array([5.0, -12.0, 0.0])
        for f, c in zip(chain.fractions, centers):
            a = f * q
            Rf = np.array(
                [
                    [math.cos(a), -math.sin(a), 0.0],
                    [math.sin(a), math.cos(a), 0.0],
                    [0.0, 0.0, 1.0],
                ]
            )
            np.testing.assert_allclose(c, Rf @ (mount + [f * 40.0, 0.0, 0.0]), atol=1e-12)

    def test_endpoints_ride_their_links(self):
        chain = discretize_bellows(self.GEOM, "j")
        for q in (0.0, 0.3, 0.9, 1.4):
            lower = np.eye(4)
            upper = rot_z4(q)
            centers = pose_chain(chain, q, lower, upper)
            # bottom sphere fixed in the lower frame, top sphere in the upper frame
            np.testing.assert_allclose(centers[0], [5.0, -12.0, 0.0], atol=1e-12)
            top_local = np.linalg.inv(upper)[:3, :3] @ centers[-1]
            np.testing.assert_allclose(top_local, [45.0, -12.0, 0.0], atol=1e-12)

    def test_mirror_symmetry_in_angle(self):
        # with the mount on the joint axis, +q and -q arcs mirror across y=0
        geom = BellowsGeometry(length=40.0, radius=10.0, mount=(5.0, 0.0, 0.0))
        chain = discretize_bellows(geom, "j")
        plus = pose_chain(chain, 0.5, np.eye(4), rot_z4(0.5))
        minus = pose_chain(chain, 0.5, np.eye(4), rot_z4(-0.5))
        np.testing.assert_allclose(plus[:, 0], minus[:, 0], atol=1e-12)
        np.testing.assert_allclose(plus[:, 1], -minus[:, 1], atol=1e-12)

    def test_frame_angle_mismatch_rejected(self):
        chain = discretize_bellows(self.GEOM, "j")
        with pytest.raises(ConsistencyError):
            pose_chain(chain, 0.2, np.eye(4), rot_z4(0.5))


class TestBuildDescription:
    def test_counts(self):
        d = build_description()
        assert len(d.links) == 9
        assert len(d.joints) == 8
        assert sum(len(l.spheres) for l in d.links) == 40
        assert sum(1 for j in d.joints if j.type == "revolute") == 6
        assert sum(1 for j in d.joints if j.type == "fixed") == 2

    def test_limits_written_exactly(self):
        limits = JointLimits()
        d = build_description(limits=limits)
        by_name = {j.name: j for j in d.joints}
        assert by_name["finger_a_root"].limits == tuple(limits.theta1)
        assert by_name["finger_a_distal"].limits == tuple(limits.theta2)
        assert by_name["finger_a_lateral"].limits == tuple(limits.phi)

    def test_description_fk_matches_core_fk(self, rng):
        d = build_description()
        geom_a = LinkGeometry()
        geom_b = LinkGeometry(mirrored=True)
        limits = JointLimits()
        for _ in range(100):
            q = random_angles(rng, limits)
            values = {
                "finger_a_lateral": q.phi,
                "finger_a_root": q.theta1,
                "finger_a_distal": q.theta2,
                "finger_b_lateral": q.phi,
                "finger_b_root": q.theta1,
                "finger_b_distal": q.theta2,
            }
            tip_a = description_fk(d, "finger_a_tip_link", values)[:3, 3]
            tip_b = description_fk(d, "finger_b_tip_link", values)[:3, 3]
            np.testing.assert_allclose(tip_a, forward_kinematics(q, geom_a), atol=1e-9)
            np.testing.assert_allclose(tip_b, forward_kinematics(q, geom_b), atol=1e-9)

    def test_mirrored_finger_tip_is_z_flip(self):
        d = build_description()
        q = JointAngles(0.4, 0.2, 0.3)
        values = {
            "finger_a_lateral": q.phi,
            "finger_a_root": q.theta1,
            "finger_a_distal": q.theta2,
            "finger_b_lateral": q.phi,
            "finger_b_root": q.theta1,
            "finger_b_distal": q.theta2,
        }
        a = description_fk(d, "finger_a_tip_link", values)[:3, 3]
        b = description_fk(d, "finger_b_tip_link", values)[:3, 3]
        np.testing.assert_allclose(b, a * [1.0, 1.0, -1.0], atol=1e-12)

    def test_posed_chain_angles_bake_into_spheres(self):
        flexed = build_description(angles_a=JointAngles(0.5, 0.4, 0.0))
        straight = build_description()
        sp_f = {s.name: s for l in flexed.links for s in l.spheres}
        sp_s = {s.name: s for l in straight.links for s in l.spheres}
        assert sp_f["finger_a_distal_bellows_2"].center != sp_s["finger_a_distal_bellows_2"].center
        # finger B was not reposed
        assert sp_f["finger_b_distal_bellows_2"].center == sp_s["finger_b_distal_bellows_2"].center

    def test_validation_catches_bad_trees(self):
        links = (Link("a"), Link("b"), Link("b"))
        with pytest.raises(StructuralError):
            GripperDescription("x", links, ()).validate()
        links = (Link("a"), Link("b"), Link("c"))
        joints = (Joint("j1", "fixed", "a", "b"), Joint("j2", "fixed", "c", "b"))
        with pytest.raises(StructuralError):
            GripperDescription("x", links, joints).validate()
        joints = (Joint("j1", "fixed", "a", "missing"),)
        with pytest.raises(StructuralError):
            GripperDescription("x", links, joints).validate()


class TestSerialisation:
    def test_roundtrip_identity(self):
        d = build_description(angles_a=JointAngles(0.3, 0.2, 0.1), angles_b=JointAngles(0.1, 0.0, 0.4))
        text = write_description(d)
        back = read_description(text)
        assert back == d

    def test_deterministic_output(self):
        d = build_description()
        assert write_description(d) == write_description(d)

    def test_file_roundtrip(self, tmp_path):
        d = build_description()
        path = tmp_path / "gripper.urdf"
        export_description(path, d)
        text = path.read_text(encoding="utf-8")
        assert text.startswith("<?xml")
        assert read_description(text) == d

    def test_float_precision_survives(self):
        d = build_description(angles_a=JointAngles(0.1234567890123, 0.7, 0.3))
        back = read_description(write_description(d))
        sp = {s.name: s for l in d.links for s in l.spheres}
        sp_back = {s.name: s for l in back.links for s in l.spheres}
        for name, s in sp.items():
            assert sp_back[name].center == s.center
            assert sp_back[name].radius == s.radius
