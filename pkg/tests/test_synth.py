import json
import math

import numpy as np
import pytest

from oracles import component_count, pt_seg
from rootextract import synth
from rootextract.evaluate import score


def brute_tube_mask(dims, a, b, r, gaps=()):
    """Voxel-by-voxel distance test against one straight segment."""
    nx, ny, nz = dims
    out = np.zeros((nz, ny, nx), dtype=bool)
    length = math.dist(a, b)
    for z in range(nz):
        for y in range(ny):
            for x in range(nx):
                p = (x, y, z)
                if pt_seg(p, a, b) > r:
                    continue
                t = sum((pi - ai) * (bi - ai) for pi, ai, bi in zip(p, a, b)) / (length * length)
                arc = min(1.0, max(0.0, t)) * length
                if any(g0 <= arc < g1 for g0, g1 in gaps):
                    continue
                out[z, y, x] = True
    return out


@pytest.mark.parametrize("gap", [0.0, 4.0])
def test_tube_voxels_match_distance_oracle(gap):
    spec = synth.straight_tube_spec(24, radius=2.5, length=18, gap=gap)
    vol, _ = synth.generate(spec)
    tube = spec.tubes[0]
    want = brute_tube_mask(spec.dims, tube.points[0], tube.points[1], 2.5, tube.gaps)
    assert np.array_equal(vol.data == 1.0, want)
    assert set(np.unique(vol.data)) <= {0.0, 1.0}


def test_gapped_tube_splits_in_two(gapped_tube):
    vol, _ = gapped_tube
    mask = vol.data >= 0.5
    assert component_count(mask) == 2
    # the empty slab is exactly the 4 gap slices
    empty = [z for z in range(64) if not mask[z].any()]
    assert [z for z in empty if 2 < z < 62] == [30, 31, 32, 33]


def test_blobs_are_disconnected(noisy_tube):
    vol, _ = noisy_tube
    assert component_count(vol.data >= 0.5) == 3
    assert vol[(50, 45, 20)] == pytest.approx(0.8)


def test_y_junction_ground_truth(y_junction):
    vol, g = y_junction
    assert g.is_tree() and g.branch_count == 4
    assert g.root.pos == (31.0, 31.0, 2.0)
    assert sum(len(n.children) == 2 for n in g.nodes()) == 1
    assert len(g.leaves()) == 2
    assert component_count(vol.data >= 0.5) == 1


def test_ground_truth_scores_one_against_itself(y_junction):
    _, g = y_junction
    assert score(g, g, 1.0, 5.0).f1 == 1.0


def test_noise_is_seeded():
    spec = synth.straight_tube_spec(16, length=10)
    spec.noise = 0.2
    a, _ = synth.generate(spec, seed=3)
    b, _ = synth.generate(spec, seed=3)
    c, _ = synth.generate(spec, seed=4)
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)
    assert a.data.min() >= 0.0 and a.data.max() <= 1.0


def test_generation_is_deterministic_without_noise():
    a, ga = synth.generate(synth.y_junction_spec(32))
    b, gb = synth.generate(synth.y_junction_spec(32))
    assert a.data.tobytes() == b.data.tobytes()
    assert ga.structurally_equal(gb)


def test_out_of_bounds_centerline_rejected():
    spec = synth.PhantomSpec((16, 16, 16), [synth.Tube([[8, 8, 2], [8, 8, 16]], 2.0)])
    with pytest.raises(synth.PhantomError, match="outside"):
        synth.generate(spec)


@pytest.mark.parametrize("raw,match", [
    ({"tubes": []}, "malformed"),
    ({"dims": [8, 8, 8], "tubes": [{"radius": 1}]}, "malformed"),
    ({"dims": [8, 8, 8], "tubes": [{"points": [[1, 1, 1]]}]}, "two points"),
    ({"dims": [8, 8, 8], "tubes": [{"points": [[1, 1, 1], [2, 2, 2], [3, 3, 3]], "radius": [1]}]}, "radii"),
    ({"dims": [8, 8, 8]}, "no tubes"),
    ({"dims": [0, 8, 8], "tubes": [{"points": [[0, 1, 1], [0, 2, 2]]}]}, "positive"),
])
def test_malformed_specs(raw, match):
    with pytest.raises(synth.PhantomError, match=match):
        synth.generate(synth.PhantomSpec.from_dict(raw))


def test_spec_json_round_trip(tmp_path):
    spec = synth.straight_tube_spec(32, length=28, gap=2)
    spec.blobs = [synth.Blob([4, 4, 4], 2.0, 0.7)]
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec.to_dict()))
    back = synth.load_spec(path)
    assert back.to_dict() == spec.to_dict()
    assert np.array_equal(synth.generate(back)[0].data, synth.generate(spec)[0].data)


def test_polyline_tube_with_per_segment_radii():
    spec = synth.PhantomSpec((20, 20, 20), [synth.Tube([[10, 10, 2], [10, 10, 9], [14, 10, 16]], [2.0, 1.0])])
    vol, g = synth.generate(spec)
    assert [n.radius for n in g.nodes()] == [2.0, 2.0, 1.0]
    assert vol[(10, 12, 5)] == 1.0 and vol[(12, 12, 12)] == 0.0
