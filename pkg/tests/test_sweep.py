import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import V_DD
from dispel.dataset import ALL_COLUMNS, FEATURE_COLUMNS, load_features_csv
from dispel.design_flow import generate_netlist
from dispel.errors import ParameterError
from dispel.interconnect import scale_wire_resistance
from dispel.sweep import (DevicePair, EFPoint, ResultStore, SweepConfig,
                          build_library_cached, ef_sweep, emit_dataset,
                          interconnect_features, min_edp, pareto_frontier,
                          write_frontier_csv, write_results_csv)


def brute_force_frontier(points):
    """O(n^2) dominance with the same dedupe/tie-break semantics."""
    dedup = {}
    for p in points:
        key = (p.f_ach, p.energy)
        old = dedup.get(key)
        if old is None or (p.area, p.v_dd) < (old.area, old.v_dd):
            dedup[key] = p
    pts = list(dedup.values())
    keep = []
    for p in pts:
        if not any((q.f_ach >= p.f_ach and q.energy <= p.energy
                    and (q.f_ach > p.f_ach or q.energy < p.energy))
                   for q in pts if q is not p):
            keep.append(p)
    return sorted(keep, key=lambda p: (p.f_ach, p.energy, p.area, p.v_dd))


def _pt(f, e, a=1.0, v=0.7, tag=""):
    return EFPoint(f_ach=f, energy=e, area=a, v_dd=v, provenance=tag)


class TestParetoFrontier:
    def test_single_point(self):
        p = _pt(1.0, 2.0)
        assert pareto_frontier([p]) == [p]

    def test_documented_example(self):
        pts = [_pt(1.0, 2.0), _pt(1.0, 3.0), _pt(2.0, 2.5)]
        front = pareto_frontier(pts)
        assert [(p.f_ach, p.energy) for p in front] == [(1.0, 2.0), (2.0, 2.5)]

    def test_idempotent(self):
        rng = random.Random(0)
        pts = [_pt(rng.uniform(1, 5), rng.uniform(1, 5)) for _ in range(60)]
        once = pareto_frontier(pts)
        assert pareto_frontier(once) == once

    def test_matches_brute_force_1000_sets(self):
        rng = random.Random(42)
        for trial in range(1000):
            n = rng.randint(1, 40)
            pts = [_pt(round(rng.uniform(1, 4), 2), round(rng.uniform(1, 4), 2),
                       a=round(rng.uniform(1, 9), 2), v=rng.choice((0.5, 0.7)))
                   for _ in range(n)]
            assert pareto_frontier(pts) == brute_force_frontier(pts), trial

    def test_energy_nondecreasing_along_frontier(self):
        rng = random.Random(7)
        pts = [_pt(rng.uniform(1, 5), rng.uniform(1, 5)) for _ in range(200)]
        front = pareto_frontier(pts)
        es = [p.energy for p in front]
        assert es == sorted(es)

    def test_empty_rejected(self):
        with pytest.raises(ParameterError):
            pareto_frontier([])

    @given(st.lists(st.tuples(st.floats(0.5, 5, allow_nan=False),
                              st.floats(0.5, 5, allow_nan=False)), min_size=1,
                    max_size=30))
    @settings(max_examples=80, deadline=None)
    def test_property_no_frontier_point_dominated(self, raw):
        pts = [_pt(f, e) for f, e in raw]
        front = pareto_frontier(pts)
        for p in front:
            for q in pts:
                assert not (q.f_ach >= p.f_ach and q.energy <= p.energy
                            and (q.f_ach > p.f_ach or q.energy < p.energy))


TINY = SweepConfig(vdd_grid=(V_DD,), ftar_coarse=(2.0, 4.0, 6.0),
                   ftar_fine_step=0.5, ftar_fine_span=0.5, ftar_auto=False,
                   moves_per_cell=40, seed=9)


@pytest.fixture(scope="module")
def tiny_netlist():
    return generate_netlist(150, 8, 2.2, 0.6, seed=21)


@pytest.fixture(scope="module")
def tiny_sweep(stack, devices, tiny_netlist):
    store = ResultStore()
    points = ef_sweep(TINY, stack, devices, tiny_netlist, store)
    return points, store


class TestEfSweep:
    def test_point_count_without_auto(self, tiny_sweep):
        points, _ = tiny_sweep
        # |vdd| * (|coarse| + |fine|); fine = 2*span/step + 1 points
        fine_n = int(round(2 * TINY.ftar_fine_span / TINY.ftar_fine_step)) + 1
        assert len(points) == len(TINY.vdd_grid) * (len(TINY.ftar_coarse) + fine_n)

    def test_every_point_resolvable(self, tiny_sweep):
        points, store = tiny_sweep
        for p in points:
            res = store.results[p.provenance]
            assert res.f_ach_GHz == p.f_ach
            assert res.energy_pJ == p.energy
            assert store.lib_of[p.provenance] in store.libraries
            assert store.stack_of[p.provenance] in store.stacks

    def test_single_point_grid(self, stack, devices, tiny_netlist):
        cfg = SweepConfig(vdd_grid=(V_DD,), ftar_coarse=(3.0,), ftar_fine_step=0.0,
                          ftar_fine_span=0.0, ftar_auto=False, moves_per_cell=40,
                          seed=9)
        pts = ef_sweep(cfg, stack, devices, tiny_netlist, ResultStore())
        assert len(pts) == 1

    def test_identity_multiplier_bit_exact(self, stack, devices, tiny_netlist):
        a = ef_sweep(TINY, stack, devices, tiny_netlist, ResultStore())
        b = ef_sweep(TINY, scale_wire_resistance(stack, 1.0), devices,
                     tiny_netlist, ResultStore())
        assert a == b

    def test_vdd_raises_energy_at_fixed_speed(self, stack, devices, tiny_netlist):
        """Above the optimal supply the same target costs more energy."""
        lo = SweepConfig(vdd_grid=(0.6,), ftar_coarse=(1.5,), ftar_fine_step=0.0,
                         ftar_fine_span=0.0, ftar_auto=False, moves_per_cell=40, seed=9)
        hi = SweepConfig(vdd_grid=(0.9,), ftar_coarse=(1.5,), ftar_fine_step=0.0,
                         ftar_fine_span=0.0, ftar_auto=False, moves_per_cell=40, seed=9)
        p_lo = ef_sweep(lo, stack, devices, tiny_netlist, ResultStore())[0]
        p_hi = ef_sweep(hi, stack, devices, tiny_netlist, ResultStore())[0]
        assert p_hi.energy > p_lo.energy


class TestEmitDataset:
    def test_schema(self, tiny_sweep):
        points, store = tiny_sweep
        rows = emit_dataset(points, store)
        assert rows
        for features, e, a in rows:
            assert len(features) == 41
            assert e > 0 and a > 0
        assert len(ALL_COLUMNS) == 43
        assert "c_v1" not in " ".join(ALL_COLUMNS).lower()  # no via C columns
        assert not any("c_v" in c for c in ALL_COLUMNS)

    def test_only_frontier_rows(self, tiny_sweep):
        points, store = tiny_sweep
        rows = emit_dataset(points, store)
        frontier = pareto_frontier(points)
        assert len(rows) == len(frontier)
        f_achs = sorted(r[0][FEATURE_COLUMNS.index("f_ach_GHz")] for r in rows)
        assert f_achs == sorted(p.f_ach for p in frontier)

    def test_csv_round_trip(self, tiny_sweep, tmp_path):
        from dispel.dataset import save_features_csv
        points, store = tiny_sweep
        rows = emit_dataset(points, store)
        path = tmp_path / "features.csv"
        save_features_csv(rows, path, "check")
        feats, energies, areas = load_features_csv(path)
        assert len(feats) == len(rows)
        assert feats[0] == rows[0][0]

    def test_interconnect_features(self, stack):
        feats = interconnect_features(stack)
        assert len(feats) == 9
        scaled = scale_wire_resistance(stack, 2.0)
        feats2 = interconnect_features(scaled)
        # R columns double, C columns unchanged, via R unchanged (flag off)
        assert feats2[0] == pytest.approx(2 * feats[0], rel=1e-12)
        assert feats2[1] == feats[1]
        assert feats2[6] == feats[6]


def test_result_csvs_deterministic(tiny_sweep, tmp_path):
    points, store = tiny_sweep
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_results_csv(store, a, "tag")
    write_results_csv(store, b, "tag")
    assert a.read_bytes() == b.read_bytes()
    fa, fb = tmp_path / "fa.csv", tmp_path / "fb.csv"
    write_frontier_csv(points, fa, "tag")
    write_frontier_csv(points, fb, "tag")
    assert fa.read_bytes() == fb.read_bytes()


def test_min_edp():
    pts = [_pt(2.0, 4.0), _pt(4.0, 6.0), _pt(1.0, 0.9)]
    edp, p = min_edp(pts)
    assert p.f_ach == 1.0
    assert edp == pytest.approx(0.9, rel=1e-12)
