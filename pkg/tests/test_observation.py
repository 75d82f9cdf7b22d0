import numpy as np
import pytest

from hexfray import engine, observation as obs
from hexfray.engine import BLUE, RED, GameState, ScenarioParams, Unit, generate_scenario, make_state
from hexfray.hexgrid import Board, HexCoord, Terrain, border_sector, distance, uniform_board


def state_with(units, board=None, max_phases=30):
    return make_state(board or uniform_board(10, 10), units, max_phases)


def random_state(seed, width=10, height=10):
    return generate_scenario(
        ScenarioParams(width=width, height=height, n_blue=3, n_red=3, n_cities=1), seed
    )


class TestEncodeFull:
    def test_empty_board_unit_channels_zero(self):
        s = make_state(uniform_board(6, 6), [], 10)
        t = obs.encode_full(s, None)
        assert t.shape == (17, 6, 6)
        assert not t[0:9].any()
        assert t[9].all()  # all clear terrain

    def test_on_move_mask_single_entry(self):
        s = random_state(3)
        t = obs.encode_full(s, s.cursor)
        mask = t[obs.CH_ON_MOVE]
        assert mask.sum() == 1.0
        u = s.unit(s.cursor)
        assert mask[u.pos.row, u.pos.col] == 1.0

    def test_blue_strength_sum_matches_state(self):
        for seed in range(20):
            s = random_state(seed)
            t = obs.encode_full(s, s.cursor)
            expected = sum(u.strength for u in s.living(BLUE))
            assert t[1:4].sum() * 100 == pytest.approx(expected, abs=1e-9)
            expected_red = sum(u.strength for u in s.living(RED))
            assert t[4:7].sum() * 100 == pytest.approx(expected_red, abs=1e-9)

    def test_broadcast_channels_constant(self):
        s = random_state(5)
        t = obs.encode_full(s, s.cursor)
        for ch in obs.BROADCAST_CHANNELS:
            assert np.ptp(t[ch]) == 0.0

    def test_dead_acting_unit_raises(self):
        s = random_state(1)
        with pytest.raises(obs.StateError):
            obs.encode_full(s, 999)

    def test_terrain_one_hot(self):
        s = random_state(7)
        t = obs.encode_full(s, None)
        assert (t[9:13].sum(axis=0) == 1.0).all()


class TestCoarseAbstract:
    def test_zero_in_zero_out(self):
        assert not obs.coarse_abstract(np.zeros((17, 12, 9))).any()

    def test_20x20_blocks_of_4(self):
        rng = np.random.default_rng(0)
        t = rng.random((17, 20, 20))
        pooled = obs.coarse_abstract(t, 5)
        assert pooled.shape == (17, 5, 5)
        # independent nested-loop oracle
        for ch in range(13):
            for br in range(5):
                for bc in range(5):
                    block = t[ch, br * 4 : (br + 1) * 4, bc * 4 : (bc + 1) * 4]
                    assert pooled[ch, br, bc] == pytest.approx(block.sum(), abs=1e-12)

    def test_sum_channels_conserved_200_random(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            h = int(rng.integers(10, 34))
            w = int(rng.integers(10, 48))
            t = rng.random((17, h, w))
            pooled = obs.coarse_abstract(t, 5)
            for ch in range(13):
                assert abs(pooled[ch].sum() - t[ch].sum()) < 1e-9

    def test_broadcast_channels_mean_pooled(self):
        t = np.zeros((17, 11, 11))
        t[13] = 0.625
        t[16] = 1.0
        pooled = obs.coarse_abstract(t, 5)
        assert np.allclose(pooled[13], 0.625)
        assert np.allclose(pooled[16], 1.0)

    def test_k_too_large_raises(self):
        with pytest.raises(obs.ShapeError):
            obs.coarse_abstract(np.zeros((17, 4, 10)), 5)

    def test_shape_invariance(self):
        shapes = [(10, 10), (20, 20), (30, 45)]
        outs = [obs.coarse_abstract(np.ones((17, h, w)), 5).shape for h, w in shapes]
        assert outs == [(17, 5, 5)] * 3


class TestDecayWeight:
    def test_boundaries(self):
        spec = obs.DecaySpec(inner_radius=3, zero_distance=13)
        assert obs.decay_weight(0, spec) == 1.0
        assert obs.decay_weight(3, spec) == 1.0
        assert obs.decay_weight(13, spec) == 0.0
        assert obs.decay_weight(25, spec) == 0.0

    def test_midpoint_value(self):
        spec = obs.DecaySpec(inner_radius=3, zero_distance=13)
        assert obs.decay_weight(8, spec) == pytest.approx(0.5)

    def test_monotone_and_bounded(self):
        spec = obs.DecaySpec(inner_radius=3, zero_distance=13)
        ws = obs.decay_weight(np.arange(0, 30), spec)
        assert (np.diff(ws) <= 0).all()
        assert ((0 <= ws) & (ws <= 1)).all()

    def test_exactly_two_breakpoints(self):
        spec = obs.DecaySpec(inner_radius=4, zero_distance=11)
        ws = obs.decay_weight(np.arange(0, 20), spec)
        second_diff = np.diff(ws, 2)
        kinks = np.nonzero(np.abs(second_diff) > 1e-12)[0] + 1
        assert list(kinks) == [4, 11]

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            obs.DecaySpec(inner_radius=5, zero_distance=5)


def centered_7x7_state():
    units = [
        Unit(0, BLUE, engine.INFANTRY, 80.0, HexCoord(3, 3)),
        Unit(1, RED, engine.ARMOR, 60.0, HexCoord(4, 2)),
    ]
    return make_state(uniform_board(7, 7), units, 20)


class TestLocalEgocentric:
    def test_interior_crop_with_zero_far_field(self):
        s = centered_7x7_state()
        # inner 2 / zero 3 kills every far hex (all at distance >= 3)
        spec = obs.DecaySpec(inner_radius=2, zero_distance=3)
        t = obs.local_egocentric(s, 0, spec)
        full = obs.encode_full(s, 0)
        assert np.array_equal(t[0:13, 1:6, 1:6], full[0:13, 1:6, 1:6])
        border = np.ones((7, 7), dtype=bool)
        border[1:6, 1:6] = False
        assert not t[0:13][:, border].any()
        assert np.allclose(t[13:], full[13:, 0:1, 0:1])

    def test_single_far_source_lands_top_middle(self):
        units = [
            Unit(0, BLUE, engine.INFANTRY, 100.0, HexCoord(6, 10)),
            Unit(1, RED, engine.INFANTRY, 50.0, HexCoord(6, 2)),  # due north, d=8
        ]
        s = make_state(uniform_board(14, 14), units, 20)
        spec = obs.DecaySpec(inner_radius=3, zero_distance=13)
        t = obs.local_egocentric(s, 0, spec)
        red_kind = obs.CH_RED_KIND[engine.INFANTRY]
        w = obs.decay_weight(8, spec)
        assert t[red_kind, 0, 3] == pytest.approx(0.5 * w)
        cell = np.zeros((7, 7), dtype=bool)
        cell[0, 3] = True
        assert not t[red_kind][~cell].any()
        assert not t[obs.CH_RED_OCC][~cell].any()

    def test_shape_invariant_across_board_sizes(self):
        shapes = []
        for size in (10, 20, 30):
            units = [
                Unit(0, BLUE, engine.INFANTRY, 100.0, HexCoord(5, 5)),
                Unit(1, RED, engine.INFANTRY, 100.0, HexCoord(size - 2, size - 2)),
            ]
            s = make_state(uniform_board(size, size), units, 30)
            shapes.append(obs.local_egocentric(s, 0).shape)
        assert shapes == [(17, 7, 7)] * 3

    def test_far_field_completeness(self):
        for seed in (0, 4, 9):
            s = random_state(seed, width=12, height=11)
            uid = s.cursor
            spec = obs.DecaySpec(inner_radius=3, zero_distance=15)
            t = obs.local_egocentric(s, uid, spec)
            full = obs.encode_full(s, uid)
            center = s.unit(uid).pos
            # independent accumulation: walk every far hex, weight it by the
            # decay formula, and route it through border_sector
            expected = np.zeros((13, 7, 7))
            for h in s.board.all_hexes():
                if (
                    abs(h.row - center.row) <= 2
                    and abs(h.col - center.col) <= 2
                ):
                    continue
                d = distance(center, h)
                w = 1.0 if d <= 3 else max(0.0, (15 - d) / (15 - 3))
                wr, wc = border_sector(center, h, 3)
                expected[:, wr, wc] += full[0:13, h.row, h.col] * w
            border = np.ones((7, 7), dtype=bool)
            border[1:6, 1:6] = False
            got_border = t[0:13][:, border]
            want_border = expected[:, border]
            assert np.allclose(got_border, want_border, atol=1e-9)
            # channel totals over the border equal the far-hex weighted sums
            for ch in range(13):
                assert abs(t[ch][border].sum() - expected[ch][border].sum()) < 1e-9

    def test_off_board_interior_reads_as_water(self):
        units = [
            Unit(0, BLUE, engine.INFANTRY, 100.0, HexCoord(0, 0)),
            Unit(1, RED, engine.INFANTRY, 100.0, HexCoord(8, 8)),
        ]
        s = make_state(uniform_board(10, 10), units, 20)
        t = obs.local_egocentric(s, 0)
        water = obs.CH_TERRAIN[Terrain.WATER]
        # window rows/cols 1..2 are off-board (unit at the board corner)
        assert t[water, 1, 1] == 1.0 and t[water, 2, 1] == 1.0
        assert not t[0:12, 1, 1].any()
        # the unit's own cell is real terrain
        assert t[obs.CH_TERRAIN[Terrain.CLEAR], 3, 3] == 1.0

    def test_translation_consistency(self):
        # even column shifts preserve odd-q parity; rigid scene translation
        # counts as "away from edges" only while the decay support disk
        # (radius zero_distance - 1) stays fully on-board
        def scene(dc, dr):
            units = [
                Unit(0, BLUE, engine.INFANTRY, 90.0, HexCoord(14 + dc, 14 + dr)),
                Unit(1, RED, engine.ARMOR, 70.0, HexCoord(18 + dc, 12 + dr)),
                Unit(2, RED, engine.INFANTRY, 50.0, HexCoord(10 + dc, 17 + dr)),
            ]
            return make_state(uniform_board(40, 40), units, 30)

        spec = obs.DecaySpec(inner_radius=3, zero_distance=12)
        base = obs.local_egocentric(scene(0, 0), 0, spec)
        for dc, dr in [(2, 0), (0, 3), (4, 2), (-2, -3)]:
            moved = obs.local_egocentric(scene(dc, dr), 0, spec)
            assert np.allclose(base, moved, atol=1e-12), (dc, dr)

    def test_dead_unit_raises(self):
        s = centered_7x7_state()
        with pytest.raises(obs.StateError):
            obs.local_egocentric(s, 42)


class TestCoarseCells:
    def test_cell_roundtrip(self):
        b = uniform_board(10, 10)
        for h in b.all_hexes():
            cell = obs.coarse_cell_of(b, h, 5)
            assert h in obs.coarse_cell_hexes(b, cell, 5)

    def test_cells_partition_board(self):
        b = uniform_board(11, 13)
        seen = []
        for cell in range(25):
            seen.extend(obs.coarse_cell_hexes(b, cell, 5))
        assert len(seen) == 11 * 13
        assert len(set(seen)) == len(seen)


class TestTensorDump:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(1)
        t = rng.random((17, 9, 12))
        p = tmp_path / "obs.bin"
        obs.dump_tensor(t, p)
        back = obs.load_tensor(p)
        assert back.shape == t.shape
        assert np.allclose(back, t, atol=1e-6)  # float32 storage

    def test_truncated_raises(self, tmp_path):
        t = np.zeros((2, 3, 3))
        p = tmp_path / "obs.bin"
        obs.dump_tensor(t, p)
        p.write_bytes(p.read_bytes()[:-5])
        with pytest.raises(obs.FormatError):
            obs.load_tensor(p)

    def test_version_check(self, tmp_path):
        p = tmp_path / "obs.bin"
        obs.dump_tensor(np.zeros((1, 2, 2)), p)
        raw = bytearray(p.read_bytes())
        raw[6] = 99
        p.write_bytes(bytes(raw))
        with pytest.raises(obs.FormatError):
            obs.load_tensor(p)
