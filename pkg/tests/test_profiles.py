import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from froth1d.errors import (AlignmentError, DomainTooShort, InvariantError,
                            ParseError)
from froth1d.profiles import (GridProfile, StepProfile, alpha_L, average_over,
                              block_type, coarse_version, load_profile,
                              save_profile)


class TestAverageOver:
    def test_constant(self, params):
        p = GridProfile.constant(params.m_beta, L=8.0, dx=0.125)
        assert average_over(p, (2.0, 5.0)) == pytest.approx(params.m_beta)

    def test_square_wave_full_period(self):
        n = 256
        x = (np.arange(n) + 0.5) / n * 8.0
        p = GridProfile(L=8.0, dx=8.0 / n / 4 * 4, samples=np.sign(np.sin(2 * np.pi * x / 8.0)))
        assert average_over(p, (0.0, 8.0)) == pytest.approx(0.0, abs=1e-15)

    def test_sawtooth(self):
        n = 512
        L = 8.0
        dx = L / n
        x = (np.arange(n) + 0.5) * dx
        p = GridProfile(L=L, dx=dx, samples=2 * x / L - 1)
        # exact mean of the arithmetic sequence of midpoint samples is 0
        assert average_over(p, (0.0, L)) == pytest.approx(0.0, abs=1e-15)

    def test_misaligned_raises(self):
        p = GridProfile.constant(0.5, L=4.0, dx=0.25)
        with pytest.raises(AlignmentError):
            average_over(p, (0.1, 2.0))


class TestBlockType:
    def test_thresholds(self, params):
        m = params.m_beta
        assert block_type(0.95 * m, m) == "plus"
        assert block_type(0.0, m) == "zero"
        assert block_type(-0.9 * m, m) == "minus"
        assert block_type(0.89 * m, m) == "zero"


class TestAlphaL:
    def test_exact_multiple(self):
        gamma, delta = 1e-2, 0.2
        L = 10.0 * gamma ** -delta
        a, n = alpha_L(L, delta, gamma)
        assert n == 10 and a == pytest.approx(1.0)

    def test_fractional(self):
        gamma, delta = 1e-2, 0.2
        L = 10.5 * gamma ** -delta
        a, n = alpha_L(L, delta, gamma)
        assert n == 10 and a == pytest.approx(1.05)

    def test_too_short(self):
        with pytest.raises(DomainTooShort):
            alpha_L(0.5 * (1e-2) ** -0.2, 0.2, 1e-2)

    @given(st.floats(min_value=1.2, max_value=500.0))
    @settings(max_examples=50, deadline=None)
    def test_direct_search_oracle(self, ratio):
        gamma, delta = 3e-2, 0.25
        L = ratio * gamma ** -delta
        a, n = alpha_L(L, delta, gamma)
        # reproduce inf{alpha >= 1 : (L/alpha) gamma^delta integer} directly
        target = L * gamma ** delta
        candidates = [target / k for k in range(1, int(target) + 2)
                      if target / k >= 1.0 - 1e-12]
        assert a == pytest.approx(min(candidates))
        assert abs((L / a) * gamma ** delta - n) < 1e-9


class TestCoarseVersion:
    def test_constant(self, params):
        p = GridProfile.constant(params.m_beta, L=20.0, dx=0.125)
        c = coarse_version(p, 0.25, 1e-2)
        assert np.max(np.abs(c.samples - params.m_beta)) < 1e-15

    def test_mean_preserved_and_idempotent(self, rng):
        n = 1024
        dx = 1.0 / 32.0
        p = GridProfile(L=n * dx, dx=dx, samples=rng.uniform(-1, 1, n))
        c = coarse_version(p, 0.25, 1e-2)
        assert c.mean() == pytest.approx(p.mean(), abs=1e-14)
        c2 = coarse_version(c, 0.25, 1e-2)
        assert np.max(np.abs(c2.samples - c.samples)) < 1e-14

    def test_square_wave_interior(self, params, instanton_default):
        from froth1d.instanton import build_trial_profile
        h = 24.0
        prof = build_trial_profile(h, 4 * h, instanton_default, bc="periodic")
        c = coarse_version(prof, 0.25, 1e-2)
        # the plateau sits at the cell boundary x = h (sign flips at cell
        # midpoints); a coarse block there averages to +-m_beta
        plateau = c.samples[int(h / prof.dx)]
        assert abs(abs(plateau) - params.m_beta) < 1e-3


class TestStepProfile:
    def test_mean_and_jumps(self):
        s = StepProfile(breakpoints=np.array([0.0, 1.0, 3.0]),
                        values=np.array([0.5, -0.5]))
        assert s.mean() == pytest.approx((0.5 - 1.0) / 3.0)
        assert s.n_jumps() == 1
        assert s.n_jumps(periodic=True) == 2

    def test_in_K_consistency(self, params):
        m_bar = 0.3
        vals = np.array([0.4, -0.35, 0.9])
        s = StepProfile(breakpoints=np.array([0.0, 1.0, 2.0, 3.0]),
                        values=vals, m_bar=m_bar)
        assert s.in_K == (np.min(np.abs(vals)) >= m_bar)
        s2 = StepProfile(breakpoints=np.array([0.0, 1.0, 2.0, 3.0]),
                        values=np.array([0.4, -0.2, 0.9]), m_bar=m_bar)
        assert not s2.in_K

    def test_sign_intervals_merge(self):
        s = StepProfile(breakpoints=np.array([0.0, 1.0, 2.0, 3.0, 4.0]),
                        values=np.array([0.5, 0.9, -0.4, -0.6]))
        runs = s.sign_intervals()
        assert [(a, b) for a, b, _ in runs] == [(0.0, 2.0), (2.0, 4.0)]
        # periodic wrap merge when end signs agree
        s2 = StepProfile(breakpoints=np.array([0.0, 1.0, 3.0, 4.0]),
                         values=np.array([0.5, -0.4, 0.6]))
        runs2 = s2.sign_intervals(periodic=True)
        assert len(runs2) == 2
        assert runs2[0][1] - runs2[0][0] == pytest.approx(2.0)  # wrapped + run

    @given(st.lists(st.tuples(st.floats(0.1, 3.0), st.floats(-1.0, 1.0)),
                    min_size=1, max_size=12))
    @settings(max_examples=60, deadline=None)
    def test_from_pieces_mass(self, pieces):
        s = StepProfile.from_pieces(pieces)
        total = sum(w * v for w, v in pieces)
        length = sum(w for w, _ in pieces)
        assert s.mean() == pytest.approx(total / length, rel=1e-12, abs=1e-12)


class TestPartitionTiling:
    def test_regular_tiles_exactly(self):
        from froth1d.coarsegrain import regular_partition
        L, gamma, delta = 123.456, 1e-2, 0.2
        part = regular_partition(L, delta, gamma)
        assert part.edges[0] == 0.0 and part.edges[-1] == pytest.approx(L)
        assert np.sum(part.widths) == pytest.approx(L, rel=1e-12)
        assert np.max(part.widths) - np.min(part.widths) < 1e-9


class TestProfileFile:
    def test_round_trip(self, tmp_path, rng):
        n = 64
        p = GridProfile(L=2.0, dx=2.0 / n / 16 * 16, samples=rng.uniform(-1, 1, n),
                        bc="periodic")
        path = tmp_path / "p.profile"
        save_profile(p, path, extra_headers={"tau": 0.19762754872186078})
        q, headers = load_profile(path)
        assert np.array_equal(q.samples, p.samples)
        assert q.bc == "periodic" and q.L == p.L and q.dx == p.dx
        assert headers["tau"] == 0.19762754872186078

    def test_out_of_range_sample(self, tmp_path):
        path = tmp_path / "bad.profile"
        path.write_text("L 1.0\ndx 0.25\nbc open\n0.0\n1.5\n0.0\n0.0\n")
        with pytest.raises(InvariantError):
            load_profile(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.profile"
        path.write_text("")
        with pytest.raises(ParseError):
            load_profile(path)

    def test_parse_error_line_number(self, tmp_path):
        path = tmp_path / "bad2.profile"
        path.write_text("L 1.0\ndx 0.25\nbc open\n0.0\nnot-a-number\n")
        with pytest.raises(ParseError) as err:
            load_profile(path)
        assert err.value.line == 5
