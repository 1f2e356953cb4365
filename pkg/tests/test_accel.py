"""Backend parity: the numba kernels and the pure-numpy fallback must agree."""

import numpy as np
import pytest

from qgpr import _accel


needs_numba = pytest.mark.skipif(not _accel.HAS_NUMBA, reason="numba not installed")


def random_amps(rng, m):
    amps = rng.normal(size=1 << m) + 1j * rng.normal(size=1 << m)
    return (amps / np.linalg.norm(amps)).astype(np.complex128)


def random_unitary(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestBackendSelection:
    def test_known_names(self):
        with _accel.use_backend("numpy"):
            assert _accel.backend_name() == "numpy"

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            _accel.set_backend("cuda")

    def test_auto_resolves(self):
        with _accel.use_backend("auto"):
            assert _accel.backend_name() in ("numba", "numpy")


@needs_numba
class TestParity:
    @pytest.mark.parametrize("controls", [(), ((0, 1),), ((0, 1), (4, 0))])
    def test_apply_matrix(self, rng, controls):
        m = 7
        for tpos in [(3,), (2, 5), (1, 2, 3)]:
            if set(tpos) & {p for p, _ in controls}:
                continue
            mat = random_unitary(rng, 1 << len(tpos))
            base = random_amps(rng, m)
            a, b = base.copy(), base.copy()
            with _accel.use_backend("numba"):
                _accel.apply_matrix(a, mat, tpos, m, controls)
            with _accel.use_backend("numpy"):
                _accel.apply_matrix(b, mat, tpos, m, controls)
            np.testing.assert_allclose(a, b, atol=1e-12)

    @pytest.mark.parametrize("controls", [(), ((0, 1),)])
    def test_phase_mul(self, rng, controls):
        # layout: [ctl 1][target 2][clock 3][pad 1] -> clock block before/after target
        m = 7
        table = np.exp(1j * rng.normal(size=(8, 4)))
        base = random_amps(rng, m)
        a, b = base.copy(), base.copy()
        with _accel.use_backend("numba"):
            _accel.phase_mul(a, table, 3, 3, 1, 2, m, controls)
        with _accel.use_backend("numpy"):
            _accel.phase_mul(b, table, 3, 3, 1, 2, m, controls)
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_phase_mul_clock_first(self, rng):
        m = 6
        table = np.exp(1j * rng.normal(size=(8, 4)))
        base = random_amps(rng, m)
        a, b = base.copy(), base.copy()
        with _accel.use_backend("numba"):
            _accel.phase_mul(a, table, 0, 3, 3, 2, m, ())
        with _accel.use_backend("numpy"):
            _accel.phase_mul(b, table, 0, 3, 3, 2, m, ())
        np.testing.assert_allclose(a, b, atol=1e-12)

    @pytest.mark.parametrize("controls", [(), ((6, 1),)])
    def test_pair_rot(self, rng, controls):
        m = 7
        theta = rng.uniform(0, np.pi, size=8)
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        for apos in (0, 4):
            base = random_amps(rng, m)
            a, b = base.copy(), base.copy()
            with _accel.use_backend("numba"):
                _accel.pair_rot(a, cos_t, sin_t, 1, 3, apos, m, controls)
            with _accel.use_backend("numpy"):
                _accel.pair_rot(b, cos_t, sin_t, 1, 3, apos, m, controls)
            np.testing.assert_allclose(a, b, atol=1e-12)

    def test_full_pipeline_parity(self, rng):
        from qgpr.estimator import BilinearSpec, estimate_bilinear
        from qgpr.qla import QlaConfig, make_encoding

        a = rng.normal(size=(4, 4))
        a = a @ a.T + 4 * np.eye(4)
        lam = np.linalg.eigvalsh(a)
        cfg = QlaConfig(6, t0=5.0 / lam[-1], c=float(lam[0]))
        spec = BilinearSpec(
            make_encoding(rng.normal(size=4)), make_encoding(rng.normal(size=4)), a, cfg
        )
        with _accel.use_backend("numba"):
            r_nb = estimate_bilinear(spec, mode="exact")
        with _accel.use_backend("numpy"):
            r_np = estimate_bilinear(spec, mode="exact")
        assert r_nb.estimate == pytest.approx(r_np.estimate, abs=1e-10)
        assert r_nb.success_fraction == pytest.approx(r_np.success_fraction, abs=1e-12)
