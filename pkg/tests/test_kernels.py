import mpmath as mp
import numpy as np

from legendre_betti.kernels import carlson_rd, carlson_rf, complete_ke, period_basis


def test_carlson_against_mpmath():
    for x, y, z in [(1, 2, 0), (0.5, 1 + 1j, 2 - 1j), (2, 3, 4)]:
        assert abs(carlson_rf(x, y, z) - complex(mp.elliprf(x, y, z))) < 1e-13
    for x, y, z in [(0, 2, 1), (0.5, 1 + 1j, 2 - 1j), (2, 3, 4)]:
        assert abs(carlson_rd(x, y, z) - complex(mp.elliprd(x, y, z))) < 1e-12


def test_complete_integrals_against_mpmath():
    ms = np.array([0.3, -2 + 1j, 0.9 - 0.2j, 5 + 0.5j])
    K, E = complete_ke(ms, 1 - ms)
    for m, k, e in zip(ms, K, E):
        assert abs(k - complex(mp.ellipk(m))) < 1e-12 * abs(k)
        assert abs(e - complex(mp.ellipe(m))) < 1e-12 * abs(e)


def test_legendre_relation_in_double_precision():
    lam = np.array([0.5, 0.2 + 0.3j, -1 + 2j])
    r1, r2, d1, d2 = period_basis(lam, 1 - lam)
    # λ(1−λ) times the Wronskian is constant
    w = lam * (1 - lam) * (r1 * d2 - r2 * d1)
    assert np.allclose(w, w[0], atol=1e-12)
