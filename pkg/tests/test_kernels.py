import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orthospec import _kernels

needs_compiled = pytest.mark.skipif(_kernels.compiled is None, reason="compiled extension not built")


@needs_compiled
@pytest.mark.parametrize("z", [1e-3, 0.5, 2.0, 100.0, 1e4])
def test_kir_backends_agree(z):
    r = np.array([0.0, 0.3, 1.0, 4.0, 17.0, 60.0])
    vc, ac, nc = _kernels.compiled.kir_scaled_many(r, z)
    vp, ap, np_ = _kernels.python.kir_scaled_many(r, z)
    # same nodes; only the summation order can differ
    assert np.array_equal(nc, np_)
    assert np.all(np.abs(vc - vp) <= 1e-14 * ap)
    assert np.allclose(ac, ap, rtol=1e-13)


@needs_compiled
@settings(max_examples=50, deadline=None)
@given(nu=st.floats(0.0, 0.5), z=st.floats(1e-3, 500.0))
def test_knu_backends_agree(nu, z):
    vc, ac, _ = _kernels.compiled.knu_scaled_many(np.array([nu]), z)
    vp, ap, _ = _kernels.python.knu_scaled_many(np.array([nu]), z)
    assert abs(vc[0] - vp[0]) <= 1e-14 * ap[0]


def test_empty_input():
    for mod in filter(None, (_kernels.compiled, _kernels.python)):
        v, a, n = mod.kir_scaled_many(np.zeros(0), 1.0)
        assert len(v) == len(a) == len(n) == 0


def test_environment_forces_python():
    code = "from orthospec import _kernels; print(_kernels.BACKEND)"
    env = dict(os.environ, ORTHOSPEC_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    env["ORTHOSPEC_PURE_PYTHON"] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == ("cython" if _kernels.compiled is not None else "python")
