import json
import os
import subprocess
import sys

import numpy as np
import pytest

from franks import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def coefficient_samples(rng, N, n, batch=None):
    shape = (N, n, n) if batch is None else (batch, N, n, n)
    return [rng.normal(size=shape) for _ in range(3)]


@needs_numba
def test_jacobi_kernels_agree():
    rng = np.random.default_rng(0)
    h = np.full(200, 1 / 200)
    Rs, Rm, Re = coefficient_samples(rng, 200, 3)
    Y0, P0 = rng.normal(size=(3, 2)), rng.normal(size=(3, 2))
    a = _kernels.rk4_jacobi_numpy(h, Rs, Rm, Re, Y0, P0)
    b = _kernels.rk4_jacobi_numba(h, Rs, Rm, Re, Y0, P0)
    for x, y in zip(a, b):
        assert np.max(np.abs(x - y)) <= 1e-12 * max(1.0, np.max(np.abs(x)))


@needs_numba
def test_linear_batch_kernels_agree():
    rng = np.random.default_rng(1)
    h = rng.uniform(0.001, 0.01, 150)
    Ms, Mm, Me = coefficient_samples(rng, 150, 4, batch=3)
    Y0 = rng.normal(size=(3, 4, 1))
    a = _kernels.rk4_linear_batch_numpy(h, Ms, Mm, Me, Y0)
    b = _kernels.rk4_linear_batch_numba(h, Ms, Mm, Me, Y0)
    assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(a)))


@needs_numba
def test_riccati_kernels_agree():
    rng = np.random.default_rng(2)
    h = np.full(100, 1 / 400)
    Rs, Rm, Re = coefficient_samples(rng, 100, 2)
    U0 = rng.normal(size=(2, 2))
    a = _kernels.rk4_riccati_numpy(h, Rs, Rm, Re, U0)
    b = _kernels.rk4_riccati_numba(h, Rs, Rm, Re, U0)
    assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(a)))


def test_jacobi_kernel_harmonic():
    # R = 1: Y = cos t
    N = 256
    h = np.full(N, 1.0 / N)
    R = np.ones((N, 1, 1))
    Y, P = _kernels.rk4_jacobi(h, R, R, R, np.ones((1, 1)), np.zeros((1, 1)))
    assert abs(Y[-1, 0, 0] - np.cos(1.0)) <= 1e-9
    assert abs(P[-1, 0, 0] + np.sin(1.0)) <= 1e-9


def backend_in_subprocess(flag):
    env = dict(os.environ)
    env.pop("FRANKS_DISABLE_NUMBA", None)
    if flag is not None:
        env["FRANKS_DISABLE_NUMBA"] = flag
    out = subprocess.run([sys.executable, "-c", "from franks import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_env_flag_selects_numpy():
    assert backend_in_subprocess("1") == "numpy"


@needs_numba
def test_default_backend_is_numba():
    assert backend_in_subprocess(None) == "numba"
    assert backend_in_subprocess("0") == "numba"


def test_results_identical_across_backends():
    code = ("from franks.jacobi import dp_from_curvature; from franks.numkit import sin_fn; "
            "import json; print(json.dumps(dp_from_curvature(3.0 * sin_fn(5.0)).matrix.tolist()))")
    outs = []
    for flag in ("1", "0"):
        env = dict(os.environ, FRANKS_DISABLE_NUMBA=flag)
        outs.append(json.loads(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                        text=True, check=True).stdout))
    assert np.max(np.abs(np.array(outs[0]) - np.array(outs[1]))) <= 1e-13
