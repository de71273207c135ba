import numpy as np
import pytest
from hypothesis import given, strategies as st

from secure_swipt.conic import BACKEND, ConeDims, ConeProgram, SolverOptions, smat, solve_cone_program, svec
from secure_swipt.conic import kernels
from secure_swipt.conic.cones import compute_scaling
from secure_swipt.conic.ipm import DUAL_INFEASIBLE, INFEASIBLE, OPTIMAL
from secure_swipt.sdp import build_program, solve

BACKENDS = ["python"] + (["compiled"] if BACKEND == "compiled" else [])


def test_svec_round_trip_and_inner_product(rng):
    A = rng.standard_normal((4, 4))
    A = A + A.T
    B = rng.standard_normal((4, 4))
    B = B + B.T
    np.testing.assert_allclose(smat(svec(A), 4), A)
    assert svec(A) @ svec(B) == pytest.approx(np.trace(A @ B))


@pytest.mark.parametrize("backend", BACKENDS)
def test_lp(backend):
    # min x1 + x2  s.t.  x >= 0,  x1 + 2 x2 >= 2
    G = np.array([[-1.0, 0.0], [0.0, -1.0], [-1.0, -2.0]])
    prog = ConeProgram([1.0, 1.0], G, [0.0, 0.0, -2.0], ConeDims(l=3))
    res = solve_cone_program(prog, SolverOptions(backend=backend))
    assert res.status == OPTIMAL
    assert res.primal_objective == pytest.approx(1.0, abs=1e-7)
    np.testing.assert_allclose(res.x, [0.0, 1.0], atol=1e-6)
    # multiplier of the coupling row is 1/2
    assert res.z[2] == pytest.approx(0.5, abs=1e-6)


def test_soc():
    # min t  s.t.  ||(3, 4)|| <= t
    prog = ConeProgram([1.0], [[-1.0], [0.0], [0.0]], [0.0, 3.0, 4.0], ConeDims(q=(3,)))
    res = solve_cone_program(prog)
    assert res.status == OPTIMAL
    assert res.x[0] == pytest.approx(5.0, rel=1e-7)


def _lambda_max_program(A):
    n = A.shape[0]
    return ConeProgram([1.0], -svec(np.eye(n))[:, None], svec(-A), ConeDims(s=(n,)))


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_sdp_lambda_max(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    A = A + A.T
    res = solve_cone_program(_lambda_max_program(A))
    assert res.status == OPTIMAL
    assert res.x[0] == pytest.approx(np.linalg.eigvalsh(A)[-1], abs=1e-6)
    # the dual is the top eigenprojector
    Z = smat(res.z, n)
    assert np.trace(Z) == pytest.approx(1.0, abs=1e-6)


def test_infeasible_detected():
    # x >= 1 and x <= 0
    prog = ConeProgram([1.0], [[-1.0], [1.0]], [-1.0, 0.0], ConeDims(l=2))
    assert solve_cone_program(prog).status == INFEASIBLE


def test_unbounded_detected():
    prog = ConeProgram([1.0], [[1.0]], [0.0], ConeDims(l=1))
    assert solve_cone_program(prog).status == DUAL_INFEASIBLE


def test_shape_mismatch():
    with pytest.raises(ValueError):
        ConeProgram([1.0, 2.0], [[1.0]], [0.0], ConeDims(l=1))


def test_dims_layout():
    d = ConeDims(l=2, q=(3, 3), s=(2, 4))
    assert d.size == 2 + 6 + 3 + 10
    assert d.degree == 2 + 2 + 6
    assert d.psd_offsets == (8, 11)


@pytest.mark.skipif(BACKEND != "compiled", reason="compiled kernel not built")
def test_schur_kernels_agree(inst0, rng):
    prog = build_program(inst0).cone
    dims = prog.dims
    # a random interior scaling point
    s = dims.identity() + 0.1 * np.abs(rng.standard_normal(dims.size))
    z = dims.identity() + 0.1 * np.abs(rng.standard_normal(dims.size))
    W = compute_scaling(dims, s, z)
    from secure_swipt.conic.ipm import _block_rinv
    n = prog.G.shape[1]
    H_py, H_c = np.zeros((n, n)), np.zeros((n, n))
    kernels.schur_psd_accumulate(H_py, prog.psd_data, _block_rinv(W, dims), "python")
    kernels.schur_psd_accumulate(H_c, prog.psd_data, _block_rinv(W, dims), "compiled")
    np.testing.assert_allclose(H_c, H_py, rtol=1e-12, atol=1e-12 * np.abs(H_py).max())


@pytest.mark.skipif(BACKEND != "compiled", reason="compiled kernel not built")
def test_backends_agree_on_full_solve(inst0):
    prog = build_program(inst0)
    a, _ = solve(prog, SolverOptions(backend="python"))
    b, _ = solve(prog, SolverOptions(backend="compiled"))
    assert a.status == b.status == OPTIMAL
    assert a.iterations == b.iterations
    assert a.objective_w == pytest.approx(b.objective_w, rel=1e-9)
