import numpy as np
import pytest

from buildingclf.nn import tensor as T

from nn_helpers import assert_grads_close, numeric_grad


def scalar_check(build, params, rel=1e-6):
    """build() -> scalar Tensor using the given parameter Tensors."""
    loss = build()
    loss.backward()
    analytic = [p.grad for p in params]
    numeric = numeric_grad(lambda: float(build().data),
                           [p.data for p in params])
    assert_grads_close(analytic, numeric, rel=rel)


def test_add_mul_matmul_grads():
    rng = np.random.default_rng(0)
    a = T.parameter(rng.normal(0, 1, (4, 3)))
    b = T.parameter(rng.normal(0, 1, (3, 5)))
    c = T.parameter(rng.normal(0, 1, (1, 5)))
    w = rng.normal(0, 1, (4, 5))

    def build():
        return ((a @ b + c) * T.constant(w)).sum()
    scalar_check(build, [a, b, c])


def test_div_exp_log_grads():
    rng = np.random.default_rng(1)
    a = T.parameter(rng.uniform(0.5, 2.0, (3, 4)))
    b = T.parameter(rng.uniform(0.5, 2.0, (3, 4)))

    def build():
        return ((a / b).exp().log() * T.constant(np.ones((3, 4)))).sum()
    scalar_check(build, [a, b])


def test_relu_leaky_grads():
    rng = np.random.default_rng(2)
    a = T.parameter(rng.normal(0, 1, (6, 6)) + 0.1)
    w = rng.normal(0, 1, (6, 6))

    def build():
        return (a.relu() * T.constant(w)).sum() + \
            (a.leaky_relu(0.2) * T.constant(w)).sum()
    scalar_check(build, [a])


def test_pick_and_mean():
    rng = np.random.default_rng(3)
    a = T.parameter(rng.normal(0, 1, (5, 4)))
    rows = np.array([0, 2, 4])
    cols = np.array([1, 3, 0])

    def build():
        return a.pick(rows, cols).mean()
    scalar_check(build, [a])


def test_block_ops_roundtrip():
    rng = np.random.default_rng(4)
    a = T.parameter(rng.normal(0, 1, (5, 6)))  # 3 heads x 2
    w = rng.normal(0, 1, (5, 3))

    def build():
        return (a.block_colsum(3) * T.constant(w)).sum()
    scalar_check(build, [a])

    b = T.parameter(rng.normal(0, 1, (5, 3)))
    w2 = rng.normal(0, 1, (5, 6))

    def build2():
        return (b.block_colexpand(2) * T.constant(w2)).sum()
    scalar_check(build2, [b])


def _plan(rng, n=6, m=10):
    src = rng.integers(0, n, m)
    dst = rng.integers(0, n, m)
    feat = rng.uniform(0, 1, m)
    return T.GraphPlan(n, src, dst, feat)


def test_gather_and_segment_sum_grads():
    rng = np.random.default_rng(5)
    plan = _plan(rng)
    h = T.parameter(rng.normal(0, 1, (6, 4)))
    w = rng.normal(0, 1, (6, 4))

    def build():
        return (T.segment_sum_dst(T.gather_src(h, plan), plan)
                * T.constant(w)).sum()
    scalar_check(build, [h])


def test_gather_dst_grads():
    rng = np.random.default_rng(6)
    plan = _plan(rng)
    h = T.parameter(rng.normal(0, 1, (6, 4)))
    w = rng.normal(0, 1, (plan.n_edges, 4))

    def build():
        return (T.gather_dst(h, plan) * T.constant(w)).sum()
    scalar_check(build, [h])


def test_segment_max_grads():
    rng = np.random.default_rng(7)
    plan = _plan(rng, n=5, m=12)
    h = T.parameter(rng.normal(0, 1, (5, 3)))
    w = rng.normal(0, 1, (5, 3))

    def build():
        return (T.segment_max_dst(T.gather_src(h, plan), plan)
                * T.constant(w)).sum()
    scalar_check(build, [h])


def test_segment_max_empty_segment_is_zero():
    plan = T.GraphPlan(4, np.array([0, 1]), np.array([1, 0]),
                       np.array([1.0, 1.0]))
    vals = T.constant(np.ones((2, 3)))
    out = T.segment_max_dst(vals, plan)
    assert np.array_equal(out.data[2], np.zeros(3))
    assert np.array_equal(out.data[3], np.zeros(3))


def test_segment_softmax_rows_sum_to_one():
    rng = np.random.default_rng(8)
    plan = _plan(rng, n=7, m=20)
    score = T.parameter(rng.normal(0, 2, (plan.n_edges, 4)))
    alpha = T.segment_softmax_dst(score, plan)
    sums = plan.sum_by_dst_np(alpha.data)
    nonempty = plan.dst_counts > 0
    assert np.allclose(sums[nonempty], 1.0, atol=1e-12)


def test_segment_softmax_grads():
    rng = np.random.default_rng(9)
    plan = _plan(rng, n=4, m=9)
    score = T.parameter(rng.normal(0, 1, (plan.n_edges, 2)))
    w = rng.normal(0, 1, (plan.n_edges, 2))

    def build():
        return (T.segment_softmax_dst(score, plan) * T.constant(w)).sum()
    scalar_check(build, [score], rel=1e-5)


def test_backward_requires_scalar():
    a = T.parameter(np.ones((2, 2)))
    with pytest.raises(ValueError):
        (a * a).backward()


def test_grad_accumulates_over_reuse():
    a = T.parameter(np.array([[2.0]]))
    loss = (a * a + a * T.constant(np.array([[3.0]]))).sum()
    loss.backward()
    assert a.grad[0, 0] == pytest.approx(2 * 2.0 + 3.0)
