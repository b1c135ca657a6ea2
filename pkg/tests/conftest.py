import numpy as np
import pytest

FD_STEP = 1e-5
FD_RTOL = 1e-4
# denominator floor so entries that are numerically zero compare absolutely
FD_FLOOR = 1e-6


def finite_difference(fn, arrays, h=FD_STEP):
    """Central differences of scalar ``fn(arrays)`` w.r.t. every entry of every array."""
    grads = {}
    for name, a in arrays.items():
        g = np.zeros_like(a)
        for idx in np.ndindex(a.shape):
            old = a[idx]
            a[idx] = old + h
            up = fn(arrays)
            a[idx] = old - h
            down = fn(arrays)
            a[idx] = old
            g[idx] = (up - down) / (2 * h)
        grads[name] = g
    return grads


def max_rel_error(analytic, numeric, floor=FD_FLOOR):
    worst = 0.0
    for name in numeric:
        a, b = np.asarray(analytic[name]), numeric[name]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
        worst = max(worst, float(np.max(np.abs(a - b) / denom)))
    return worst


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def model_grad_error(spec, params, x, y):
    """Worst relative error between tape gradients and central differences of the MSE."""
    from taylornet.models import loss_and_grads

    _, grads = loss_and_grads(params, spec, x, y)
    arrays = {k: v.copy() for k, v in params.as_dict().items()}

    def loss(arrs):
        return loss_and_grads(type(params).from_dict(arrs), spec, x, y)[0]

    return max_rel_error(grads, finite_difference(loss, arrays))


def random_model_draw(spec, rng):
    """Random parameters (non-zero biases) and a small batch of windows/targets."""
    from taylornet.models import init_model_params

    params = init_model_params(spec, int(rng.integers(2**31)))
    arrays = {k: v + (0.3 * rng.normal(size=v.shape) if k.startswith("b") else 0)
              for k, v in params.as_dict().items()}
    params = type(params).from_dict(arrays)
    x = rng.uniform(0, 1, size=(4, spec.input_len))
    y = rng.uniform(0, 1, size=4)
    return params, x, y
