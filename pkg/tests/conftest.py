import os
import numpy as np
import pytest


def pytest_collection_modifyitems(config, items):
    if os.environ.get("AYSLAB_EXTENDED") == "1":
        return
    skip = pytest.mark.skip(reason="set AYSLAB_EXTENDED=1 to run full-scale acceptance runs")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def numeric_gradients(loss, params, step=1e-5):
    """Central finite differences of loss() with respect to every entry of params (edited in place)."""
    grads = []
    for p in params:
        g = np.zeros_like(p)
        for index in np.ndindex(p.shape):
            original = p[index]
            p[index] = original + step
            up = loss()
            p[index] = original - step
            down = loss()
            p[index] = original
            g[index] = (up - down) / (2.0 * step)
        grads.append(g)
    return grads


def relative_error(analytic, numeric):
    """Largest absolute deviation over the largest gradient entry of either side."""
    scale = max(max(float(np.max(np.abs(a))), float(np.max(np.abs(n)))) for a, n in zip(analytic, numeric))
    worst = max(float(np.max(np.abs(a - n))) for a, n in zip(analytic, numeric))
    return worst / max(scale, 1e-8)
