import numpy as np
import pytest

from spectral_sampler.encoding import EncodingSpec
from spectral_sampler.nn_core import NetworkConfig


def fd_gradient(mlp, x, y, loss_fn, h=1e-5, richardson=True):
    """Central finite differences of loss_fn over every parameter entry.

    With ``richardson`` the steps h, h/2 and h/4 are extrapolated to cancel the
    h^2 and h^4 truncation terms, which dominate for stiff activations
    (sine with omega = 30).
    """
    if richardson:
        d = [fd_gradient(mlp, x, y, loss_fn, h / 2**k, richardson=False) for k in range(3)]
        r1 = [[(4 * f - c) / 3 for c, f in zip(d[k], d[k + 1])] for k in range(2)]
        return [(16 * f - c) / 15 for c, f in zip(r1[0], r1[1])]
    out = []
    for p in mlp.params:
        g = np.zeros_like(p)
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            lp = loss_fn(mlp, x, y)
            flat[i] = old - h
            lm = loss_fn(mlp, x, y)
            flat[i] = old
            gflat[i] = (lp - lm) / (2 * h)
        out.append(g)
    return out


def max_rel_error(analytic, numeric, floor=1e-6):
    worst = 0.0
    for a, n in zip(analytic, numeric):
        mask = np.maximum(np.abs(a), np.abs(n)) > floor
        if mask.any():
            rel = np.abs(a - n)[mask] / np.maximum(np.abs(a), np.abs(n))[mask]
            worst = max(worst, float(rel.max()))
    return worst


def small_config(rng, dim=None):
    """Random small network touching every activation/encoding/init variant."""
    dim = dim or int(rng.integers(1, 4))
    kind = ["identity", "sinusoidal", "gaussian-fourier"][int(rng.integers(0, 3))]
    enc = EncodingSpec(kind, input_dim=dim, degree=int(rng.integers(0, 4)),
                       sigma=float(rng.uniform(0.5, 3.0)), features=int(rng.integers(1, 6)),
                       seed=int(rng.integers(0, 1000)))
    act = ["softplus", "sine"][int(rng.integers(0, 2))]
    return NetworkConfig(
        input_dim=dim,
        num_hidden_layers=int(rng.integers(1, 4)),
        hidden_width=int(rng.integers(1, 17)),
        hidden_activation=act,
        beta=float(rng.choice([1.0, 10.0, 100.0])),
        omega=float(rng.choice([1.0, 3.0, 30.0])),
        output_activation=["tanh", "identity"][int(rng.integers(0, 2))],
        encoding=enc,
        init_scheme=["default-uniform", "xavier-uniform"][int(rng.integers(0, 2))],
        seed=int(rng.integers(0, 10_000)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record an acceptance verdict; all verdicts are listed in the terminal summary."""
    store = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(number: int, ok: bool, detail: str) -> bool:
        store[number] = (bool(ok), detail)
        print(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {detail}")
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {detail}")
