import math

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad

from hptml.kernels import kernel_density, tml_triple

GATE_MARK = "kernel_lt_gate"


def ml_oracle(a, b, z, c=1.0, digits=30):
    """Prabhakar series summed in extended precision.

    Working precision grows with the largest term so cancellation for
    negative z cannot reach the reported digits.
    """
    a, b, c, z = (mp.mpf(float(v)) for v in (a, b, c, z))
    x = abs(float(z))
    peak = x ** (1 / float(a)) if x > 0 else 0.0
    extra = int(peak / math.log(10) * max(float(c), 1.0)) + 10
    with mp.workdps(digits + extra):
        total = mp.mpf(0)
        k = 0
        term_coef = mp.mpf(1)  # (c)_k / k!
        zk = mp.mpf(1)
        while True:
            term = term_coef * zk * mp.rgamma(a * k + b)
            total += term
            if k > peak / float(a) + 10 and abs(term) < mp.mpf(10) ** (-digits - extra) * max(abs(total), mp.mpf(10) ** -300):
                break
            term_coef *= (c + k) / (k + 1)
            zk *= z
            k += 1
            if k > 200000:
                raise RuntimeError("oracle did not converge")
        return float(total)


def kernel_lt_quadrature(spec, s):
    """Laplace transform of the kernel density by quadrature in u = t^beta.

    The substitution removes the t^(beta-1) singularity at the origin.
    """
    beta = tml_triple(spec)[0]

    def integrand(u):
        if u == 0:
            return 0.0 if beta < 1 else kernel_density(spec, 1e-300)
        t = u ** (1 / beta)
        return kernel_density(spec, t) * math.exp(-s * t) * t / (beta * u)

    total, cut = 0.0, 0.0
    for hi in (1.0, 10.0, 100.0, math.inf):
        total += quad(integrand, cut, hi, epsabs=0, epsrel=1e-11, limit=400)[0]
        cut = hi
    return total


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20241017)


def pytest_configure(config):
    config.addinivalue_line("markers", f"{GATE_MARK}: kernel transform round-trip, runs first")
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered")


_gate_failed = []


def pytest_collection_modifyitems(session, config, items):
    # the density formula underlies everything downstream, so check it first
    gate = [it for it in items if it.get_closest_marker(GATE_MARK)]
    rest = [it for it in items if not it.get_closest_marker(GATE_MARK)]
    items[:] = gate + rest


_criteria = {}


def pytest_runtest_makereport(item, call):
    if call.when == "call" and item.get_closest_marker(GATE_MARK) and call.excinfo is not None:
        _gate_failed.append(item.nodeid)
    mark = item.get_closest_marker("criterion")
    if mark and (call.when == "call" or call.excinfo is not None):
        number, title = mark.args
        entry = _criteria.setdefault(number, [title, True])
        entry[1] = entry[1] and call.excinfo is None


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture(autouse=True)
def _require_gate(request):
    if _gate_failed and not request.node.get_closest_marker(GATE_MARK):
        pytest.fail(f"kernel transform round-trip failed first: {_gate_failed}")
