import numpy as np
import pytest


def random_density(d, rank=None, rng=None):
    """Wishart-type random state, independent of the package's generator."""
    rng = np.random.default_rng(rng)
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(d, rng=None, scale=1.0):
    rng = np.random.default_rng(rng)
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * (a + a.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            if "test_acceptance" not in getattr(rep, "nodeid", "") or rep.when != "call":
                continue
            props = dict(rep.user_properties)
            crit = props.get("criterion")
            if crit is None:
                continue
            lines.append((crit, "PASS" if rep.passed else "FAIL", props.get("detail", "")))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for crit, verdict, detail in sorted(lines):
        terminalreporter.write_line(f"criterion {crit}: {verdict}  {detail}")
