import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def three_point():
    """d=1 grid {-1, 0, 1} with the basis {L_0, L_1}."""
    from christoffel_ls import KGrid, TensorLegendreBasis, assemble_and_factor, total_degree

    grid = KGrid(np.array([[-1.0], [0.0], [1.0]]), "hand")
    basis = TensorLegendreBasis(total_degree(1, 1))
    return grid, basis, assemble_and_factor(grid, basis)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
