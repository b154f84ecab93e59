import pytest

from ephoresim import ChannelParams, Constant, DesignConstraint, FrameConfig, design_exponential, design_sinusoidal

# acceptance summary lines, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def ch():
    return ChannelParams()


@pytest.fixture(scope="session")
def frame():
    return FrameConfig()


@pytest.fixture(scope="session")
def reference_fields():
    """The four fields compared throughout: optimised, sinusoid, sinusoid at pi, constant."""
    c = DesignConstraint(1e-4, 1e-4, 5e-7, 5e-7)
    sin = design_sinusoidal(c)
    return {
        "optimized": design_exponential(c),
        "sinusoidal": sin,
        "sinusoidal_pi": type(sin)(sin.A_v, sin.DC_v, sin.f_v, 3.141592653589793, sin.period),
        "constant": Constant(0.01),
    }
