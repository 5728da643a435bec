import os

from hypothesis import HealthCheck, settings

from rtn_dephasing.noise_kernels import DampedCosine, Delta, Exponential

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# kernels used wherever "every model in the panel" is checked
PANEL_KERNELS = [
    Delta(),
    Exponential(0.05),
    Exponential(0.5),
    Exponential(1.23),
    Exponential(3.0),
    Exponential(1e4),
    DampedCosine(0.05, 6.0),
    DampedCosine(1.0, 3.0),
    DampedCosine(3.0, 1.0),
    DampedCosine(3.0, 3.0),
    DampedCosine(3.0, 0.0),
]
PANEL_NUS = [0.0, 0.6, 1.0, 3.0]


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
