import pytest
from hypothesis import settings

from qkd_coexist import FiberSpan, LinkScenario, RamanProfile
from qkd_coexist.channel_plan import reference_plan

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

RHO = 3e-9  # explicit Raman coefficient for tests that do not calibrate


@pytest.fixture
def scenario():
    plan = reference_plan()
    return LinkScenario(
        plan=plan,
        span=FiberSpan(50.0),
        raman=RamanProfile(plan.quantum.wavelength, RHO),
    )


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects one verdict line per acceptance criterion for the run summary."""
    return request.config.stash.setdefault(ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
