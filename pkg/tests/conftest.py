import functools

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def group(name):
    from birkhoff_facets.groups import coxeter_group
    return coxeter_group(name)


@functools.lru_cache(maxsize=None)
def symmetry(name):
    from birkhoff_facets.groups import build_symmetry_action
    return build_symmetry_action(group(name), allow_twisted=True)


@functools.lru_cache(maxsize=None)
def polytope(name):
    from birkhoff_facets.polytope import polytope_of
    return polytope_of(group(name))


@pytest.fixture
def cached():
    """Accessors for shared groups, symmetry actions and polytopes."""
    class _C:
        pass
    c = _C()
    c.group, c.symmetry, c.polytope = group, symmetry, polytope
    return c


# acceptance criteria report a single line each at the end of the session
ACCEPTANCE: dict = {}


def record_criterion(number: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"AC{number} {'PASS' if ok else 'FAIL'}  {title}"
    if detail:
        line += f"  [{detail}]"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
