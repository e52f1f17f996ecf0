import pytest

from app.core.errors import InvalidParameterError, TraceError, UnknownKernelError
from app.schemas.potential import PotentialSpec
from app.schemas.run import ExpectedValue, ReproCase
from app.services import reproduce_service
from app.services.reproduce_service import diff_table, run_case

SMALL = {"grid_nr": 60, "grid_ndir": 24}


@pytest.mark.parametrize("name", ["delta", "sk", "delta-plus-f", "dipolar"])
def test_builtin_cases_reproduce(name):
    case = run_case(name, **SMALL)
    assert case.passed, diff_table(case)
    assert case.certified_speeds


def test_delta_speeds():
    case = run_case("delta", **SMALL)
    assert 0.0 in case.certified_speeds
    assert all(c < 2 ** 0.5 for c in case.inconclusive_speeds)


def test_dipolar_speeds_all_certified():
    case = run_case("dipolar", **SMALL)
    assert case.inconclusive_speeds == []


def test_unknown_case():
    with pytest.raises(UnknownKernelError):
        run_case("yukawa")


def test_bad_parameters_are_config_errors():
    with pytest.raises(InvalidParameterError):
        run_case("delta", {"a": -1.0}, **SMALL)


def test_numerical_failure_keeps_the_case_kernel(monkeypatch):
    def lost(*args, **kwargs):
        raise TraceError("branch lost at t=0.01")

    monkeypatch.setattr(reproduce_service, "trace_gamma", lost)
    case = run_case("dipolar", **SMALL)
    assert not case.passed
    assert case.potential.kind == "dipolar"
    assert case.potential.params["b_tilde"] == 0.25
    assert case.failures == ["TraceError: branch lost at t=0.01"]


def test_diff_table_lists_only_mismatches():
    case = ReproCase(name="delta", potential=PotentialSpec(kind="delta"), values=[
        ExpectedValue(name="good", expected=1.0, computed=1.0, tolerance=0.0, provenance="-"),
        ExpectedValue(name="bad", expected=1.0, computed=2.0, tolerance=1e-3, provenance="-"),
    ], failures=["c=1: expected certified, got inconclusive (x)"])
    table = diff_table(case)
    assert "bad" in table and "good" not in table
    assert table.splitlines()[-1].startswith("c=1")
    assert not case.passed
