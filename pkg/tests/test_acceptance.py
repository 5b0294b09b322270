"""End-to-end acceptance criteria at desk scale.

Each test runs one criterion exactly as `agenet accept` does and fails
with the measured numbers in the message.  Heavy intermediates are
cached inside the acceptance module, so the whole file costs little
more than the slowest criterion.
"""

from agenet import acceptance as acc


def test_mass_conservation():
    passed, detail = acc.criterion_mass_conservation()
    assert passed, detail


def test_steady_state_closed_forms():
    passed, detail = acc.criterion_steady_closed_forms()
    assert passed, detail


def test_density_and_activity_bounds():
    passed, detail = acc.criterion_bounds()
    assert passed, detail


def test_linear_spectral_gap():
    passed, detail = acc.criterion_spectral_gap()
    assert passed, detail


def test_weak_regime_exponential_relaxation():
    passed, detail = acc.criterion_relaxation()
    assert passed, detail


def test_delay_no_delay_agreement():
    passed, detail = acc.criterion_delay_agreement()
    assert passed, detail


def test_first_order_grid_convergence():
    passed, detail = acc.criterion_grid_convergence()
    assert passed, detail


def test_implicit_activity_contract():
    passed, detail = acc.criterion_implicit_activity()
    assert passed, detail


def test_format_line_shape():
    result = acc.CriterionResult(number=3, name="bounds", passed=True,
                                 detail="all good")
    assert acc.format_line(result) == "PASS 3. bounds: all good"
    result = acc.CriterionResult(number=5, name="relaxation", passed=False,
                                 detail="r2 too low")
    assert acc.format_line(result).startswith("FAIL 5. relaxation:")


def test_run_suite_records_exceptions(monkeypatch):
    def boom():
        raise RuntimeError("synthetic failure")

    def fine():
        return True, "ok"

    monkeypatch.setattr(acc, "CRITERIA",
                        ((1, "explodes", boom), (2, "works", fine)))
    lines = []
    results = acc.run_suite(report=lines.append)
    assert len(results) == 2
    assert not results[0].passed
    assert "RuntimeError" in results[0].detail
    assert results[1].passed
    assert lines[0].startswith("FAIL 1. explodes:")
    assert lines[1] == "PASS 2. works: ok"
