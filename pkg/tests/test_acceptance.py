"""Full-size acceptance run; prints one PASS/FAIL line per criterion."""
import pytest

from urel_euler.acceptance import CRITERIA, format_result, run_criterion


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    result = run_criterion(number)
    with capsys.disabled():
        print("\n" + format_result(result))
    assert result.passed, format_result(result)
