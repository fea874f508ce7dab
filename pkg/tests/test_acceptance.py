"""One test per acceptance criterion; each prints a PASS/FAIL line with its evidence."""
import json

import pytest

from legendre_betti.acceptance import CRITERIA, format_line, load_config, run_criterion

LINES: list[str] = []
_CFG = load_config()


@pytest.mark.parametrize("key", list(CRITERIA))
def test_criterion(key):
    res = run_criterion(key, _CFG)
    line = format_line(res)
    LINES.append(line)
    print(line)
    assert res.passed, json.dumps(res.to_json(), indent=1, default=str)
