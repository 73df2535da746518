"""Rewrite the golden reports: ``python tests/regen_golden.py``."""

import io
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from cli_cases import CASES, GOLDEN  # noqa: E402

from mwtrap.cli import run  # noqa: E402

if __name__ == "__main__":
    GOLDEN.mkdir(exist_ok=True)
    for name, argv in CASES.items():
        out = io.StringIO()
        code = run(argv, stdout=out)
        if code != 0:
            raise SystemExit(f"{name}: exit {code}")
        (GOLDEN / f"{name}.json").write_text(out.getvalue())
        print("wrote", name)
