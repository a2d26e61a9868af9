"""Rewrite the CLI golden files under tests/golden.

Run after an intentional change of output format or numerics, then review the
diff before committing.
"""

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from golden_cases import CASES, INPUTS  # noqa: E402

from cvknit.cli import main  # noqa: E402
from cvknit.gaussian import direct_sum, squeeze_symplectic  # noqa: E402
from cvknit.serialization import stable_dumps  # noqa: E402

GOLDEN = ROOT / "tests" / "golden"
IN = GOLDEN / "inputs"


def expand(argv):
    return [a.replace("{in}", str(IN)) for a in argv]


def run(argv, out: Path) -> None:
    code = main(expand(argv) + ["-o", str(out)])
    if code != 0:
        raise SystemExit(f"{' '.join(argv)} exited with {code}")


def main_() -> None:
    IN.mkdir(parents=True, exist_ok=True)
    S = direct_sum(squeeze_symplectic(1, 0.2, 0), squeeze_symplectic(1, 0.4, 0))
    (IN / "local_S.json").write_text(stable_dumps({"matrix": S.tolist(), "Ma": 1, "Mb": 1}))
    for name, argv in INPUTS.items():
        if argv is not None:
            run(argv, IN / name)
    for name, argv in CASES.items():
        run(argv, GOLDEN / name)
        print(f"wrote {name}")


if __name__ == "__main__":
    main_()
