"""Rewrite the golden CLI outputs. Run only after an intentional output change."""
import contextlib
import io
import json
from pathlib import Path

from frozen_edge.cli import main

HERE = Path(__file__).parent

if __name__ == "__main__":
    for name, argv in json.loads((HERE / "cases.json").read_text()).items():
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = main(argv)
        (HERE / name).write_text(buf.getvalue())
        print(f"{name}: exit {code}")
