"""Run `verify` on every config in configs/ and summarize the suites."""
import argparse
import contextlib
import io
import json
import pathlib
import sys

from bostconnes import cli

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--configs", default=str(ROOT / "configs"))
    ap.add_argument("--out", help="directory for the full JSON reports")
    args = ap.parse_args()
    out = pathlib.Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    worst = 0
    for path in sorted(pathlib.Path(args.configs).glob("*.json")):
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = cli.main(["verify", "--datum", str(path)])
        worst = max(worst, code)
        if code == 2:
            print(f"{path.name:18s} config error")
            continue
        rep = json.loads(buf.getvalue())
        if out:
            (out / path.name).write_text(buf.getvalue())
        suites = " ".join(f"{s['suite']}={s['checks'] - s['failures']}/{s['checks']}" for s in rep["suites"])
        print(f"{path.name:18s} {'ok  ' if rep['ok'] else 'FAIL'} {suites}")
    return worst


if __name__ == "__main__":
    sys.exit(main())
