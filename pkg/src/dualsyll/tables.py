"""CSV/JSON persistence for run archives.

Every CSV starts with a ``# config_hash=<hex>`` comment line; every JSON
document carries a ``config_hash`` key. Floats are written with ``repr`` so
tables parse back to the exact values that produced them.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .interpret import AblationRow, SweepRow
from .stats import TTestResult
from .syllogism import RESPONSES

MANIFEST = "manifest.json"


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows, config_hash: str) -> None:
    buf = io.StringIO()
    buf.write(f"# config_hash={config_hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_csv(path):
    """Return (config_hash, header, rows-of-strings)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    config_hash = ""
    body = []
    for line in lines:
        if line.startswith("# config_hash="):
            config_hash = line.split("=", 1)[1].strip()
        elif not line.startswith("#"):
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    return config_hash, header, [row for row in reader if row]


def write_json(path, payload: dict, config_hash: str) -> None:
    doc = {"config_hash": config_hash, **payload}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


# -- typed tables ----------------------------------------------------------------

def write_matrix(path, codes, matrix, config_hash, columns=RESPONSES) -> None:
    rows = [[c, *row] for c, row in zip(codes, np.asarray(matrix, dtype=float))]
    write_csv(path, ["code", *columns], rows, config_hash)


def read_matrix(path):
    _, header, rows = read_csv(path)
    return [r[0] for r in rows], np.array([[float(v) for v in r[1:]] for r in rows]), header[1:]


def state_label(k: int) -> str:
    return f"state {k + 1}" if k >= 0 else "failed"


def parse_state(text: str) -> int:
    text = text.strip()
    if text == "failed":
        return -1
    return int(text.split()[-1]) - 1


def states_label(ks) -> str:
    return "; ".join(state_label(k) for k in ks) if ks else "none"


def parse_states(text: str) -> tuple[int, ...]:
    text = text.strip()
    if text in ("none", "failed", ""):
        return ()
    return tuple(parse_state(t) for t in text.split(";"))


ABLATION_HEADER = ["ablation", "test_r", "r_drop", "test_rmse", "rmse_increase"]


def write_ablation(path, rows: list[AblationRow], config_hash) -> None:
    write_csv(path, ABLATION_HEADER,
              [[r.label, r.r, r.drop, r.rmse, r.rmse_increase] for r in rows], config_hash)


def read_ablation(path) -> list[AblationRow]:
    _, _, rows = read_csv(path)
    out = []
    for label, r, drop, rmse, inc in rows:
        removed = None if label == "none" else int(label.split()[-1]) - 1
        out.append(AblationRow(removed, float(r), float(drop), float(rmse), float(inc)))
    return out


SWEEP_HEADER = ["seed", "test_intuition_r", "test_deliberation_r", "deliberation_gain",
                "dominant_test_state", "dead_states", "oac_leaning_state",
                "strongest_ablation_state"]


def write_sweep(path, rows: list[SweepRow], config_hash) -> None:
    out = []
    for r in rows:
        if r.ok:
            out.append([r.seed, r.intuition_r, r.deliberation_r, r.gain,
                        state_label(r.dominant_state), states_label(r.dead_states),
                        state_label(r.oac_state), state_label(r.strongest_ablation)])
        else:
            out.append([r.seed, "nan", "nan", "nan", "failed", "failed", "failed", "failed"])
    write_csv(path, SWEEP_HEADER, out, config_hash)


def read_sweep(path) -> list[SweepRow]:
    _, _, rows = read_csv(path)
    out = []
    for seed, ri, rd, gain, dom, dead, oac, strong in rows:
        out.append(SweepRow(int(seed), float(ri), float(rd), float(gain), parse_state(dom),
                            parse_states(dead), parse_state(oac), parse_state(strong),
                            error="failed" if dom == "failed" else ""))
    return out


TTEST_HEADER = ["comparison", "t", "p", "df"]


def write_ttests(path, tests: dict[str, TTestResult], config_hash) -> None:
    write_csv(path, TTEST_HEADER, [[name, t.t, t.p, t.df] for name, t in tests.items()],
              config_hash)


def read_ttests(path) -> dict[str, TTestResult]:
    _, _, rows = read_csv(path)
    return {name: TTestResult(float(t), float(p), int(df)) for name, t, p, df in rows}


# -- archive manifest ----------------------------------------------------------------

def write_manifest(out_dir, config_hash: str, command: str) -> None:
    """List every artifact with its sha256; the timestamp lives only here."""
    out_dir = Path(out_dir)
    files = {}
    for p in sorted(out_dir.iterdir()):
        if p.is_file() and p.name != MANIFEST:
            files[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
    doc = {
        "config_hash": config_hash,
        "command": command,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "files": files,
    }
    (out_dir / MANIFEST).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                                    encoding="utf-8")
