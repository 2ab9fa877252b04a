"""Canonical JSON reports and one-line summaries."""
from __future__ import annotations

import json

from .rational import to_json_number

FORMAT = "monocone-report/1"


def build(command, config, result, expected=None, matched=None) -> dict:
    body = {"format": FORMAT, "command": command, "config": config, "result": result}
    if expected is not None:
        body["expected"] = list(expected)
        body["matches_expected"] = bool(matched)
    return body


def dumps(report) -> str:
    """Canonical text: sorted keys, fixed indentation, trailing newline.

    Reports carry no timestamps, so equal inputs give byte-identical output.
    """
    return json.dumps(report, indent=2, sort_keys=True, default=_fallback) + "\n"


def _fallback(x):
    try:
        return to_json_number(x)
    except Exception:
        return str(x)


def summary(report) -> str:
    res = report.get("result", {})
    cmd = report.get("command")
    if cmd == "coderivative":
        val = res.get("value", {})
        line = f"coderivative ({res.get('kind')}): {val.get('type')} [{res.get('exactness')}]"
    elif cmd == "check-monotone":
        pw = res.get("pairwise", {})
        hy = res.get("hypomonotonicity", {})
        line = (f"pairwise inf product {pw.get('inf_product')}, monotone on samples: {pw.get('monotone_on_samples')}; "
                f"r_hat {hy.get('r_hat')}")
    else:
        line = f"{cmd}: {res.get('verdict')}"
        if res.get("route"):
            line += f" (route {res['route']})"
        if res.get("reason"):
            line += f" - {res['reason']}"
    if "matches_expected" in report:
        line += "  [expected: " + ", ".join(report["expected"]) + ("; ok]" if report["matches_expected"] else "; MISMATCH]")
    return line
