"""Text format for sampled matrices.

One header line, then one line per column listing ``row:sign`` pairs::

    #sjl n=2 m=4 s=2 flavor=uniform seed=0x2a
    0:1,3:-1
    1:-1,2:1
"""

from __future__ import annotations

import re

import numpy as np

from .core import ConfigurationError, SjlMatrix, SjlParams

_HEADER = re.compile(r"^#sjl\s+(.*)$")


def format_matrix(A: SjlMatrix, seed: str = "") -> str:
    p = A.params
    lines = [f"#sjl n={p.n} m={p.m} s={p.s} flavor={p.flavor.value} seed={seed}"]
    for col in A.columns():
        lines.append(",".join(f"{r}:{g}" for r, g in col))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> tuple[SjlMatrix, str]:
    """Inverse of :func:`format_matrix`; returns the matrix and its seed tag."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not _HEADER.match(lines[0]):
        raise ConfigurationError("missing '#sjl' header line")
    fields = dict(tok.split("=", 1) for tok in _HEADER.match(lines[0]).group(1).split())
    try:
        params = SjlParams(int(fields["n"]), int(fields["m"]), int(fields["s"]), fields["flavor"])
    except KeyError as exc:
        raise ConfigurationError(f"header lacks {exc.args[0]!r}") from None
    body = [ln for ln in lines[1:] if not ln.startswith("#")]
    if len(body) != params.n:
        raise ConfigurationError(f"expected {params.n} column lines, found {len(body)}")
    rows = np.empty((params.n, params.s), dtype=np.int64)
    signs = np.empty((params.n, params.s), dtype=np.int8)
    for i, line in enumerate(body):
        pairs = [tok.split(":") for tok in line.split(",")]
        if len(pairs) != params.s:
            raise ConfigurationError(f"column {i} has {len(pairs)} entries, expected {params.s}")
        rows[i] = [int(r) for r, _ in pairs]
        signs[i] = [int(g) for _, g in pairs]
    return SjlMatrix(params, rows, signs), fields.get("seed", "")


def read_matrix(path) -> tuple[SjlMatrix, str]:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def write_matrix(path, A: SjlMatrix, seed: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_matrix(A, seed))
