"""Plain-text matrix files.

A block is a line holding ``n`` followed by ``n`` rows of ``n`` entries
written ``a+bi``.  Pairs are two blocks separated by a blank line.  Floats
are printed with 17 significant digits so files round-trip exactly.
"""

from __future__ import annotations

import os

import numpy as np


class MatrixFileError(ValueError):
    pass


def format_complex(z) -> str:
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


def parse_complex(token: str) -> complex:
    tok = token.strip()
    if tok.endswith("i"):
        tok = tok[:-1] + "j"
    try:
        return complex(tok)
    except ValueError:
        raise MatrixFileError(f"bad matrix entry {token!r}") from None


def format_matrices(mats) -> str:
    blocks = []
    for M in mats:
        M = np.asarray(M)
        n = M.shape[0]
        lines = [str(n)]
        lines.extend(" ".join(format_complex(x) for x in row) for row in M)
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


def parse_matrices(text: str) -> list:
    lines = [ln.strip() for ln in text.splitlines()]
    mats = []
    i = 0
    while i < len(lines):
        if not lines[i]:
            i += 1
            continue
        try:
            n = int(lines[i])
        except ValueError:
            raise MatrixFileError(f"line {i + 1}: expected a dimension, got {lines[i]!r}") from None
        if n < 1:
            raise MatrixFileError(f"line {i + 1}: dimension must be positive")
        rows = lines[i + 1:i + 1 + n]
        if len(rows) < n or any(not r for r in rows):
            raise MatrixFileError(f"line {i + 1}: expected {n} rows")
        M = np.empty((n, n), dtype=complex)
        for r, row in enumerate(rows):
            toks = row.split()
            if len(toks) != n:
                raise MatrixFileError(f"line {i + 2 + r}: expected {n} entries, got {len(toks)}")
            M[r] = [parse_complex(t) for t in toks]
        mats.append(M)
        i += 1 + n
    if not mats:
        raise MatrixFileError("no matrices found")
    return mats


def read_matrices(path: str | os.PathLike) -> list:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise MatrixFileError(str(exc)) from None
    return parse_matrices(text)


def write_matrices(path: str | os.PathLike, mats) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_matrices(mats))
