"""Grid puzzles (Sudoku, Hitori, Fillomino): instances, parsing, verification."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

__all__ = [
    "GRID_KINDS",
    "Grid",
    "BlackMask",
    "Violation",
    "VerifyReport",
    "GridFormatError",
    "parse_grid",
    "verify_sudoku",
    "verify_hitori",
    "verify_fillomino",
    "verify_grid_answer",
]

GRID_KINDS = ("sudoku", "hitori", "fillomino")
MIN_SIZE, MAX_SIZE = 3, 9


class GridFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Square grid of digits, 0 meaning empty.  Indexing is 1-based: ``g[r, c]``."""

    size: int
    cells: tuple  # rows of ints
    kind: str = "sudoku"

    def __post_init__(self):
        cells = tuple(tuple(int(v) for v in row) for row in self.cells)
        object.__setattr__(self, "cells", cells)
        if self.kind not in GRID_KINDS:
            raise GridFormatError(f"unknown grid kind {self.kind!r}")
        if self.size < 1 or len(cells) != self.size or any(len(row) != self.size for row in cells):
            raise GridFormatError(f"grid must be {self.size}x{self.size}")
        if self.kind == "sudoku" and self.size != 9:
            raise GridFormatError("sudoku grids are 9x9")
        if any(not 0 <= v <= 9 for row in cells for v in row):
            raise GridFormatError("cell values must be digits 0-9")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], kind: str = "sudoku") -> "Grid":
        return cls(len(rows), tuple(tuple(r) for r in rows), kind)

    def __getitem__(self, rc) -> int:
        r, c = rc
        if not (1 <= r <= self.size and 1 <= c <= self.size):
            raise IndexError(rc)
        return self.cells[r - 1][c - 1]

    def filled(self) -> bool:
        return all(v for row in self.cells for v in row)

    def givens(self):
        """(row, col, value) for every nonzero cell, row-major, 1-based."""
        return [(r + 1, c + 1, v) for r, row in enumerate(self.cells) for c, v in enumerate(row) if v]

    def to_text(self) -> str:
        return "\n".join("".join(str(v) for v in row) for row in self.cells)

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True)
class BlackMask:
    cells: tuple  # rows of bools

    def __post_init__(self):
        cells = tuple(tuple(bool(v) for v in row) for row in self.cells)
        object.__setattr__(self, "cells", cells)
        if any(len(row) != len(cells) for row in cells):
            raise GridFormatError("mask must be square")

    @property
    def size(self) -> int:
        return len(self.cells)

    @classmethod
    def empty(cls, n: int) -> "BlackMask":
        return cls(tuple((False,) * n for _ in range(n)))

    @classmethod
    def from_cells(cls, n: int, black) -> "BlackMask":
        rows = [[False] * n for _ in range(n)]
        for r, c in black:
            rows[r - 1][c - 1] = True
        return cls(tuple(tuple(r) for r in rows))

    def __getitem__(self, rc) -> bool:
        r, c = rc
        if not (1 <= r <= self.size and 1 <= c <= self.size):
            raise IndexError(rc)
        return self.cells[r - 1][c - 1]

    def black_cells(self):
        return [(r + 1, c + 1) for r, row in enumerate(self.cells) for c, v in enumerate(row) if v]

    def to_text(self) -> str:
        return "\n".join("".join("#" if v else "." for v in row) for row in self.cells)


@dataclass(frozen=True)
class Violation:
    rule: int  # the puzzle's numbered rule; 0 = givens not preserved
    detail: str


@dataclass(frozen=True)
class VerifyReport:
    violations: tuple = field(default=())

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid


def parse_grid(text: str, kind: str) -> Grid:
    """Parse digit rows separated by newlines or spaces."""
    rows = text.split()
    if not rows:
        raise GridFormatError("empty grid")
    for row in rows:
        bad = re.search(r"[^0-9]", row)
        if bad:
            raise GridFormatError(f"non-digit character {bad.group()!r} in row {row!r}")
    n = len(rows)
    if any(len(row) != len(rows[0]) for row in rows):
        raise GridFormatError("ragged rows")
    if len(rows[0]) != n:
        raise GridFormatError(f"{n} rows of length {len(rows[0])}: grid must be square")
    if kind == "sudoku" and n != 9:
        raise GridFormatError("sudoku grids are 9x9")
    if not MIN_SIZE <= n <= MAX_SIZE:
        raise GridFormatError(f"grid size {n} outside {MIN_SIZE}..{MAX_SIZE}")
    return Grid(n, tuple(tuple(int(ch) for ch in row) for row in rows), kind)


def _require_same_size(a, b):
    if a.size != b.size:
        raise ValueError(f"size mismatch: {a.size} vs {b.size}")


def _require_filled(solution: Grid):
    if not solution.filled():
        raise ValueError("solution has empty cells")


def _givens_preserved(given: Grid, solution: Grid) -> list:
    out = []
    for r, c, v in given.givens():
        if solution[r, c] != v:
            out.append(Violation(0, f"given {v} at ({r},{c}) changed to {solution[r, c]}"))
    return out


def verify_sudoku(given: Grid, solution: Grid) -> VerifyReport:
    _require_same_size(given, solution)
    if solution.size != 9:
        raise ValueError("sudoku grids are 9x9")
    _require_filled(solution)
    cells = solution.cells
    want = set(range(1, 10))
    out = []
    for r in range(9):
        if set(cells[r]) != want:
            out.append(Violation(1, f"row {r + 1} is not a permutation of 1-9"))
    for c in range(9):
        if {cells[r][c] for r in range(9)} != want:
            out.append(Violation(2, f"column {c + 1} is not a permutation of 1-9"))
    for br in range(3):
        for bc in range(3):
            box = {cells[3 * br + i][3 * bc + j] for i in range(3) for j in range(3)}
            if box != want:
                out.append(Violation(3, f"box ({br + 1},{bc + 1}) is not a permutation of 1-9"))
    out += _givens_preserved(given, solution)
    return VerifyReport(tuple(out))


def _components(n: int, member, same) -> list:
    """Orthogonally connected components of cells satisfying ``member``; ``same`` joins neighbours."""
    seen = set()
    comps = []
    for r in range(n):
        for c in range(n):
            if (r, c) in seen or not member(r, c):
                continue
            comp = []
            stack = [(r, c)]
            seen.add((r, c))
            while stack:
                cr, cc = stack.pop()
                comp.append((cr, cc))
                for nr, nc in ((cr - 1, cc), (cr + 1, cc), (cr, cc - 1), (cr, cc + 1)):
                    if 0 <= nr < n and 0 <= nc < n and (nr, nc) not in seen and member(nr, nc) and same((cr, cc), (nr, nc)):
                        seen.add((nr, nc))
                        stack.append((nr, nc))
            comps.append(sorted(comp))
    return comps


def verify_hitori(grid: Grid, mask: BlackMask) -> VerifyReport:
    _require_same_size(grid, mask)
    n = grid.size
    v, b = grid.cells, mask.cells
    out = []
    for r in range(n):
        seen = {}
        for c in range(n):
            if not b[r][c]:
                if v[r][c] in seen:
                    out.append(Violation(1, f"row {r + 1} repeats {v[r][c]} in columns {seen[v[r][c]] + 1} and {c + 1}"))
                seen.setdefault(v[r][c], c)
    for c in range(n):
        seen = {}
        for r in range(n):
            if not b[r][c]:
                if v[r][c] in seen:
                    out.append(Violation(1, f"column {c + 1} repeats {v[r][c]} in rows {seen[v[r][c]] + 1} and {r + 1}"))
                seen.setdefault(v[r][c], r)
    for r in range(n):
        for c in range(n):
            if b[r][c] and r + 1 < n and b[r + 1][c]:
                out.append(Violation(2, f"black cells ({r + 1},{c + 1}) and ({r + 2},{c + 1}) touch"))
            if b[r][c] and c + 1 < n and b[r][c + 1]:
                out.append(Violation(2, f"black cells ({r + 1},{c + 1}) and ({r + 1},{c + 2}) touch"))
    white = _components(n, lambda r, c: not b[r][c], lambda a, z: True)
    if len(white) > 1:
        out.append(Violation(3, f"white cells form {len(white)} separate groups"))
    return VerifyReport(tuple(out))


def verify_fillomino(given: Grid, solution: Grid) -> VerifyReport:
    """Every maximal same-valued region must have exactly as many cells as its value.

    Same-size regions touching is covered too: two such regions would be
    one larger connected component of that value.
    """
    _require_same_size(given, solution)
    _require_filled(solution)
    n = solution.size
    v = solution.cells
    out = []
    for comp in _components(n, lambda r, c: True, lambda a, z: v[a[0]][a[1]] == v[z[0]][z[1]]):
        r, c = comp[0]
        val = v[r][c]
        if len(comp) != val:
            out.append(Violation(2, f"region of {val}s at ({r + 1},{c + 1}) has {len(comp)} cells"))
    out += _givens_preserved(given, solution)
    return VerifyReport(tuple(out))


def verify_grid_answer(kind: str, given: Grid, answer) -> VerifyReport:
    if kind == "sudoku":
        return verify_sudoku(given, answer)
    if kind == "hitori":
        return verify_hitori(given, answer)
    if kind == "fillomino":
        return verify_fillomino(given, answer)
    raise ValueError(f"not a grid puzzle: {kind}")
