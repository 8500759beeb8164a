"""Problem-instance serialization.

Binary layout (all little-endian)::

    offset  size       content
    0       8          magic b"SBLKPRB1"
    8       8          uint64 M
    16      8          uint64 N
    24      32         float64 lambda_true, snr_db, rho, sigma2_x
    56      8*M*N      float64 A, row-major
    ...     8*M        float64 y
    ...     8*N        float64 x (true signal; support = nonzero entries)

The CSV debug form has columns ``field,row,col,value`` with one line per
scalar header value and per array entry.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .problem_gen import SparseProblem, SparseSignal

MAGIC = b"SBLKPRB1"
_HEADER = struct.Struct("<8sQQdddd")
_F64 = np.dtype("<f8")


def write_problem(problem: SparseProblem, path) -> None:
    m, n = problem.A.shape
    sig = problem.signal
    header = _HEADER.pack(MAGIC, m, n, problem.lambda_true, problem.snr_db, sig.rho, sig.sigma2_x)
    with Path(path).open("wb") as fh:
        fh.write(header)
        for arr in (problem.A, problem.y, sig.values):
            fh.write(np.ascontiguousarray(arr, dtype=_F64).tobytes())


def read_problem(path) -> SparseProblem:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ParameterError(f"{path}: truncated header")
    magic, m, n, lam, snr_db, rho, sigma2_x = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ParameterError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 8 * (m * n + m + n)
    if len(data) != expected:
        raise ParameterError(f"{path}: expected {expected} bytes, found {len(data)}")
    body = np.frombuffer(data, dtype=_F64, offset=_HEADER.size).astype(float)
    A = body[: m * n].reshape(m, n)
    y = body[m * n: m * n + m]
    x = body[m * n + m:]
    signal = SparseSignal(x, np.flatnonzero(x), rho, sigma2_x)
    return SparseProblem(A, y, signal, lam, snr_db)


def write_problem_csv(problem: SparseProblem, path) -> None:
    sig = problem.signal
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["field", "row", "col", "value"])
        for name, value in (
            ("lambda_true", problem.lambda_true),
            ("snr_db", problem.snr_db),
            ("rho", sig.rho),
            ("sigma2_x", sig.sigma2_x),
        ):
            w.writerow([name, "", "", repr(float(value))])
        for (i, j), v in np.ndenumerate(problem.A):
            w.writerow(["A", i, j, repr(float(v))])
        for i, v in enumerate(problem.y):
            w.writerow(["y", i, "", repr(float(v))])
        for i, v in enumerate(sig.values):
            w.writerow(["x", i, "", repr(float(v))])


def read_problem_csv(path) -> SparseProblem:
    scalars, A_entries, y_entries, x_entries = {}, [], [], []
    with Path(path).open(newline="") as fh:
        for rec in csv.DictReader(fh):
            f, v = rec["field"], float(rec["value"])
            if f == "A":
                A_entries.append((int(rec["row"]), int(rec["col"]), v))
            elif f == "y":
                y_entries.append((int(rec["row"]), v))
            elif f == "x":
                x_entries.append((int(rec["row"]), v))
            else:
                scalars[f] = v
    m, n = len(y_entries), len(x_entries)
    A = np.zeros((m, n))
    for i, j, v in A_entries:
        A[i, j] = v
    y = np.zeros(m)
    for i, v in y_entries:
        y[i] = v
    x = np.zeros(n)
    for i, v in x_entries:
        x[i] = v
    signal = SparseSignal(x, np.flatnonzero(x), scalars["rho"], scalars["sigma2_x"])
    return SparseProblem(A, y, signal, scalars["lambda_true"], scalars["snr_db"])
