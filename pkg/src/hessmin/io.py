"""Bit-exact field persistence, profile CSV, and report documents.

Field file layout (line oriented, text):

    HESSMIN-FIELD 1
    n <2|3>
    N <int>
    h <decimal>
    values
    <N^n decimals, row-major with the last axis fastest, N per line>
    mask
    <N^n tokens from {I,B,E}, same order, N per line>

Values are written with shortest round-trip decimal formatting (repr), so a
read-after-write reproduces every float bit-exactly. Writes go through a
temporary file in the target directory followed by an atomic rename.
"""

from __future__ import annotations

import os
import tempfile
from typing import Sequence

import numpy as np

from .diagnostics import DecayProfile
from .errors import FormatError, IoError
from .mesh import DiscMesh, NodeClass, ScalarField, build_mesh

MAGIC = "HESSMIN-FIELD 1"

_MASK_TOKEN = {NodeClass.INTERIOR: "I", NodeClass.BAND: "B", NodeClass.EXTERIOR: "E"}


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".hessmin-", suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_field(u: ScalarField, path: str) -> None:
    """Persist a scalar field with bit-exact decimal values."""
    mesh = u.mesh
    N = mesh.N
    flat = u.values.reshape(-1)
    mask_flat = mesh.node_class.reshape(-1)
    lines = [MAGIC, f"n {mesh.n}", f"N {N}", f"h {mesh.h!r}", "values"]
    for start in range(0, flat.size, N):
        lines.append(" ".join(repr(float(v)) for v in flat[start : start + N]))
    lines.append("mask")
    for start in range(0, mask_flat.size, N):
        lines.append(
            " ".join(_MASK_TOKEN[NodeClass(c)] for c in mask_flat[start : start + N])
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def read_field(path: str) -> ScalarField:
    """Read a field file back; the values round-trip bit-exactly.

    Raises:
        IoError: unreadable path.
        FormatError: bad magic, malformed header, wrong counts, or a mask
            inconsistent with the mesh classification.
    """
    try:
        with open(path, "r") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    lines = raw.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise FormatError(f"bad magic line, expected {MAGIC!r}")

    def header_int(idx: int, key: str) -> int:
        parts = lines[idx].split()
        if len(parts) != 2 or parts[0] != key:
            raise FormatError(f"line {idx + 1}: expected '{key} <value>'")
        try:
            return int(parts[1])
        except ValueError as exc:
            raise FormatError(f"line {idx + 1}: bad integer for {key}") from exc

    if len(lines) < 6:
        raise FormatError("truncated header")
    n = header_int(1, "n")
    N = header_int(2, "N")
    parts = lines[3].split()
    if len(parts) != 2 or parts[0] != "h":
        raise FormatError("line 4: expected 'h <decimal>'")
    try:
        h_declared = float(parts[1])
    except ValueError as exc:
        raise FormatError("line 4: bad decimal for h") from exc
    if lines[4].strip() != "values":
        raise FormatError("line 5: expected 'values'")

    mesh = build_mesh(n, N)
    if abs(h_declared - mesh.h) > 1e-12 * mesh.h:
        raise FormatError(
            f"declared h {h_declared!r} inconsistent with N={N} (expected {mesh.h!r})"
        )
    total = N**n

    try:
        mask_start = lines.index("mask", 5)
    except ValueError as exc:
        raise FormatError("missing 'mask' section") from exc

    value_tokens = " ".join(lines[5:mask_start]).split()
    if len(value_tokens) != total:
        raise FormatError(
            f"value count {len(value_tokens)} does not match N^n = {total}"
        )
    try:
        values = np.array([float(t) for t in value_tokens]).reshape(mesh.shape)
    except ValueError as exc:
        raise FormatError(f"non-numeric value token: {exc}") from exc

    mask_tokens = " ".join(lines[mask_start + 1 :]).split()
    if len(mask_tokens) != total:
        raise FormatError(f"mask count {len(mask_tokens)} does not match N^n = {total}")
    token_to_class = {"I": NodeClass.INTERIOR, "B": NodeClass.BAND, "E": NodeClass.EXTERIOR}
    try:
        mask = np.array([token_to_class[t] for t in mask_tokens], dtype=np.int8)
    except KeyError as exc:
        raise FormatError(f"bad mask token {exc}") from exc
    if not np.array_equal(mask.reshape(mesh.shape), mesh.node_class):
        raise FormatError("mask does not match the mesh classification for this n, N")
    return ScalarField(mesh, values)


def write_profile_csv(profile: DecayProfile, path: str) -> None:
    """Profile CSV with header r,phi,sigma and >= 12 significant digits."""
    lines = ["r,phi,sigma"]
    for r, p, s in zip(profile.radii, profile.phi, profile.sigma):
        lines.append(f"{r:.15g},{p:.15g},{s:.15g}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_profile_csv(path: str) -> DecayProfile:
    """Read a profile CSV written by write_profile_csv (or hand-made)."""
    try:
        with open(path, "r") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not lines or lines[0].replace(" ", "") != "r,phi,sigma":
        raise FormatError("profile CSV must start with header 'r,phi,sigma'")
    radii, phi, sigma = [], [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 3:
            raise FormatError(f"profile row needs 3 columns: {ln!r}")
        try:
            radii.append(float(parts[0]))
            phi.append(float(parts[1]))
            sigma.append(float(parts[2]))
        except ValueError as exc:
            raise FormatError(f"non-numeric profile entry: {ln!r}") from exc
    return DecayProfile(x0=(), radii=np.array(radii), phi=np.array(phi), sigma=np.array(sigma))


def write_report(entries: Sequence, path: str) -> None:
    """Key-value report document, one 'key: value' per line."""
    lines = []
    for key, value in entries:
        if isinstance(value, float):
            lines.append(f"{key}: {value:.17g}")
        else:
            lines.append(f"{key}: {value}")
    _atomic_write(path, "\n".join(lines) + "\n")
