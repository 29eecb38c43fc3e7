"""JSON file formats for matrices, grid states, Wigner grids and frames.

Every document carries ``schema_version`` and ``kind``. Arrays are flat,
row-major; complex arrays interleave real and imaginary parts. Paths ending
in ``.gz`` are gzip-compressed. Python's float repr round-trips exactly, so a
written file reloads bit-identically.
"""

import gzip
import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .grids import Axis, GridState, WignerGrid
from .lagrangian import LagrangianFrame, LagrangianPlane
from .linalg import as_spd, as_symmetric, is_symplectic

SCHEMA_VERSION = "1.0"
MATRIX_KINDS = ("sym", "symplectic", "covariance")


def _open(path, mode):
    path = str(path)
    if path.endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def _to_builtin(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(doc, indent=None):
    return json.dumps(doc, sort_keys=True, indent=indent, default=_to_builtin)


def read_json(path):
    """Load a JSON document; malformed or unreadable input raises ValidationError."""
    try:
        with _open(path, "r") as fh:
            doc = json.load(fh)
    except (OSError, EOFError, UnicodeDecodeError) as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: top-level JSON value must be an object")
    return doc


def write_json(path, doc):
    with _open(path, "w") as fh:
        fh.write(dumps(doc))


def file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _field(doc, key, where):
    if key not in doc:
        raise ValidationError(f"{where}: missing field {key!r}")
    return doc[key]


def _floats(values, count, where):
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: data must be numeric") from exc
    if arr.ndim != 1 or arr.size != count:
        raise ValidationError(f"{where}: expected {count} numbers, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{where}: data must be finite")
    return arr


def _check_version(doc, where):
    v = _field(doc, "schema_version", where)
    if str(v).split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise ValidationError(f"{where}: unsupported schema_version {v!r}")


# -- matrices ------------------------------------------------------------------


def matrix_doc(M, kind="sym", hbar=None):
    M = np.asarray(M, dtype=float)
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, "n": int(M.shape[0]),
           "data": M.ravel().tolist()}
    if hbar is not None:
        doc["hbar"] = float(hbar)
    return doc


def parse_matrix(doc, where="matrix", expect=None):
    """Validate a MatrixFile document.

    ``n`` is the matrix order. ``sym`` and ``covariance`` matrices must be
    symmetric (covariances also positive-definite); ``symplectic`` ones must
    pass the symplectic test.

    Returns:
        tuple[ndarray, dict]: the matrix and the document.
    """
    _check_version(doc, where)
    kind = _field(doc, "kind", where)
    if kind not in MATRIX_KINDS:
        raise ValidationError(f"{where}: kind must be one of {MATRIX_KINDS}, got {kind!r}")
    if expect is not None and kind not in expect:
        raise ValidationError(f"{where}: expected kind in {expect}, got {kind!r}")
    n = _field(doc, "n", where)
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValidationError(f"{where}: n must be a positive integer")
    M = _floats(_field(doc, "data", where), n * n, where).reshape(n, n)
    if kind == "sym":
        as_symmetric(M, name=where)
    elif kind == "covariance":
        as_spd(M, name=where)
    else:
        ok, res = is_symplectic(M)
        if not ok:
            raise ValidationError(f"{where}: not symplectic (residual {res:.3e})")
    if "hbar" in doc and not (isinstance(doc["hbar"], (int, float)) and doc["hbar"] > 0):
        raise ValidationError(f"{where}: hbar must be a positive number")
    return M, doc


def load_matrix(path, expect=None):
    return parse_matrix(read_json(path), where=str(path), expect=expect)[0]


# -- grid states and Wigner grids ----------------------------------------------


def _axes(items, where):
    if not isinstance(items, list) or not 1 <= len(items) <= 2:
        raise ValidationError(f"{where}: axes must be a list of 1 or 2 axis specs")
    try:
        return tuple(Axis.from_dict(a) for a in items)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{where}: bad axis spec: {exc}") from exc


def _interleave(values):
    v = np.asarray(values, dtype=complex).ravel()
    out = np.empty(2 * v.size)
    out[0::2], out[1::2] = v.real, v.imag
    return out.tolist()


def _deinterleave(data, shape, where):
    count = int(np.prod(shape))
    arr = _floats(data, 2 * count, where)
    return (arr[0::2] + 1j * arr[1::2]).reshape(shape)


def state_doc(psi):
    return {"schema_version": SCHEMA_VERSION, "kind": "state", "n": psi.n,
            "hbar": psi.hbar, "axes": [a.to_dict() for a in psi.axes],
            "values": _interleave(psi.values)}


def parse_state(doc, where="state"):
    _check_version(doc, where)
    if doc.get("kind", "state") != "state":
        raise ValidationError(f"{where}: expected kind 'state', got {doc.get('kind')!r}")
    axes = _axes(_field(doc, "axes", where), where)
    n = _field(doc, "n", where)
    if n != len(axes):
        raise ValidationError(f"{where}: n={n} but {len(axes)} axes given")
    hbar = _field(doc, "hbar", where)
    shape = tuple(a.points for a in axes)
    values = _deinterleave(_field(doc, "values", where), shape, where)
    return GridState(axes, values, hbar)


def load_state(path):
    return parse_state(read_json(path), where=str(path))


def wigner_doc(W, kind=None):
    kind = kind or ("cross_wigner" if W.is_complex else "wigner")
    values = _interleave(W.values) if W.is_complex else np.asarray(W.values).ravel().tolist()
    return {"schema_version": SCHEMA_VERSION, "kind": kind, "n": W.n, "hbar": W.hbar,
            "x_axes": [a.to_dict() for a in W.x_axes],
            "p_axes": [a.to_dict() for a in W.p_axes],
            "imag_residual": W.imag_residual, "values": values}


def parse_wigner(doc, where="wigner"):
    _check_version(doc, where)
    kind = _field(doc, "kind", where)
    if kind not in ("wigner", "cross_wigner"):
        raise ValidationError(f"{where}: kind must be 'wigner' or 'cross_wigner'")
    xa = _axes(_field(doc, "x_axes", where), where)
    pa = _axes(_field(doc, "p_axes", where), where)
    shape = tuple(a.points for a in xa + pa)
    if kind == "wigner":
        vals = _floats(_field(doc, "values", where), int(np.prod(shape)), where).reshape(shape)
    else:
        vals = _deinterleave(_field(doc, "values", where), shape, where)
    return WignerGrid(xa, pa, vals, _field(doc, "hbar", where), doc.get("imag_residual", 0.0))


def load_wigner(path):
    return parse_wigner(read_json(path), where=str(path))


# -- frames --------------------------------------------------------------------


def frame_doc(f):
    return {"schema_version": SCHEMA_VERSION, "kind": "frame", "n": f.n,
            "ell": f.ell.basis.ravel().tolist(),
            "ell_prime": f.ell_prime.basis.ravel().tolist()}


def parse_frame(doc, where="frame"):
    """A frame document holds two ``2n x n`` plane bases, row-major."""
    _check_version(doc, where)
    if doc.get("kind") != "frame":
        raise ValidationError(f"{where}: expected kind 'frame'")
    n = _field(doc, "n", where)
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"{where}: n must be a positive integer")
    ell = _floats(_field(doc, "ell", where), 2 * n * n, where).reshape(2 * n, n)
    ellp = _floats(_field(doc, "ell_prime", where), 2 * n * n, where).reshape(2 * n, n)
    return LagrangianFrame(LagrangianPlane(ell), LagrangianPlane(ellp))


def load_frame(path):
    return parse_frame(read_json(path), where=str(path))
