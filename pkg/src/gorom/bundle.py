"""Problem-bundle I/O.

A bundle is a directory holding ``model.json`` plus one MatrixMarket file
per affine term and per Gram matrix.  The JSON schema (version 1):

.. code-block:: json

    {
      "format": "gorom-bundle",
      "version": 1,
      "n": 900, "l": 30,
      "symmetry": "spd",
      "coercive_affine": true,
      "xi_ref": [1.0, ...],
      "domain": {"dim": 6, "lo": [...], "hi": [...], "scale": ["log", ...]},
      "operator": [{"coeff": {...}, "file": "A_000.mtx"}, ...],
      "rhs":      [{"coeff": {...}, "file": "b_000.mtx"}, ...],
      "output":   [{"coeff": {...}, "file": "L_000.mtx"}, ...],
      "gram_v0": "R_V0.mtx",
      "gram_z": "R_Z.mtx"
    }

Coefficient descriptors are ``{"kind": "constant", "c": 1.0}`` or
``{"kind": "monomial", "c": 1.0, "exponents": [0, 1, ...]}``.  All numbers
are serialized with full float64 round-trip precision, so store -> load
reproduces matrix entries bit-exactly.
"""

import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.io import mmread, mmwrite

from .affine import AffineForm, CoefficientFn, ParameterDomain
from .exceptions import BundleFormatError
from .model import FullOrderModel

__all__ = ["store_bundle", "load_bundle", "BUNDLE_FORMAT", "BUNDLE_VERSION"]

BUNDLE_FORMAT = "gorom-bundle"
BUNDLE_VERSION = 1
# 17 significant digits: lossless text round trip for float64
_MM_PRECISION = 17


def _write_matrix(path, M, vector=False):
    if vector:
        M = np.asarray(M, dtype=float).reshape(-1, 1)
    if sp.issparse(M):
        M = M.tocoo()
    mmwrite(str(path), M, precision=_MM_PRECISION)


def _read_matrix(path, vector=False):
    if not Path(path).is_file():
        raise BundleFormatError(f"bundle is missing file {Path(path).name!r}")
    M = mmread(str(path))
    if vector:
        return np.asarray(M, dtype=float).ravel()
    return M.tocsr() if sp.issparse(M) else np.asarray(M, dtype=float)


def _form_entries(form, stem, directory, vector=False):
    entries = []
    for i, (coeff, term) in enumerate(form.terms):
        fname = f"{stem}_{i:03d}.mtx"
        _write_matrix(directory / fname, term, vector=vector)
        entries.append({"coeff": coeff.to_dict(), "file": fname})
    return entries


def _form_from_entries(entries, directory, shape, vector=False, what=""):
    terms = []
    for entry in entries:
        coeff = CoefficientFn.from_dict(entry["coeff"])
        term = _read_matrix(directory / entry["file"], vector=vector)
        if term.shape != shape:
            raise BundleFormatError(
                f"{what} term {entry['file']!r} has shape {term.shape}, expected {shape}"
            )
        terms.append((coeff, term))
    return AffineForm(terms)


def store_bundle(model, path):
    """Write ``model`` as a bundle directory at ``path`` (created if needed)."""
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    meta = {
        "format": BUNDLE_FORMAT,
        "version": BUNDLE_VERSION,
        "n": int(model.n),
        "l": int(model.l),
        "symmetry": model.symmetry,
        "coercive_affine": model.coercive_affine,
        "xi_ref": model.xi_ref.tolist(),
        "domain": model.domain.to_dict(),
        "operator": _form_entries(model.A, "A", directory),
        "rhs": _form_entries(model.b, "b", directory, vector=True),
        "output": _form_entries(model.L, "L", directory),
        "gram_v0": "R_V0.mtx",
        "gram_z": "R_Z.mtx",
    }
    _write_matrix(directory / "R_V0.mtx", model.gram_v0)
    _write_matrix(directory / "R_Z.mtx", model.gram_z)
    with open(directory / "model.json", "w") as fh:
        json.dump(meta, fh, indent=1)
        fh.write("\n")


def load_bundle(path, validate=True):
    """Load a bundle directory into a :class:`FullOrderModel`."""
    directory = Path(path)
    meta_path = directory / "model.json"
    if not meta_path.is_file():
        raise BundleFormatError(f"bundle is missing file 'model.json' in {directory}")
    try:
        with open(meta_path) as fh:
            meta = json.load(fh)
    except json.JSONDecodeError as exc:
        raise BundleFormatError(f"malformed model.json: {exc}") from exc
    if meta.get("format") != BUNDLE_FORMAT:
        raise BundleFormatError(f"not a {BUNDLE_FORMAT} bundle: {meta_path}")
    if meta.get("version") != BUNDLE_VERSION:
        raise BundleFormatError(f"unsupported bundle version {meta.get('version')!r}")
    try:
        n = int(meta["n"])
        l = int(meta["l"])
        domain = ParameterDomain.from_dict(meta["domain"])
        A = _form_from_entries(meta["operator"], directory, (n, n), what="operator")
        b = _form_from_entries(meta["rhs"], directory, (n,), vector=True, what="rhs")
        L = _form_from_entries(meta["output"], directory, (l, n), what="output")
        gram_v0 = _read_matrix(directory / meta["gram_v0"])
        gram_z = _read_matrix(directory / meta["gram_z"])
        return FullOrderModel(
            A, b, L, gram_v0, gram_z, domain,
            symmetry=meta["symmetry"],
            xi_ref=meta["xi_ref"],
            coercive_affine=meta.get("coercive_affine", False),
            validate=validate,
        )
    except KeyError as exc:
        raise BundleFormatError(f"model.json is missing field {exc}") from exc
