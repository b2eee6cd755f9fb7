"""Compact plane sets on a square grid, truncation [K]_r, rescaling, Hausdorff distance.

A :class:`GridSet` is the finite point cloud of its marked cell centres, so
the Hausdorff distance below is exact for that model; the discretisation
error against a continuum set is a separate, explicit O(h) term.
"""

from __future__ import annotations

import csv
import math
import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import EmptySetError, PreconditionError


@dataclass(frozen=True)
class Frame:
    center: complex
    half_width: float
    resolution: int

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not self.half_width > 0 or not math.isfinite(self.half_width):
            raise PreconditionError(f"half_width must be positive, got {self.half_width!r}")
        if int(self.resolution) != self.resolution or self.resolution < 2:
            raise PreconditionError(f"resolution must be an integer >= 2, got {self.resolution!r}")
        object.__setattr__(self, "half_width", float(self.half_width))
        object.__setattr__(self, "resolution", int(self.resolution))

    @property
    def spacing(self):
        return 2.0 * self.half_width / self.resolution

    @property
    def shape(self):
        return (self.resolution, self.resolution)

    def points(self):
        """Cell centres as an N x N complex array; row 0 is the top (largest imag)."""
        n, h = self.resolution, self.spacing
        offs = (np.arange(n) + 0.5) * h - self.half_width
        xs = self.center.real + offs
        ys = self.center.imag - offs
        return xs[None, :] + 1j * ys[:, None]

    def locate(self, z):
        """Integer (row, col) of the cell containing z; may fall outside [0, N)."""
        z = np.asarray(z)
        h = self.spacing
        col = np.floor((z.real - (self.center.real - self.half_width)) / h).astype(np.int64)
        row = np.floor(((self.center.imag + self.half_width) - z.imag) / h).astype(np.int64)
        return row, col

    def shifted(self, v):
        return Frame(self.center + v, self.half_width, self.resolution)


@dataclass(frozen=True, eq=False)
class GridSet:
    frame: Frame
    mask: np.ndarray
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool)
        if mask.shape != self.frame.shape:
            raise PreconditionError(f"mask shape {mask.shape} does not match frame {self.frame.shape}")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    def __eq__(self, other):
        if not isinstance(other, GridSet):
            return NotImplemented
        return self.frame == other.frame and np.array_equal(self.mask, other.mask)

    __hash__ = None

    @property
    def count(self):
        return int(self.mask.sum())

    @property
    def empty(self):
        return not self.mask.any()

    def points(self):
        """Marked cell centres, in row-major order."""
        return self.frame.points()[self.mask]

    @classmethod
    def from_points(cls, frame, zs):
        mask = np.zeros(frame.shape, dtype=bool)
        row, col = frame.locate(np.asarray(zs, dtype=complex))
        keep = (row >= 0) & (row < frame.resolution) & (col >= 0) & (col < frame.resolution)
        mask[row[keep], col[keep]] = True
        return cls(frame, mask)


def circle_band(frame, r):
    """Cells whose centre lies within h/2 of the circle |z| = r."""
    mod = np.abs(frame.points())
    return np.abs(mod - r) <= frame.spacing / 2


def truncate(gset, r):
    """[K]_r: marked cells with |z| <= r, plus the discrete circle |z| = r."""
    if not r > 0:
        raise PreconditionError("r must be positive")
    if r > gset.frame.half_width:
        raise PreconditionError(f"r={r} exceeds frame half_width {gset.frame.half_width}")
    mod = np.abs(gset.frame.points())
    mask = (gset.mask & (mod <= r)) | circle_band(gset.frame, r)
    return GridSet(gset.frame, mask, dict(gset.info))


def affine_rescale(gset, a, b, target):
    """Resample a(K - b) onto ``target``: a target cell is marked iff its
    preimage w/a + b lies in a marked source cell."""
    a = complex(a)
    if a == 0:
        raise PreconditionError("a must be nonzero")
    pre = target.points() / a + complex(b)
    row, col = gset.frame.locate(pre)
    n = gset.frame.resolution
    inside = (row >= 0) & (row < n) & (col >= 0) & (col < n)
    mask = np.zeros(target.shape, dtype=bool)
    mask[inside] = gset.mask[row[inside], col[inside]]
    outside = int((~inside).sum())
    frac = outside / inside.size
    if frac > 0.01:
        warnings.warn(
            f"affine_rescale: {outside} target cells ({100 * frac:.1f}%) map outside the source frame",
            RuntimeWarning,
            stacklevel=2,
        )
    return GridSet(target, mask, {"out_of_range": outside})


def _check_pair(a, b):
    if a.frame != b.frame:
        raise PreconditionError("Hausdorff distance needs both sets on the same frame")
    if a.empty or b.empty:
        raise EmptySetError("Hausdorff distance of an empty set is undefined")


def directed_sq_cells(a, b):
    """max over marked cells of A of the squared cell distance to B (integer)."""
    _check_pair(a, b)
    dt = _kernels.edt_sq(np.ascontiguousarray(b.mask))
    return int(dt[a.mask].max())


def hausdorff_sq_cells(a, b):
    """Squared Hausdorff distance in units of cells (exact integer)."""
    _check_pair(a, b)
    return max(directed_sq_cells(a, b), directed_sq_cells(b, a))


def hausdorff_distance(a, b):
    """Hausdorff distance between the marked cell-centre clouds of A and B."""
    return a.frame.spacing * math.sqrt(hausdorff_sq_cells(a, b))


# -- serialisation -------------------------------------------------------------


def write_pgm(gset, path, invert=True):
    """Binary PGM (P5).  Marked cells are black when ``invert`` (the default)."""
    img = np.where(gset.mask, 0, 255) if invert else np.where(gset.mask, 255, 0)
    write_pgm_array(img.astype(np.uint8), path)


def write_pgm_array(img, path):
    img = np.asarray(img, dtype=np.uint8)
    rows, cols = img.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (cols, rows))
        fh.write(img.tobytes())


def write_ppm_array(img, path):
    img = np.asarray(img, dtype=np.uint8)
    rows, cols, _ = img.shape
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (cols, rows))
        fh.write(img.tobytes())


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if m is None:
        raise ValueError(f"{path}: not a binary PGM")
    cols, rows, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM is supported")
    body = data[m.end(): m.end() + rows * cols]
    return np.frombuffer(body, dtype=np.uint8).reshape(rows, cols)


def write_points_csv(gset, path):
    """One ``re,im`` line per marked cell centre, with a header row."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["re", "im"])
        for z in gset.points():
            w.writerow([repr(float(z.real)), repr(float(z.imag))])


def read_points_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
