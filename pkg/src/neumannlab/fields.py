"""Coefficient functions over space.

Scalar coefficients are small callable objects evaluated on arrays of points
of shape (..., dim).  The closed preset family (const / affine / sine) can be
flattened to seven floats for the compiled kernels:

    value(x) = c0 + c1 . x + amp * sin(k . x + phase)

Tabulated fields (grid values, multilinear interpolation) and raw Python
callables are supported everywhere except inside the compiled kernels.
"""

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import ConfigError

# layout of the 7-float kernel encoding: c0, c1[0], c1[1], amp, k[0], k[1], phase
KERNEL_PARAMS = 7


class ScalarField:
    """Base scalar coefficient; subclasses implement __call__ on (..., dim) points."""

    def __call__(self, x):
        raise NotImplementedError

    def kernel_params(self):
        """7-float encoding for the compiled kernels, or None if not encodable."""
        return None

    def to_config(self):
        raise NotImplementedError(f"{type(self).__name__} is not config-serializable")


class Const(ScalarField):
    def __init__(self, value):
        self.value = float(value)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], self.value)

    def kernel_params(self):
        return np.array([self.value, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])

    def to_config(self):
        return {"preset": "const", "value": self.value}


class Affine(ScalarField):
    """c0 + c1 . x"""

    def __init__(self, c0, c1):
        self.c0 = float(c0)
        self.c1 = np.atleast_1d(np.asarray(c1, dtype=float))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.c0 + x @ self.c1

    def kernel_params(self):
        c1 = np.zeros(2)
        c1[: self.c1.size] = self.c1
        return np.array([self.c0, c1[0], c1[1], 0.0, 0.0, 0.0, 0.0])

    def to_config(self):
        return {"preset": "affine", "c0": self.c0, "c1": [float(v) for v in self.c1]}


class Sine(ScalarField):
    """offset + amplitude * sin(k . x + phase)"""

    def __init__(self, offset, amplitude, wavevec, phase=0.0):
        self.offset = float(offset)
        self.amplitude = float(amplitude)
        self.wavevec = np.atleast_1d(np.asarray(wavevec, dtype=float))
        self.phase = float(phase)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.offset + self.amplitude * np.sin(x @ self.wavevec + self.phase)

    def kernel_params(self):
        k = np.zeros(2)
        k[: self.wavevec.size] = self.wavevec
        return np.array([self.offset, 0.0, 0.0, self.amplitude, k[0], k[1], self.phase])

    def to_config(self):
        return {
            "preset": "sine",
            "offset": self.offset,
            "amplitude": self.amplitude,
            "wavevec": [float(v) for v in self.wavevec],
            "phase": self.phase,
        }


class Tabulated(ScalarField):
    """Values on a rectilinear grid, multilinear interpolation, clamped extrapolation."""

    def __init__(self, axes, values):
        self.axes = [np.asarray(a, dtype=float) for a in np.atleast_2d(axes)] \
            if isinstance(axes[0], (list, tuple, np.ndarray)) else [np.asarray(axes, dtype=float)]
        self.values = np.asarray(values, dtype=float)
        self._interp = RegularGridInterpolator(
            tuple(self.axes), self.values, method="linear", bounds_error=False, fill_value=None
        )

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        pts = x.reshape(-1, x.shape[-1])
        clipped = np.column_stack(
            [np.clip(pts[:, i], a[0], a[-1]) for i, a in enumerate(self.axes)]
        )
        return self._interp(clipped).reshape(x.shape[:-1])

    def to_config(self):
        return {
            "preset": "table",
            "axes": [[float(v) for v in a] for a in self.axes],
            "values": self.values.tolist(),
        }


class FuncField(ScalarField):
    """Wraps an arbitrary vectorized callable f(points (...,dim)) -> (...)."""

    def __init__(self, fn):
        self.fn = fn

    def __call__(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)


def as_scalar_field(obj):
    if isinstance(obj, ScalarField):
        return obj
    if isinstance(obj, (int, float)):
        return Const(obj)
    if callable(obj):
        return FuncField(obj)
    raise TypeError(f"cannot interpret {obj!r} as a scalar field")


class VectorField:
    """Vector coefficient assembled from per-component scalar fields."""

    def __init__(self, components):
        self.components = [as_scalar_field(c) for c in components]

    @property
    def dim(self):
        return len(self.components)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.stack([c(x) for c in self.components], axis=-1)

    def kernel_params(self):
        ps = [c.kernel_params() for c in self.components]
        if any(p is None for p in ps):
            return None
        return np.stack(ps, axis=0)

    def to_config(self):
        return [c.to_config() for c in self.components]


def as_vector_field(obj, dim):
    if isinstance(obj, VectorField):
        return obj
    if isinstance(obj, (int, float)):
        return VectorField([Const(obj)] * dim)
    if isinstance(obj, ScalarField):
        if dim != 1:
            raise ValueError("a bare scalar field only makes a 1D vector field")
        return VectorField([obj])
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if len(seq) != dim:
            raise ValueError(f"vector field needs {dim} components, got {len(seq)}")
        return VectorField(seq)
    if callable(obj) and not isinstance(obj, ScalarField):
        raise TypeError("wrap vector callables component-wise")
    raise TypeError(f"cannot interpret {obj!r} as a vector field")


class MatrixField:
    """Matrix coefficient: either scale * identity or a full grid of scalar entries."""

    def __init__(self, entries=None, scale=None, dim=None):
        if (entries is None) == (scale is None):
            raise ValueError("give exactly one of entries / scale")
        if scale is not None:
            self.scale = as_scalar_field(scale)
            self.entries = None
            self.dim = dim
        else:
            self.entries = [[as_scalar_field(e) for e in row] for row in entries]
            self.scale = None
            self.dim = len(self.entries)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.scale is not None:
            s = self.scale(x)
            return s[..., None, None] * np.eye(self.dim)
        rows = [np.stack([e(x) for e in row], axis=-1) for row in self.entries]
        return np.stack(rows, axis=-2)

    def to_config(self):
        if self.scale is not None:
            return {"scale": self.scale.to_config()}
        return {"entries": [[e.to_config() for e in row] for row in self.entries]}


def as_matrix_field(obj, dim):
    if isinstance(obj, MatrixField):
        if obj.scale is not None and obj.dim is None:
            obj.dim = dim
        return obj
    if isinstance(obj, (int, float)) or isinstance(obj, ScalarField) or callable(obj):
        return MatrixField(scale=obj, dim=dim)
    if isinstance(obj, (list, tuple, np.ndarray)):
        return MatrixField(entries=obj)
    raise TypeError(f"cannot interpret {obj!r} as a matrix field")


def scalar_field_from_config(cfg, path="field"):
    """Build a ScalarField from a config mapping; raises ConfigError on bad input."""
    if isinstance(cfg, (int, float)):
        return Const(cfg)
    if not isinstance(cfg, dict) or "preset" not in cfg:
        raise ConfigError(f"{path}: expected a number or a preset mapping")
    preset = cfg["preset"]
    try:
        if preset == "const":
            return Const(cfg["value"])
        if preset == "affine":
            return Affine(cfg["c0"], cfg["c1"])
        if preset == "sine":
            return Sine(cfg["offset"], cfg["amplitude"], cfg["wavevec"], cfg.get("phase", 0.0))
        if preset == "table":
            return Tabulated(cfg["axes"], cfg["values"])
    except KeyError as exc:
        raise ConfigError(f"{path}: preset '{preset}' missing key {exc}") from exc
    raise ConfigError(f"{path}: unknown preset '{preset}'")
