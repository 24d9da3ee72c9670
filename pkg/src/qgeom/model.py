"""Parameterized Hamiltonian families H(lambda) = sum_k f_k(lambda) H_k.

A model is a fixed list of Hermitian basis matrices paired with scalar
coefficient expressions over named parameters.  This linear-in-coefficients
form makes the parameter derivatives of H exact: differentiating the
coefficients with dual numbers gives dH/dmu = sum_k (df_k/dmu) H_k with no
finite differencing.

Units: hbar = 1 throughout; energies set the inverse time scale.

Model files are JSON objects::

    {
      "name": "my model",
      "dim": 2,
      "parameters": ["theta", "phi"],
      "terms": [
        {"matrix": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]],
         "coeff": "sin(theta)*cos(phi)"}
      ]
    }

Complex matrix entries are 2-arrays [re, im]; matrices are row-major,
dim x dim.  Each matrix must be Hermitian within 1e-12 (relative to its
largest entry); it is then symmetrized exactly.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import expr
from .errors import EvaluationError, InputError
from .numerics import hermitian

__all__ = [
    "ModelSpec",
    "model_spec",
    "parameter_point",
    "hamiltonian_at",
    "hamiltonian_derivative_at",
    "spin_half",
    "two_band_lattice",
    "load_model_spec",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class ModelSpec:
    """Immutable Hamiltonian family.

    Attributes
    ----------
    name : str
        Free-text label.
    dim : int
        Hilbert-space dimension of every term matrix.
    parameters : tuple[str, ...]
        Ordered parameter names.
    terms : tuple[tuple[np.ndarray, ExprNode], ...]
        (Hermitian matrix, coefficient AST) pairs.
    coeff_sources : tuple[str, ...]
        The coefficient expressions as written (for reports and errors).
    """

    name: str
    dim: int
    parameters: tuple[str, ...]
    terms: tuple[tuple[np.ndarray, expr.ExprNode], ...]
    coeff_sources: tuple[str, ...]

    @property
    def n_parameters(self) -> int:
        return len(self.parameters)


def model_spec(name: str, dim: int, parameters, terms) -> ModelSpec:
    """Validate and build a :class:`ModelSpec`.

    Parameters
    ----------
    terms : iterable of (matrix, coefficient)
        The coefficient may be an expression string or an already-parsed AST.
    """
    params = tuple(str(p) for p in parameters)
    if len(set(params)) != len(params):
        raise InputError(f"duplicate parameter names in {params}")
    if not terms:
        raise InputError("a model needs at least one term")
    built = []
    sources = []
    for k, (matrix, coeff) in enumerate(terms):
        try:
            h = hermitian(matrix, asymmetry_tol=1e-12)
        except InputError as exc:
            raise InputError(f"term {k}: {exc}") from None
        if h.shape[0] != dim:
            raise InputError(
                f"term {k}: matrix is {h.shape[0]}x{h.shape[0]}, expected {dim}x{dim}"
            )
        if isinstance(coeff, str):
            src = coeff
            try:
                ast = expr.parse_expression(coeff, params)
            except expr.ParseError as exc:
                raise InputError(f"term {k}: {exc}") from None
        else:
            ast = coeff
            src = expr.format_expression(ast)
            unknown = expr.parameters_used(ast) - set(params)
            if unknown:
                raise InputError(f"term {k}: undeclared parameters {sorted(unknown)}")
        built.append((h, ast))
        sources.append(src)
    return ModelSpec(str(name), int(dim), params, tuple(built), tuple(sources))


def parameter_point(model: ModelSpec, values) -> np.ndarray:
    """Validate a parameter point against the model's parameter list."""
    lam = np.asarray(values, dtype=float).ravel()
    if lam.size != model.n_parameters:
        raise InputError(
            f"parameter point has {lam.size} values, model "
            f"{model.name!r} expects {model.n_parameters}"
        )
    if not np.all(np.isfinite(lam)):
        raise InputError("parameter point has non-finite values")
    return lam


def _binding(model: ModelSpec, lam: np.ndarray) -> dict[str, float]:
    return dict(zip(model.parameters, lam.tolist()))


def hamiltonian_at(model: ModelSpec, lam) -> np.ndarray:
    """H(lambda) = sum_k f_k(lambda) H_k, re-symmetrized."""
    lam = parameter_point(model, lam)
    env = _binding(model, lam)
    h = np.zeros((model.dim, model.dim), dtype=complex)
    for k, (matrix, ast) in enumerate(model.terms):
        try:
            h += expr.evaluate(ast, env) * matrix
        except EvaluationError as exc:
            raise EvaluationError(
                f"term {k} ({model.coeff_sources[k]!r}) at {env}: {exc}"
            ) from None
    return (h + h.conj().T) / 2


def hamiltonian_derivative_at(model: ModelSpec, lam, mu: int) -> np.ndarray:
    """Exact dH/dmu = sum_k (df_k/dmu)(lambda) H_k via dual numbers."""
    lam = parameter_point(model, lam)
    if not 0 <= mu < model.n_parameters:
        raise InputError(f"parameter index {mu} out of range")
    env = _binding(model, lam)
    direction = model.parameters[mu]
    dh = np.zeros((model.dim, model.dim), dtype=complex)
    for k, (matrix, ast) in enumerate(model.terms):
        try:
            _, deriv = expr.evaluate_with_derivative(ast, env, direction)
        except EvaluationError as exc:
            raise EvaluationError(
                f"term {k} ({model.coeff_sources[k]!r}) at {env}: {exc}"
            ) from None
        dh += deriv * matrix
    return (dh + dh.conj().T) / 2


def spin_half(mu_times_b: float) -> ModelSpec:
    """Spin-1/2 in a field of fixed magnitude and orientation (theta, phi).

    H = mu_times_b * (sin th cos ph sx + sin th sin ph sy + cos th sz); the
    spectrum is (-mu_times_b, +mu_times_b) at every point.  Which band is the
    ground state depends on the sign of ``mu_times_b``; pick levels explicitly.
    """
    if not np.isfinite(mu_times_b) or mu_times_b == 0.0:
        raise InputError("field scale must be finite and non-zero")
    return model_spec(
        "spin-half",
        2,
        ("theta", "phi"),
        [
            (mu_times_b * PAULI_X, "sin(theta)*cos(phi)"),
            (mu_times_b * PAULI_Y, "sin(theta)*sin(phi)"),
            (mu_times_b * PAULI_Z, "cos(theta)"),
        ],
    )


def two_band_lattice(mass: float) -> ModelSpec:
    """Two-band lattice model on a periodic (kx, ky) torus.

    H = sin(kx) sx + sin(ky) sy + (mass + cos kx + cos ky) sz.  The bands
    carry Chern number +-1 for 0 < |mass| < 2 and 0 for |mass| > 2; the gap
    closes at |mass| in {0, 2}.
    """
    if not np.isfinite(mass):
        raise InputError("mass must be finite")
    mass = float(mass)
    return model_spec(
        "two-band-lattice",
        2,
        ("kx", "ky"),
        [
            (PAULI_X, "sin(kx)"),
            (PAULI_Y, "sin(ky)"),
            (PAULI_Z, f"{mass!r} + cos(kx) + cos(ky)"),
        ],
    )


def load_model_spec(path) -> ModelSpec:
    """Read and validate a model definition file (schema in module docs)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read model file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"model file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise InputError(f"model file {path}: top level must be an object")
    for field in ("name", "dim", "parameters", "terms"):
        if field not in raw:
            raise InputError(f"model file {path}: missing field {field!r}")
    name = raw["name"]
    dim = raw["dim"]
    params = raw["parameters"]
    if not isinstance(name, str):
        raise InputError(f"model file {path}: 'name' must be a string")
    if not isinstance(dim, int) or dim < 1:
        raise InputError(f"model file {path}: 'dim' must be a positive integer")
    if not isinstance(params, list) or not all(isinstance(p, str) for p in params):
        raise InputError(f"model file {path}: 'parameters' must be a list of strings")
    if not isinstance(raw["terms"], list) or not raw["terms"]:
        raise InputError(f"model file {path}: 'terms' must be a non-empty list")
    terms = []
    for k, term in enumerate(raw["terms"]):
        if not isinstance(term, dict) or "matrix" not in term or "coeff" not in term:
            raise InputError(
                f"model file {path}: term {k} must be an object with 'matrix' and 'coeff'"
            )
        matrix = _parse_complex_matrix(term["matrix"], dim, f"{path}: term {k}")
        coeff = term["coeff"]
        if not isinstance(coeff, str):
            raise InputError(f"model file {path}: term {k}: 'coeff' must be a string")
        terms.append((matrix, coeff))
    try:
        return model_spec(name, dim, params, terms)
    except InputError as exc:
        raise InputError(f"model file {path}: {exc}") from None


def _parse_complex_matrix(rows, dim: int, where: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != dim:
        raise InputError(f"{where}: matrix must have {dim} rows")
    out = np.zeros((dim, dim), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise InputError(f"{where}: row {i} must have {dim} entries")
        for j, entry in enumerate(row):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(x, (int, float)) for x in entry)
            ):
                raise InputError(
                    f"{where}: entry ({i},{j}) must be a 2-array [re, im]"
                )
            out[i, j] = complex(entry[0], entry[1])
    return out
