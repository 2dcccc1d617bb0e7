"""
Joint sparse coding and dictionary learning over a sequential frame stream.

Coding runs a fixed number of proximal-gradient (ISTA) iterations on the LASSO
objective ½‖Φc̄ − s̄‖₂² + λ₁‖c̄‖₁, warm-started from the previous frame's code.
Learning is one or more SGD steps on ½‖Φc̄ − s̄‖₂² with respect to Φ.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field, replace

import numpy as np

from qbslam.core.models.frame import Frame
from qbslam.exceptions.config import ConfigurationError
from qbslam.exceptions.models import InvalidDictionaryError
from qbslam.exceptions.numerics import CodingDivergenceError, DictionaryDivergenceError, DimensionMismatchError
from qbslam.utils.logging import get_configured_logger

logger = get_configured_logger('DLSC')

# input length the default step sizes are tuned for: one 346x260 event-camera frame
REFERENCE_INPUTS = 346 * 260


@dataclass(frozen=True)
class DlscParams:
    """
    Hyperparameters of the DLSC-QBS loop.

    ``eta_c`` and ``lambda1`` act on sums over all N inputs, so their effect depends on
    the frame size; :meth:`at_resolution` carries a setting tuned at one size to another.
    """

    eta_c: float = 5e-3
    eta_d: float = 1.4e-3
    lambda1: float = 0.2
    n_c: int = 10
    n_d: int = 1
    n_atoms: int = 64
    sigma_w: float = 0.01
    clip_atom_norm: float | None = None
    check_descent: bool = False

    def __post_init__(self) -> None:
        checks = {
            'eta_c': self.eta_c > 0,
            'eta_d': self.eta_d > 0,
            'lambda1': self.lambda1 >= 0,
            'n_c': self.n_c >= 1,
            'n_d': self.n_d >= 1,
            'n_atoms': self.n_atoms >= 1,
            'sigma_w': self.sigma_w > 0,
            'clip_atom_norm': self.clip_atom_norm is None or self.clip_atom_norm > 0,
        }
        for key, ok in checks.items():
            if not ok:
                raise ConfigurationError(f'Invalid DLSC parameter {key}={getattr(self, key)!r}', config_key=key)

    def at_resolution(self, n_inputs: int, reference: int = REFERENCE_INPUTS) -> DlscParams:
        """
        Equivalent setting for frames of ``n_inputs`` values.

        Scales ``eta_c`` by ``reference / n_inputs`` and ``lambda1`` by the inverse.
        A frame upsampled by pixel replication to ``reference`` inputs then yields the
        same codes and the same per-entry dictionary updates as the original frame
        under the scaled setting; ``eta_d`` and ``sigma_w`` carry over unchanged.
        """
        if n_inputs < 1:
            raise ConfigurationError(f'n_inputs must be ≥ 1, got {n_inputs}', config_key='n_inputs')
        ratio = reference / n_inputs
        return replace(self, eta_c=self.eta_c * ratio, lambda1=self.lambda1 / ratio)


@dataclass(eq=False)
class Dictionary:
    """Under-complete dictionary Φ of shape (N, M), M < N."""

    atoms: np.ndarray

    def __post_init__(self) -> None:
        atoms = np.asarray(self.atoms, dtype=np.float64)
        if atoms.ndim != 2:
            raise InvalidDictionaryError(f'Dictionary must be a matrix, got shape {atoms.shape}', atoms.shape)
        n, m = atoms.shape
        if not 0 < m < n:
            raise InvalidDictionaryError(f'Dictionary must be under-complete (0 < M < N), got {n}x{m}', atoms.shape)
        if not np.all(np.isfinite(atoms)):
            raise InvalidDictionaryError('Dictionary contains non-finite entries', atoms.shape)
        self.atoms = atoms

    @property
    def n_inputs(self) -> int:
        return self.atoms.shape[0]

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[1]

    def copy(self) -> Dictionary:
        return Dictionary(self.atoms.copy())


@dataclass(eq=False)
class SparseCode:
    """Latent code c̄ of length M (signed, no range constraint)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    @property
    def sparsity(self) -> float:
        """Fraction of coordinates that are exactly zero."""
        return float(np.count_nonzero(self.values == 0.0)) / self.values.size

    def copy(self) -> SparseCode:
        return SparseCode(self.values.copy())

    @classmethod
    def zeros(cls, m: int) -> SparseCode:
        return cls(np.zeros(m))


@dataclass(eq=False)
class EncoderState:
    """
    Streaming state of one DLSC encoder.

    Single writer: calls that mutate a state must be serialised in frame order.
    The code is carried across frames and never reset (warm start).
    """

    dictionary: Dictionary
    code: SparseCode
    params: DlscParams
    prev_error: float = 0.0
    rng_seed: int = 0
    frames_seen: int = field(default=0)

    @classmethod
    def create(cls, n_inputs: int, params: DlscParams | None = None, seed: int = 0) -> EncoderState:
        """Initialise Φ ~ N(0, σ_w²) and c̄₁ = 0."""
        params = params or DlscParams()
        dictionary = init_dictionary(n_inputs, params.n_atoms, params.sigma_w, seed)
        return cls(dictionary=dictionary, code=SparseCode.zeros(params.n_atoms), params=params, rng_seed=seed)


# ── Pure operations ───────────────────────────────────────────────────────────


def init_dictionary(n: int, m: int, sigma_w: float, seed: int) -> Dictionary:
    """
    Draw an N×M dictionary with i.i.d. N(0, σ_w²) entries.

    Raises:
        InvalidDictionaryError: If m ≥ n (not under-complete) or m ≤ 0
        ConfigurationError: If sigma_w ≤ 0
    """
    if not 0 < m < n:
        raise InvalidDictionaryError(f'Dictionary must be under-complete (0 < M < N), got N={n}, M={m}', (n, m))
    if sigma_w <= 0:
        raise ConfigurationError(f'sigma_w must be positive, got {sigma_w}', config_key='sigma_w')
    rng = np.random.default_rng(seed)
    return Dictionary(rng.normal(0.0, sigma_w, size=(n, m)))


def soft_threshold(x: np.ndarray, tau: float) -> np.ndarray:
    """Proximal operator of τ‖·‖₁: max(0, x − τ) + min(0, x + τ), elementwise."""
    x = np.asarray(x, dtype=np.float64)
    return np.maximum(0.0, x - tau) + np.minimum(0.0, x + tau)


def _check_dimensions(d: Dictionary, c: SparseCode, s: Frame) -> None:
    if c.values.size != d.n_atoms:
        raise DimensionMismatchError(
            f'Code has {c.values.size} entries, dictionary has {d.n_atoms} atoms',
            expected=(d.n_atoms,),
            actual=(c.values.size,),
        )
    if s.n != d.n_inputs:
        raise DimensionMismatchError(
            f'Frame {s.index} has {s.n} pixels, dictionary expects {d.n_inputs}',
            expected=(d.n_inputs,),
            actual=(s.n,),
        )


def reprojection_error(d: Dictionary, c: SparseCode, s: Frame) -> float:
    """Return ‖Φc̄ − s̄‖₂²."""
    _check_dimensions(d, c, s)
    residual = d.atoms @ c.values - s.pixels
    return float(residual @ residual)


def coding_objective(d: Dictionary, c: SparseCode, s: Frame, lambda1: float) -> float:
    """LASSO objective ½‖Φc̄ − s̄‖₂² + λ₁‖c̄‖₁."""
    return 0.5 * reprojection_error(d, c, s) + lambda1 * float(np.abs(c.values).sum())


def encode(state: EncoderState, s: Frame, *, trace: list[float] | None = None) -> SparseCode:
    """
    Run exactly N_c proximal-gradient iterations from the carried-over code.

    The result is stored back into ``state.code`` as the warm start for the next frame.

    Args:
        state: Encoder state (mutated)
        s: Current frame
        trace: If given, receives the LASSO objective before the first iteration and
               after every iteration

    Raises:
        DimensionMismatchError: If the frame does not match the dictionary
        CodingDivergenceError: If an iteration produces non-finite values
    """
    d = state.dictionary
    _check_dimensions(d, state.code, s)
    params = state.params
    phi = d.atoms
    tau = params.eta_c * params.lambda1
    c = state.code.values.copy()

    track = trace is not None or params.check_descent
    previous = coding_objective(d, SparseCode(c), s, params.lambda1) if track else 0.0
    if trace is not None:
        trace.append(previous)

    with np.errstate(over='ignore', invalid='ignore'):
        for iteration in range(1, params.n_c + 1):
            gradient = phi.T @ (phi @ c - s.pixels)
            c = soft_threshold(c - params.eta_c * gradient, tau)
            if not np.all(np.isfinite(c)):
                raise CodingDivergenceError(
                    f'Coding diverged at frame {s.index}, iteration {iteration}',
                    frame_index=s.index,
                    iteration=iteration,
                )
            if track:
                current = coding_objective(d, SparseCode(c), s, params.lambda1)
                if trace is not None:
                    trace.append(current)
                if params.check_descent and current > previous:
                    logger.warning(
                        f'LASSO objective increased at frame {s.index}, iteration {iteration}: '
                        f'{previous:.6g} → {current:.6g} (eta_c too large?)'
                    )
                previous = current

    state.code = SparseCode(c)
    return state.code.copy()


def dictionary_step(
    d: Dictionary,
    c: SparseCode,
    s: Frame,
    eta_d: float,
    *,
    clip_atom_norm: float | None = None,
) -> Dictionary:
    """
    One SGD step Φ ← Φ − η_d (Φc̄ − s̄) c̄ᵀ with the code held fixed.

    Args:
        d: Current dictionary (not modified)
        c: Code of the current frame
        s: Current frame
        eta_d: Learning rate
        clip_atom_norm: If given, atoms whose l2 norm exceeds it are rescaled to it

    Raises:
        DictionaryDivergenceError: If the updated dictionary is not finite
    """
    _check_dimensions(d, c, s)
    if eta_d <= 0:
        raise ConfigurationError(f'eta_d must be positive, got {eta_d}', config_key='eta_d')

    with np.errstate(over='ignore', invalid='ignore'):
        residual = d.atoms @ c.values - s.pixels
        atoms = d.atoms - eta_d * np.outer(residual, c.values)

    if not np.all(np.isfinite(atoms)):
        raise DictionaryDivergenceError(f'Dictionary diverged at frame {s.index}', frame_index=s.index)

    if clip_atom_norm is not None:
        norms = np.linalg.norm(atoms, axis=0)
        scale = np.where(norms > clip_atom_norm, clip_atom_norm / np.where(norms > 0, norms, 1.0), 1.0)
        atoms *= scale

    return Dictionary(atoms)


def replay_errors(dictionary: Dictionary, frames: Iterable[Frame], params: DlscParams) -> np.ndarray:
    """
    Learning-frozen pass over ``frames``: cold-started code, N_c iterations per frame,
    returns the reprojection error of every frame under the fixed dictionary.
    """
    state = EncoderState(dictionary=dictionary.copy(), code=SparseCode.zeros(dictionary.n_atoms), params=params)
    errors = []
    for frame in frames:
        code = encode(state, frame)
        errors.append(reprojection_error(state.dictionary, code, frame))
    return np.asarray(errors, dtype=np.float64)
