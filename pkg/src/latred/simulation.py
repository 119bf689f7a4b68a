"""Monte-Carlo BER experiment for lattice-reduction-aided Babai detection.

Each channel realization is an n x n complex Gaussian matrix turned into its
2n x 2n real form. QAM symbols are carried as integers in {0, ..., sqrt(M)-1}
per real dimension. The factor 2 between adjacent PAM levels is folded into
the model matrix and the constellation offset into the observation, which
leaves a plain integer least squares problem with a box constraint.
"""

import concurrent.futures
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .estimation import BoxConstraint, clamp_to_box, reduced_babai
from .linalg import qr_factorize, round_half_away
from .reduction import ReductionState, Strategy, efclll, fclll, gfclll, lll

__all__ = [
    "ALGORITHMS",
    "QamSpec",
    "ExperimentConfig",
    "BerRecord",
    "ChannelRecord",
    "ExperimentResult",
    "gray_encode",
    "gray_decode",
    "qam_encode",
    "qam_decode",
    "generate_channel",
    "complex_to_real",
    "ebn0_to_sigma",
    "permutation_budget",
    "run_experiment",
]

ALGORITHMS = ("qr-babai", "lll", "fclll", "efclll", "gfclll1", "gfclll2")


def gray_encode(i):
    return i ^ (i >> 1)


def gray_decode(g):
    i = g
    shift = g >> 1
    while np.any(shift):
        i = i ^ shift
        shift = shift >> 1
    return i


@dataclass(frozen=True)
class QamSpec:
    """Square M-QAM as two independent Gray-labelled sqrt(M)-PAM streams."""

    M: int
    pam_levels: tuple
    bits_per_dim: int
    Es: float

    @classmethod
    def from_order(cls, M: int) -> "QamSpec":
        side = math.isqrt(M)
        if M < 4 or side * side != M or side & (side - 1):
            raise ValueError(f"M must be an even power of two (4, 16, 64, ...), got {M}")
        levels = tuple(float(2 * i - (side - 1)) for i in range(side))
        Es = 2.0 * float(np.mean(np.square(levels)))
        return cls(M=M, pam_levels=levels, bits_per_dim=side.bit_length() - 1, Es=Es)

    @property
    def side(self) -> int:
        return len(self.pam_levels)

    @property
    def max_level(self) -> float:
        return self.pam_levels[-1]

    def gray_map(self) -> dict:
        """Bit tuple (MSB first) -> PAM level, for one real dimension."""
        b = self.bits_per_dim
        out = {}
        for i, level in enumerate(self.pam_levels):
            g = gray_encode(i)
            out[tuple((g >> (b - 1 - t)) & 1 for t in range(b))] = level
        return out

    def hamming_table(self) -> np.ndarray:
        """Bit errors between the Gray labels of integer symbols a and b."""
        g = gray_encode(np.arange(self.side))
        return np.array([[bin(int(p ^ q)).count("1") for q in g] for p in g], dtype=np.int64)


def qam_encode(bits, spec: QamSpec) -> np.ndarray:
    """Map a bit vector to shifted-integer symbols, bits_per_dim bits per real dimension."""
    bits = np.asarray(bits, dtype=np.int64)
    b = spec.bits_per_dim
    if bits.ndim != 1 or bits.size % b:
        raise ValueError(f"bit count {bits.size} is not a multiple of {b}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    weights = 1 << np.arange(b - 1, -1, -1)
    g = bits.reshape(-1, b) @ weights
    return gray_decode(g)


def qam_decode(x, spec: QamSpec) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    if np.any((x < 0) | (x >= spec.side)):
        raise ValueError("symbol outside the constellation")
    b = spec.bits_per_dim
    g = gray_encode(x)
    shifts = np.arange(b - 1, -1, -1)
    return ((g[:, None] >> shifts) & 1).reshape(-1)


def generate_channel(n_c: int, rng: np.random.Generator) -> np.ndarray:
    """n_c x n_c matrix of i.i.d. unit-variance circular complex Gaussians."""
    g = rng.standard_normal((2, n_c, n_c))
    return (g[0] + 1j * g[1]) / math.sqrt(2.0)


def complex_to_real(Ac, yc=None):
    """Real form [[Re, -Im], [Im, Re]] of a complex model, and (Re y; Im y)."""
    Ac = np.asarray(Ac, dtype=complex)
    A = np.block([[Ac.real, -Ac.imag], [Ac.imag, Ac.real]])
    if yc is None:
        return A, None
    yc = np.asarray(yc, dtype=complex)
    return A, np.concatenate([yc.real, yc.imag])


def ebn0_to_sigma(ebn0_db: float, spec: QamSpec) -> float:
    """Noise standard deviation per real dimension for a given Eb/N0 in dB."""
    n0 = spec.Es / (math.log2(spec.M) * 10.0 ** (ebn0_db / 10.0))
    return math.sqrt(n0 / 2.0)


def permutation_budget(K: int, ratio: float) -> int:
    """Greedy budget round(ratio * K), ties away from zero."""
    return int(round_half_away(ratio * K))


@dataclass(frozen=True)
class ExperimentConfig:
    n_complex: int = 8
    qam: int = 4
    ebn0_grid: tuple = tuple(float(v) for v in range(2, 31, 2))
    channels: int = 100
    vectors_per_channel: int = 100
    algorithms: tuple = ALGORITHMS
    J: int = 1
    budget_ratio: float = 0.7
    delta: float = 1.0
    seed: int = 42
    output_path: str = "results.csv"
    format: str = "csv"

    def __post_init__(self):
        object.__setattr__(self, "ebn0_grid", tuple(float(v) for v in self.ebn0_grid))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not self.ebn0_grid:
            raise ValueError("ebn0_grid must not be empty")
        if not all(math.isfinite(v) for v in self.ebn0_grid):
            raise ValueError("ebn0_grid values must be finite")
        for name in ("n_complex", "channels", "vectors_per_channel", "J"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.qam not in (4, 16):
            raise ValueError(f"qam must be 4 or 16, got {self.qam}")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ValueError(f"unknown algorithms {unknown}; choose from {ALGORITHMS}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ValueError("duplicate algorithm names")
        if not 0.25 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (1/4, 1], got {self.delta}")
        if not 0.0 < self.budget_ratio <= 1.0:
            raise ValueError(f"budget_ratio must lie in (0, 1], got {self.budget_ratio}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format}")

    @property
    def spec(self) -> QamSpec:
        return QamSpec.from_order(self.qam)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ebn0_grid"] = list(self.ebn0_grid)
        d["algorithms"] = list(self.algorithms)
        return d


@dataclass
class BerRecord:
    """Bit errors of one algorithm at one Eb/N0, summed over all channels.

    ``permutations`` and ``reduce_time`` are totals over the channel
    reductions, which are shared by every Eb/N0 point.
    """

    algorithm: str
    ebn0_db: float
    bit_errors: int
    bits_total: int
    permutations: int
    reduce_time: float

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total


@dataclass
class ChannelRecord:
    channel: int
    algorithm: str
    K: int
    budget: int | None
    permutations: int
    reduce_time: float


@dataclass
class ExperimentResult:
    records: list
    channels: list = field(default_factory=list)


def _rng(seed, *key):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


_CHANNEL_STREAM = 0
_SIGNAL_STREAM = 1


def _reduce(name, state, config, budget):
    if name == "qr-babai":
        return 0, 0.0
    if name == "lll":
        rep = lll(state, config.delta)
    elif name == "fclll":
        rep = fclll(state, config.J, config.delta)
    elif name == "efclll":
        rep = efclll(state, config.J, config.delta)
    else:
        strategy = Strategy.G1 if name == "gfclll1" else Strategy.G2
        rep = gfclll(state, strategy, budget, config.delta)
    return rep.permutations_performed, rep.wall_time


def _run_channel(config: ExperimentConfig, timing: bool, c: int):
    spec = config.spec
    n = 2 * config.n_complex
    V = config.vectors_per_channel

    Ac = generate_channel(config.n_complex, _rng(config.seed, c, _CHANNEL_STREAM))
    A, _ = complex_to_real(Ac)
    A = 2.0 * A
    Q1, R = qr_factorize(A)
    base = ReductionState.from_upper(R)

    K = efclll(base.copy(), config.J, config.delta).permutations_performed
    budget = permutation_budget(K, config.budget_ratio)

    states = {}
    chan = []
    for name in config.algorithms:
        st = base.copy()
        perms, t = _reduce(name, st, config, budget)
        states[name] = st
        chan.append(
            ChannelRecord(
                channel=c,
                algorithm=name,
                K=K,
                budget=budget if name.startswith("gfclll") else None,
                permutations=perms,
                reduce_time=t if timing else 0.0,
            )
        )

    rng = _rng(config.seed, c, _SIGNAL_STREAM)
    x = rng.integers(0, spec.side, size=(n, V))
    w = rng.standard_normal((n, V))
    box = BoxConstraint.uniform(n, 0, spec.side - 1)
    ham = spec.hamming_table()

    signal = A @ x
    errors = np.zeros((len(config.algorithms), len(config.ebn0_grid)), dtype=np.int64)
    for e, ebn0 in enumerate(config.ebn0_grid):
        sigma = ebn0_to_sigma(ebn0, spec)
        y_t = Q1.T @ (signal + sigma * w)
        for a, name in enumerate(config.algorithms):
            x_hat = clamp_to_box(reduced_babai(states[name], y_t).x, box)
            errors[a, e] = ham[x, x_hat].sum()
    return errors, chan


def run_experiment(config: ExperimentConfig, workers: int = 1, timing: bool = True) -> ExperimentResult:
    """Run the full channel x Eb/N0 x algorithm sweep.

    Channels are independent and may be spread over ``workers`` processes;
    the random streams depend only on (seed, channel index), so results do
    not depend on the worker count.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    channels = range(config.channels)
    if workers == 1:
        outputs = [_run_channel(config, timing, c) for c in channels]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(
                pool.map(_run_channel, [config] * config.channels, [timing] * config.channels, channels)
            )

    spec = config.spec
    bits_per_channel = config.vectors_per_channel * 2 * config.n_complex * spec.bits_per_dim
    bits_total = bits_per_channel * config.channels

    errors = np.zeros((len(config.algorithms), len(config.ebn0_grid)), dtype=np.int64)
    chan_log = []
    for err, chan in outputs:
        errors += err
        chan_log.extend(chan)

    records = []
    for a, name in enumerate(config.algorithms):
        mine = [r for r in chan_log if r.algorithm == name]
        perms = sum(r.permutations for r in mine)
        t = math.fsum(r.reduce_time for r in mine)
        for e, ebn0 in enumerate(config.ebn0_grid):
            records.append(
                BerRecord(
                    algorithm=name,
                    ebn0_db=ebn0,
                    bit_errors=int(errors[a, e]),
                    bits_total=bits_total,
                    permutations=perms,
                    reduce_time=t,
                )
            )
    return ExperimentResult(records=records, channels=chan_log)
