"""Monte-Carlo BER sweep over SNR x SIR for the two-way relay exchange.

Module Information:
    - Filename: harness.py
    - Module: harness
    - Location: src/anc_decoder/

Key Concepts:
    - One trial = Alice and Bob each send a random packet, the relay
      forwards the partial overlap, and both decode the other's payload
    - SIR is realized with A = 1 and B = 10^(-SIR/20); SNR sets the noise
      variance relative to A^2
    - Per-trial seeds come from (master_seed, grid index, trial index), so
      results do not depend on thread count or execution order
    - Only payload bits whose phase step lies inside the overlap are counted
    - Point BER is total errors over total bits, never a mean of means
    - Results go to CSV through pandas; the optional plot is a seaborn
      heatmap per party
"""

#####################################
# Imports At the Top
#####################################

from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, field
import pathlib

from matplotlib.figure import Figure
import numpy as np
import pandas as pd
import seaborn as sns

from .channel import ChannelParams, InterferedFrame, add_awgn, apply_channel, superpose
from .decoder import DecoderConfig, Strategy, decode_packet
from .errors import ConfigError, DecodeFailedError, InvalidArgumentError
from .modem import DEFAULT_PILOT_BITS, Packet, make_pilot, msk_modulate
from .utils_logger import log_section, logger

#####################################
# Constants
#####################################

ALICE: str = "alice"
BOB: str = "bob"

# Pre-shared system parameters.
ALICE_SCRAMBLER_SEED: int = 0x1ACE
BOB_SCRAMBLER_SEED: int = 0x0B0B
ALICE_PILOT_SEED: int = 0x0A11
BOB_PILOT_SEED: int = 0x0B22

DEFAULT_SNR_GRID: tuple[float, ...] = (20.0, 22.0, 24.0, 26.0, 28.0, 30.0)
DEFAULT_SIR_GRID: tuple[float, ...] = (-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0)
DEFAULT_PACKET_BITS: int = 2048
DEFAULT_MEAN_OVERLAP: float = 0.8
DEFAULT_OVERLAP_JITTER: float = 0.1
DEFAULT_TRIALS: int = 100
DEFAULT_OUT_PATH: pathlib.Path = pathlib.Path("results") / "ber_sweep.csv"

CSV_COLUMNS: list[str] = [
    "snr_db",
    "sir_db",
    "party",
    "strategy",
    "bits_total",
    "bit_errors",
    "ber",
    "mean_amp_rel_err",
    "trials",
]


#####################################
# Domain Types
#####################################


@dataclass(frozen=True)
class SweepConfig:
    """Grid, packet shape, and output settings for one sweep."""

    snr_db: tuple[float, ...] = DEFAULT_SNR_GRID
    sir_db: tuple[float, ...] = DEFAULT_SIR_GRID
    packet_bits: int = DEFAULT_PACKET_BITS
    pilot_bits: int = DEFAULT_PILOT_BITS
    mean_overlap: float = DEFAULT_MEAN_OVERLAP
    overlap_jitter: float = DEFAULT_OVERLAP_JITTER
    trials_per_point: int = DEFAULT_TRIALS
    master_seed: int = 0
    strategy: Strategy = Strategy.GEOMETRIC
    out_path: pathlib.Path = field(default=DEFAULT_OUT_PATH)
    plot_path: pathlib.Path | None = None
    threads: int = 1

    def validate(self) -> "SweepConfig":
        """Raise ``ConfigError`` on a bad setting; return self otherwise."""
        if not self.snr_db or not self.sir_db:
            raise ConfigError("SNR and SIR grids must be non-empty")
        if self.trials_per_point < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials_per_point}")
        if not 0 < self.mean_overlap <= 1:
            raise ConfigError(f"mean overlap must be in (0, 1], got {self.mean_overlap}")
        if self.overlap_jitter < 0:
            raise ConfigError(f"overlap jitter must be >= 0, got {self.overlap_jitter}")
        if self.packet_bits < 1 or self.pilot_bits < 1:
            raise ConfigError(
                f"packet and pilot bits must be >= 1, got {self.packet_bits}, {self.pilot_bits}"
            )
        if self.master_seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.master_seed}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        return self

    @property
    def grid(self) -> list[tuple[float, float]]:
        """(snr, sir) points, SNR-major."""
        return [(snr, sir) for snr in self.snr_db for sir in self.sir_db]


@dataclass(frozen=True)
class PartyCount:
    """One party's result for one trial."""

    bits: int
    errors: int
    failed: bool
    amp_rel_err: float


@dataclass(frozen=True)
class TrialOutcome:
    """Both parties' counts for one trial."""

    alice: PartyCount
    bob: PartyCount

    def party(self, name: str) -> PartyCount:
        """Count for ``name`` (``ALICE`` or ``BOB``)."""
        return self.alice if name == ALICE else self.bob


@dataclass(frozen=True)
class BerRecord:
    """One CSV row: aggregate BER of one party at one grid point."""

    snr_db: float
    sir_db: float
    party: str
    strategy: str
    bits_total: int
    bit_errors: int
    ber: float
    mean_amp_rel_err: float
    trials: int


#####################################
# Helpers
#####################################


def amplitudes_for_sir(sir_db: float) -> tuple[float, float]:
    """(A, B) with A = 1 and 10 log10(A^2 / B^2) = ``sir_db``."""
    return 1.0, float(10 ** (-sir_db / 20))


def noise_variance_for_snr(snr_db: float, reference_amplitude: float = 1.0) -> float:
    """Noise variance giving ``snr_db`` relative to ``reference_amplitude``^2."""
    return float(reference_amplitude**2 * 10 ** (-snr_db / 10))


def trial_seed(master_seed: int, grid_index: int, trial_index: int) -> int:
    """Deterministic per-trial seed, independent across (grid, trial) pairs."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(grid_index, trial_index))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse ``min:max:step`` (inclusive) or a single value."""
    parts = text.split(":")
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"grid '{text}' is not numeric") from exc
    if len(values) == 1:
        return (values[0],)
    if len(values) != 3:
        raise ConfigError(f"grid '{text}' must be 'min:max:step' or a single value")
    lo, hi, step = values
    if step <= 0 or hi < lo:
        raise ConfigError(f"grid '{text}' needs step > 0 and max >= min")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(round(lo + k * step, 10) for k in range(count))


def ensure_writable(path: pathlib.Path) -> None:
    """Create parent folders and open ``path`` for append, or raise ``OSError``."""
    path = pathlib.Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a", encoding="utf-8"):
            pass
    except OSError as exc:
        raise OSError(f"cannot write to {path}: {exc}") from exc


#####################################
# Trials
#####################################


def overlapped_payload_mask(
    frame: InterferedFrame, peer_span: tuple[int, int], n_pilot: int, n_payload: int
) -> np.ndarray:
    """Payload bits of the peer whose phase step lies inside the overlap.

    Frame bit k of the peer is the step between its samples k and k + 1; it is
    overlapped when both samples fall in ``[overlap_start, overlap_end)``.
    """
    start = peer_span[0]
    first = frame.overlap_start - start - n_pilot
    stop = frame.overlap_end - 1 - start - n_pilot
    index = np.arange(n_payload)
    return (index >= first) & (index < stop)


def _count_errors(
    frame: InterferedFrame,
    own: Packet,
    own_offset: int,
    peer: Packet,
    cfg: DecoderConfig,
    truth: tuple[float, float],
) -> PartyCount:
    n_payload = len(peer.payload)
    peer_span = frame.other_span((own_offset, own_offset + own.n_samples))
    counted = overlapped_payload_mask(frame, peer_span, len(cfg.pilot), n_payload)
    try:
        result = decode_packet(frame, own, own_offset, cfg)
    except DecodeFailedError as exc:
        n_counted = int(counted.sum())
        logger.warning(f"decode failed, counting {n_counted} bits as errored: {exc}")
        return PartyCount(bits=n_counted, errors=n_counted, failed=True, amp_rel_err=float("nan"))

    wrong = result.other_bits != np.asarray(peer.payload, dtype=np.uint8)
    flagged = result.unreliable_bit - len(cfg.pilot)
    if 0 <= flagged < n_payload:
        counted[flagged] = False
    est = result.amplitude_estimate
    a_true, b_true = truth
    rel = 0.5 * (abs(est.a_self - a_true) / a_true + abs(est.b_other - b_true) / b_true)
    return PartyCount(
        bits=int(counted.sum()),
        errors=int(np.count_nonzero(wrong & counted)),
        failed=False,
        amp_rel_err=float(rel),
    )


def run_trial(point: tuple[float, float], cfg: SweepConfig, seed: int) -> TrialOutcome:
    """Simulate one packet exchange at ``point`` = (snr_db, sir_db)."""
    snr_db, sir_db = point
    rng = np.random.default_rng(seed)
    a_gain, b_gain = amplitudes_for_sir(sir_db)
    noise_var = noise_variance_for_snr(snr_db, a_gain)
    alice_pilot = make_pilot(cfg.pilot_bits, ALICE_PILOT_SEED)
    bob_pilot = make_pilot(cfg.pilot_bits, BOB_PILOT_SEED)

    alice = Packet(
        payload=rng.integers(0, 2, cfg.packet_bits, dtype=np.uint8),
        pilot=alice_pilot,
        scrambler_seed=ALICE_SCRAMBLER_SEED,
        initial_phase=float(rng.uniform(0, 2 * np.pi)),
    )
    bob = Packet(
        payload=rng.integers(0, 2, cfg.packet_bits, dtype=np.uint8),
        pilot=bob_pilot,
        scrambler_seed=BOB_SCRAMBLER_SEED,
        initial_phase=float(rng.uniform(0, 2 * np.pi)),
    )

    n = alice.n_samples
    fraction = rng.uniform(cfg.mean_overlap - cfg.overlap_jitter, cfg.mean_overlap + cfg.overlap_jitter)
    fraction = float(np.clip(fraction, 2 / n, 1.0))
    offset = min(int(round((1 - fraction) * n)), n - 2)

    sig_a = apply_channel(
        msk_modulate(alice), ChannelParams(a_gain, float(rng.uniform(0, 2 * np.pi)), noise_var)
    )
    sig_b = apply_channel(
        msk_modulate(bob), ChannelParams(b_gain, float(rng.uniform(0, 2 * np.pi)), noise_var)
    )
    clean = superpose(sig_a, sig_b, offset)
    at_alice = clean.with_samples(add_awgn(clean.samples, noise_var, rng))
    at_bob = clean.with_samples(add_awgn(clean.samples, noise_var, rng))

    alice_cfg = DecoderConfig(
        strategy=cfg.strategy, pilot=bob_pilot, peer_scrambler_seed=BOB_SCRAMBLER_SEED
    )
    bob_cfg = DecoderConfig(
        strategy=cfg.strategy, pilot=alice_pilot, peer_scrambler_seed=ALICE_SCRAMBLER_SEED
    )
    return TrialOutcome(
        alice=_count_errors(at_alice, alice, 0, bob, alice_cfg, (a_gain, b_gain)),
        bob=_count_errors(at_bob, bob, offset, alice, bob_cfg, (b_gain, a_gain)),
    )


def _aggregate(
    point: tuple[float, float], party: str, outcomes: list[TrialOutcome], strategy: Strategy
) -> BerRecord:
    counts = [o.party(party) for o in outcomes]
    bits = sum(c.bits for c in counts)
    errors = sum(c.errors for c in counts)
    rel = [c.amp_rel_err for c in counts if not c.failed]
    return BerRecord(
        snr_db=float(point[0]),
        sir_db=float(point[1]),
        party=party,
        strategy=strategy.value,
        bits_total=bits,
        bit_errors=errors,
        ber=errors / bits if bits else 0.0,
        mean_amp_rel_err=float(np.mean(rel)) if rel else float("nan"),
        trials=len(counts),
    )


def sweep(cfg: SweepConfig) -> list[BerRecord]:
    """Run every grid point, write the CSV (and plot), return the records.

    Raises:
        OSError: ``cfg.out_path`` is not writable; checked before any trial runs.
    """
    cfg.validate()
    ensure_writable(cfg.out_path)
    if cfg.plot_path is not None:
        ensure_writable(cfg.plot_path)

    grid = cfg.grid
    jobs = [(g, t) for g in range(len(grid)) for t in range(cfg.trials_per_point)]
    log_section(
        f"BER SWEEP: {len(grid)} points x {cfg.trials_per_point} trials, "
        f"strategy={cfg.strategy.value}, threads={cfg.threads}"
    )

    def work(job: tuple[int, int]) -> TrialOutcome:
        g, t = job
        return run_trial(grid[g], cfg, trial_seed(cfg.master_seed, g, t))

    if cfg.threads == 1:
        outcomes = [work(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as executor:
            outcomes = list(executor.map(work, jobs))

    records = []
    for g, point in enumerate(grid):
        chunk = outcomes[g * cfg.trials_per_point : (g + 1) * cfg.trials_per_point]
        failures = sum(o.alice.failed + o.bob.failed for o in chunk)
        for party in (ALICE, BOB):
            records.append(_aggregate(point, party, chunk, cfg.strategy))
        logger.info(
            f"SNR={point[0]:5.1f} dB SIR={point[1]:5.1f} dB: "
            f"alice BER={records[-2].ber:.4f}, bob BER={records[-1].ber:.4f}, failures={failures}"
        )

    emit_csv(records, cfg.out_path)
    if cfg.plot_path is not None:
        emit_plot(records, cfg.plot_path)
    return records


#####################################
# Output
#####################################


def records_to_frame(records: list[BerRecord]) -> pd.DataFrame:
    """Records as a DataFrame with the CSV column order."""
    return pd.DataFrame([astuple(r) for r in records], columns=CSV_COLUMNS)


def emit_csv(records: list[BerRecord], path: pathlib.Path) -> pathlib.Path:
    """Write ``records`` as UTF-8 CSV with LF line endings."""
    if not records:
        raise InvalidArgumentError("no records to write")
    path = pathlib.Path(path)
    try:
        records_to_frame(records).to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    logger.info(f"Wrote {len(records)} records to {path}")
    return path


def load_csv(path: pathlib.Path) -> list[BerRecord]:
    """Read a CSV written by ``emit_csv`` back into records."""
    try:
        df = pd.read_csv(path)
    except OSError as exc:
        raise OSError(f"cannot read CSV from {path}: {exc}") from exc
    return [
        BerRecord(
            snr_db=float(row.snr_db),
            sir_db=float(row.sir_db),
            party=str(row.party),
            strategy=str(row.strategy),
            bits_total=int(row.bits_total),
            bit_errors=int(row.bit_errors),
            ber=float(row.ber),
            mean_amp_rel_err=float(row.mean_amp_rel_err),
            trials=int(row.trials),
        )
        for row in df[CSV_COLUMNS].itertuples(index=False)
    ]


def emit_plot(records: list[BerRecord], path: pathlib.Path) -> pathlib.Path:
    """Save one BER heatmap over (SNR, SIR) per party."""
    if not records:
        raise InvalidArgumentError("no records to plot")
    df = records_to_frame(records)
    parties = [p for p in (ALICE, BOB) if p in set(df["party"])]
    fig = Figure(figsize=(6 * len(parties), 5))
    axes = fig.subplots(1, len(parties), squeeze=False)[0]
    for ax, party in zip(axes, parties, strict=True):
        table = df[df["party"] == party].pivot_table(index="sir_db", columns="snr_db", values="ber")
        sns.heatmap(table, ax=ax, annot=True, fmt=".3f", cmap="viridis", cbar_kws={"label": "BER"})
        ax.set_title(f"{party.title()} BER")
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("SIR (dB)")
        ax.invert_yaxis()
    fig.tight_layout()
    path = pathlib.Path(path)
    try:
        fig.savefig(path)
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc
    logger.info(f"Wrote BER plot to {path}")
    return path


__all__ = [
    "ALICE",
    "BOB",
    "CSV_COLUMNS",
    "BerRecord",
    "PartyCount",
    "SweepConfig",
    "TrialOutcome",
    "amplitudes_for_sir",
    "emit_csv",
    "emit_plot",
    "ensure_writable",
    "load_csv",
    "noise_variance_for_snr",
    "overlapped_payload_mask",
    "parse_grid",
    "records_to_frame",
    "run_trial",
    "sweep",
    "trial_seed",
]
