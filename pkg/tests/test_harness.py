"""Test the BER sweep harness and its command-line entry point.

Module Information:
    - Filename: test_harness.py
    - Module: test_harness
    - Location: tests/

Sweeps here use short packets and few trials so they stay quick.
"""

import math
from pathlib import Path

import numpy as np
import pytest

from anc_decoder import main as cli
from anc_decoder.channel import superpose
from anc_decoder.decoder import Strategy
from anc_decoder.errors import ConfigError
from anc_decoder.harness import (
    ALICE,
    BOB,
    CSV_COLUMNS,
    SweepConfig,
    amplitudes_for_sir,
    emit_plot,
    load_csv,
    noise_variance_for_snr,
    overlapped_payload_mask,
    parse_grid,
    run_trial,
    sweep,
    trial_seed,
)


def _small_cfg(tmp_path: Path, **overrides) -> SweepConfig:
    settings = {
        "snr_db": (30.0,),
        "sir_db": (0.0, 3.0),
        "packet_bits": 128,
        "pilot_bits": 16,
        "trials_per_point": 3,
        "master_seed": 7,
        "out_path": tmp_path / "ber.csv",
    }
    settings.update(overrides)
    return SweepConfig(**settings)


def test_parse_grid():
    assert parse_grid("20:30:2") == (20.0, 22.0, 24.0, 26.0, 28.0, 30.0)
    assert parse_grid("-3:3:1") == (-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0)
    assert parse_grid("25") == (25.0,)
    assert parse_grid("0:1:0.25") == (0.0, 0.25, 0.5, 0.75, 1.0)
    for bad in ("abc", "1:2", "3:1:1", "0:1:0"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_sir_and_snr_conversions():
    a, b = amplitudes_for_sir(3.0)
    assert a == 1.0
    assert 20 * math.log10(a / b) == pytest.approx(3.0)
    assert amplitudes_for_sir(0.0) == (1.0, 1.0)
    assert noise_variance_for_snr(20.0) == pytest.approx(0.01)


def test_trial_seed_is_stable_and_distinct():
    assert trial_seed(0, 1, 2) == trial_seed(0, 1, 2)
    seeds = {trial_seed(0, g, t) for g in range(5) for t in range(20)}
    assert len(seeds) == 100
    assert trial_seed(1, 0, 0) != trial_seed(0, 0, 0)


def test_sweep_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        _small_cfg(tmp_path, trials_per_point=0).validate()
    with pytest.raises(ConfigError):
        _small_cfg(tmp_path, mean_overlap=1.5).validate()
    with pytest.raises(ConfigError):
        _small_cfg(tmp_path, sir_db=()).validate()
    with pytest.raises(ConfigError):
        _small_cfg(tmp_path, threads=0).validate()
    assert _small_cfg(tmp_path).validate().grid == [(30.0, 0.0), (30.0, 3.0)]


def test_run_trial_is_deterministic(tmp_path):
    cfg = _small_cfg(tmp_path)
    first = run_trial((30.0, 3.0), cfg, 12345)
    second = run_trial((30.0, 3.0), cfg, 12345)
    assert first == second


def test_near_noiseless_trials_have_no_errors(tmp_path):
    cfg = _small_cfg(tmp_path)
    for seed in range(10):
        for sir in (0.0, 3.0, -3.0):
            outcome = run_trial((200.0, sir), cfg, seed)
            for party in (ALICE, BOB):
                count = outcome.party(party)
                assert not count.failed
                assert count.errors == 0
                assert 0 < count.bits < cfg.packet_bits
                assert count.amp_rel_err < 1e-6


def test_sweep_writes_grid_major_csv(tmp_path):
    cfg = _small_cfg(tmp_path)
    records = sweep(cfg)
    assert [(r.snr_db, r.sir_db, r.party) for r in records] == [
        (30.0, 0.0, ALICE),
        (30.0, 0.0, BOB),
        (30.0, 3.0, ALICE),
        (30.0, 3.0, BOB),
    ]
    lines = cfg.out_path.read_bytes().split(b"\n")
    assert lines[0].decode() == ",".join(CSV_COLUMNS)
    assert b"\r" not in cfg.out_path.read_bytes()
    assert all(r.trials == 3 for r in records)
    assert all(r.strategy == "geometric" for r in records)
    assert all(r.ber == pytest.approx(r.bit_errors / r.bits_total) for r in records)


def test_sweep_matches_individual_trials(tmp_path):
    cfg = _small_cfg(tmp_path, sir_db=(3.0,), trials_per_point=2)
    records = sweep(cfg)
    outcomes = [run_trial((30.0, 3.0), cfg, trial_seed(cfg.master_seed, 0, t)) for t in range(2)]
    for record in records:
        counts = [o.party(record.party) for o in outcomes]
        assert record.bits_total == sum(c.bits for c in counts)
        assert record.bit_errors == sum(c.errors for c in counts)


def test_thread_count_does_not_change_results(tmp_path):
    one = _small_cfg(tmp_path, out_path=tmp_path / "one.csv", threads=1)
    three = _small_cfg(tmp_path, out_path=tmp_path / "three.csv", threads=3)
    sweep(one)
    sweep(three)
    assert one.out_path.read_bytes() == three.out_path.read_bytes()


def test_same_seed_gives_identical_csv(tmp_path):
    a = _small_cfg(tmp_path, out_path=tmp_path / "a.csv")
    b = _small_cfg(tmp_path, out_path=tmp_path / "b.csv")
    sweep(a)
    sweep(b)
    assert a.out_path.read_bytes() == b.out_path.read_bytes()


def test_load_csv_round_trip(tmp_path):
    cfg = _small_cfg(tmp_path, strategy=Strategy.DIRECT)
    records = sweep(cfg)
    loaded = load_csv(cfg.out_path)
    assert len(loaded) == len(records)
    for got, want in zip(loaded, records, strict=True):
        assert (got.party, got.strategy, got.bits_total, got.bit_errors, got.trials) == (
            want.party,
            want.strategy,
            want.bits_total,
            want.bit_errors,
            want.trials,
        )
        assert got.ber == pytest.approx(want.ber)
        assert got.mean_amp_rel_err == pytest.approx(want.mean_amp_rel_err)


def test_unwritable_output_fails_before_running(tmp_path):
    blocker = tmp_path / "not_a_dir"
    blocker.write_text("x")
    with pytest.raises(OSError):
        sweep(_small_cfg(tmp_path, out_path=blocker / "ber.csv"))


def test_emit_plot_writes_png(tmp_path):
    cfg = _small_cfg(tmp_path, plot_path=tmp_path / "ber.png")
    records = sweep(cfg)
    assert cfg.plot_path.exists() and cfg.plot_path.stat().st_size > 0
    again = emit_plot(records, tmp_path / "again.png")
    assert again.exists()


def test_ber_decreases_with_snr(tmp_path):
    cfg = _small_cfg(
        tmp_path, snr_db=(8.0, 30.0), sir_db=(3.0,), packet_bits=512, trials_per_point=4
    )
    records = sweep(cfg)
    low = [r for r in records if r.snr_db == 8.0]
    high = [r for r in records if r.snr_db == 30.0]
    assert sum(r.bit_errors for r in high) < sum(r.bit_errors for r in low)
    assert all(np.isfinite(r.ber) for r in records)


def test_main_success(tmp_path):
    out = tmp_path / "cli.csv"
    code = cli.main(
        [
            "--snr", "30",
            "--sir", "0:3:3",
            "--packet-bits", "64",
            "--pilot-bits", "8",
            "--trials", "2",
            "--seed", "3",
            "--strategy", "direct",
            "--out", str(out),
            "--threads", "2",
        ]
    )  # fmt: skip
    assert code == 0
    assert len(load_csv(out)) == 4


@pytest.mark.parametrize(
    "args",
    [["--trials", "0"], ["--snr", "abc"], ["--strategy", "magic"], ["--overlap", "0"]],
)
def test_main_config_errors(tmp_path, args):
    assert cli.main([*args, "--out", str(tmp_path / "x.csv")]) == 1


def test_main_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = cli.main(["--snr", "30", "--sir", "0", "--trials", "1", "--out", str(blocker / "x.csv")])
    assert code == 2


def test_overlapped_payload_mask():
    frame = superpose(np.ones(20, dtype=complex), np.ones(20, dtype=complex), 5)
    # 19 frame bits = 2 pilot + 15 payload + 2 pilot; overlap is samples [5, 20).
    second = overlapped_payload_mask(frame, frame.second_span, 2, 15)
    assert second.tolist() == [True] * 12 + [False] * 3
    first = overlapped_payload_mask(frame, frame.first_span, 2, 15)
    assert first.tolist() == [False] * 3 + [True] * 12


def test_only_overlapped_bits_are_counted(tmp_path):
    cfg = _small_cfg(tmp_path, packet_bits=512, mean_overlap=0.8)
    for seed in range(5):
        outcome = run_trial((200.0, 0.0), cfg, seed)
        for party in (ALICE, BOB):
            count = outcome.party(party)
            assert cfg.packet_bits // 2 < count.bits < cfg.packet_bits
            assert count.errors == 0


def _party_ber(cfg, point, seeds, party):
    counts = [run_trial(point, cfg, seed).party(party) for seed in seeds]
    return sum(c.errors for c in counts) / sum(c.bits for c in counts)


def test_ber_surface_at_desk_scale(tmp_path):
    """Errors come from near-cancelling samples, so BER peaks at SIR 0 dB.

    Trials share seeds across points; only the noise scale or B changes.
    """
    cfg = _small_cfg(tmp_path, packet_bits=256)
    seeds = [trial_seed(0, 0, t) for t in range(60)]
    for snr in (20.0, 25.0, 30.0):
        for party in (ALICE, BOB):
            assert _party_ber(cfg, (snr, 3.0), seeds, party) < 0.005
    at_0db = {snr: _party_ber(cfg, (snr, 0.0), seeds, ALICE) for snr in (20.0, 30.0)}
    assert at_0db[20.0] < 0.03
    assert at_0db[20.0] >= at_0db[30.0]
    assert at_0db[20.0] > _party_ber(cfg, (20.0, 3.0), seeds, ALICE)
    assert at_0db[20.0] > _party_ber(cfg, (20.0, -3.0), seeds, ALICE)


def test_direct_and_geometric_ber_agree_under_noise(tmp_path):
    seeds = [trial_seed(5, 0, t) for t in range(40)]
    totals = {}
    for strategy in (Strategy.DIRECT, Strategy.GEOMETRIC):
        cfg = _small_cfg(tmp_path, packet_bits=256, strategy=strategy)
        errors = 0
        for point in ((20.0, 0.0), (25.0, 0.0), (20.0, 3.0)):
            for seed in seeds:
                outcome = run_trial(point, cfg, seed)
                errors += outcome.alice.errors + outcome.bob.errors
        totals[strategy] = errors
    direct, geometric = totals[Strategy.DIRECT], totals[Strategy.GEOMETRIC]
    # Absolute slack covers grids where both counts are tiny.
    assert abs(direct - geometric) <= 0.2 * max(direct, geometric) + 10
