"""End-to-end tests of the command-line surface.

Exit code contract: 0 success, 1 decode failure, 2 usage or config
error, 3 malformed packets file.  Subcommands are exercised in-process
through main(); one subprocess test checks the module entry point.
"""

from __future__ import annotations

import subprocess
import sys

import pytest

from byzfount.cli import main
from byzfount.coding import expand_header, parse_packets
from byzfount.gf2 import BitVector


def run(argv):
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:  # argparse-level usage failures
        return exc.code


MESSAGE = b"corruption resilient fountain"  # 29 bytes


@pytest.fixture
def msg_file(tmp_path):
    p = tmp_path / "msg.bin"
    p.write_bytes(MESSAGE)
    return p


def _encode(tmp_path, msg, **kw):
    out = tmp_path / kw.pop("out", "pkts.bin")
    args = ["encode", "--input", msg, "--out", out]
    for key, value in kw.items():
        args += ["--" + key, value]
    assert run(args) == 0
    return out


# ------------------------------------------------------------------- encode


def test_encode_writes_packets(tmp_path, msg_file, capsys):
    out = _encode(tmp_path, msg_file, blocks=4, count=20, seed=3)
    pkts = parse_packets(out.read_bytes())
    assert len(pkts) == 20
    # 29 bytes = 232 bits, m=4 -> k=58
    assert pkts[0].k == 58 and pkts[0].m == 4
    assert "20 packets" in capsys.readouterr().out


def test_encode_header_forms(tmp_path, msg_file):
    for form in ("dense", "indices", "seed"):
        out = _encode(
            tmp_path, msg_file, blocks=2, count=5, seed=4, header=form, out=f"{form}.bin"
        )
        pkts = parse_packets(out.read_bytes())
        assert all(p.form == form for p in pkts)


def test_encode_missing_input_exit2(tmp_path):
    missing = tmp_path / "nope.bin"
    assert run(["encode", "--input", missing, "--blocks", 2, "--count", 5,
                "--out", tmp_path / "o.bin"]) == 2


def test_encode_blocks_exceed_bits_exit2(tmp_path):
    small = tmp_path / "one.bin"
    small.write_bytes(b"\x42")
    assert run(["encode", "--input", small, "--blocks", 9, "--count", 5,
                "--out", tmp_path / "o.bin"]) == 2


def test_encode_empty_input_exit2(tmp_path):
    empty = tmp_path / "empty.bin"
    empty.write_bytes(b"")
    assert run(["encode", "--input", empty, "--blocks", 1, "--count", 5,
                "--out", tmp_path / "o.bin"]) == 2


# ------------------------------------------------------------------- decode


def test_encode_decode_round_trip_exact(tmp_path, capsys):
    msg = tmp_path / "m.bin"
    msg.write_bytes(b"fifteen  bytes!")  # 120 bits, blocks=8 -> k=15, no padding
    pkts = _encode(tmp_path, msg, blocks=8, count=60, seed=3)
    dec = tmp_path / "dec.bin"
    # plan requires k+2f+eps = 25 packets; the rest are ignored
    assert run(["decode", "--packets", pkts, "--algo", "exhaustive", "--k", 15,
                "--f", 0, "--epsilon", 10, "--seed", 1, "--out", dec]) == 0
    assert dec.read_bytes() == b"fifteen  bytes!"
    assert "recovered" in capsys.readouterr().out


def test_decode_randomized_cli(tmp_path):
    msg = tmp_path / "m.bin"
    msg.write_bytes(b"ab")  # 16 bits, blocks=1 -> k=16
    # g = 1*(16+4)/log2(2) floor + 1 = 21, need >= g+k+f+eps = 42
    pkts = _encode(tmp_path, msg, blocks=1, count=42, seed=9, header="seed")
    dec = tmp_path / "dec.bin"
    assert run(["decode", "--packets", pkts, "--algo", "randomized", "--k", 16,
                "--f", 1, "--epsilon", 4, "--seed", 11, "--out", dec]) == 0
    assert dec.read_bytes() == b"ab"


def test_decode_selective_plan_via_b(tmp_path):
    msg = tmp_path / "m.bin"
    msg.write_bytes(b"Z")  # k=8
    # a=6.0 at b=1: required ceil((a+b)k)=56, threshold ceil(a k)=48
    pkts = _encode(tmp_path, msg, blocks=1, count=60, seed=5)
    dec = tmp_path / "dec.bin"
    assert run(["decode", "--packets", pkts, "--algo", "exhaustive", "--k", 8,
                "--b", 1, "--seed", 1, "--out", dec]) == 0
    assert dec.read_bytes() == b"Z"


def test_decode_b_requires_exhaustive_exit2(tmp_path, msg_file):
    pkts = _encode(tmp_path, msg_file, blocks=1, count=10, seed=5)
    assert run(["decode", "--packets", pkts, "--algo", "bp", "--k", 232,
                "--b", 1, "--out", tmp_path / "d.bin"]) == 2


def test_decode_malformed_exit3(tmp_path, capsys):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"\x00\x01\x02")
    assert run(["decode", "--packets", bad, "--algo", "exhaustive", "--k", 8,
                "--epsilon", 2, "--out", tmp_path / "d.bin"]) == 3
    assert "offset" in capsys.readouterr().err


def test_decode_k_mismatch_exit2(tmp_path, msg_file):
    pkts = _encode(tmp_path, msg_file, blocks=4, count=10, seed=3)
    assert run(["decode", "--packets", pkts, "--algo", "exhaustive", "--k", 57,
                "--epsilon", 2, "--out", tmp_path / "d.bin"]) == 2


def test_decode_bp_stall_exit1(tmp_path, capsys):
    msg = tmp_path / "m.bin"
    msg.write_bytes(b"dense bits never peel here meoww")  # 32 bytes -> k=256
    pkts = _encode(tmp_path, msg, blocks=1, count=40, seed=7, dist="log")
    assert run(["decode", "--packets", pkts, "--algo", "bp", "--k", 256,
                "--out", tmp_path / "d.bin"]) == 1
    assert "Stalled" in capsys.readouterr().err


# ------------------------------------------------------------------- attack


def test_attack_flip_then_decode_fails(tmp_path, capsys):
    msg = tmp_path / "m.bin"
    msg.write_bytes(b"q")  # k=8
    pkts = _encode(tmp_path, msg, blocks=1, count=12, seed=6)
    hit = tmp_path / "hit.bin"
    assert run(["attack", "--packets", pkts, "--strategy", "flip", "--c", "1/4",
                "--adversary", "selective:offline", "--seed", 2, "--out", hit]) == 0
    assert "corrupted 3 of 12" in capsys.readouterr().out
    # threshold k+f+eps = 12 = |N| but only 9 clean equations remain
    assert run(["decode", "--packets", hit, "--algo", "exhaustive", "--k", 8,
                "--f", 0, "--epsilon", 4, "--seed", 1, "--out", tmp_path / "d.bin"]) == 1
    assert "NoCandidate" in capsys.readouterr().err


def test_attack_odd_wire(tmp_path, msg_file, capsys):
    pkts = _encode(tmp_path, msg_file, blocks=2, count=15, seed=8)
    out = tmp_path / "odd.bin"
    assert run(["attack", "--packets", pkts, "--strategy", "odd", "--c", "1/3",
                "--adversary", "selective:online", "--seed", 3, "--out", out]) == 0
    before = parse_packets(pkts.read_bytes())
    after = parse_packets(out.read_bytes())
    assert len(after) == len(before)
    flipped = sum(a.payload != b.payload for a, b in zip(after, before))
    reported = capsys.readouterr().out
    assert f"corrupted {flipped} of 15" in reported
    for a, b in zip(after, before):
        assert a.header == b.header
        if a.payload != b.payload:
            assert a.payload == ~b.payload
            assert expand_header(b).count() % 2 == 1


def test_attack_vanish_requires_target_exit2(tmp_path, msg_file):
    pkts = _encode(tmp_path, msg_file, blocks=2, count=10, seed=8)
    assert run(["attack", "--packets", pkts, "--strategy", "vanish", "--c", "1/3",
                "--adversary", "selective:offline", "--seed", 3,
                "--out", tmp_path / "v.bin"]) == 2


def test_attack_vanish_clears_bit(tmp_path, msg_file):
    pkts = _encode(tmp_path, msg_file, blocks=2, count=24, seed=8)
    out = tmp_path / "v.bin"
    assert run(["attack", "--packets", pkts, "--strategy", "vanish", "--target", 5,
                "--c", "1/3", "--adversary", "selective:offline", "--seed", 3,
                "--out", out]) == 0
    before = parse_packets(pkts.read_bytes())
    after = parse_packets(out.read_bytes())
    cleared = 0
    for a, b in zip(after, before):
        ra, rb = expand_header(a), expand_header(b)
        assert a.payload == b.payload
        if ra != rb:
            assert ra == rb.with_bit(5, 0)
            cleared += 1
    assert cleared >= 1


def test_attack_target_rejected_for_flip_exit2(tmp_path, msg_file):
    pkts = _encode(tmp_path, msg_file, blocks=2, count=10, seed=8)
    assert run(["attack", "--packets", pkts, "--strategy", "flip", "--target", 1,
                "--c", "1/4", "--adversary", "uniform:online", "--seed", 3,
                "--out", tmp_path / "f.bin"]) == 2


def test_attack_bad_adversary_exit2(tmp_path, msg_file):
    pkts = _encode(tmp_path, msg_file, blocks=2, count=10, seed=8)
    for spec in ("uniform", "sneaky:online", "uniform:sometimes"):
        assert run(["attack", "--packets", pkts, "--strategy", "flip", "--c", "1/4",
                    "--adversary", spec, "--seed", 3,
                    "--out", tmp_path / "f.bin"]) == 2


def test_attack_c_out_of_range_exit2(tmp_path, msg_file):
    pkts = _encode(tmp_path, msg_file, blocks=2, count=10, seed=8)
    for c in ("1/2", "0", "-1/5", "elephant"):
        assert run(["attack", "--packets", pkts, "--strategy", "flip", "--c", c,
                    "--adversary", "uniform:online", "--seed", 3,
                    "--out", tmp_path / "f.bin"]) == 2


def test_attack_malformed_exit3(tmp_path):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"\xfc\x0d\x99")
    assert run(["attack", "--packets", bad, "--strategy", "odd", "--c", "1/3",
                "--adversary", "selective:offline", "--seed", 3,
                "--out", tmp_path / "f.bin"]) == 3


# ---------------------------------------------------------------- experiment


RANK_TOML = 'experiment = "rank"\nk = 8\nextra_rows = [0, 2]\n'


def test_experiment_rank_cli(tmp_path, capsys):
    cfg = tmp_path / "rank.toml"
    cfg.write_text(RANK_TOML)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert run(["experiment", "rank", "--config", cfg, "--trials", 30,
                "--seed", 4, "--out", out1]) == 0
    printed = capsys.readouterr().out
    assert "rank_trials.csv" in printed and "rank_summary.json" in printed
    assert run(["experiment", "rank", "--config", cfg, "--trials", 30,
                "--seed", 4, "--out", out2]) == 0
    csv1 = (out1 / "rank_trials.csv").read_bytes()
    assert csv1 == (out2 / "rank_trials.csv").read_bytes()
    assert (out1 / "rank_summary.json").read_bytes() == (
        out2 / "rank_summary.json"
    ).read_bytes()
    assert csv1.splitlines()[0].startswith(b"cell,")


def test_experiment_config_carries_trials(tmp_path):
    cfg = tmp_path / "rank.toml"
    cfg.write_text(RANK_TOML + "trials = 7\nseed = 2\n")
    out = tmp_path / "r"
    assert run(["experiment", "rank", "--config", cfg, "--out", out]) == 0
    lines = (out / "rank_trials.csv").read_text().splitlines()
    assert len(lines) == 1 + 7 * 2  # header + trials x cells


def test_experiment_unknown_key_exit2(tmp_path, capsys):
    cfg = tmp_path / "rank.toml"
    cfg.write_text(RANK_TOML + "walrus = 3\n")
    assert run(["experiment", "rank", "--config", cfg, "--trials", 5,
                "--seed", 4, "--out", tmp_path / "r"]) == 2
    assert "walrus" in capsys.readouterr().err


def test_experiment_kind_mismatch_exit2(tmp_path):
    cfg = tmp_path / "rank.toml"
    cfg.write_text(RANK_TOML)
    assert run(["experiment", "decoder", "--config", cfg, "--trials", 5,
                "--seed", 4, "--out", tmp_path / "r"]) == 2


def test_experiment_missing_trials_exit2(tmp_path):
    cfg = tmp_path / "rank.toml"
    cfg.write_text(RANK_TOML)
    assert run(["experiment", "rank", "--config", cfg, "--seed", 4,
                "--out", tmp_path / "r"]) == 2


def test_experiment_missing_config_exit2(tmp_path):
    assert run(["experiment", "rank", "--config", tmp_path / "ghost.toml",
                "--trials", 5, "--seed", 4, "--out", tmp_path / "r"]) == 2


def test_experiment_shared_value_cli(tmp_path):
    cfg = tmp_path / "sv.toml"
    cfg.write_text(
        'experiment = "shared-value"\nsources = 5\nbyzantine = 1\n'
        "k = 10\nm = 1\nepsilon = 20\n"
    )
    out = tmp_path / "sv"
    assert run(["experiment", "shared-value", "--config", cfg, "--trials", 4,
                "--seed", 6, "--out", out]) == 0
    assert (out / "shared_value_trials.csv").exists()


# ------------------------------------------------------------------- plumbing


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "byzfount.cli", "--help"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    for sub in ("encode", "decode", "attack", "experiment"):
        assert sub in proc.stdout


def test_unknown_subcommand_exit2():
    assert run(["transmogrify"]) == 2
